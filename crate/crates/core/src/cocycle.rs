//! Discrete-time cocycles `ψ_k = φ_{τ₀}` over `σ_k = θ_{kτ₀}`, cocycle
//! verification and empirical Lipschitz constants of the smoothing map.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::divides;
use crate::rng::NormalStream;
use crate::systems::state::StateVector;
use crate::systems::Rds;

/// Time-`τ₀` sampling of a system, with slot `k` starting at `offset + kτ₀`.
#[derive(Clone, Debug)]
pub struct DiscreteRds<S: Rds> {
    pub system: S,
    pub tau0: f64,
    pub offset: f64,
}

impl<S: Rds> DiscreteRds<S> {
    pub fn new(system: S, tau0: f64) -> Result<Self> {
        if divides(system.time_step(), tau0).is_none() {
            return Err(Error::Config(format!(
                "tau0 = {tau0} is not a multiple of the integrator step {}",
                system.time_step()
            )));
        }
        Ok(DiscreteRds {
            system,
            tau0,
            offset: 0.0,
        })
    }

    /// Same system with slots starting at `offset + kτ₀`.
    pub fn with_offset(&self, offset: f64) -> Self {
        DiscreteRds {
            offset,
            ..self.clone()
        }
    }

    pub fn slot_time(&self, k: i64) -> f64 {
        self.offset + k as f64 * self.tau0
    }

    /// `ψ₁^{σ_k ω}(u)`.
    pub fn step(&self, k: i64, u: &StateVector) -> Result<StateVector> {
        self.system.solve(self.slot_time(k), u, self.tau0)
    }

    /// `ψ₁^{σ_k ω}` applied to every point, in parallel and in input order.
    pub fn step_all(&self, k: i64, points: &[StateVector]) -> Result<Vec<StateVector>> {
        points.par_iter().map(|u| self.step(k, u)).collect()
    }

    /// `ψ_l^{σ_k ω}(u)`: `l` consecutive steps from slot `k`.
    pub fn iterate(&self, k: i64, l: usize, u: &StateVector) -> Result<StateVector> {
        let mut x = u.clone();
        for i in 0..l as i64 {
            x = self.step(k + i, &x)?;
        }
        Ok(x)
    }

    /// Absorbing radius at the start of slot `k`.
    pub fn absorbing_radius(&self, k: i64) -> Result<f64> {
        self.system.absorbing_radius(self.slot_time(k), self.tau0)
    }
}

/// `‖φ_{t+s}^ω(u) − φ_t^{θ_s ω}(φ_s^ω(u))‖_H`.
pub fn cocycle_residual<S: Rds>(sys: &S, t: f64, s: f64, u: &StateVector) -> Result<f64> {
    let whole = sys.solve(0.0, u, t + s)?;
    let first = sys.solve(0.0, u, s)?;
    let composed = sys.solve(s, &first, t)?;
    Ok(whole.sub(&composed).h_norm())
}

/// Difference quotients of `ψ₁` between probe pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct LipschitzSample {
    /// Maximum quotient clamped below at 1.
    pub k: f64,
    /// Unclamped maximum.
    pub raw_max: f64,
    /// 95th percentile of the quotients.
    pub p95: f64,
    pub pairs: usize,
}

/// Probe `i` of the ball `B_H(center, radius)`, a pure function of `(seed, i)`.
///
/// Even probes are uniform in the ball; odd probes perturb the preceding even
/// probe on a scale spread over `radius·[10⁻³, 1]`, so small-separation
/// quotients are sampled too.
pub fn probe_point(center: &StateVector, radius: f64, seed: u64, i: usize) -> StateVector {
    let dim = center.dim();
    let draw = |idx: usize| -> (Vec<f64>, f64) {
        let mut s = NormalStream::at(seed, idx as u64, 0);
        let mut d: Vec<f64> = (0..dim).map(|_| s.next_normal()).collect();
        let n = d.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        d.iter_mut().for_each(|x| *x /= n);
        (d, s.next_uniform())
    };
    let base = |idx: usize| -> StateVector {
        let (d, u) = draw(idx);
        let r = radius * u.powf(1.0 / dim as f64);
        center.axpy(r, &StateVector::new(d, center.lambda.clone()))
    };
    if i.is_multiple_of(2) {
        base(i)
    } else {
        let (d, u) = draw(i);
        let scale = radius * 10f64.powf(-3.0 * u);
        base(i - 1).axpy(scale, &StateVector::new(d, center.lambda.clone()))
    }
}

/// Estimates `K` in `‖ψ₁u₁ − ψ₁u₂‖_V ≤ K‖u₁ − u₂‖_H` on `B_H(center, radius)`
/// by the maximum quotient over all pairs of `probes` points.
pub fn lipschitz_estimate<S: Rds>(
    rds: &DiscreteRds<S>,
    k: i64,
    center: &StateVector,
    radius: f64,
    probes: usize,
    seed: u64,
) -> Result<LipschitzSample> {
    if probes < 2 || !(radius > 0.0) {
        return Err(Error::Estimation(format!(
            "need at least 2 probes and a positive radius, got {probes} and {radius}"
        )));
    }
    let pts: Vec<StateVector> = (0..probes)
        .map(|i| probe_point(center, radius, seed, i))
        .collect();
    let images = rds.step_all(k, &pts)?;
    let mut q: Vec<f64> = (0..probes)
        .into_par_iter()
        .flat_map_iter(|i| {
            let (pts, images) = (&pts, &images);
            (i + 1..probes).filter_map(move |j| {
                let den = pts[i].sub(&pts[j]).h_norm();
                (den > 0.0).then(|| images[i].sub(&images[j]).v_norm() / den)
            })
        })
        .collect();
    if q.is_empty() {
        return Err(Error::Estimation("all probe pairs are degenerate".into()));
    }
    q.sort_by(f64::total_cmp);
    let raw_max = *q.last().unwrap();
    let idx = ((q.len() as f64 * 0.95).ceil() as usize).clamp(1, q.len()) - 1;
    Ok(LipschitzSample {
        k: raw_max.max(1.0),
        raw_max,
        p95: q[idx],
        pairs: q.len(),
    })
}

/// Per-slot Lipschitz estimates.
#[derive(Clone, Debug, PartialEq)]
pub struct LipschitzEstimate {
    pub slots: Vec<i64>,
    pub k: Vec<f64>,
    pub p95: Vec<f64>,
    pub radius: Vec<f64>,
    pub probes: usize,
}

impl LipschitzEstimate {
    /// `K` at slot `k`.
    pub fn at(&self, k: i64) -> Option<f64> {
        self.slots.iter().position(|s| *s == k).map(|i| self.k[i])
    }

    /// CSV with columns `k, K_k, probes, region_radius`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,K_k,probes,region_radius\n");
        for i in 0..self.slots.len() {
            s.push_str(&format!(
                "{},{:.16e},{},{:.16e}\n",
                self.slots[i], self.k[i], self.probes, self.radius[i]
            ));
        }
        s
    }
}

/// `K` on the absorbing ball of each slot inflated by `margin`.
pub fn k_sequence<S: Rds>(
    rds: &DiscreteRds<S>,
    slots: &[i64],
    margin: f64,
    probes: usize,
    seed: u64,
) -> Result<LipschitzEstimate> {
    let zero = rds.system.zero();
    let rows = slots
        .par_iter()
        .map(|&k| {
            let radius = rds.absorbing_radius(k)? + margin;
            let est = lipschitz_estimate(rds, k, &zero, radius, probes, seed)?;
            Ok((est.k, est.p95, radius))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LipschitzEstimate {
        slots: slots.to_vec(),
        k: rows.iter().map(|r| r.0).collect(),
        p95: rows.iter().map(|r| r.1).collect(),
        radius: rows.iter().map(|r| r.2).collect(),
        probes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{GalerkinSystem, SystemConfig, ToySystem};

    fn toy(eps: f64) -> ToySystem {
        ToySystem::sample(1, (-10.0, 10.0), 0.01, eps).unwrap()
    }

    #[test]
    fn iterated_steps_equal_one_solve() {
        let rds = DiscreteRds::new(toy(0.4), 0.5).unwrap();
        let u = StateVector::scalar(0.3);
        let iter = rds.iterate(0, 6, &u).unwrap();
        let direct = rds.system.solve(0.0, &u, 3.0).unwrap();
        assert_eq!(iter.coeffs[0].to_bits(), direct.coeffs[0].to_bits());
        assert!(DiscreteRds::new(toy(0.0), 0.333).is_err());
    }

    #[test]
    fn toy_step_fixes_one() {
        let rds = DiscreteRds::new(toy(0.0), 1.0).unwrap();
        let u = rds.step(3, &StateVector::scalar(1.0)).unwrap();
        assert!((u.coeffs[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn residual_trivial_splits() {
        let s = toy(0.5);
        let u = StateVector::scalar(-0.7);
        assert_eq!(cocycle_residual(&s, 1.0, 0.0, &u).unwrap(), 0.0);
        assert_eq!(cocycle_residual(&s, 0.0, 1.0, &u).unwrap(), 0.0);
        assert!(cocycle_residual(&s, 1.3, 2.1, &u).unwrap() <= 1e-10);
    }

    #[test]
    fn linear_heat_lipschitz_is_clamped() {
        let mut c = SystemConfig::heat(1);
        c.dt = 1.0 / 128.0;
        c.epsilon = 0.0;
        let s = GalerkinSystem::sample(c, 2, (-25.0, 5.0)).unwrap();
        let rds = DiscreteRds::new(s, 1.0).unwrap();
        let est = lipschitz_estimate(&rds, 0, &rds.system.zero(), 2.0, 12, 3).unwrap();
        assert_eq!(est.k, 1.0);
        assert!((est.raw_max - (-1.0f64).exp()).abs() < 1e-12);
        assert!((est.p95 - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn estimate_grows_with_probes() {
        let rds = DiscreteRds::new(toy(0.3), 1.0).unwrap();
        let c = StateVector::scalar(0.0);
        let mut last = 0.0;
        for p in [2, 4, 8, 16, 32] {
            let e = lipschitz_estimate(&rds, 0, &c, 1.5, p, 9).unwrap();
            assert!(e.raw_max >= last);
            last = e.raw_max;
        }
        assert!(matches!(
            lipschitz_estimate(&rds, 0, &c, 1.5, 1, 9),
            Err(Error::Estimation(_))
        ));
    }

    #[test]
    fn k_sequence_csv() {
        let rds = DiscreteRds::new(toy(0.2), 1.0).unwrap();
        let est = k_sequence(&rds, &[-2, -1, 0], 0.5, 8, 4).unwrap();
        assert!(est.k.iter().all(|k| *k >= 1.0));
        assert_eq!(est.at(-1), Some(est.k[1]));
        assert!(est.to_csv().starts_with("k,K_k,probes,region_radius\n-2,"));
    }
}
