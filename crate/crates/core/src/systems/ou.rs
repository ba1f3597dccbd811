use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::grid_index;
use crate::noise::NoisePath;
use crate::systems::state::StateVector;

/// Stationary Ornstein–Uhlenbeck process `dU = aΔU dt + dζ` on a sampled path.
///
/// Each mode follows the exact recursion
/// `U_k = q U_{k−1} + c b Δβ_k` with `q = e^{−κ}`, `κ = aλ dt` and
/// `c = √((1 − e^{−2κ})/(2κ))`, started from zero at the window start. The
/// weight `c` makes the one-step variance exact, so the stationary variance is
/// exactly `b²/(2aλ)`. Values are available once `burn_in` has elapsed, where
/// the memory of the zero start is below `e^{−aλ burn_in} b/√(2aλ)`.
#[derive(Clone, Debug)]
pub struct OuProcess {
    path: NoisePath,
    a: f64,
    burn_in: f64,
    /// Relative index of `values[.][0]`.
    lo: i64,
    valid_from: i64,
    values: Arc<Vec<Vec<f64>>>,
    bounds: Arc<[f64]>,
}

impl OuProcess {
    pub fn new(path: &NoisePath, a: f64, burn_in: f64, tol: f64) -> Result<Self> {
        if !(a > 0.0) || !(burn_in > 0.0) {
            return Err(Error::Config(format!(
                "OU process needs a > 0 and burn_in > 0, got a = {a}, burn_in = {burn_in}"
            )));
        }
        let dt = path.dt();
        let bounds: Arc<[f64]> = path
            .b()
            .iter()
            .zip(path.lambda())
            .map(|(b, l)| (-a * l * burn_in).exp() * b / (2.0 * a * l).sqrt())
            .collect();
        if let Some((j, e)) = bounds.iter().enumerate().find(|(_, e)| **e > tol) {
            return Err(Error::Config(format!(
                "burn_in = {burn_in} leaves a truncation error {e:e} in mode {} above {tol:e}",
                j + 1
            )));
        }
        let (lo, hi) = path.index_window();
        let steps = (burn_in / dt - 1e-9).ceil() as i64;
        let mut values = Vec::with_capacity(path.modes());
        for (j, (&b, &l)) in path.b().iter().zip(path.lambda()).enumerate() {
            let kappa = a * l * dt;
            let q = (-kappa).exp();
            let c = (-(-2.0 * kappa).exp_m1() / (2.0 * kappa)).sqrt() * b;
            let mut u = Vec::with_capacity((hi - lo + 1) as usize);
            u.push(0.0);
            let mut x = 0.0;
            for k in lo + 1..=hi {
                x = q * x + c * path.increment(j, k)?;
                u.push(x);
            }
            values.push(u);
        }
        Ok(OuProcess {
            path: path.clone(),
            a,
            burn_in,
            lo,
            valid_from: lo + steps,
            values: Arc::new(values),
            bounds,
        })
    }

    pub fn path(&self) -> &NoisePath {
        &self.path
    }

    pub fn burn_in(&self) -> f64 {
        self.burn_in
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// Per-mode truncation bounds `e^{−aλ_j burn_in} b_j / √(2aλ_j)`.
    pub fn truncation_bounds(&self) -> &[f64] {
        &self.bounds
    }

    /// Relative index range on which `U` is available.
    pub fn index_range(&self) -> (i64, i64) {
        (self.valid_from, self.lo + self.values[0].len() as i64 - 1)
    }

    pub fn valid_window(&self) -> (f64, f64) {
        let (a, b) = self.index_range();
        (a as f64 * self.path.dt(), b as f64 * self.path.dt())
    }

    fn check(&self, k: i64) -> Result<usize> {
        let (a, b) = self.index_range();
        if k < a || k > b {
            let dt = self.path.dt();
            let t = k as f64 * dt;
            return Err(Error::window((t - self.burn_in, t), self.path.window()));
        }
        Ok((k - self.lo) as usize)
    }

    /// Coefficients of `U(k dt)` written into `out`.
    pub fn fill_at_index(&self, k: i64, out: &mut [f64]) -> Result<()> {
        let i = self.check(k)?;
        for (o, v) in out.iter_mut().zip(self.values.iter()) {
            *o = v[i];
        }
        Ok(())
    }

    pub fn at_index(&self, k: i64) -> Result<StateVector> {
        let mut c = vec![0.0; self.values.len()];
        self.fill_at_index(k, &mut c)?;
        Ok(StateVector::new(c, self.path.lambda_arc()))
    }

    /// `U(t)` for grid-aligned `t` with `[t − burn_in, t]` inside the window.
    pub fn at(&self, t: f64) -> Result<StateVector> {
        self.at_index(grid_index(t, self.path.dt())?)
    }

    /// Same process seen from the shifted path `θ_τ ω` (values are shared).
    pub fn shift(&self, tau: f64) -> Result<OuProcess> {
        let k = grid_index(tau, self.path.dt())?;
        let path = self.path.shift(tau)?;
        Ok(OuProcess {
            path,
            lo: self.lo - k,
            valid_from: self.valid_from - k,
            ..self.clone()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::default_spectrum;

    fn single(seed: u64, dt: f64) -> NoisePath {
        NoisePath::sample(seed, (-12.0, 2.0), dt, 1, &[1.0], &[1.0]).unwrap()
    }

    #[test]
    fn zero_amplitudes_give_zero() {
        let (_, l) = default_spectrum(3, 4.0);
        let p = NoisePath::sample(1, (-25.0, 5.0), 0.01, 3, &[0.0; 3], &l).unwrap();
        let ou = OuProcess::new(&p, 1.0, 20.0, 1e-8).unwrap();
        for t in [-5.0, 0.0, 3.0] {
            assert!(ou.at(t).unwrap().coeffs.iter().all(|c| *c == 0.0));
        }
    }

    #[test]
    fn burn_in_precondition_and_bound() {
        let p = single(2, 0.01);
        let ou = OuProcess::new(&p, 1.0, 10.0, 1e-4).unwrap();
        assert!(ou.at(-2.0).is_ok());
        assert!(matches!(ou.at(-2.5), Err(Error::WindowExhausted { .. })));
        assert!(ou.truncation_bounds()[0] < 1e-4);
        assert!(matches!(OuProcess::new(&p, 1.0, 10.0, 1e-8), Err(Error::Config(_))));
    }

    #[test]
    fn shift_shares_values() {
        let p = single(3, 0.01);
        let ou = OuProcess::new(&p, 1.0, 10.0, 1e-4).unwrap();
        let s = ou.shift(0.5).unwrap();
        assert_eq!(s.at(0.0).unwrap(), ou.at(0.5).unwrap());
        let fresh = OuProcess::new(&p.shift(0.5).unwrap(), 1.0, 10.0, 1e-4).unwrap();
        for t in [-1.0, 0.0, 1.5] {
            assert_eq!(fresh.at(t).unwrap(), s.at(t).unwrap());
        }
    }

    #[test]
    fn one_step_matches_closed_form() {
        let p = single(4, 0.25);
        let ou = OuProcess::new(&p, 2.0, 10.0, 1e-4).unwrap();
        let k = 4;
        let prev = ou.at_index(k - 1).unwrap().coeffs[0];
        let next = ou.at_index(k).unwrap().coeffs[0];
        let kappa: f64 = 2.0 * 0.25;
        let c = ((1.0 - (-2.0 * kappa).exp()) / (2.0 * kappa)).sqrt();
        let expect = (-kappa).exp() * prev + c * p.increment(0, k).unwrap();
        assert!((next - expect).abs() < 1e-15);
    }
}
