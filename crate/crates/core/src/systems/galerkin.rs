//! Spectral Galerkin reaction–diffusion system on `D = (0, π)`.
//!
//! `u̇ − aΔu + f(u) = h + ε ζ̇` is projected on `e_j = √(2/π) sin(jx)`,
//! `λ_j = j²`. The solution is split as `u = εU + v` with `U` the stationary
//! OU process; `v` is advanced by first-order exponential time differencing
//!
//! `v_{n+1} = E v_n + Φ (h − P f(v_n + εU_n))`,
//! `E_j = e^{−aλ_j dt}`, `Φ_j = (1 − E_j)/(aλ_j)`,
//!
//! with the cubic evaluated on `M ≥ 2J` sine collocation points, where the
//! discrete projection of `u³` is exact.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::grid_index;
use crate::noise::NoisePath;
use crate::systems::config::SystemConfig;
use crate::systems::ou::OuProcess;
use crate::systems::state::StateVector;
use crate::systems::{solve_indices, Rds};

/// H-norm beyond which the integrator reports divergence.
pub const BLOWUP_GUARD: f64 = 1e6;

#[derive(Debug)]
struct Operators {
    lambda: Arc<[f64]>,
    e: Vec<f64>,
    phi: Vec<f64>,
    /// `√(2/π) sin(j x_m)`, row-major over collocation points `m`.
    basis: Vec<f64>,
    points: usize,
    /// Quadrature weight `π/(M + 1)`.
    weight: f64,
}

impl Operators {
    fn new(cfg: &SystemConfig) -> Self {
        let lambda: Arc<[f64]> = cfg.lambda().into();
        let j = cfg.modes;
        let m = cfg.collocation;
        let e: Vec<f64> = lambda.iter().map(|l| (-cfg.a * l * cfg.dt).exp()).collect();
        let phi = lambda
            .iter()
            .map(|l| -(-cfg.a * l * cfg.dt).exp_m1() / (cfg.a * l))
            .collect();
        let norm = (2.0 / PI).sqrt();
        let mut basis = Vec::with_capacity(j * m);
        for p in 1..=m {
            let x = p as f64 * PI / (m + 1) as f64;
            for k in 1..=j {
                basis.push(norm * (k as f64 * x).sin());
            }
        }
        Operators {
            lambda,
            e,
            phi,
            basis,
            points: m,
            weight: PI / (m + 1) as f64,
        }
    }

    /// `P(c w³)` for `w = Σ coeffs_j e_j`, added into `out`.
    fn add_cubic(&self, coeffs: &[f64], c: f64, out: &mut [f64]) {
        let j = coeffs.len();
        let k = c * self.weight;
        for row in self.basis.chunks_exact(j).take(self.points) {
            let w: f64 = row.iter().zip(coeffs).map(|(b, x)| b * x).sum();
            let f = k * w * w * w;
            for (o, b) in out.iter_mut().zip(row) {
                *o += f * b;
            }
        }
    }
}

/// Galerkin system bound to one noise path.
#[derive(Clone, Debug)]
pub struct GalerkinSystem {
    cfg: Arc<SystemConfig>,
    ou: Arc<OuProcess>,
    ops: Arc<Operators>,
    eps: f64,
    /// Per relative index `ou_lo + i`: `(‖U‖₁², ‖U‖₂²)`.
    norms: Arc<Vec<(f64, f64)>>,
}

/// Terms of the absorbing radius at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct AbsorbReport {
    pub radius: f64,
    pub r1: f64,
    pub r2: f64,
    pub sup_term: f64,
    /// Exponential weight of the integrands at the truncation point.
    pub cut_weight: f64,
}

impl GalerkinSystem {
    /// Binds `cfg` to `path`, whose grid step, modes and amplitudes must match `cfg`.
    pub fn new(cfg: SystemConfig, path: &NoisePath) -> Result<Self> {
        cfg.validate()?;
        if path.modes() != cfg.modes {
            return Err(Error::Config(format!(
                "path has {} modes but the system has {}",
                path.modes(),
                cfg.modes
            )));
        }
        if (path.dt() - cfg.dt).abs() > 1e-12 * cfg.dt {
            return Err(Error::Config(format!(
                "path step {} differs from the integrator step {}",
                path.dt(),
                cfg.dt
            )));
        }
        if path.lambda() != cfg.lambda().as_slice() {
            return Err(Error::Config("path eigenvalues differ from λ_j = j²".into()));
        }
        let path = if path.b() == cfg.b.as_slice() {
            path.clone()
        } else {
            path.with_amplitudes(&cfg.b)?
        };
        let ou = OuProcess::new(&path, cfg.a, cfg.burn_in, cfg.ou_tol)?;
        let (lo, hi) = ou.index_range();
        let norms = (lo..=hi)
            .map(|k| {
                let u = ou.at_index(k).expect("index inside the OU range");
                (u.hs_norm(1.0).powi(2), u.hs_norm(2.0).powi(2))
            })
            .collect();
        Ok(GalerkinSystem {
            ops: Arc::new(Operators::new(&cfg)),
            eps: cfg.epsilon,
            cfg: Arc::new(cfg),
            ou: Arc::new(ou),
            norms: Arc::new(norms),
        })
    }

    /// Samples a path with the configured spectrum on `window` and binds it.
    pub fn sample(cfg: SystemConfig, seed: u64, window: (f64, f64)) -> Result<Self> {
        let path = NoisePath::sample(seed, window, cfg.dt, cfg.modes, &cfg.b, &cfg.lambda())?;
        GalerkinSystem::new(cfg, &path)
    }

    pub fn config(&self) -> &SystemConfig {
        &self.cfg
    }

    pub fn ou(&self) -> &OuProcess {
        &self.ou
    }

    fn check_ou(&self, k0: i64, n: i64) -> Result<()> {
        let (lo, hi) = self.ou.index_range();
        if k0 < lo || k0 + n > hi {
            let dt = self.cfg.dt;
            let (a, b) = self.ou.valid_window();
            return Err(Error::window(
                (k0 as f64 * dt - self.cfg.burn_in, (k0 + n) as f64 * dt),
                (a - self.cfg.burn_in, b),
            ));
        }
        Ok(())
    }

    /// `out = E w + Φ(h − P f(z))`.
    fn etd(&self, w: &[f64], z: &[f64], out: &mut [f64]) {
        let ops = &self.ops;
        let mut f = vec![0.0; z.len()];
        for (fj, zj) in f.iter_mut().zip(z) {
            *fj = self.cfg.f_linear * zj;
        }
        if self.cfg.f_cubic != 0.0 {
            ops.add_cubic(z, self.cfg.f_cubic, &mut f);
        }
        for j in 0..w.len() {
            out[j] = ops.e[j] * w[j] + ops.phi[j] * (self.cfg.h[j] - f[j]);
        }
    }

    fn guard(&self, c: &[f64], t: f64) -> Result<()> {
        let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm <= BLOWUP_GUARD) {
            return Err(Error::Divergence { t, norm });
        }
        Ok(())
    }

    /// `P f(u)` for a state `u` (exact for the cubic when `M ≥ 2J`).
    pub fn nonlinearity(&self, u: &StateVector) -> StateVector {
        let mut f: Vec<f64> = u.coeffs.iter().map(|c| self.cfg.f_linear * c).collect();
        if self.cfg.f_cubic != 0.0 {
            self.ops.add_cubic(&u.coeffs, self.cfg.f_cubic, &mut f);
        }
        StateVector::new(f, self.ops.lambda.clone())
    }

    /// `U(t)` of the bound path.
    pub fn ou_at(&self, t: f64) -> Result<StateVector> {
        self.ou.at(t)
    }

    /// Continuous `v`-chain: `v(t1)` from `v(t0) = v0` (absolute path times).
    pub fn evolve_v(&self, v0: &StateVector, t0: f64, t1: f64) -> Result<StateVector> {
        let dt = self.cfg.dt;
        let k0 = grid_index(t0, dt)?;
        let k1 = grid_index(t1, dt)?;
        if k1 < k0 {
            return Err(Error::Domain(format!("evolve_v needs t0 ≤ t1, got {t0} > {t1}")));
        }
        self.check_ou(k0, k1 - k0)?;
        let j = self.cfg.modes;
        let mut v = v0.coeffs.clone();
        let mut z = vec![0.0; j];
        let mut u = vec![0.0; j];
        let mut next = vec![0.0; j];
        for k in k0..k1 {
            self.ou.fill_at_index(k, &mut u)?;
            for i in 0..j {
                z[i] = v[i] + self.eps * u[i];
            }
            self.etd(&v, &z, &mut next);
            std::mem::swap(&mut v, &mut next);
            self.guard(&v, (k + 1) as f64 * dt)?;
        }
        Ok(StateVector::new(v, self.ops.lambda.clone()))
    }

    /// Absorbing radius with its constituent terms.
    ///
    /// The pullback integrals start at the first time where `U` is available;
    /// the weight of the integrand there is reported as `cut_weight`.
    pub fn absorbing_report(&self, t: f64, tau0: f64) -> Result<AbsorbReport> {
        let dt = self.cfg.dt;
        let kt = grid_index(t, dt)?;
        let k0 = grid_index(tau0, dt)?;
        let (lo, hi) = self.ou.index_range();
        let end = kt + k0;
        if end > hi || end <= lo {
            let (a, b) = self.ou.valid_window();
            return Err(Error::window((t, t + tau0), (a, b)));
        }
        let c = &self.cfg.consts;
        let half_p = 0.5 * (self.cfg.p + 1.0);
        let e2 = self.eps * self.eps;
        let mut r1 = 0.0;
        let mut r2 = 0.0;
        let mut sup: f64 = 0.0;
        for s in lo..=end {
            let (n1, n2) = self.norms[(s - lo) as usize];
            let rel = (s - end) as f64 * dt;
            let w = (c.delta * rel).exp();
            sup = sup.max((c.delta * (rel + 2.0 * tau0)).exp() * e2 * n1);
            if s > lo {
                r1 += dt * w * (e2 * n1).powf(half_p);
                r2 += dt * (c.delta * (rel + 3.0)).exp() * (e2 * n2).powf(half_p);
            }
        }
        let sq = 8.0 * (1.0 + c.c3 + c.c4 * r1 + c.c2 * r2 + sup);
        Ok(AbsorbReport {
            radius: sq.sqrt(),
            r1,
            r2,
            sup_term: sup,
            cut_weight: (c.delta * (lo - end) as f64 * dt).exp(),
        })
    }
}

impl Rds for GalerkinSystem {
    fn lambda(&self) -> Arc<[f64]> {
        self.ops.lambda.clone()
    }

    fn time_step(&self) -> f64 {
        self.cfg.dt
    }

    fn epsilon(&self) -> f64 {
        self.eps
    }

    fn path(&self) -> &NoisePath {
        self.ou.path()
    }

    /// Each step splits `u_n = εU_n + v_n`, advances `v` and recombines, so
    /// restarting from any intermediate state reproduces the same iterates.
    fn solve(&self, tau: f64, u0: &StateVector, t: f64) -> Result<StateVector> {
        let dt = self.cfg.dt;
        let (k0, n) = solve_indices(tau, t, dt)?;
        if n == 0 {
            return Ok(u0.clone());
        }
        self.check_ou(k0, n)?;
        let j = self.cfg.modes;
        let mut u = u0.coeffs.clone();
        let mut uo = vec![0.0; j];
        let mut w = vec![0.0; j];
        let mut next = vec![0.0; j];
        self.ou.fill_at_index(k0, &mut uo)?;
        for k in k0..k0 + n {
            for i in 0..j {
                w[i] = u[i] - self.eps * uo[i];
            }
            self.etd(&w, &u, &mut next);
            self.ou.fill_at_index(k + 1, &mut uo)?;
            for i in 0..j {
                u[i] = self.eps * uo[i] + next[i];
            }
            self.guard(&u, (k + 1 - k0) as f64 * dt)?;
        }
        Ok(StateVector::new(u, self.ops.lambda.clone()))
    }

    fn absorbing_radius(&self, t: f64, tau0: f64) -> Result<f64> {
        Ok(self.absorbing_report(t, tau0)?.radius)
    }

    fn with_epsilon(&self, eps: f64) -> Self {
        GalerkinSystem {
            eps,
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(modes: usize) -> SystemConfig {
        SystemConfig {
            dt: 1.0 / 64.0,
            burn_in: 20.0,
            ..SystemConfig::new(modes)
        }
    }

    #[test]
    fn collocation_projection_is_exact_for_one_mode_cubic() {
        let s = GalerkinSystem::sample(cfg(4), 1, (-25.0, 5.0)).unwrap();
        let mut u = s.zero();
        u.coeffs[0] = 0.7;
        let f = s.nonlinearity(&u);
        // P₁(u³ − u) for u = c e₁ is (3/(2π)) c³ − c
        let c: f64 = 0.7;
        assert!((f.coeffs[0] - (1.5 / PI * c.powi(3) - c)).abs() < 1e-14);
        // P₃(e₁³) = −(1/(2π)) c³, even modes vanish
        assert!((f.coeffs[2] + 0.5 / PI * c.powi(3)).abs() < 1e-14);
        assert!(f.coeffs[1].abs() < 1e-14 && f.coeffs[3].abs() < 1e-14);
    }

    #[test]
    fn collocation_matches_fine_quadrature() {
        let s = GalerkinSystem::sample(cfg(5), 2, (-25.0, 5.0)).unwrap();
        let coeffs = vec![0.4, -0.3, 0.2, 0.1, -0.25];
        let u = StateVector::new(coeffs.clone(), s.lambda());
        let f = s.nonlinearity(&u);
        // midpoint rule with many points as an independent oracle
        let n = 20000;
        let h = PI / n as f64;
        let e = |j: usize, x: f64| (2.0 / PI).sqrt() * (j as f64 * x).sin();
        for j in 1..=5 {
            let mut acc = 0.0;
            for i in 0..n {
                let x = (i as f64 + 0.5) * h;
                let w: f64 = (1..=5).map(|k| coeffs[k - 1] * e(k, x)).sum();
                acc += (w * w * w - w) * e(j, x) * h;
            }
            assert!((f.coeffs[j - 1] - acc).abs() < 1e-8, "mode {j}: {} vs {acc}", f.coeffs[j - 1]);
        }
    }

    #[test]
    fn heat_flow_is_exact_per_mode() {
        let mut c = SystemConfig::heat(6);
        c.dt = 1e-3;
        c.epsilon = 0.0;
        let s = GalerkinSystem::sample(c, 3, (-21.0, 2.0)).unwrap();
        let u0 = StateVector::new(vec![1.0, -0.5, 0.25, 0.1, 2.0, -1.0], s.lambda());
        let u = s.solve(0.0, &u0, 0.5).unwrap();
        for j in 0..6 {
            let l = ((j + 1) * (j + 1)) as f64;
            assert!((u.coeffs[j] - (-l * 0.5f64).exp() * u0.coeffs[j]).abs() < 1e-10);
        }
    }

    #[test]
    fn solve_and_v_chain_agree() {
        let mut c = cfg(4);
        c.epsilon = 0.5;
        let s = GalerkinSystem::sample(c, 4, (-25.0, 5.0)).unwrap();
        let mut u0 = s.zero();
        u0.coeffs[0] = 1.5;
        u0.coeffs[1] = -0.5;
        let tau = -1.0;
        let t = 2.0;
        let u = s.solve(tau, &u0, t).unwrap();
        let v0 = u0.axpy(-0.5, &s.ou_at(tau).unwrap());
        let v = s.evolve_v(&v0, tau, tau + t).unwrap();
        let recon = v.axpy(0.5, &s.ou_at(tau + t).unwrap());
        assert!(u.sub(&recon).h_norm() < 1e-12);
    }

    #[test]
    fn divergence_guard() {
        let mut c = cfg(2);
        c.dt = 0.5;
        c.burn_in = 20.0;
        let s = GalerkinSystem::sample(c, 5, (-22.0, 10.0)).unwrap();
        let mut u0 = s.zero();
        u0.coeffs[0] = 50.0;
        assert!(matches!(s.solve(0.0, &u0, 5.0), Err(Error::Divergence { .. })));
    }

    #[test]
    fn absorbing_radius_properties() {
        let c = cfg(4);
        let s = GalerkinSystem::sample(c, 6, (-30.0, 10.0)).unwrap();
        let det = s.with_epsilon(0.0).absorbing_radius(0.0, 1.0).unwrap();
        assert!((det - (8.0f64 * 2.0).sqrt()).abs() < 1e-15);
        for t in [0.0, 1.0, 2.5] {
            let r1 = s.with_epsilon(1.0).absorbing_radius(t, 1.0).unwrap();
            let rh = s.with_epsilon(0.5).absorbing_radius(t, 1.0).unwrap();
            assert!(rh <= r1);
        }
        let base = s.with_epsilon(1.0).absorbing_report(0.0, 1.0).unwrap();
        assert!((base.cut_weight - (-0.5f64 * 11.0).exp()).abs() < 1e-12);
        for t in [0.5, 1.0, 3.0] {
            let r = s.with_epsilon(1.0).absorbing_radius(t, 1.0).unwrap();
            assert!(r * r >= (-0.5 * t).exp() * base.radius * base.radius * (1.0 - 1e-12));
        }
        assert!(matches!(s.absorbing_radius(9.5, 1.0), Err(Error::WindowExhausted { .. })));
    }
}
