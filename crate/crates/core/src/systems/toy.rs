//! Scalar SDE `du = (u − u³) dt + ε dw`.
//!
//! Each grid step is a Strang splitting: half a step of the exact
//! deterministic flow, the noise increment `ε Δw`, then another half step.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::noise::NoisePath;
use crate::systems::state::StateVector;
use crate::systems::{solve_indices, Rds};

/// Exact flow of `u̇ = u − u³` over time `h`, given `eh = e^h` and `m = e^{2h} − 1`.
///
/// For `|u| > 1` the reciprocal form is used, which also maps `±∞` to the
/// finite values `±e^h/√m`.
#[inline]
fn flow(u: f64, eh: f64, m: f64) -> f64 {
    if u.abs() <= 1.0 {
        u * eh / (1.0 + u * u * m).sqrt()
    } else {
        u.signum() * eh / (1.0 / (u * u) + m).sqrt()
    }
}

/// Deterministic flow of `u̇ = u − u³` over time `t`.
pub fn deterministic_flow(u: f64, t: f64) -> f64 {
    flow(u, t.exp(), (2.0 * t).exp_m1())
}

#[derive(Clone, Debug)]
pub struct ToySystem {
    path: NoisePath,
    eps: f64,
    lambda: Arc<[f64]>,
}

impl ToySystem {
    /// `path` must carry a single mode; only its increments are used.
    pub fn new(path: NoisePath, eps: f64) -> Result<Self> {
        if path.modes() != 1 {
            return Err(Error::Config(format!(
                "the scalar system needs a one-mode path, got {} modes",
                path.modes()
            )));
        }
        Ok(ToySystem {
            path,
            eps,
            lambda: Arc::from([1.0]),
        })
    }

    pub fn sample(seed: u64, window: (f64, f64), dt: f64, eps: f64) -> Result<Self> {
        ToySystem::new(NoisePath::sample(seed, window, dt, 1, &[1.0], &[1.0])?, eps)
    }

    /// Scalar solve `φ_t^{θ_τ ω}(u0)`.
    pub fn solve_scalar(&self, tau: f64, u0: f64, t: f64) -> Result<f64> {
        let dt = self.path.dt();
        let (k0, n) = solve_indices(tau, t, dt)?;
        if n == 0 {
            return Ok(u0);
        }
        self.path.require(tau, tau + t)?;
        let h = 0.5 * dt;
        let eh = h.exp();
        let m = (2.0 * h).exp_m1();
        let mut u = u0;
        for k in k0 + 1..=k0 + n {
            u = flow(u, eh, m);
            u += self.eps * self.path.increment(0, k)?;
            u = flow(u, eh, m);
        }
        Ok(u)
    }

    /// Evolves `±3` from `−t_pull` to 0 and returns `(midpoint, gap)`.
    pub fn pullback_point(&self, t_pull: f64) -> Result<(f64, f64)> {
        let hi = self.solve_scalar(-t_pull, 3.0, t_pull)?;
        let lo = self.solve_scalar(-t_pull, -3.0, t_pull)?;
        Ok((0.5 * (hi + lo), hi - lo))
    }
}

impl Rds for ToySystem {
    fn lambda(&self) -> Arc<[f64]> {
        self.lambda.clone()
    }

    fn time_step(&self) -> f64 {
        self.path.dt()
    }

    fn epsilon(&self) -> f64 {
        self.eps
    }

    fn path(&self) -> &NoisePath {
        &self.path
    }

    fn solve(&self, tau: f64, u0: &StateVector, t: f64) -> Result<StateVector> {
        let u = self.solve_scalar(tau, u0.coeffs[0], t)?;
        Ok(StateVector::new(vec![u], self.lambda.clone()))
    }

    /// Envelope of all trajectories started `tau0` earlier: by monotonicity
    /// of the flow every solution lies between the images of `±∞`.
    fn absorbing_radius(&self, t: f64, tau0: f64) -> Result<f64> {
        let hi = self.solve_scalar(t - tau0, f64::INFINITY, tau0)?;
        let lo = self.solve_scalar(t - tau0, f64::NEG_INFINITY, tau0)?;
        Ok(hi.abs().max(lo.abs()))
    }

    fn with_epsilon(&self, eps: f64) -> Self {
        ToySystem {
            eps,
            ..self.clone()
        }
    }
}
