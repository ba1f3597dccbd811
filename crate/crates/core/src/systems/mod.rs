//! Concrete random dynamical systems over sampled noise paths.

pub mod config;
pub mod galerkin;
pub mod ou;
pub mod state;
pub mod toy;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::grid_index;
use crate::noise::NoisePath;
use state::StateVector;

pub use config::{AbsorbConstants, SystemConfig};
pub use galerkin::GalerkinSystem;
pub use ou::OuProcess;
pub use toy::ToySystem;

/// A system bound to one noise path: `φ_t^{θ_τ ω}` and its absorbing radius.
pub trait Rds: Clone + Send + Sync {
    fn lambda(&self) -> Arc<[f64]>;

    /// Integrator step; every time argument must be a multiple of it.
    fn time_step(&self) -> f64;

    fn epsilon(&self) -> f64;

    fn path(&self) -> &NoisePath;

    /// `φ_t^{θ_τ ω}(u0)`: the solution at time `t` started from `u0` at time 0
    /// under the path shifted by `tau`.
    fn solve(&self, tau: f64, u0: &StateVector, t: f64) -> Result<StateVector>;

    /// Radius `R_{θ_t ω}` of the absorbing ball in V at time `t`.
    fn absorbing_radius(&self, t: f64, tau0: f64) -> Result<f64>;

    /// Same path, different noise amplitude.
    fn with_epsilon(&self, eps: f64) -> Self;

    fn zero(&self) -> StateVector {
        StateVector::zeros(self.lambda())
    }

    /// Samples `φ_s^{θ_τ ω}(u0)` for `s = 0, every, 2·every, …, t`.
    fn trajectory(
        &self,
        tau: f64,
        u0: &StateVector,
        t: f64,
        every: f64,
    ) -> Result<Vec<(f64, StateVector)>> {
        let dt = self.time_step();
        let n = grid_index(t, dt)?;
        let m = grid_index(every, dt)?;
        if n < 0 || m <= 0 {
            return Err(Error::Domain(format!(
                "trajectory needs t ≥ 0 and a positive sampling step, got t = {t}, every = {every}"
            )));
        }
        let mut out = vec![(0.0, u0.clone())];
        let mut u = u0.clone();
        let mut k = 0;
        while k < n {
            let step = m.min(n - k);
            u = self.solve(tau + k as f64 * dt, &u, step as f64 * dt)?;
            k += step;
            out.push((k as f64 * dt, u.clone()));
        }
        Ok(out)
    }
}

/// Validates `(tau, t)` for a solve and returns their grid indices.
pub(crate) fn solve_indices(tau: f64, t: f64, dt: f64) -> Result<(i64, i64)> {
    let k0 = grid_index(tau, dt)?;
    let n = grid_index(t, dt)?;
    if n < 0 {
        return Err(Error::Domain(format!("solve needs t ≥ 0, got {t}")));
    }
    Ok((k0, n))
}
