//! Exponential attractors of discrete cocycles.
//!
//! The pullback construction from slot `−n` to slot 0 with its certified
//! radius `ε_n`, the dimension report, families over the noise amplitude and
//! the lift to continuous time.

mod build;
mod family;
mod formulas;
mod lift;

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Arc;

use crate::diagnostics::{birkhoff_mean, box_dimension};
use crate::error::{Error, Result};
use crate::nets::{entropy_estimate, unit_ball_cloud, NormTag, PointCloud};
use crate::systems::state::StateVector;

pub use build::{build_discrete, propagation_check, semi_invariance_defects, PropagationCheck};
pub use family::build_param_family;
pub use formulas::{dimension_bound, eps_n, holder_exponent_bound};
pub use lift::{lift_continuous, LiftedAttractor};

/// Inputs of a build besides the system and the Lipschitz constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BuildParams {
    pub depth: usize,
    /// Stability margin `r`.
    pub r: f64,
    /// Lattice pitch of the unit V-ball cloud.
    pub unit_pitch: f64,
}

impl BuildParams {
    pub fn validate(&self) -> Result<()> {
        if self.depth == 0 || !(self.r > 0.0) || !(self.unit_pitch > 0.0 && self.unit_pitch <= 1.0) {
            return Err(Error::Config(format!(
                "need depth ≥ 1, r > 0 and pitch in (0, 1], got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Finite approximation of the attractor at slot 0.
///
/// Index `k − 1` of `v` and `e` holds `V_k` and `E_k`, which live at slot
/// `k − n`.
#[derive(Clone, Debug, PartialEq)]
pub struct AttractorApprox {
    pub params: BuildParams,
    pub tau0: f64,
    /// Path time of slot 0.
    pub base_time: f64,
    pub v: Vec<Vec<StateVector>>,
    pub e: Vec<Vec<StateVector>>,
    /// Net radii of `U_0, …, U_{n−1}`.
    pub delta: Vec<f64>,
    pub u_sizes: Vec<usize>,
    /// `K_1, …, K_n` with `K_j` the constant of the step from slot `−j`.
    pub k_seq: Vec<f64>,
    /// Absorbing radii at slots `−n, …, 0`.
    pub radius: Vec<f64>,
    /// `max_{v∈V_k} ‖v‖_V − R` at the slot of `V_k`; positive values are violations.
    pub ball_excess: Vec<f64>,
    pub eps_n: f64,
    /// Minimizing `l` in `ε_n`.
    pub eps_argmin: usize,
}

impl AttractorApprox {
    pub fn depth(&self) -> usize {
        self.params.depth
    }

    /// `E_n`, the approximation at slot 0.
    pub fn e_n(&self) -> &[StateVector] {
        self.e.last().expect("depth ≥ 1")
    }

    /// Slot of `V_k`, `E_k`.
    pub fn slot(&self, k: usize) -> i64 {
        k as i64 - self.params.depth as i64
    }

    /// Resolution of the last step, `K·δ_{n−1} = r 2^{−n−1}`.
    pub fn resolution(&self) -> f64 {
        self.params.r * 2f64.powi(-(self.params.depth as i32) - 1)
    }

    pub fn lambda(&self) -> Arc<[f64]> {
        self.e_n()[0].lambda.clone()
    }

    /// Writes `V_k.csv`, `E_k.csv` and `manifest.txt` into `dir`; `extra`
    /// lines (seed, config hash, …) are appended to the manifest.
    pub fn dump(&self, dir: &Path, extra: &[(String, String)]) -> Result<()> {
        fs::create_dir_all(dir)?;
        for k in 1..=self.depth() {
            fs::write(dir.join(format!("V_{k}.csv")), points_csv(&self.v[k - 1]))?;
            fs::write(dir.join(format!("E_{k}.csv")), points_csv(&self.e[k - 1]))?;
        }
        let list = |x: &[f64]| x.iter().map(|v| format!("{v:.16e}")).collect::<Vec<_>>().join(",");
        let sizes = |s: &[Vec<StateVector>]| s.iter().map(|x| x.len().to_string()).collect::<Vec<_>>().join(",");
        let mut m = vec![
            ("depth".to_string(), self.depth().to_string()),
            ("r".into(), format!("{:.16e}", self.params.r)),
            ("unit_pitch".into(), format!("{:.16e}", self.params.unit_pitch)),
            ("tau0".into(), format!("{:.16e}", self.tau0)),
            ("base_time".into(), format!("{:.16e}", self.base_time)),
            ("eps_n".into(), format!("{:.16e}", self.eps_n)),
            ("eps_argmin".into(), self.eps_argmin.to_string()),
            ("lambda".into(), list(&self.lambda())),
            ("K_seq".into(), list(&self.k_seq)),
            ("delta".into(), list(&self.delta)),
            ("radius".into(), list(&self.radius)),
            ("ball_excess".into(), list(&self.ball_excess)),
            ("V_sizes".into(), sizes(&self.v)),
            ("E_sizes".into(), sizes(&self.e)),
            (
                "U_sizes".into(),
                self.u_sizes.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(","),
            ),
        ];
        m.extend(extra.iter().cloned());
        let mut f = fs::File::create(dir.join("manifest.txt"))?;
        for (k, v) in m {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

/// CSV with columns `point_index, coeff_1..coeff_J`.
pub fn points_csv(points: &[StateVector]) -> String {
    let j = points.first().map_or(0, |p| p.dim());
    let mut s = String::from("point_index");
    for k in 1..=j {
        s.push_str(&format!(",coeff_{k}"));
    }
    s.push('\n');
    for (i, p) in points.iter().enumerate() {
        s.push_str(&i.to_string());
        for c in &p.coeffs {
            s.push_str(&format!(",{c:.16e}"));
        }
        s.push('\n');
    }
    s
}

/// Reads a file written by [`points_csv`].
pub fn read_points_csv(path: &Path, lambda: &Arc<[f64]>) -> Result<Vec<StateVector>> {
    let f = BufReader::new(fs::File::open(path)?);
    let mut out = Vec::new();
    for (n, line) in f.lines().enumerate() {
        let line = line?;
        if n == 0 || line.trim().is_empty() {
            continue;
        }
        let coeffs = line
            .split(',')
            .skip(1)
            .map(|x| x.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse(format!("{}:{}: {e}", path.display(), n + 1)))?;
        if coeffs.len() != lambda.len() {
            return Err(Error::Parse(format!(
                "{}:{}: expected {} coefficients, got {}",
                path.display(),
                n + 1,
                lambda.len(),
                coeffs.len()
            )));
        }
        out.push(StateVector::new(coeffs, lambda.clone()));
    }
    Ok(out)
}

/// Empirical dimension data of an approximation.
#[derive(Clone, Debug, PartialEq)]
pub struct DimensionReport {
    /// Birkhoff mean of `K^m` over the stored constants.
    pub xi: f64,
    pub m: f64,
    /// `max_ε ε^m ln N_ε` of the unit V-ball cloud in H.
    pub c_entropy: f64,
    pub d_bound: f64,
    pub eps_grid: Vec<f64>,
    pub counts: Vec<usize>,
    pub fitted_dim: f64,
    pub fit_residual: f64,
}

/// Dimension bound from the stored constants and a box-counting fit of `E_n`
/// in V over `[eps_lo, eps_hi]`.
pub fn dimension_report(
    approx: &AttractorApprox,
    m: f64,
    eps_lo: f64,
    eps_hi: f64,
    levels: usize,
) -> Result<DimensionReport> {
    let xi = birkhoff_mean(&approx.k_seq, m)?.xi;
    let unit = unit_ball_cloud(&approx.lambda(), approx.params.unit_pitch)?;
    let mut c_entropy: f64 = 0.0;
    let mut eps = 0.5;
    while eps >= 2.0 * approx.params.unit_pitch {
        c_entropy = c_entropy.max(entropy_estimate(&unit, eps)? * eps.powf(m));
        eps /= 2.0;
    }
    let boxes = box_dimension(
        &PointCloud::new(approx.e_n().to_vec(), NormTag::V),
        eps_lo,
        eps_hi,
        levels,
    )?;
    Ok(DimensionReport {
        xi,
        m,
        c_entropy,
        d_bound: dimension_bound(xi, m, c_entropy)?,
        eps_grid: boxes.eps,
        counts: boxes.counts,
        fitted_dim: boxes.dimension,
        fit_residual: boxes.residual,
    })
}
