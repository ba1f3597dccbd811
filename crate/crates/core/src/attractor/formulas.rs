use std::f64::consts::LN_2;

use crate::error::{Error, Result};

/// `r · inf_{l∈[1,n]} (2^{−l} + 2^{2−(n−l)} Π_{j≤l} K_j)` for `n = k_seq.len()`,
/// with the minimizing `l`.
pub fn eps_n(r: f64, k_seq: &[f64]) -> Result<(f64, usize)> {
    let n = k_seq.len();
    if n == 0 {
        return Err(Error::EmptyInput("eps_n needs at least one Lipschitz constant"));
    }
    if let Some(k) = k_seq.iter().find(|k| !(**k >= 1.0)) {
        return Err(Error::Domain(format!("Lipschitz constants must be ≥ 1, got {k}")));
    }
    let mut prod = 1.0;
    let mut best = (f64::INFINITY, 0);
    for l in 1..=n {
        prod *= k_seq[l - 1];
        let v = 2f64.powi(-(l as i32)) + 2f64.powi(2 - (n - l) as i32) * prod;
        if v < best.0 {
            best = (v, l);
        }
    }
    Ok((r * best.0, best.1))
}

/// `2^m C ξ (ln ξ + 2m) / (m ln 2)`.
pub fn dimension_bound(xi: f64, m: f64, c: f64) -> Result<f64> {
    if !(xi >= 1.0) {
        return Err(Error::Domain(format!("ξ must be ≥ 1, got {xi}")));
    }
    if !(m > 0.0) || !(c >= 0.0) {
        return Err(Error::Domain(format!("need m > 0 and C ≥ 0, got m = {m}, C = {c}")));
    }
    Ok(2f64.powf(m) * c * xi * (xi.ln() + 2.0 * m) / (m * LN_2))
}

/// `γ = αη/(η + 8ζ)` with `η = m ln 2/(2m + log₂ ξ)` and `ζ = ln ξ / m`.
pub fn holder_exponent_bound(alpha: f64, xi: f64, m: f64) -> Result<f64> {
    if !(xi >= 1.0) {
        return Err(Error::Domain(format!("ξ must be ≥ 1, got {xi}")));
    }
    if !(alpha > 0.0 && alpha <= 1.0) || !(m > 0.0) {
        return Err(Error::Domain(format!(
            "need α ∈ (0, 1] and m > 0, got α = {alpha}, m = {m}"
        )));
    }
    if xi == 1.0 {
        return Ok(alpha);
    }
    let eta = m * LN_2 / (2.0 * m + xi.log2());
    let zeta = xi.ln() / m;
    Ok(alpha * eta / (eta + 8.0 * zeta))
}
