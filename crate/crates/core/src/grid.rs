use crate::error::{Error, Result};

/// Index of `t` on the grid of step `dt`, or an alignment error if `t` is off-grid.
pub fn grid_index(t: f64, dt: f64) -> Result<i64> {
    let x = t / dt;
    let k = x.round();
    if !x.is_finite() || (x - k).abs() > 1e-7 * k.abs().max(1.0) {
        return Err(Error::Alignment { t, dt });
    }
    Ok(k as i64)
}

/// Integer ratio `coarse / fine`, if `fine` divides `coarse`.
pub fn divides(fine: f64, coarse: f64) -> Option<usize> {
    if !(fine > 0.0) || !(coarse > 0.0) {
        return None;
    }
    let x = coarse / fine;
    let k = x.round();
    if k >= 1.0 && (x - k).abs() <= 1e-9 * k {
        Some(k as usize)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aligned_and_misaligned() {
        assert_eq!(grid_index(0.75, 0.25).unwrap(), 3);
        assert_eq!(grid_index(-1.0, 1.0 / 64.0).unwrap(), -64);
        assert!(matches!(grid_index(0.3, 0.25), Err(Error::Alignment { .. })));
        assert_eq!(divides(0.001, 1.0), Some(1000));
        assert_eq!(divides(0.3, 1.0), None);
    }
}
