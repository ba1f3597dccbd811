use std::fmt;
use std::sync::Arc;

/// Galerkin coefficient vector against the Dirichlet eigenbasis `e_j`.
///
/// The eigenvalues are shared so that the H, V and higher weighted norms can
/// be evaluated without extra context.
#[derive(Clone, PartialEq)]
pub struct StateVector {
    pub coeffs: Vec<f64>,
    pub lambda: Arc<[f64]>,
}

impl StateVector {
    pub fn new(coeffs: Vec<f64>, lambda: Arc<[f64]>) -> Self {
        debug_assert_eq!(coeffs.len(), lambda.len());
        StateVector { coeffs, lambda }
    }

    pub fn zeros(lambda: Arc<[f64]>) -> Self {
        StateVector {
            coeffs: vec![0.0; lambda.len()],
            lambda,
        }
    }

    /// One-dimensional state with unit eigenvalue (the scalar toy SDE).
    pub fn scalar(u: f64) -> Self {
        StateVector {
            coeffs: vec![u],
            lambda: Arc::from([1.0]),
        }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    /// `L²` norm.
    pub fn h_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// `H¹₀` norm.
    pub fn v_norm(&self) -> f64 {
        self.hs_norm(1.0)
    }

    /// `(Σ λ_j^s c_j²)^{1/2}`.
    pub fn hs_norm(&self, s: f64) -> f64 {
        self.coeffs
            .iter()
            .zip(self.lambda.iter())
            .map(|(c, l)| l.powf(s) * c * c)
            .sum::<f64>()
            .sqrt()
    }

    pub fn scaled(&self, k: f64) -> Self {
        StateVector {
            coeffs: self.coeffs.iter().map(|c| k * c).collect(),
            lambda: self.lambda.clone(),
        }
    }

    pub fn add(&self, other: &StateVector) -> Self {
        StateVector {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
            lambda: self.lambda.clone(),
        }
    }

    pub fn sub(&self, other: &StateVector) -> Self {
        StateVector {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
            lambda: self.lambda.clone(),
        }
    }

    /// `self + k * other`
    pub fn axpy(&self, k: f64, other: &StateVector) -> Self {
        StateVector {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + k * b)
                .collect(),
            lambda: self.lambda.clone(),
        }
    }
}

impl fmt::Debug for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("StateVector").field(&self.coeffs).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lam(j: usize) -> Arc<[f64]> {
        (1..=j).map(|k| (k * k) as f64).collect::<Vec<_>>().into()
    }

    #[test]
    fn norms_on_basis_vector() {
        let mut u = StateVector::zeros(lam(3));
        u.coeffs[2] = 2.0;
        assert_eq!(u.h_norm(), 2.0);
        assert_eq!(u.v_norm(), 6.0);
        assert_eq!(u.hs_norm(2.0), 18.0);
        assert_eq!(u.hs_norm(3.0), 54.0);
    }

    proptest! {
        #[test]
        fn norms_are_absolutely_homogeneous(
            c in proptest::collection::vec(-10.0f64..10.0, 4),
            k in -5.0f64..5.0,
        ) {
            let u = StateVector::new(c, lam(4));
            let ku = u.scaled(k);
            for s in [0.0, 1.0, 2.0, 3.0] {
                let lhs = ku.hs_norm(s);
                let rhs = k.abs() * u.hs_norm(s);
                prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
            }
        }
    }
}
