use std::sync::Arc;

use rayon::prelude::*;

use super::build::{k_values, sweep};
use super::{AttractorApprox, BuildParams};
use crate::cocycle::{DiscreteRds, LipschitzEstimate};
use crate::error::{Error, Result};
use crate::nets::{minkowski_net, unit_ball_cloud};
use crate::systems::Rds;

/// Attractors of `rds` with the noise amplitude replaced by each `ε` of the grid.
///
/// Every member uses the same constants `k_bar`, the same unit-ball lattice
/// and the same path. `U_0` is the parameter net of the absorbing ball, so it
/// moves with `R^ε` in a Lipschitz way, and each `U_k` is the Minkowski net
/// `V_k + greedy(2^{−k} r · unit, δ_k)`, whose second summand does not depend
/// on `ε`. With `ε = 0` no input depends on the path.
pub fn build_param_family<S: Rds>(
    rds: &DiscreteRds<S>,
    eps: &[f64],
    params: &BuildParams,
    k_bar: &LipschitzEstimate,
) -> Result<Vec<AttractorApprox>> {
    params.validate()?;
    if let Some(e) = eps.iter().find(|e| !(-1.0..=1.0).contains(*e)) {
        return Err(Error::Domain(format!("ε = {e} outside [−1, 1]")));
    }
    let k_seq = k_values(k_bar, params.depth)?;
    let unit = Arc::new(unit_ball_cloud(&rds.system.lambda(), params.unit_pitch)?);
    eps.par_iter()
        .map(|e| {
            let member = DiscreteRds {
                system: rds.system.with_epsilon(*e),
                ..rds.clone()
            };
            sweep(&member, params, k_seq.clone(), &unit, |_, vk, rad, dk| {
                Ok(minkowski_net(vk, &unit.scaled(rad), dk)?.centers.points)
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::k_sequence;
    use crate::diagnostics::hausdorff;
    use crate::nets::NormTag;
    use crate::systems::ToySystem;

    fn rds(seed: u64) -> DiscreteRds<ToySystem> {
        DiscreteRds::new(ToySystem::sample(seed, (-10.0, 1.0), 0.01, 0.0).unwrap(), 1.0).unwrap()
    }

    const P: BuildParams = BuildParams {
        depth: 2,
        r: 0.5,
        unit_pitch: 1.0 / 16.0,
    };

    #[test]
    fn zero_noise_member_ignores_the_path() {
        let k = k_sequence(&rds(1), &[-2, -1], 0.5, 24, 7).unwrap();
        let a = build_param_family(&rds(1), &[0.0], &P, &k).unwrap();
        let b = build_param_family(&rds(2), &[0.0], &P, &k).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn equal_parameters_give_equal_members() {
        let base = rds(3);
        let k = k_sequence(&base, &[-2, -1], 0.5, 24, 7).unwrap();
        let f = build_param_family(&base, &[0.3, 0.3, 0.0], &P, &k).unwrap();
        assert_eq!(hausdorff(f[0].e_n(), f[1].e_n(), NormTag::V).unwrap().symmetric, 0.0);
        let d = hausdorff(f[0].e_n(), f[2].e_n(), NormTag::V).unwrap().symmetric;
        assert!(d.is_finite() && d > 0.0);
        assert!(build_param_family(&base, &[1.5], &P, &k).is_err());
    }
}
