use std::collections::HashSet;

use rayon::prelude::*;

use super::{build_discrete, AttractorApprox};
use crate::cocycle::{DiscreteRds, LipschitzEstimate};
use crate::error::{Error, Result};
use crate::grid::divides;
use crate::nets::bits;
use crate::systems::state::StateVector;
use crate::systems::Rds;

/// Union of flowed discrete attractors with the sample each point came from.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftedAttractor {
    /// `τ_i = iτ₀/N`.
    pub taus: Vec<f64>,
    pub points: Vec<StateVector>,
    /// Index into `taus` of the first sample producing each point.
    pub provenance: Vec<usize>,
}

/// `⋃_i φ_{τ_i}(E_n anchored at −τ_i)` over `τ_i = iτ₀/N`, `i < N`.
///
/// Sample 0 is `discrete` itself; the others rebuild the attractor on the
/// cocycle whose slots are shifted back by `τ_i`, with the same parameters
/// and constants, and push `E_n` forward to the anchor time.
pub fn lift_continuous<S: Rds>(
    discrete: &AttractorApprox,
    rds: &DiscreteRds<S>,
    k: &LipschitzEstimate,
    tau_samples: usize,
) -> Result<LiftedAttractor> {
    if tau_samples == 0 {
        return Err(Error::Domain("need at least one τ sample".into()));
    }
    if rds.offset != discrete.base_time || rds.tau0 != discrete.tau0 {
        return Err(Error::Config("the cocycle does not match the approximation's slots".into()));
    }
    let h = rds.tau0 / tau_samples as f64;
    if divides(rds.system.time_step(), h).is_none() {
        return Err(Error::Config(format!(
            "τ₀/{tau_samples} = {h} is not a multiple of the integrator step"
        )));
    }
    let taus: Vec<f64> = (0..tau_samples).map(|i| i as f64 * h).collect();
    let images = taus[1..]
        .par_iter()
        .map(|tau| {
            let start = discrete.base_time - tau;
            let a = build_discrete(&rds.with_offset(start), &discrete.params, k)?;
            a.e_n()
                .par_iter()
                .map(|u| rds.system.solve(start, u, *tau))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut seen = HashSet::new();
    let mut points = Vec::new();
    let mut provenance = Vec::new();
    let sources = std::iter::once(discrete.e_n().to_vec()).chain(images);
    for (i, set) in sources.enumerate() {
        for u in set {
            if seen.insert(bits(&u)) {
                points.push(u);
                provenance.push(i);
            }
        }
    }
    Ok(LiftedAttractor {
        taus,
        points,
        provenance,
    })
}
