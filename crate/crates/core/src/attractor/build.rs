use std::collections::HashSet;
use std::sync::Arc;

use super::{eps_n, AttractorApprox, BuildParams};
use crate::cocycle::{DiscreteRds, LipschitzEstimate};
use crate::diagnostics::deviation;
use crate::error::{Error, Result};
use crate::nets::{ball_net, bits, unit_ball_cloud, GreedyBuilder, NormTag, PointCloud};
use crate::systems::state::StateVector;
use crate::systems::Rds;

/// `K_j` at slot `−j` for `j = 1..=n`.
pub(super) fn k_values(k: &LipschitzEstimate, n: usize) -> Result<Vec<f64>> {
    (1..=n as i64)
        .map(|j| {
            let v = k
                .at(-j)
                .ok_or_else(|| Error::Config(format!("no Lipschitz constant for slot {}", -j)))?;
            if !(v >= 1.0) {
                return Err(Error::Domain(format!("degenerate Lipschitz constant {v} at slot {}", -j)));
            }
            Ok(v)
        })
        .collect()
}

/// Appends the points of `src` not yet in `seen`, in order.
fn extend_unique(out: &mut Vec<StateVector>, seen: &mut HashSet<Vec<u64>>, src: Vec<StateVector>) {
    for u in src {
        if seen.insert(bits(&u)) {
            out.push(u);
        }
    }
}

/// The pullback sweep from slot `−n`; `renet(k, V_k, radius, δ_k)` returns `U_k`
/// as a net of `⋃_{v∈V_k} B_V(v, radius)`.
pub(super) fn sweep<S: Rds>(
    rds: &DiscreteRds<S>,
    params: &BuildParams,
    k_seq: Vec<f64>,
    unit: &Arc<PointCloud>,
    renet: impl Fn(usize, &[StateVector], f64, f64) -> Result<Vec<StateVector>>,
) -> Result<AttractorApprox> {
    let n = params.depth;
    let r = params.r;
    let radius = (-(n as i64)..=0)
        .map(|s| rds.absorbing_radius(s))
        .collect::<Result<Vec<_>>>()?;
    let d0 = r / (2.0 * k_seq[n - 1]);
    let mut u = ball_net(radius[0], d0, unit)?.net.centers.points;
    let mut delta = vec![d0];
    let mut u_sizes = vec![u.len()];
    let mut v_all = Vec::with_capacity(n);
    let mut e_all: Vec<Vec<StateVector>> = Vec::with_capacity(n);
    let mut ball_excess = Vec::with_capacity(n);
    for k in 1..=n {
        let from = k as i64 - 1 - n as i64;
        let vk = rds.step_all(from, &u)?;
        ball_excess.push(
            vk.iter()
                .map(|x| x.v_norm() - radius[k])
                .fold(f64::NEG_INFINITY, f64::max),
        );
        let mut seen = HashSet::new();
        let mut ek = Vec::new();
        extend_unique(&mut ek, &mut seen, vk.clone());
        if let Some(prev) = e_all.last() {
            extend_unique(&mut ek, &mut seen, rds.step_all(from, prev)?);
        }
        if k < n {
            let dk = r / (2f64.powi(k as i32 + 2) * k_seq[n - k - 1]);
            u = renet(k, &vk, r * 2f64.powi(-(k as i32)), dk)?;
            delta.push(dk);
            u_sizes.push(u.len());
        }
        v_all.push(vk);
        e_all.push(ek);
    }
    let (eps, argmin) = eps_n(r, &k_seq)?;
    Ok(AttractorApprox {
        params: *params,
        tau0: rds.tau0,
        base_time: rds.offset,
        v: v_all,
        e: e_all,
        delta,
        u_sizes,
        k_seq,
        radius,
        ball_excess,
        eps_n: eps,
        eps_argmin: argmin,
    })
}

/// Exponential attractor at slot 0 of `rds` from a pullback sweep of `depth` steps.
///
/// `U_0` is a net of the absorbing ball at slot `−n` with `δ = r/(2K)`; each
/// `U_k` is a greedy net, with `δ_k = r/(2^{k+2}K)`, of the points
/// `v + 2^{−k} r c` over `v ∈ V_k` and the unit-ball lattice `c`, streamed in
/// `(v, c)` order. `K` is the constant of the slot the net is stepped from.
pub fn build_discrete<S: Rds>(
    rds: &DiscreteRds<S>,
    params: &BuildParams,
    k: &LipschitzEstimate,
) -> Result<AttractorApprox> {
    params.validate()?;
    let k_seq = k_values(k, params.depth)?;
    let unit = Arc::new(unit_ball_cloud(&rds.system.lambda(), params.unit_pitch)?);
    sweep(rds, params, k_seq, &unit, |_, vk, rad, dk| {
        let mut b = GreedyBuilder::new(dk, NormTag::H)?;
        let scaled = unit.scaled(rad);
        for v in vk {
            for c in &scaled.points {
                b.offer(v.add(c));
            }
        }
        Ok(b.finish().centers.points)
    })
}

/// Number of points of `ψ(E_k)` missing from `E_{k+1}`, for `k = 1..n−1`.
pub fn semi_invariance_defects<S: Rds>(approx: &AttractorApprox, rds: &DiscreteRds<S>) -> Result<Vec<usize>> {
    if rds.offset != approx.base_time || rds.tau0 != approx.tau0 {
        return Err(Error::Config("the cocycle does not match the approximation's slots".into()));
    }
    (1..approx.depth())
        .map(|k| {
            let next: HashSet<Vec<u64>> = approx.e[k].iter().map(bits).collect();
            let img = rds.step_all(approx.slot(k), &approx.e[k - 1])?;
            Ok(img.iter().filter(|u| !next.contains(&bits(u))).count())
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagationCheck {
    /// `d_V(E_k, ψ_l(net of the absorbing ball l slots earlier))`.
    pub distance: f64,
    /// `2^{2−(k−l)} r Π_{j≤l} K_j`.
    pub bound: f64,
    /// `Π_{j≤l} K_j · (δ + R·pitch)`, the error of sampling the ball.
    pub tolerance: f64,
}

impl PropagationCheck {
    pub fn holds(&self) -> bool {
        self.distance <= self.bound + self.tolerance
    }
}

/// Compares `E_k` with the `l`-step image of a `net_delta`-net of the
/// absorbing ball at slot `k − n − l`, for `l ≤ k`.
pub fn propagation_check<S: Rds>(
    approx: &AttractorApprox,
    rds: &DiscreteRds<S>,
    k: usize,
    l: usize,
    net_delta: f64,
) -> Result<PropagationCheck> {
    let n = approx.depth();
    if !(1..=n).contains(&k) || l > k {
        return Err(Error::Domain(format!("need 1 ≤ k ≤ {n} and l ≤ k, got k = {k}, l = {l}")));
    }
    let slot = approx.slot(k);
    let start = slot - l as i64;
    let big_r = rds.absorbing_radius(start)?;
    let unit = Arc::new(unit_ball_cloud(&approx.lambda(), approx.params.unit_pitch)?);
    let mut pts = ball_net(big_r, net_delta, &unit)?.net.centers.points;
    for s in start..slot {
        pts = rds.step_all(s, &pts)?;
    }
    let prod: f64 = (1..=l as i64).map(|j| approx.k_seq[(j - slot - 1) as usize]).product();
    Ok(PropagationCheck {
        distance: deviation(&approx.e[k - 1], &pts, NormTag::V)?,
        bound: 2f64.powi(2 - (k as i32 - l as i32)) * approx.params.r * prod,
        tolerance: prod * (net_delta + big_r * approx.params.unit_pitch),
    })
}
