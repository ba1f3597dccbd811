//! Property battery for the nets module on seeded random instances.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagnostics::hausdorff;
use crate::nets::{barycentric_weights, blend_nets, distance, greedy_net, minkowski_net, NormTag, PointCloud, Rect};
use crate::systems::state::StateVector;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckRow {
    pub check: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// Largest violation over the cases (0 when all pass).
    pub worst: f64,
}

fn lam(d: usize) -> Arc<[f64]> {
    (1..=d).map(|j| (j * j) as f64).collect::<Vec<_>>().into()
}

/// Multiples of `1/8` in `[−2, 2]`, so sums and dyadic convex weights are exact.
fn dyadic_point(rng: &mut ChaCha8Rng, l: &Arc<[f64]>) -> StateVector {
    StateVector::new(
        (0..l.len()).map(|_| rng.random_range(-16i32..=16) as f64 / 8.0).collect(),
        l.clone(),
    )
}

/// Dyadic weights on the simplex with denominator 16.
fn dyadic_simplex(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut cuts: Vec<i32> = (0..n - 1).map(|_| rng.random_range(0..=16)).collect();
    cuts.push(0);
    cuts.push(16);
    cuts.sort();
    cuts.windows(2).map(|w| (w[1] - w[0]) as f64 / 16.0).collect()
}

fn row(check: &'static str, violations: Vec<f64>) -> CheckRow {
    CheckRow {
        check,
        cases: violations.len(),
        failures: violations.iter().filter(|v| **v > 0.0).count(),
        worst: violations.iter().cloned().fold(0.0, f64::max),
    }
}

/// Greedy covering and separation on clouds of up to 500 points in up to 8 dimensions.
pub fn greedy_check(seed: u64, cases: usize) -> CheckRow {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = (0..cases)
        .map(|i| {
            let d = rng.random_range(1..=8);
            let n = rng.random_range(1..=500);
            let l = lam(d);
            let norm = if i % 2 == 0 { NormTag::H } else { NormTag::V };
            let cloud = PointCloud::new(
                (0..n)
                    .map(|_| StateVector::new((0..d).map(|_| rng.random_range(-1.0..1.0)).collect(), l.clone()))
                    .collect(),
                norm,
            );
            let delta = rng.random_range(0.05..1.5);
            let net = greedy_net(&cloud, delta).expect("non-empty cloud");
            let cover = cloud
                .points
                .iter()
                .map(|p| net.centers.nearest(p).1)
                .fold(0.0, f64::max);
            let mut sep = f64::INFINITY;
            for a in 0..net.len() {
                for b in a + 1..net.len() {
                    sep = sep.min(distance(&net.centers.points[a], &net.centers.points[b], norm));
                }
            }
            (cover - delta).max(if sep > delta { 0.0 } else { delta - sep + f64::MIN_POSITIVE })
        })
        .collect();
    row("greedy_cover", v)
}

/// `d^s` of blends at two weight vectors against `α` times their total variation.
pub fn blend_check(seed: u64, cases: usize) -> CheckRow {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = (0..cases)
        .map(|_| {
            let n = rng.random_range(2..=4);
            let l = lam(rng.random_range(1..=3));
            let w: Vec<Vec<StateVector>> = (0..n)
                .map(|_| (0..rng.random_range(1..=5)).map(|_| dyadic_point(&mut rng, &l)).collect())
                .collect();
            let alpha = [1.0, 2.0, 4.0][rng.random_range(0..3)];
            let t1 = dyadic_simplex(&mut rng, n);
            let t2 = dyadic_simplex(&mut rng, n);
            let a = blend_nets(&w, &t1, alpha, NormTag::H);
            let b = blend_nets(&w, &t2, alpha, NormTag::H);
            match (a.is_empty(), b.is_empty()) {
                (true, true) => 0.0,
                (false, false) => {
                    let tv = 0.5 * t1.iter().zip(&t2).map(|(x, y)| (x - y).abs()).sum::<f64>();
                    let d = hausdorff(&a, &b, NormTag::H).unwrap().symmetric;
                    (d - alpha * tv).max(0.0)
                }
                _ => f64::INFINITY,
            }
        })
        .collect();
    row("blend_lipschitz", v)
}

/// Partition of unity and reproduction of the point by the bilinear weights.
pub fn barycentric_check(seed: u64, cases: usize) -> CheckRow {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = (0..cases)
        .map(|_| {
            let x0 = rng.random_range(-3.0..3.0);
            let y0 = rng.random_range(-3.0..3.0);
            let r = Rect {
                x0,
                x1: x0 + rng.random_range(0.1..4.0),
                y0,
                y1: y0 + rng.random_range(0.1..4.0),
            };
            let a = (rng.random_range(r.x0..=r.x1), rng.random_range(r.y0..=r.y1));
            let th = barycentric_weights(&r, a).expect("point inside");
            let vx = r.vertices();
            let bx: f64 = th.iter().zip(&vx).map(|(t, p)| t * p.0).sum();
            let by: f64 = th.iter().zip(&vx).map(|(t, p)| t * p.1).sum();
            let err = (th.iter().sum::<f64>() - 1.0)
                .abs()
                .max((bx - a.0).abs() / (1.0 + a.0.abs()))
                .max((by - a.1).abs() / (1.0 + a.1.abs()));
            (err - 1e-12).max(0.0)
        })
        .collect();
    row("barycentric", v)
}

/// `d^s(V₁ + net(K), V₂ + net(K)) ≤ d^s(V₁, V₂)` on dyadic sets of at most 20 points.
pub fn minkowski_check(seed: u64, cases: usize) -> CheckRow {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = (0..cases)
        .map(|_| {
            let l = lam(rng.random_range(1..=3));
            let (n1, n2, nk) = (
                rng.random_range(1..=20),
                rng.random_range(1..=20),
                rng.random_range(1..=20),
            );
            let mut set = |m: usize| -> Vec<StateVector> { (0..m).map(|_| dyadic_point(&mut rng, &l)).collect() };
            let v1 = set(n1);
            let v2 = set(n2);
            let k = PointCloud::new(set(nk), NormTag::H);
            let delta = [0.25, 0.5, 1.0][rng.random_range(0..3)];
            let m1 = minkowski_net(&v1, &k, delta).unwrap().centers.points;
            let m2 = minkowski_net(&v2, &k, delta).unwrap().centers.points;
            let dm = hausdorff(&m1, &m2, NormTag::H).unwrap().symmetric;
            let dv = hausdorff(&v1, &v2, NormTag::H).unwrap().symmetric;
            (dm - dv).max(0.0)
        })
        .collect();
    row("minkowski_distance", v)
}

/// The full battery with sub-seeds derived from `seed`.
pub fn nets_battery(seed: u64, cases: usize) -> Vec<CheckRow> {
    use crate::rng::derive_seed;
    vec![
        greedy_check(derive_seed(seed, "selftest/greedy"), cases),
        blend_check(derive_seed(seed, "selftest/blend"), cases),
        barycentric_check(derive_seed(seed, "selftest/barycentric"), cases),
        minkowski_check(derive_seed(seed, "selftest/minkowski"), cases),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn battery_passes_and_is_reproducible() {
        let a = nets_battery(3, 20);
        assert!(a.iter().all(|r| r.failures == 0 && r.cases == 20), "{a:?}");
        assert_eq!(a, nets_battery(3, 20));
    }

    #[test]
    fn dyadic_weights_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 2..6 {
            let t = dyadic_simplex(&mut rng, n);
            assert_eq!(t.len(), n);
            assert_eq!(t.iter().sum::<f64>(), 1.0);
        }
    }
}
