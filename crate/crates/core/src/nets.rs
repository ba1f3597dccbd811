//! Covering nets of finite point clouds.
//!
//! Greedy nets in point order, barycentric blends of nets, nets depending on
//! a scalar parameter in a Lipschitz way (dyadic levels in the radius and a
//! uniform grid in the parameter, blended over rectangles), nets of V-balls
//! in H, and nets of Minkowski sums.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::systems::state::StateVector;

/// Metric governing a cloud: `H` (unweighted) or `V` (weights `λ_j`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NormTag {
    H,
    V,
}

impl NormTag {
    #[inline]
    fn weight(self, lambda: f64) -> f64 {
        match self {
            NormTag::H => 1.0,
            NormTag::V => lambda,
        }
    }
}

/// Distance between two states in the given metric.
#[inline]
pub fn distance(a: &StateVector, b: &StateVector, norm: NormTag) -> f64 {
    let mut s = 0.0;
    for j in 0..a.coeffs.len() {
        let d = a.coeffs[j] - b.coeffs[j];
        s += norm.weight(a.lambda[j]) * d * d;
    }
    s.sqrt()
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    pub points: Vec<StateVector>,
    pub norm: NormTag,
}

impl PointCloud {
    pub fn new(points: Vec<StateVector>, norm: NormTag) -> Self {
        PointCloud { points, norm }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Scalar multiple of every point.
    pub fn scaled(&self, k: f64) -> PointCloud {
        PointCloud::new(self.points.iter().map(|p| p.scaled(k)).collect(), self.norm)
    }

    /// Largest norm of a point in the cloud's metric.
    pub fn max_norm(&self) -> f64 {
        self.points
            .iter()
            .map(|p| match self.norm {
                NormTag::H => p.h_norm(),
                NormTag::V => p.v_norm(),
            })
            .fold(0.0, f64::max)
    }

    /// Distance from `x` to the nearest point and that point's index (lowest on ties).
    pub fn nearest(&self, x: &StateVector) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (i, p) in self.points.iter().enumerate() {
            let d = distance(x, p, self.norm);
            if d < best.1 {
                best = (i, d);
            }
        }
        best
    }
}

/// Bounded number of hashed coordinates in the greedy grid.
const HASH_DIMS: usize = 3;

type Cell = [i64; HASH_DIMS];

/// Uniform grid over the first few scaled coordinates, for radius queries.
struct CellIndex {
    delta: f64,
    dims: usize,
    scale: Vec<f64>,
    cells: HashMap<Cell, Vec<usize>>,
}

impl CellIndex {
    fn new(delta: f64, sample: &StateVector, norm: NormTag) -> Self {
        let dims = sample.dim().min(HASH_DIMS);
        let scale = (0..dims).map(|j| norm.weight(sample.lambda[j]).sqrt()).collect();
        CellIndex {
            delta,
            dims,
            scale,
            cells: HashMap::new(),
        }
    }

    fn cell(&self, x: &StateVector) -> Cell {
        let mut c = [0i64; HASH_DIMS];
        for ((cj, xj), sj) in c.iter_mut().zip(&x.coeffs).zip(&self.scale).take(self.dims) {
            *cj = (xj * sj / self.delta).floor() as i64;
        }
        c
    }

    fn insert(&mut self, x: &StateVector, id: usize) {
        let c = self.cell(x);
        self.cells.entry(c).or_default().push(id);
    }

    /// Calls `f` on every stored id whose cell neighbours the cell of `x`.
    fn any_near(&self, x: &StateVector, mut f: impl FnMut(usize) -> bool) -> bool {
        let c = self.cell(x);
        let span = 3usize.pow(self.dims as u32);
        for code in 0..span {
            let mut key = c;
            let mut r = code;
            for slot in key.iter_mut().take(self.dims) {
                *slot = slot.saturating_add((r % 3) as i64 - 1);
                r /= 3;
            }
            if let Some(ids) = self.cells.get(&key) {
                if ids.iter().any(|&i| f(i)) {
                    return true;
                }
            }
        }
        false
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Net {
    pub centers: PointCloud,
    pub delta: f64,
    pub parent_size: usize,
}

impl Net {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// `ln #centers`.
    pub fn entropy(&self) -> f64 {
        (self.centers.len() as f64).ln()
    }

    /// CSV with a commented header and columns `center_index, coeff_1..coeff_J`.
    pub fn to_csv(&self) -> String {
        let j = self.centers.points.first().map_or(0, |p| p.dim());
        let mut s = format!(
            "# delta = {:e}\n# parent_size = {}\n# entropy = {:.16e}\ncenter_index",
            self.delta,
            self.parent_size,
            if self.is_empty() { 0.0 } else { self.entropy() }
        );
        for k in 1..=j {
            s.push_str(&format!(",coeff_{k}"));
        }
        s.push('\n');
        for (i, p) in self.centers.points.iter().enumerate() {
            s.push_str(&i.to_string());
            for c in &p.coeffs {
                s.push_str(&format!(",{c:.16e}"));
            }
            s.push('\n');
        }
        s
    }
}

/// Greedy net built from a stream of points.
pub struct GreedyBuilder {
    delta: f64,
    norm: NormTag,
    index: Option<CellIndex>,
    centers: Vec<StateVector>,
    offered: usize,
}

impl GreedyBuilder {
    pub fn new(delta: f64, norm: NormTag) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::Domain(format!("net radius must be positive, got {delta}")));
        }
        Ok(GreedyBuilder {
            delta,
            norm,
            index: None,
            centers: Vec::new(),
            offered: 0,
        })
    }

    /// Keeps `p` as a center iff it is farther than `delta` from every center so far.
    pub fn offer(&mut self, p: StateVector) -> bool {
        self.offered += 1;
        let index = self
            .index
            .get_or_insert_with(|| CellIndex::new(self.delta, &p, self.norm));
        let (centers, norm, delta) = (&self.centers, self.norm, self.delta);
        if index.any_near(&p, |i| distance(&p, &centers[i], norm) <= delta) {
            return false;
        }
        index.insert(&p, self.centers.len());
        self.centers.push(p);
        true
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn finish(self) -> Net {
        Net {
            centers: PointCloud::new(self.centers, self.norm),
            delta: self.delta,
            parent_size: self.offered,
        }
    }
}

/// Greedy net in point order: a point becomes a center iff it is farther than
/// `delta` from every existing center.
pub fn greedy_net(cloud: &PointCloud, delta: f64) -> Result<Net> {
    if cloud.is_empty() {
        return Err(Error::EmptyInput("greedy_net needs a non-empty cloud"));
    }
    let mut b = GreedyBuilder::new(delta, cloud.norm)?;
    for p in &cloud.points {
        b.offer(p.clone());
    }
    Ok(b.finish())
}

/// `ln #greedy_net(cloud, eps)`.
pub fn entropy_estimate(cloud: &PointCloud, eps: f64) -> Result<f64> {
    Ok(greedy_net(cloud, eps)?.entropy())
}

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    /// Vertices in the order `(x0,y0), (x1,y0), (x1,y1), (x0,y1)`.
    pub fn vertices(&self) -> [(f64, f64); 4] {
        [
            (self.x0, self.y0),
            (self.x1, self.y0),
            (self.x1, self.y1),
            (self.x0, self.y1),
        ]
    }
}

/// Bilinear weights: `θ_i` is the area of the sub-rectangle opposite vertex `i`
/// divided by the area of the rectangle.
pub fn barycentric_weights(rect: &Rect, a: (f64, f64)) -> Result<[f64; 4]> {
    let (x, y) = a;
    if !(rect.x0 < rect.x1 && rect.y0 < rect.y1) {
        return Err(Error::Domain(format!("degenerate rectangle {rect:?}")));
    }
    if !(rect.x0 <= x && x <= rect.x1 && rect.y0 <= y && y <= rect.y1) {
        return Err(Error::Domain(format!("point ({x}, {y}) is outside {rect:?}")));
    }
    let area = (rect.x1 - rect.x0) * (rect.y1 - rect.y0);
    let (l, r) = (x - rect.x0, rect.x1 - x);
    let (b, t) = (y - rect.y0, rect.y1 - y);
    Ok([r * t / area, l * t / area, l * b / area, r * b / area])
}

/// `Σ θ_i u_i`, with signed zeros normalised so equal points compare bitwise.
fn combine(theta: &[f64], members: &[&StateVector]) -> StateVector {
    let mut c = vec![0.0; members[0].dim()];
    for (t, u) in theta.iter().zip(members) {
        for (x, y) in c.iter_mut().zip(&u.coeffs) {
            *x += t * y;
        }
    }
    for x in &mut c {
        *x += 0.0;
    }
    StateVector::new(c, members[0].lambda.clone())
}

pub(crate) fn bits(u: &StateVector) -> Vec<u64> {
    u.coeffs.iter().map(|x| x.to_bits()).collect()
}

fn push_unique(out: &mut Vec<StateVector>, seen: &mut HashSet<Vec<u64>>, u: StateVector) {
    if seen.insert(bits(&u)) {
        out.push(u);
    }
}

/// `[W_1, …, W_n]_θ^α`: all `Σ θ_i u_i` with `u_i ∈ W_i` pairwise within `alpha`,
/// in lexicographic order of member indices, duplicates removed.
pub fn blend_nets(
    w: &[Vec<StateVector>],
    theta: &[f64],
    alpha: f64,
    norm: NormTag,
) -> Vec<StateVector> {
    assert_eq!(w.len(), theta.len(), "one weight per set");
    let mut out = Vec::new();
    if w.iter().any(|s| s.is_empty()) {
        return out;
    }
    let mut seen = HashSet::new();
    let mut chosen: Vec<&StateVector> = Vec::with_capacity(w.len());
    fn dfs<'a>(
        w: &'a [Vec<StateVector>],
        theta: &[f64],
        alpha: f64,
        norm: NormTag,
        chosen: &mut Vec<&'a StateVector>,
        out: &mut Vec<StateVector>,
        seen: &mut HashSet<Vec<u64>>,
    ) {
        let level = chosen.len();
        if level == w.len() {
            push_unique(out, seen, combine(theta, chosen));
            return;
        }
        for u in &w[level] {
            if chosen.iter().all(|v| distance(u, v, norm) <= alpha) {
                chosen.push(u);
                dfs(w, theta, alpha, norm, chosen, out, seen);
                chosen.pop();
            }
        }
    }
    dfs(w, theta, alpha, norm, &mut chosen, &mut out, &mut seen);
    out
}

/// Blend restricted to anchored tuples: for each `u ∈ W_i`, the tuple taking
/// `u` in slot `i` and the nearest point of every other `W_l` (lowest index on
/// ties). Tuples are sorted, deduplicated and filtered by `alpha`.
///
/// The result is a subset of the full blend with at most `Σ #W_i` points.
pub fn blend_anchored(
    w: &[Vec<StateVector>],
    theta: &[f64],
    alpha: f64,
    norm: NormTag,
) -> Vec<StateVector> {
    assert_eq!(w.len(), theta.len(), "one weight per set");
    if w.iter().any(|s| s.is_empty()) {
        return Vec::new();
    }
    let clouds: Vec<PointCloud> = w.iter().map(|s| PointCloud::new(s.clone(), norm)).collect();
    let mut tuples: Vec<Vec<usize>> = (0..w.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let clouds = &clouds;
            (0..w[i].len()).map(move |a| {
                (0..clouds.len())
                    .map(|l| if l == i { a } else { clouds[l].nearest(&w[i][a]).0 })
                    .collect::<Vec<usize>>()
            })
        })
        .collect();
    tuples.sort();
    tuples.dedup();
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for t in tuples {
        let members: Vec<&StateVector> = t.iter().enumerate().map(|(l, &a)| &w[l][a]).collect();
        let ok = (0..members.len())
            .all(|p| (p + 1..members.len()).all(|q| distance(members[p], members[q], norm) <= alpha));
        if ok {
            push_unique(&mut out, &mut seen, combine(theta, &members));
        }
    }
    out
}

/// A cloud depending on a scalar parameter with `d^s(cloud(y₁), cloud(y₂)) ≤ C|y₁ − y₂|`.
pub trait CloudFamily: Sync {
    fn cloud(&self, y: f64) -> PointCloud;
    /// Lipschitz constant `C` of the family.
    fn lipschitz(&self) -> f64;
    /// Parameter interval.
    fn domain(&self) -> (f64, f64);
}

/// `R ↦ R·K` for a fixed cloud `K`; Lipschitz with the largest norm in `K`.
#[derive(Clone, Debug)]
pub struct ScaledFamily {
    pub base: Arc<PointCloud>,
    pub max_r: f64,
    c: f64,
}

impl ScaledFamily {
    pub fn new(base: Arc<PointCloud>, max_r: f64) -> Self {
        let c = base.max_norm();
        ScaledFamily { base, max_r, c }
    }
}

impl CloudFamily for ScaledFamily {
    fn cloud(&self, y: f64) -> PointCloud {
        self.base.scaled(y)
    }

    fn lipschitz(&self) -> f64 {
        self.c
    }

    fn domain(&self) -> (f64, f64) {
        (0.0, self.max_r)
    }
}

/// Parameter net with its construction data.
#[derive(Clone, Debug)]
pub struct ParamNet {
    pub net: Net,
    /// Dyadic level `k` with `2^{−k} < δ ≤ 2^{1−k}`.
    pub level: i32,
    /// Parameter grid pitch `ν_k`.
    pub nu: f64,
    pub grid_index: i64,
    pub theta: [f64; 4],
    pub corner_sizes: [usize; 4],
    /// `d^s(net, cloud(y))`, certified to be at most `δ`.
    pub achieved: f64,
    /// Cardinality bound `#A₁·#A₂·#A₃·#A₄` of the full blend.
    pub size_bound: f64,
}

/// Net of `family.cloud(y)` within `delta`, Lipschitz in `(delta, y)`.
///
/// With level `k`, pitch `ν = 1/N`, `N = ⌊C' 2^{k+4}⌋ + 1` (`C' = max(C, 1)`),
/// and grid `y_j = lo + jν`, the corners of `[2^{−k}, 2^{1−k}] × [y_j, y_{j+1}]`
/// carry greedy nets of radius `2^{−k−4}` (left edge) and `2^{−k−3}` (right
/// edge), blended with the bilinear weights of `(delta, y)` and `α = 2^{−k−1}`.
pub fn param_net(family: &dyn CloudFamily, delta: f64, y: f64) -> Result<ParamNet> {
    let (lo, hi) = family.domain();
    if !(lo <= y && y <= hi) {
        return Err(Error::Domain(format!("parameter {y} outside [{lo}, {hi}]")));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Domain(format!("net radius must be positive, got {delta}")));
    }
    let mut k = (-delta.log2()).ceil() as i32;
    while 2f64.powi(-k) >= delta {
        k += 1;
    }
    while 2f64.powi(1 - k) < delta {
        k -= 1;
    }
    let c = family.lipschitz().max(1.0);
    let n = (c * 2f64.powi(k + 4)).floor() + 1.0;
    let nu = 1.0 / n;
    let cells = (((hi - lo) * n).ceil() as i64).max(1);
    let j = (((y - lo) * n).floor() as i64).clamp(0, cells - 1);
    let y0 = lo + j as f64 * nu;
    let y1 = lo + (j + 1) as f64 * nu;
    let rect = Rect {
        x0: 2f64.powi(-k),
        x1: 2f64.powi(1 - k),
        y0,
        y1,
    };
    let theta = barycentric_weights(&rect, (delta, y.clamp(y0, y1)))?;
    let fine = 2f64.powi(-k - 4);
    let coarse = 2f64.powi(-k - 3);
    let c0 = family.cloud(y0);
    let c1 = family.cloud(y1);
    let corners = [(&c0, fine), (&c0, coarse), (&c1, coarse), (&c1, fine)];
    let nets = corners
        .par_iter()
        .map(|(cl, r)| greedy_net(cl, *r))
        .collect::<Result<Vec<_>>>()?;
    let w: Vec<Vec<StateVector>> = nets.iter().map(|n| n.centers.points.clone()).collect();
    let norm = c0.norm;
    let points = blend_anchored(&w, &theta, 2f64.powi(-k - 1), norm);
    let target = family.cloud(y);
    let net = Net {
        centers: PointCloud::new(points, norm),
        delta,
        parent_size: target.len(),
    };
    let achieved = symmetric_distance(&net.centers, &target)?;
    if achieved > delta {
        return Err(Error::Estimation(format!(
            "parameter net misses its radius: d^s = {achieved:e} > {delta:e}; \
             the family's Lipschitz constant is underestimated"
        )));
    }
    let corner_sizes = [nets[0].len(), nets[1].len(), nets[2].len(), nets[3].len()];
    Ok(ParamNet {
        net,
        level: k,
        nu,
        grid_index: j,
        theta,
        corner_sizes,
        achieved,
        size_bound: corner_sizes.iter().map(|s| *s as f64).product(),
    })
}

/// One-sided and symmetric Hausdorff distances in the cloud metric of `a`.
pub(crate) fn symmetric_distance(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput("distance between empty sets"));
    }
    let one = |x: &PointCloud, y: &PointCloud| {
        x.points
            .par_iter()
            .map(|p| y.nearest(p).1)
            .reduce(|| 0.0, f64::max)
    };
    Ok(one(a, b).max(one(b, a)))
}

/// Lattice sampling of the unit V-ball in the Galerkin coordinates.
///
/// Axis `j` is sampled at the multiples of `pitch` inside
/// `[−λ_j^{−1/2}, λ_j^{−1/2}]` plus both endpoints, modes whose semi-axis is
/// shorter than `pitch` are fixed at 0, and the product grid is filtered to
/// `Σ λ_j x_j² ≤ 1`. The cloud is tagged with the H metric.
pub fn unit_ball_cloud(lambda: &Arc<[f64]>, pitch: f64) -> Result<PointCloud> {
    if !(pitch > 0.0 && pitch <= 1.0) {
        return Err(Error::Config(format!("lattice pitch must lie in (0, 1], got {pitch}")));
    }
    let axes: Vec<Vec<f64>> = lambda
        .iter()
        .map(|l| {
            let a = 1.0 / l.sqrt();
            if a < pitch {
                return vec![0.0];
            }
            let m = (a / pitch + 1e-9).floor() as i64;
            let mut v: Vec<f64> = (-m..=m).map(|i| i as f64 * pitch).collect();
            if (m as f64 * pitch - a).abs() > 1e-12 {
                v.insert(0, -a);
                v.push(a);
            }
            v
        })
        .collect();
    let mut points = Vec::new();
    let mut idx = vec![0usize; axes.len()];
    'outer: loop {
        let c: Vec<f64> = idx.iter().zip(&axes).map(|(&i, ax)| ax[i]).collect();
        let e: f64 = c.iter().zip(lambda.iter()).map(|(x, l)| l * x * x).sum();
        if e <= 1.0 + 1e-12 {
            points.push(StateVector::new(c, lambda.clone()));
        }
        for d in (0..axes.len()).rev() {
            idx[d] += 1;
            if idx[d] < axes[d].len() {
                continue 'outer;
            }
            idx[d] = 0;
        }
        break;
    }
    Ok(PointCloud::new(points, NormTag::H))
}

/// Net of `B_V(R)` in H within `delta`, as the parameter net of `R ↦ R·K`
/// over the unit lattice cloud `K`; depends on `R` in a Lipschitz way and not
/// on any noise.
pub fn ball_net(r: f64, delta: f64, unit: &Arc<PointCloud>) -> Result<ParamNet> {
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("ball radius must be non-negative, got {r}")));
    }
    let family = ScaledFamily::new(unit.clone(), r.max(1.0));
    param_net(&family, delta, r)
}

/// Net of `⋃_{v ∈ V}(v + K)` as `V + greedy_net(K, delta)`, ordered by `(v, c)`.
pub fn minkowski_net(v_set: &[StateVector], k_cloud: &PointCloud, delta: f64) -> Result<Net> {
    if v_set.is_empty() {
        return Err(Error::EmptyInput("minkowski_net needs a non-empty set V"));
    }
    let base = greedy_net(k_cloud, delta)?;
    let mut points = Vec::with_capacity(v_set.len() * base.len());
    for v in v_set {
        for c in &base.centers.points {
            points.push(v.add(c));
        }
    }
    Ok(Net {
        centers: PointCloud::new(points, k_cloud.norm),
        delta,
        parent_size: v_set.len() * k_cloud.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lam(j: usize) -> Arc<[f64]> {
        (1..=j).map(|k| (k * k) as f64).collect::<Vec<_>>().into()
    }

    fn line(xs: &[f64]) -> PointCloud {
        let l: Arc<[f64]> = Arc::from([1.0]);
        PointCloud::new(
            xs.iter().map(|x| StateVector::new(vec![*x], l.clone())).collect(),
            NormTag::H,
        )
    }

    fn xs(c: &PointCloud) -> Vec<f64> {
        c.points.iter().map(|p| p.coeffs[0]).collect()
    }

    #[test]
    fn greedy_examples() {
        let n = greedy_net(&line(&[0.0, 0.4, 1.0]), 0.5).unwrap();
        assert_eq!(xs(&n.centers), vec![0.0, 1.0]);
        let n = greedy_net(&line(&[0.3]), 1e-9).unwrap();
        assert_eq!(xs(&n.centers), vec![0.3]);
        let n = greedy_net(&line(&[0.5, -1.0, 2.0]), 10.0).unwrap();
        assert_eq!(xs(&n.centers), vec![0.5]);
        assert!(matches!(greedy_net(&line(&[]), 1.0), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn streamed_builder_matches_greedy() {
        let c = line(&[0.0, 0.1, 0.35, 0.4, 0.8, 0.95, 1.3, 1.31, 1.9, 2.0]);
        let mut b = GreedyBuilder::new(0.3, NormTag::H).unwrap();
        let kept: Vec<bool> = c.points.iter().map(|p| b.offer(p.clone())).collect();
        assert_eq!(kept.iter().filter(|k| **k).count(), b.len());
        let streamed = b.finish();
        assert_eq!(streamed, greedy_net(&c, 0.3).unwrap());
        assert_eq!(streamed.parent_size, 10);
        assert!(GreedyBuilder::new(0.0, NormTag::V).is_err());
    }

    /// Brute-force minimal cover size for tiny clouds.
    fn minimal_cover(c: &PointCloud, delta: f64) -> usize {
        let n = c.len();
        (1..=n)
            .find(|&s| {
                (0u32..1 << n).filter(|m| m.count_ones() as usize == s).any(|m| {
                    c.points.iter().all(|p| {
                        (0..n).any(|i| m >> i & 1 == 1 && distance(p, &c.points[i], c.norm) <= delta)
                    })
                })
            })
            .unwrap()
    }

    #[test]
    fn greedy_is_within_half_scale_entropy() {
        // greedy centers are δ-separated, so their number is at most the
        // minimal number of δ/2-balls covering the cloud
        let c = line(&[0.0, 0.1, 0.35, 0.4, 0.8, 0.95, 1.3, 1.31, 1.9, 2.0]);
        for d in [0.1, 0.25, 0.5, 1.0] {
            let g = greedy_net(&c, d).unwrap().len();
            assert!(g <= minimal_cover(&c, d / 2.0));
            assert!(g >= minimal_cover(&c, d));
        }
    }

    #[test]
    fn entropy_of_grids() {
        assert_eq!(entropy_estimate(&line(&[1.0]), 0.1).unwrap(), 0.0);
        let mut pts = Vec::new();
        let mut eps = Vec::new();
        for k in 4..10 {
            let n = 1usize << k;
            let s = 1.0 / n as f64;
            let g = line(&(0..n).map(|i| i as f64 * s).collect::<Vec<_>>());
            let e = entropy_estimate(&g, s / 2.0).unwrap();
            assert!((e - (n as f64).ln()).abs() < 1e-12);
            pts.push(e);
            eps.push((2.0 / s).ln());
        }
        let slope = (pts[5] - pts[0]) / (eps[5] - eps[0]);
        assert!((slope - 1.0).abs() < 0.05);
        assert_eq!(entropy_estimate(&line(&[0.0, 1.0]), 5.0).unwrap(), 0.0);
    }

    #[test]
    fn barycentric_examples() {
        let r = Rect { x0: 0.0, x1: 1.0, y0: 0.0, y1: 1.0 };
        assert_eq!(barycentric_weights(&r, (0.5, 0.5)).unwrap(), [0.25; 4]);
        assert_eq!(barycentric_weights(&r, (0.0, 0.0)).unwrap(), [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(
            barycentric_weights(&r, (0.25, 0.5)).unwrap(),
            [0.375, 0.125, 0.125, 0.375]
        );
        assert!(matches!(barycentric_weights(&r, (1.5, 0.5)), Err(Error::Domain(_))));
    }

    #[test]
    fn blend_trivial_cases() {
        let l: Arc<[f64]> = lam(2);
        let p = |a: f64, b: f64| StateVector::new(vec![a, b], l.clone());
        let w1 = vec![p(0.0, 0.0), p(1.0, 0.5), p(-0.25, 2.0)];
        let w2 = vec![p(0.5, 0.5), p(3.0, 1.0)];
        assert_eq!(blend_nets(std::slice::from_ref(&w1), &[1.0], 0.1, NormTag::H), w1);
        assert_eq!(blend_nets(&[w1.clone(), w2.clone()], &[0.0, 1.0], 1e9, NormTag::H), w2);
        assert!(blend_nets(&[w1, w2], &[0.5, 0.5], 1e-3, NormTag::H).is_empty());
    }

    #[test]
    fn blend_lipschitz_fails_for_max_norm_with_four_sets() {
        // θ¹ = (½,½,0,0), θ² = (0,0,½,½): max-norm gap ½, total variation 1
        let l: Arc<[f64]> = Arc::from([1.0]);
        let p = |a: f64| vec![StateVector::new(vec![a], l.clone())];
        let alpha = 1.0;
        let w = [p(0.0), p(0.0), p(alpha), p(alpha)];
        let a = blend_nets(&w, &[0.5, 0.5, 0.0, 0.0], alpha, NormTag::H);
        let b = blend_nets(&w, &[0.0, 0.0, 0.5, 0.5], alpha, NormTag::H);
        let d = symmetric_distance(&PointCloud::new(a, NormTag::H), &PointCloud::new(b, NormTag::H))
            .unwrap();
        assert_eq!(d, alpha);
        assert!(d > alpha * 0.5);
    }

    #[test]
    fn ball_net_at_zero_radius() {
        let unit = Arc::new(unit_ball_cloud(&lam(2), 0.25).unwrap());
        let n = ball_net(0.0, 0.1, &unit).unwrap();
        assert_eq!(n.net.len(), 1);
        assert!(n.net.centers.points[0].coeffs.iter().all(|c| c.to_bits() == 0));
    }

    #[test]
    fn unit_cloud_geometry() {
        let l: Arc<[f64]> = Arc::from([1.0]);
        let c = unit_ball_cloud(&l, 1.0 / 32.0).unwrap();
        assert_eq!(c.len(), 65);
        let c = unit_ball_cloud(&lam(3), 0.4).unwrap();
        assert!(c.points.iter().all(|p| p.v_norm() <= 1.0 + 1e-12));
        // modes 3 has semi-axis 1/3 < 0.4 and stays at zero
        assert!(c.points.iter().all(|p| p.coeffs[2] == 0.0));
        assert!(c.points.iter().any(|p| p.coeffs[1] == 0.5));
    }

    #[test]
    fn param_net_corner_is_the_corner_net() {
        let unit = Arc::new(unit_ball_cloud(&lam(2), 0.25).unwrap());
        let fam = ScaledFamily::new(unit.clone(), 4.0);
        let pn = param_net(&fam, 0.25, 0.0).unwrap();
        // δ = 2^{-2} sits on the right edge of level 3, y on the left edge
        assert_eq!(pn.level, 3);
        assert_eq!(pn.theta, [0.0, 1.0, 0.0, 0.0]);
        let corner = greedy_net(&fam.cloud(0.0), 2f64.powi(-6)).unwrap();
        let mut a: Vec<_> = pn.net.centers.points.iter().map(bits).collect();
        let mut b: Vec<Vec<u64>> = corner
            .centers
            .points
            .iter()
            .map(|p| p.coeffs.iter().map(|x| (x + 0.0).to_bits()).collect())
            .collect();
        a.sort();
        b.sort();
        b.dedup();
        assert_eq!(a, b);
    }

    #[test]
    fn param_net_constant_family_is_y_independent() {
        struct Const(PointCloud);
        impl CloudFamily for Const {
            fn cloud(&self, _: f64) -> PointCloud {
                self.0.clone()
            }
            fn lipschitz(&self) -> f64 {
                0.0
            }
            fn domain(&self) -> (f64, f64) {
                (0.0, 1.0)
            }
        }
        let fam = Const(line(&[0.0, 0.013, 0.2, 0.21, 0.5, 0.77, 1.0]));
        let a = param_net(&fam, 0.03, 0.1).unwrap();
        let b = param_net(&fam, 0.03, 0.93).unwrap();
        let (a, b) = (xs(&a.net.centers), xs(&b.net.centers));
        assert_eq!(a.len(), b.len());
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-12));
        assert!(param_net(&fam, 0.03, 1.5).is_err());
    }

    #[test]
    fn minkowski_of_origin_is_greedy() {
        let k = line(&[0.0, 0.1, 0.5, 0.52, 0.9]);
        let m = minkowski_net(&[StateVector::scalar(0.0)], &k, 0.2).unwrap();
        assert_eq!(xs(&m.centers), xs(&greedy_net(&k, 0.2).unwrap().centers));
        assert!(minkowski_net(&[], &k, 0.2).is_err());
    }

    #[test]
    fn net_csv_header() {
        let n = greedy_net(&line(&[0.0, 1.0]), 0.5).unwrap();
        let csv = n.to_csv();
        assert!(csv.contains("# parent_size = 2\n"));
        assert!(csv.contains("center_index,coeff_1\n0,0.0000000000000000e0\n"));
    }

    fn cloud_strategy() -> impl Strategy<Value = (Vec<Vec<f64>>, f64)> {
        (1usize..5).prop_flat_map(|d| {
            (
                proptest::collection::vec(proptest::collection::vec(-2.0f64..2.0, d), 1..120),
                0.01f64..1.0,
            )
        })
    }

    proptest! {
        #[test]
        fn greedy_covers_and_centers_are_parents((pts, delta) in cloud_strategy(), v in any::<bool>()) {
            let d = pts[0].len();
            let l = lam(d);
            let norm = if v { NormTag::V } else { NormTag::H };
            let cloud = PointCloud::new(
                pts.into_iter().map(|c| StateVector::new(c, l.clone())).collect(), norm);
            let n = greedy_net(&cloud, delta).unwrap();
            for p in &cloud.points {
                prop_assert!(n.centers.nearest(p).1 <= delta);
            }
            for c in &n.centers.points {
                prop_assert!(cloud.points.contains(c));
            }
            for i in 0..n.len() {
                for j in i + 1..n.len() {
                    prop_assert!(distance(&n.centers.points[i], &n.centers.points[j], norm) > delta);
                }
            }
            prop_assert!(entropy_estimate(&cloud, delta * 2.0).unwrap() <= n.entropy());
        }

        #[test]
        fn barycentric_identities(x in 0.0f64..=1.0, y in 0.0f64..=1.0,
                                  x0 in -3.0f64..3.0, w in 0.1f64..4.0, y0 in -3.0f64..3.0, h in 0.1f64..4.0) {
            let r = Rect { x0, x1: x0 + w, y0, y1: y0 + h };
            let a = (x0 + x * w, y0 + y * h);
            let th = barycentric_weights(&r, a).unwrap();
            prop_assert!((th.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            let v = r.vertices();
            let bx: f64 = th.iter().zip(&v).map(|(t, p)| t * p.0).sum();
            let by: f64 = th.iter().zip(&v).map(|(t, p)| t * p.1).sum();
            prop_assert!((bx - a.0).abs() <= 1e-12 * (1.0 + a.0.abs()));
            prop_assert!((by - a.1).abs() <= 1e-12 * (1.0 + a.1.abs()));
            prop_assert!(th.iter().all(|t| (0.0..=1.0).contains(t)));
        }
    }
}
