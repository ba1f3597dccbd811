//! Set distances, box counting, decay fits, Birkhoff averages, Hölder fits
//! and moment ratios.

use rayon::prelude::*;

use crate::attractor::AttractorApprox;
use crate::cocycle::DiscreteRds;
use crate::error::{Error, Result};
use crate::nets::{distance, greedy_net, NormTag, PointCloud};
use crate::systems::state::StateVector;
use crate::systems::Rds;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistanceReport {
    /// `sup_{a∈A} d(a, B)`
    pub forward: f64,
    /// `sup_{b∈B} d(b, A)`
    pub backward: f64,
    pub symmetric: f64,
}

/// Points sorted by their first scaled coordinate, for pruned nearest queries.
struct SortedSet<'a> {
    keys: Vec<f64>,
    points: Vec<&'a StateVector>,
    scale: f64,
    norm: NormTag,
}

impl<'a> SortedSet<'a> {
    fn new(points: &'a [StateVector], norm: NormTag) -> Self {
        let scale = match norm {
            NormTag::H => 1.0,
            NormTag::V => points[0].lambda[0].sqrt(),
        };
        let mut v: Vec<&StateVector> = points.iter().collect();
        v.sort_by(|a, b| a.coeffs[0].total_cmp(&b.coeffs[0]));
        SortedSet {
            keys: v.iter().map(|p| p.coeffs[0] * scale).collect(),
            points: v,
            scale,
            norm,
        }
    }

    /// Exact nearest distance; the first-coordinate gap bounds the distance below.
    fn nearest(&self, x: &StateVector) -> f64 {
        let key = x.coeffs[0] * self.scale;
        let pos = self.keys.partition_point(|k| *k < key);
        let mut best = f64::INFINITY;
        let mut lo = pos;
        let mut hi = pos;
        loop {
            let mut moved = false;
            if hi < self.keys.len() && self.keys[hi] - key <= best {
                best = best.min(distance(x, self.points[hi], self.norm));
                hi += 1;
                moved = true;
            }
            if lo > 0 && key - self.keys[lo - 1] <= best {
                lo -= 1;
                best = best.min(distance(x, self.points[lo], self.norm));
                moved = true;
            }
            if !moved {
                return best;
            }
        }
    }
}

fn directed(a: &[StateVector], b: &SortedSet<'_>) -> f64 {
    a.par_iter().map(|p| b.nearest(p)).reduce(|| 0.0, f64::max)
}

/// Exact one-sided and symmetric Hausdorff distances.
pub fn hausdorff(a: &[StateVector], b: &[StateVector], norm: NormTag) -> Result<DistanceReport> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput("hausdorff needs two non-empty sets"));
    }
    let forward = directed(a, &SortedSet::new(b, norm));
    let backward = directed(b, &SortedSet::new(a, norm));
    Ok(DistanceReport {
        forward,
        backward,
        symmetric: forward.max(backward),
    })
}

/// `sup_{a∈A} d(a, B)`.
pub fn deviation(a: &[StateVector], b: &[StateVector], norm: NormTag) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput("deviation needs two non-empty sets"));
    }
    Ok(directed(a, &SortedSet::new(b, norm)))
}

/// Least-squares line `y = slope·x + intercept`, with RMS residual.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return Err(Error::Estimation(format!("linear fit needs ≥ 2 paired points, got {n}")));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Estimation("linear fit over a single abscissa".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - slope * a - intercept).powi(2))
        .sum();
    Ok((slope, intercept, (rss / n as f64).sqrt()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoxDimension {
    pub eps: Vec<f64>,
    pub counts: Vec<usize>,
    pub dimension: f64,
    pub residual: f64,
}

/// Slope of `ln N_ε` against `ln(1/ε)` with `N_ε` from greedy nets on a
/// geometric grid of `levels` radii in `[eps_lo, eps_hi]`.
pub fn box_dimension(cloud: &PointCloud, eps_lo: f64, eps_hi: f64, levels: usize) -> Result<BoxDimension> {
    if cloud.is_empty() {
        return Err(Error::EmptyInput("box_dimension needs a non-empty cloud"));
    }
    if !(0.0 < eps_lo && eps_lo < eps_hi) || levels < 3 {
        return Err(Error::Domain(format!(
            "need 0 < eps_lo < eps_hi and ≥ 3 levels, got [{eps_lo}, {eps_hi}] with {levels}"
        )));
    }
    let ratio = (eps_hi / eps_lo).powf(1.0 / (levels - 1) as f64);
    let eps: Vec<f64> = (0..levels).map(|i| eps_lo * ratio.powi(i as i32)).collect();
    let counts = eps
        .par_iter()
        .map(|e| greedy_net(cloud, *e).map(|n| n.len()))
        .collect::<Result<Vec<_>>>()?;
    if counts.iter().all(|c| *c == 1) {
        return Ok(BoxDimension {
            eps,
            counts,
            dimension: 0.0,
            residual: 0.0,
        });
    }
    let x: Vec<f64> = eps.iter().map(|e| -e.ln()).collect();
    let y: Vec<f64> = counts.iter().map(|c| (*c as f64).ln()).collect();
    let (dimension, _, residual) = linear_fit(&x, &y)?;
    Ok(BoxDimension {
        eps,
        counts,
        dimension,
        residual,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateFit {
    /// Fitted slope of `log₂ d_k` per step.
    pub slope_log2: f64,
    /// `β = −slope · ln 2`.
    pub beta: f64,
    /// Fitted constant `C` in `d_k ≈ C e^{−βk}`.
    pub constant: f64,
    pub residual: f64,
    /// Steps used in the fit (those above the floor).
    pub used: Vec<usize>,
    /// Set when fewer than two distances lie above the floor.
    pub indeterminate: bool,
}

/// Fits `log₂ d_k` against `k` over the distances above `floor`.
///
/// Only the leading run above the floor is used, so the fit stops at the
/// resolution of the representation.
pub fn fit_decay(distances: &[f64], floor: f64) -> RateFit {
    let used: Vec<usize> = distances
        .iter()
        .take_while(|d| **d > floor)
        .enumerate()
        .map(|(k, _)| k)
        .collect();
    if used.len() < 2 {
        return RateFit {
            slope_log2: f64::NAN,
            beta: f64::NAN,
            constant: f64::NAN,
            residual: f64::NAN,
            used,
            indeterminate: true,
        };
    }
    let x: Vec<f64> = used.iter().map(|k| *k as f64).collect();
    let y: Vec<f64> = used.iter().map(|k| distances[*k].log2()).collect();
    let (slope, intercept, residual) = linear_fit(&x, &y).expect("distinct abscissae");
    RateFit {
        slope_log2: slope,
        beta: -slope * std::f64::consts::LN_2,
        constant: intercept.exp2(),
        residual,
        used,
        indeterminate: false,
    }
}

/// Entry of a probe set into the absorbing balls along the slots.
#[derive(Clone, Debug, PartialEq)]
pub struct Absorption {
    /// `max_u ‖ψ_k u‖_V − R` at slot `start + k`, for `k = 0..=steps`.
    pub excess: Vec<f64>,
    /// Least `T` with non-positive excess at every `k ≥ T`.
    pub time: Option<usize>,
}

/// Steps `probes` from slot `start` and records when they enter the absorbing ball for good.
pub fn absorption_time<S: Rds>(
    rds: &DiscreteRds<S>,
    probes: &[StateVector],
    start: i64,
    steps: usize,
) -> Result<Absorption> {
    if probes.is_empty() {
        return Err(Error::EmptyInput("absorption_time needs probes"));
    }
    let mut x = probes.to_vec();
    let mut excess = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let slot = start + k as i64;
        let r = rds.absorbing_radius(slot)?;
        excess.push(x.iter().map(|u| u.v_norm() - r).fold(f64::NEG_INFINITY, f64::max));
        if k < steps {
            x = rds.step_all(slot, &x)?;
        }
    }
    let time = match excess.iter().rposition(|e| *e > 0.0) {
        None => Some(0),
        Some(i) if i < steps => Some(i + 1),
        Some(_) => None,
    };
    Ok(Absorption { excess, time })
}

#[derive(Clone, Debug, PartialEq)]
pub struct AttractionRate {
    /// `d_V(ψ_k(B), E_k)` for `k = 1..=n`, `ψ_k` started at slot `−n`.
    pub distances: Vec<f64>,
    /// Resolution of the approximation; distances at or below it are not fitted.
    pub floor: f64,
    pub fit: RateFit,
    pub absorption: Absorption,
    /// `2^T r` with `T` the absorption time.
    pub certified_constant: Option<f64>,
}

/// Distances from the images of `probes` to the sets `E_k` of `approx`.
pub fn attraction_rate<S: Rds>(
    approx: &AttractorApprox,
    rds: &DiscreteRds<S>,
    probes: &[StateVector],
) -> Result<AttractionRate> {
    if probes.is_empty() {
        return Err(Error::EmptyInput("attraction_rate needs probes"));
    }
    let n = approx.depth();
    let mut x = probes.to_vec();
    let mut distances = Vec::with_capacity(n);
    for k in 1..=n {
        x = rds.step_all(approx.slot(k - 1), &x)?;
        distances.push(deviation(&x, &approx.e[k - 1], NormTag::V)?);
    }
    let floor = approx.resolution();
    let absorption = absorption_time(rds, probes, approx.slot(0), n)?;
    Ok(AttractionRate {
        fit: fit_decay(&distances, floor),
        distances,
        floor,
        certified_constant: absorption.time.map(|t| 2f64.powi(t as i32) * approx.params.r),
        absorption,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Birkhoff {
    pub running: Vec<f64>,
    pub xi: f64,
    /// Largest relative change of the running mean over the second half.
    pub diagnostic: f64,
}

/// Running means of `x_k^m`.
pub fn birkhoff_mean(seq: &[f64], m: f64) -> Result<Birkhoff> {
    if seq.is_empty() {
        return Err(Error::EmptyInput("birkhoff_mean needs a non-empty sequence"));
    }
    let mut running = Vec::with_capacity(seq.len());
    let mut acc = 0.0;
    for (i, x) in seq.iter().enumerate() {
        acc += x.powf(m);
        running.push(acc / (i + 1) as f64);
    }
    let xi = *running.last().unwrap();
    let half = running.len() / 2;
    let diagnostic = running[half..]
        .iter()
        .map(|r| if xi == 0.0 { r.abs() } else { ((r - xi) / xi).abs() })
        .fold(0.0, f64::max);
    Ok(Birkhoff {
        running,
        xi,
        diagnostic,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct HolderFit {
    pub exponent: f64,
    pub constant: f64,
    pub residual: f64,
    pub scale_range: (f64, f64),
    /// Set for a constant series (exponent reported as 1, constant 0).
    pub constant_series: bool,
}

/// Hölder fit from pairwise distances `dist(i, j)` of samples at `times`.
///
/// For dyadic lags `2^m` (in samples) up to an eighth of the series, the
/// largest increment per lag is regressed against the lag on log-log axes.
pub fn holder_fit_with(times: &[f64], dist: impl Fn(usize, usize) -> f64 + Sync) -> Result<HolderFit> {
    let n = times.len();
    if n < 8 {
        return Err(Error::Estimation(format!("Hölder fit needs ≥ 8 samples, got {n}")));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Estimation("sample times must be strictly increasing".into()));
    }
    let mut lags = Vec::new();
    let mut m = 1;
    while m <= (n / 8).max(1) {
        lags.push(m);
        m *= 2;
    }
    if lags.len() < 2 {
        lags = vec![1, 2];
    }
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    let mut all_zero = true;
    for &lag in &lags {
        let inc = (0..n - lag)
            .into_par_iter()
            .map(|i| dist(i, i + lag))
            .reduce(|| 0.0, f64::max);
        let h = (0..n - lag)
            .map(|i| times[i + lag] - times[i])
            .fold(0.0, f64::max);
        if inc > 0.0 {
            all_zero = false;
            lx.push(h.ln());
            ly.push(inc.ln());
        }
    }
    let span = (times[1] - times[0], times[lags[lags.len() - 1]] - times[0]);
    if all_zero {
        return Ok(HolderFit {
            exponent: 1.0,
            constant: 0.0,
            residual: 0.0,
            scale_range: span,
            constant_series: true,
        });
    }
    let (exponent, intercept, residual) = linear_fit(&lx, &ly)?;
    Ok(HolderFit {
        exponent,
        constant: intercept.exp(),
        residual,
        scale_range: span,
        constant_series: false,
    })
}

/// Hölder fit of a scalar series.
pub fn holder_fit(times: &[f64], values: &[f64]) -> Result<HolderFit> {
    holder_fit_with(times, |i, j| (values[i] - values[j]).abs())
}

/// Hölder fit of a state series in the weighted norm `(Σ λ_j^s c_j²)^{1/2}`.
pub fn holder_fit_states(times: &[f64], states: &[StateVector], s: f64) -> Result<HolderFit> {
    holder_fit_with(times, |i, j| states[i].sub(&states[j]).hs_norm(s))
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentCheck {
    pub times: Vec<f64>,
    /// `E‖·‖^{2p} / t^p` per time.
    pub ratios: Vec<f64>,
    /// `max / min` of the ratios (1 when all vanish).
    pub spread: f64,
    pub pass: bool,
}

/// Checks that `E X(t)^{p} / t^p` stays bounded, where `sample(t, i)` returns
/// the `i`-th draw of the squared norm `X(t)`.
pub fn moment_check(
    times: &[f64],
    p: i32,
    samples: usize,
    factor: f64,
    sample: impl Fn(f64, usize) -> f64 + Sync,
) -> Result<MomentCheck> {
    if samples == 0 || times.is_empty() {
        return Err(Error::EmptyInput("moment_check needs samples and times"));
    }
    if !(1..=3).contains(&p) {
        return Err(Error::Domain(format!("moment order p must be 1, 2 or 3, got {p}")));
    }
    let ratios: Vec<f64> = times
        .iter()
        .map(|&t| {
            let draws: Vec<f64> = (0..samples)
                .into_par_iter()
                .map(|i| sample(t, i).powi(p))
                .collect();
            let m = draws.iter().sum::<f64>() / samples as f64;
            m / t.powi(p)
        })
        .collect();
    let max = ratios.iter().cloned().fold(0.0, f64::max);
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let spread = if max == 0.0 { 1.0 } else { max / min };
    Ok(MomentCheck {
        times: times.to_vec(),
        ratios,
        spread,
        pass: spread < factor,
    })
}
