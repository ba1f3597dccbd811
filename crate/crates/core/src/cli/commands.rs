use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;

use rayon::prelude::*;

use super::context::{join, AnySystem, Context};
use super::selftest::nets_battery;
use super::Outputs;
use crate::attractor::{
    build_discrete, build_param_family, dimension_report, lift_continuous, read_points_csv,
    semi_invariance_defects, AttractorApprox,
};
use crate::cocycle::{probe_point, DiscreteRds};
use crate::diagnostics::{attraction_rate, box_dimension, hausdorff, linear_fit, AttractionRate};
use crate::error::{Error, Result};
use crate::nets::{NormTag, PointCloud};
use crate::systems::state::StateVector;
use crate::systems::Rds;

/// Ordered `key = value` lines of `summary.txt`.
pub type Summary = Vec<(String, String)>;

fn kv(k: &str, v: impl ToString) -> (String, String) {
    (k.to_owned(), v.to_string())
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn simulate(ctx: &Context, out: &Outputs) -> Result<Summary> {
    let toy = ctx.is_toy()?;
    let t = ctx.get("simulate.t", if toy { 20.0 } else { 2.0 })?;
    let every = ctx.get("simulate.every", if toy { 0.1 } else { 0.01 })?;
    let sys = ctx.system(ctx.seed_for("path"), 1.0, t + 1.0)?;
    let j = sys.lambda().len();
    let mut dflt = vec![0.0; j];
    dflt[0] = if toy { 0.5 } else { 1.0 };
    let u0 = ctx.list("simulate.u0", &dflt)?;
    if u0.len() != j {
        return Err(Error::Config(format!("simulate.u0 needs {j} coefficients, got {}", u0.len())));
    }
    let traj = sys.trajectory(0.0, &StateVector::new(u0, sys.lambda()), t, every)?;
    let mut s = String::from("t");
    for k in 1..=j {
        let _ = write!(s, ",coeff_{k}");
    }
    s.push_str(",h_norm,v_norm\n");
    for (time, u) in &traj {
        let _ = write!(s, "{time:.16e}");
        for c in &u.coeffs {
            let _ = write!(s, ",{c:.16e}");
        }
        let _ = writeln!(s, ",{:.16e},{:.16e}", u.h_norm(), u.v_norm());
    }
    out.write("trajectory.csv", &s)?;
    let last = &traj.last().expect("non-empty trajectory").1;
    Ok(vec![
        kv("samples", traj.len()),
        kv("final_h_norm", last.h_norm()),
        kv("final_v_norm", last.v_norm()),
        kv("max_h_norm", traj.iter().map(|(_, u)| u.h_norm()).fold(0.0, f64::max)),
    ])
}

/// The default attractor of a run: cocycle, constants and the approximation.
fn default_build(
    ctx: &Context,
) -> Result<(DiscreteRds<AnySystem>, crate::cocycle::LipschitzEstimate, AttractorApprox)> {
    let (p, _) = ctx.build_params()?;
    let lift = ctx.get("lift.samples", 1usize)?;
    let rds = ctx.cocycle(ctx.seed_for("path"), p.depth, if lift > 1 { p.depth as f64 } else { 0.0 })?;
    let k = ctx.lipschitz(&rds, p.depth)?;
    let a = build_discrete(&rds, &p, &k)?;
    Ok((rds, k, a))
}

fn dimension_csv(eps: &[f64], counts: &[usize]) -> String {
    let mut s = String::from("eps,count\n");
    for (e, c) in eps.iter().zip(counts) {
        let _ = writeln!(s, "{e:.16e},{c}");
    }
    s
}

pub fn build_attractor(ctx: &Context, out: &Outputs) -> Result<Summary> {
    let (rds, k, a) = default_build(ctx)?;
    let n = a.depth();
    let m = ctx.get("dimension.m", 1.0)?;
    let lo = ctx.get("dimension.eps_lo", a.params.r * 2f64.powi(-(n as i32)))?;
    let hi = ctx.get("dimension.eps_hi", 2.0 * a.params.r)?;
    let levels = ctx.get("dimension.levels", 8usize)?;
    let lift = ctx.get("lift.samples", 1usize)?;
    let defects = semi_invariance_defects(&a, &rds)?;
    let dim = dimension_report(&a, m, lo, hi, levels)?;
    let extra = vec![
        kv("seed", ctx.seed),
        kv("config_hash", ctx.resolved().hash()),
    ];
    a.dump(&out.dir("attractor")?, &extra)?;
    out.write("lipschitz.csv", &k.to_csv())?;
    let mut s = String::from("k,missing\n");
    for (i, d) in defects.iter().enumerate() {
        let _ = writeln!(s, "{},{d}", i + 1);
    }
    out.write("semi_invariance.csv", &s)?;
    out.write("dimension.csv", &dimension_csv(&dim.eps_grid, &dim.counts))?;
    let mut summary = vec![
        kv("depth", n),
        kv("E_n_size", a.e_n().len()),
        kv("eps_n", a.eps_n),
        kv("eps_argmin", a.eps_argmin),
        kv("semi_invariance_missing", defects.iter().sum::<usize>()),
        kv("max_ball_excess", a.ball_excess.iter().cloned().fold(f64::NEG_INFINITY, f64::max)),
        kv("xi", dim.xi),
        kv("m", dim.m),
        kv("c_entropy", dim.c_entropy),
        kv("d_bound", dim.d_bound),
        kv("fitted_dim", dim.fitted_dim),
        kv("fit_residual", dim.fit_residual),
    ];
    if lift > 1 {
        let l = lift_continuous(&a, &rds, &k, lift)?;
        let mut s = String::from("point_index,tau");
        for j in 1..=a.lambda().len() {
            let _ = write!(s, ",coeff_{j}");
        }
        s.push('\n');
        for (i, (u, p)) in l.points.iter().zip(&l.provenance).enumerate() {
            let _ = write!(s, "{i},{:.16e}", l.taus[*p]);
            for c in &u.coeffs {
                let _ = write!(s, ",{c:.16e}");
            }
            s.push('\n');
        }
        out.write("lifted.csv", &s)?;
        summary.push(kv("lifted_size", l.points.len()));
    }
    Ok(summary)
}

/// Result of an ε sweep of attractor families over several paths.
#[derive(Clone, Debug, PartialEq)]
pub struct Sweep {
    pub eps: Vec<f64>,
    /// `d^s(M^ε, M⁰)` per seed index (rows) and ε (columns).
    pub distances: Vec<Vec<f64>>,
    pub medians: Vec<f64>,
    /// Log-log slope of the medians against ε.
    pub holder_exponent: f64,
    pub holder_constant: f64,
    pub holder_residual: f64,
}

pub fn epsilon_sweep(ctx: &Context) -> Result<Sweep> {
    let eps = ctx.list("sweep.eps", &[0.4, 0.2, 0.1, 0.05])?;
    let seeds = ctx.get("sweep.seeds", 5usize)?;
    let depth = ctx.get("sweep.depth", 3usize)?;
    let (mut p, _) = ctx.build_params()?;
    p.depth = depth;
    p.validate()?;
    if eps.len() < 2 || seeds == 0 {
        return Err(Error::Config("the sweep needs ≥ 2 values of ε and ≥ 1 seed".into()));
    }
    let mut grid = vec![0.0];
    grid.extend(&eps);
    let base = ctx.cocycle(ctx.seed_for("path/0"), depth, 0.0)?;
    let zero = DiscreteRds {
        system: base.system.with_epsilon(0.0),
        ..base.clone()
    };
    let k_bar = ctx.lipschitz(&zero, depth)?;
    let rows: Vec<Result<Vec<f64>>> = (0..seeds)
        .into_par_iter()
        .map(|i| {
            let rds = if i == 0 {
                base.clone()
            } else {
                ctx.cocycle(ctx.seed_for(&format!("path/{i}")), depth, 0.0)?
            };
            let fam = build_param_family(&rds, &grid, &p, &k_bar)?;
            fam[1..]
                .iter()
                .map(|m| Ok(hausdorff(m.e_n(), fam[0].e_n(), NormTag::V)?.symmetric))
                .collect()
        })
        .collect();
    let distances = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let medians: Vec<f64> = (0..eps.len())
        .map(|j| median(&mut distances.iter().map(|r| r[j]).collect::<Vec<_>>()))
        .collect();
    let (holder_exponent, intercept, holder_residual) = if medians.iter().all(|m| *m > 0.0) {
        let lx: Vec<f64> = eps.iter().map(|e| e.abs().ln()).collect();
        let ly: Vec<f64> = medians.iter().map(|m| m.ln()).collect();
        linear_fit(&lx, &ly)?
    } else {
        (f64::NAN, f64::NAN, f64::NAN)
    };
    Ok(Sweep {
        eps,
        distances,
        medians,
        holder_exponent,
        holder_constant: intercept.exp(),
        holder_residual,
    })
}

pub fn sweep_epsilon(ctx: &Context, out: &Outputs) -> Result<Summary> {
    let sw = epsilon_sweep(ctx)?;
    let mut s = String::from("seed_index,epsilon,d_s\n");
    for (i, row) in sw.distances.iter().enumerate() {
        for (e, d) in sw.eps.iter().zip(row) {
            let _ = writeln!(s, "{i},{e},{d:.16e}");
        }
    }
    out.write("sweep.csv", &s)?;
    let mut s = String::from("epsilon,median_d_s\n");
    for (e, d) in sw.eps.iter().zip(&sw.medians) {
        let _ = writeln!(s, "{e},{d:.16e}");
    }
    out.write("medians.csv", &s)?;
    let first = sw.medians[0];
    let last = *sw.medians.last().unwrap();
    Ok(vec![
        kv("seeds", sw.distances.len()),
        kv("epsilons", join(&sw.eps)),
        kv("median_first", first),
        kv("median_last", last),
        kv("median_ratio", first / last),
        kv("holder_exponent", sw.holder_exponent),
        kv("holder_constant", sw.holder_constant),
        kv("holder_residual", sw.holder_residual),
    ])
}

pub fn dimension(ctx: &Context, out: &Outputs) -> Result<Summary> {
    let input = ctx.text("dimension.input", "");
    if input.is_empty() {
        return Err(Error::Config("dimension.input must name a dumped attractor directory".into()));
    }
    let dir = PathBuf::from(input);
    let manifest = crate::config::KvConfig::parse(&std::fs::read_to_string(dir.join("manifest.txt"))?)?;
    let depth: usize = manifest.parse_or("depth", 0)?;
    let r: f64 = manifest.parse_or("r", 0.5)?;
    let lambda: Arc<[f64]> = manifest
        .list_f64("lambda")?
        .ok_or_else(|| Error::Parse("manifest has no eigenvalues".into()))?
        .into();
    if depth == 0 {
        return Err(Error::Parse("manifest has no depth".into()));
    }
    let pts = read_points_csv(&dir.join(format!("E_{depth}.csv")), &lambda)?;
    let lo = ctx.get("dimension.eps_lo", r * 2f64.powi(-(depth as i32)))?;
    let hi = ctx.get("dimension.eps_hi", 2.0 * r)?;
    let levels = ctx.get("dimension.levels", 8usize)?;
    let b = box_dimension(&PointCloud::new(pts.clone(), NormTag::V), lo, hi, levels)?;
    out.write("dimension.csv", &dimension_csv(&b.eps, &b.counts))?;
    Ok(vec![
        kv("points", pts.len()),
        kv("fitted_dim", b.dimension),
        kv("fit_residual", b.residual),
    ])
}

/// Probes of the H-ball of radius `ball`: a uniform grid in one dimension,
/// seeded uniform draws otherwise.
pub fn ball_probes(lambda: &Arc<[f64]>, ball: f64, count: usize, seed: u64) -> Vec<StateVector> {
    if lambda.len() == 1 {
        let c = count.max(2);
        return (0..c)
            .map(|i| StateVector::new(vec![-ball + 2.0 * ball * i as f64 / (c - 1) as f64], lambda.clone()))
            .collect();
    }
    let zero = StateVector::zeros(lambda.clone());
    (0..count).map(|i| probe_point(&zero, ball, seed, i)).collect()
}

pub fn rate_study(ctx: &Context) -> Result<(AttractorApprox, AttractionRate)> {
    let ball = ctx.get("rate.ball", 3.0)?;
    let count = ctx.get("rate.probes", 61usize)?;
    let (rds, _, a) = default_build(ctx)?;
    let probes = ball_probes(&rds.system.lambda(), ball, count, ctx.seed_for("probes"));
    let rate = attraction_rate(&a, &rds, &probes)?;
    Ok((a, rate))
}

pub fn rate(ctx: &Context, out: &Outputs) -> Result<Summary> {
    let (a, rate) = rate_study(ctx)?;
    let t = rate.absorption.time;
    let mut s = String::from("k,distance,certified_bound\n");
    for (i, d) in rate.distances.iter().enumerate() {
        let k = i as i32 + 1;
        let bound = t.map_or(f64::NAN, |t| 2f64.powi(t as i32 - k) * a.params.r);
        let _ = writeln!(s, "{k},{d:.16e},{bound:.16e}");
    }
    out.write("rate.csv", &s)?;
    Ok(vec![
        kv("slope_log2", rate.fit.slope_log2),
        kv("beta", rate.fit.beta),
        kv("constant", rate.fit.constant),
        kv("residual", rate.fit.residual),
        kv("steps_fitted", rate.fit.used.len()),
        kv("indeterminate", rate.fit.indeterminate),
        kv("floor", rate.floor),
        kv("absorption_time", t.map_or("none".to_string(), |t| t.to_string())),
        kv(
            "certified_constant",
            rate.certified_constant.map_or("none".to_string(), |c| c.to_string()),
        ),
    ])
}

/// Per-seed comparison of the pullback point with the exponential attractor family.
#[derive(Clone, Debug, PartialEq)]
pub struct ContrastRow {
    pub midpoint: f64,
    pub gap: f64,
    /// `d^s({midpoint}, [−1, 1])`.
    pub ds_pullback: f64,
    /// `d^s(M^ε, M⁰)`.
    pub ds_family: f64,
}

pub fn contrast_rows(ctx: &Context) -> Result<Vec<ContrastRow>> {
    if !ctx.is_toy()? {
        return Err(Error::Config("toy-contrast needs system = toy".into()));
    }
    let seeds = ctx.get("contrast.seeds", 5usize)?;
    let t_pull: f64 = ctx.get("contrast.t_pull", 50.0)?;
    let depth = ctx.get("contrast.depth", 3usize)?;
    let eps = ctx.get("epsilon", 0.2)?;
    let (mut p, tau0) = ctx.build_params()?;
    p.depth = depth;
    let back = t_pull.max((depth as f64 + 3.0) * tau0);
    let l1: Arc<[f64]> = Arc::from([1.0]);
    let interval: Vec<StateVector> = (0..=2000)
        .map(|i| StateVector::new(vec![-1.0 + i as f64 / 1000.0], l1.clone()))
        .collect();
    let first = DiscreteRds::new(ctx.system(ctx.seed_for("path/0"), back, tau0)?, tau0)?;
    let zero = DiscreteRds {
        system: first.system.with_epsilon(0.0),
        ..first.clone()
    };
    let k_bar = ctx.lipschitz(&zero, depth)?;
    (0..seeds)
        .into_par_iter()
        .map(|i| {
            let rds = DiscreteRds::new(ctx.system(ctx.seed_for(&format!("path/{i}")), back, tau0)?, tau0)?;
            let AnySystem::Toy(toy) = &rds.system else {
                unreachable!("checked above")
            };
            let toy = toy.with_epsilon(eps);
            let (midpoint, gap) = toy.pullback_point(t_pull)?;
            let point = vec![StateVector::new(vec![midpoint], l1.clone())];
            let ds_pullback = hausdorff(&point, &interval, NormTag::V)?.symmetric;
            let fam = build_param_family(&rds, &[0.0, eps], &p, &k_bar)?;
            let ds_family = hausdorff(fam[1].e_n(), fam[0].e_n(), NormTag::V)?.symmetric;
            Ok(ContrastRow {
                midpoint,
                gap,
                ds_pullback,
                ds_family,
            })
        })
        .collect()
}

pub fn toy_contrast(ctx: &Context, out: &Outputs) -> Result<Summary> {
    let rows = contrast_rows(ctx)?;
    let mut s = String::from("seed_index,midpoint,gap,ds_pullback_interval,ds_family\n");
    for (i, r) in rows.iter().enumerate() {
        let _ = writeln!(
            s,
            "{i},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.midpoint, r.gap, r.ds_pullback, r.ds_family
        );
    }
    out.write("contrast.csv", &s)?;
    let n = rows.len() as f64;
    let collapsed = rows.iter().filter(|r| r.gap <= 1e-6).count() as f64 / n;
    let both = rows
        .iter()
        .filter(|r| r.gap <= 1e-6 && r.ds_pullback >= 0.8)
        .count() as f64
        / n;
    Ok(vec![
        kv("seeds", rows.len()),
        kv("collapse_fraction", collapsed),
        kv("collapse_and_far_fraction", both),
        kv("median_gap", median(&mut rows.iter().map(|r| r.gap).collect::<Vec<_>>())),
        kv(
            "median_ds_pullback",
            median(&mut rows.iter().map(|r| r.ds_pullback).collect::<Vec<_>>()),
        ),
        kv(
            "median_ds_family",
            median(&mut rows.iter().map(|r| r.ds_family).collect::<Vec<_>>()),
        ),
    ])
}

pub fn nets_selftest(ctx: &Context, out: &Outputs) -> Result<Summary> {
    let cases = ctx.get("selftest.cases", 100usize)?;
    let rows = nets_battery(ctx.seed, cases);
    let mut s = String::from("check,cases,failures,worst\n");
    for r in &rows {
        let _ = writeln!(s, "{},{},{},{:e}", r.check, r.cases, r.failures, r.worst);
    }
    out.write("nets_selftest.csv", &s)?;
    let failed: Vec<&str> = rows.iter().filter(|r| r.failures > 0).map(|r| r.check).collect();
    if !failed.is_empty() {
        return Err(Error::Estimation(format!("nets self-test failed: {}", failed.join(", "))));
    }
    Ok(rows.iter().map(|r| kv(&format!("{}_failures", r.check), r.failures)).collect())
}

