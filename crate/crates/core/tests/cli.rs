use std::fs;
use std::path::Path;
use std::process::Command;

use randattr::config::KvConfig;

fn randattr(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_randattr")).args(args).output().unwrap()
}

fn summary(dir: &Path) -> KvConfig {
    KvConfig::parse(&fs::read_to_string(dir.join("summary.txt")).unwrap()).unwrap()
}

fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.push((rel, fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn usage_errors_exit_with_two() {
    let o = randattr(&["no-such-command"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    let o = randattr(&["simulate", "--seed", "minus-one"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn module_errors_print_a_machine_readable_line() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().join("run");
    let o = randattr(&["build-attractor", "--out", out.to_str().unwrap(), "--set", "attractor.r=-1"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.starts_with("ERROR config "), "{err}");
    assert!(!out.join("summary.txt").exists());
    assert!(out.join("manifest.txt").exists());

    let o = randattr(&["simulate", "--config", "/nonexistent/run.cfg", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("ERROR config "));
}

#[test]
fn build_attractor_is_bitwise_reproducible() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.cfg");
    fs::write(&cfg, "# small toy build\nattractor.depth = 6\nepsilon = 0.2\n").unwrap();
    let run = |name: &str| {
        let out = d.path().join(name);
        let o = randattr(&[
            "build-attractor",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            "11",
            "--out",
            out.to_str().unwrap(),
            "--set",
            "lift.samples=2",
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let a = run("a");
    let b = run("b");
    let ta = tree(&a);
    assert_eq!(ta, tree(&b));
    let names: Vec<&str> = ta.iter().map(|(n, _)| n.as_str()).collect();
    for f in [
        "attractor/E_6.csv",
        "attractor/V_1.csv",
        "attractor/manifest.txt",
        "dimension.csv",
        "lifted.csv",
        "lipschitz.csv",
        "manifest.txt",
        "semi_invariance.csv",
        "summary.txt",
    ] {
        assert!(names.contains(&f), "missing {f} in {names:?}");
    }
    let s = summary(&a);
    assert_eq!(s.get("semi_invariance_missing"), Some("0"));
    let m = KvConfig::parse(&fs::read_to_string(a.join("manifest.txt")).unwrap()).unwrap();
    assert_eq!(m.get("seed"), Some("11"));
    assert_eq!(m.get("attractor.depth"), Some("6"));
    assert_eq!(m.get("lift.samples"), Some("2"));
    let dump = KvConfig::parse(&fs::read_to_string(a.join("attractor/manifest.txt")).unwrap()).unwrap();
    assert_eq!(dump.get("config_hash"), m.get("config_hash"));

    // a different seed gives a different path and a different manifest
    let c = d.path().join("c");
    let o = randattr(&["build-attractor", "--config", cfg.to_str().unwrap(), "--seed", "12", "--out", c.to_str().unwrap()]);
    assert!(o.status.success());
    assert_ne!(tree(&a), tree(&c));
}

#[test]
fn dimension_reads_a_dumped_attractor() {
    let d = tempfile::tempdir().unwrap();
    let build = d.path().join("build");
    let o = randattr(&["build-attractor", "--out", build.to_str().unwrap(), "--set", "attractor.depth=8", "--set", "epsilon=0"]);
    assert!(o.status.success());
    let dim = d.path().join("dim");
    let input = format!("dimension.input={}", build.join("attractor").display());
    let o = randattr(&["dimension", "--out", dim.to_str().unwrap(), "--set", &input]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let fitted: f64 = summary(&dim).parse_or("fitted_dim", f64::NAN).unwrap();
    let built: f64 = summary(&build).parse_or("fitted_dim", f64::NAN).unwrap();
    assert_eq!(fitted, built);
    assert!((fitted - 1.0).abs() < 0.3, "{fitted}");
}

#[test]
fn sweep_medians_decrease_with_epsilon() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().join("sweep");
    let o = randattr(&["sweep-epsilon", "--out", out.to_str().unwrap(), "--seed", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let med: Vec<f64> = fs::read_to_string(out.join("medians.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(med.len(), 4);
    assert!(med.windows(2).all(|w| w[1] <= w[0] + 0.02), "{med:?}");
    assert!(med[3] < med[0]);
    let rows = fs::read_to_string(out.join("sweep.csv")).unwrap().lines().count();
    assert_eq!(rows, 1 + 5 * 4);
}

#[test]
fn simulate_pde_and_rate_outputs() {
    let d = tempfile::tempdir().unwrap();
    let sim = d.path().join("sim");
    let o = randattr(&[
        "simulate",
        "--out",
        sim.to_str().unwrap(),
        "--set",
        "system=pde",
        "--set",
        "modes=4",
        "--set",
        "simulate.t=0.5",
        "--set",
        "simulate.every=0.1",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let traj = fs::read_to_string(sim.join("trajectory.csv")).unwrap();
    assert_eq!(traj.lines().next(), Some("t,coeff_1,coeff_2,coeff_3,coeff_4,h_norm,v_norm"));
    assert_eq!(traj.lines().count(), 7);

    let rate = d.path().join("rate");
    let o = randattr(&["rate", "--out", rate.to_str().unwrap(), "--set", "attractor.depth=8"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&rate);
    let slope: f64 = s.parse_or("slope_log2", f64::NAN).unwrap();
    assert!(slope <= -0.8, "{slope}");
    assert_eq!(fs::read_to_string(rate.join("rate.csv")).unwrap().lines().count(), 9);
}

#[test]
fn contrast_and_selftest_outputs() {
    let d = tempfile::tempdir().unwrap();
    let c = d.path().join("contrast");
    let o = randattr(&["toy-contrast", "--out", c.to_str().unwrap(), "--set", "contrast.seeds=3", "--set", "contrast.t_pull=10"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&c);
    let ds: f64 = s.parse_or("median_ds_pullback", f64::NAN).unwrap();
    // one point is at least 1 away from an endpoint of [−1, 1]
    assert!(ds >= 1.0 - 1e-12);
    let o = randattr(&["toy-contrast", "--out", c.to_str().unwrap(), "--set", "system=pde"]);
    assert_eq!(o.status.code(), Some(1));

    let t = d.path().join("selftest");
    let o = randattr(&["nets-selftest", "--out", t.to_str().unwrap(), "--set", "selftest.cases=30"]);
    assert!(o.status.success());
    let s = summary(&t);
    for k in ["greedy_cover", "blend_lipschitz", "barycentric", "minkowski_distance"] {
        assert_eq!(s.get(&format!("{k}_failures")), Some("0"));
    }
}

#[test]
fn rerun_replaces_previous_outputs() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().join("o");
    let o = randattr(&["simulate", "--out", out.to_str().unwrap(), "--set", "simulate.t=1"]);
    assert!(o.status.success());
    let first = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    let o = randattr(&["simulate", "--out", out.to_str().unwrap(), "--set", "simulate.t=2"]);
    assert!(o.status.success());
    let second = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert_ne!(first, second);
    assert!(!out.join(".staging").exists());
}
