//! Experiment runner: config files in, CSV files and summaries out.
//!
//! Each run writes into a staging directory inside `out_dir` that is moved
//! into place only when the command succeeds. `manifest.txt` is written in
//! every case and records the resolved configuration with its hash.

pub mod commands;
pub mod context;
pub mod selftest;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::KvConfig;
use crate::error::{Error, Result};
pub use context::{AnySystem, Context};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Simulate,
    BuildAttractor,
    SweepEpsilon,
    Dimension,
    Rate,
    ToyContrast,
    NetsSelftest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::BuildAttractor => "build-attractor",
            Command::SweepEpsilon => "sweep-epsilon",
            Command::Dimension => "dimension",
            Command::Rate => "rate",
            Command::ToyContrast => "toy-contrast",
            Command::NetsSelftest => "nets-selftest",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub command: Command,
    pub config_path: Option<PathBuf>,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// `key=value` strings applied over the config file.
    pub overrides: Vec<String>,
}

#[derive(Parser, Debug)]
#[command(name = "randattr", version, about = "Random exponential attractor experiments")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Args, Debug)]
struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override a config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Trajectory of the toy or PDE system.
    Simulate(Common),
    /// Discrete attractor with semi-invariance and dimension diagnostics.
    BuildAttractor(Common),
    /// Attractor family over a grid of noise amplitudes.
    SweepEpsilon(Common),
    /// Box-counting dimension of a dumped attractor.
    Dimension(Common),
    /// Attraction rate of probes from a ball.
    Rate(Common),
    /// Pullback point attractor against the exponential attractor.
    ToyContrast(Common),
    /// Property battery for the nets module.
    NetsSelftest(Common),
}

impl From<Sub> for ExperimentSpec {
    fn from(s: Sub) -> Self {
        let (command, c) = match s {
            Sub::Simulate(c) => (Command::Simulate, c),
            Sub::BuildAttractor(c) => (Command::BuildAttractor, c),
            Sub::SweepEpsilon(c) => (Command::SweepEpsilon, c),
            Sub::Dimension(c) => (Command::Dimension, c),
            Sub::Rate(c) => (Command::Rate, c),
            Sub::ToyContrast(c) => (Command::ToyContrast, c),
            Sub::NetsSelftest(c) => (Command::NetsSelftest, c),
        };
        ExperimentSpec {
            command,
            config_path: c.config,
            seed: c.seed,
            out_dir: c.out,
            overrides: c.set,
        }
    }
}

/// Writer confined to the staging directory of a run.
pub struct Outputs {
    root: PathBuf,
}

impl Outputs {
    pub fn new(root: PathBuf) -> Result<Self> {
        fs::create_dir_all(&root)?;
        Ok(Outputs { root })
    }

    pub fn write(&self, name: &str, contents: &str) -> Result<()> {
        fs::write(self.root.join(name), contents)?;
        Ok(())
    }

    /// Creates and returns a subdirectory.
    pub fn dir(&self, name: &str) -> Result<PathBuf> {
        let p = self.root.join(name);
        fs::create_dir_all(&p)?;
        Ok(p)
    }
}

fn load_config(spec: &ExperimentSpec) -> Result<KvConfig> {
    let mut kv = match &spec.config_path {
        Some(p) => KvConfig::parse(
            &fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?,
        )?,
        None => KvConfig::new(),
    };
    for o in &spec.overrides {
        kv.apply_override(o)?;
    }
    Ok(kv)
}

fn dispatch(ctx: &Context, command: Command, out: &Outputs) -> Result<commands::Summary> {
    match command {
        Command::Simulate => commands::simulate(ctx, out),
        Command::BuildAttractor => commands::build_attractor(ctx, out),
        Command::SweepEpsilon => commands::sweep_epsilon(ctx, out),
        Command::Dimension => commands::dimension(ctx, out),
        Command::Rate => commands::rate(ctx, out),
        Command::ToyContrast => commands::toy_contrast(ctx, out),
        Command::NetsSelftest => commands::nets_selftest(ctx, out),
    }
}

fn manifest(ctx: &Context, status: &str) -> String {
    let resolved = ctx.resolved();
    let mut s = String::new();
    let _ = writeln!(s, "command = {}", ctx.command);
    let _ = writeln!(s, "seed = {}", ctx.seed);
    let _ = writeln!(s, "config_hash = {}", resolved.hash());
    let _ = writeln!(s, "status = {status}");
    s.push_str(&resolved.render());
    s
}

/// Moves every entry of `staging` into `out`, replacing older outputs.
fn commit(staging: &Path, out: &Path) -> Result<()> {
    let mut entries: Vec<_> = fs::read_dir(staging)?.collect::<std::io::Result<_>>()?;
    entries.sort_by_key(|e| e.file_name());
    for e in entries {
        let target = out.join(e.file_name());
        if target.is_dir() {
            fs::remove_dir_all(&target)?;
        } else if target.exists() {
            fs::remove_file(&target)?;
        }
        fs::rename(e.path(), target)?;
    }
    fs::remove_dir(staging)?;
    Ok(())
}

/// Runs one experiment. On failure the staged outputs are removed and only
/// the manifest remains.
pub fn run(spec: &ExperimentSpec) -> Result<()> {
    fs::create_dir_all(&spec.out_dir)?;
    let kv = load_config(spec)?;
    let ctx = Context::new(spec.command.name(), kv, spec.seed);
    let staging = spec.out_dir.join(".staging");
    if staging.exists() {
        fs::remove_dir_all(&staging)?;
    }
    let result = Outputs::new(staging.clone()).and_then(|out| {
        let summary = dispatch(&ctx, spec.command, &out)?;
        let mut s = String::new();
        for (k, v) in &summary {
            let _ = writeln!(s, "{k} = {v}");
        }
        out.write("summary.txt", &s)
    });
    match result {
        Ok(()) => {
            fs::write(staging.join("manifest.txt"), manifest(&ctx, "ok"))?;
            commit(&staging, &spec.out_dir)
        }
        Err(e) => {
            let _ = fs::remove_dir_all(&staging);
            fs::write(spec.out_dir.join("manifest.txt"), manifest(&ctx, e.code()))?;
            Err(e)
        }
    }
}

/// Entry point of the binary; returns the process exit status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&cli.command.into()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("ERROR {} {}", e.code(), e.to_string().replace('\n', " "));
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(cmd: Command, dir: &Path, sets: &[&str]) -> ExperimentSpec {
        ExperimentSpec {
            command: cmd,
            config_path: None,
            seed: 5,
            out_dir: dir.to_path_buf(),
            overrides: sets.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn unknown_command_is_a_usage_error() {
        assert_eq!(main_with(["randattr", "frobnicate"]), 2);
        assert_eq!(main_with(["randattr"]), 2);
    }

    #[test]
    fn failed_run_keeps_only_the_manifest() {
        let d = tempfile::tempdir().unwrap();
        let err = run(&spec(Command::Simulate, d.path(), &["system=torus"])).unwrap_err();
        assert_eq!(err.code(), "config");
        let names: Vec<_> = fs::read_dir(d.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        assert_eq!(names, ["manifest.txt"]);
        let m = fs::read_to_string(d.path().join("manifest.txt")).unwrap();
        assert!(m.contains("status = config"));
    }

    #[test]
    fn simulate_writes_manifest_summary_and_trajectory() {
        let d = tempfile::tempdir().unwrap();
        run(&spec(Command::Simulate, d.path(), &["simulate.t=2"])).unwrap();
        let m = KvConfig::parse(&fs::read_to_string(d.path().join("manifest.txt")).unwrap()).unwrap();
        assert_eq!(m.get("command"), Some("simulate"));
        assert_eq!(m.get("simulate.t"), Some("2"));
        assert_eq!(m.get("dt"), Some("0.01"));
        let traj = fs::read_to_string(d.path().join("trajectory.csv")).unwrap();
        assert_eq!(traj.lines().next(), Some("t,coeff_1,h_norm,v_norm"));
        assert_eq!(traj.lines().count(), 22);
        assert!(!d.path().join(".staging").exists());
    }
}
