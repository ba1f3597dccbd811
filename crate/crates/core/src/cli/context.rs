use std::collections::BTreeMap;
use std::fmt::Display;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use crate::attractor::BuildParams;
use crate::cocycle::{k_sequence, DiscreteRds, LipschitzEstimate};
use crate::config::KvConfig;
use crate::error::{Error, Result};
use crate::noise::NoisePath;
use crate::rng::derive_seed;
use crate::systems::state::StateVector;
use crate::systems::{GalerkinSystem, Rds, SystemConfig, ToySystem};

/// Either concrete system behind one [`Rds`] implementation.
#[derive(Clone, Debug)]
pub enum AnySystem {
    Toy(ToySystem),
    Pde(GalerkinSystem),
}

macro_rules! both {
    ($s:expr, $x:ident => $e:expr) => {
        match $s {
            AnySystem::Toy($x) => $e,
            AnySystem::Pde($x) => $e,
        }
    };
}

impl Rds for AnySystem {
    fn lambda(&self) -> Arc<[f64]> {
        both!(self, s => s.lambda())
    }

    fn time_step(&self) -> f64 {
        both!(self, s => s.time_step())
    }

    fn epsilon(&self) -> f64 {
        both!(self, s => s.epsilon())
    }

    fn path(&self) -> &NoisePath {
        both!(self, s => s.path())
    }

    fn solve(&self, tau: f64, u0: &StateVector, t: f64) -> Result<StateVector> {
        both!(self, s => s.solve(tau, u0, t))
    }

    fn absorbing_radius(&self, t: f64, tau0: f64) -> Result<f64> {
        both!(self, s => s.absorbing_radius(t, tau0))
    }

    fn with_epsilon(&self, eps: f64) -> Self {
        match self {
            AnySystem::Toy(s) => AnySystem::Toy(s.with_epsilon(eps)),
            AnySystem::Pde(s) => AnySystem::Pde(s.with_epsilon(eps)),
        }
    }
}

/// Configuration of one run; every key read is recorded with the value used,
/// defaults included, so the manifest shows the resolved configuration.
pub struct Context {
    pub command: String,
    pub seed: u64,
    kv: KvConfig,
    used: Mutex<BTreeMap<String, String>>,
}

impl Context {
    pub fn new(command: &str, kv: KvConfig, seed: u64) -> Self {
        Context {
            command: command.to_owned(),
            seed,
            kv,
            used: Mutex::new(BTreeMap::new()),
        }
    }

    fn record(&self, key: &str, value: String) {
        self.used.lock().unwrap().insert(key.to_owned(), value);
    }

    pub fn get<T>(&self, key: &str, default: T) -> Result<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let v = self.kv.parse_or(key, default)?;
        self.record(key, v.to_string());
        Ok(v)
    }

    pub fn list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        let v = self.kv.list_f64(key)?.unwrap_or_else(|| default.to_vec());
        self.record(key, join(&v));
        Ok(v)
    }

    pub fn text(&self, key: &str, default: &str) -> String {
        let v = self.kv.get(key).unwrap_or(default).to_owned();
        self.record(key, v.clone());
        v
    }

    /// User keys plus every key read, with the command name.
    pub fn resolved(&self) -> KvConfig {
        let mut out = self.kv.clone();
        for (k, v) in self.used.lock().unwrap().iter() {
            out.set(k, v);
        }
        out.set("command", &self.command);
        out
    }

    pub fn is_toy(&self) -> Result<bool> {
        match self.text("system", "toy").as_str() {
            "toy" => Ok(true),
            "pde" => Ok(false),
            other => Err(Error::Config(format!("system must be `toy` or `pde`, got `{other}`"))),
        }
    }

    /// Per-purpose seed derived from the run seed.
    pub fn seed_for(&self, label: &str) -> u64 {
        derive_seed(self.seed, label)
    }

    fn pde_config(&self) -> Result<SystemConfig> {
        let c = SystemConfig::from_kv(&self.kv)?;
        for (k, v) in [
            ("modes", c.modes.to_string()),
            ("a", c.a.to_string()),
            ("f.cubic", c.f_cubic.to_string()),
            ("f.linear", c.f_linear.to_string()),
            ("p", c.p.to_string()),
            ("dt", c.dt.to_string()),
            ("collocation", c.collocation.to_string()),
            ("epsilon", c.epsilon.to_string()),
            ("burn_in", c.burn_in.to_string()),
            ("ou.tol", c.ou_tol.to_string()),
            ("noise.b", join(&c.b)),
            ("h.coeffs", join(&c.h)),
            ("const.c1", c.consts.c1.to_string()),
            ("const.delta", c.consts.delta.to_string()),
            ("const.C2", c.consts.c2.to_string()),
            ("const.C3", c.consts.c3.to_string()),
            ("const.C4", c.consts.c4.to_string()),
        ] {
            self.record(k, v);
        }
        Ok(c)
    }

    /// System on a path sampled with `path_seed` over `[−back, forward]`,
    /// extended backwards by the OU burn-in for the PDE; `window.lo` and
    /// `window.hi` override the window.
    pub fn system(&self, path_seed: u64, back: f64, forward: f64) -> Result<AnySystem> {
        if self.is_toy()? {
            let dt = self.get("dt", 0.01)?;
            let eps = self.get("epsilon", 0.2)?;
            let lo = self.get("window.lo", -back)?;
            let hi = self.get("window.hi", forward)?;
            Ok(AnySystem::Toy(ToySystem::sample(path_seed, (lo, hi), dt, eps)?))
        } else {
            let cfg = self.pde_config()?;
            let lo = self.get("window.lo", -back - cfg.burn_in)?;
            let hi = self.get("window.hi", forward)?;
            Ok(AnySystem::Pde(GalerkinSystem::sample(cfg, path_seed, (lo, hi))?))
        }
    }

    pub fn build_params(&self) -> Result<(BuildParams, f64)> {
        let toy = self.is_toy()?;
        let p = BuildParams {
            depth: self.get("attractor.depth", if toy { 12 } else { 2 })?,
            r: self.get("attractor.r", 0.5)?,
            unit_pitch: self.get("attractor.unit_pitch", if toy { 1.0 / 32.0 } else { 0.25 })?,
        };
        p.validate()?;
        let tau0 = self.get("attractor.tau0", if toy { 1.0 } else { 0.5 })?;
        Ok((p, tau0))
    }

    /// Cocycle for an attractor of `depth` steps anchored at time 0.
    pub fn cocycle(&self, path_seed: u64, depth: usize, extra_back: f64) -> Result<DiscreteRds<AnySystem>> {
        let (_, tau0) = self.build_params()?;
        let back = (depth as f64 + 3.0) * tau0 + extra_back;
        DiscreteRds::new(self.system(path_seed, back, tau0)?, tau0)
    }

    /// Constants at slots `−depth..−1` on the absorbing balls inflated by the margin.
    pub fn lipschitz(&self, rds: &DiscreteRds<AnySystem>, depth: usize) -> Result<LipschitzEstimate> {
        let (p, _) = self.build_params()?;
        let margin = self.get("lipschitz.margin", p.r)?;
        let probes = self.get("lipschitz.probes", 48usize)?;
        let slots: Vec<i64> = (-(depth as i64)..0).collect();
        k_sequence(rds, &slots, margin, probes, self.seed_for("lipschitz"))
    }
}

pub(crate) fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}
