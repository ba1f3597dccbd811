use crate::config::KvConfig;
use crate::error::{Error, Result};

/// Constants of the absorbing-radius formula (existential in the analysis).
#[derive(Clone, Debug, PartialEq)]
pub struct AbsorbConstants {
    pub c1: f64,
    pub delta: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
}

impl Default for AbsorbConstants {
    fn default() -> Self {
        AbsorbConstants {
            c1: 1.0,
            delta: 0.5,
            c2: 1.0,
            c3: 1.0,
            c4: 1.0,
        }
    }
}

/// Parameters of the Galerkin reaction–diffusion system on `(0, π)`.
///
/// `f(u) = f_cubic u³ + f_linear u`, diffusion `a`, forcing `h` in the
/// eigenbasis, noise amplitudes `b_j` against `λ_j = j²`.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemConfig {
    pub modes: usize,
    pub a: f64,
    pub f_cubic: f64,
    pub f_linear: f64,
    pub p: f64,
    pub h: Vec<f64>,
    pub dt: f64,
    pub collocation: usize,
    pub epsilon: f64,
    pub burn_in: f64,
    pub b: Vec<f64>,
    /// Tolerance for the per-mode OU truncation bound.
    pub ou_tol: f64,
    pub consts: AbsorbConstants,
}

impl SystemConfig {
    /// Defaults: `f(u) = u³ − u`, `a = 1`, `b_j = j⁻⁴`, no forcing.
    pub fn new(modes: usize) -> Self {
        SystemConfig {
            modes,
            a: 1.0,
            f_cubic: 1.0,
            f_linear: -1.0,
            p: 3.0,
            h: vec![0.0; modes],
            dt: 1e-3,
            collocation: 2 * modes,
            epsilon: 0.1,
            burn_in: 20.0,
            b: (1..=modes).map(|j| (j as f64).powi(-4)).collect(),
            ou_tol: 1e-8,
            consts: AbsorbConstants::default(),
        }
    }

    /// Linear heat equation (`f ≡ 0`).
    pub fn heat(modes: usize) -> Self {
        SystemConfig {
            f_cubic: 0.0,
            f_linear: 0.0,
            ..SystemConfig::new(modes)
        }
    }

    pub fn lambda(&self) -> Vec<f64> {
        (1..=self.modes).map(|j| (j * j) as f64).collect()
    }

    pub fn from_kv(kv: &KvConfig) -> Result<Self> {
        let modes = kv.parse_or("modes", 16usize)?;
        let mut c = SystemConfig::new(modes);
        c.a = kv.parse_or("a", c.a)?;
        c.f_cubic = kv.parse_or("f.cubic", c.f_cubic)?;
        c.f_linear = kv.parse_or("f.linear", c.f_linear)?;
        c.p = kv.parse_or("p", c.p)?;
        c.dt = kv.parse_or("dt", c.dt)?;
        c.collocation = kv.parse_or("collocation", c.collocation)?;
        c.epsilon = kv.parse_or("epsilon", c.epsilon)?;
        c.burn_in = kv.parse_or("burn_in", c.burn_in)?;
        c.ou_tol = kv.parse_or("ou.tol", c.ou_tol)?;
        let decay = kv.parse_or("noise.decay", 4.0)?;
        c.b = (1..=modes).map(|j| (j as f64).powf(-decay)).collect();
        if let Some(b) = kv.list_f64("noise.b")? {
            c.b = b;
        }
        if let Some(h) = kv.list_f64("h.coeffs")? {
            if h.len() > modes {
                return Err(Error::Config(format!(
                    "h.coeffs has {} entries but modes = {modes}",
                    h.len()
                )));
            }
            c.h[..h.len()].copy_from_slice(&h);
        }
        c.consts = AbsorbConstants {
            c1: kv.parse_or("const.c1", 1.0)?,
            delta: kv.parse_or("const.delta", 0.5)?,
            c2: kv.parse_or("const.C2", 1.0)?,
            c3: kv.parse_or("const.C3", 1.0)?,
            c4: kv.parse_or("const.C4", 1.0)?,
        };
        c.validate()?;
        Ok(c)
    }

    /// Structural checks plus the growth and dissipativity conditions on `f`.
    ///
    /// For `f(u) = c u³ + l u` with `c > 0`: `f(u)u ≥ (c/2)u⁴ − l²/(2c)`,
    /// `f′ ≥ l` and `|f′(u)| ≤ C(1 + u²)`, so the conditions hold with `p = 3`.
    /// The linear case `c = 0` is accepted when `l ≥ 0`.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.modes == 0 {
            return bad("modes must be at least 1".into());
        }
        if !(self.a > 0.0) {
            return bad(format!("a must be positive, got {}", self.a));
        }
        if !(self.dt > 0.0) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if self.collocation < 2 * self.modes {
            return bad(format!(
                "collocation = {} is below 2·modes = {}; the cubic would alias",
                self.collocation,
                2 * self.modes
            ));
        }
        if !(-1.0..=1.0).contains(&self.epsilon) {
            return bad(format!("epsilon must lie in [-1, 1], got {}", self.epsilon));
        }
        if !(self.burn_in > 0.0) {
            return bad(format!("burn_in must be positive, got {}", self.burn_in));
        }
        if self.b.len() != self.modes || self.h.len() != self.modes {
            return bad("noise amplitudes and forcing must have one entry per mode".into());
        }
        if self.b.iter().any(|b| !(*b >= 0.0 && b.is_finite())) {
            return bad("noise amplitudes must be finite and non-negative".into());
        }
        if self.f_cubic > 0.0 {
            if self.p != 3.0 {
                return bad(format!(
                    "a cubic nonlinearity has growth exponent p = 3, got p = {}",
                    self.p
                ));
            }
        } else if self.f_cubic < 0.0 || self.f_linear < 0.0 {
            return bad(format!(
                "f(u) = {}u³ + {}u violates the dissipativity condition",
                self.f_cubic, self.f_linear
            ));
        }
        let k = &self.consts;
        if !(k.c1 > 0.0 && k.delta > 0.0 && k.delta < k.c1) {
            return bad(format!("need 0 < const.delta < const.c1, got {} and {}", k.delta, k.c1));
        }
        if !(k.c2 >= 0.0 && k.c3 >= 0.0 && k.c4 >= 0.0) {
            return bad("const.C2, const.C3, const.C4 must be non-negative".into());
        }
        Ok(())
    }
}
