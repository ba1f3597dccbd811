use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("time {t} is not aligned to the grid step {dt}")]
    Alignment { t: f64, dt: f64 },

    #[error("window exhausted: need [{need_lo}, {need_hi}] but the path covers [{have_lo}, {have_hi}]")]
    WindowExhausted {
        need_lo: f64,
        need_hi: f64,
        have_lo: f64,
        have_hi: f64,
    },

    #[error("integrator diverged at t = {t}: H-norm {norm:e} exceeds the blow-up guard")]
    Divergence { t: f64, norm: f64 },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("estimation error: {0}")]
    Estimation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable code used in `ERROR <code> <message>` lines.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Alignment { .. } => "alignment",
            Error::WindowExhausted { .. } => "window-exhausted",
            Error::Divergence { .. } => "divergence",
            Error::EmptyInput(_) => "empty-input",
            Error::Domain(_) => "domain",
            Error::Estimation(_) => "estimation",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
        }
    }

    pub(crate) fn window(need: (f64, f64), have: (f64, f64)) -> Self {
        Error::WindowExhausted {
            need_lo: need.0,
            need_hi: need.1,
            have_lo: have.0,
            have_hi: have.1,
        }
    }
}
