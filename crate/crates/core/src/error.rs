use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParams { name: &'static str, reason: String },

    /// Two roots of the Laplace-domain cubic coincide; the simple-pole
    /// residue expansion does not apply.
    #[error("cubic roots are degenerate (separation {separation:.3e}, scale {scale:.3e})")]
    DegenerateRoots { separation: f64, scale: f64 },

    #[error("quadrature did not reach tolerance {requested:.3e} (estimate {estimate:.3e}) within {panels} panels")]
    QuadratureNotConverged { requested: f64, estimate: f64, panels: usize },

    #[error("integrator step too coarse at t = {t:.6e}: local error estimate {estimate:.3e}")]
    StepTooCoarse { t: f64, estimate: f64 },

    #[error("|C1| = {modulus:.3e} at t = {t:.6e}, decay rate and Lamb shift are undefined")]
    AmplitudeNode { t: f64, modulus: f64 },

    /// Frozen dynamics: the speed-limit ratio is 0/0.
    #[error("population never changes over [0, tau]; speed limit time is undefined")]
    ZeroEvolution,

    #[error("no departure from the Markovian plateau on the sampled axis")]
    NoTransition,

    #[error("first axis sample is already off the Markovian plateau")]
    NoPlateau,

    #[error("time index {index} outside trace of length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("{}", config_message(.line, .key, .message))]
    Config { line: Option<usize>, key: String, message: String },

    #[error("unknown preset `{name}`; available: {}", .available.join(", "))]
    UnknownPreset { name: String, available: Vec<&'static str> },

    #[error("i/o error on {path}: {message}")]
    Io { path: PathBuf, message: String },
}

fn config_message(line: &Option<usize>, key: &str, message: &str) -> String {
    match line {
        Some(line) => format!("config line {line}, key `{key}`: {message}"),
        None => format!("config key `{key}`: {message}"),
    }
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParams { name, reason: reason.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, err: std::io::Error) -> Self {
        Error::Io { path: path.into(), message: err.to_string() }
    }

    /// Short machine-readable name, used in CSV status columns.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParams { .. } => "invalid_params",
            Error::DegenerateRoots { .. } => "degenerate_roots",
            Error::QuadratureNotConverged { .. } => "quadrature_not_converged",
            Error::StepTooCoarse { .. } => "step_too_coarse",
            Error::AmplitudeNode { .. } => "amplitude_node",
            Error::ZeroEvolution => "zero_evolution",
            Error::NoTransition => "no_transition",
            Error::NoPlateau => "no_plateau",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::InvalidGrid(_) => "invalid_grid",
            Error::Config { .. } => "config",
            Error::UnknownPreset { .. } => "unknown_preset",
            Error::Io { .. } => "io",
        }
    }

    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DegenerateRoots { .. }
                | Error::QuadratureNotConverged { .. }
                | Error::StepTooCoarse { .. }
                | Error::AmplitudeNode { .. }
                | Error::ZeroEvolution
                | Error::NoTransition
                | Error::NoPlateau
        )
    }
}
