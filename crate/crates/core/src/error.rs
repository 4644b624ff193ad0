use thiserror::Error;

/// Everything that can go wrong inside the simulator.
///
/// Variants are grouped by [`ErrorKind`], which the command-line front end
/// maps onto process exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("wavenumber must be non-negative, got {0} rad/m")]
    NegativeWavenumber(f64),

    #[error(
        "below-Larmor target: {target_hz} Hz is under the bare Larmor frequency {larmor_hz} Hz"
    )]
    BelowLarmor { target_hz: f64, larmor_hz: f64 },

    #[error("no propagating mode at {f_hz} Hz (band is {lo_hz}..{hi_hz} Hz)")]
    NoPropagatingMode { f_hz: f64, lo_hz: f64, hi_hz: f64 },

    #[error("envelope band {lo_hz}..{hi_hz} Hz exceeds the transfer function support")]
    BandOverflow { lo_hz: f64, hi_hz: f64 },

    #[error("envelopes live on mismatched grids: {0}")]
    GridMismatch(String),

    #[error("no transition found in detected trace")]
    NoTransition,

    #[error("indeterminate phase: amplitude vanishes in the read-out window")]
    IndeterminatePhase,

    #[error("channel i{channel} has no transmission at the carrier")]
    DeadChannel { channel: usize },

    #[error("calibration objective is flat for channel i{channel}")]
    FlatObjective { channel: usize },

    #[error("logic output indeterminate for input state {state}")]
    IndeterminateLogic { state: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

/// Coarse classification used for exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Physics,
    Logic,
    Io,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParameter { .. } | Error::Config(_) => ErrorKind::Config,
            Error::IndeterminateLogic { .. } | Error::IndeterminatePhase => ErrorKind::Logic,
            Error::Io(_) => ErrorKind::Io,
            _ => ErrorKind::Physics,
        }
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
