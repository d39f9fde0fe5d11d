use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("frequencies {omegas:?} are not integer multiples of a common base frequency")]
    Incommensurate { omegas: Vec<f64> },

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("invalid netlist: {0}")]
    InvalidNetlist(String),

    #[error("singular network at omega = {omega} rad/s")]
    SingularNetwork { omega: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two independent evaluation routes of the same quantity disagree.
    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
}
