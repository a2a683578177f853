use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A channel realization is rank-deficient in a way that breaks the
    /// transmission chain (measure-zero under the fading model).
    #[error("degenerate channel: {0}")]
    DegenerateChannel(String),

    /// The aligned signal space is numerically singular (strict mode only).
    #[error("ill-conditioned alignment: condition number {cond:.3e} exceeds {limit:.3e}")]
    IllConditionedAlignment { cond: f64, limit: f64 },

    /// An evaluator produced a value outside its sane range; the raw value
    /// is attached rather than silently clamped.
    #[error("numeric instability in {context}: raw value {value}")]
    NumericInstability { context: &'static str, value: f64 },

    /// A `NetworkConfig` or `ExperimentSpec` invariant does not hold.
    #[error("config invariant violated: {0}")]
    ConfigInvariant(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// CLI exit code mapping: 2 invalid flags, 3 config invariant, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::Domain(_) => 2,
            Error::ConfigInvariant(_) => 3,
            Error::Io(_) => 4,
            _ => 1,
        }
    }
}
