use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error(
        "truncation error {error:.3e} for {parameter} exceeds bound {bound:.1e}; \
         raise n_c or shrink the parameter"
    )]
    Truncation {
        parameter: String,
        error: f64,
        bound: f64,
    },

    #[error(
        "degenerate bin(s) with vanishing probability at (setting, bin) {bins:?}; \
         shrink the grid or regularize the state"
    )]
    DegenerateBin { bins: Vec<(usize, usize)> },

    #[error("Fisher information is ill-conditioned (condition number {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("excessive grid leakage: {leak:.3e} of the probability mass lies outside the grid")]
    ExcessiveLeakage { leak: f64 },

    #[error("no signal: dataset contains no counts")]
    NoSignal,

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error beneath any context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            e => e,
        }
    }

    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self.root(),
            Error::DegenerateBin { .. }
                | Error::IllConditioned { .. }
                | Error::ExcessiveLeakage { .. }
                | Error::NoSignal
        )
    }
}
