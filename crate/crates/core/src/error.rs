use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("singular configuration: particles {i} and {j} are {distance:e} apart")]
    SingularConfiguration { i: usize, j: usize, distance: f64 },

    #[error("test position is {distance:e} from environment point {j}")]
    TestPointCollision { j: usize, distance: f64 },

    #[error("coordinate {value} of particle {index} lies outside the open half-line (0, inf)")]
    Domain { index: usize, value: f64 },

    #[error("{what}: argument {value} outside supported range [{min}, {max}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("invalid parameter `{key}`: {reason}")]
    InvalidParameter { key: String, reason: String },

    #[error("step failure at t = {time}: substep depth {depth} exhausted")]
    StepFailure { time: f64, depth: u32 },

    #[error("path {path}: {source}")]
    Path {
        path: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("sample {sample}: {source}")]
    Sample {
        sample: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("MCMC chain did not converge: acceptance rate {rate:.3} outside [0.1, 0.9]")]
    NonConvergence { rate: f64 },

    #[error("too many points for a correlation determinant: {got} > {max}")]
    TooManyPoints { got: usize, max: usize },

    #[error("eigenvalue solver failed: {0}")]
    Eigen(String),

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            key: key.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by the numerics (singular states, exhausted
    /// substeps, diverging chains) rather than by bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::SingularConfiguration { .. }
            | Error::TestPointCollision { .. }
            | Error::Domain { .. }
            | Error::StepFailure { .. }
            | Error::NonConvergence { .. }
            | Error::Eigen(_) => true,
            Error::Path { source, .. } | Error::Sample { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
