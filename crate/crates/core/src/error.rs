use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge: estimate {estimate:e}, error bound {error:e}")]
    Convergence { estimate: f64, error: f64 },

    #[error("{module}: {message}")]
    Numerical { module: &'static str, message: String },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("value {value:e} outside tabulated range [{min:e}, {max:e}]")]
    OutOfRange { value: f64, min: f64, max: f64 },

    #[error("interface mismatch: {0}")]
    Interface(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("capability exceeded: {0}")]
    Capability(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{failed} of {total} scan cells failed")]
    PartialScan { failed: usize, total: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn numerical(module: &'static str, message: impl Into<String>) -> Self {
        Error::Numerical {
            module,
            message: message.into(),
        }
    }
}
