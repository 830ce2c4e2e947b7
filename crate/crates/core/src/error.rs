use thiserror::Error;

/// Errors raised anywhere in the model, engines or sweep driver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported model: {0}")]
    Unsupported(String),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("quadrature did not reach tolerance {tolerance:e} within {subdivisions} subdivisions (estimate {estimate}, error bound {error_bound:e})")]
    Accuracy {
        estimate: f64,
        error_bound: f64,
        tolerance: f64,
        subdivisions: usize,
    },

    #[error("time search could not bracket a maximum (best index {best_index} of {} coarse points)", profile.len())]
    NoBracket {
        best_index: usize,
        /// Coarse-grid `(t, p(t))` samples.
        profile: Vec<(f64, f64)>,
    },

    #[error("derivative is non-positive over the whole grid")]
    FlatProfile,

    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid config `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.into(),
        message: message.into(),
    }
}
