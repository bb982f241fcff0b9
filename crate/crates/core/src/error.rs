use thiserror::Error;

/// Errors raised by geometry construction, grid building, scenario loading and the solvers.
#[derive(Debug, Error)]
pub enum GullyError {
    /// A query outside the admissible parameter range (arclength, offset, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A point that does not lie in the closed tube. Carries the best Newton iterate.
    #[error("point outside the tube: best iterate sigma = {sigma}, s = {s}")]
    OutOfDomain { sigma: f64, s: f64 },

    /// Degenerate or inconsistent curve data.
    #[error("curve construction failed: {0}")]
    Construction(String),

    /// Bad configuration; `path` names the offending key when one is known.
    #[error("configuration error at `{path}`: {message}")]
    Config { path: String, message: String },

    /// Linear solve breakdown or a non-finite state.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl GullyError {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        GullyError::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, GullyError>;
