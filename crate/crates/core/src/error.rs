use thiserror::Error;

/// Errors raised across the guidance pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("satellite impacted the Earth at t = {t} s (radius {radius} m)")]
    Impact { t: f64, radius: f64 },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("singular attitude configuration: {0}")]
    Singular(String),

    #[error("rollout diverged at node {node}")]
    Divergence { node: usize },

    #[error("backward sweep failed at node {node}: Q_uu not positive definite after regularization {regularization:e}")]
    SweepFailure { node: usize, regularization: f64 },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// True for errors rooted in the kinematics (LOS, reference vector, frame).
    pub fn is_kinematic(&self) -> bool {
        matches!(self, Error::DegenerateGeometry(_) | Error::Singular(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
