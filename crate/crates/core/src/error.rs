use thiserror::Error;

pub type Result<T> = std::result::Result<T, LabError>;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("field is not finite: {0}")]
    NonFinite(String),

    #[error("grid mismatch between fields")]
    GridMismatch,

    #[error("already outside window: c = {c} <= 1/(8 pi)")]
    OutsideWindow { c: f64 },

    #[error("CFL violation: dt = {dt} gives CFL number {cfl:.3}; suggested dt = {suggested}")]
    Cfl { dt: f64, cfl: f64, suggested: f64 },

    #[error("blow-up: non-finite state at t = {t}")]
    BlowUp { t: f64 },

    #[error("time mismatch: field at t = {field_t}, drift state at t = {drift_t}")]
    TimeMismatch { field_t: f64, drift_t: f64 },

    #[error("no pulse: {0}")]
    NoPulse(String),

    #[error("singular discretization: {0}")]
    Singular(String),

    #[error("eigenvalue solver failed to converge ({0})")]
    EigenFailure(String),

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("format error: {0}")]
    Format(String),
}

impl LabError {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
