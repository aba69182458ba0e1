use thiserror::Error;

/// Crate-wide error type. The CLI maps variants onto exit codes: input
/// problems (parsing, invalid specs) exit 2, domain and singularity
/// problems exit 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("invalid surface spec: {0}")]
    InvalidSpec(String),

    #[error("point is off the surface: |f(x)| = {residual:.3e} exceeds tolerance {tol:.3e}")]
    OffSurface { residual: f64, tol: f64 },

    #[error("singular gradient of f at ({0:.6}, {1:.6}, {2:.6})")]
    SingularGradient(f64, f64, f64),

    #[error("{equation} is singular at {coordinate} = {value:.6}: {detail}")]
    SingularEquation {
        equation: String,
        coordinate: String,
        value: f64,
        detail: String,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("constraint projection did not converge after {iterations} iterations (residual {residual:.3e})")]
    ProjectionFailed { iterations: usize, residual: f64 },

    #[error("step size collapsed near {coordinate} = {location:.9}: {detail}")]
    StepSizeCollapse {
        coordinate: String,
        location: f64,
        detail: String,
    },

    #[error("chart mismatch: {0}")]
    ChartMismatch(String),

    #[error("evaluation error: {0}")]
    Eval(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Exit code the CLI uses for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::InvalidSpec(_) | Error::Io(_) => 2,
            _ => 3,
        }
    }
}
