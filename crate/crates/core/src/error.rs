use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes shared by every module.
///
/// The CLI maps the variants onto exit codes, see [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unsupported {what}: {value}")]
    Unsupported { what: &'static str, value: String },

    #[error("derivative order {order} exceeds kernel max_deriv {max}")]
    DerivativeOrder { order: u32, max: u32 },

    #[error("point at radius {radius} lies beyond the cached radial table (extent {extent})")]
    OutsideTable { radius: f64, extent: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("field has no kernel derivative metadata; B needs Fourier-side derivatives")]
    MissingDerivatives,

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("data touches the grid boundary (|u| = {value:e} at the edge)")]
    SupportAtBoundary { value: f64 },

    #[error("log argument has non-isolated sign changes near index {index}")]
    NonTransversal { index: usize },

    #[error("extrapolation did not converge: level changes {changes:?}")]
    Extrapolation { changes: Vec<f64> },

    #[error("{what} did not converge after {iterations} iterations (last change {last:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        last: f64,
    },

    #[error("{what} diverged: {detail}")]
    Divergence { what: &'static str, detail: String },

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("not enough data: {0}")]
    InsufficientData(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// 2 for configuration problems, 3 for numerical failures, 4 for broken invariants.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::Unsupported { .. }
            | Error::DerivativeOrder { .. }
            | Error::GridMismatch(_)
            | Error::MissingDerivatives
            | Error::SupportAtBoundary { .. }
            | Error::Io { .. }
            | Error::Json(_) => 2,
            Error::Invariant(_) => 4,
            _ => 3,
        }
    }
}
