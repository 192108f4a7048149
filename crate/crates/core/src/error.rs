use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("unsupported number of contacts: {0} (at most 2)")]
    UnsupportedArity(usize),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("singular design matrix: {0}")]
    SingularDesign(String),

    #[error("kernel matrix is not positive definite ({0}); add jitter to the noise variance")]
    Factorisation(String),

    #[error("degenerate labels: {0}")]
    DegenerateLabels(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("training coverage error{}: missing {}", fold_suffix(*.fold), .missing.join(", "))]
    Coverage {
        fold: Option<usize>,
        missing: Vec<String>,
    },

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("serialisation error: {0}")]
    Serde(String),
}

fn fold_suffix(fold: Option<usize>) -> String {
    fold.map(|f| format!(" in fold {f}")).unwrap_or_default()
}

impl Error {
    /// True for failures of the numerical routines themselves, as opposed to
    /// bad input data or usage.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularDesign(_) | Error::Factorisation(_) | Error::UndefinedMetric(_)
        )
    }
}
