use thiserror::Error;

/// Errors surfaced by the laboratory operations.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("cusp singularity: gradient undefined near {point:?}")]
    CuspSingularity { point: Vec<f64> },

    #[error("unsupported model for this operation: {0}")]
    UnsupportedModel(String),

    #[error("zero gradient at the chart base point")]
    ZeroGradient,

    #[error("chart radius {lambda} exceeds the admissible bound {max}")]
    RadiusTooLarge { lambda: f64, max: f64 },

    #[error("Newton iteration did not converge within {0} steps")]
    NewtonDivergence(usize),

    #[error("trajectory left the chart ball at t = {0}")]
    LeftChart(f64),

    #[error("subdivision budget exceeded ({0} intervals)")]
    BudgetExceeded(usize),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("degenerate design matrix in regression fit")]
    FitDegenerate,

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("model format error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;
