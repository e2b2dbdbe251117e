use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix dimension {dim} exceeds the supported cap of {cap}")]
    DimensionTooLarge { dim: usize, cap: usize },

    #[error("singular matrix: pivot {pivot:.3e} below threshold {threshold:.3e}")]
    SingularMatrix { pivot: f64, threshold: f64 },

    #[error("eigenvalue iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("order p = {0} is outside the C(p) table (2..=11)")]
    OutOfTable(usize),

    #[error("unsupported variant: {0}")]
    VariantUnsupported(String),

    #[error("branch {branch} has a pole at rho_inf = {rho}")]
    PoleAtRho { branch: &'static str, rho: f64 },

    #[error("L(T) is singular at T = {re} + {im}i")]
    SingularAtT { re: f64, im: f64 },

    #[error("alpha_m must be nonzero")]
    DegenerateAlphaM,

    #[error("degenerate parameters: {0}")]
    DegenerateParams(String),

    #[error("sequence too short: need at least {need} values, got {got}")]
    TooShort { need: usize, got: usize },

    #[error("shifted solve failed: {0}")]
    SolveFailed(String),

    #[error("step system is singular (pole of the amplification matrix)")]
    StepSingular,

    #[error("step {step} failed: {source}")]
    StepFailed {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("every error in the convergence study is below the round-off floor")]
    AllAtRoundoff,

    #[error("no sign change of the error functional on [{lo}, {hi}] at T = {t}")]
    NoRoot { lo: f64, hi: f64, t: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Short stable identifier used in machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::DimensionTooLarge { .. } => "DimensionTooLarge",
            Error::SingularMatrix { .. } => "SingularMatrix",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::OutOfTable(_) => "OutOfTable",
            Error::VariantUnsupported(_) => "VariantUnsupported",
            Error::PoleAtRho { .. } => "PoleAtRho",
            Error::SingularAtT { .. } => "SingularAtT",
            Error::DegenerateAlphaM => "DegenerateAlphaM",
            Error::DegenerateParams(_) => "DegenerateParams",
            Error::TooShort { .. } => "TooShort",
            Error::SolveFailed(_) => "SolveFailed",
            Error::StepSingular => "StepSingular",
            Error::StepFailed { .. } => "StepFailed",
            Error::AllAtRoundoff => "AllAtRoundoff",
            Error::NoRoot { .. } => "NoRoot",
            Error::InvalidArgument(_) => "InvalidArgument",
        }
    }
}
