use thiserror::Error;

/// Errors raised anywhere in the pipeline.
///
/// The harness maps each variant onto a process exit code, see
/// [`MlhError::exit_code`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MlhError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("arithmetic error: {0}")]
    Arithmetic(String),

    #[error("quadratic field mismatch: sqrt({left}) vs sqrt({right})")]
    DiscMismatch { left: u64, right: u64 },

    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error("hypersurface is not lightlike: induced Gram matrix has nullity {nullity}")]
    NotLightlike { nullity: usize },

    #[error("induced metric has nullity {nullity}, expected a rank one radical")]
    NotHypersurfaceRank { nullity: usize },

    #[error("screen construction failed: {0}")]
    ScreenConstruction(String),

    #[error("degenerate chart: {0}")]
    DegenerateChart(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("schema error: {0}")]
    Schema(String),
}

impl MlhError {
    /// Process exit code for this error (identity failures use 2 and are not errors).
    pub fn exit_code(&self) -> i32 {
        match self {
            MlhError::Schema(_) => 4,
            _ => 3,
        }
    }

    /// Stable machine-readable tag used in error records.
    pub fn kind(&self) -> &'static str {
        match self {
            MlhError::Domain(_) => "Domain",
            MlhError::Arithmetic(_) => "Arithmetic",
            MlhError::DiscMismatch { .. } => "DiscMismatch",
            MlhError::InvariantViolation(_) => "InvariantViolation",
            MlhError::NotLightlike { .. } => "NotLightlike",
            MlhError::NotHypersurfaceRank { .. } => "NotHypersurfaceRank",
            MlhError::ScreenConstruction(_) => "ScreenConstruction",
            MlhError::DegenerateChart(_) => "DegenerateChart",
            MlhError::Precondition(_) => "Precondition",
            MlhError::Schema(_) => "Schema",
        }
    }
}

pub type Result<T> = std::result::Result<T, MlhError>;
