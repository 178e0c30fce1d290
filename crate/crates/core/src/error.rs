use thiserror::Error;

/// Errors produced by fitting, distance evaluation, bootstrap and the test layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AgofError {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The data cannot support the requested fit (e.g. zero variance).
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("insufficient data: need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },

    /// Every EM restart collapsed onto the variance floor.
    #[error("degenerate mixture fit: {0}")]
    DegenerateFit(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// Quadrature could not reach the requested accuracy.
    #[error("precision error: achieved error bound {achieved:e} on value {value:e}")]
    Precision { achieved: f64, value: f64 },

    #[error("bootstrap degeneracy: {skipped} of {requested} replicates skipped (limit {limit})")]
    BootstrapDegeneracy {
        skipped: usize,
        requested: usize,
        limit: f64,
    },

    /// Invalid configuration value.
    #[error("invalid config: {0}")]
    Config(String),

    /// Malformed user input (files, model specifications).
    #[error("input error: {0}")]
    Input(String),
}

impl AgofError {
    /// Short machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            AgofError::Domain(_) => "DOMAIN",
            AgofError::DegenerateData(_) => "DEGENERATE_DATA",
            AgofError::InsufficientData { .. } => "INSUFFICIENT_DATA",
            AgofError::DegenerateFit(_) => "DEGENERATE_FIT",
            AgofError::Unsupported(_) => "UNSUPPORTED",
            AgofError::Precision { .. } => "PRECISION",
            AgofError::BootstrapDegeneracy { .. } => "BOOTSTRAP_DEGENERACY",
            AgofError::Config(_) => "CONFIG",
            AgofError::Input(_) => "INPUT",
        }
    }

    /// True for failures of the numerical engines rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            AgofError::Precision { .. }
                | AgofError::DegenerateFit(_)
                | AgofError::BootstrapDegeneracy { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, AgofError>;
