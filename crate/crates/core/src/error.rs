use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension {0}: links must have dimension at least 1")]
    InvalidDimension(i64),

    #[error("invalid catalog entry: {0}")]
    InvalidCatalogEntry(String),

    #[error("focal submanifolds of a g=1 foliation are points")]
    DegenerateFocalSet,

    #[error("invalid link `{name}`: {reason}")]
    InvalidLink { name: String, reason: String },

    #[error("link `{0}` carries no shape-operator spectra")]
    SpectraUnavailable(String),

    #[error("minimal products need at least one factor")]
    EmptyProduct,

    #[error("bound evaluation is not finite at t = {t}")]
    NonFiniteBound { t: f64 },

    #[error("integration failed: {0}")]
    IntegrationFailed(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no certified copy count up to n_max = {n_max}")]
    NotFoundWithin { n_max: usize },

    #[error("uniform dimension threshold not found below {cap}")]
    ThresholdNotFound { cap: usize },

    #[error("hypothesis failed: {which}")]
    HypothesisFailed { which: String },
}

pub type Result<T> = std::result::Result<T, Error>;
