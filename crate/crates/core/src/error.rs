use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("operators act on different spaces: {left:?} vs {right:?}")]
    SpaceMismatch { left: Vec<usize>, right: Vec<usize> },

    #[error("invalid composite space: {0}")]
    InvalidSpace(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("site {site} out of range for a space with {sites} sites")]
    SiteOutOfRange { site: usize, sites: usize },

    #[error("partial trace needs at least one kept site")]
    EmptyKeepSet,

    #[error("operator is not Hermitian (max |A - A^dagger| = {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not unitary (max |U^dagger U - I| = {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid model spec: {0}")]
    InvalidSpec(String),

    #[error("dimension {dim} needs ~{bytes} bytes per dense matrix, above the {cap} byte budget")]
    MemoryBudget { dim: usize, bytes: u128, cap: u128 },

    #[error("time {t} is not a nonnegative integer kick count")]
    NonIntegerTime { t: f64 },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("invalid series: {0}")]
    InvalidSeries(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("numerical validation '{check}' failed: deviation {deviation:.3e} > {tolerance:.1e}")]
    Validation {
        check: String,
        deviation: f64,
        tolerance: f64,
    },
}

impl Error {
    pub(crate) fn space_mismatch(
        left: &crate::hilbert::CompositeSpace,
        right: &crate::hilbert::CompositeSpace,
    ) -> Self {
        Error::SpaceMismatch {
            left: left.site_dims().to_vec(),
            right: right.site_dims().to_vec(),
        }
    }
}
