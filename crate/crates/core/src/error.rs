use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("density is not normalized: call normalize first")]
    Unnormalized,

    #[error("density has zero mass")]
    ZeroMass,

    #[error("negative density values detected on grid (min {0:e})")]
    NegativeDensity(f64),

    #[error("compact support required")]
    CompactSupportRequired,

    #[error("degenerate search grid: {0}")]
    DegenerateSearch(&'static str),

    /// A mathematical precondition of an operation does not hold. The message
    /// names the violated inequality.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("frequency {requested} beyond Nyquist limit {nyquist} on axis {axis}")]
    BeyondNyquist {
        axis: usize,
        requested: f64,
        nyquist: f64,
    },

    #[error("non-finite summand at lattice index {0:?}")]
    NonFinite(Vec<i64>),

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
