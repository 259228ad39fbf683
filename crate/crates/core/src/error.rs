use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("query at t = {t} exceeds the spectrum truncation bound l_max = {l_max}")]
    TruncationExceeded { t: f64, l_max: f64 },

    #[error("slice width must be positive, got {0}")]
    InvalidEta(f64),

    #[error("window [-{window}, {window}] is not an integral number of bins of width {bin_width}")]
    BadBins { window: f64, bin_width: f64 },

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("invalid scaling function: {0}")]
    InvalidScaling(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("result exceeds the floating-point range; use the log-space variant")]
    Overflow,

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("counting function is not increasing on [{t_min}, {l_max}]")]
    NonMonotoneF { t_min: f64, l_max: f64 },

    #[error("resource budget of {limit} exceeded")]
    BudgetExceeded { limit: u64 },

    #[error("graph has no exponential growth (spectral radius at s = 0 is {rho0})")]
    NoGrowth { rho0: f64 },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
