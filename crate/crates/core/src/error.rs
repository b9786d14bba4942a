use thiserror::Error;

/// Errors raised by every module of the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    #[error("{family} has no finite moment of order {order}")]
    MomentDomain { family: String, order: usize },

    #[error("series has zero constant term and cannot be inverted")]
    SingularSeries,

    #[error("series orders differ ({left} vs {right})")]
    OrderMismatch { left: usize, right: usize },

    #[error("recursion degenerates at order {order}: leading coefficient {coefficient:e} vanishes, solution is not unique")]
    NonUnique { order: usize, coefficient: f64 },

    #[error("contraction factor rho = {rho} >= 1 for (p, a, b) = ({p}, {a}, {b})")]
    ContractionFailure { p: f64, a: f64, b: f64, rho: f64 },

    #[error("observed ratio {ratio} exceeds contraction bound {bound}; refine the grid")]
    ContractionViolation { ratio: f64, bound: f64 },

    #[error("weighted integral diverges: {0}")]
    Divergence(String),

    #[error("quadrature did not reach tolerance {tolerance:e} (estimated error {estimate:e})")]
    Quadrature { tolerance: f64, estimate: f64 },

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("binning failed: {0}")]
    Binning(String),

    #[error("misuse: {0}")]
    Misuse(String),

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Errors caused by bad input rather than by a numerical breakdown.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::ParameterDomain(_)
                | Error::MomentDomain { .. }
                | Error::OrderMismatch { .. }
                | Error::Misuse(_)
                | Error::Grid(_)
                | Error::Config(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
