use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("wavelength {wavelength_um} um outside dispersion range [{lo}, {hi}] um")]
    OutOfRange { wavelength_um: f64, lo: f64, hi: f64 },

    #[error("unphysical wavelengths: {0}")]
    Domain(String),

    #[error("invalid spectral grid: {0}")]
    InvalidGrid(String),

    #[error("unknown dispersion form `{0}`")]
    UnknownDispersionForm(String),

    #[error("plate angle solver did not converge for direction {0:?}")]
    SolverFailed([f64; 3]),

    #[error("incomplete operator set: {0}")]
    IncompleteOperators(String),

    #[error("invalid probabilities: {0}")]
    InvalidProbabilities(String),

    #[error("invalid count data: {0}")]
    InvalidCounts(String),

    #[error("chi-square test has no degrees of freedom (dof = {0})")]
    NoDegreesOfFreedom(i64),

    #[error("information matrix is singular: protocol `{0}` is not informationally complete")]
    SingularInformation(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
