use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("correction matrix is singular (|det| = {det:e})")]
    SingularCorrection { det: f64 },

    #[error("degenerate noise rate: 1 - 2*rho vanishes")]
    DegenerateRate,

    #[error("threshold undefined: denominator {denominator:e} vanishes")]
    DegenerateThreshold { denominator: f64 },

    #[error("observed S/D ratio is infeasible for these rates (d = {d})")]
    InfeasibleRatio { d: f64 },

    #[error("ratio equation has a non-positive coefficient sum ({sum})")]
    NegativeCoefficient { sum: f64 },

    #[error("no prior in (0.001, 0.999) reproduces similar fraction {target}")]
    NoRoot { target: f64 },

    #[error("non-finite loss or gradient at epoch {epoch}, batch {batch}")]
    NonFinite { epoch: usize, batch: usize },

    #[error("rectifier pre-activation within {margin:e} of zero; sample rejected")]
    NearKink { margin: f64 },

    #[error("no feasible cluster for point {point} under the constraints")]
    InfeasibleConstraints { point: usize },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
