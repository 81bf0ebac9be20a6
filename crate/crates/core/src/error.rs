use num_complex::Complex64;
use thiserror::Error;

/// Failures raised by the numerical pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("denominator of g vanishes at omega = {omega}")]
    DenominatorVanishes { omega: f64 },

    #[error("phase jump {jump:.3} rad between grid nodes {index} and {} exceeds pi/2", index + 1)]
    BranchJumpTooLarge { index: usize, jump: f64 },

    #[error("g has nonzero index {index} on the real line")]
    NonzeroIndex { index: i64 },

    #[error("continuous branch of ln g lost near node {index} even at the refinement cap")]
    BranchUnwrapFailure { index: usize },

    #[error("declared tail model makes the singular integral divergent: {0}")]
    TailDivergence(String),

    #[error("evaluation point {point} lies outside the resolved part of the grid")]
    OutsideGrid { point: Complex64 },

    #[error("zero or pole {location} lies within {clearance:e} of the real axis")]
    RealAxisSingularity { location: Complex64, clearance: f64 },

    #[error("rational function has index {index}; half-plane split cannot be normalized")]
    IndexMismatch { index: i64 },

    #[error("contour passes through or too close to a root near {near}")]
    ContourThroughRoot { near: Complex64 },

    #[error("function is not analytic at {point} (outside its declared strip)")]
    NonAnalytic { point: Complex64 },

    #[error("rational approximant has a pole {location} on the real axis")]
    SpuriousRealPole { location: Complex64 },

    #[error("rational approximation error {error:e} exceeds bound {bound:e}")]
    ApproximationTooCoarse { error: f64, bound: f64 },

    #[error("frequency grid too coarse: |x| up to {x_max} needs spacing below {max_spacing}")]
    GridTooCoarse { x_max: f64, max_spacing: f64 },

    #[error("model cannot be simulated: {0}")]
    UnsimulableModel(String),
}

impl Error {
    /// Variant name, printed by the CLI next to the message.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "InvalidParameter",
            Error::DenominatorVanishes { .. } => "DenominatorVanishes",
            Error::BranchJumpTooLarge { .. } => "BranchJumpTooLarge",
            Error::NonzeroIndex { .. } => "NonzeroIndex",
            Error::BranchUnwrapFailure { .. } => "BranchUnwrapFailure",
            Error::TailDivergence(_) => "TailDivergence",
            Error::OutsideGrid { .. } => "OutsideGrid",
            Error::RealAxisSingularity { .. } => "RealAxisSingularity",
            Error::IndexMismatch { .. } => "IndexMismatch",
            Error::ContourThroughRoot { .. } => "ContourThroughRoot",
            Error::NonAnalytic { .. } => "NonAnalytic",
            Error::SpuriousRealPole { .. } => "SpuriousRealPole",
            Error::ApproximationTooCoarse { .. } => "ApproximationTooCoarse",
            Error::GridTooCoarse { .. } => "GridTooCoarse",
            Error::UnsimulableModel(_) => "UnsimulableModel",
        }
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
