use thiserror::Error;

use crate::scattering::PhaseLabel;

/// Errors raised by the scattering library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScatterError {
    #[error("wave number must be strictly positive, got {0}")]
    NonPositiveWaveNumber(f64),

    #[error("invalid potential cell: {0}")]
    InvalidCell(String),

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("phase of {label} is undefined: modulus {modulus:e} is below the floor")]
    UndefinedPhase { label: PhaseLabel, modulus: f64 },

    #[error("grid is not strictly increasing at index {index}")]
    NonIncreasingGrid { index: usize },

    #[error("ambiguous branch while unwrapping: adjacent phase jump at index {index} is \u{3c0}")]
    AmbiguousBranch { index: usize },

    #[error("phase jump of {jump} rad at index {index} is not below \u{3c0}; refine the grid")]
    UnresolvedPhaseJump { index: usize, jump: f64 },

    #[error("singular S/transfer conversion: |{which}| = {modulus:e}")]
    SingularConversion { which: &'static str, modulus: f64 },

    #[error("multiple-reflection series diverges: |1 - l_B r_A| = {modulus:e}")]
    ResonanceDivergence { modulus: f64 },

    #[error("k = {k} is not an interior point of the phase curve with two neighbours on each side")]
    EdgeOfGrid { k: f64 },

    #[error("phase curve grid is not uniform around k = {k}")]
    NonUniformGrid { k: f64 },

    #[error("curve labelled {found} supplied where {expected} was expected")]
    WrongCurve { expected: PhaseLabel, found: PhaseLabel },

    #[error("averaging window [{lo}, {hi}] exceeds the sampled range [{min}, {max}]")]
    Coverage { lo: f64, hi: f64, min: f64, max: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("wave number k = {k} is not in a gap (z = {z}); phases do not converge")]
    NotInGap { k: f64, z: f64 },
}

pub type Result<T> = std::result::Result<T, ScatterError>;
