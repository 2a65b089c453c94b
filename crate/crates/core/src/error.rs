//! Error type shared by all modules.

use thiserror::Error;

/// Errors reported by state constructors, estimators, and loci builders.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DualityError {
    /// A matrix failed the density-matrix checks (hermiticity, unit trace,
    /// positive semidefiniteness).
    #[error("not a valid density matrix: {0}")]
    InvalidDensityMatrix(&'static str),

    /// A matrix supplied as an optical element is not unitary.
    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    /// A Jones vector with zero norm cannot be normalized.
    #[error("cannot normalize a zero-norm polarization vector")]
    ZeroNormVector,

    /// Stokes parameters describe an unphysical (over-polarized) state.
    #[error("unphysical Stokes vector: s1^2+s2^2+s3^2 = {r_squared} > 1")]
    UnphysicalStokes { r_squared: f64 },

    /// A fractional purity outside [0, 1].
    #[error("fractional purity {0} outside [0, 1]")]
    InvalidPurity(f64),

    /// An interferometer configuration parameter outside its allowed range.
    #[error("invalid interferometer configuration: {0}")]
    InvalidConfig(&'static str),

    /// All rates were zero, so the betting likelihood is undefined.
    #[error("no counts: likelihood is undefined for all-zero rates")]
    NoCounts,

    /// The post-selection analyzer passes no light, so the conditional
    /// visibility is undefined (as opposed to zero).
    #[error("analyzer blocks all light: conditional visibility undefined")]
    AnalyzerBlocksAllLight,

    /// Loci construction was requested for the wrong input purity.
    #[error("loci kind requires fractional purity {expected}, state has {found}")]
    PurityMismatch { expected: &'static str, found: f64 },

    /// The two visibility loci coincide, so no great circle is defined.
    #[error("degenerate loci: the two Poincaré points coincide")]
    DegenerateLoci,

    /// The estimation pipeline was left with no signal after corrections.
    #[error("no signal after background subtraction")]
    NoSignal,

    /// A noise-model parameter outside its allowed range.
    #[error("invalid noise model: {0}")]
    InvalidNoiseModel(&'static str),
}
