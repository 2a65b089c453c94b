//! Simulation library for a polarization-marked single-photon Mach-Zehnder
//! interferometer.
//!
//! The crate models the path/polarization joint state of the interferometer,
//! computes fringe visibility and which-way knowledge metrics, performs
//! quantum-eraser (conditional fringe) analysis, and emulates the photon
//! counting measurement pipeline with detector noise.
//!
//! Modules:
//! - [`polarization`]: 2-dimensional polarization algebra (Jones vectors,
//!   density matrices, Stokes/Poincaré representation, waveplate unitaries).
//! - [`interferometer`]: joint path⊗polarization state construction and
//!   detector fringe profiles.
//! - [`metrics`]: likelihood, knowledge, distinguishability, the duality
//!   quantities, and the CHSH correlation value.
//! - [`eraser`]: conditional fringes behind a polarization analyzer,
//!   zero-visibility angles, Poincaré-sphere loci.
//! - [`montecarlo`]: Poisson photon-counting simulation and the
//!   background-subtraction/efficiency-scaling estimation pipeline.
//!
//! All angles are radians unless a name carries an explicit `_deg` suffix.
//! Types are immutable values and operations are pure functions, so
//! everything is safe to use concurrently without synchronization.

pub mod eraser;
pub mod error;
pub mod interferometer;
pub mod metrics;
pub mod montecarlo;
pub mod polarization;

pub(crate) mod search;

pub use error::DualityError;
pub use num_complex::Complex64;

/// Tolerance for algebraic identities (unitarity, trace, hermiticity).
pub const ALGEBRAIC_TOL: f64 = 1e-12;

/// Tolerance for quantities obtained by numeric search or refinement.
pub const SEARCH_TOL: f64 = 1e-9;

/// Convenience result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, DualityError>;
