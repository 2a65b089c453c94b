//! Joint path⊗polarization state of the compressed Mach-Zehnder
//! interferometer, detector intensities, and fringe profiles.
//!
//! The entry beam splitter sends the photon into path 1 with weight `w1`
//! and path 2 with weight `w2 = 1 − w1`. Each path applies a polarization
//! unitary (the marking element composed with an optional residual
//! perturbation). The relative path phase φ is not a stored quantity: the
//! path-length scan of the readout is applied analytically, so detector
//! intensities are explicit functions of φ.

use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::error::DualityError;
use crate::polarization::{CMat2, ElementUnitary, PolState};
use crate::Result;

/// Output port of the recombining beam splitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectorPort {
    D1,
    D2,
}

/// Interferometer description: entry-splitter asymmetry, per-path elements,
/// and the coherence imperfection model.
///
/// The scalar `intrinsic_visibility` multiplies the coherence block of the
/// joint state; slow polarization-dependent imperfections go into the
/// optional per-path residual unitaries, applied after the path element.
#[derive(Debug, Clone, Copy)]
pub struct InterferometerConfig {
    /// Path-1 weight w1 ∈ (0, 1); path 2 carries w2 = 1 − w1.
    pub entry_reflectivity: f64,
    /// Polarization element in path 1 (the which-way marker slot).
    pub path1_element: ElementUnitary,
    /// Polarization element in path 2.
    pub path2_element: ElementUnitary,
    /// Coherence degradation factor V0 ∈ [0, 1]; 1 is a perfect instrument.
    pub intrinsic_visibility: f64,
    /// Residual polarization transformation in path 1, if any.
    pub path1_residual: Option<ElementUnitary>,
    /// Residual polarization transformation in path 2, if any.
    pub path2_residual: Option<ElementUnitary>,
}

impl Default for InterferometerConfig {
    /// Balanced splitter, identity elements, perfect coherence.
    fn default() -> Self {
        Self {
            entry_reflectivity: 0.5,
            path1_element: ElementUnitary::identity(),
            path2_element: ElementUnitary::identity(),
            intrinsic_visibility: 1.0,
            path1_residual: None,
            path2_residual: None,
        }
    }
}

impl InterferometerConfig {
    /// An ideal interferometer with the given element in path 1.
    pub fn ideal(path1_element: ElementUnitary) -> Self {
        Self {
            path1_element,
            ..Self::default()
        }
    }

    /// Checks parameter ranges.
    pub fn validate(&self) -> Result<()> {
        if !(self.entry_reflectivity > 0.0 && self.entry_reflectivity < 1.0) {
            return Err(DualityError::InvalidConfig("entry_reflectivity must lie in (0, 1)"));
        }
        if !(0.0..=1.0).contains(&self.intrinsic_visibility) {
            return Err(DualityError::InvalidConfig("intrinsic_visibility must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Path weights (w1, w2).
    pub fn weights(&self) -> (f64, f64) {
        (self.entry_reflectivity, 1.0 - self.entry_reflectivity)
    }

    /// Full per-path unitaries, residuals included.
    pub fn path_unitaries(&self) -> (CMat2, CMat2) {
        let u1 = match &self.path1_residual {
            Some(r) => r.matrix() * self.path1_element.matrix(),
            None => self.path1_element.matrix(),
        };
        let u2 = match &self.path2_residual {
            Some(r) => r.matrix() * self.path2_element.matrix(),
            None => self.path2_element.matrix(),
        };
        (u1, u2)
    }
}

/// A-priori which-way knowledge from splitter asymmetry alone: P = |w1 − w2|.
pub fn predictability(config: &InterferometerConfig) -> f64 {
    let (w1, w2) = config.weights();
    (w1 - w2).abs()
}

/// The joint path⊗polarization density matrix in path-indexed block form
/// {ρ₁₁, ρ₁₂, ρ₂₂}; the full 4×4 matrix is [[ρ₁₁, ρ₁₂], [ρ₁₂†, ρ₂₂]].
#[derive(Debug, Clone, Copy)]
pub struct JointState {
    rho11: CMat2,
    rho12: CMat2,
    rho22: CMat2,
}

impl JointState {
    /// Assembles the joint state for a polarization input:
    /// ρ₁₁ = w1·U₁ρU₁†, ρ₂₂ = w2·U₂ρU₂†, ρ₁₂ = V0·√(w1w2)·U₁ρU₂†.
    pub fn build(input: &PolState, config: &InterferometerConfig) -> JointState {
        let (w1, w2) = config.weights();
        let (u1, u2) = config.path_unitaries();
        let rho = input.matrix();
        let v0 = config.intrinsic_visibility;
        JointState {
            rho11: u1 * rho * u1.adjoint() * Complex64::new(w1, 0.0),
            rho12: u1 * rho * u2.adjoint() * Complex64::new(v0 * (w1 * w2).sqrt(), 0.0),
            rho22: u2 * rho * u2.adjoint() * Complex64::new(w2, 0.0),
        }
    }

    /// The path-1 diagonal block ρ₁₁.
    pub fn rho11(&self) -> CMat2 {
        self.rho11
    }

    /// The coherence block ρ₁₂.
    pub fn rho12(&self) -> CMat2 {
        self.rho12
    }

    /// The path-2 diagonal block ρ₂₂.
    pub fn rho22(&self) -> CMat2 {
        self.rho22
    }

    /// Path-1 weight Tr ρ₁₁.
    pub fn w1(&self) -> f64 {
        self.rho11.trace().re
    }

    /// Path-2 weight Tr ρ₂₂.
    pub fn w2(&self) -> f64 {
        self.rho22.trace().re
    }

    /// The assembled 4×4 density matrix at readout phase φ, ordered as
    /// (path 1 ⊗ {H,V}, path 2 ⊗ {H,V}). The relative phase multiplies the
    /// coherence block.
    pub fn assembled(&self, phi: f64) -> Matrix4<Complex64> {
        let ph = Complex64::from_polar(1.0, phi);
        let b12 = self.rho12 * ph;
        let b21 = b12.adjoint();
        let mut m = Matrix4::zeros();
        for i in 0..2 {
            for j in 0..2 {
                m[(i, j)] = self.rho11[(i, j)];
                m[(i, j + 2)] = b12[(i, j)];
                m[(i + 2, j)] = b21[(i, j)];
                m[(i + 2, j + 2)] = self.rho22[(i, j)];
            }
        }
        m
    }
}

/// Builds the joint state; see [`JointState::build`].
pub fn build_joint(input: &PolState, config: &InterferometerConfig) -> JointState {
    JointState::build(input, config)
}

/// Detector intensity as a function of the readout phase:
/// I(φ) = w1 + w2 ± 2·Re(e^{iφ}·Tr ρ₁₂), with + for port 1. The two ports
/// sum to a φ-independent constant.
pub fn detector_intensity(joint: &JointState, phi: f64, port: DetectorPort) -> f64 {
    let coherence = joint.rho12.trace();
    let cross = 2.0 * (Complex64::from_polar(1.0, phi) * coherence).re;
    let mean = joint.w1() + joint.w2();
    match port {
        DetectorPort::D1 => mean + cross,
        DetectorPort::D2 => mean - cross,
    }
}

/// Sinusoidal fringe I(φ) = A + B·cos(φ − φ₀) of a detector port.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringeProfile {
    /// Mean intensity A ≥ 0.
    pub mean: f64,
    /// Fringe amplitude B, 0 ≤ B ≤ A.
    pub amplitude: f64,
    /// Phase offset φ₀ of the intensity maximum, in [0, 2π).
    pub phase_offset: f64,
}

impl FringeProfile {
    /// Fringe contrast (Max − Min)/(Max + Min) = B/A.
    pub fn visibility(&self) -> f64 {
        if self.mean <= 0.0 {
            0.0
        } else {
            self.amplitude / self.mean
        }
    }

    /// Intensity at readout phase `phi`.
    pub fn intensity(&self, phi: f64) -> f64 {
        self.mean + self.amplitude * (phi - self.phase_offset).cos()
    }
}

pub(crate) fn wrap_phase(phi: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let mut p = phi % tau;
    if p < 0.0 {
        p += tau;
    }
    // Turn -0.0 into +0.0 so formatted output has a single zero.
    p + 0.0
}

/// Closed-form fringe of a port: A = w1 + w2, B = 2|Tr ρ₁₂|, with the
/// maximum at φ₀ = −arg(Tr ρ₁₂) for port 1 and opposite for port 2. The
/// phase offset is 0 when the fringe amplitude vanishes.
pub fn fringe(joint: &JointState, port: DetectorPort) -> FringeProfile {
    let coherence = joint.rho12.trace();
    let mean = joint.w1() + joint.w2();
    let amplitude = 2.0 * coherence.norm();
    if amplitude <= f64::EPSILON * mean.max(1.0) {
        return FringeProfile {
            mean,
            amplitude: 0.0,
            phase_offset: 0.0,
        };
    }
    let phase_offset = match port {
        DetectorPort::D1 => wrap_phase(-coherence.arg()),
        DetectorPort::D2 => wrap_phase(-coherence.arg() + std::f64::consts::PI),
    };
    FringeProfile {
        mean,
        amplitude,
        phase_offset,
    }
}
