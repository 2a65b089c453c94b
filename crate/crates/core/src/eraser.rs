//! Conditional (post-selected) fringe analysis behind a polarization
//! analyzer: eraser scans, the zero-visibility angle formula, and the
//! Poincaré-sphere loci of zero and unit conditional visibility.
//!
//! Post-selecting on an analyzer state |a⟩ sorts the photons into
//! sub-ensembles. The sub-ensemble fringe has visibility
//! V_a = 2|⟨a|ρ₁₂|a⟩| / (⟨a|ρ₁₁|a⟩ + ⟨a|ρ₂₂|a⟩) and phase −arg⟨a|ρ₁₂|a⟩,
//! so fringes and anti-fringes (shifted by 180°) appear on the two
//! eigenmode analyzers of the internal element.

use num_complex::Complex64;

use crate::error::DualityError;
use crate::interferometer::{wrap_phase, DetectorPort, JointState};
use crate::metrics::AnalyzerSetting;
use crate::polarization::{CMat2, PolVector};
use crate::Result;

/// Visibility and fringe phase of one post-selected sub-ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalFringe {
    /// Conditional visibility V_a ∈ [0, 1].
    pub visibility: f64,
    /// Fringe phase in [0, 2π): readout phase of the intensity maximum.
    pub phase: f64,
    /// Fraction of the total intensity passing the analyzer.
    pub pass_weight: f64,
}

fn sandwich(block: &CMat2, a: &PolVector) -> Complex64 {
    let v = a.vector();
    (v.adjoint() * block * v)[(0, 0)]
}

/// Conditional fringe after analyzing along |a⟩. Errors when the analyzer
/// passes no light from either path, which leaves the visibility undefined
/// rather than zero.
pub fn conditional_fringe(
    joint: &JointState,
    analyzer: &AnalyzerSetting,
    port: DetectorPort,
) -> Result<ConditionalFringe> {
    let a = analyzer.lambda();
    let pass = sandwich(&joint.rho11(), &a).re + sandwich(&joint.rho22(), &a).re;
    let total = joint.w1() + joint.w2();
    if pass <= 1e-12 * total.max(1.0) {
        return Err(DualityError::AnalyzerBlocksAllLight);
    }
    let coherence = sandwich(&joint.rho12(), &a);
    let amplitude = 2.0 * coherence.norm();
    let phase = if amplitude <= f64::EPSILON * pass {
        0.0
    } else {
        match port {
            DetectorPort::D1 => wrap_phase(-coherence.arg()),
            DetectorPort::D2 => wrap_phase(-coherence.arg() + std::f64::consts::PI),
        }
    };
    Ok(ConditionalFringe {
        visibility: amplitude / pass,
        phase,
        pass_weight: pass / total,
    })
}

/// One point of an eraser scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EraserSample {
    /// Linear analyzer angle.
    pub analyzer_angle: f64,
    pub visibility: f64,
    pub phase: f64,
}

/// Conditional visibility and phase over a grid of linear analyzer angles.
#[derive(Debug, Clone, PartialEq)]
pub struct EraserCurve {
    pub samples: Vec<EraserSample>,
}

impl EraserCurve {
    /// The sample with the highest conditional visibility (first on ties).
    pub fn peak(&self) -> Option<&EraserSample> {
        self.samples
            .iter()
            .reduce(|best, s| if s.visibility > best.visibility { s } else { best })
    }
}

/// Evaluates the conditional fringe over linear analyzer angles.
pub fn eraser_scan(joint: &JointState, angles: &[f64], port: DetectorPort) -> Result<EraserCurve> {
    let samples = angles
        .iter()
        .map(|&angle| {
            conditional_fringe(joint, &AnalyzerSetting::linear(angle), port).map(|f| EraserSample {
                analyzer_angle: angle,
                visibility: f.visibility,
                phase: f.phase,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EraserCurve { samples })
}

/// The two linear analyzer angles of vanishing conditional visibility for a
/// half-wave-plate marker at `theta_hwp` acting on an input of fractional
/// purity `s`: θ ± ½·arccos(s·cos 2θ), reported modulo π (analyzer angles
/// are axis orientations).
pub fn zero_visibility_angles(theta_hwp: f64, s: f64) -> Result<[f64; 2]> {
    if !(0.0..=1.0).contains(&s) || !s.is_finite() {
        return Err(DualityError::InvalidPurity(s));
    }
    let half = 0.5 * (s * (2.0 * theta_hwp).cos()).acos();
    let pi = std::f64::consts::PI;
    Ok([
        (theta_hwp - half).rem_euclid(pi),
        (theta_hwp + half).rem_euclid(pi),
    ])
}

/// Which limiting input the loci are built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LociKind {
    /// Pure polarization input: two zero-visibility points, a unit-visibility
    /// great circle.
    PureInput,
    /// Completely mixed input: two unit-visibility points (the marker
    /// eigenmodes), a zero-visibility great circle.
    MixedInput,
}

/// Poincaré-sphere geometry of the quantum eraser.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisibilityLoci {
    pub kind: LociKind,
    /// For `PureInput`: the two zero-visibility points (analyzers passing
    /// light from only one path). For `MixedInput`: the two unit-visibility
    /// points (the eigenmodes of the net path-difference unitary).
    pub points: [[f64; 3]; 2],
    /// Unit normal of the complementary great circle: unit visibility for
    /// `PureInput`, zero visibility for `MixedInput`.
    pub circle_normal: [f64; 3],
}

impl VisibilityLoci {
    /// `n` evenly spaced Poincaré points on the complementary great circle.
    pub fn circle_samples(&self, n: usize) -> Vec<[f64; 3]> {
        let normal = self.circle_normal;
        // Any vector not parallel to the normal seeds the in-plane frame.
        let seed = if normal[0].abs() < 0.9 {
            [1.0, 0.0, 0.0]
        } else {
            [0.0, 1.0, 0.0]
        };
        let e1 = normalize(cross(&normal, &seed));
        let e2 = cross(&normal, &e1);
        (0..n)
            .map(|k| {
                let alpha = std::f64::consts::TAU * k as f64 / n as f64;
                let (sa, ca) = alpha.sin_cos();
                [
                    ca * e1[0] + sa * e2[0],
                    ca * e1[1] + sa * e2[1],
                    ca * e1[2] + sa * e2[2],
                ]
            })
            .collect()
    }
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

const PURITY_TOL: f64 = 1e-6;

/// Builds the visibility loci of a joint state.
///
/// The pure case takes the two analyzer states orthogonal to the per-path
/// polarizations (each passes light from only the other path) and the great
/// circle bisecting them, where both paths pass equally and erasure is
/// complete. The mixed case is reversed: the unit-visibility points are the
/// Poincaré images of the eigenvectors of the net path-difference unitary
/// U₁U₂† (recovered from the coherence block), and the equidistant great
/// circle carries zero visibility when that unitary is traceless.
pub fn poincare_loci(joint: &JointState, kind: LociKind) -> Result<VisibilityLoci> {
    let purity = purity_of_joint(joint);
    match kind {
        LociKind::PureInput => {
            if purity < 1.0 - PURITY_TOL {
                return Err(DualityError::PurityMismatch {
                    expected: "1 (pure input)",
                    found: purity,
                });
            }
            let p1 = principal_point(&joint.rho11());
            let p2 = principal_point(&joint.rho22());
            let zero1 = [-p1[0], -p1[1], -p1[2]];
            let zero2 = [-p2[0], -p2[1], -p2[2]];
            let diff = [zero1[0] - zero2[0], zero1[1] - zero2[1], zero1[2] - zero2[2]];
            let len = (diff[0] * diff[0] + diff[1] * diff[1] + diff[2] * diff[2]).sqrt();
            if len < 1e-9 {
                return Err(DualityError::DegenerateLoci);
            }
            Ok(VisibilityLoci {
                kind,
                points: [zero1, zero2],
                circle_normal: normalize(diff),
            })
        }
        LociKind::MixedInput => {
            if purity > PURITY_TOL {
                return Err(DualityError::PurityMismatch {
                    expected: "0 (completely mixed input)",
                    found: purity,
                });
            }
            // For a completely mixed input the coherence block is
            // proportional to U1·U2† with a real positive factor.
            let m = joint.rho12();
            let (v1, v2) = eigenvectors_2x2(&m)?;
            let p1 = v1.poincare_point();
            let p2 = v2.poincare_point();
            Ok(VisibilityLoci {
                kind,
                points: [p1, p2],
                // Eigenvectors of a unitary are orthogonal, so the points
                // are antipodal and the equidistant circle is normal to p1.
                circle_normal: p1,
            })
        }
    }
}

fn purity_of_joint(joint: &JointState) -> f64 {
    let w1 = joint.w1();
    let rho = joint.rho11() * Complex64::new(1.0 / w1, 0.0);
    let s = crate::polarization::PolState::new(rho)
        .map(|p| p.fractional_purity());
    s.unwrap_or_else(|_| {
        // Renormalized block may miss the strict tolerance; fall back to the
        // Bloch length computed directly.
        let x = (rho[(0, 1)] + rho[(1, 0)]).re;
        let y = (rho[(1, 0)] - rho[(0, 1)]).im;
        let z = (rho[(0, 0)] - rho[(1, 1)]).re;
        (x * x + y * y + z * z).sqrt()
    })
}

fn principal_point(block: &CMat2) -> [f64; 3] {
    let tr = block.trace().re;
    let rho = block * Complex64::new(1.0 / tr, 0.0);
    let x = (rho[(0, 1)] + rho[(1, 0)]).re;
    let y = (rho[(1, 0)] - rho[(0, 1)]).im;
    let z = (rho[(0, 0)] - rho[(1, 1)]).re;
    normalize([z, x, y])
}

/// Eigenvectors of a normal 2×2 matrix by the closed-form characteristic
/// roots. Errors when the matrix is (numerically) a multiple of the
/// identity, which carries no eigenmode geometry.
fn eigenvectors_2x2(m: &CMat2) -> Result<(PolVector, PolVector)> {
    let tr = m.trace();
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let disc = (tr * tr - det * Complex64::new(4.0, 0.0)).sqrt();
    if disc.norm() < 1e-9 * m.norm().max(1e-300) {
        return Err(DualityError::DegenerateLoci);
    }
    let l1 = (tr + disc) * Complex64::new(0.5, 0.0);
    let l2 = (tr - disc) * Complex64::new(0.5, 0.0);
    let vec_for = |l: Complex64| -> Result<PolVector> {
        let a = PolVector::new(m[(0, 1)], l - m[(0, 0)]);
        match a {
            Ok(v) => Ok(v),
            Err(_) => PolVector::new(l - m[(1, 1)], m[(1, 0)])
                .map_err(|_| DualityError::DegenerateLoci),
        }
    };
    Ok((vec_for(l1)?, vec_for(l2)?))
}
