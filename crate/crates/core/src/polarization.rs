//! Two-dimensional polarization algebra: Jones vectors, density matrices,
//! the Stokes/Poincaré representation, and standard optical-element unitaries.
//!
//! # Conventions
//!
//! These are fixed here once and used by every other module:
//!
//! - Jones vectors are (H, V) component pairs; |H⟩ = (1, 0), |V⟩ = (0, 1).
//! - Linear polarization angles are measured counter-clockwise from H, so
//!   `PolVector::linear(a)` = (cos a, sin a).
//! - Stokes axes: s1 = +1 for |H⟩, s2 = +1 for +45° linear, s3 = +1 for
//!   right circular, defined as (|H⟩ + i|V⟩)/√2.
//! - A half-wave plate with its axis at θ is the reflection
//!   `[[cos 2θ, sin 2θ], [sin 2θ, −cos 2θ]]`: traceless, Hermitian, and an
//!   involution. A quarter-wave plate at θ is `R(θ)·diag(1, i)·R(−θ)` with
//!   `R` the real rotation matrix. A rotator by δ is `R(δ)` itself.
//! - Angles are radians everywhere in this crate; degrees appear only at
//!   external interfaces.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

use crate::error::DualityError;
use crate::{Result, ALGEBRAIC_TOL};

/// 2×2 complex matrix used for operators on the polarization space.
pub type CMat2 = Matrix2<Complex64>;
/// Two-component complex (Jones) vector.
pub type CVec2 = Vector2<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// The Pauli-like operator basis matching the Stokes convention above:
/// `pauli()[0]` has |H⟩/|V⟩ eigenstates, `[1]` the ±45° states, `[2]` the
/// circular states.
pub(crate) fn pauli() -> [CMat2; 3] {
    [
        CMat2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)),
        CMat2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)),
        CMat2::new(c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)),
    ]
}

/// A normalized pure polarization state (Jones vector).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolVector {
    components: CVec2,
}

impl PolVector {
    /// Normalizes the given (H, V) amplitudes into a unit Jones vector.
    pub fn new(h: Complex64, v: Complex64) -> Result<Self> {
        let vec = CVec2::new(h, v);
        let norm = vec.norm();
        if norm <= f64::EPSILON {
            return Err(DualityError::ZeroNormVector);
        }
        Ok(Self {
            components: vec / c(norm, 0.0),
        })
    }

    /// Horizontal basis state |H⟩.
    pub fn horizontal() -> Self {
        Self {
            components: CVec2::new(c(1.0, 0.0), c(0.0, 0.0)),
        }
    }

    /// Vertical basis state |V⟩.
    pub fn vertical() -> Self {
        Self {
            components: CVec2::new(c(0.0, 0.0), c(1.0, 0.0)),
        }
    }

    /// Linear polarization at `angle` from horizontal.
    pub fn linear(angle: f64) -> Self {
        Self {
            components: CVec2::new(c(angle.cos(), 0.0), c(angle.sin(), 0.0)),
        }
    }

    /// Right-circular state (|H⟩ + i|V⟩)/√2, the s3 = +1 pole.
    pub fn right_circular() -> Self {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            components: CVec2::new(c(r, 0.0), c(0.0, r)),
        }
    }

    /// Left-circular state (|H⟩ − i|V⟩)/√2, the s3 = −1 pole.
    pub fn left_circular() -> Self {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            components: CVec2::new(c(r, 0.0), c(0.0, -r)),
        }
    }

    /// The pure state whose Poincaré point is the unit vector `n`.
    pub fn from_poincare(n: [f64; 3]) -> Self {
        if 1.0 + n[0] < 1e-12 {
            return Self::vertical();
        }
        let h = c(1.0 + n[0], 0.0);
        let v = c(n[1], n[2]);
        Self::new(h, v).expect("1 + n1 > 0 gives a nonzero vector")
    }

    /// The underlying (H, V) amplitudes.
    pub fn components(&self) -> (Complex64, Complex64) {
        (self.components[0], self.components[1])
    }

    pub(crate) fn vector(&self) -> CVec2 {
        self.components
    }

    /// Inner product ⟨self|other⟩.
    pub fn inner(&self, other: &PolVector) -> Complex64 {
        self.components.dotc(&other.components)
    }

    /// The orthogonal state; ⟨self|orthogonal⟩ = 0.
    pub fn orthogonal(&self) -> PolVector {
        let (h, v) = self.components();
        PolVector {
            components: CVec2::new(-v.conj(), h.conj()),
        }
    }

    /// Rank-1 projector |ψ⟩⟨ψ|.
    pub fn projector(&self) -> CMat2 {
        self.components * self.components.adjoint()
    }

    /// Poincaré-sphere point (s1, s2, s3) of this pure state; unit length.
    pub fn poincare_point(&self) -> [f64; 3] {
        let rho = self.projector();
        let sigma = pauli();
        [
            (rho * sigma[0]).trace().re,
            (rho * sigma[1]).trace().re,
            (rho * sigma[2]).trace().re,
        ]
    }
}

/// A polarization density matrix: 2×2 Hermitian, unit trace, positive
/// semidefinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolState {
    matrix: CMat2,
}

impl PolState {
    /// Validates and wraps a density matrix.
    pub fn new(matrix: CMat2) -> Result<Self> {
        let herm_dev = (matrix - matrix.adjoint()).norm();
        if herm_dev > ALGEBRAIC_TOL {
            return Err(DualityError::InvalidDensityMatrix("not Hermitian"));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > ALGEBRAIC_TOL || trace.im.abs() > ALGEBRAIC_TOL {
            return Err(DualityError::InvalidDensityMatrix("trace is not 1"));
        }
        // Eigenvalues of a Hermitian 2x2 with unit trace: (1 ± r) / 2 with
        // r the Bloch length, so positivity is r <= 1.
        let state = Self { matrix };
        let r = state.fractional_purity();
        if r > 1.0 + ALGEBRAIC_TOL {
            return Err(DualityError::InvalidDensityMatrix(
                "negative eigenvalue (Bloch length > 1)",
            ));
        }
        Ok(state)
    }

    /// Pure-state density matrix |ψ⟩⟨ψ|.
    pub fn from_pure(psi: &PolVector) -> Self {
        Self {
            matrix: psi.projector(),
        }
    }

    /// The completely mixed state I/2.
    pub fn completely_mixed() -> Self {
        Self {
            matrix: CMat2::identity() * c(0.5, 0.0),
        }
    }

    /// ρ = s·|ψ⟩⟨ψ| + (1−s)·I/2 for a fractional purity `s` in [0, 1].
    pub fn partial_mix(psi: &PolVector, s: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&s) || !s.is_finite() {
            return Err(DualityError::InvalidPurity(s));
        }
        let matrix = psi.projector() * c(s, 0.0) + CMat2::identity() * c((1.0 - s) / 2.0, 0.0);
        Ok(Self { matrix })
    }

    /// The phase-randomized recombination source: a linear input at
    /// `theta_in` split on a polarizing beam splitter and recombined with a
    /// rapidly varying phase, giving the incoherent mixture
    /// ρ = cos²θ·|H⟩⟨H| + sin²θ·|V⟩⟨V|.
    pub fn tunable_source(theta_in: f64) -> Self {
        let ch = theta_in.cos().powi(2);
        Self {
            matrix: CMat2::new(c(ch, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0 - ch, 0.0)),
        }
    }

    /// The underlying matrix.
    pub fn matrix(&self) -> CMat2 {
        self.matrix
    }

    /// Bloch/Poincaré vector (s1, s2, s3).
    pub fn bloch_vector(&self) -> [f64; 3] {
        let sigma = pauli();
        [
            (self.matrix * sigma[0]).trace().re,
            (self.matrix * sigma[1]).trace().re,
            (self.matrix * sigma[2]).trace().re,
        ]
    }

    /// Fractional purity s: the Bloch-vector length, which is the weight of
    /// the pure component in ρ = s|ψ⟩⟨ψ| + (1−s)·I/2. This is the degree of
    /// polarization, distinct from the trace purity.
    pub fn fractional_purity(&self) -> f64 {
        let [s1, s2, s3] = self.bloch_vector();
        (s1 * s1 + s2 * s2 + s3 * s3).sqrt()
    }

    /// Trace purity Tr(ρ²) = (1 + s²)/2.
    pub fn trace_purity(&self) -> f64 {
        (self.matrix * self.matrix).trace().re
    }

    /// Stokes view of the state.
    pub fn to_stokes(&self) -> StokesVector {
        let [s1, s2, s3] = self.bloch_vector();
        StokesVector { s1, s2, s3 }
    }

    /// Builds the state ρ = (I + s1σ1 + s2σ2 + s3σ3)/2 from Stokes
    /// parameters. Rejects over-polarized (unphysical) inputs.
    pub fn from_stokes(s: &StokesVector) -> Result<Self> {
        let r2 = s.s1 * s.s1 + s.s2 * s.s2 + s.s3 * s.s3;
        if r2 > 1.0 + 1e-9 {
            return Err(DualityError::UnphysicalStokes { r_squared: r2 });
        }
        let sigma = pauli();
        let matrix = (CMat2::identity()
            + sigma[0] * c(s.s1, 0.0)
            + sigma[1] * c(s.s2, 0.0)
            + sigma[2] * c(s.s3, 0.0))
            * c(0.5, 0.0);
        Ok(Self { matrix })
    }

    /// ρ → UρU†.
    pub fn evolved(&self, element: &ElementUnitary) -> PolState {
        let u = element.matrix();
        PolState {
            matrix: u * self.matrix * u.adjoint(),
        }
    }

    /// The eigenvector for the larger eigenvalue (any unit eigenvector when
    /// the state is completely mixed).
    pub fn principal_eigenvector(&self) -> PolVector {
        let [s1, s2, s3] = self.bloch_vector();
        let r = (s1 * s1 + s2 * s2 + s3 * s3).sqrt();
        if r <= f64::EPSILON {
            return PolVector::horizontal();
        }
        PolVector::from_poincare([s1 / r, s2 / r, s3 / r])
    }
}

/// Stokes parameters normalized to s0 = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesVector {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

impl StokesVector {
    /// Normalizes raw Stokes parameters by their intensity s0.
    pub fn new(s0: f64, s1: f64, s2: f64, s3: f64) -> Result<Self> {
        if s0 <= 0.0 || !s0.is_finite() {
            return Err(DualityError::UnphysicalStokes { r_squared: f64::NAN });
        }
        Ok(Self {
            s1: s1 / s0,
            s2: s2 / s0,
            s3: s3 / s0,
        })
    }

    /// The normalized intensity component; always 1 by construction.
    pub fn s0(&self) -> f64 {
        1.0
    }

    /// Degree of polarization √(s1² + s2² + s3²).
    pub fn degree_of_polarization(&self) -> f64 {
        (self.s1 * self.s1 + self.s2 * self.s2 + self.s3 * self.s3).sqrt()
    }

    /// The (s1, s2, s3) point.
    pub fn point(&self) -> [f64; 3] {
        [self.s1, self.s2, self.s3]
    }
}

/// Which standard element a unitary was built as.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementKind {
    Hwp,
    Qwp,
    Rotator,
    Custom,
}

/// A 2×2 unitary acting on the polarization space, tagged with the element
/// kind and its angle parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementUnitary {
    matrix: CMat2,
    kind: ElementKind,
    parameter: f64,
}

impl ElementUnitary {
    /// Half-wave plate with its optic axis at `theta`: reflects linear
    /// polarization about the axis, taking linear polarization at α to
    /// 2θ − α (up to global phase).
    pub fn hwp(theta: f64) -> Self {
        let (s, cth) = (2.0 * theta).sin_cos();
        Self {
            matrix: CMat2::new(c(cth, 0.0), c(s, 0.0), c(s, 0.0), c(-cth, 0.0)),
            kind: ElementKind::Hwp,
            parameter: theta,
        }
    }

    /// Quarter-wave plate with its fast axis at `theta`:
    /// R(θ)·diag(1, i)·R(−θ).
    pub fn qwp(theta: f64) -> Self {
        let (s, cth) = theta.sin_cos();
        let (cc, ss, sc) = (cth * cth, s * s, s * cth);
        let matrix = CMat2::new(
            c(cc, ss),
            c(sc, -sc),
            c(sc, -sc),
            c(ss, cc),
        );
        Self {
            matrix,
            kind: ElementKind::Qwp,
            parameter: theta,
        }
    }

    /// Optical-activity rotator by `delta`: the real rotation matrix, with
    /// circular eigenmodes.
    pub fn rotator(delta: f64) -> Self {
        let (s, cd) = delta.sin_cos();
        Self {
            matrix: CMat2::new(c(cd, 0.0), c(-s, 0.0), c(s, 0.0), c(cd, 0.0)),
            kind: ElementKind::Rotator,
            parameter: delta,
        }
    }

    /// The identity element.
    pub fn identity() -> Self {
        Self {
            matrix: CMat2::identity(),
            kind: ElementKind::Custom,
            parameter: 0.0,
        }
    }

    /// Wraps an arbitrary matrix, validating unitarity.
    pub fn custom(matrix: CMat2) -> Result<Self> {
        let deviation = (matrix * matrix.adjoint() - CMat2::identity()).norm();
        if deviation > ALGEBRAIC_TOL {
            return Err(DualityError::NotUnitary { deviation });
        }
        Ok(Self {
            matrix,
            kind: ElementKind::Custom,
            parameter: 0.0,
        })
    }

    /// The element applied after `first` (matrix product self·first).
    pub fn after(&self, first: &ElementUnitary) -> ElementUnitary {
        ElementUnitary {
            matrix: self.matrix * first.matrix,
            kind: ElementKind::Custom,
            parameter: 0.0,
        }
    }

    pub fn matrix(&self) -> CMat2 {
        self.matrix
    }

    pub fn kind(&self) -> ElementKind {
        self.kind
    }

    /// The construction angle in radians (0 for custom elements).
    pub fn parameter(&self) -> f64 {
        self.parameter
    }

    /// Applies the element to a pure state.
    pub fn apply(&self, psi: &PolVector) -> PolVector {
        let out = self.matrix * psi.vector();
        PolVector::new(out[0], out[1]).expect("unitary preserves the norm")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const DEG: f64 = std::f64::consts::PI / 180.0;

    fn overlap(a: &PolVector, b: &PolVector) -> f64 {
        a.inner(b).norm()
    }

    #[test]
    fn hwp_at_zero_fixes_vertical() {
        let out = ElementUnitary::hwp(0.0).apply(&PolVector::vertical());
        assert_abs_diff_eq!(overlap(&out, &PolVector::vertical()), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn hwp_at_45_deg_maps_vertical_to_horizontal() {
        let out = ElementUnitary::hwp(45.0 * DEG).apply(&PolVector::vertical());
        assert_abs_diff_eq!(
            overlap(&out, &PolVector::horizontal()),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn hwp_at_10_deg_rotates_vertical_by_20_deg() {
        // Reflection about the 10° axis takes the 90° line to the −70° ≡ 110°
        // line: 20° away from vertical.
        let out = ElementUnitary::hwp(10.0 * DEG).apply(&PolVector::vertical());
        assert_abs_diff_eq!(
            overlap(&out, &PolVector::linear(110.0 * DEG)),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn hwp_is_traceless() {
        for k in 0..360 {
            let theta = f64::from(k) * DEG;
            assert!(ElementUnitary::hwp(theta).matrix().trace().norm() < 1e-12);
        }
    }

    #[test]
    fn qwp_at_zero_fixes_horizontal() {
        let out = ElementUnitary::qwp(0.0).apply(&PolVector::horizontal());
        assert_abs_diff_eq!(
            overlap(&out, &PolVector::horizontal()),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn qwp_at_45_deg_makes_circular_from_horizontal() {
        let out = ElementUnitary::qwp(45.0 * DEG).apply(&PolVector::horizontal());
        let s3 = out.poincare_point()[2];
        assert_abs_diff_eq!(s3.abs(), 1.0, epsilon = 1e-12);
    }

    /// Numeric two-parameter search: a QWP followed by a HWP reaches every
    /// analysis state on the sphere from |H⟩.
    #[test]
    fn qwp_hwp_pair_reaches_any_basis() {
        let targets = fibonacci_sphere(20);
        for n in targets {
            let target = PolVector::from_poincare(n);
            let infidelity = |q: f64, h: f64| {
                let state = ElementUnitary::hwp(h).apply(&ElementUnitary::qwp(q).apply(
                    &PolVector::horizontal(),
                ));
                1.0 - overlap(&state, &target).powi(2)
            };
            let mut best = (f64::INFINITY, 0.0, 0.0);
            for i in 0..36 {
                for j in 0..36 {
                    let (q, h) = (f64::from(i) * 5.0 * DEG, f64::from(j) * 5.0 * DEG);
                    let v = infidelity(q, h);
                    if v < best.0 {
                        best = (v, q, h);
                    }
                }
            }
            let (mut q, mut h) = (best.1, best.2);
            let mut step = 5.0 * DEG;
            let mut val = best.0;
            while step > 1e-10 {
                let mut moved = false;
                for (dq, dh) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
                    let v = infidelity(q + dq, h + dh);
                    if v < val {
                        val = v;
                        q += dq;
                        h += dh;
                        moved = true;
                    }
                }
                if !moved {
                    step *= 0.5;
                }
            }
            assert!(val < 1e-9, "target {n:?} unreachable, best infidelity {val:.2e}");
        }
    }

    fn fibonacci_sphere(n: usize) -> Vec<[f64; 3]> {
        let golden = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
        (0..n)
            .map(|i| {
                let y = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
                let r = (1.0 - y * y).sqrt();
                let phi = golden * i as f64;
                [r * phi.cos(), y, r * phi.sin()]
            })
            .collect()
    }

    #[test]
    fn rotator_at_zero_is_identity() {
        let m = ElementUnitary::rotator(0.0).matrix();
        assert!((m - CMat2::identity()).norm() < 1e-15);
    }

    #[test]
    fn rotator_by_90_deg_maps_horizontal_to_vertical() {
        let out = ElementUnitary::rotator(90.0 * DEG).apply(&PolVector::horizontal());
        assert_abs_diff_eq!(overlap(&out, &PolVector::vertical()), 1.0, epsilon = 1e-12);
    }

    /// Eigen-decomposition oracle: solve the characteristic polynomial of
    /// rotator(45°) by hand and check the eigenvectors are the circular poles.
    #[test]
    fn rotator_eigenvectors_are_circular() {
        let m = ElementUnitary::rotator(45.0 * DEG).matrix();
        let tr = m.trace();
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        let disc = (tr * tr - det * c(4.0, 0.0)).sqrt();
        for lambda in [(tr + disc) * c(0.5, 0.0), (tr - disc) * c(0.5, 0.0)] {
            let v = PolVector::new(m[(0, 1)], lambda - m[(0, 0)]).unwrap();
            let mv = m * v.vector();
            let lv = v.vector() * lambda;
            assert!((mv - lv).norm() < 1e-12);
            assert_abs_diff_eq!(v.poincare_point()[2].abs(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn completely_mixed_has_zero_stokes() {
        let s = PolState::completely_mixed().to_stokes();
        assert_eq!(s.point(), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn vertical_has_s1_minus_one() {
        let s = PolState::from_pure(&PolVector::vertical()).to_stokes();
        assert_abs_diff_eq!(s.s1, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.s2, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.s3, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn residual_polarization_of_4_percent() {
        let s = StokesVector {
            s1: 0.04,
            s2: 0.0,
            s3: 0.0,
        };
        let rho = PolState::from_stokes(&s).unwrap();
        assert_abs_diff_eq!(rho.to_stokes().degree_of_polarization(), 0.04, epsilon = 1e-12);
        assert_abs_diff_eq!(rho.fractional_purity(), 0.04, epsilon = 1e-12);
    }

    #[test]
    fn from_stokes_rejects_overpolarized() {
        let s = StokesVector {
            s1: 1.0,
            s2: 0.1,
            s3: 0.0,
        };
        assert!(matches!(
            PolState::from_stokes(&s),
            Err(DualityError::UnphysicalStokes { .. })
        ));
    }

    #[test]
    fn purity_of_diag_one_sixth_five_sixths() {
        let m = CMat2::new(
            c(1.0 / 6.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(5.0 / 6.0, 0.0),
        );
        let rho = PolState::new(m).unwrap();
        assert_abs_diff_eq!(rho.fractional_purity(), 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rho.trace_purity(), 13.0 / 18.0, epsilon = 1e-12);
    }

    #[test]
    fn purity_limits() {
        assert_abs_diff_eq!(
            PolState::completely_mixed().fractional_purity(),
            0.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            PolState::completely_mixed().trace_purity(),
            0.5,
            epsilon = 1e-15
        );
        let pure = PolState::from_pure(&PolVector::linear(0.3));
        assert_abs_diff_eq!(pure.fractional_purity(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pure.trace_purity(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn partial_mix_endpoints() {
        let psi = PolVector::vertical();
        let pure = PolState::partial_mix(&psi, 1.0).unwrap();
        assert!((pure.matrix() - psi.projector()).norm() < 1e-15);
        let mixed = PolState::partial_mix(&psi, 0.0).unwrap();
        assert!((mixed.matrix() - PolState::completely_mixed().matrix()).norm() < 1e-15);
        let partial = PolState::partial_mix(&psi, 0.65).unwrap();
        assert_abs_diff_eq!(partial.fractional_purity(), 0.65, epsilon = 1e-12);
        assert!(PolState::partial_mix(&psi, 1.2).is_err());
        assert!(PolState::partial_mix(&psi, -0.1).is_err());
    }

    #[test]
    fn tunable_source_cases() {
        let mixed = PolState::tunable_source(45.0 * DEG);
        assert!((mixed.matrix() - PolState::completely_mixed().matrix()).norm() < 1e-12);
        let pure_h = PolState::tunable_source(0.0);
        assert!((pure_h.matrix() - PolVector::horizontal().projector()).norm() < 1e-15);
        // 5:1 vertical-to-horizontal intensity ratio.
        let theta = (5.0_f64 / 6.0).sqrt().asin();
        let s = PolState::tunable_source(theta).fractional_purity();
        assert_abs_diff_eq!(s, 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn tunable_source_is_exactly_diagonal() {
        for k in 0..180 {
            let rho = PolState::tunable_source(f64::from(k) * DEG).matrix();
            assert_eq!(rho[(0, 1)], c(0.0, 0.0));
            assert_eq!(rho[(1, 0)], c(0.0, 0.0));
        }
    }

    #[test]
    fn unitarity_for_many_angles() {
        // 1000 deterministic pseudo-random angles.
        let mut x: u64 = 0x9E3779B97F4A7C15;
        for _ in 0..1000 {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let angle = (x >> 11) as f64 / (1u64 << 53) as f64 * 20.0 - 10.0;
            for u in [
                ElementUnitary::hwp(angle),
                ElementUnitary::qwp(angle),
                ElementUnitary::rotator(angle),
            ] {
                let dev = (u.matrix() * u.matrix().adjoint() - CMat2::identity()).norm();
                assert!(dev < 1e-12, "unitarity violated at angle {angle}: {dev:e}");
            }
        }
    }

    proptest! {
        #[test]
        fn hwp_is_an_involution(theta in -10.0_f64..10.0) {
            let u = ElementUnitary::hwp(theta).matrix();
            prop_assert!((u * u - CMat2::identity()).norm() < 1e-12);
        }

        #[test]
        fn conjugation_preserves_fractional_purity(
            theta in -10.0_f64..10.0,
            alpha in 0.0_f64..std::f64::consts::PI,
            s in 0.0_f64..1.0,
        ) {
            let rho = PolState::partial_mix(&PolVector::linear(alpha), s).unwrap();
            for u in [
                ElementUnitary::hwp(theta),
                ElementUnitary::qwp(theta),
                ElementUnitary::rotator(theta),
            ] {
                let evolved = rho.evolved(&u);
                prop_assert!((evolved.fractional_purity() - rho.fractional_purity()).abs() < 1e-12);
            }
        }

        #[test]
        fn stokes_round_trip(s1 in -0.6_f64..0.6, s2 in -0.6_f64..0.6, s3 in -0.5_f64..0.5) {
            let s = StokesVector { s1, s2, s3 };
            let rho = PolState::from_stokes(&s).unwrap();
            let back = rho.to_stokes();
            prop_assert!((back.s1 - s1).abs() < 1e-12);
            prop_assert!((back.s2 - s2).abs() < 1e-12);
            prop_assert!((back.s3 - s3).abs() < 1e-12);
            let again = PolState::from_stokes(&back).unwrap();
            prop_assert!((again.matrix() - rho.matrix()).norm() < 1e-12);
        }

        #[test]
        fn bloch_length_matches_stokes_norm(a in 0.0_f64..std::f64::consts::PI, s in 0.0_f64..1.0) {
            let rho = PolState::partial_mix(&PolVector::linear(a), s).unwrap();
            let stokes = rho.to_stokes();
            prop_assert!((stokes.degree_of_polarization() - rho.fractional_purity()).abs() < 1e-12);
        }

        #[test]
        fn orthogonal_is_orthogonal(a in 0.0_f64..std::f64::consts::PI, ph in 0.0_f64..std::f64::consts::TAU) {
            let psi = PolVector::new(c(a.cos(), 0.0), c(0.0, 0.0) + Complex64::from_polar(a.sin(), ph)).unwrap();
            prop_assert!(psi.inner(&psi.orthogonal()).norm() < 1e-12);
        }
    }
}
