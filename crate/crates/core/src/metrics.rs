//! Which-way metrics: likelihood, knowledge, distinguishability, the
//! duality quantities V²+K², and the CHSH correlation value.
//!
//! Knowledge is operational throughout: rates come from blocked-path
//! measurements in an analyzer basis, the betting strategy picks the path
//! that contributes most to the firing detector, and distinguishability is
//! the maximum of that knowledge over analyzer settings, found by a grid
//! search with local refinement rather than a closed form.

use nalgebra::{Matrix3, Matrix4, Vector3};
use num_complex::Complex64;

use crate::error::DualityError;
use crate::interferometer::{fringe, DetectorPort, JointState};
use crate::polarization::{pauli, CMat2, PolVector};
use crate::search::{refine_max4, sphere_max, unit_vector};
use crate::Result;

/// A polarization analysis basis: the state |λ⟩ sent to detector 1; the
/// orthogonal |λ⊥⟩ goes to detector 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyzerSetting {
    lambda: PolVector,
}

impl AnalyzerSetting {
    pub fn new(lambda: PolVector) -> Self {
        Self { lambda }
    }

    /// Linear analyzer at `angle` from horizontal.
    pub fn linear(angle: f64) -> Self {
        Self {
            lambda: PolVector::linear(angle),
        }
    }

    /// The fixed horizontal/vertical basis.
    pub fn horizontal_vertical() -> Self {
        Self::linear(0.0)
    }

    /// Analyzer at the given Poincaré-sphere point.
    pub fn from_poincare(n: [f64; 3]) -> Self {
        Self {
            lambda: PolVector::from_poincare(n),
        }
    }

    pub fn lambda(&self) -> PolVector {
        self.lambda
    }

    pub fn lambda_perp(&self) -> PolVector {
        self.lambda.orthogonal()
    }
}

/// Blocked-path count rates R(path i, polarization x) in an arbitrary
/// common unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathRates {
    pub r1_lambda: f64,
    pub r1_lambda_perp: f64,
    pub r2_lambda: f64,
    pub r2_lambda_perp: f64,
}

impl PathRates {
    pub fn total(&self) -> f64 {
        self.r1_lambda + self.r1_lambda_perp + self.r2_lambda + self.r2_lambda_perp
    }
}

fn expectation(block: &CMat2, state: &PolVector) -> f64 {
    let v = state.vector();
    (v.adjoint() * block * v)[(0, 0)].re
}

/// Single-path rates with the other path blocked: Riλ = ⟨λ|ρᵢᵢ|λ⟩ and
/// Riλ⊥ = ⟨λ⊥|ρᵢᵢ|λ⊥⟩. No interference term enters.
pub fn rates_in_basis(joint: &JointState, basis: &AnalyzerSetting) -> PathRates {
    let lambda = basis.lambda();
    let perp = basis.lambda_perp();
    PathRates {
        r1_lambda: expectation(&joint.rho11(), &lambda),
        r1_lambda_perp: expectation(&joint.rho11(), &perp),
        r2_lambda: expectation(&joint.rho22(), &lambda),
        r2_lambda_perp: expectation(&joint.rho22(), &perp),
    }
}

/// Likelihood of guessing the path correctly by betting, per detector
/// outcome, on the path contributing the larger rate:
/// L = (max{R1λ, R2λ} + max{R1λ⊥, R2λ⊥}) / ΣR. Ties resolve to path 1,
/// which leaves the value unchanged. Errors when all rates are zero.
pub fn likelihood(rates: &PathRates) -> Result<f64> {
    let total = rates.total();
    if total <= 0.0 {
        return Err(DualityError::NoCounts);
    }
    let pick = |r1: f64, r2: f64| if r1 >= r2 { r1 } else { r2 };
    Ok((pick(rates.r1_lambda, rates.r2_lambda) + pick(rates.r1_lambda_perp, rates.r2_lambda_perp))
        / total)
}

/// Which-way knowledge K = 2L − 1 extracted in the given basis.
pub fn knowledge(joint: &JointState, basis: &AnalyzerSetting) -> Result<f64> {
    Ok(2.0 * likelihood(&rates_in_basis(joint, basis))? - 1.0)
}

/// Optimal analysis basis when both paths carry linear polarizations, at
/// angles `phi1` and `phi2`: the linear analyzer at (φ1 + φ2)/2 + 45°.
/// Either representative of a polarization line gives the same basis pair.
pub fn optimal_linear_basis(phi1: f64, phi2: f64) -> AnalyzerSetting {
    AnalyzerSetting::linear(0.5 * (phi1 + phi2) + std::f64::consts::FRAC_PI_4)
}

/// Distinguishability D = max over analyzer settings of the knowledge,
/// together with the maximizing basis. Coarse 32×64 sphere grid with
/// compass refinement; deterministic regardless of evaluation order.
pub fn distinguishability(joint: &JointState) -> Result<(f64, AnalyzerSetting)> {
    if joint.w1() + joint.w2() <= 0.0 {
        return Err(DualityError::NoCounts);
    }
    let k_at = |theta: f64, phi: f64| {
        let basis = AnalyzerSetting::from_poincare(unit_vector(theta, phi));
        // Total rate is the full state weight, strictly positive here.
        knowledge(joint, &basis).expect("positive total rate")
    };
    let (value, theta, phi) = sphere_max(k_at, 32, 64);
    Ok((value, AnalyzerSetting::from_poincare(unit_vector(theta, phi))))
}

/// The duality quantities of a joint state.
#[derive(Debug, Clone, Copy)]
pub struct MetricsResult {
    /// Fringe visibility V of detector 1.
    pub visibility: f64,
    /// Likelihood in the optimal basis.
    pub likelihood: f64,
    /// Knowledge K = 2L − 1 in the optimal basis.
    pub knowledge: f64,
    /// A-priori predictability P = |w1 − w2|.
    pub predictability: f64,
    /// Distinguishability D = max over bases of K.
    pub distinguishability: f64,
    /// V² + K² with K taken in `basis_used`.
    pub duality_sum: f64,
    /// The basis achieving D.
    pub basis_used: AnalyzerSetting,
}

/// Computes V, L, K, P, D, and V²+K² with the knowledge maximized over
/// analyzer settings. For a symmetric interferometer with a traceless
/// (half-wave plate) marker and input fractional purity s, the sum obeys
/// V² + D² = s² = 2Tr(ρ²) − 1; for general elements only the inequality
/// V² + K² ≤ 1 is asserted.
pub fn duality_check(joint: &JointState) -> Result<MetricsResult> {
    let v = fringe(joint, DetectorPort::D1).visibility();
    let (d, basis_used) = distinguishability(joint)?;
    let k = knowledge(joint, &basis_used)?;
    Ok(MetricsResult {
        visibility: v,
        likelihood: 0.5 * (k + 1.0),
        knowledge: k,
        predictability: (joint.w1() - joint.w2()).abs(),
        distinguishability: d,
        duality_sum: v * v + k * k,
        basis_used,
    })
}

/// The 3×3 correlation matrix T, with entry (i, j) the expectation of the
/// i-th path observable times the j-th polarization observable in the
/// assembled state at readout phase 0.
pub fn correlation_matrix(joint: &JointState) -> Matrix3<f64> {
    let sigma = pauli();
    let state = joint.assembled(0.0);
    let mut t = Matrix3::zeros();
    for (i, sp) in sigma.iter().enumerate() {
        for (j, sq) in sigma.iter().enumerate() {
            let mut obs = Matrix4::<Complex64>::zeros();
            for a in 0..2 {
                for b in 0..2 {
                    for x in 0..2 {
                        for y in 0..2 {
                            obs[(a * 2 + x, b * 2 + y)] = sp[(a, b)] * sq[(x, y)];
                        }
                    }
                }
            }
            t[(i, j)] = (state * obs).trace().re;
        }
    }
    t
}

/// Maximal CHSH correlation S over dichotomic analyzer settings on the
/// path and polarization degrees of freedom.
///
/// For fixed path settings â, â′ the optimal polarization settings are
/// closed-form, S = ‖Tᵀ(â+â′)‖ + ‖Tᵀ(â−â′)‖, so the search runs over the
/// two path analyzers (two angles each) by coarse grid plus refinement.
/// Physical states satisfy S ≤ 2√2; product states satisfy S ≤ 2.
pub fn chsh_value(joint: &JointState) -> f64 {
    let t = correlation_matrix(joint);
    let objective = |angles: [f64; 4]| {
        let a = Vector3::from(unit_vector(angles[0], angles[1]));
        let ap = Vector3::from(unit_vector(angles[2], angles[3]));
        (t.transpose() * (a + ap)).norm() + (t.transpose() * (a - ap)).norm()
    };
    let pi = std::f64::consts::PI;
    let n_theta = 8;
    let n_phi = 16;
    let mut best = (f64::NEG_INFINITY, [0.0; 4]);
    for i1 in 0..=n_theta {
        for j1 in 0..n_phi {
            for i2 in 0..=n_theta {
                for j2 in 0..n_phi {
                    let angles = [
                        pi * i1 as f64 / n_theta as f64,
                        2.0 * pi * j1 as f64 / n_phi as f64,
                        pi * i2 as f64 / n_theta as f64,
                        2.0 * pi * j2 as f64 / n_phi as f64,
                    ];
                    let v = objective(angles);
                    if v > best.0 {
                        best = (v, angles);
                    }
                }
            }
        }
    }
    refine_max4(objective, best, pi / n_theta as f64).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interferometer::{build_joint, InterferometerConfig};
    use crate::polarization::{ElementUnitary, PolState};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const DEG: f64 = std::f64::consts::PI / 180.0;

    fn vertical_with_hwp(theta_deg: f64) -> JointState {
        build_joint(
            &PolState::from_pure(&PolVector::vertical()),
            &InterferometerConfig::ideal(ElementUnitary::hwp(theta_deg * DEG)),
        )
    }

    /// Trace-norm cross-check: for a Hermitian 2×2 difference Δ = ρ₁₁ − ρ₂₂,
    /// the betting maximum equals Tr|Δ| = Σ|eigenvalues|, computed here from
    /// the closed-form eigenvalues.
    fn trace_norm_distinguishability(joint: &JointState) -> f64 {
        let delta = joint.rho11() - joint.rho22();
        let tr = delta.trace().re;
        let det = (delta[(0, 0)] * delta[(1, 1)] - delta[(0, 1)] * delta[(1, 0)]).re;
        let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
        (tr / 2.0 + disc).abs() + (tr / 2.0 - disc).abs()
    }

    #[test]
    fn rates_for_maximal_entanglement() {
        let joint = vertical_with_hwp(45.0);
        let rates = rates_in_basis(&joint, &AnalyzerSetting::horizontal_vertical());
        assert_abs_diff_eq!(rates.r1_lambda, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(rates.r1_lambda_perp, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rates.r2_lambda, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rates.r2_lambda_perp, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn unmarked_paths_have_equal_rates() {
        let joint = build_joint(
            &PolState::partial_mix(&PolVector::linear(0.7), 0.4).unwrap(),
            &InterferometerConfig::default(),
        );
        for basis in [
            AnalyzerSetting::horizontal_vertical(),
            AnalyzerSetting::linear(0.9),
            AnalyzerSetting::from_poincare([0.0, 0.0, 1.0]),
        ] {
            let rates = rates_in_basis(&joint, &basis);
            assert_abs_diff_eq!(rates.r1_lambda, rates.r2_lambda, epsilon = 1e-12);
            assert_abs_diff_eq!(rates.r1_lambda_perp, rates.r2_lambda_perp, epsilon = 1e-12);
        }
    }

    #[test]
    fn optimal_rates_for_hwp_10_deg() {
        // Path polarizations at 110° and 90°; the optimal linear analyzer
        // sits at their mean plus 45°, and the likelihood is (1+sin 20°)/2.
        let joint = vertical_with_hwp(10.0);
        let basis = optimal_linear_basis(110.0 * DEG, 90.0 * DEG);
        let rates = rates_in_basis(&joint, &basis);
        let l = likelihood(&rates).unwrap();
        assert_abs_diff_eq!(l, 0.5 * (1.0 + (20.0 * DEG).sin()), epsilon = 1e-12);
    }

    #[test]
    fn likelihood_hand_cases() {
        let equal = PathRates {
            r1_lambda: 0.25,
            r1_lambda_perp: 0.25,
            r2_lambda: 0.25,
            r2_lambda_perp: 0.25,
        };
        assert_abs_diff_eq!(likelihood(&equal).unwrap(), 0.5, epsilon = 1e-15);

        let certain = PathRates {
            r1_lambda: 0.5,
            r1_lambda_perp: 0.0,
            r2_lambda: 0.0,
            r2_lambda_perp: 0.5,
        };
        assert_abs_diff_eq!(likelihood(&certain).unwrap(), 1.0, epsilon = 1e-15);

        let partial = PathRates {
            r1_lambda: 0.4,
            r1_lambda_perp: 0.1,
            r2_lambda: 0.1,
            r2_lambda_perp: 0.4,
        };
        assert_abs_diff_eq!(likelihood(&partial).unwrap(), 0.8, epsilon = 1e-15);

        let empty = PathRates {
            r1_lambda: 0.0,
            r1_lambda_perp: 0.0,
            r2_lambda: 0.0,
            r2_lambda_perp: 0.0,
        };
        assert!(matches!(likelihood(&empty), Err(DualityError::NoCounts)));
    }

    #[test]
    fn knowledge_endpoints() {
        let unmarked = vertical_with_hwp(0.0);
        for basis in [AnalyzerSetting::horizontal_vertical(), AnalyzerSetting::linear(0.5)] {
            assert_abs_diff_eq!(knowledge(&unmarked, &basis).unwrap(), 0.0, epsilon = 1e-12);
        }
        let marked = vertical_with_hwp(45.0);
        assert_abs_diff_eq!(
            knowledge(&marked, &AnalyzerSetting::horizontal_vertical()).unwrap(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn fixed_basis_underestimates_at_22_5_deg() {
        // Path-1 polarization sits on the −45° ≡ 135° line.
        let joint = vertical_with_hwp(22.5);
        let k_hv = knowledge(&joint, &AnalyzerSetting::horizontal_vertical()).unwrap();
        let basis_opt = optimal_linear_basis(135.0 * DEG, 90.0 * DEG);
        let k_opt = knowledge(&joint, &basis_opt).unwrap();
        assert_abs_diff_eq!(k_opt, (45.0 * DEG).sin(), epsilon = 1e-12);
        assert!(k_opt - k_hv > 0.2, "H/V basis should be suboptimal here");
    }

    #[test]
    fn optimal_linear_basis_orthogonal_case() {
        // Orthogonal path polarizations: the 45°/135° basis extracts the
        // same perfect knowledge as H/V.
        let joint = vertical_with_hwp(45.0);
        let basis = optimal_linear_basis(0.0, 90.0 * DEG);
        assert_abs_diff_eq!(knowledge(&joint, &basis).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn optimal_linear_basis_equal_paths() {
        let joint = vertical_with_hwp(0.0);
        let basis = optimal_linear_basis(90.0 * DEG, 90.0 * DEG);
        assert_abs_diff_eq!(knowledge(&joint, &basis).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn distinguishability_is_sin_2theta_for_pure_input() {
        for theta_deg in [0.0, 10.0, 22.5, 30.0, 45.0, 60.0, 77.0, 90.0] {
            let joint = vertical_with_hwp(theta_deg);
            let (d, basis) = distinguishability(&joint).unwrap();
            let expected = (2.0 * theta_deg * DEG).sin().abs();
            assert_abs_diff_eq!(d, expected, epsilon = 1e-9);
            assert_abs_diff_eq!(d, trace_norm_distinguishability(&joint), epsilon = 1e-9);
            assert_abs_diff_eq!(knowledge(&joint, &basis).unwrap(), d, epsilon = 1e-12);
        }
    }

    #[test]
    fn distinguishability_vanishes_for_mixed_input() {
        for theta_deg in [10.0, 45.0, 70.0] {
            let joint = build_joint(
                &PolState::completely_mixed(),
                &InterferometerConfig::ideal(ElementUnitary::hwp(theta_deg * DEG)),
            );
            let (d, _) = distinguishability(&joint).unwrap();
            assert_abs_diff_eq!(d, 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn distinguishability_scales_with_purity() {
        for s in [0.2, 0.65, 0.9] {
            let input = PolState::partial_mix(&PolVector::vertical(), s).unwrap();
            for theta_deg in [10.0, 22.5, 40.0] {
                let joint = build_joint(
                    &input,
                    &InterferometerConfig::ideal(ElementUnitary::hwp(theta_deg * DEG)),
                );
                let (d, _) = distinguishability(&joint).unwrap();
                assert_abs_diff_eq!(d, s * (2.0 * theta_deg * DEG).sin().abs(), epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn duality_check_cases() {
        let pure = duality_check(&vertical_with_hwp(30.0)).unwrap();
        assert_abs_diff_eq!(pure.duality_sum, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(pure.predictability, 0.0, epsilon = 1e-12);

        let mixed = duality_check(&build_joint(
            &PolState::completely_mixed(),
            &InterferometerConfig::ideal(ElementUnitary::hwp(45.0 * DEG)),
        ))
        .unwrap();
        assert_abs_diff_eq!(mixed.duality_sum, 0.0, epsilon = 1e-9);

        let s = 0.65;
        let partial = duality_check(&build_joint(
            &PolState::partial_mix(&PolVector::vertical(), s).unwrap(),
            &InterferometerConfig::ideal(ElementUnitary::hwp(25.0 * DEG)),
        ))
        .unwrap();
        assert_abs_diff_eq!(partial.duality_sum, 0.4225, epsilon = 1e-6);
        let input = PolState::partial_mix(&PolVector::vertical(), s).unwrap();
        assert_abs_diff_eq!(
            partial.duality_sum,
            2.0 * input.trace_purity() - 1.0,
            epsilon = 1e-6
        );
    }

    #[test]
    fn robustness_at_l_999() {
        // Ideal pure marking at L = 0.999: the fringe visibility floor is
        // √(1 − K²) ≈ 6.3%, comfortably above 4.4%.
        let k: f64 = 2.0 * 0.999 - 1.0;
        let v = (1.0 - k * k).sqrt();
        assert!(v >= 0.044);
        assert_abs_diff_eq!(v, 0.0632, epsilon = 5e-5);
    }

    #[test]
    fn chsh_reaches_tsirelson_for_maximal_entanglement() {
        let joint = vertical_with_hwp(45.0);
        let s = chsh_value(&joint);
        assert_abs_diff_eq!(s, 2.0 * std::f64::consts::SQRT_2, epsilon = 1e-6);
        // Known-good settings give the same value: path analyzers along the
        // correlation-matrix axes, polarization analyzers halfway.
        let t = correlation_matrix(&joint);
        let a = Vector3::new(1.0, 0.0, 0.0);
        let ap = Vector3::new(0.0, 1.0, 0.0);
        let by_hand = (t.transpose() * (a + ap)).norm() + (t.transpose() * (a - ap)).norm();
        assert_abs_diff_eq!(s, by_hand, epsilon = 1e-6);
    }

    #[test]
    fn chsh_within_classical_bound_for_product_states() {
        for joint in [
            vertical_with_hwp(0.0),
            build_joint(
                &PolState::completely_mixed(),
                &InterferometerConfig::ideal(ElementUnitary::hwp(45.0 * DEG)),
            ),
            build_joint(
                &PolState::completely_mixed(),
                &InterferometerConfig::default(),
            ),
        ] {
            let s = chsh_value(&joint);
            assert!(s <= 2.0 + 1e-9, "separable state exceeded 2: {s}");
        }
    }

    /// Independent algebraic route: the maximal CHSH value equals
    /// 2√(t1² + t2²) with t1, t2 the two largest singular values of T.
    #[test]
    fn chsh_matches_singular_value_oracle() {
        let cases = [
            vertical_with_hwp(45.0),
            vertical_with_hwp(20.0),
            vertical_with_hwp(5.0),
            build_joint(
                &PolState::partial_mix(&PolVector::linear(0.3), 0.6).unwrap(),
                &InterferometerConfig::ideal(ElementUnitary::qwp(0.8)),
            ),
            build_joint(
                &PolState::partial_mix(&PolVector::vertical(), 0.65).unwrap(),
                &InterferometerConfig::ideal(ElementUnitary::hwp(22.5 * DEG)),
            ),
        ];
        for joint in cases {
            let t = correlation_matrix(&joint);
            let mut sv: Vec<f64> = t.svd(false, false).singular_values.iter().copied().collect();
            sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let oracle = 2.0 * (sv[0] * sv[0] + sv[1] * sv[1]).sqrt();
            assert_abs_diff_eq!(chsh_value(&joint), oracle, epsilon = 1e-6);
        }
    }

    #[test]
    fn chsh_never_exceeds_tsirelson() {
        for theta_deg in [0.0, 15.0, 30.0, 45.0, 60.0, 85.0] {
            for s in [0.0, 0.5, 1.0] {
                let joint = build_joint(
                    &PolState::partial_mix(&PolVector::vertical(), s).unwrap(),
                    &InterferometerConfig::ideal(ElementUnitary::hwp(theta_deg * DEG)),
                );
                assert!(chsh_value(&joint) <= 2.0 * std::f64::consts::SQRT_2 + 1e-9);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// Knowledge in any fixed basis never exceeds the distinguishability.
        #[test]
        fn knowledge_bounded_by_distinguishability(
            theta in 0.0_f64..1.5,
            s in 0.0_f64..1.0,
            bt in 0.0_f64..std::f64::consts::PI,
            bp in 0.0_f64..std::f64::consts::TAU,
        ) {
            let joint = build_joint(
                &PolState::partial_mix(&PolVector::vertical(), s).unwrap(),
                &InterferometerConfig::ideal(ElementUnitary::hwp(theta)),
            );
            let basis = AnalyzerSetting::from_poincare(unit_vector(bt, bp));
            let k = knowledge(&joint, &basis).unwrap();
            let (d, _) = distinguishability(&joint).unwrap();
            prop_assert!(k <= d + 1e-9);
        }

        /// Likelihood is invariant under uniform rescaling of the rates.
        #[test]
        fn likelihood_scale_invariance(
            r1 in 0.0_f64..1.0, r2 in 0.0_f64..1.0,
            r3 in 0.0_f64..1.0, r4 in 0.001_f64..1.0,
            scale in 0.001_f64..1000.0,
        ) {
            let rates = PathRates { r1_lambda: r1, r1_lambda_perp: r2, r2_lambda: r3, r2_lambda_perp: r4 };
            let scaled = PathRates {
                r1_lambda: r1 * scale,
                r1_lambda_perp: r2 * scale,
                r2_lambda: r3 * scale,
                r2_lambda_perp: r4 * scale,
            };
            prop_assert!((likelihood(&rates).unwrap() - likelihood(&scaled).unwrap()).abs() < 1e-12);
        }

        /// Swapping |λ⟩ and |λ⊥⟩ leaves the likelihood unchanged.
        #[test]
        fn likelihood_swap_symmetry(theta in 0.0_f64..1.5, a in 0.0_f64..std::f64::consts::PI) {
            let joint = build_joint(
                &PolState::from_pure(&PolVector::vertical()),
                &InterferometerConfig::ideal(ElementUnitary::hwp(theta)),
            );
            let basis = AnalyzerSetting::linear(a);
            let swapped = AnalyzerSetting::new(basis.lambda_perp());
            let l1 = likelihood(&rates_in_basis(&joint, &basis)).unwrap();
            let l2 = likelihood(&rates_in_basis(&joint, &swapped)).unwrap();
            prop_assert!((l1 - l2).abs() < 1e-12);
        }
    }
}
