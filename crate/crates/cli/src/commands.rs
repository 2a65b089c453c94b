//! The five table-producing commands.

use anyhow::{anyhow, bail, Result};
use sha2::{Digest, Sha256};

use duality_core::eraser::{conditional_fringe, poincare_loci, zero_visibility_angles, LociKind};
use duality_core::interferometer::{build_joint, fringe, DetectorPort, JointState};
use duality_core::metrics::{distinguishability, knowledge, AnalyzerSetting};
use duality_core::montecarlo::{run_duality_experiment, DualityScenario, NoiseModel};
use duality_core::polarization::ElementUnitary;

use crate::config::{Scenario, SweepAxis, DEG};
use crate::table::OutputTable;

const VERSION: &str = env!("CARGO_PKG_VERSION");

fn config_hash(scenario: &Scenario) -> String {
    let mut hasher = Sha256::new();
    hasher.update(scenario.canonical.as_bytes());
    if let Some(seed) = scenario.seed {
        hasher.update(seed.to_le_bytes());
    }
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn standard_metadata(table: &mut OutputTable, command: &str, scenario: &Scenario) {
    table.meta("tool", format!("duality {VERSION}"));
    table.meta("command", command);
    table.meta("config_hash", config_hash(scenario));
    if let Some(seed) = scenario.seed {
        table.meta("seed", seed.to_string());
    }
}

fn joint_at_theta(scenario: &Scenario, theta: f64) -> JointState {
    let mut config = scenario.base_config;
    config.path1_element = ElementUnitary::hwp(theta);
    build_joint(&scenario.input, &config)
}

fn require_axis(scenario: &Scenario, axis: SweepAxis, command: &str, expected: &str) -> Result<()> {
    if scenario.sweep.axis != axis {
        bail!("{command} requires sweep.axis = \"{expected}\"");
    }
    Ok(())
}

/// Marker-angle sweep of V, K in the fixed H/V basis, K in the optimal
/// basis, and V²+K² (optimal).
pub fn duality_scan(scenario: &Scenario) -> Result<OutputTable> {
    require_axis(scenario, SweepAxis::Hwp, "duality-scan", "hwp")?;
    let mut table = OutputTable::new(&[
        "theta_hwp_deg",
        "visibility",
        "knowledge_hv",
        "knowledge_optimal",
        "duality_sum_optimal",
    ]);
    standard_metadata(&mut table, "duality-scan", scenario);
    let hv = AnalyzerSetting::horizontal_vertical();
    for &theta_deg in &scenario.sweep.values {
        let joint = joint_at_theta(scenario, theta_deg * DEG);
        let v = fringe(&joint, DetectorPort::D1).visibility();
        let k_hv = knowledge(&joint, &hv)?;
        let (_, basis) = distinguishability(&joint)?;
        let k_opt = knowledge(&joint, &basis)?;
        table.push_numeric(&[theta_deg, v, k_hv, k_opt, v * v + k_opt * k_opt])?;
    }
    Ok(table)
}

/// Purity or marker-angle sweep with the duality sum and the state-purity
/// law 2Tr(ρ²) − 1 on every row.
pub fn mixed_scan(scenario: &Scenario) -> Result<OutputTable> {
    let mut table = OutputTable::new(&[
        "purity_s",
        "theta_hwp_deg",
        "visibility",
        "knowledge_optimal",
        "duality_sum",
        "two_tr_rho2_minus_1",
    ]);
    standard_metadata(&mut table, "mixed-scan", scenario);
    match scenario.sweep.axis {
        SweepAxis::Purity => {
            let theta_deg = scenario.marker_angle / DEG;
            for &s in &scenario.sweep.values {
                let input = duality_core::polarization::PolState::partial_mix(
                    &duality_core::polarization::PolVector::linear(scenario.pure_axis),
                    s,
                )
                .map_err(|e| anyhow!("sweep purity value {s}: {e}"))?;
                let joint = build_joint(&input, &scenario.base_config);
                push_mixed_row(&mut table, &joint, s, theta_deg, &input)?;
            }
        }
        SweepAxis::Hwp => {
            let s = scenario.input_purity;
            for &theta_deg in &scenario.sweep.values {
                let joint = joint_at_theta(scenario, theta_deg * DEG);
                push_mixed_row(&mut table, &joint, s, theta_deg, &scenario.input)?;
            }
        }
        _ => bail!("mixed-scan requires sweep.axis = \"purity\" or \"hwp\""),
    }
    Ok(table)
}

fn push_mixed_row(
    table: &mut OutputTable,
    joint: &JointState,
    s: f64,
    theta_deg: f64,
    input: &duality_core::polarization::PolState,
) -> Result<()> {
    let v = fringe(joint, DetectorPort::D1).visibility();
    let (_, basis) = distinguishability(joint)?;
    let k = knowledge(joint, &basis)?;
    let law = 2.0 * input.trace_purity() - 1.0;
    table.push_numeric(&[s, theta_deg, v, k, v * v + k * k, law])
}

/// Linear-analyzer sweep of the conditional fringe; the zero-visibility
/// angles of a half-wave-plate marker go into the metadata block.
pub fn eraser_scan(scenario: &Scenario) -> Result<OutputTable> {
    require_axis(scenario, SweepAxis::Analyzer, "eraser-scan", "analyzer")?;
    let mut table = OutputTable::new(&["analyzer_deg", "conditional_visibility", "fringe_phase_deg"]);
    standard_metadata(&mut table, "eraser-scan", scenario);
    if scenario.marker_kind == "hwp" {
        let zeros = zero_visibility_angles(scenario.marker_angle, scenario.input_purity)
            .map_err(|e| anyhow!("zero-visibility angles: {e}"))?;
        table.meta(
            "zero_visibility_deg",
            format!("{:.6}, {:.6}", zeros[0] / DEG, zeros[1] / DEG),
        );
    }
    let joint = build_joint(&scenario.input, &scenario.base_config);
    for &angle_deg in &scenario.sweep.values {
        let f = conditional_fringe(
            &joint,
            &AnalyzerSetting::linear(angle_deg * DEG),
            DetectorPort::D1,
        )
        .map_err(|e| anyhow!("analyzer at {angle_deg} deg: {e}"))?;
        table.push_numeric(&[angle_deg, f.visibility, f.phase / DEG])?;
    }
    Ok(table)
}

/// Poincaré loci: the two special points and the complementary great
/// circle, each with its conditional visibility.
pub fn poincare(scenario: &Scenario) -> Result<OutputTable> {
    require_axis(scenario, SweepAxis::Analyzer, "poincare", "analyzer")?;
    let purity = scenario.input_purity;
    let kind = if purity >= 1.0 - 1e-6 {
        LociKind::PureInput
    } else if purity <= 1e-6 {
        LociKind::MixedInput
    } else {
        bail!(
            "poincare requires a pure or completely mixed input; \
             input.purity = {purity} is partially mixed"
        );
    };
    let joint = build_joint(&scenario.input, &scenario.base_config);
    let loci = poincare_loci(&joint, kind)?;
    let mut table = OutputTable::new(&["sample_kind", "s1", "s2", "s3", "conditional_visibility"]);
    standard_metadata(&mut table, "poincare", scenario);
    table.meta(
        "loci_kind",
        match kind {
            LociKind::PureInput => "pure-input (points: zero visibility, circle: unit visibility)",
            LociKind::MixedInput => "mixed-input (points: unit visibility, circle: zero visibility)",
        },
    );
    let point_label = match kind {
        LociKind::PureInput => "zero_point",
        LociKind::MixedInput => "unit_point",
    };
    let vis_at = |p: [f64; 3]| -> Result<f64> {
        Ok(conditional_fringe(&joint, &AnalyzerSetting::from_poincare(p), DetectorPort::D1)?
            .visibility)
    };
    for p in loci.points {
        table.push_mixed(&[point_label], &[p[0], p[1], p[2], vis_at(p)?])?;
    }
    for p in loci.circle_samples(scenario.sweep.values.len().max(4)) {
        table.push_mixed(&["circle"], &[p[0], p[1], p[2], vis_at(p)?])?;
    }
    Ok(table)
}

/// Simulated counting experiment: per marker angle and repetition, the
/// estimated V and K with standard errors next to the analytic values.
pub fn montecarlo(scenario: &Scenario) -> Result<OutputTable> {
    require_axis(scenario, SweepAxis::Hwp, "montecarlo", "hwp")?;
    let seed = scenario
        .seed
        .ok_or_else(|| anyhow!("montecarlo requires a seed: pass --seed or set noise.seed"))?;
    let noise = NoiseModel {
        rng_seed: seed,
        ..scenario.noise.unwrap_or_default()
    };
    let mc = DualityScenario {
        input: scenario.input,
        theta_grid: scenario.sweep.values.iter().map(|d| d * DEG).collect(),
        basis_policy: scenario.basis_policy,
        base_config: scenario.base_config,
        visibility_procedure: scenario.visibility_procedure,
    };
    let points = run_duality_experiment(&mc, &noise, scenario.repetitions)?;
    let mut table = OutputTable::new(&[
        "theta_hwp_deg",
        "repetition",
        "v_hat",
        "v_std_error",
        "k_hat",
        "k_std_error",
        "duality_sum_hat",
        "analytic_v",
        "analytic_k",
    ]);
    standard_metadata(&mut table, "montecarlo", scenario);
    table.meta("repetitions", scenario.repetitions.to_string());
    for point in &points {
        for (rep, est) in point.repetitions.iter().enumerate() {
            table.push_numeric(&[
                point.theta / DEG,
                rep as f64,
                est.visibility.estimate,
                est.visibility.std_error,
                est.knowledge.estimate,
                est.knowledge.std_error,
                est.duality_sum(),
                point.analytic_visibility,
                point.analytic_knowledge,
            ])?;
        }
    }
    Ok(table)
}
