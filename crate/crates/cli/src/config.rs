//! Scenario configuration: a TOML file with `--set key.path=value`
//! overrides, resolved into library types.
//!
//! All angles in the file are degrees; grids must be strictly increasing.
//! The documented schema lives in the README; every section has defaults
//! except `[sweep]`, which each command requires with a specific axis.

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;

use duality_core::interferometer::InterferometerConfig;
use duality_core::montecarlo::{BasisPolicy, NoiseModel, VisibilityProcedure};
use duality_core::polarization::{CMat2, ElementUnitary, PolState, PolVector};
use duality_core::Complex64;

pub const DEG: f64 = std::f64::consts::PI / 180.0;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(default)]
    pub input: InputSection,
    #[serde(default)]
    pub marker: MarkerSection,
    #[serde(default)]
    pub marker2: Option<MarkerSection>,
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub imperfections: ImperfectionsSection,
    #[serde(default)]
    pub noise: Option<NoiseSection>,
    #[serde(default)]
    pub montecarlo: MonteCarloSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSection {
    /// "pure-linear" | "partial-mix" | "tunable-source"
    pub kind: String,
    /// Pure-component axis for pure-linear / partial-mix, degrees from H.
    #[serde(default = "default_input_angle")]
    pub angle_deg: f64,
    /// Fractional purity for partial-mix.
    #[serde(default)]
    pub purity: Option<f64>,
    /// Source waveplate angle for tunable-source, degrees.
    #[serde(default)]
    pub theta_in_deg: Option<f64>,
}

fn default_input_angle() -> f64 {
    90.0
}

impl Default for InputSection {
    fn default() -> Self {
        Self {
            kind: "pure-linear".into(),
            angle_deg: 90.0,
            purity: None,
            theta_in_deg: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkerSection {
    /// "hwp" | "rotator" | "custom" | "identity"
    pub kind: String,
    #[serde(default)]
    pub angle_deg: f64,
    /// Custom 2×2 matrix as rows of [re, im] pairs.
    #[serde(default)]
    pub matrix: Option<[[[f64; 2]; 2]; 2]>,
}

impl Default for MarkerSection {
    fn default() -> Self {
        Self {
            kind: "hwp".into(),
            angle_deg: 45.0,
            matrix: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// "hwp" | "analyzer" | "phase" | "purity"
    pub axis: String,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImperfectionsSection {
    pub entry_reflectivity: f64,
    pub intrinsic_visibility: f64,
    pub residual_rotation_path1_deg: f64,
    pub residual_rotation_path2_deg: f64,
}

impl Default for ImperfectionsSection {
    fn default() -> Self {
        Self {
            entry_reflectivity: 0.5,
            intrinsic_visibility: 1.0,
            residual_rotation_path1_deg: 0.0,
            residual_rotation_path2_deg: 0.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    pub background_rate_d1: f64,
    pub background_rate_d2: f64,
    pub efficiency_ratio: f64,
    pub max_signal_rate: f64,
    pub integration_time: f64,
    pub seed: Option<u64>,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            background_rate_d1: 250.0,
            background_rate_d2: 250.0,
            efficiency_ratio: 1.11,
            max_signal_rate: 50_000.0,
            integration_time: 10.0,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonteCarloSection {
    pub repetitions: u64,
    /// "optimal" | "hv"
    pub basis: String,
    /// "extrema" | "scan"
    pub visibility_procedure: String,
    /// Readout-phase step of the scan procedure, degrees.
    pub phi_step_deg: f64,
}

impl Default for MonteCarloSection {
    fn default() -> Self {
        Self {
            repetitions: 100,
            basis: "optimal".into(),
            visibility_procedure: "extrema".into(),
            phi_step_deg: 0.5,
        }
    }
}

/// Sweep axis of a run; exactly one per configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Hwp,
    Analyzer,
    Phase,
    Purity,
}

#[derive(Debug, Clone)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

/// A fully validated scenario in library units (radians).
#[derive(Debug, Clone)]
pub struct Scenario {
    pub input: PolState,
    /// Pure-component axis in radians (partial-mix and pure-linear inputs).
    pub pure_axis: f64,
    /// Fractional purity of the input state.
    pub input_purity: f64,
    pub marker_kind: String,
    /// Marker angle in radians, where applicable.
    pub marker_angle: f64,
    pub base_config: InterferometerConfig,
    pub sweep: Sweep,
    /// Noise model without a seed; the commands that draw counts combine it
    /// with `seed`.
    pub noise: Option<NoiseModel>,
    /// Explicit seed from the --seed flag or noise.seed, if any.
    pub seed: Option<u64>,
    pub repetitions: u64,
    pub basis_policy: BasisPolicy,
    pub visibility_procedure: VisibilityProcedure,
    /// Canonical serialized form of the resolved raw configuration.
    pub canonical: String,
}

/// Applies one `key.path=value` override onto the parsed TOML tree.
pub fn apply_override(root: &mut toml::Value, spec: &str) -> Result<()> {
    let (path, value) = spec
        .split_once('=')
        .ok_or_else(|| anyhow!("--set expects key.path=value, got `{spec}`"))?;
    let parsed: toml::Value = format!("v = {value}")
        .parse::<toml::Table>()
        .map(|t| t["v"].clone())
        .or_else(|_| {
            format!("v = \"{value}\"")
                .parse::<toml::Table>()
                .map(|t| t["v"].clone())
        })
        .with_context(|| format!("cannot parse override value `{value}`"))?;
    let mut node = root;
    let segments: Vec<&str> = path.split('.').collect();
    for (i, seg) in segments.iter().enumerate() {
        let table = node
            .as_table_mut()
            .ok_or_else(|| anyhow!("override path `{path}` does not address a table"))?;
        if i + 1 == segments.len() {
            table.insert((*seg).to_string(), parsed);
            return Ok(());
        }
        node = table
            .entry((*seg).to_string())
            .or_insert(toml::Value::Table(toml::Table::new()));
    }
    unreachable!("split never yields zero segments")
}

/// Parses, overrides, validates, and resolves a configuration.
pub fn resolve(text: &str, overrides: &[String], seed_flag: Option<u64>) -> Result<Scenario> {
    let table: toml::Table = text.parse().context("config is not valid TOML")?;
    let mut tree = toml::Value::Table(table);
    for spec in overrides {
        apply_override(&mut tree, spec)?;
    }
    let canonical = toml::to_string(&tree).context("cannot re-serialize config")?;
    let raw: RawConfig = tree.try_into().context("config schema mismatch")?;

    let (input, pure_axis, input_purity) = resolve_input(&raw.input)?;
    let marker = resolve_marker(&raw.marker).context("in [marker]")?;
    let marker2 = match &raw.marker2 {
        Some(section) => resolve_marker(section).context("in [marker2]")?,
        None => ElementUnitary::identity(),
    };

    let imp = &raw.imperfections;
    if !(imp.entry_reflectivity > 0.0 && imp.entry_reflectivity < 1.0) {
        bail!("imperfections.entry_reflectivity must lie in (0, 1)");
    }
    if !(0.0..=1.0).contains(&imp.intrinsic_visibility) {
        bail!("imperfections.intrinsic_visibility must lie in [0, 1]");
    }
    let residual = |deg: f64| {
        if deg == 0.0 {
            None
        } else {
            Some(ElementUnitary::rotator(deg * DEG))
        }
    };
    let base_config = InterferometerConfig {
        entry_reflectivity: imp.entry_reflectivity,
        path1_element: marker,
        path2_element: marker2,
        intrinsic_visibility: imp.intrinsic_visibility,
        path1_residual: residual(imp.residual_rotation_path1_deg),
        path2_residual: residual(imp.residual_rotation_path2_deg),
    };

    let sweep = resolve_sweep(raw.sweep.as_ref())?;

    let seed = seed_flag.or(raw.noise.as_ref().and_then(|n| n.seed));
    let noise = match &raw.noise {
        Some(section) => Some(build_noise(section)?),
        None => None,
    };

    let basis_policy = match raw.montecarlo.basis.as_str() {
        "optimal" => BasisPolicy::Optimal,
        "hv" => BasisPolicy::FixedHV,
        other => bail!("montecarlo.basis must be \"optimal\" or \"hv\", got \"{other}\""),
    };
    if raw.montecarlo.repetitions == 0 {
        bail!("montecarlo.repetitions must be at least 1");
    }
    let visibility_procedure = match raw.montecarlo.visibility_procedure.as_str() {
        "extrema" => VisibilityProcedure::Extrema,
        "scan" => {
            if raw.montecarlo.phi_step_deg.partial_cmp(&0.0)
                != Some(std::cmp::Ordering::Greater)
            {
                bail!("montecarlo.phi_step_deg must be > 0");
            }
            VisibilityProcedure::Scan {
                phi_step: raw.montecarlo.phi_step_deg * DEG,
            }
        }
        other => bail!(
            "montecarlo.visibility_procedure must be \"extrema\" or \"scan\", got \"{other}\""
        ),
    };

    Ok(Scenario {
        input,
        pure_axis,
        input_purity,
        marker_kind: raw.marker.kind.clone(),
        marker_angle: raw.marker.angle_deg * DEG,
        base_config,
        sweep,
        noise,
        seed,
        repetitions: raw.montecarlo.repetitions,
        basis_policy,
        visibility_procedure,
        canonical,
    })
}

fn resolve_input(section: &InputSection) -> Result<(PolState, f64, f64)> {
    let axis = section.angle_deg * DEG;
    match section.kind.as_str() {
        "pure-linear" => Ok((
            PolState::from_pure(&PolVector::linear(axis)),
            axis,
            1.0,
        )),
        "partial-mix" => {
            let s = section
                .purity
                .ok_or_else(|| anyhow!("input.purity is required for kind \"partial-mix\""))?;
            let state = PolState::partial_mix(&PolVector::linear(axis), s)
                .map_err(|e| anyhow!("input.purity: {e}"))?;
            Ok((state, axis, s))
        }
        "tunable-source" => {
            let theta_in = section
                .theta_in_deg
                .ok_or_else(|| anyhow!("input.theta_in_deg is required for kind \"tunable-source\""))?
                * DEG;
            let state = PolState::tunable_source(theta_in);
            let purity = state.fractional_purity();
            Ok((state, 0.0, purity))
        }
        other => bail!(
            "input.kind must be \"pure-linear\", \"partial-mix\", or \"tunable-source\", got \"{other}\""
        ),
    }
}

fn resolve_marker(section: &MarkerSection) -> Result<ElementUnitary> {
    match section.kind.as_str() {
        "hwp" => Ok(ElementUnitary::hwp(section.angle_deg * DEG)),
        "rotator" => Ok(ElementUnitary::rotator(section.angle_deg * DEG)),
        "identity" => Ok(ElementUnitary::identity()),
        "custom" => {
            let rows = section
                .matrix
                .ok_or_else(|| anyhow!("marker.matrix is required for kind \"custom\""))?;
            let m = CMat2::new(
                Complex64::new(rows[0][0][0], rows[0][0][1]),
                Complex64::new(rows[0][1][0], rows[0][1][1]),
                Complex64::new(rows[1][0][0], rows[1][0][1]),
                Complex64::new(rows[1][1][0], rows[1][1][1]),
            );
            ElementUnitary::custom(m).map_err(|e| anyhow!("marker.matrix: {e}"))
        }
        other => bail!(
            "marker.kind must be \"hwp\", \"rotator\", \"custom\", or \"identity\", got \"{other}\""
        ),
    }
}

fn resolve_sweep(section: Option<&SweepSection>) -> Result<Sweep> {
    let section = section.ok_or_else(|| anyhow!("[sweep] section is required"))?;
    let axis = match section.axis.as_str() {
        "hwp" => SweepAxis::Hwp,
        "analyzer" => SweepAxis::Analyzer,
        "phase" => SweepAxis::Phase,
        "purity" => SweepAxis::Purity,
        other => bail!(
            "sweep.axis must be \"hwp\", \"analyzer\", \"phase\", or \"purity\", got \"{other}\""
        ),
    };
    if section.step.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        bail!("sweep.step must be > 0");
    }
    if section.stop < section.start {
        bail!("sweep.stop must be >= sweep.start");
    }
    if axis == SweepAxis::Purity && !(0.0..=1.0).contains(&section.start) {
        bail!("sweep.start must lie in [0, 1] for a purity sweep");
    }
    if axis == SweepAxis::Purity && !(0.0..=1.0).contains(&section.stop) {
        bail!("sweep.stop must lie in [0, 1] for a purity sweep");
    }
    let n = ((section.stop - section.start) / section.step).round() as usize;
    let mut values = Vec::with_capacity(n + 1);
    let mut k = 0usize;
    loop {
        let v = section.start + k as f64 * section.step;
        if v > section.stop + 1e-9 {
            break;
        }
        values.push(v);
        k += 1;
    }
    Ok(Sweep { axis, values })
}

fn build_noise(section: &NoiseSection) -> Result<NoiseModel> {
    let noise = NoiseModel {
        background_rate_d1: section.background_rate_d1,
        background_rate_d2: section.background_rate_d2,
        efficiency_ratio: section.efficiency_ratio,
        max_signal_rate: section.max_signal_rate,
        integration_time: section.integration_time,
        rng_seed: 0,
    };
    noise.validate().map_err(|e| anyhow!("[noise]: {e}"))?;
    Ok(noise)
}
