//! Poisson photon-counting simulation of the measurement procedure, and the
//! estimation pipeline that turns raw counts back into visibility and
//! knowledge: background subtraction, detector-efficiency scaling, and
//! propagation of counting errors.
//!
//! # Rates
//!
//! In the single-photon regime detector clicks are independent, so counts
//! over an integration window are Poisson. A record's mean is
//! `η_d · max_signal_rate · relative_intensity + background_d` clicks per
//! second, where relative intensity is normalized to [0, 1]: a fringe point
//! contributes I(φ)/2 and a blocked-path measurement contributes the rate
//! ⟨x|ρᵢᵢ|x⟩ directly. Detector 1 has efficiency 1 and detector 2 carries
//! the ratio η2/η1.
//!
//! # Reproducibility
//!
//! Every record draws from its own stream: the generator is seeded by
//! folding (master seed, repetition, grid point, measurement kind,
//! detector) through a SplitMix64 mixer. Identical seeds therefore give
//! bit-exact record streams regardless of evaluation order, and repetitions
//! are independent.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::DualityError;
use crate::interferometer::{build_joint, fringe, DetectorPort, InterferometerConfig, JointState};
use crate::metrics::{distinguishability, knowledge, rates_in_basis, AnalyzerSetting, PathRates};
use crate::polarization::{ElementUnitary, PolState};
use crate::Result;

/// Detector and source noise parameters.
#[derive(Debug, Clone, Copy)]
pub struct NoiseModel {
    /// Detector-1 background in counts/second.
    pub background_rate_d1: f64,
    /// Detector-2 background in counts/second.
    pub background_rate_d2: f64,
    /// Relative detector efficiency η2/η1.
    pub efficiency_ratio: f64,
    /// Count rate at unit relative intensity, counts/second.
    pub max_signal_rate: f64,
    /// Integration time per configuration, seconds.
    pub integration_time: f64,
    /// Master seed for all count streams.
    pub rng_seed: u64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            background_rate_d1: 250.0,
            background_rate_d2: 250.0,
            efficiency_ratio: 1.11,
            max_signal_rate: 50_000.0,
            integration_time: 10.0,
            rng_seed: 0,
        }
    }
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        if self.background_rate_d1 < 0.0 || self.background_rate_d2 < 0.0 {
            return Err(DualityError::InvalidNoiseModel("background rates must be >= 0"));
        }
        if self.efficiency_ratio <= 0.0 {
            return Err(DualityError::InvalidNoiseModel("efficiency_ratio must be > 0"));
        }
        if self.max_signal_rate < 0.0 {
            return Err(DualityError::InvalidNoiseModel("max_signal_rate must be >= 0"));
        }
        if self.integration_time <= 0.0 {
            return Err(DualityError::InvalidNoiseModel("integration_time must be > 0"));
        }
        Ok(())
    }

    fn efficiency(&self, detector: DetectorPort) -> f64 {
        match detector {
            DetectorPort::D1 => 1.0,
            DetectorPort::D2 => self.efficiency_ratio,
        }
    }
}

/// One measured configuration: a detector, a human-readable tag, raw
/// counts, and the integration time.
#[derive(Debug, Clone, PartialEq)]
pub struct CountRecord {
    pub detector: DetectorPort,
    pub tag: String,
    pub counts: u64,
    pub duration: f64,
}

impl CountRecord {
    /// Raw rate in counts/second.
    pub fn rate(&self) -> f64 {
        self.counts as f64 / self.duration
    }

    /// Poisson variance of the rate.
    pub fn rate_variance(&self) -> f64 {
        self.counts as f64 / (self.duration * self.duration)
    }
}

/// Measurement kinds, used as stream-splitting codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MeasurementKind {
    FringePoint = 1,
    BlockedPath1 = 2,
    BlockedPath2 = 3,
    Background = 4,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream-splitting rule: fold each context word into a SplitMix64 chain
/// seeded by the master seed.
fn stream_seed(master: u64, words: &[u64]) -> u64 {
    let mut state = master;
    let mut out = splitmix64(&mut state);
    for &w in words {
        state ^= w.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        out = splitmix64(&mut state);
    }
    out
}

/// Identifies one record stream within an experiment.
#[derive(Debug, Clone, Copy, Default)]
pub struct StreamContext {
    pub repetition: u64,
    pub point: u64,
}

fn record_rng(noise: &NoiseModel, ctx: StreamContext, kind: MeasurementKind, detector: DetectorPort, sub: u64) -> ChaCha12Rng {
    let det = match detector {
        DetectorPort::D1 => 1,
        DetectorPort::D2 => 2,
    };
    let seed = stream_seed(
        noise.rng_seed,
        &[ctx.repetition, ctx.point, kind as u64, det, sub],
    );
    ChaCha12Rng::seed_from_u64(seed)
}

/// Draws Poisson counts with the given mean; zero mean gives exactly zero.
fn poisson_counts(mean: f64, rng: &mut ChaCha12Rng) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive finite mean").sample(rng) as u64
}

fn draw_record(
    rate: f64,
    noise: &NoiseModel,
    ctx: StreamContext,
    kind: MeasurementKind,
    detector: DetectorPort,
    sub: u64,
    tag: String,
) -> CountRecord {
    let mut rng = record_rng(noise, ctx, kind, detector, sub);
    let counts = poisson_counts(rate * noise.integration_time, &mut rng);
    CountRecord {
        detector,
        tag,
        counts,
        duration: noise.integration_time,
    }
}

/// Simulates a background record (input blocked) for one detector.
pub fn simulate_background(noise: &NoiseModel, ctx: StreamContext, detector: DetectorPort) -> CountRecord {
    let bg = match detector {
        DetectorPort::D1 => noise.background_rate_d1,
        DetectorPort::D2 => noise.background_rate_d2,
    };
    draw_record(
        bg,
        noise,
        ctx,
        MeasurementKind::Background,
        detector,
        0,
        format!("background det={}", if detector == DetectorPort::D1 { 1 } else { 2 }),
    )
}

/// Simulates detector-1 records over a readout-phase grid.
pub fn simulate_fringe_scan(
    joint: &JointState,
    phases: &[f64],
    noise: &NoiseModel,
    ctx: StreamContext,
) -> Vec<CountRecord> {
    let profile = fringe(joint, DetectorPort::D1);
    phases
        .iter()
        .enumerate()
        .map(|(k, &phi)| {
            let relative = profile.intensity(phi) / 2.0;
            let rate = noise.max_signal_rate * relative + noise.background_rate_d1;
            draw_record(
                rate,
                noise,
                ctx,
                MeasurementKind::FringePoint,
                DetectorPort::D1,
                k as u64,
                format!("fringe phi={phi:.6}"),
            )
        })
        .collect()
}

/// Simulates the extremum measurements of the visibility procedure: the
/// scan locates the fringe maximum and minimum, and counts are integrated
/// at those two phases.
pub fn simulate_fringe_extrema(
    joint: &JointState,
    noise: &NoiseModel,
    ctx: StreamContext,
) -> Vec<CountRecord> {
    let profile = fringe(joint, DetectorPort::D1);
    let phases = [profile.phase_offset, profile.phase_offset + std::f64::consts::PI];
    simulate_fringe_scan(joint, &phases, noise, ctx)
}

/// Readout-phase grid of one full fringe period, anchored at the fringe
/// maximum of the noiseless profile.
pub fn anchored_phase_grid(joint: &JointState, phi_step: f64) -> Vec<f64> {
    let profile = fringe(joint, DetectorPort::D1);
    let n = (std::f64::consts::TAU / phi_step).round().max(2.0) as usize;
    (0..n)
        .map(|k| profile.phase_offset + k as f64 * std::f64::consts::TAU / n as f64)
        .collect()
}

/// The four blocked-path records of one knowledge measurement: with path j
/// blocked, detector 1 sees |λ⟩ and detector 2 sees |λ⊥⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockedPathRecords {
    pub path1_d1: CountRecord,
    pub path1_d2: CountRecord,
    pub path2_d1: CountRecord,
    pub path2_d2: CountRecord,
}

/// Simulates the blocked-path measurement in the given analyzer basis.
pub fn simulate_blocked_path(
    joint: &JointState,
    basis: &AnalyzerSetting,
    noise: &NoiseModel,
    ctx: StreamContext,
) -> BlockedPathRecords {
    let rates = rates_in_basis(joint, basis);
    let record = |relative: f64, kind: MeasurementKind, detector: DetectorPort, label: &str| {
        let rate = noise.efficiency(detector) * noise.max_signal_rate * relative
            + match detector {
                DetectorPort::D1 => noise.background_rate_d1,
                DetectorPort::D2 => noise.background_rate_d2,
            };
        draw_record(rate, noise, ctx, kind, detector, 0, label.to_string())
    };
    BlockedPathRecords {
        path1_d1: record(rates.r1_lambda, MeasurementKind::BlockedPath1, DetectorPort::D1, "blocked path=2 det=1"),
        path1_d2: record(rates.r1_lambda_perp, MeasurementKind::BlockedPath1, DetectorPort::D2, "blocked path=2 det=2"),
        path2_d1: record(rates.r2_lambda, MeasurementKind::BlockedPath2, DetectorPort::D1, "blocked path=1 det=1"),
        path2_d2: record(rates.r2_lambda_perp, MeasurementKind::BlockedPath2, DetectorPort::D2, "blocked path=1 det=2"),
    }
}

/// An estimate with its propagated counting error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimationResult {
    pub estimate: f64,
    pub std_error: f64,
    /// Number of count records consumed.
    pub records_used: usize,
    /// True when a negative background-subtracted rate was clamped to zero.
    pub clamped: bool,
}

/// Background-subtracted max/min visibility estimator over detector-1
/// records: V = (Max − Min)/(Max + Min), with Poisson errors propagated
/// through the selected extrema and the shared background estimate. A
/// negative subtracted minimum is clamped to zero and flagged.
pub fn estimate_visibility(
    records: &[CountRecord],
    background_d1: &CountRecord,
) -> Result<EstimationResult> {
    if records.len() < 2 {
        return Err(DualityError::NoSignal);
    }
    let bg = background_d1.rate();
    let bg_var = background_d1.rate_variance();
    let pick = |cmp: fn(f64, f64) -> bool| {
        let mut idx = 0;
        for (k, r) in records.iter().enumerate() {
            if cmp(r.rate(), records[idx].rate()) {
                idx = k;
            }
        }
        &records[idx]
    };
    let max_rec = pick(|a, b| a > b);
    let min_rec = pick(|a, b| a < b);
    let max = max_rec.rate() - bg;
    let mut min = min_rec.rate() - bg;
    let mut clamped = false;
    if min < 0.0 {
        min = 0.0;
        clamped = true;
    }
    if max <= 0.0 {
        return Err(DualityError::NoSignal);
    }
    let den = max + min;
    let estimate = (max - min) / den;
    // Partials of (x−y)/(x+y−2b) in the raw max/min rates and the shared
    // background; the same background enters both subtractions.
    let d_max = 2.0 * min / (den * den);
    let d_min = -2.0 * max / (den * den);
    let d_bg = 2.0 * (max - min) / (den * den);
    let variance = d_max * d_max * max_rec.rate_variance()
        + d_min * d_min * min_rec.rate_variance()
        + d_bg * d_bg * bg_var;
    Ok(EstimationResult {
        estimate,
        std_error: variance.sqrt(),
        records_used: records.len() + 1,
        clamped,
    })
}

/// Knowledge estimator: background-subtract all four blocked-path rates,
/// scale the detector-1 rates by η2/η1 so both detectors sit on a common
/// efficiency scale, evaluate the betting likelihood, and return
/// K = 2L − 1 with the counting error propagated along the selected
/// branches.
pub fn estimate_knowledge(
    records: &BlockedPathRecords,
    background_d1: &CountRecord,
    background_d2: &CountRecord,
    efficiency_ratio: f64,
) -> Result<EstimationResult> {
    let bg1 = background_d1.rate();
    let bg2 = background_d2.rate();
    let mut clamped = false;
    let mut corrected = |rec: &CountRecord| -> (f64, f64) {
        let (bg, bg_var, scale) = match rec.detector {
            DetectorPort::D1 => (bg1, background_d1.rate_variance(), efficiency_ratio),
            DetectorPort::D2 => (bg2, background_d2.rate_variance(), 1.0),
        };
        let mut rate = (rec.rate() - bg) * scale;
        if rate < 0.0 {
            rate = 0.0;
            clamped = true;
        }
        let variance = scale * scale * (rec.rate_variance() + bg_var);
        (rate, variance)
    };
    let (r1l, v1l) = corrected(&records.path1_d1);
    let (r1p, v1p) = corrected(&records.path1_d2);
    let (r2l, v2l) = corrected(&records.path2_d1);
    let (r2p, v2p) = corrected(&records.path2_d2);
    let rates = PathRates {
        r1_lambda: r1l,
        r1_lambda_perp: r1p,
        r2_lambda: r2l,
        r2_lambda_perp: r2p,
    };
    let total = rates.total();
    if total <= 0.0 {
        return Err(DualityError::NoSignal);
    }
    let l = crate::metrics::likelihood(&rates)?;
    // Branch-wise partials of L = (max_a + max_b)/S: a selected rate has
    // dL/dR = (1 − L)/S, an unselected one −L/S.
    let partial = |selected: bool| if selected { (1.0 - l) / total } else { -l / total };
    let sel_1 = rates.r1_lambda >= rates.r2_lambda;
    let sel_2 = rates.r1_lambda_perp >= rates.r2_lambda_perp;
    let variance_l = partial(sel_1).powi(2) * v1l
        + partial(!sel_1).powi(2) * v2l
        + partial(sel_2).powi(2) * v1p
        + partial(!sel_2).powi(2) * v2p;
    Ok(EstimationResult {
        estimate: 2.0 * l - 1.0,
        std_error: 2.0 * variance_l.sqrt(),
        records_used: 6,
        clamped,
    })
}

/// Analyzer-basis policy of a knowledge measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisPolicy {
    /// Fixed horizontal/vertical analysis.
    FixedHV,
    /// The basis maximizing the knowledge of the noiseless state.
    Optimal,
}

/// How the visibility records of one configuration are taken.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VisibilityProcedure {
    /// Integrate at the located fringe maximum and minimum only.
    Extrema,
    /// Scan the full readout phase with the given step (radians), anchored
    /// at the fringe maximum so the extrema lie on the grid; the estimator
    /// then picks the extreme rates out of the scan.
    Scan { phi_step: f64 },
}

/// A duality-experiment scenario: an input state, a half-wave-plate marker
/// swept over `theta_grid`, and the analysis-basis policy. Splitter
/// asymmetry, coherence factor, and residual elements come from
/// `base_config`; its path-1 element is replaced by the swept marker.
#[derive(Debug, Clone)]
pub struct DualityScenario {
    pub input: PolState,
    pub theta_grid: Vec<f64>,
    pub basis_policy: BasisPolicy,
    pub base_config: InterferometerConfig,
    pub visibility_procedure: VisibilityProcedure,
}

/// Estimates from one repetition at one grid point.
#[derive(Debug, Clone, Copy)]
pub struct RepetitionEstimate {
    pub visibility: EstimationResult,
    pub knowledge: EstimationResult,
}

impl RepetitionEstimate {
    /// V̂² + K̂².
    pub fn duality_sum(&self) -> f64 {
        self.visibility.estimate.powi(2) + self.knowledge.estimate.powi(2)
    }
}

/// All repetitions of one marker angle, with the analytic reference values.
#[derive(Debug, Clone)]
pub struct DualityPoint {
    pub theta: f64,
    pub analytic_visibility: f64,
    pub analytic_knowledge: f64,
    pub basis: AnalyzerSetting,
    pub repetitions: Vec<RepetitionEstimate>,
}

impl DualityPoint {
    pub fn mean_visibility(&self) -> f64 {
        mean(self.repetitions.iter().map(|r| r.visibility.estimate))
    }

    pub fn mean_knowledge(&self) -> f64 {
        mean(self.repetitions.iter().map(|r| r.knowledge.estimate))
    }

    pub fn mean_duality_sum(&self) -> f64 {
        mean(self.repetitions.iter().map(|r| r.duality_sum()))
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for v in values {
        sum += v;
        n += 1;
    }
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

/// Runs the full simulated experiment: for every marker angle, repeated
/// visibility and knowledge estimation from Poisson records. Repetitions
/// use independent derived streams, so the output is deterministic in the
/// master seed and independent of evaluation order.
pub fn run_duality_experiment(
    scenario: &DualityScenario,
    noise: &NoiseModel,
    repetitions: u64,
) -> Result<Vec<DualityPoint>> {
    noise.validate()?;
    scenario.base_config.validate()?;
    let mut points = Vec::with_capacity(scenario.theta_grid.len());
    for (point_idx, &theta) in scenario.theta_grid.iter().enumerate() {
        let mut config = scenario.base_config;
        config.path1_element = ElementUnitary::hwp(theta);
        let joint = build_joint(&scenario.input, &config);
        let basis = match scenario.basis_policy {
            BasisPolicy::FixedHV => AnalyzerSetting::horizontal_vertical(),
            BasisPolicy::Optimal => distinguishability(&joint)?.1,
        };
        let analytic_visibility = fringe(&joint, DetectorPort::D1).visibility();
        let analytic_knowledge = knowledge(&joint, &basis)?;
        let mut reps = Vec::with_capacity(repetitions as usize);
        for rep in 0..repetitions {
            let ctx = StreamContext {
                repetition: rep,
                point: point_idx as u64,
            };
            let bg1 = simulate_background(noise, ctx, DetectorPort::D1);
            let bg2 = simulate_background(noise, ctx, DetectorPort::D2);
            let fringe_records = match scenario.visibility_procedure {
                VisibilityProcedure::Extrema => simulate_fringe_extrema(&joint, noise, ctx),
                VisibilityProcedure::Scan { phi_step } => {
                    let grid = anchored_phase_grid(&joint, phi_step);
                    simulate_fringe_scan(&joint, &grid, noise, ctx)
                }
            };
            let visibility = estimate_visibility(&fringe_records, &bg1)?;
            let blocked = simulate_blocked_path(&joint, &basis, noise, ctx);
            let knowledge = estimate_knowledge(&blocked, &bg1, &bg2, noise.efficiency_ratio)?;
            reps.push(RepetitionEstimate {
                visibility,
                knowledge,
            });
        }
        points.push(DualityPoint {
            theta,
            analytic_visibility,
            analytic_knowledge,
            basis,
            repetitions: reps,
        });
    }
    Ok(points)
}
