//! Monte Carlo benchmarks of concrete measurement schemes against the
//! quantum Cramér-Rao bound.
//!
//! Every draw for trial `t` and mode `m` comes from its own counter-based
//! substream, and trial outcomes are reduced in trial order, so a report does
//! not depend on the number of worker threads.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Geometric, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::physics::SourceSpec;
use crate::qcrb::{bound_report, competitor_sensitivities, BoundReport, CompetitorCurves};
use crate::rng::{Domain, StreamFactory};
use crate::stats::{self, bootstrap, BOOTSTRAP_RESAMPLES, SIGMA_THRESHOLD};

/// Smallest accepted number of trials.
pub const MIN_TRIALS: usize = 1_000;
pub const DEFAULT_TRIALS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    PhotonCounting,
    HeterodyneRadiometer,
    TwoDetectorCorrelation,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 3] = [
        EstimatorKind::PhotonCounting,
        EstimatorKind::HeterodyneRadiometer,
        EstimatorKind::TwoDetectorCorrelation,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            EstimatorKind::PhotonCounting => "photon_counting",
            EstimatorKind::HeterodyneRadiometer => "heterodyne_radiometer",
            EstimatorKind::TwoDetectorCorrelation => "two_detector_correlation",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            EstimatorKind::PhotonCounting => "photon counting, n̂₀ = Σ counts / M",
            EstimatorKind::HeterodyneRadiometer => "heterodyne radiometer, n̂₀ = Σ|β|²/M − 1",
            EstimatorKind::TwoDetectorCorrelation => {
                "representative balanced-divider intensity correlation, n̂₀ = √(2·mean(n₁n₂))"
            }
        }
    }

    fn stream_offset(self) -> u64 {
        match self {
            EstimatorKind::PhotonCounting => 0,
            EstimatorKind::HeterodyneRadiometer => 1,
            EstimatorKind::TwoDetectorCorrelation => 2,
        }
    }
}

/// How photon counts are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountingPath {
    /// Geometric law `P(k) = (1/(n₀+1))(n₀/(n₀+1))^k`.
    #[default]
    BoseEinstein,
    /// `Poisson(|α|²)` given a thermal coherent amplitude `α`.
    ConditionalPoisson,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    pub spec: SourceSpec,
    pub kind: EstimatorKind,
    pub trials: usize,
    pub master_seed: u64,
    pub t_samp: Option<f64>,
    pub counting_path: CountingPath,
}

impl ExperimentConfig {
    pub fn new(spec: SourceSpec, kind: EstimatorKind, trials: usize, master_seed: u64) -> Result<Self> {
        let cfg = Self {
            spec,
            kind,
            trials,
            master_seed,
            t_samp: None,
            counting_path: CountingPath::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < MIN_TRIALS {
            return Err(Error::Config(format!(
                "trials = {} is below the floor of {MIN_TRIALS}",
                self.trials
            )));
        }
        if let Some(t) = self.t_samp {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Config(format!("T_samp must be positive, got {t}")));
            }
        }
        Ok(())
    }
}

/// One simulated observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub estimate: f64,
    /// Total counts, total heterodyne power or the mean coincidence product.
    pub raw_summary: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub kind: EstimatorKind,
    pub label: String,
    pub trials: usize,
    pub modes: usize,
    pub n0: f64,
    pub mean_estimate: f64,
    pub bias: f64,
    /// Bootstrap σ of the mean estimate.
    pub bias_sigma: f64,
    pub variance: f64,
    pub rel_sensitivity: f64,
    /// Bootstrap σ of the relative sensitivity.
    pub bootstrap_sigma: f64,
    pub rel_sensitivity_ci: [f64; 2],
    pub bound: f64,
    pub ratio_to_bound: f64,
    /// Closed-form relative sensitivity of the scheme (delta method for the
    /// two-detector estimator).
    pub expected_rel_sensitivity: f64,
    /// Closed-form bias (leading order for the two-detector estimator).
    pub expected_bias: f64,
    /// `rel_sensitivity ≥ bound − 3σ`.
    pub bound_satisfied: bool,
    pub seed: u64,
}

/// Circular complex Gaussian amplitude with `E|α|² = mean_power`.
pub fn sample_amplitude<R: Rng>(mean_power: f64, rng: &mut R) -> Complex64 {
    let s = (0.5 * mean_power).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// `M` independent thermal P-representation amplitudes, `E|α|² = n₀`.
pub fn sample_mode_amplitudes<R: Rng>(spec: &SourceSpec, rng: &mut R) -> Vec<Complex64> {
    (0..spec.mode_count()).map(|_| sample_amplitude(spec.n0, rng)).collect()
}

fn poisson<R: Rng>(mean: f64, rng: &mut R) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    Poisson::new(mean).expect("finite positive Poisson mean").sample(rng)
}

/// One single-mode photon count from the chosen representation.
pub fn sample_count<R: Rng>(n0: f64, path: CountingPath, rng: &mut R) -> f64 {
    match path {
        CountingPath::BoseEinstein => {
            let g = Geometric::new(1.0 / (n0 + 1.0)).expect("probability in (0, 1]");
            g.sample(rng) as f64
        }
        CountingPath::ConditionalPoisson => poisson(sample_amplitude(n0, rng).norm_sqr(), rng),
    }
}

fn photon_counting_trial(cfg: &ExperimentConfig, factory: &StreamFactory, stream: u64) -> TrialOutcome {
    let m = cfg.spec.mode_count();
    let total: f64 = (0..m)
        .map(|mode| sample_count(cfg.spec.n0, cfg.counting_path, &mut factory.substream(stream, mode as u64)))
        .sum();
    TrialOutcome {
        estimate: total / m as f64,
        raw_summary: total,
    }
}

fn heterodyne_trial(cfg: &ExperimentConfig, factory: &StreamFactory, stream: u64) -> TrialOutcome {
    let m = cfg.spec.mode_count();
    let power: f64 = (0..m)
        .map(|mode| sample_amplitude(cfg.spec.n0 + 1.0, &mut factory.substream(stream, mode as u64)).norm_sqr())
        .sum();
    TrialOutcome {
        estimate: power / m as f64 - 1.0,
        raw_summary: power,
    }
}

fn two_detector_trial(cfg: &ExperimentConfig, factory: &StreamFactory, stream: u64) -> TrialOutcome {
    let m = cfg.spec.mode_count();
    let products: f64 = (0..m)
        .map(|mode| {
            let rng = &mut factory.substream(stream, mode as u64);
            let arm = 0.5 * sample_amplitude(cfg.spec.n0, rng).norm_sqr();
            poisson(arm, rng) * poisson(arm, rng)
        })
        .sum();
    let s = products / m as f64;
    TrialOutcome {
        estimate: (2.0 * s).sqrt(),
        raw_summary: s,
    }
}

/// Per-trial outcomes in trial order.
pub fn run_trials(cfg: &ExperimentConfig) -> Result<Vec<TrialOutcome>> {
    cfg.validate()?;
    let factory = StreamFactory::new(cfg.master_seed, Domain::Trials);
    let kind = cfg.kind.stream_offset();
    let trial = match cfg.kind {
        EstimatorKind::PhotonCounting => photon_counting_trial,
        EstimatorKind::HeterodyneRadiometer => heterodyne_trial,
        EstimatorKind::TwoDetectorCorrelation => two_detector_trial,
    };
    Ok((0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| trial(cfg, &factory, (t << 2) | kind))
        .collect())
}

/// Closed-form `(relative sensitivity, bias)` of a scheme with `M` modes.
pub fn expected_performance(kind: EstimatorKind, n0: f64, modes: usize) -> (f64, f64) {
    let m = modes as f64;
    match kind {
        EstimatorKind::PhotonCounting => ((n0 + 1.0) / (n0 * m), 0.0),
        EstimatorKind::HeterodyneRadiometer => ((n0 + 1.0).powi(2) / (n0 * n0 * m), 0.0),
        EstimatorKind::TwoDetectorCorrelation => {
            // arm intensity λ ~ Exp(n₀/2): Var(n₁n₂) = 2μ² + 12μ³ + 20μ⁴, μ = n₀/2
            let mu = 0.5 * n0;
            let var_s = (2.0 * mu.powi(2) + 12.0 * mu.powi(3) + 20.0 * mu.powi(4)) / m;
            (var_s / n0.powi(4), -var_s / (2.0 * n0.powi(3)))
        }
    }
}

fn summarize(cfg: &ExperimentConfig, outcomes: &[TrialOutcome]) -> Result<SensitivityReport> {
    let n0 = cfg.spec.n0;
    let estimates: Vec<f64> = outcomes.iter().map(|o| o.estimate).collect();
    if estimates.iter().any(|e| !e.is_finite()) {
        return Err(Error::Numerical("non-finite trial estimate".into()));
    }
    let mean = stats::mean(&estimates);
    let variance = stats::variance(&estimates);
    let rel = variance / (n0 * n0);
    let mut brng = StreamFactory::new(cfg.master_seed, Domain::Bootstrap).stream(cfg.kind.stream_offset());
    let [mean_spread, rel_spread] = bootstrap(&estimates, BOOTSTRAP_RESAMPLES, &mut brng, |d| {
        [stats::mean(d), stats::variance(d) / (n0 * n0)]
    });
    let bound = bound_report(&cfg.spec)?.rel_sens_bound;
    let (expected_rel, expected_bias) = expected_performance(cfg.kind, n0, cfg.spec.mode_count());
    Ok(SensitivityReport {
        kind: cfg.kind,
        label: cfg.kind.label().to_string(),
        trials: cfg.trials,
        modes: cfg.spec.mode_count(),
        n0,
        mean_estimate: mean,
        bias: mean - n0,
        bias_sigma: mean_spread.sigma,
        variance,
        rel_sensitivity: rel,
        bootstrap_sigma: rel_spread.sigma,
        rel_sensitivity_ci: [rel_spread.ci_low, rel_spread.ci_high],
        bound,
        ratio_to_bound: rel / bound,
        expected_rel_sensitivity: expected_rel,
        expected_bias,
        bound_satisfied: rel >= bound - SIGMA_THRESHOLD * rel_spread.sigma,
        seed: cfg.master_seed,
    })
}

fn run_kind(cfg: &ExperimentConfig, kind: EstimatorKind) -> Result<SensitivityReport> {
    if cfg.kind != kind {
        return Err(Error::Config(format!(
            "configuration is for {}, not {}",
            cfg.kind.tag(),
            kind.tag()
        )));
    }
    summarize(cfg, &run_trials(cfg)?)
}

pub fn run_photon_counting(cfg: &ExperimentConfig) -> Result<SensitivityReport> {
    run_kind(cfg, EstimatorKind::PhotonCounting)
}

pub fn run_heterodyne(cfg: &ExperimentConfig) -> Result<SensitivityReport> {
    run_kind(cfg, EstimatorKind::HeterodyneRadiometer)
}

pub fn run_two_detector(cfg: &ExperimentConfig) -> Result<SensitivityReport> {
    run_kind(cfg, EstimatorKind::TwoDetectorCorrelation)
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<SensitivityReport> {
    match cfg.kind {
        EstimatorKind::PhotonCounting => run_photon_counting(cfg),
        EstimatorKind::HeterodyneRadiometer => run_heterodyne(cfg),
        EstimatorKind::TwoDetectorCorrelation => run_two_detector(cfg),
    }
}

/// Closed-form competitor curves next to simulated schemes at one source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub spec: SourceSpec,
    pub bound: BoundReport,
    pub competitors: CompetitorCurves,
    pub simulated: Vec<SensitivityReport>,
    /// The claimed curve lies below the bound.
    pub lkd_below_bound: bool,
    /// Every simulated scheme sits at or above the bound within 3σ.
    pub simulated_at_or_above_bound: bool,
    /// Both of the above.
    pub refuted: bool,
}

/// Runs every scheme in `kinds` at `spec` with a shared seed and sets the
/// results against the closed-form curves.
pub fn compare_schemes(
    spec: &SourceSpec,
    t_samp: f64,
    kinds: &[EstimatorKind],
    trials: usize,
    master_seed: u64,
    counting_path: CountingPath,
) -> Result<ComparisonReport> {
    if kinds.is_empty() {
        return Err(Error::Config("no estimator kinds to compare".into()));
    }
    let competitors = competitor_sensitivities(spec, t_samp)?;
    let simulated = kinds
        .iter()
        .map(|&kind| {
            let cfg = ExperimentConfig {
                counting_path,
                t_samp: Some(t_samp),
                ..ExperimentConfig::new(*spec, kind, trials, master_seed)?
            };
            run_experiment(&cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    let above = simulated.iter().all(|r| r.bound_satisfied);
    Ok(ComparisonReport {
        spec: *spec,
        bound: bound_report(spec)?,
        lkd_below_bound: competitors.lkd_below_bound,
        simulated_at_or_above_bound: above,
        refuted: competitors.lkd_below_bound && above,
        competitors,
        simulated,
    })
}

/// First four raw moments of `draws` single-mode counts, with bootstrap σ.
pub fn count_moments(
    n0: f64,
    path: CountingPath,
    draws: usize,
    master_seed: u64,
) -> ([f64; 4], [stats::BootstrapSpread; 4]) {
    let stream = match path {
        CountingPath::BoseEinstein => 0,
        CountingPath::ConditionalPoisson => 1,
    };
    let factory = StreamFactory::new(master_seed, Domain::Auxiliary);
    let mut rng = factory.stream(stream);
    let counts: Vec<f64> = (0..draws).map(|_| sample_count(n0, path, &mut rng)).collect();
    let moments = |d: &[f64]| std::array::from_fn(|k| stats::raw_moment(d, k as i32 + 1));
    let point = moments(&counts);
    let spread = bootstrap(
        &counts,
        BOOTSTRAP_RESAMPLES,
        &mut StreamFactory::new(master_seed, Domain::Bootstrap).stream(100 + stream),
        moments,
    );
    (point, spread)
}
