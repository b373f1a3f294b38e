//! Convergence of the modal covariance to `n₀·rect·δ` as `ΔνT` grows, from
//! the quadrature path and from the field-synthesis path.

use serde::{Deserialize, Serialize};

use super::{build_mode_set, modal_covariance_table, AppendixQuadratureConfig, ModalCovarianceTable, SynthesisPlan};
use crate::error::{Error, Result};
use crate::physics::SourceSpec;
use crate::rng::DEFAULT_SEED;
use crate::stats::SIGMA_THRESHOLD;

/// Off-diagonal and deviation limit, in units of `n₀/(ΔνT)`.
pub const DEVIATION_LIMIT_CONSTANT: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AppendixCheckConfig {
    #[serde(default = "default_time_bandwidths")]
    pub time_bandwidths: Vec<f64>,
    #[serde(default = "default_n0")]
    pub n0: f64,
    /// Bandwidth in Hz; `T = ΔνT/Δν`.
    #[serde(default = "default_delta_nu")]
    pub delta_nu: f64,
    /// `ν₀/Δν`, an integer so that `ν₀T` is one.
    #[serde(default = "default_carrier_ratio")]
    pub carrier_ratio: u64,
    #[serde(default)]
    pub quadrature: AppendixQuadratureConfig,
    #[serde(default = "default_realizations")]
    pub realizations: usize,
    #[serde(default = "default_seed")]
    pub master_seed: u64,
    /// Run the field-synthesis cross-check.
    #[serde(default = "default_synthesis")]
    pub synthesis: bool,
}

fn default_time_bandwidths() -> Vec<f64> {
    vec![16.0, 32.0, 64.0]
}
fn default_n0() -> f64 {
    1.0
}
fn default_delta_nu() -> f64 {
    1e6
}
fn default_carrier_ratio() -> u64 {
    1000
}
fn default_realizations() -> usize {
    10_000
}
fn default_seed() -> u64 {
    DEFAULT_SEED
}
fn default_synthesis() -> bool {
    true
}

impl Default for AppendixCheckConfig {
    fn default() -> Self {
        Self {
            time_bandwidths: default_time_bandwidths(),
            n0: default_n0(),
            delta_nu: default_delta_nu(),
            carrier_ratio: default_carrier_ratio(),
            quadrature: AppendixQuadratureConfig::default(),
            realizations: default_realizations(),
            master_seed: default_seed(),
            synthesis: true,
        }
    }
}

impl AppendixCheckConfig {
    pub fn spec_for(&self, time_bandwidth: f64) -> Result<SourceSpec> {
        SourceSpec::from_occupation(
            self.n0,
            self.carrier_ratio as f64 * self.delta_nu,
            self.delta_nu,
            time_bandwidth / self.delta_nu,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.time_bandwidths.is_empty() {
            return Err(Error::Config("time_bandwidths must not be empty".into()));
        }
        if self.realizations < 2 {
            return Err(Error::Config("at least two realizations are needed".into()));
        }
        self.quadrature.validate()
    }
}

/// Max deviation summary of one covariance matrix restricted to a block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationSummary {
    pub max_diagonal_deviation: f64,
    /// Baseband offset `m − ν₀T` of the worst diagonal entry.
    pub diagonal_argmax: i64,
    pub max_off_diagonal: f64,
    pub off_diagonal_argmax: [i64; 2],
    pub max_deviation: f64,
    /// `max_deviation·ΔνT/n₀`.
    pub fitted_constant: f64,
}

/// One entry compared between the two paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntryComparison {
    pub offsets: [i64; 2],
    pub quadrature: f64,
    pub quadrature_error: f64,
    pub synthesis_re: f64,
    pub synthesis_im: f64,
    pub bootstrap_sigma: f64,
    /// `|synthesis − quadrature| / √(σ_boot² + σ_quad²)`.
    pub z: f64,
    pub agree: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisSummary {
    pub realizations: usize,
    pub full: DeviationSummary,
    pub comparisons: Vec<EntryComparison>,
    pub all_agree: bool,
    pub max_parseval_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppendixRow {
    pub time_bandwidth: f64,
    pub n0: f64,
    pub modes: usize,
    /// `5n₀/(ΔνT)`.
    pub limit: f64,
    /// Every pair of the mode set.
    pub quadrature: DeviationSummary,
    /// Central half of the mode set, away from the band edges (diagnostic).
    pub quadrature_interior: DeviationSummary,
    pub within_limit: bool,
    pub interior_within_limit: bool,
    pub max_edge_part: f64,
    pub edge_bound: f64,
    pub panels_tau: usize,
    pub panels_zeta: usize,
    pub synthesis: Option<SynthesisSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppendixReport {
    pub rows: Vec<AppendixRow>,
    /// Least-squares `K` in `max_deviation ≈ K·n₀/(ΔνT)`.
    pub fitted_constant: f64,
    pub interior_fitted_constant: f64,
    pub deviation_decreasing: bool,
    pub all_within_limit: bool,
    pub interior_decreasing: bool,
    pub interior_within_limit: bool,
    pub synthesis_agrees: bool,
    pub pass: bool,
}

fn summarize(table: &ModalCovarianceTable, range: std::ops::Range<usize>, b: f64) -> DeviationSummary {
    let offset = |i: usize| table.modes.offset(i);
    let (diag, di) = table.max_diagonal_deviation_in(range.clone());
    let (off, (oi, ok)) = table.max_off_diagonal_in(range);
    let max_deviation = diag.max(off);
    DeviationSummary {
        max_diagonal_deviation: diag,
        diagonal_argmax: offset(di),
        max_off_diagonal: off,
        off_diagonal_argmax: [offset(oi), offset(ok)],
        max_deviation,
        fitted_constant: max_deviation * b / table.n0,
    }
}

fn interior(m: usize) -> std::ops::Range<usize> {
    let quarter = m / 4;
    quarter..m - quarter
}

fn fit(points: impl Iterator<Item = (f64, f64)>) -> f64 {
    // through the origin: K = Σxy/Σx²
    let (sxy, sxx) = points.fold((0.0, 0.0), |(a, b), (x, y)| (a + x * y, b + x * x));
    sxy / sxx
}

/// Runs one row; `synthesis` toggles the Monte Carlo path.
pub fn appendix_row(cfg: &AppendixCheckConfig, time_bandwidth: f64, synthesis: bool) -> Result<AppendixRow> {
    let spec = cfg.spec_for(time_bandwidth)?;
    let modes = build_mode_set(&spec)?;
    let table = modal_covariance_table(&spec, &modes, &cfg.quadrature)?;
    let b = spec.time_bandwidth();
    let m = modes.len();
    let limit = DEVIATION_LIMIT_CONSTANT * spec.n0 / b;
    let full = summarize(&table, 0..m, b);
    let inner = summarize(&table, interior(m), b);
    let max_edge_part = table.edge_parts.iter().fold(0.0f64, |a, v| a.max(v.abs()));

    let synthesis = if synthesis {
        Some(synthesis_summary(cfg, &spec, &table, &full, b)?)
    } else {
        None
    };
    Ok(AppendixRow {
        time_bandwidth: b,
        n0: spec.n0,
        modes: m,
        limit,
        within_limit: full.max_deviation <= limit,
        interior_within_limit: inner.max_deviation <= limit,
        quadrature: full,
        quadrature_interior: inner,
        max_edge_part,
        edge_bound: table.edge_bound,
        panels_tau: table.panels_tau,
        panels_zeta: table.panels_zeta,
        synthesis,
    })
}

fn synthesis_summary(
    cfg: &AppendixCheckConfig,
    spec: &SourceSpec,
    table: &ModalCovarianceTable,
    full: &DeviationSummary,
    b: f64,
) -> Result<SynthesisSummary> {
    let modes = table.modes;
    let m = modes.len();
    let plan = SynthesisPlan::with_defaults(spec)?;
    let ensemble = plan.ensemble(spec, &modes, cfg.realizations, cfg.master_seed, &[])?;
    let empirical = ensemble.cross_matrix();

    let mut diag = (0.0, 0);
    let mut off = (0.0, (0, 0));
    for i in 0..m {
        let d = (empirical[(i, i)].re - spec.n0).abs();
        if d > diag.0 {
            diag = (d, i);
        }
        for k in 0..m {
            if i != k && empirical[(i, k)].norm() > off.0 {
                off = (empirical[(i, k)].norm(), (i, k));
            }
        }
    }
    let max_deviation = f64::max(diag.0, off.0);
    let summary = DeviationSummary {
        max_diagonal_deviation: diag.0,
        diagonal_argmax: modes.offset(diag.1),
        max_off_diagonal: off.0,
        off_diagonal_argmax: [modes.offset(off.1 .0), modes.offset(off.1 .1)],
        max_deviation,
        fitted_constant: max_deviation * b / spec.n0,
    };

    let position = |offset: i64| (offset - modes.offset(0)) as usize;
    let centre = position(0).min(m - 1);
    let mut entries = vec![(centre, centre), (0, 0)];
    if m > 1 {
        entries.push((centre.saturating_sub(1), centre.saturating_sub(1) + 1));
        entries.push((0, 1));
    }
    entries.push((position(full.diagonal_argmax), position(full.diagonal_argmax)));
    if m > 1 {
        entries.push((position(full.off_diagonal_argmax[0]), position(full.off_diagonal_argmax[1])));
    }
    entries.dedup();

    let comparisons: Vec<EntryComparison> = entries
        .iter()
        .map(|&(i, k)| {
            let est = ensemble.cross_estimate(i, k);
            let quad = table.values[(i, k)];
            let quad_err = table.error_estimates[(i, k)];
            let sigma = est.sigma_re.hypot(quad_err);
            let z = (est.re - quad).abs() / sigma;
            EntryComparison {
                offsets: [modes.offset(i), modes.offset(k)],
                quadrature: quad,
                quadrature_error: quad_err,
                synthesis_re: est.re,
                synthesis_im: est.im,
                bootstrap_sigma: est.sigma_re,
                z,
                agree: z <= SIGMA_THRESHOLD,
            }
        })
        .collect();
    Ok(SynthesisSummary {
        realizations: cfg.realizations,
        full: summary,
        all_agree: comparisons.iter().all(|c| c.agree),
        comparisons,
        max_parseval_defect: ensemble.max_parseval_defect,
    })
}

pub fn appendix_check(cfg: &AppendixCheckConfig) -> Result<AppendixReport> {
    cfg.validate()?;
    let mut bandwidths = cfg.time_bandwidths.clone();
    bandwidths.sort_by(f64::total_cmp);
    let rows = bandwidths
        .iter()
        .map(|&b| appendix_row(cfg, b, cfg.synthesis))
        .collect::<Result<Vec<_>>>()?;
    let decreasing = |f: fn(&AppendixRow) -> f64| rows.windows(2).all(|w| f(&w[1]) < f(&w[0]));
    let deviation_decreasing = decreasing(|r| r.quadrature.max_deviation);
    let interior_decreasing = decreasing(|r| r.quadrature_interior.max_deviation);
    let all_within_limit = rows.iter().all(|r| r.within_limit);
    let interior_within_limit = rows.iter().all(|r| r.interior_within_limit);
    let synthesis_agrees = rows
        .iter()
        .all(|r| r.synthesis.as_ref().is_none_or(|s| s.all_agree));
    let x = |r: &AppendixRow| r.n0 / r.time_bandwidth;
    Ok(AppendixReport {
        fitted_constant: fit(rows.iter().map(|r| (x(r), r.quadrature.max_deviation))),
        interior_fitted_constant: fit(rows.iter().map(|r| (x(r), r.quadrature_interior.max_deviation))),
        pass: deviation_decreasing && all_within_limit && synthesis_agrees,
        deviation_decreasing,
        all_within_limit,
        interior_decreasing,
        interior_within_limit,
        synthesis_agrees,
        rows,
    })
}
