//! Batch commands behind the `qcrb` binary.
//!
//! Each command reads one JSON config, calls into the library and writes its
//! report to the output directory. Exit codes: 0 success, 2 configuration or
//! domain error, 3 numerical failure, 4 invariant violation.

pub mod config;
pub mod output;
pub mod plot;

use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{compare_schemes, run_experiment, ExperimentConfig};
use crate::modal::{appendix_check, AppendixCheckConfig};
use crate::qcrb::{bound_grid, bound_summary, qfi_check_report, GridAxis};
use crate::rng::DEFAULT_SEED;
use config::{load, BoundConfig, CompareConfig, PlotConfig, QfiCheckConfig, SimulateConfig};
use plot::{render_svg, PlotData, PlotPoint, PlotSource};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Bound,
    QfiCheck,
    AppendixCheck,
    Simulate,
    Compare,
    Plot,
}

impl Command {
    fn stem(self) -> &'static str {
        match self {
            Command::Bound => "bound",
            Command::QfiCheck => "qfi_check",
            Command::AppendixCheck => "appendix_check",
            Command::Simulate => "simulate",
            Command::Compare => "compare",
            Command::Plot => "plot",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// One invocation of the tool.
#[derive(Debug, Clone, Parser)]
#[command(name = "qcrb", version, about = "Quantum Cramér-Rao limits for thermal-light temperature estimation")]
pub struct RunManifest {
    #[arg(value_enum)]
    pub command: Command,
    /// JSON configuration file.
    #[arg(long = "config")]
    pub config_path: PathBuf,
    /// Directory for report files, created if missing.
    #[arg(long = "out")]
    pub output_dir: PathBuf,
    /// Master seed; overrides any seed in the config. Defaults to 0x5EED0F7E3A2016.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads; does not change any output byte.
    #[arg(long)]
    pub workers: Option<usize>,
}

/// What a successful run wrote, and whether an invariant flag tripped.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub written: Vec<PathBuf>,
    pub violation: Option<String>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.violation.is_some() {
            4
        } else {
            0
        }
    }
}

impl RunManifest {
    fn seed_or(&self, config_seed: Option<u64>) -> u64 {
        self.seed.or(config_seed).unwrap_or(DEFAULT_SEED)
    }

    fn write<T: Serialize, R: Serialize>(&self, report: &T, rows: &[R]) -> Result<PathBuf> {
        let stem = self.command.stem();
        match self.format {
            Format::Json => output::write_json(&self.output_dir, stem, report),
            Format::Csv => output::write_csv(&self.output_dir, stem, rows),
        }
    }
}

fn outcome(written: Vec<PathBuf>, ok: bool, message: impl FnOnce() -> String) -> RunOutcome {
    RunOutcome {
        written,
        violation: (!ok).then(message),
    }
}

/// Runs the manifest on a pool of `workers` threads (default: all cores).
pub fn run(manifest: &RunManifest) -> Result<RunOutcome> {
    std::fs::create_dir_all(&manifest.output_dir)
        .map_err(|e| Error::Config(format!("{}: {e}", manifest.output_dir.display())))?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = manifest.workers {
        if n == 0 {
            return Err(Error::Config("--workers must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| Error::Config(e.to_string()))?;
    pool.install(|| dispatch(manifest))
}

fn dispatch(m: &RunManifest) -> Result<RunOutcome> {
    match m.command {
        Command::Bound => cmd_bound(m),
        Command::QfiCheck => cmd_qfi_check(m),
        Command::AppendixCheck => cmd_appendix_check(m),
        Command::Simulate => cmd_simulate(m),
        Command::Compare => cmd_compare(m),
        Command::Plot => cmd_plot(m),
    }
}

pub fn cmd_bound(m: &RunManifest) -> Result<RunOutcome> {
    let cfg: BoundConfig = load(&m.config_path)?;
    let report = bound_summary(&cfg.spec.build()?, cfg.t_samp, cfg.grid.as_ref())?;
    Ok(outcome(vec![m.write(&report, &report.grid)?], true, String::new))
}

pub fn cmd_qfi_check(m: &RunManifest) -> Result<RunOutcome> {
    let cfg: QfiCheckConfig = load(&m.config_path)?;
    let report = qfi_check_report(&cfg.n0, cfg.cutoff)?;
    let path = m.write(&report, &report.rows)?;
    Ok(outcome(vec![path], report.all_pass, || {
        "QFI check failed for at least one occupation".into()
    }))
}

pub fn cmd_appendix_check(m: &RunManifest) -> Result<RunOutcome> {
    let mut cfg: AppendixCheckConfig = load(&m.config_path)?;
    cfg.master_seed = m.seed_or(Some(cfg.master_seed));
    let report = appendix_check(&cfg)?;
    let path = m.write(&report, &report.rows)?;
    Ok(outcome(vec![path], report.pass, || {
        format!(
            "modal covariance check failed: decreasing {}, within 5n₀/(ΔνT) {}, synthesis agrees {}",
            report.deviation_decreasing, report.all_within_limit, report.synthesis_agrees
        )
    }))
}

pub fn cmd_simulate(m: &RunManifest) -> Result<RunOutcome> {
    let cfg: SimulateConfig = load(&m.config_path)?;
    let experiment = ExperimentConfig {
        t_samp: cfg.t_samp,
        counting_path: cfg.counting_path,
        ..ExperimentConfig::new(cfg.spec.build()?, cfg.kind, cfg.trials, m.seed_or(cfg.master_seed))?
    };
    experiment.validate()?;
    let report = run_experiment(&experiment)?;
    let path = m.write(&report, std::slice::from_ref(&report))?;
    Ok(outcome(vec![path], report.bound_satisfied, || {
        format!("{} beat the quantum Cramér-Rao bound", report.kind.tag())
    }))
}

pub fn cmd_compare(m: &RunManifest) -> Result<RunOutcome> {
    let cfg: CompareConfig = load(&m.config_path)?;
    let report = compare_schemes(
        &cfg.spec.build()?,
        cfg.t_samp,
        &cfg.kinds,
        cfg.trials,
        m.seed_or(cfg.master_seed),
        cfg.counting_path,
    )?;
    #[derive(Serialize)]
    struct Row<'a> {
        bound: &'a crate::qcrb::BoundReport,
        competitors: &'a crate::qcrb::CompetitorCurves,
        simulated: &'a crate::estimators::SensitivityReport,
    }
    let rows: Vec<Row> = report
        .simulated
        .iter()
        .map(|simulated| Row {
            bound: &report.bound,
            competitors: &report.competitors,
            simulated,
        })
        .collect();
    let path = m.write(&report, &rows)?;
    Ok(outcome(vec![path], report.simulated_at_or_above_bound, || {
        "a simulated scheme beat the quantum Cramér-Rao bound".into()
    }))
}

fn resolve(config_path: &Path, report: &Path) -> PathBuf {
    match config_path.parent() {
        Some(dir) if report.is_relative() => dir.join(report),
        _ => report.to_path_buf(),
    }
}

pub fn cmd_plot(m: &RunManifest) -> Result<RunOutcome> {
    let cfg: PlotConfig = load(&m.config_path)?;
    let spec = cfg.spec.build()?;
    let mut points = vec![];
    for report in &cfg.reports {
        let source: PlotSource = load(&resolve(&m.config_path, report))?;
        for r in source.reports() {
            if r.modes != spec.mode_count() {
                return Err(Error::Config(format!(
                    "{}: report has M = {} but the plot is for M = {}",
                    report.display(),
                    r.modes,
                    spec.mode_count()
                )));
            }
            points.push(PlotPoint::from(r));
        }
    }
    let data = PlotData {
        spec,
        curves: bound_grid(&spec, GridAxis::N0, cfg.n0_range[0], cfg.n0_range[1], cfg.points, cfg.t_samp)?,
        all_points_at_or_above_bound: points.iter().all(|p| p.bound_satisfied),
        points,
    };
    let svg = output::write_text(&m.output_dir, "plot.svg", &render_svg(&data))?;
    let table = m.write(&data, &data.points)?;
    Ok(outcome(vec![svg, table], data.all_points_at_or_above_bound, || {
        "a plotted point lies below the bound".into()
    }))
}
