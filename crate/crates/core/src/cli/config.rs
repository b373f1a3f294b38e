//! JSON run configurations. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::estimators::{CountingPath, EstimatorKind, DEFAULT_TRIALS, MIN_TRIALS};
use crate::physics::SourceSpec;
use crate::qcrb::{CutoffPolicy, GridRequest};

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Source inputs; exactly one of `T_s` and `n0` is given.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    #[serde(rename = "T_s", default)]
    pub t_s: Option<f64>,
    #[serde(default)]
    pub n0: Option<f64>,
    pub nu0: f64,
    pub delta_nu: f64,
    #[serde(rename = "T_obs")]
    pub t_obs: f64,
}

impl SourceConfig {
    pub fn build(&self) -> Result<SourceSpec> {
        match (self.t_s, self.n0) {
            (Some(t_s), None) => SourceSpec::from_temperature(t_s, self.nu0, self.delta_nu, self.t_obs),
            (None, Some(n0)) => SourceSpec::from_occupation(n0, self.nu0, self.delta_nu, self.t_obs),
            (Some(_), Some(_)) => Err(Error::Config("give either T_s or n0, not both".into())),
            (None, None) => Err(Error::Config("one of T_s and n0 is required".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundConfig {
    pub spec: SourceConfig,
    #[serde(rename = "T_samp", default)]
    pub t_samp: Option<f64>,
    #[serde(default)]
    pub grid: Option<GridRequest>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QfiCheckConfig {
    #[serde(default = "default_qfi_n0")]
    pub n0: Vec<f64>,
    #[serde(default = "default_cutoff")]
    pub cutoff: CutoffPolicy,
}

fn default_qfi_n0() -> Vec<f64> {
    vec![0.5, 1.0, 5.0, 20.0, 100.0]
}

fn default_cutoff() -> CutoffPolicy {
    CutoffPolicy::Recommended
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub spec: SourceConfig,
    pub kind: EstimatorKind,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub master_seed: Option<u64>,
    #[serde(rename = "T_samp", default)]
    pub t_samp: Option<f64>,
    #[serde(default)]
    pub counting_path: CountingPath,
}

fn default_trials() -> usize {
    DEFAULT_TRIALS
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    pub spec: SourceConfig,
    #[serde(rename = "T_samp")]
    pub t_samp: f64,
    #[serde(default = "default_kinds")]
    pub kinds: Vec<EstimatorKind>,
    #[serde(default = "default_compare_trials")]
    pub trials: usize,
    #[serde(default)]
    pub master_seed: Option<u64>,
    #[serde(default)]
    pub counting_path: CountingPath,
}

fn default_kinds() -> Vec<EstimatorKind> {
    EstimatorKind::ALL.to_vec()
}

fn default_compare_trials() -> usize {
    MIN_TRIALS
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotConfig {
    pub spec: SourceConfig,
    #[serde(rename = "T_samp", default)]
    pub t_samp: Option<f64>,
    #[serde(default = "default_n0_range")]
    pub n0_range: [f64; 2],
    #[serde(default = "default_points")]
    pub points: usize,
    /// Simulate or compare reports, relative to the config file.
    #[serde(default)]
    pub reports: Vec<PathBuf>,
}

fn default_n0_range() -> [f64; 2] {
    [0.1, 1000.0]
}

fn default_points() -> usize {
    200
}

#[cfg(test)]
mod tests {
    use super::*;

    fn source(extra: &str) -> String {
        format!(r#"{{"nu0": 1e9, "delta_nu": 1e6, "T_obs": 1e-4{extra}}}"#)
    }

    #[test]
    fn source_needs_exactly_one_of_temperature_and_occupation() {
        let both: SourceConfig = serde_json::from_str(&source(r#", "n0": 1, "T_s": 3"#)).unwrap();
        assert!(matches!(both.build(), Err(Error::Config(_))));
        let neither: SourceConfig = serde_json::from_str(&source("")).unwrap();
        assert!(matches!(neither.build(), Err(Error::Config(_))));
        let n0: SourceConfig = serde_json::from_str(&source(r#", "n0": 1"#)).unwrap();
        assert_eq!(n0.build().unwrap().mode_count(), 100);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<SourceConfig>(&source(r#", "n0": 1, "nu": 2"#)).is_err());
        let bad = format!(r#"{{"spec": {}, "kind": "photon_counting", "trails": 1000}}"#, source(r#", "n0": 1"#));
        assert!(serde_json::from_str::<SimulateConfig>(&bad).is_err());
    }

    #[test]
    fn defaults_fill_in() {
        let q: QfiCheckConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(q.n0, vec![0.5, 1.0, 5.0, 20.0, 100.0]);
        assert_eq!(q.cutoff, CutoffPolicy::Recommended);
        let fixed: QfiCheckConfig = serde_json::from_str(r#"{"n0": [5], "cutoff": {"fixed": 4}}"#).unwrap();
        assert_eq!(fixed.cutoff, CutoffPolicy::Fixed(4));
        let c: CompareConfig =
            serde_json::from_str(&format!(r#"{{"spec": {}, "T_samp": 1e-9}}"#, source(r#", "n0": 1"#))).unwrap();
        assert_eq!(c.kinds.len(), 3);
        assert_eq!(c.trials, MIN_TRIALS);
    }
}
