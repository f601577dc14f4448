//! Experiment configuration: JSON schema, validation and hashing.

use crate::error::{Error, Result};
use crate::measure::TargetSet;
use crate::sim::{SimMode, DEFAULT_CAP, DEFAULT_NODE_BUDGET};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Statistical gates need at least this many replicates.
pub const MIN_REPLICATES: u64 = 100;

/// Gates are void below this many surviving replicates.
pub const MIN_SURVIVORS: u64 = 50;

fn default_cap() -> u64 {
    DEFAULT_CAP
}
fn default_node_budget() -> u64 {
    DEFAULT_NODE_BUDGET
}
fn default_tolerance() -> f64 {
    0.02
}
fn default_threads() -> usize {
    1
}
fn default_mode() -> SimMode {
    SimMode::Aggregated
}
fn default_y_grid() -> Vec<f64> {
    vec![-2.0, -1.0, 0.0, 1.0, 2.0]
}
fn default_diag_horizon() -> usize {
    100
}
fn default_diag_tolerance() -> f64 {
    0.02
}
fn default_ks_level() -> f64 {
    0.01
}
fn default_doeblin_b() -> usize {
    1
}
fn default_doeblin_bound() -> f64 {
    10.0
}
fn default_pairs() -> u64 {
    10_000
}

/// One experiment: which gallery model, at what scale, with which gates.
/// Unknown keys are rejected at parse time.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Gallery entry name (`ex2_1`, `ex3_1`, ..., `ex3_6`).
    pub model: String,
    /// Model-specific parameters; `null` means entry defaults.
    #[serde(default)]
    pub params: serde_json::Value,
    /// Horizon (generations).
    pub n: usize,
    pub replicates: u64,
    pub seed: u64,
    /// Sets the occupation measure is evaluated on.
    #[serde(default)]
    pub targets: Vec<TargetSet>,
    #[serde(default = "default_cap")]
    pub cap: u64,
    #[serde(default = "default_node_budget")]
    pub node_budget: u64,
    /// Burn-in generation for the limit proxy `W_m`; `null` means `n / 2`.
    #[serde(default)]
    pub burn_in: Option<usize>,
    /// Gate tolerance on median absolute deviations.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_mode")]
    pub mode: SimMode,
    /// Worker threads for the replicate ensemble; never affects results.
    #[serde(default = "default_threads")]
    pub threads: usize,
    /// Redraw the environment per replicate. The limit statements are
    /// quenched; annealed runs are labeled as such in reports.
    #[serde(default)]
    pub annealed: bool,

    /// CLT harness: grid of standardized thresholds.
    #[serde(default = "default_y_grid")]
    pub y_grid: Vec<f64>,
    /// Horizon for the normalizer-stability diagnostics.
    #[serde(default = "default_diag_horizon")]
    pub diag_horizon: usize,
    #[serde(default = "default_diag_tolerance")]
    pub diag_tolerance: f64,

    /// Backward harness: sample size for the distribution-equality test of
    /// the normalized sizes (0 skips the test).
    #[serde(default)]
    pub ks_replicates: u64,
    #[serde(default = "default_ks_level")]
    pub ks_level: f64,

    /// Doeblin screen: window length and ratio bound.
    #[serde(default = "default_doeblin_b")]
    pub doeblin_b: usize,
    #[serde(default = "default_doeblin_bound")]
    pub doeblin_bound: f64,

    /// Coalescence diagnostic: sampled pair count.
    #[serde(default = "default_pairs")]
    pub pairs: u64,
}

impl ExperimentConfig {
    /// Burn-in generation, defaulting to half the horizon.
    pub fn burn_in_gen(&self) -> usize {
        self.burn_in.unwrap_or(self.n / 2)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Config(format!(
                "n: horizon {} must be >= 2",
                self.n
            )));
        }
        if self.replicates < MIN_REPLICATES {
            return Err(Error::Config(format!(
                "replicates: {} below the minimum {MIN_REPLICATES} required for statistical gates",
                self.replicates
            )));
        }
        for (name, value) in [
            ("tolerance", self.tolerance),
            ("diag_tolerance", self.diag_tolerance),
            ("doeblin_bound", self.doeblin_bound),
        ] {
            if value.is_nan() || value <= 0.0 {
                return Err(Error::Config(format!(
                    "{name}: {value} must be > 0"
                )));
            }
        }
        if self.ks_level.is_nan() || self.ks_level <= 0.0 || self.ks_level >= 1.0 {
            return Err(Error::Config(format!(
                "ks_level: {} must lie in (0, 1)",
                self.ks_level
            )));
        }
        if self.cap == 0 {
            return Err(Error::Config("cap: must be positive".into()));
        }
        if let Some(m) = self.burn_in {
            if m > self.n {
                return Err(Error::Config(format!(
                    "burn_in: {m} exceeds horizon {}",
                    self.n
                )));
            }
        }
        if self.doeblin_b == 0 || self.doeblin_b > self.n {
            return Err(Error::Config(format!(
                "doeblin_b: {} out of range 1..={}",
                self.doeblin_b, self.n
            )));
        }
        if self.pairs == 0 {
            return Err(Error::Config("pairs: must be positive".into()));
        }
        if self.threads == 0 {
            return Err(Error::Config("threads: must be positive".into()));
        }
        Ok(())
    }

    /// Stable hash of the effective configuration: SHA-256 over the
    /// canonical JSON serialization, so identical config text hashes
    /// identically on every platform. The thread count is normalized out:
    /// it schedules work but never changes results.
    pub fn hash(&self) -> String {
        let mut normalized = self.clone();
        normalized.threads = 1;
        let canonical = serde_json::to_string(&normalized).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Loads and validates a config file.
pub fn parse_config(path: &std::path::Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    let cfg: ExperimentConfig = serde_json::from_str(&text).map_err(|e| Error::ConfigFile {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> serde_json::Value {
        serde_json::json!({
            "model": "ex3_1",
            "n": 10,
            "replicates": 200,
            "seed": 1
        })
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg: ExperimentConfig = serde_json::from_value(minimal()).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.cap, 10_000_000);
        assert_eq!(cfg.burn_in_gen(), 5);
        assert_eq!(cfg.threads, 1);
        assert!(matches!(cfg.mode, SimMode::Aggregated));
    }

    #[test]
    fn too_few_replicates_are_rejected() {
        let mut v = minimal();
        v["replicates"] = serde_json::json!(10);
        let cfg: ExperimentConfig = serde_json::from_value(v).unwrap();
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("replicates"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut v = minimal();
        v["horizon"] = serde_json::json!(5);
        let err = serde_json::from_value::<ExperimentConfig>(v).unwrap_err();
        assert!(err.to_string().contains("horizon"));
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a: ExperimentConfig = serde_json::from_value(minimal()).unwrap();
        let b: ExperimentConfig = serde_json::from_value(minimal()).unwrap();
        assert_eq!(a.hash(), b.hash());
        let mut v = minimal();
        v["seed"] = serde_json::json!(2);
        let c: ExperimentConfig = serde_json::from_value(v).unwrap();
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn zero_tolerance_is_rejected_up_front() {
        let mut v = minimal();
        v["tolerance"] = serde_json::json!(0.0);
        let cfg: ExperimentConfig = serde_json::from_value(v).unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, serde_json::to_string_pretty(&minimal()).unwrap()).unwrap();
        let cfg = parse_config(&path).unwrap();
        assert_eq!(cfg.model, "ex3_1");
        assert!(parse_config(&dir.path().join("missing.json")).is_err());
    }
}
