//! Report serialization: per-generation CSV tables, JSON summaries and the
//! run manifest. CSV bodies are byte-identical across reruns and thread
//! counts; floating-point fields carry 17 significant digits so parsing
//! them back reproduces the exact bit pattern.

use crate::error::{Error, Result};
use crate::experiments::{GateResult, ReplicateRun};
use crate::measure::TargetSet;
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};

/// 17 significant digits: enough to round-trip any f64 exactly.
pub fn format_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

/// Writes a file atomically: temp file in the same directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut file = std::fs::File::create(&tmp)
            .map_err(|e| Error::io(tmp.display().to_string(), e))?;
        file.write_all(bytes)
            .map_err(|e| Error::io(tmp.display().to_string(), e))?;
        file.sync_all()
            .map_err(|e| Error::io(tmp.display().to_string(), e))?;
    }
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Config(format!("serializing report: {e}")))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Per-generation trajectory table. Columns: replicate, generation,
/// env_state_id, N_k, logP_k, W_k, then one proportion column `Z_k(A)/N_k`
/// per configured target set (empty when the generation is extinct).
pub fn trajectory_csv(runs: &[ReplicateRun], targets: &[TargetSet]) -> String {
    let mut out = String::from("replicate,generation,env_state_id,N,logP,W");
    for set in targets {
        out.push(',');
        out.push_str(&sanitize_column(&set.label()));
    }
    out.push('\n');
    for (i, run) in runs.iter().enumerate() {
        for (k, stat) in run.trajectory.stats.iter().enumerate() {
            out.push_str(&format!(
                "{i},{k},{},{},{},{}",
                run.env_ids[k],
                stat.population,
                format_f64(stat.log_p),
                format_f64(stat.w),
            ));
            for &count in &stat.set_counts {
                out.push(',');
                if stat.population > 0 {
                    out.push_str(&format_f64(count as f64 / stat.population as f64));
                }
            }
            out.push('\n');
        }
    }
    out
}

fn sanitize_column(label: &str) -> String {
    label.replace(',', ";")
}

/// Manifest of one command run, written atomically at the end.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub master_seed: u64,
    pub artifact_version: String,
    pub outputs: Vec<String>,
    pub gates: Vec<GateResult>,
    pub all_gates_acceptable: bool,
}

impl RunManifest {
    pub fn new(command: &str, config_hash: String, master_seed: u64) -> Self {
        RunManifest {
            command: command.into(),
            config_hash,
            master_seed,
            artifact_version: env!("CARGO_PKG_VERSION").into(),
            outputs: Vec::new(),
            gates: Vec::new(),
            all_gates_acceptable: true,
        }
    }

    pub fn record_output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    pub fn record_gates(&mut self, gates: &[GateResult]) {
        self.gates.extend_from_slice(gates);
        self.all_gates_acceptable = self.gates.iter().all(GateResult::acceptable);
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("manifest.json");
        write_json(&path, self)?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips_exactly() {
        for &x in &[
            0.1,
            2.0 / 3.0,
            1.0 / 3.0,
            -1.2345678901234567e-200,
            6.02214076e23,
            f64::MIN_POSITIVE,
        ] {
            let s = format_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(format_f64(f64::NAN), "NaN");
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.json");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"two");
        assert!(!path.with_extension("tmp").exists());
    }
}
