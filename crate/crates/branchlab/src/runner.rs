//! Command orchestration: dispatches a parsed config to the experiment
//! harnesses and writes CSV tables, a JSON summary and the run manifest.
//! Exit status 0 means every gate passed or was inconclusive (flagged);
//! any failed gate yields a nonzero status.

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::experiments::{
    run_backward_lln, run_clt, run_coalescence_diagnostic, run_doeblin, run_forward_lln,
    run_simulate, run_verify, run_whole_tree_lln,
};
use crate::measure::TargetSet;
use crate::report::{trajectory_csv, write_atomic, write_json, RunManifest};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Verify,
    LlnForward,
    LlnBackward,
    LlnWholeTree,
    Clt,
    Coalescence,
    Doeblin,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Verify => "verify",
            Command::LlnForward => "lln-forward",
            Command::LlnBackward => "lln-backward",
            Command::LlnWholeTree => "lln-whole-tree",
            Command::Clt => "clt",
            Command::Coalescence => "coalescence",
            Command::Doeblin => "doeblin",
        }
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub manifest: RunManifest,
}

/// Runs one command, writing artifacts under `out_dir`.
pub fn run_command(cmd: Command, cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunOutcome> {
    cfg.validate()?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| crate::error::Error::io(out_dir.display().to_string(), e))?;
    let mut manifest = RunManifest::new(cmd.name(), cfg.hash(), cfg.seed);

    match cmd {
        Command::Simulate => {
            let out = run_simulate(cfg)?;
            write_runs(out_dir, &mut manifest, &out.runs, &cfg.targets)?;
            write_summary(out_dir, &mut manifest, &out.report)?;
        }
        Command::Verify => {
            let report = run_verify(cfg)?;
            write_summary(out_dir, &mut manifest, &report)?;
            if !report.pass {
                manifest.all_gates_acceptable = false;
            }
        }
        Command::LlnForward => {
            let out = run_forward_lln(cfg)?;
            write_runs(out_dir, &mut manifest, &out.runs, &cfg.targets)?;
            manifest.record_gates(&out.report.gates);
            write_summary(out_dir, &mut manifest, &out.report)?;
        }
        Command::LlnBackward => {
            let out = run_backward_lln(cfg)?;
            write_runs(out_dir, &mut manifest, &out.runs, &cfg.targets)?;
            manifest.record_gates(&out.report.gates);
            write_summary(out_dir, &mut manifest, &out.report)?;
        }
        Command::LlnWholeTree => {
            let out = run_whole_tree_lln(cfg)?;
            write_runs(out_dir, &mut manifest, &out.runs, &cfg.targets)?;
            manifest.record_gates(&out.report.gates);
            write_summary(out_dir, &mut manifest, &out.report)?;
        }
        Command::Clt => {
            let out = run_clt(cfg)?;
            let clt_sets: Vec<TargetSet> = out
                .report
                .rows
                .iter()
                .map(|r| TargetSet::HalfLine { upper: r.threshold })
                .collect();
            write_runs(out_dir, &mut manifest, &out.runs, &clt_sets)?;
            manifest.record_gates(&out.report.gates);
            write_summary(out_dir, &mut manifest, &out.report)?;
        }
        Command::Coalescence => {
            let report = run_coalescence_diagnostic(cfg)?;
            manifest.record_gates(&report.gates);
            write_summary(out_dir, &mut manifest, &report)?;
        }
        Command::Doeblin => {
            let report = run_doeblin(cfg)?;
            manifest.record_gates(&report.gates);
            write_summary(out_dir, &mut manifest, &report)?;
        }
    }

    let manifest_path = manifest.write(out_dir)?;
    let _ = manifest_path;
    Ok(RunOutcome {
        exit_code: if manifest.all_gates_acceptable { 0 } else { 1 },
        manifest,
    })
}

fn write_runs(
    out_dir: &Path,
    manifest: &mut RunManifest,
    runs: &[crate::experiments::ReplicateRun],
    targets: &[TargetSet],
) -> Result<()> {
    let path = out_dir.join("trajectories.csv");
    write_atomic(&path, trajectory_csv(runs, targets).as_bytes())?;
    manifest.record_output(&path);
    Ok(())
}

fn write_summary<T: serde::Serialize>(
    out_dir: &Path,
    manifest: &mut RunManifest,
    report: &T,
) -> Result<()> {
    let path = out_dir.join("report.json");
    write_json(&path, report)?;
    manifest.record_output(&path);
    Ok(())
}
