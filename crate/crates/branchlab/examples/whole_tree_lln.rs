//! Law of large numbers on the whole tree: the Cesaro average over
//! generations of the proportion in A converges, with each generation
//! weighted equally. The instance is screened by a Doeblin ratio bound on
//! the one-step kernels, which guarantees the Cesaro limit exists.
//!
//! ```bash
//! cargo run --release --example whole_tree_lln
//! ```

use branchlab::config::ExperimentConfig;
use branchlab::experiments::run_whole_tree_lln;

fn main() -> std::process::ExitCode {
    let config: ExperimentConfig = serde_json::from_value(serde_json::json!({
        "model": "ex3_4",
        "n": 14,
        "replicates": 200,
        "seed": 3,
        "targets": [{"type": "symbols", "set": [0]}],
        "tolerance": 0.03,
        "doeblin_b": 1,
        "doeblin_bound": 10.0
    }))
    .expect("valid config");

    let out = match run_whole_tree_lln(&config) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {e}");
            return std::process::ExitCode::from(2);
        }
    };
    let report = &out.report;
    println!(
        "whole-tree LLN on {} (n = {}, {} replicates)",
        report.model, report.horizon, report.replicates
    );
    let screen = report.doeblin.as_ref().unwrap();
    println!(
        "Doeblin screen: {}-step ratios per window: {:?}",
        screen.step_count,
        screen
            .per_window
            .iter()
            .map(|m| (m * 1000.0).round() / 1000.0)
            .collect::<Vec<_>>()
    );
    println!(
        "Cesaro target over generations 1..={}: {:.6}",
        report.horizon,
        report.cesaro_targets.as_ref().unwrap()[0]
    );
    println!();
    println!("{:>4} {:>12} {:>12} {:>12}", "gen", "target", "mean Z/N", "median |dev|");
    for row in &report.rows {
        println!(
            "{:>4} {:>12.6} {:>12.6} {:>12.6}",
            row.generation, row.targets[0], row.mean_proportion[0], row.median_abs_dev[0]
        );
    }
    println!();
    let mut ok = true;
    for gate in &report.gates {
        println!(
            "[{:?}] {} (observed {:.5}, threshold {:.5})",
            gate.verdict, gate.name, gate.observed, gate.threshold
        );
        ok &= gate.acceptable();
    }
    if ok {
        std::process::ExitCode::SUCCESS
    } else {
        std::process::ExitCode::FAILURE
    }
}
