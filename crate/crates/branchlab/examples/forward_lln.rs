//! Forward law of large numbers: conditioned on survival, the proportion
//! of generation-n individuals with trait in A converges to the mass the
//! auxiliary chain puts on A. Here the auxiliary chain is homogeneous, so
//! the limit is the fixed point of its kernel (2/3 for state 0).
//!
//! ```bash
//! cargo run --release --example forward_lln
//! ```

use branchlab::config::ExperimentConfig;
use branchlab::experiments::run_forward_lln;

fn main() -> std::process::ExitCode {
    let config: ExperimentConfig = serde_json::from_value(serde_json::json!({
        "model": "ex3_1",
        "params": {"pmf": [0.0, 0.0, 1.0], "kernel": [[0.9, 0.1], [0.2, 0.8]]},
        "n": 14,
        "replicates": 200,
        "seed": 1,
        "targets": [{"type": "symbols", "set": [0]}],
        "tolerance": 0.02
    }))
    .expect("valid config");

    let out = match run_forward_lln(&config) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {e}");
            return std::process::ExitCode::from(2);
        }
    };
    let report = &out.report;
    println!(
        "forward LLN on {} (n = {}, {} replicates, survival {:.0}%)",
        report.model,
        report.horizon,
        report.replicates,
        100.0 * report.survival_fraction
    );
    println!();
    println!(
        "{:>4} {:>12} {:>12} {:>12} {:>12}",
        "gen", "target", "mean Z/N", "median Z/N", "median |dev|"
    );
    for row in &report.rows {
        println!(
            "{:>4} {:>12.6} {:>12.6} {:>12.6} {:>12.6}",
            row.generation,
            row.targets[0],
            row.mean_proportion[0],
            row.median_proportion[0],
            row.median_abs_dev[0]
        );
    }
    println!();
    for stat in report.l2_form.as_ref().unwrap() {
        println!(
            "L2 form, W proxy at generation {:>2}: mean square {:.3e}",
            stat.w_proxy_gen, stat.mean_square
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
