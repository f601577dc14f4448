//! Backward law of large numbers: reproduction at generation r uses the
//! environment component xi_{n-r-1}, and the final proportions target the
//! reversed kernel product. For an i.i.d. environment the construction is
//! reversible in law, so the normalized size of the backward population
//! matches the forward one in distribution — checked with a two-sample KS
//! test.
//!
//! ```bash
//! cargo run --release --example backward_lln
//! ```

use branchlab::config::ExperimentConfig;
use branchlab::experiments::run_backward_lln;

fn main() -> std::process::ExitCode {
    // Two environment states, both with two children per individual, but
    // with very different trait kernels: the chain is genuinely
    // time-inhomogeneous and only the backward products converge.
    let config: ExperimentConfig = serde_json::from_value(serde_json::json!({
        "model": "ex3_3",
        "params": {
            "pmfs": [[0.0, 0.0, 1.0], [0.0, 0.0, 1.0]],
            "kernels": [[[0.9, 0.1], [0.2, 0.8]], [[0.3, 0.7], [0.6, 0.4]]]
        },
        "n": 14,
        "replicates": 200,
        "seed": 2,
        "targets": [{"type": "symbols", "set": [0]}],
        "tolerance": 0.02,
        "ks_replicates": 2000,
        "ks_level": 0.01
    }))
    .expect("valid config");

    let out = match run_backward_lln(&config) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {e}");
            return std::process::ExitCode::from(2);
        }
    };
    let report = &out.report;
    println!(
        "backward LLN on {} (n = {}, {} replicates)",
        report.model, report.horizon, report.replicates
    );
    println!();
    println!(
        "{:>4} {:>14} {:>14} {:>14}",
        "gen", "bwd target", "mean Z/N", "median |dev|"
    );
    for row in &report.rows {
        println!(
            "{:>4} {:>14.6} {:>14.6} {:>14.6}",
            row.generation, row.targets[0], row.mean_proportion[0], row.median_abs_dev[0]
        );
    }
    if let Some(ks) = &report.ks {
        println!();
        println!(
            "distribution equality of W_n (backward vs forward, {} samples each):",
            ks.sample_size
        );
        println!(
            "  KS D = {:.5}, critical value {:.5} at level {}",
            ks.statistic, ks.critical_value, ks.level
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
