//! Simulate a branching population in a random environment and print its
//! per-generation statistics.
//!
//! ```bash
//! cargo run --release --example simulate_population
//! ```

use branchlab::env::sample_env_sequence;
use branchlab::gallery::make_example;
use branchlab::measure::TargetSet;
use branchlab::rng::replicate_rng;
use branchlab::sim::{simulate, SimOptions};

fn main() -> branchlab::Result<()> {
    // Two-type process whose offspring law and kernels switch with an
    // i.i.d. two-state environment.
    let entry = make_example("ex3_3", &serde_json::Value::Null)?;
    let n = 12;
    let seq = sample_env_sequence(&entry.env_spec, 42, n)?;
    let init = entry.default_init();
    let opts = SimOptions {
        targets: vec![TargetSet::Symbols { set: vec![0] }],
        ..SimOptions::default()
    };

    println!("environment (state id per generation):");
    let ids: Vec<String> = seq.states().iter().map(|s| s.id.to_string()).collect();
    println!("  {}", ids.join(" "));
    println!();
    println!("{:>4} {:>5} {:>10} {:>10} {:>8} {:>10}", "rep", "gen", "N", "logP", "W", "Z(s0)/N");

    for replicate in 0..3u64 {
        let mut rng = replicate_rng(42, replicate);
        let out = simulate(&seq, &init, n, &entry.model, &opts, &mut rng)?;
        for (gen, stat) in out.trajectory.stats.iter().enumerate() {
            let prop = if stat.population > 0 {
                format!("{:.4}", stat.set_counts[0] as f64 / stat.population as f64)
            } else {
                "-".into()
            };
            println!(
                "{replicate:>4} {gen:>5} {:>10} {:>10.4} {:>8.4} {prop:>10}",
                stat.population, stat.log_p, stat.w
            );
        }
        if let Some(gen) = out.trajectory.extinct_at {
            println!("     replicate {replicate} went extinct at generation {gen}");
        }
        println!();
    }
    Ok(())
}
