//! Doeblin screening: bounds the ratio of b-step transition probabilities
//! from any two starting traits, window by window along the realized
//! environment. A finite bound certifies the ergodic averaging behind the
//! whole-tree law of large numbers; kernels with disjoint supports fail.
//!
//! ```bash
//! cargo run --release --example doeblin_screen
//! ```

use branchlab::env::sample_env_sequence;
use branchlab::gallery::make_example;
use branchlab::kernels::TraitModel;
use branchlab::matrix::StochasticMatrix;
use branchlab::verify::check_doeblin;

fn main() -> branchlab::Result<()> {
    let entry = make_example("ex3_4", &serde_json::Value::Null)?;
    let seq = sample_env_sequence(&entry.env_spec, 3, 12)?;

    println!("strictly positive kernels (screening instance):");
    for b in 1..=4usize {
        let report = check_doeblin(&entry.model, &seq, b, 10.0)?;
        println!(
            "  b = {b}: max ratio {:.6} over {} windows ({})",
            report.max_ratio,
            report.per_window.len(),
            if report.pass { "pass" } else { "fail" }
        );
    }
    println!("  (the ratio is monotone in b: right-multiplying by a stochastic");
    println!("   kernel can only average row differences away)");

    println!();
    println!("identity kernel (disjoint supports):");
    let identity = TraitModel::SymmetricIndependent {
        base: StochasticMatrix::identity(2),
    };
    let report = check_doeblin(&identity, &seq, 1, 1e12)?;
    println!(
        "  b = 1: max ratio {} ({})",
        report.max_ratio,
        if report.pass { "pass" } else { "fail: a zero mixes with a positive entry" }
    );
    Ok(())
}
