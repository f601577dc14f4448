//! The many-to-one identity: the normalized expected sum of a function
//! over generation n of the tree equals its expectation along the
//! auxiliary chain. Checked two ways — exhaustive enumeration against
//! matrix products for finite alphabets, and Monte Carlo for the
//! branching walk.
//!
//! ```bash
//! cargo run --release --example many_to_one_oracle
//! ```

use branchlab::env::sample_env_sequence;
use branchlab::gallery::make_example;
use branchlab::kernels::Trait;
use branchlab::measure::TargetSet;
use branchlab::rng::aux_rng;
use branchlab::verify::{many_to_one_exact, many_to_one_mc, TraitFn};

fn main() -> branchlab::Result<()> {
    println!("exact route (enumeration vs kernel products), multitype model:");
    let entry = make_example("ex3_3", &serde_json::Value::Null)?;
    let seq = sample_env_sequence(&entry.env_spec, 7, 4)?;
    println!(
        "{:>3} {:>4} {:>22} {:>22} {:>12}",
        "n", "x0", "enumeration", "kernel product", "rel err"
    );
    for n in 0..=3usize {
        for x0 in 0..2 {
            let f = TraitFn::Indicator(TargetSet::Symbols { set: vec![0] });
            let report = many_to_one_exact(&entry.model, &seq, n, &f, x0)?;
            println!(
                "{n:>3} {x0:>4} {:>22.16} {:>22.16} {:>12.3e} {}",
                report.lhs,
                report.rhs,
                report.rel_error,
                if report.pass { "ok" } else { "MISMATCH" }
            );
            assert!(report.pass);
        }
    }

    println!();
    println!("Monte Carlo route, branching walk with normal increments:");
    let walk = make_example("ex3_5", &serde_json::Value::Null)?;
    let seq = sample_env_sequence(&walk.env_spec, 9, 10)?;
    let mut rng = aux_rng(9);
    for (label, f) in [
        ("f = 1 (estimates the mean of W_n)", TraitFn::One),
        (
            "f = 1(-inf, 0]",
            TraitFn::Indicator(TargetSet::HalfLine { upper: 0.0 }),
        ),
    ] {
        let report = many_to_one_mc(
            &walk.model,
            &seq,
            10,
            &f,
            Trait::Pos(0.0),
            5000,
            1 << 22,
            &mut rng,
        )?;
        println!(
            "  {label}: tree side {:.5} vs chain side {:.5} ({})",
            report.lhs,
            report.rhs,
            if report.pass { "within 3 sigma" } else { "OUTSIDE 3 sigma" }
        );
        assert!(report.pass);
    }
    Ok(())
}
