//! Cross-module invariants that need the model gallery: distributional
//! agreement of the two simulation modes, Monte Carlo estimator stability,
//! and conditioning discipline of the experiment gates.

use branchlab::config::ExperimentConfig;
use branchlab::env::sample_env_sequence;
use branchlab::experiments::{run_forward_lln, Verdict};
use branchlab::gallery::{make_example, GALLERY_NAMES};
use branchlab::kernels::Trait;
use branchlab::rng::{aux_rng, replicate_rng};
use branchlab::sim::{simulate, SimMode, SimOptions};
use branchlab::stats::ks_two_sample;
use branchlab::verify::{many_to_one_mc, TraitFn};

/// Explicit and aggregated modes draw litters in different orders (and the
/// symmetric model uses a per-bin multinomial shortcut), but the law of
/// the population size must be the same. Two-sample KS at level 0.01 over
/// 2000 replicates per mode, for every gallery entry at horizon 8.
#[test]
fn explicit_and_aggregated_population_sizes_agree_in_distribution() {
    let horizon = 8;
    let replicates = 2000u64;
    for name in GALLERY_NAMES {
        let entry = make_example(name, &serde_json::Value::Null).unwrap();
        let seq = sample_env_sequence(&entry.env_spec, 31, horizon).unwrap();
        let init = entry.default_init();
        let sample = |mode: SimMode, stream_base: u64| -> Vec<f64> {
            let opts = SimOptions {
                mode,
                ..SimOptions::default()
            };
            (0..replicates)
                .map(|i| {
                    let mut rng = replicate_rng(31, stream_base + i);
                    simulate(&seq, &init, horizon, &entry.model, &opts, &mut rng)
                        .unwrap()
                        .trajectory
                        .final_population() as f64
                })
                .collect()
        };
        let aggregated = sample(SimMode::Aggregated, 0);
        let explicit = sample(SimMode::Explicit, replicates);
        let test = ks_two_sample(&aggregated, &explicit, 0.01);
        assert!(
            test.pass,
            "{name}: KS D = {} > {}",
            test.statistic, test.critical_value
        );
    }
}

/// The Monte Carlo many-to-one estimator is stable under doubling the
/// replicate count: two independent estimates differ by at most three
/// combined standard errors.
#[test]
fn mc_estimator_stable_under_doubling() {
    let entry = make_example("ex3_5", &serde_json::Value::Null).unwrap();
    let seq = sample_env_sequence(&entry.env_spec, 13, 8).unwrap();
    let f = TraitFn::Indicator(branchlab::measure::TargetSet::HalfLine { upper: 0.0 });
    let run = |replicates: u64, seed: u64| {
        let mut rng = aux_rng(seed);
        many_to_one_mc(
            &entry.model,
            &seq,
            8,
            &f,
            Trait::Pos(0.0),
            replicates,
            1 << 22,
            &mut rng,
        )
        .unwrap()
    };
    let small = run(2000, 1);
    let large = run(4000, 2);
    let combined = (small.lhs_se.powi(2) + large.lhs_se.powi(2)).sqrt();
    assert!(
        (small.lhs - large.lhs).abs() <= 3.0 * combined,
        "lhs {} vs {} (combined se {combined})",
        small.lhs,
        large.lhs
    );
    assert!(small.pass && large.pass);
}

/// Gates are void, not failed, when too few replicates survive; and a gate
/// over an all-extinct ensemble is inconclusive rather than an error.
#[test]
fn conditioning_discipline_marks_starved_gates_inconclusive() {
    // Heavy extinction: p_0 = 0.7, p_2 = 0.3 (subcritical, m = 0.6).
    let config: ExperimentConfig = serde_json::from_value(serde_json::json!({
        "model": "ex3_1",
        "params": {"pmf": [0.7, 0.0, 0.3]},
        "n": 12,
        "replicates": 150,
        "seed": 9,
        "targets": [{"type": "symbols", "set": [0]}],
        "tolerance": 0.02
    }))
    .unwrap();
    let out = run_forward_lln(&config).unwrap();
    assert!(out.report.survivors < 50, "survivors {}", out.report.survivors);
    for gate in &out.report.gates {
        assert_eq!(gate.verdict, Verdict::Inconclusive, "{}", gate.name);
    }
    assert!(out.report.all_gates_acceptable());
    // Survival accounting covers every replicate.
    assert_eq!(
        out.report.survivors + out.report.extinct + out.report.truncated,
        150
    );
}

/// Reversibility in law with genuinely random offspring: the normalized
/// size of the backward construction matches the forward one in
/// distribution for an i.i.d. environment whose litters vary.
#[test]
fn backward_w_matches_forward_w_in_law_with_random_offspring() {
    let config: ExperimentConfig = serde_json::from_value(serde_json::json!({
        "model": "ex3_3",
        "n": 10,
        "replicates": 100,
        "seed": 21,
        "targets": [{"type": "symbols", "set": [0]}],
        "tolerance": 0.5,
        "ks_replicates": 2000,
        "ks_level": 0.01
    }))
    .unwrap();
    let out = branchlab::experiments::run_backward_lln(&config).unwrap();
    let ks = out.report.ks.expect("KS requested");
    assert!(
        ks.pass,
        "KS D = {} > {} despite reversibility in law",
        ks.statistic, ks.critical_value
    );
    // The offspring law is genuinely random here (litters of 1 or 2 in one
    // state), so the test is not comparing two point masses.
    assert!(ks.statistic.is_finite());
}

/// With single-child litters the tree degenerates to the auxiliary chain:
/// the mean proportion equals the chain's exact n-step law within three
/// standard errors.
#[test]
fn single_lineage_degenerates_to_the_auxiliary_chain() {
    let config: ExperimentConfig = serde_json::from_value(serde_json::json!({
        "model": "ex3_1",
        "params": {"pmf": [0.0, 1.0]},
        "n": 10,
        "replicates": 2000,
        "seed": 23,
        "targets": [{"type": "symbols", "set": [0]}],
        "tolerance": 0.5
    }))
    .unwrap();
    let out = run_forward_lln(&config).unwrap();
    let row = out.report.rows.last().unwrap();
    let target = row.targets[0];
    // Each replicate contributes a Bernoulli(target) indicator.
    let se = branchlab::stats::binomial_se(target, 2000);
    assert!(
        (row.mean_proportion[0] - target).abs() <= 3.0 * se,
        "mean {} vs exact {}",
        row.mean_proportion[0],
        target
    );
    assert_eq!(out.report.survivors, 2000);
}

/// In a constant environment reversal is the identity: the backward
/// harness reproduces the forward harness row for row under the same seed.
#[test]
fn constant_environment_backward_equals_forward() {
    let base = serde_json::json!({
        "model": "ex3_1",
        "n": 8,
        "replicates": 150,
        "seed": 29,
        "targets": [{"type": "symbols", "set": [0]}],
        "tolerance": 0.1
    });
    let config: ExperimentConfig = serde_json::from_value(base).unwrap();
    let forward = run_forward_lln(&config).unwrap();
    let backward = branchlab::experiments::run_backward_lln(&config).unwrap();
    for (f, b) in forward.report.rows.iter().zip(&backward.report.rows) {
        assert_eq!(f.targets, b.targets);
        assert_eq!(f.mean_proportion, b.mean_proportion);
        assert_eq!(f.median_abs_dev, b.median_abs_dev);
    }
    assert_eq!(
        forward.report.gates[0].observed,
        backward.report.gates[0].observed
    );
}

/// Reports are bit-identical across runs with identical config, including
/// the replicate parallelism degree (summary-level check; the CSV-level
/// check lives in the acceptance suite).
#[test]
fn forward_report_is_reproducible() {
    let config: ExperimentConfig = serde_json::from_value(serde_json::json!({
        "model": "ex3_2",
        "n": 8,
        "replicates": 120,
        "seed": 33,
        "targets": [{"type": "symbols", "set": [0]}],
        "tolerance": 0.1
    }))
    .unwrap();
    let a = run_forward_lln(&config).unwrap();
    let mut config_threads = config.clone();
    config_threads.threads = 3;
    let b = run_forward_lln(&config_threads).unwrap();
    assert_eq!(
        serde_json::to_string(&a.report).unwrap(),
        serde_json::to_string(&b.report).unwrap()
    );
}
