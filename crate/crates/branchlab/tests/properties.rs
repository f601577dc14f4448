//! Property tests over randomized environments, kernels and offspring laws.

use branchlab::env::{reverse_env, shift_env, EnvSequence, EnvState};
use branchlab::kernels::{build_aux_kernel, Distribution, TraitModel};
use branchlab::matrix::StochasticMatrix;
use branchlab::measure::TargetSet;
use branchlab::rng::replicate_rng;
use branchlab::sim::{simulate, SimOptions};
use proptest::prelude::*;

/// Normalized probability vector of length 2..=4 (entries bounded away
/// from degenerate all-zero draws).
fn pmf_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, 2..=4).prop_map(|raw| {
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|w| w / total).collect()
    })
}

fn kernel_strategy(dim: usize) -> impl Strategy<Value = StochasticMatrix> {
    prop::collection::vec(prop::collection::vec(0.01f64..1.0, dim), dim).prop_map(|rows| {
        let rows = rows
            .into_iter()
            .map(|row| {
                let total: f64 = row.iter().sum();
                row.into_iter().map(|w| w / total).collect()
            })
            .collect();
        StochasticMatrix::new(rows).expect("normalized rows")
    })
}

fn states_strategy() -> impl Strategy<Value = Vec<EnvState>> {
    prop::collection::vec(pmf_strategy(), 1..=6).prop_map(|pmfs| {
        pmfs.into_iter()
            .enumerate()
            .map(|(id, pmf)| EnvState::new(id, pmf).expect("normalized pmf"))
            .collect()
    })
}

proptest! {
    #[test]
    fn reverse_is_an_involution_preserving_total_mean(states in states_strategy()) {
        let seq = EnvSequence::from_states(states);
        let rev = reverse_env(&seq);
        prop_assert_eq!(reverse_env(&rev), seq.clone());
        let n = seq.len();
        prop_assert!((rev.log_p(n) - seq.log_p(n)).abs() <= 1e-9 * n as f64);
    }

    #[test]
    fn shift_composes_additively(states in states_strategy(), a in 0usize..4, b in 0usize..4) {
        let seq = EnvSequence::from_states(states);
        let (a, b) = (a.min(seq.len()), b);
        let once = shift_env(&seq, a).unwrap();
        if a + b <= seq.len() {
            let twice = shift_env(&once, b).unwrap();
            prop_assert_eq!(twice, shift_env(&seq, a + b).unwrap());
        }
    }

    #[test]
    fn cumulative_log_means_match_direct_products(states in states_strategy()) {
        let seq = EnvSequence::from_states(states);
        let mut product = 1.0f64;
        for k in 0..seq.len() {
            product *= seq.state(k).mean();
            let rel = (seq.log_p(k + 1).exp() - product).abs() / product;
            prop_assert!(rel < 1e-10, "generation {}: rel {}", k, rel);
        }
    }

    #[test]
    fn auxiliary_kernel_rows_are_stochastic(
        pmf in pmf_strategy(),
        base in kernel_strategy(3),
    ) {
        let state = EnvState::new(0, pmf).unwrap();
        if state.mean() == 0.0 {
            return Ok(());
        }
        let kernel = build_aux_kernel(&state, &TraitModel::SymmetricIndependent { base }).unwrap();
        for sum in kernel.exact().unwrap().row_sums() {
            prop_assert!((sum - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn trajectories_are_absorbing_consistent_and_deterministic(
        pmf in pmf_strategy(),
        base in kernel_strategy(2),
        seed in 0u64..1000,
    ) {
        let state = EnvState::new(0, pmf).unwrap();
        let seq = EnvSequence::from_states(vec![state; 6]);
        let model = TraitModel::SymmetricIndependent { base };
        let init = Distribution::point_mass_symbol(0, 2);
        let opts = SimOptions {
            cap: 100_000,
            targets: vec![TargetSet::Symbols { set: vec![0, 1] }],
            ..SimOptions::default()
        };
        let run = |rng_seed: u64| {
            let mut rng = replicate_rng(rng_seed, 0);
            simulate(&seq, &init, 6, &model, &opts, &mut rng).unwrap()
        };
        let out = run(seed);
        let again = run(seed);

        let mut seen_zero = false;
        for (k, stat) in out.trajectory.stats.iter().enumerate() {
            // Extinction is absorbing and the extinct_at marker agrees.
            if seen_zero {
                prop_assert_eq!(stat.population, 0);
            }
            if stat.population == 0 && !seen_zero {
                seen_zero = true;
                prop_assert_eq!(out.trajectory.extinct_at, Some(k));
            }
            prop_assert!(stat.w >= 0.0);
            // The whole-alphabet target set counts everyone.
            prop_assert_eq!(stat.set_counts[0], stat.population);
            // Identical seeds give identical rows.
            let twin = &again.trajectory.stats[k];
            prop_assert_eq!(stat.population, twin.population);
            prop_assert_eq!(stat.w.to_bits(), twin.w.to_bits());
        }
        prop_assert_eq!(out.trajectory.extinct_at.is_some(), seen_zero);
    }

    #[test]
    fn coalescence_tails_are_monotone(seed in 0u64..300) {
        let state = EnvState::new(0, vec![0.0, 0.5, 0.5]).unwrap();
        let seq = EnvSequence::from_states(vec![state; 6]);
        let model = TraitModel::SymmetricIndependent {
            base: StochasticMatrix::identity(2),
        };
        let init = Distribution::point_mass_symbol(0, 2);
        let opts = SimOptions {
            mode: branchlab::sim::SimMode::Explicit,
            ..SimOptions::default()
        };
        let mut rng = replicate_rng(seed, 0);
        let out = simulate(&seq, &init, 6, &model, &opts, &mut rng).unwrap();
        if !out.trajectory.survived(6) {
            return Ok(());
        }
        let tree = out.tree.unwrap();
        let hist =
            branchlab::sim::coalescence_samples(&tree, 6, 500, &mut rng).unwrap();
        let probs = hist.probabilities();
        prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for k in 0..6 {
            prop_assert!(hist.tail_ge(k) + 1e-15 >= hist.tail_ge(k + 1));
        }
    }
}
