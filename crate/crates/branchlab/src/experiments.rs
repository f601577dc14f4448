//! Limit-theorem harnesses: desk-scale statistical experiments with
//! explicit pass/fail gates. Every gate compares a simulated statistic
//! against an independently computed target (exact matrix products, fixed
//! points, or closed forms) — never simulation against simulation through
//! the same code path.
//!
//! All experiments are quenched by default: one environment realization is
//! fixed from the seed and only branching randomness varies across
//! replicates. The `annealed` toggle redraws the environment per replicate
//! and is labeled as such in reports.
//!
//! Stream allocation: replicate `i` of the main ensemble draws from
//! replicate stream `i`; the distribution-equality check of the backward
//! harness uses streams `R + i` (forward sample) and `R + K + i` (backward
//! sample) so no ensemble shares a stream.

use crate::config::{ExperimentConfig, MIN_SURVIVORS};
use crate::env::{sample_env_sequence, EnvSequence};
use crate::error::{Error, Result};
use crate::gallery::{make_example, CltRecipe, GalleryEntry};
use crate::kernels::{exact_kernels, Distribution, TraitModel};
use crate::measure::TargetSet;
use crate::rng::{derived_seed, replicate_rng};
use crate::sim::{
    coalescence_samples, exact_coalescence_distribution, simulate, CoalescenceHistogram,
    SimMode, SimOptions, Trajectory,
};
use crate::stats;
use crate::verify::{check_doeblin, many_to_one_exact, many_to_one_mc, DoeblinReport, OracleReport, TraitFn};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Not enough surviving replicates to judge; not a failure.
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct GateResult {
    pub name: String,
    pub observed: f64,
    pub threshold: f64,
    pub verdict: Verdict,
}

impl GateResult {
    fn judge(name: impl Into<String>, observed: f64, threshold: f64, conclusive: bool) -> Self {
        let verdict = if !conclusive {
            Verdict::Inconclusive
        } else if observed.is_finite() && observed <= threshold {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        GateResult {
            name: name.into(),
            observed,
            threshold,
            verdict,
        }
    }

    pub fn acceptable(&self) -> bool {
        !matches!(self.verdict, Verdict::Fail)
    }
}

/// One replicate of an ensemble, with the environment it ran under.
#[derive(Debug, Clone)]
pub struct ReplicateRun {
    pub trajectory: Trajectory,
    /// Environment state id per generation row (last row repeats the final
    /// component).
    pub env_ids: Vec<usize>,
    /// Per-generation, per-set targets of this replicate's own environment;
    /// present only in annealed runs.
    own_targets: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GenerationRow {
    pub generation: usize,
    pub survivors: u64,
    pub targets: Vec<f64>,
    pub mean_proportion: Vec<f64>,
    pub median_proportion: Vec<f64>,
    pub median_abs_dev: Vec<f64>,
    pub dev_q90: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct L2Stat {
    pub set: String,
    pub w_proxy_gen: usize,
    pub mean_square: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct KsSummary {
    pub statistic: f64,
    pub critical_value: f64,
    pub level: f64,
    pub sample_size: u64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub experiment: String,
    pub model: String,
    pub quenched: bool,
    pub horizon: usize,
    pub replicates: u64,
    pub survivors: u64,
    pub survival_fraction: f64,
    pub extinct: u64,
    pub truncated: u64,
    pub set_labels: Vec<String>,
    pub rows: Vec<GenerationRow>,
    pub gates: Vec<GateResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l2_form: Option<Vec<L2Stat>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ks: Option<KsSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub doeblin: Option<DoeblinReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cesaro_targets: Option<Vec<f64>>,
    pub notes: Vec<String>,
}

impl ConvergenceReport {
    pub fn all_gates_acceptable(&self) -> bool {
        self.gates.iter().all(GateResult::acceptable)
    }
}

/// Report plus the raw runs (for CSV export).
#[derive(Debug)]
pub struct LlnOutput {
    pub report: ConvergenceReport,
    pub runs: Vec<ReplicateRun>,
}

/// Runs `f` for each replicate on a dedicated thread pool. Results come
/// back in replicate order, so aggregation is independent of scheduling.
fn run_ensemble<T, F>(threads: usize, replicates: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Send + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| (0..replicates).into_par_iter().map(f).collect())
}

/// Exact per-generation target masses `nu Q_0 ... Q_{k-1}(A)` for
/// `k = 0..=n`, one row per generation.
fn target_table(
    init: &Distribution,
    seq: &EnvSequence,
    model: &TraitModel,
    n: usize,
    targets: &[TargetSet],
) -> Result<Vec<Vec<f64>>> {
    let kernels = exact_kernels(seq, model)?;
    let mut dist = init.finite_masses()?.to_vec();
    let mut table = Vec::with_capacity(n + 1);
    let row = |d: &[f64]| -> Vec<f64> {
        let dist = Distribution::Finite(d.to_vec());
        targets.iter().map(|a| dist.mass_in(a)).collect()
    };
    table.push(row(&dist));
    for q in kernels[..n].iter() {
        dist = q.apply_left(&dist);
        table.push(row(&dist));
    }
    Ok(table)
}

fn env_ids(seq: &EnvSequence, n: usize) -> Vec<usize> {
    (0..=n)
        .map(|k| seq.state(k.min(n.saturating_sub(1))).id)
        .collect()
}

fn normalized_count(count: u64, log_p: f64) -> f64 {
    if count == 0 {
        0.0
    } else {
        ((count as f64).ln() - log_p).exp()
    }
}

struct EnsembleStats {
    rows: Vec<GenerationRow>,
    survivors: u64,
    extinct: u64,
    truncated: u64,
    /// `[set][surviving replicate]`: |Z_n(A)/N_n - target_n(A)|.
    final_devs: Vec<Vec<f64>>,
    /// `[set][surviving replicate]`: |(1/n) sum_k Z_k/N_k - Cesaro target|.
    cesaro_devs: Vec<Vec<f64>>,
    cesaro_targets: Vec<f64>,
}

fn aggregate(runs: &[ReplicateRun], table: &[Vec<f64>], n: usize, set_count: usize) -> EnsembleStats {
    let survivors: Vec<&ReplicateRun> = runs.iter().filter(|r| r.trajectory.survived(n)).collect();
    let extinct = runs
        .iter()
        .filter(|r| !r.trajectory.truncated && r.trajectory.extinct_at.is_some())
        .count() as u64;
    let truncated = runs.iter().filter(|r| r.trajectory.truncated).count() as u64;

    let target_at = |run: &ReplicateRun, k: usize, a: usize| -> f64 {
        run.own_targets
            .as_ref()
            .map_or(table[k][a], |own| own[k][a])
    };

    let mut rows = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let mut mean_p = Vec::with_capacity(set_count);
        let mut median_p = Vec::with_capacity(set_count);
        let mut med_dev = Vec::with_capacity(set_count);
        let mut q90 = Vec::with_capacity(set_count);
        for a in 0..set_count {
            let props: Vec<f64> = survivors
                .iter()
                .map(|r| {
                    let s = &r.trajectory.stats[k];
                    s.set_counts[a] as f64 / s.population as f64
                })
                .collect();
            let devs: Vec<f64> = survivors
                .iter()
                .zip(&props)
                .map(|(r, &p)| (p - target_at(r, k, a)).abs())
                .collect();
            mean_p.push(stats::mean(&props));
            median_p.push(stats::median(&props));
            med_dev.push(stats::median(&devs));
            q90.push(stats::quantile(&devs, 0.9));
        }
        rows.push(GenerationRow {
            generation: k,
            survivors: survivors.len() as u64,
            targets: table[k].clone(),
            mean_proportion: mean_p,
            median_proportion: median_p,
            median_abs_dev: med_dev,
            dev_q90: q90,
        });
    }

    let mut final_devs = vec![Vec::new(); set_count];
    let mut cesaro_devs = vec![Vec::new(); set_count];
    let cesaro_targets: Vec<f64> = (0..set_count)
        .map(|a| (1..=n).map(|k| table[k][a]).sum::<f64>() / n as f64)
        .collect();
    for run in &survivors {
        for a in 0..set_count {
            let s = &run.trajectory.stats[n];
            let prop = s.set_counts[a] as f64 / s.population as f64;
            final_devs[a].push((prop - target_at(run, n, a)).abs());

            let cesaro: f64 = (1..=n)
                .map(|k| {
                    let s = &run.trajectory.stats[k];
                    s.set_counts[a] as f64 / s.population as f64
                })
                .sum::<f64>()
                / n as f64;
            let cesaro_target = match &run.own_targets {
                Some(own) => (1..=n).map(|k| own[k][a]).sum::<f64>() / n as f64,
                None => cesaro_targets[a],
            };
            cesaro_devs[a].push((cesaro - cesaro_target).abs());
        }
    }

    EnsembleStats {
        rows,
        survivors: survivors.len() as u64,
        extinct,
        truncated,
        final_devs,
        cesaro_devs,
        cesaro_targets,
    }
}

/// Shared scaffolding: quenched environment, exact target table, replicate
/// ensemble. `backward` runs each replicate under the time-reversed
/// environment (and targets against the reversed products).
fn run_lln_ensemble(
    cfg: &ExperimentConfig,
    entry: &GalleryEntry,
    backward: bool,
) -> Result<(EnsembleStats, Vec<ReplicateRun>, Vec<Vec<f64>>)> {
    if cfg.targets.is_empty() {
        return Err(Error::Config(
            "targets: at least one target set is required".into(),
        ));
    }
    let init = entry.default_init();
    let n = cfg.n;
    let base_seq = sample_env_sequence(&entry.env_spec, cfg.seed, n)?;
    let effective = |seq: &EnvSequence| -> EnvSequence {
        if backward {
            crate::env::reverse_env(seq)
        } else {
            seq.clone()
        }
    };
    let quenched_eff = effective(&base_seq);
    let table = target_table(&init, &quenched_eff, &entry.model, n, &cfg.targets)?;

    let opts = SimOptions {
        mode: cfg.mode,
        cap: cfg.cap,
        node_budget: cfg.node_budget,
        targets: cfg.targets.clone(),
        record_measures: false,
    };
    let runs = run_ensemble(cfg.threads, cfg.replicates, |i| {
        let mut rng = replicate_rng(cfg.seed, i);
        let (seq_i, own_targets) = if cfg.annealed {
            let drawn = sample_env_sequence(&entry.env_spec, derived_seed(cfg.seed, i), n)?;
            let eff = effective(&drawn);
            let own = target_table(&init, &eff, &entry.model, n, &cfg.targets)?;
            (eff, Some(own))
        } else {
            (quenched_eff.clone(), None)
        };
        let out = simulate(&seq_i, &init, n, &entry.model, &opts, &mut rng)?;
        Ok(ReplicateRun {
            trajectory: out.trajectory,
            env_ids: env_ids(&seq_i, n),
            own_targets,
        })
    })?;
    let stats = aggregate(&runs, &table, n, cfg.targets.len());
    Ok((stats, runs, table))
}

fn survival_fraction(survivors: u64, replicates: u64) -> f64 {
    survivors as f64 / replicates as f64
}

/// Forward law of large numbers in generation `n`: conditioned proportions
/// against the exact forward product targets, plus the L2-form statistic
/// `(Z_n(A)/P_n - mu_n(A) W_m)^2` with the burn-in proxy for the limit of
/// the normalized sizes.
pub fn run_forward_lln(cfg: &ExperimentConfig) -> Result<LlnOutput> {
    cfg.validate()?;
    let entry = make_example(&cfg.model, &cfg.params)?;
    if !entry.model.is_finite() {
        return Err(Error::UnsupportedExact(
            "the forward harness needs a finite alphabet for its exact targets".into(),
        ));
    }
    let (agg, runs, table) = run_lln_ensemble(cfg, &entry, false)?;
    let n = cfg.n;
    let conclusive = agg.survivors >= MIN_SURVIVORS;

    let mut gates = Vec::new();
    for (a, set) in cfg.targets.iter().enumerate() {
        gates.push(GateResult::judge(
            format!("forward median |Z_n{}/N_n - target|", set.label()),
            stats::median(&agg.final_devs[a]),
            cfg.tolerance,
            conclusive,
        ));
    }

    // Theorem-form L2 statistic at the burn-in proxy and two flanking
    // choices, to show sensitivity to the proxy generation.
    let mut l2 = Vec::new();
    let burn = cfg.burn_in_gen().max(1);
    for m in [burn / 2, burn, n] {
        let m = m.clamp(1, n);
        for (a, set) in cfg.targets.iter().enumerate() {
            let values: Vec<f64> = runs
                .iter()
                .filter(|r| !r.trajectory.truncated)
                .map(|r| {
                    let target = r
                        .own_targets
                        .as_ref()
                        .map_or(table[n][a], |own| own[n][a]);
                    let s = &r.trajectory.stats[n];
                    let z_over_p = normalized_count(s.set_counts[a], s.log_p);
                    let d = z_over_p - target * r.trajectory.w_at(m);
                    d * d
                })
                .collect();
            l2.push(L2Stat {
                set: set.label(),
                w_proxy_gen: m,
                mean_square: stats::mean(&values),
            });
        }
    }

    let mut notes = Vec::new();
    if cfg.annealed {
        notes.push(
            "annealed run: environment redrawn per replicate; the limit statements are quenched"
                .into(),
        );
    }
    let report = ConvergenceReport {
        experiment: "lln-forward".into(),
        model: entry.name.clone(),
        quenched: !cfg.annealed,
        horizon: n,
        replicates: cfg.replicates,
        survivors: agg.survivors,
        survival_fraction: survival_fraction(agg.survivors, cfg.replicates),
        extinct: agg.extinct,
        truncated: agg.truncated,
        set_labels: cfg.targets.iter().map(TargetSet::label).collect(),
        rows: agg.rows,
        gates,
        l2_form: Some(l2),
        ks: None,
        doeblin: None,
        cesaro_targets: None,
        notes,
    };
    Ok(LlnOutput { report, runs })
}

/// Backward law of large numbers: generation `r` reproduces under
/// `xi_{n-r-1}` and the final proportions are gated against the reversed
/// kernel product. Optionally checks that the normalized sizes of the
/// backward and forward constructions agree in distribution (valid because
/// constant and i.i.d. environments are reversible in law).
pub fn run_backward_lln(cfg: &ExperimentConfig) -> Result<LlnOutput> {
    cfg.validate()?;
    let entry = make_example(&cfg.model, &cfg.params)?;
    if !entry.model.is_finite() {
        return Err(Error::UnsupportedExact(
            "the backward harness needs a finite alphabet for its exact targets".into(),
        ));
    }
    for state in entry.env_spec.states() {
        let mean = state.mean();
        if mean <= 1.0 {
            return Err(Error::SubcriticalState {
                state: state.id,
                mean,
            });
        }
    }
    if !entry.env_spec.reversible_in_law() {
        return Err(Error::Config(
            "backward harness: the probability-form gate needs an environment that is \
             reversible in law (constant or i.i.d. mode)"
                .into(),
        ));
    }

    let (agg, runs, _) = run_lln_ensemble(cfg, &entry, true)?;
    let n = cfg.n;
    let conclusive = agg.survivors >= MIN_SURVIVORS;

    let mut gates = Vec::new();
    for (a, set) in cfg.targets.iter().enumerate() {
        gates.push(GateResult::judge(
            format!("backward median |Z_n{}/N_n - reversed-product target|", set.label()),
            stats::median(&agg.final_devs[a]),
            cfg.tolerance,
            conclusive,
        ));
    }

    // Distribution equality of W_n between the forward and backward
    // constructions, sampled under the total law (environment redrawn per
    // replicate on reserved streams).
    let ks = if cfg.ks_replicates > 0 {
        let opts = SimOptions {
            mode: cfg.mode,
            cap: cfg.cap,
            node_budget: cfg.node_budget,
            targets: Vec::new(),
            record_measures: false,
        };
        let init = entry.default_init();
        let forward_ws = run_ensemble(cfg.threads, cfg.ks_replicates, |i| {
            let seq = sample_env_sequence(&entry.env_spec, derived_seed(cfg.seed, i), n)?;
            let mut rng = replicate_rng(cfg.seed, cfg.replicates + i);
            let out = simulate(&seq, &init, n, &entry.model, &opts, &mut rng)?;
            Ok(out.trajectory.final_w())
        })?;
        let backward_ws = run_ensemble(cfg.threads, cfg.ks_replicates, |i| {
            let seq = sample_env_sequence(
                &entry.env_spec,
                derived_seed(cfg.seed, cfg.ks_replicates + i),
                n,
            )?;
            let reversed = crate::env::reverse_env(&seq);
            let mut rng =
                replicate_rng(cfg.seed, cfg.replicates + cfg.ks_replicates + i);
            let out = simulate(&reversed, &init, n, &entry.model, &opts, &mut rng)?;
            Ok(out.trajectory.final_w())
        })?;
        let test = stats::ks_two_sample(&forward_ws, &backward_ws, cfg.ks_level);
        gates.push(GateResult::judge(
            "KS distance W_n backward vs forward",
            test.statistic,
            test.critical_value,
            true,
        ));
        Some(KsSummary {
            statistic: test.statistic,
            critical_value: test.critical_value,
            level: test.level,
            sample_size: cfg.ks_replicates,
            pass: test.pass,
        })
    } else {
        None
    };

    let report = ConvergenceReport {
        experiment: "lln-backward".into(),
        model: entry.name.clone(),
        quenched: !cfg.annealed,
        horizon: n,
        replicates: cfg.replicates,
        survivors: agg.survivors,
        survival_fraction: survival_fraction(agg.survivors, cfg.replicates),
        extinct: agg.extinct,
        truncated: agg.truncated,
        set_labels: cfg.targets.iter().map(TargetSet::label).collect(),
        rows: agg.rows,
        gates,
        l2_form: None,
        ks,
        doeblin: None,
        cesaro_targets: None,
        notes: Vec::new(),
    };
    Ok(LlnOutput { report, runs })
}

/// Whole-tree law of large numbers: per-replicate Cesaro averages of the
/// generation proportions against the directly computed Cesaro average of
/// the exact products, behind a Doeblin screen of the kernels.
pub fn run_whole_tree_lln(cfg: &ExperimentConfig) -> Result<LlnOutput> {
    cfg.validate()?;
    let entry = make_example(&cfg.model, &cfg.params)?;
    if !entry.model.is_finite() {
        return Err(Error::UnsupportedExact(
            "the whole-tree harness needs a finite alphabet for its exact targets".into(),
        ));
    }
    let screen_seq = sample_env_sequence(&entry.env_spec, cfg.seed, cfg.n)?;
    let doeblin = check_doeblin(&entry.model, &screen_seq, cfg.doeblin_b, cfg.doeblin_bound)?;

    let (agg, runs, _) = run_lln_ensemble(cfg, &entry, false)?;
    let n = cfg.n;
    let conclusive = agg.survivors >= MIN_SURVIVORS;

    let mut gates = vec![GateResult::judge(
        format!("Doeblin screen: max {}-step ratio", cfg.doeblin_b),
        doeblin.max_ratio,
        cfg.doeblin_bound,
        true,
    )];
    for (a, set) in cfg.targets.iter().enumerate() {
        gates.push(GateResult::judge(
            format!("whole-tree median |Cesaro Z{}/N - target|", set.label()),
            stats::median(&agg.cesaro_devs[a]),
            cfg.tolerance,
            conclusive,
        ));
    }

    let report = ConvergenceReport {
        experiment: "lln-whole-tree".into(),
        model: entry.name.clone(),
        quenched: !cfg.annealed,
        horizon: n,
        replicates: cfg.replicates,
        survivors: agg.survivors,
        survival_fraction: survival_fraction(agg.survivors, cfg.replicates),
        extinct: agg.extinct,
        truncated: agg.truncated,
        set_labels: cfg.targets.iter().map(TargetSet::label).collect(),
        rows: agg.rows,
        gates,
        l2_form: None,
        ks: None,
        doeblin: Some(doeblin),
        cesaro_targets: Some(agg.cesaro_targets),
        notes: Vec::new(),
    };
    Ok(LlnOutput { report, runs })
}

#[derive(Debug, Clone, Serialize)]
pub struct CltRow {
    pub y: f64,
    pub threshold: f64,
    pub phi: f64,
    pub mean_fhat: f64,
    pub median_fhat: f64,
    pub abs_dev: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CltDiag {
    pub shift: usize,
    pub scale_ratio: f64,
    pub centering_shift: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CltReport {
    pub experiment: String,
    pub model: String,
    pub horizon: usize,
    pub replicates: u64,
    pub survivors: u64,
    pub survival_fraction: f64,
    pub truncated: u64,
    pub centering: f64,
    pub scale: f64,
    pub rows: Vec<CltRow>,
    pub sup_abs_dev: f64,
    pub diagnostics: Vec<CltDiag>,
    pub gates: Vec<GateResult>,
    pub notes: Vec<String>,
}

impl CltReport {
    pub fn all_gates_acceptable(&self) -> bool {
        self.gates.iter().all(GateResult::acceptable)
    }
}

#[derive(Debug)]
pub struct CltOutput {
    pub report: CltReport,
    pub runs: Vec<ReplicateRun>,
}

/// Per-generation (mean, variance) of the auxiliary increments along the
/// realized environment, per the entry's normalizer recipe.
fn clt_moments(entry: &GalleryEntry, seq: &EnvSequence) -> Result<Vec<(f64, f64)>> {
    match &entry.targets.clt {
        Some(CltRecipe::IncrementMoments) => match &entry.model {
            TraitModel::IidIncrements { per_state } => Ok(seq
                .states()
                .iter()
                .map(|s| {
                    let d = &per_state[s.id];
                    (d.mean(), d.variance())
                })
                .collect()),
            _ => Err(Error::Config(
                "increment-moment normalizers need an increment model".into(),
            )),
        },
        Some(CltRecipe::WalkConstants { gamma, diffusion }) => {
            Ok(vec![(*gamma, *diffusion); seq.len()])
        }
        None => Err(Error::Config(format!(
            "model {} carries no CLT normalizer recipe; use ex3_5 or ex3_6",
            entry.name
        ))),
    }
}

fn normalizers(moments: &[(f64, f64)], n: usize) -> Result<(f64, f64)> {
    let centering: f64 = moments[..n].iter().map(|m| m.0).sum();
    let variance: f64 = moments[..n].iter().map(|m| m.1).sum();
    if variance <= 0.0 {
        return Err(Error::DegenerateNormalizer);
    }
    Ok((centering, variance.sqrt()))
}

/// Central limit theorem harness: empirical `Z_n(-inf, b_n y + a_n] / N_n`
/// on a grid of `y` against the normal CDF, plus stability diagnostics of
/// the normalizer sequence under environment shifts.
pub fn run_clt(cfg: &ExperimentConfig) -> Result<CltOutput> {
    cfg.validate()?;
    let entry = make_example(&cfg.model, &cfg.params)?;
    let n = cfg.n;
    let horizon = n.max(cfg.diag_horizon);
    let seq = sample_env_sequence(&entry.env_spec, cfg.seed, horizon)?;
    let moments = clt_moments(&entry, &seq)?;
    let (centering, scale) = normalizers(&moments, n)?;

    let y_grid = if cfg.y_grid.is_empty() {
        vec![-2.0, -1.0, 0.0, 1.0, 2.0]
    } else {
        cfg.y_grid.clone()
    };
    let targets: Vec<TargetSet> = y_grid
        .iter()
        .map(|&y| TargetSet::HalfLine {
            upper: scale * y + centering,
        })
        .collect();

    let sim_seq = EnvSequence::from_states(seq.states()[..n].to_vec());
    let opts = SimOptions {
        mode: cfg.mode,
        cap: cfg.cap,
        node_budget: cfg.node_budget,
        targets: targets.clone(),
        record_measures: false,
    };
    let init = entry.default_init();
    let runs = run_ensemble(cfg.threads, cfg.replicates, |i| {
        let mut rng = replicate_rng(cfg.seed, i);
        let out = simulate(&sim_seq, &init, n, &entry.model, &opts, &mut rng)?;
        Ok(ReplicateRun {
            trajectory: out.trajectory,
            env_ids: env_ids(&sim_seq, n),
            own_targets: None,
        })
    })?;

    let survivors: Vec<&ReplicateRun> =
        runs.iter().filter(|r| r.trajectory.survived(n)).collect();
    let truncated = runs.iter().filter(|r| r.trajectory.truncated).count() as u64;
    let conclusive = survivors.len() as u64 >= MIN_SURVIVORS;

    let mut rows = Vec::new();
    let mut sup_abs_dev = 0.0f64;
    for (j, &y) in y_grid.iter().enumerate() {
        let fhat: Vec<f64> = survivors
            .iter()
            .map(|r| {
                let s = &r.trajectory.stats[n];
                s.set_counts[j] as f64 / s.population as f64
            })
            .collect();
        let phi = stats::normal_cdf(y);
        let mean_fhat = stats::mean(&fhat);
        let abs_dev = (mean_fhat - phi).abs();
        sup_abs_dev = sup_abs_dev.max(abs_dev);
        rows.push(CltRow {
            y,
            threshold: scale * y + centering,
            phi,
            mean_fhat,
            median_fhat: stats::median(&fhat),
            abs_dev,
        });
    }

    let mut gates = vec![GateResult::judge(
        "CLT sup over y-grid |mean F(y) - Phi(y)|",
        sup_abs_dev,
        cfg.tolerance,
        conclusive,
    )];

    // Normalizer stability under shifts: the scale ratio tends to 1 and the
    // recentering drift to 0 as the horizon grows.
    let mut diagnostics = Vec::new();
    let d = cfg.diag_horizon.min(seq.len());
    for r in [1usize, 2] {
        if r >= d {
            continue;
        }
        let (a_full, b_full) = normalizers(&moments, d)?;
        let shifted: Vec<(f64, f64)> = moments[r..d].to_vec();
        let (a_shift, b_shift) = normalizers(&shifted, d - r)?;
        let scale_ratio = b_full / b_shift;
        let centering_shift = (a_full - a_shift) / b_shift;
        diagnostics.push(CltDiag {
            shift: r,
            scale_ratio,
            centering_shift,
        });
        gates.push(GateResult::judge(
            format!("normalizer scale ratio at shift {r} (vs 1)"),
            (scale_ratio - 1.0).abs(),
            cfg.diag_tolerance,
            true,
        ));
        gates.push(GateResult::judge(
            format!("normalizer centering drift at shift {r} (vs 0)"),
            centering_shift.abs(),
            cfg.diag_tolerance,
            true,
        ));
    }

    let report = CltReport {
        experiment: "clt".into(),
        model: entry.name.clone(),
        horizon: n,
        replicates: cfg.replicates,
        survivors: survivors.len() as u64,
        survival_fraction: survival_fraction(survivors.len() as u64, cfg.replicates),
        truncated,
        centering,
        scale,
        rows,
        sup_abs_dev,
        diagnostics,
        gates,
        notes: Vec::new(),
    };
    Ok(CltOutput { report, runs })
}

#[derive(Debug, Clone, Serialize)]
pub struct CoalescenceRow {
    pub k: usize,
    /// Sampled `P(|u /\ v| >= k)`.
    pub tail_ge_k: f64,
    /// Sampled `P(|u /\ v| >= n - k)`.
    pub tail_ge_n_minus_k: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_tail_ge_k: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoalescenceReport {
    pub experiment: String,
    pub model: String,
    pub horizon: usize,
    pub pairs: u64,
    pub final_population: u64,
    pub rows: Vec<CoalescenceRow>,
    pub gates: Vec<GateResult>,
    pub notes: Vec<String>,
}

impl CoalescenceReport {
    pub fn all_gates_acceptable(&self) -> bool {
        self.gates.iter().all(GateResult::acceptable)
    }
}

/// Coalescence diagnostic: sampled tails of the pair coalescence depth in
/// both forms (`>= K` and `>= n - K`), checked against exhaustive pair
/// enumeration whenever the generation is small enough to enumerate.
pub fn run_coalescence_diagnostic(cfg: &ExperimentConfig) -> Result<CoalescenceReport> {
    cfg.validate()?;
    let entry = make_example(&cfg.model, &cfg.params)?;
    let n = cfg.n;
    let seq = sample_env_sequence(&entry.env_spec, cfg.seed, n)?;
    let init = entry.default_init();
    let opts = SimOptions {
        mode: SimMode::Explicit,
        cap: cfg.cap,
        node_budget: cfg.node_budget,
        targets: Vec::new(),
        record_measures: false,
    };
    let mut rng = replicate_rng(cfg.seed, 0);
    let out = simulate(&seq, &init, n, &entry.model, &opts, &mut rng)?;
    let tree = out.tree.expect("explicit mode");
    let final_population = out.trajectory.final_population();

    let mut pair_rng = crate::rng::aux_rng(cfg.seed);
    let hist: CoalescenceHistogram = coalescence_samples(&tree, n, cfg.pairs, &mut pair_rng)?;

    let exact = match exact_coalescence_distribution(&tree, n) {
        Ok(dist) => Some(dist),
        Err(Error::EnumerationBudget(_)) => None,
        Err(e) => return Err(e),
    };

    let mut rows = Vec::with_capacity(n + 1);
    let mut gates = Vec::new();
    for k in 0..=n {
        let sampled = hist.tail_ge(k);
        let exact_tail = exact
            .as_ref()
            .map(|dist| dist[k..].iter().sum::<f64>());
        if let Some(expected) = exact_tail {
            let se = stats::binomial_se(expected.clamp(1e-12, 1.0), cfg.pairs);
            gates.push(GateResult::judge(
                format!("coalescence tail >= {k} vs enumeration"),
                (sampled - expected).abs(),
                3.0 * se,
                true,
            ));
        }
        rows.push(CoalescenceRow {
            k,
            tail_ge_k: sampled,
            tail_ge_n_minus_k: hist.tail_ge(n.saturating_sub(k)),
            exact_tail_ge_k: exact_tail,
        });
    }
    let mut notes = Vec::new();
    if exact.is_none() {
        notes.push(format!(
            "generation {n} has {final_population} nodes; exhaustive pair enumeration skipped \
             (budget), tails reported without an exact reference"
        ));
        gates.push(GateResult {
            name: "coalescence tails vs enumeration".into(),
            observed: f64::NAN,
            threshold: f64::NAN,
            verdict: Verdict::Inconclusive,
        });
    }

    Ok(CoalescenceReport {
        experiment: "coalescence".into(),
        model: entry.name,
        horizon: n,
        pairs: cfg.pairs,
        final_population,
        rows,
        gates,
        notes,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SamplerCheckRow {
    pub state: usize,
    pub row: usize,
    pub max_abs_dev: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub experiment: String,
    pub model: String,
    pub oracle_reports: Vec<OracleReport>,
    pub sampler_checks: Vec<SamplerCheckRow>,
    pub pass: bool,
}

/// Verification battery for one model: the many-to-one identity on the
/// full small grid (exact route for finite alphabets, Monte Carlo
/// otherwise) and, for finite models, the size-biased sampler against the
/// exact kernel rows.
pub fn run_verify(cfg: &ExperimentConfig) -> Result<VerifyReport> {
    cfg.validate()?;
    let entry = make_example(&cfg.model, &cfg.params)?;
    let mut oracle_reports = Vec::new();
    let mut sampler_checks = Vec::new();

    match entry.model.alphabet() {
        Some(dim) => {
            let seq = sample_env_sequence(&entry.env_spec, cfg.seed, 4)?;
            for n in 0..=3usize {
                for sym in 0..dim {
                    let f = TraitFn::Indicator(TargetSet::Symbols { set: vec![sym] });
                    for x0 in 0..dim {
                        oracle_reports.push(many_to_one_exact(&entry.model, &seq, n, &f, x0)?);
                    }
                }
            }
            sampler_checks = sampler_vs_exact(&entry, cfg.seed)?;
        }
        None => {
            let n = cfg.n.min(8);
            let seq = sample_env_sequence(&entry.env_spec, cfg.seed, n)?;
            let mut rng = crate::rng::aux_rng(cfg.seed);
            for f in [
                TraitFn::One,
                TraitFn::Indicator(TargetSet::HalfLine { upper: 0.0 }),
            ] {
                oracle_reports.push(many_to_one_mc(
                    &entry.model,
                    &seq,
                    n,
                    &f,
                    crate::kernels::Trait::Pos(0.0),
                    cfg.replicates,
                    cfg.cap,
                    &mut rng,
                )?);
            }
        }
    }

    let pass = oracle_reports.iter().all(|r| r.pass)
        && sampler_checks.iter().all(|r| r.pass);
    Ok(VerifyReport {
        experiment: "verify".into(),
        model: entry.name,
        oracle_reports,
        sampler_checks,
        pass,
    })
}

/// Empirical transition frequencies of the size-biased sampler against the
/// exact kernel rows, three binomial standard errors at 10^5 draws per row.
pub fn sampler_vs_exact(entry: &GalleryEntry, seed: u64) -> Result<Vec<SamplerCheckRow>> {
    const DRAWS: u64 = 100_000;
    let dim = entry
        .model
        .alphabet()
        .ok_or_else(|| Error::UnsupportedExact("sampler check needs a finite alphabet".into()))?;
    let mut rows = Vec::new();
    let mut rng = crate::rng::aux_rng(seed);
    for state in entry.env_spec.states() {
        let kernel = crate::kernels::build_aux_kernel(state, &entry.model)?;
        let exact = kernel
            .exact()
            .ok_or_else(|| Error::UnsupportedExact("kernel has no matrix form".into()))?
            .clone();
        for x in 0..dim {
            let mut counts = vec![0u64; dim];
            for _ in 0..DRAWS {
                counts[kernel.step(crate::kernels::Trait::Sym(x), &mut rng).symbol()] += 1;
            }
            let mut max_abs_dev = 0.0f64;
            let mut threshold = 0.0f64;
            let mut pass = true;
            for c in 0..dim {
                let p = exact.entry(x, c);
                let freq = counts[c] as f64 / DRAWS as f64;
                let dev = (freq - p).abs();
                let bound = 3.0 * stats::binomial_se(p, DRAWS);
                if dev > max_abs_dev {
                    max_abs_dev = dev;
                    threshold = bound;
                }
                if dev > bound {
                    pass = false;
                }
            }
            rows.push(SamplerCheckRow {
                state: state.id,
                row: x,
                max_abs_dev,
                threshold,
                pass,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateReport {
    pub experiment: String,
    pub model: String,
    pub horizon: usize,
    pub replicates: u64,
    pub survivors: u64,
    pub survival_fraction: f64,
    pub extinct: u64,
    pub truncated: u64,
    pub mean_final_w: f64,
    pub median_final_population: f64,
    pub notes: Vec<String>,
}

#[derive(Debug)]
pub struct SimulateOutput {
    pub report: SimulateReport,
    pub runs: Vec<ReplicateRun>,
}

/// Plain ensemble simulation with trajectory export and no gates.
pub fn run_simulate(cfg: &ExperimentConfig) -> Result<SimulateOutput> {
    cfg.validate()?;
    let entry = make_example(&cfg.model, &cfg.params)?;
    let n = cfg.n;
    let seq = sample_env_sequence(&entry.env_spec, cfg.seed, n)?;
    let init = entry.default_init();
    let opts = SimOptions {
        mode: cfg.mode,
        cap: cfg.cap,
        node_budget: cfg.node_budget,
        targets: cfg.targets.clone(),
        record_measures: false,
    };
    let runs = run_ensemble(cfg.threads, cfg.replicates, |i| {
        let mut rng = replicate_rng(cfg.seed, i);
        let (seq_i, ids) = if cfg.annealed {
            let drawn = sample_env_sequence(&entry.env_spec, derived_seed(cfg.seed, i), n)?;
            let ids = env_ids(&drawn, n);
            (drawn, ids)
        } else {
            (seq.clone(), env_ids(&seq, n))
        };
        let out = simulate(&seq_i, &init, n, &entry.model, &opts, &mut rng)?;
        Ok(ReplicateRun {
            trajectory: out.trajectory,
            env_ids: ids,
            own_targets: None,
        })
    })?;

    let survivors = runs.iter().filter(|r| r.trajectory.survived(n)).count() as u64;
    let extinct = runs
        .iter()
        .filter(|r| !r.trajectory.truncated && r.trajectory.extinct_at.is_some())
        .count() as u64;
    let truncated = runs.iter().filter(|r| r.trajectory.truncated).count() as u64;
    let final_ws: Vec<f64> = runs
        .iter()
        .filter(|r| !r.trajectory.truncated)
        .map(|r| r.trajectory.final_w())
        .collect();
    let final_pops: Vec<f64> = runs
        .iter()
        .filter(|r| !r.trajectory.truncated)
        .map(|r| r.trajectory.final_population() as f64)
        .collect();
    let report = SimulateReport {
        experiment: "simulate".into(),
        model: entry.name,
        horizon: n,
        replicates: cfg.replicates,
        survivors,
        survival_fraction: survival_fraction(survivors, cfg.replicates),
        extinct,
        truncated,
        mean_final_w: stats::mean(&final_ws),
        median_final_population: stats::median(&final_pops),
        notes: if cfg.annealed {
            vec!["annealed run: environment redrawn per replicate".into()]
        } else {
            Vec::new()
        },
    };
    Ok(SimulateOutput { report, runs })
}

/// Doeblin screening as a standalone command.
#[derive(Debug, Clone, Serialize)]
pub struct DoeblinCommandReport {
    pub experiment: String,
    pub model: String,
    pub report: DoeblinReport,
    pub gates: Vec<GateResult>,
}

pub fn run_doeblin(cfg: &ExperimentConfig) -> Result<DoeblinCommandReport> {
    cfg.validate()?;
    let entry = make_example(&cfg.model, &cfg.params)?;
    let seq = sample_env_sequence(&entry.env_spec, cfg.seed, cfg.n)?;
    let report = check_doeblin(&entry.model, &seq, cfg.doeblin_b, cfg.doeblin_bound)?;
    let gates = vec![GateResult::judge(
        format!("Doeblin max {}-step ratio", cfg.doeblin_b),
        report.max_ratio,
        cfg.doeblin_bound,
        true,
    )];
    Ok(DoeblinCommandReport {
        experiment: "doeblin".into(),
        model: entry.name,
        report,
        gates,
    })
}
