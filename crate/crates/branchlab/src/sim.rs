//! Population simulation: generation-by-generation stepping of the
//! occupation measure, an explicit-tree mode for genealogy queries, and the
//! exact first-moment engine.

use crate::env::{reverse_env, EnvSequence, EnvState};
use crate::error::{Error, Result};
use crate::kernels::{
    exact_kernels, sample_offspring, Distribution, Trait, TraitModel,
};
use crate::measure::{CountingMeasure, TargetSet};
use crate::rng::Rng;
use rand::Rng as _;
use rand_distr::{Binomial, Distribution as _};
use serde::{Deserialize, Serialize};

/// Default population cap. On breach a run is marked truncated rather than
/// resampled; resampling would change the law.
pub const DEFAULT_CAP: u64 = 10_000_000;

/// Default node budget for explicit-tree mode.
pub const DEFAULT_NODE_BUDGET: u64 = 5_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimMode {
    Aggregated,
    Explicit,
}

#[derive(Debug, Clone)]
pub struct SimOptions {
    pub mode: SimMode,
    pub cap: u64,
    pub node_budget: u64,
    pub targets: Vec<TargetSet>,
    pub record_measures: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            mode: SimMode::Aggregated,
            cap: DEFAULT_CAP,
            node_budget: DEFAULT_NODE_BUDGET,
            targets: Vec::new(),
            record_measures: false,
        }
    }
}

/// Per-generation statistics of one run.
#[derive(Debug, Clone)]
pub struct GenerationStat {
    pub population: u64,
    pub log_p: f64,
    /// `W_k = N_k / P_k`, computed in log space.
    pub w: f64,
    /// `Z_k(A)` for each configured target set.
    pub set_counts: Vec<u64>,
}

/// One simulated run: statistics through the horizon or the truncation
/// point. After extinction the rows continue with zeros (extinction is
/// absorbing); after a cap breach no further rows are emitted.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub stats: Vec<GenerationStat>,
    pub extinct_at: Option<usize>,
    pub truncated: bool,
    pub measures: Vec<Option<CountingMeasure>>,
}

impl Trajectory {
    pub fn final_population(&self) -> u64 {
        self.stats.last().map_or(0, |s| s.population)
    }

    pub fn final_w(&self) -> f64 {
        self.stats.last().map_or(0.0, |s| s.w)
    }

    pub fn w_at(&self, k: usize) -> f64 {
        self.stats[k].w
    }

    pub fn survived(&self, horizon: usize) -> bool {
        !self.truncated
            && self
                .stats
                .get(horizon)
                .is_some_and(|s| s.population > 0)
    }
}

/// Explicit genealogy: flat node store with parent pointers and generation
/// boundaries.
#[derive(Debug, Clone)]
pub struct ExplicitTree {
    parents: Vec<u32>,
    traits: Vec<Trait>,
    gen_offsets: Vec<usize>,
}

const NO_PARENT: u32 = u32::MAX;

impl ExplicitTree {
    pub fn node_count(&self) -> usize {
        self.parents.len()
    }

    pub fn generations(&self) -> usize {
        self.gen_offsets.len() - 1
    }

    pub fn generation_range(&self, gen: usize) -> std::ops::Range<usize> {
        self.gen_offsets[gen]..self.gen_offsets[gen + 1]
    }

    pub fn generation_size(&self, gen: usize) -> usize {
        self.generation_range(gen).len()
    }

    pub fn parent(&self, node: usize) -> Option<usize> {
        match self.parents[node] {
            NO_PARENT => None,
            p => Some(p as usize),
        }
    }

    pub fn trait_of(&self, node: usize) -> Trait {
        self.traits[node]
    }

    /// Generation of the nearest common ancestor of two same-generation
    /// nodes (`|u /\ v|`); equals the generation itself when `u == v`.
    pub fn coalescence_depth(&self, mut u: usize, mut v: usize, gen: usize) -> usize {
        let mut depth = gen;
        while u != v {
            u = self.parent(u).expect("nodes of equal generation");
            v = self.parent(v).expect("nodes of equal generation");
            depth -= 1;
        }
        depth
    }

    /// Occupation measure of one generation.
    pub fn measure_at(&self, gen: usize, model: &TraitModel) -> CountingMeasure {
        let range = self.generation_range(gen);
        match model.alphabet() {
            Some(dim) => {
                let mut counts = vec![0u64; dim];
                for node in range {
                    counts[self.traits[node].symbol()] += 1;
                }
                CountingMeasure::Finite { counts }
            }
            None => CountingMeasure::Numeric {
                positions: self.traits[range].iter().map(|t| t.position()).collect(),
            },
        }
    }
}

/// Output of [`simulate`]: the trajectory, plus the genealogy in explicit
/// mode.
#[derive(Debug, Clone)]
pub struct SimOutput {
    pub trajectory: Trajectory,
    pub tree: Option<ExplicitTree>,
}

/// Outcome of one population step.
#[derive(Debug, Clone)]
pub enum StepResult {
    Next(CountingMeasure),
    /// The step would exceed the population cap; the caller decides policy.
    Truncated,
}

/// Advances the occupation measure one generation: every individual draws
/// an independent litter under `state`'s offspring law and the model's
/// kernels. Individuals are processed grouped by trait bin; the symmetric
/// independent model uses a per-bin multinomial shortcut (lawful there
/// because siblings are conditionally i.i.d.), every other model loops per
/// parent.
pub fn step_population(
    z: &CountingMeasure,
    state: &EnvState,
    model: &TraitModel,
    cap: u64,
    rng: &mut Rng,
) -> Result<StepResult> {
    match (z, model) {
        (CountingMeasure::Finite { counts }, TraitModel::SymmetricIndependent { base }) => {
            let mut next = vec![0u64; base.dim()];
            let mut total = 0u64;
            for (sym, &parents) in counts.iter().enumerate() {
                if parents == 0 {
                    continue;
                }
                let litters = multinomial(parents, &state.offspring_pmf, rng);
                let children: u64 = litters
                    .iter()
                    .enumerate()
                    .map(|(k, &c)| k as u64 * c)
                    .sum();
                total += children;
                if total > cap {
                    return Ok(StepResult::Truncated);
                }
                for (child_sym, c) in multinomial(children, base.row(sym), rng)
                    .into_iter()
                    .enumerate()
                {
                    next[child_sym] += c;
                }
            }
            Ok(StepResult::Next(CountingMeasure::Finite { counts: next }))
        }
        (CountingMeasure::Finite { counts }, TraitModel::FiniteStateJoint { .. }) => {
            let dim = model.alphabet().expect("finite model");
            let mut next = vec![0u64; dim];
            let mut total = 0u64;
            for (sym, &parents) in counts.iter().enumerate() {
                for _ in 0..parents {
                    let (k, kids) = sample_offspring(state, model, Trait::Sym(sym), rng)?;
                    total += k as u64;
                    if total > cap {
                        return Ok(StepResult::Truncated);
                    }
                    for kid in kids {
                        next[kid.symbol()] += 1;
                    }
                }
            }
            Ok(StepResult::Next(CountingMeasure::Finite { counts: next }))
        }
        (CountingMeasure::Numeric { positions }, _) => {
            if model.is_finite() {
                return Err(Error::Config(
                    "numeric occupation measure with a finite-alphabet model".into(),
                ));
            }
            let mut next = Vec::with_capacity(positions.len() * 2);
            for &x in positions {
                let (_, kids) = sample_offspring(state, model, Trait::Pos(x), rng)?;
                if next.len() + kids.len() > cap as usize {
                    return Ok(StepResult::Truncated);
                }
                next.extend(kids.into_iter().map(Trait::position));
            }
            Ok(StepResult::Next(CountingMeasure::Numeric { positions: next }))
        }
        (CountingMeasure::Finite { .. }, _) => Err(Error::Config(
            "finite occupation measure with a numeric-trait model".into(),
        )),
    }
}

/// Conditional-binomial multinomial split of `n` items over `probs`.
fn multinomial(n: u64, probs: &[f64], rng: &mut Rng) -> Vec<u64> {
    let mut out = vec![0u64; probs.len()];
    let mut remaining = n;
    let mut rest = 1.0f64;
    for j in 0..probs.len().saturating_sub(1) {
        if remaining == 0 || rest <= 0.0 {
            break;
        }
        let p = (probs[j] / rest).clamp(0.0, 1.0);
        let draw = Binomial::new(remaining, p).expect("valid p").sample(rng);
        out[j] = draw;
        remaining -= draw;
        rest -= probs[j];
    }
    if let Some(last) = out.last_mut() {
        *last += remaining;
    }
    out
}

/// Simulates the population for `n` generations under the realized
/// environment, starting from a single root whose trait is drawn from
/// `init`. Deterministic given the rng stream.
pub fn simulate(
    seq: &EnvSequence,
    init: &Distribution,
    n: usize,
    model: &TraitModel,
    opts: &SimOptions,
    rng: &mut Rng,
) -> Result<SimOutput> {
    if n > seq.len() {
        return Err(Error::Argument(format!(
            "horizon {n} exceeds environment length {}",
            seq.len()
        )));
    }
    init.validate()?;
    model.validate_against(seq.states())?;

    match opts.mode {
        SimMode::Explicit => {
            let expected: f64 = (0..=n).map(|k| seq.log_p(k).exp()).sum();
            if expected > opts.node_budget as f64 {
                return Err(Error::NodeBudget {
                    expected,
                    budget: opts.node_budget,
                });
            }
            simulate_explicit(seq, init, n, model, opts, rng)
        }
        SimMode::Aggregated => simulate_aggregated(seq, init, n, model, opts, rng),
    }
}

/// Backward variant: generation `r` reproduces under component
/// `xi_{n-r-1}`. Equivalent to running the forward engine on the reversed
/// sequence, whose normalizers are exactly `E_{xi^(n)} N_k`.
pub fn simulate_backward(
    seq: &EnvSequence,
    init: &Distribution,
    model: &TraitModel,
    opts: &SimOptions,
    rng: &mut Rng,
) -> Result<SimOutput> {
    let reversed = reverse_env(seq);
    simulate(&reversed, init, seq.len(), model, opts, rng)
}

/// Reflection radius for lattice walks: steps are unit, so contact with the
/// boundary is impossible at desk horizons; the reflection only guards
/// hypothetical misuse with enormous horizons.
fn walk_radius(n: usize) -> f64 {
    (n as f64 + 10.0 * (n as f64).sqrt()).ceil() + 1.0
}

fn reflect(positions: &mut CountingMeasure, radius: f64) {
    if let CountingMeasure::Numeric { positions } = positions {
        for x in positions {
            if *x > radius {
                *x = 2.0 * radius - *x;
            } else if *x < -radius {
                *x = -2.0 * radius - *x;
            }
        }
    }
}

fn stat_row(
    measure: &CountingMeasure,
    log_p: f64,
    targets: &[TargetSet],
) -> GenerationStat {
    let population = measure.total();
    let w = if population == 0 {
        0.0
    } else {
        ((population as f64).ln() - log_p).exp()
    };
    GenerationStat {
        population,
        log_p,
        w,
        set_counts: targets.iter().map(|a| measure.count_in(a)).collect(),
    }
}

fn simulate_aggregated(
    seq: &EnvSequence,
    init: &Distribution,
    n: usize,
    model: &TraitModel,
    opts: &SimOptions,
    rng: &mut Rng,
) -> Result<SimOutput> {
    let root = init.sample(rng);
    let mut measure = match (model.alphabet(), root) {
        (Some(dim), Trait::Sym(sym)) => {
            let mut counts = vec![0u64; dim];
            counts[sym] = 1;
            CountingMeasure::Finite { counts }
        }
        (None, Trait::Pos(x)) => CountingMeasure::Numeric { positions: vec![x] },
        _ => return Err(Error::Config("initial trait does not match the model".into())),
    };
    let is_walk = matches!(model, TraitModel::LocationRwre { .. });
    let radius = walk_radius(n);

    let mut trajectory = Trajectory {
        stats: Vec::with_capacity(n + 1),
        extinct_at: None,
        truncated: false,
        measures: Vec::new(),
    };
    push_row(&mut trajectory, &measure, seq.log_p(0), opts, 0);

    for k in 0..n {
        if measure.is_empty() {
            // Extinction is absorbing: keep zero rows through the horizon.
            push_row(&mut trajectory, &measure, seq.log_p(k + 1), opts, k + 1);
            continue;
        }
        match step_population(&measure, seq.state(k), model, opts.cap, rng)? {
            StepResult::Next(next) => {
                measure = next;
                if is_walk {
                    reflect(&mut measure, radius);
                }
                if measure.is_empty() && trajectory.extinct_at.is_none() {
                    trajectory.extinct_at = Some(k + 1);
                }
                push_row(&mut trajectory, &measure, seq.log_p(k + 1), opts, k + 1);
            }
            StepResult::Truncated => {
                trajectory.truncated = true;
                break;
            }
        }
    }
    Ok(SimOutput {
        trajectory,
        tree: None,
    })
}

fn push_row(
    trajectory: &mut Trajectory,
    measure: &CountingMeasure,
    log_p: f64,
    opts: &SimOptions,
    _gen: usize,
) {
    trajectory.stats.push(stat_row(measure, log_p, &opts.targets));
    if opts.record_measures {
        trajectory.measures.push(Some(measure.clone()));
    }
}

fn simulate_explicit(
    seq: &EnvSequence,
    init: &Distribution,
    n: usize,
    model: &TraitModel,
    opts: &SimOptions,
    rng: &mut Rng,
) -> Result<SimOutput> {
    let root = init.sample(rng);
    let mut tree = ExplicitTree {
        parents: vec![NO_PARENT],
        traits: vec![root],
        gen_offsets: vec![0, 1],
    };
    let is_walk = matches!(model, TraitModel::LocationRwre { .. });
    let radius = walk_radius(n);

    let mut trajectory = Trajectory {
        stats: Vec::with_capacity(n + 1),
        extinct_at: None,
        truncated: false,
        measures: Vec::new(),
    };
    let record = |traj: &mut Trajectory, tree: &ExplicitTree, gen: usize| {
        let measure = tree.measure_at(gen, model);
        traj.stats
            .push(stat_row(&measure, seq.log_p(gen), &opts.targets));
        if opts.record_measures {
            traj.measures.push(Some(measure));
        }
    };
    record(&mut trajectory, &tree, 0);

    'generations: for k in 0..n {
        let range = tree.generation_range(k);
        let mut gen_pop = 0u64;
        for parent in range {
            let (_, kids) = sample_offspring(seq.state(k), model, tree.traits[parent], rng)?;
            gen_pop += kids.len() as u64;
            if gen_pop > opts.cap || tree.node_count() + kids.len() > opts.node_budget as usize {
                trajectory.truncated = true;
                break 'generations;
            }
            for kid in kids {
                let kid = match kid {
                    Trait::Pos(x) if is_walk && x.abs() > radius => {
                        Trait::Pos(if x > 0.0 { 2.0 * radius - x } else { -2.0 * radius - x })
                    }
                    other => other,
                };
                tree.parents.push(parent as u32);
                tree.traits.push(kid);
            }
        }
        tree.gen_offsets.push(tree.node_count());
        if gen_pop == 0 && trajectory.extinct_at.is_none() {
            trajectory.extinct_at = Some(k + 1);
        }
        record(&mut trajectory, &tree, k + 1);
    }
    Ok(SimOutput {
        trajectory,
        tree: Some(tree),
    })
}

/// Exact normalized first moment `(log P_n, nu Q_0 ... Q_{n-1})`: the
/// oracle for law-of-large-numbers targets. Finite-alphabet models only.
pub fn expected_measure(
    init: &Distribution,
    seq: &EnvSequence,
    model: &TraitModel,
    n: usize,
) -> Result<(f64, Distribution)> {
    if n > seq.len() {
        return Err(Error::Argument(format!(
            "horizon {n} exceeds environment length {}",
            seq.len()
        )));
    }
    let mut dist = init.finite_masses()?.to_vec();
    let kernels = exact_kernels(seq, model)?;
    for q in &kernels[..n] {
        dist = q.apply_left(&dist);
    }
    Ok((seq.log_p(n), Distribution::Finite(dist)))
}

/// Empirical coalescence-depth histogram from uniformly sampled node pairs
/// (with replacement) in generation `n`.
#[derive(Debug, Clone)]
pub struct CoalescenceHistogram {
    /// `counts[d]` = number of sampled pairs with `|u /\ v| = d`.
    pub counts: Vec<u64>,
    pub pairs: u64,
}

impl CoalescenceHistogram {
    pub fn probabilities(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| c as f64 / self.pairs as f64)
            .collect()
    }

    /// `P(|u /\ v| >= k)`.
    pub fn tail_ge(&self, k: usize) -> f64 {
        if k >= self.counts.len() {
            return 0.0;
        }
        self.counts[k..].iter().sum::<u64>() as f64 / self.pairs as f64
    }
}

pub fn coalescence_samples(
    tree: &ExplicitTree,
    n: usize,
    pairs: u64,
    rng: &mut Rng,
) -> Result<CoalescenceHistogram> {
    let range = tree.generation_range(n);
    if range.is_empty() {
        return Err(Error::EmptyGeneration(n));
    }
    let mut counts = vec![0u64; n + 1];
    for _ in 0..pairs {
        let u = rng.gen_range(range.clone());
        let v = rng.gen_range(range.clone());
        counts[tree.coalescence_depth(u, v, n)] += 1;
    }
    Ok(CoalescenceHistogram { counts, pairs })
}

/// Budget guard for [`exact_coalescence_distribution`].
const PAIR_ENUMERATION_LIMIT: usize = 4096;

/// Exact coalescence-depth law by exhaustive enumeration over all ordered
/// node pairs of generation `n`; the independent oracle for the sampled
/// histogram.
pub fn exact_coalescence_distribution(tree: &ExplicitTree, n: usize) -> Result<Vec<f64>> {
    let range = tree.generation_range(n);
    let size = range.len();
    if size == 0 {
        return Err(Error::EmptyGeneration(n));
    }
    if size > PAIR_ENUMERATION_LIMIT {
        return Err(Error::EnumerationBudget(format!(
            "generation has {size} nodes, pair enumeration limited to {PAIR_ENUMERATION_LIMIT}"
        )));
    }
    let mut counts = vec![0u64; n + 1];
    for u in range.clone() {
        for v in range.clone() {
            counts[tree.coalescence_depth(u, v, n)] += 1;
        }
    }
    let total = (size * size) as f64;
    Ok(counts.into_iter().map(|c| c as f64 / total).collect())
}
