//! Trait transition kernel families and the auxiliary one-step kernel.
//!
//! The auxiliary kernel of an environment state with offspring law `{p_k}`
//! and per-child kernels `P^{(k,i)}` is
//!
//! ```text
//! Q(x, .) = (1/m) * sum_k p_k * sum_{i=1..k} P^{(k,i)}(x, .)
//! ```
//!
//! For finite alphabets the kernel is materialized as a row-stochastic
//! matrix by that defining sum. The sampling form instead draws the litter
//! size `k` with probability `k p_k / m` (the litter containing a uniformly
//! chosen child is size-biased), a child slot `i` uniformly in `1..=k`, and
//! then a trait from `P^{(k,i)}(x, .)`; the two forms are checked against
//! each other in the test suites.

use std::fmt;
use std::sync::Arc;

use crate::env::{draw_index, EnvSequence, EnvState, LocationEnv, WEIGHT_TOL};
use crate::error::{Error, Result};
use crate::matrix::StochasticMatrix;
use crate::measure::TargetSet;
use crate::rng::Rng;
use rand::Rng as _;
use rand_distr::{Distribution as _, Normal};
use serde::{Deserialize, Serialize};

/// A trait value: a symbol of a finite alphabet or a point on the line
/// (integer-valued for lattice walks).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Trait {
    Sym(usize),
    Pos(f64),
}

impl Trait {
    pub fn symbol(self) -> usize {
        match self {
            Trait::Sym(s) => s,
            Trait::Pos(_) => panic!("expected a finite-alphabet trait"),
        }
    }

    pub fn position(self) -> f64 {
        match self {
            Trait::Pos(x) => x,
            Trait::Sym(_) => panic!("expected a numeric trait"),
        }
    }

    pub fn in_set(self, set: &TargetSet) -> bool {
        match self {
            Trait::Sym(s) => set.contains_symbol(s),
            Trait::Pos(x) => set.contains_point(x),
        }
    }
}

/// Increment law for branching random walks with environment in time.
#[derive(Debug, Clone, PartialEq)]
pub enum IncrementDist {
    Normal { mean: f64, std_dev: f64 },
    Discrete { support: Vec<f64>, probs: Vec<f64> },
}

impl IncrementDist {
    pub fn validate(&self) -> Result<()> {
        match self {
            IncrementDist::Normal { std_dev, mean } => {
                if !std_dev.is_finite() || *std_dev < 0.0 || !mean.is_finite() {
                    return Err(Error::Config(format!(
                        "normal increment: invalid parameters ({mean}, {std_dev})"
                    )));
                }
            }
            IncrementDist::Discrete { support, probs } => {
                if support.len() != probs.len() || support.is_empty() {
                    return Err(Error::Config(
                        "discrete increment: support/probs length mismatch".into(),
                    ));
                }
                let mut sum = 0.0;
                for &p in probs {
                    if p.is_nan() || p < 0.0 {
                        return Err(Error::Config("discrete increment: negative mass".into()));
                    }
                    sum += p;
                }
                if (sum - 1.0).abs() > WEIGHT_TOL {
                    return Err(Error::Config(format!(
                        "discrete increment: masses sum to {sum}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        match self {
            IncrementDist::Normal { mean, .. } => *mean,
            IncrementDist::Discrete { support, probs } => {
                support.iter().zip(probs).map(|(x, p)| x * p).sum()
            }
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            IncrementDist::Normal { std_dev, .. } => std_dev * std_dev,
            IncrementDist::Discrete { support, probs } => {
                let m = self.mean();
                support
                    .iter()
                    .zip(probs)
                    .map(|(x, p)| (x - m) * (x - m) * p)
                    .sum()
            }
        }
    }

    pub fn sample(&self, rng: &mut Rng) -> f64 {
        match self {
            IncrementDist::Normal { mean, std_dev } => {
                Normal::new(*mean, *std_dev).expect("validated").sample(rng)
            }
            IncrementDist::Discrete { support, probs } => support[draw_index(probs, rng)],
        }
    }
}

/// Hook for user-supplied joint sibling laws. Only the `(k, i)`-marginals
/// enter the auxiliary kernel; the joint law matters for higher moments of
/// the occupation measure.
pub trait JointSampler: Send + Sync {
    /// Returns the `litter` child symbols for a parent at `parent_sym`
    /// under environment state `env_id`.
    fn sample_siblings(
        &self,
        env_id: usize,
        litter: usize,
        parent_sym: usize,
        rng: &mut Rng,
    ) -> Vec<usize>;
}

#[derive(Clone)]
pub struct JointSamplerHook(pub Arc<dyn JointSampler>);

impl fmt::Debug for JointSamplerHook {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("JointSamplerHook(..)")
    }
}

/// Per-environment-state kernels `P^{(k,i)}` over a finite alphabet:
/// `per_litter[k][i-1]` is the kernel for child `i` of a litter of size `k`.
#[derive(Debug, Clone)]
pub struct JointKernelSet {
    pub per_litter: Vec<Vec<StochasticMatrix>>,
}

impl JointKernelSet {
    /// All `(k, i)` share one kernel.
    pub fn uniform(kernel: StochasticMatrix, max_litter: usize) -> Self {
        let per_litter = (0..=max_litter)
            .map(|k| vec![kernel.clone(); k])
            .collect();
        Self { per_litter }
    }

    pub fn kernel(&self, litter: usize, child: usize) -> &StochasticMatrix {
        &self.per_litter[litter][child]
    }
}

/// The trait transition model: which family of kernels `p^(k)` the
/// process uses.
#[derive(Debug, Clone)]
pub enum TraitModel {
    /// Each child draws an independent copy from one base kernel.
    SymmetricIndependent { base: StochasticMatrix },
    /// Finite alphabet with explicit `P^{(k,i)}` per environment state;
    /// siblings are conditionally independent unless a joint hook is set.
    FiniteStateJoint {
        per_state: Vec<JointKernelSet>,
        joint: Option<JointSamplerHook>,
    },
    /// Children scatter at the parent position plus i.i.d. increments whose
    /// law depends on the environment state.
    IidIncrements { per_state: Vec<IncrementDist> },
    /// Nearest-neighbour walk on the integers driven by an environment in
    /// locations; independent of the time environment.
    LocationRwre { location: LocationEnv },
}

impl TraitModel {
    /// Alphabet size for finite models, `None` for numeric ones.
    pub fn alphabet(&self) -> Option<usize> {
        match self {
            TraitModel::SymmetricIndependent { base } => Some(base.dim()),
            TraitModel::FiniteStateJoint { per_state, .. } => per_state
                .iter()
                .flat_map(|s| s.per_litter.iter())
                .flat_map(|ks| ks.iter())
                .map(|m| m.dim())
                .next(),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.alphabet().is_some()
    }

    /// Checks the model supplies kernels for every state and litter the
    /// environment can produce.
    pub fn validate_against(&self, states: &[EnvState]) -> Result<()> {
        match self {
            TraitModel::SymmetricIndependent { .. } => Ok(()),
            TraitModel::FiniteStateJoint { per_state, .. } => {
                let dim = self
                    .alphabet()
                    .ok_or_else(|| Error::Config("trait model has no kernels".into()))?;
                for state in states {
                    let set = per_state.get(state.id).ok_or_else(|| {
                        Error::Config(format!(
                            "trait model has no kernels for environment state {}",
                            state.id
                        ))
                    })?;
                    for (k, &p) in state.offspring_pmf.iter().enumerate() {
                        if p <= 0.0 || k == 0 {
                            continue;
                        }
                        let row = set.per_litter.get(k).ok_or_else(|| {
                            Error::Config(format!(
                                "state {}: no kernels for litter size {k}",
                                state.id
                            ))
                        })?;
                        if row.len() != k {
                            return Err(Error::Config(format!(
                                "state {}: litter {k} has {} child kernels, expected {k}",
                                state.id,
                                row.len()
                            )));
                        }
                        for m in row {
                            if m.dim() != dim {
                                return Err(Error::Config(format!(
                                    "state {}: kernel dimension {} != alphabet {dim}",
                                    state.id,
                                    m.dim()
                                )));
                            }
                        }
                    }
                }
                Ok(())
            }
            TraitModel::IidIncrements { per_state } => {
                for state in states {
                    let d = per_state.get(state.id).ok_or_else(|| {
                        Error::Config(format!(
                            "no increment law for environment state {}",
                            state.id
                        ))
                    })?;
                    d.validate()?;
                }
                Ok(())
            }
            TraitModel::LocationRwre { location } => location.validate(),
        }
    }
}

/// The auxiliary one-step transition for one environment state: the exact
/// matrix form when the alphabet is finite, and a sampling form that goes
/// through the size-biased litter route.
#[derive(Debug, Clone)]
pub struct AuxKernel {
    exact: Option<StochasticMatrix>,
    sampler: KernelSampler,
}

#[derive(Debug, Clone)]
enum KernelSampler {
    Litter {
        /// `P(K = k) = k p_k / m`; entry 0 is always zero.
        litter_law: Vec<f64>,
        kernels: LitterKernels,
    },
    Increment(IncrementDist),
    Walk(LocationEnv),
}

#[derive(Debug, Clone)]
enum LitterKernels {
    Shared(StochasticMatrix),
    PerChild(Vec<Vec<StochasticMatrix>>),
}

impl AuxKernel {
    pub fn exact(&self) -> Option<&StochasticMatrix> {
        self.exact.as_ref()
    }

    /// One auxiliary-chain step from `x`.
    pub fn step(&self, x: Trait, rng: &mut Rng) -> Trait {
        match &self.sampler {
            KernelSampler::Litter { litter_law, kernels } => {
                let k = draw_index(litter_law, rng);
                debug_assert!(k >= 1);
                let i = rng.gen_range(0..k);
                let row = match kernels {
                    LitterKernels::Shared(m) => m.row(x.symbol()),
                    LitterKernels::PerChild(per) => per[k][i].row(x.symbol()),
                };
                Trait::Sym(draw_index(row, rng))
            }
            KernelSampler::Increment(dist) => Trait::Pos(x.position() + dist.sample(rng)),
            KernelSampler::Walk(loc) => {
                let pos = x.position();
                let right = rng.gen::<f64>() < loc.omega_at(pos as i64);
                Trait::Pos(if right { pos + 1.0 } else { pos - 1.0 })
            }
        }
    }

    /// Whether two kernels define the same transition law (used to check
    /// that location-walk kernels ignore the time environment).
    pub fn same_law(&self, other: &AuxKernel) -> bool {
        match (&self.sampler, &other.sampler) {
            (KernelSampler::Walk(a), KernelSampler::Walk(b)) => a == b,
            (KernelSampler::Increment(a), KernelSampler::Increment(b)) => a == b,
            _ => match (&self.exact, &other.exact) {
                (Some(a), Some(b)) => a.max_abs_diff(b) == 0.0,
                _ => false,
            },
        }
    }
}

/// Builds the auxiliary kernel `Q` for one environment state under the
/// given trait model. The exact form is the defining sum
/// `(1/m) sum_k p_k sum_i P^{(k,i)}`; the sampler is size-biased.
pub fn build_aux_kernel(state: &EnvState, model: &TraitModel) -> Result<AuxKernel> {
    let m = state.mean();
    if m <= 0.0 {
        return Err(Error::DegenerateEnvironment { state: state.id });
    }
    let litter_law: Vec<f64> = state
        .offspring_pmf
        .iter()
        .enumerate()
        .map(|(k, &p)| k as f64 * p / m)
        .collect();

    match model {
        TraitModel::SymmetricIndependent { base } => {
            let exact = defining_sum(state, |_, _| base)?;
            Ok(AuxKernel {
                exact: Some(exact),
                sampler: KernelSampler::Litter {
                    litter_law,
                    kernels: LitterKernels::Shared(base.clone()),
                },
            })
        }
        TraitModel::FiniteStateJoint { per_state, .. } => {
            let set = per_state.get(state.id).ok_or_else(|| {
                Error::Config(format!("no kernels for environment state {}", state.id))
            })?;
            let exact = defining_sum(state, |k, i| set.kernel(k, i))?;
            Ok(AuxKernel {
                exact: Some(exact),
                sampler: KernelSampler::Litter {
                    litter_law,
                    kernels: LitterKernels::PerChild(set.per_litter.clone()),
                },
            })
        }
        TraitModel::IidIncrements { per_state } => {
            let dist = per_state.get(state.id).ok_or_else(|| {
                Error::Config(format!("no increment law for environment state {}", state.id))
            })?;
            Ok(AuxKernel {
                exact: None,
                sampler: KernelSampler::Increment(dist.clone()),
            })
        }
        TraitModel::LocationRwre { location } => Ok(AuxKernel {
            exact: None,
            sampler: KernelSampler::Walk(location.clone()),
        }),
    }
}

/// `(1/m) sum_k p_k sum_{i=1..k} P^{(k,i)}`, accumulated entrywise.
fn defining_sum<'a>(
    state: &EnvState,
    kernel: impl Fn(usize, usize) -> &'a StochasticMatrix,
) -> Result<StochasticMatrix> {
    let m = state.mean();
    let mut acc: Option<Vec<f64>> = None;
    let mut dim = 0;
    for (k, &p) in state.offspring_pmf.iter().enumerate() {
        if p <= 0.0 || k == 0 {
            continue;
        }
        for i in 0..k {
            let mat = kernel(k, i);
            dim = mat.dim();
            let acc = acc.get_or_insert_with(|| vec![0.0; dim * dim]);
            for r in 0..dim {
                for c in 0..dim {
                    acc[r * dim + c] += p / m * mat.entry(r, c);
                }
            }
        }
    }
    let data = acc.ok_or(Error::DegenerateEnvironment { state: state.id })?;
    let q = StochasticMatrix::from_raw(dim, data);
    for (r, sum) in q.row_sums().iter().enumerate() {
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!(
                "auxiliary kernel row {r} sums to {sum}"
            )));
        }
    }
    Ok(q)
}

/// Exact auxiliary matrices along a realized sequence, one per generation.
pub fn exact_kernels(seq: &EnvSequence, model: &TraitModel) -> Result<Vec<StochasticMatrix>> {
    let mut by_id: std::collections::HashMap<usize, StochasticMatrix> = Default::default();
    let mut out = Vec::with_capacity(seq.len());
    for state in seq.states() {
        if let std::collections::hash_map::Entry::Vacant(slot) = by_id.entry(state.id) {
            let kernel = build_aux_kernel(state, model)?;
            let exact = kernel.exact().cloned().ok_or_else(|| {
                Error::UnsupportedExact("auxiliary kernel has no matrix form".into())
            })?;
            slot.insert(exact);
        }
        out.push(by_id[&state.id].clone());
    }
    Ok(out)
}

/// A distribution over traits: masses over a finite alphabet, or a weighted
/// sample cloud on the line.
#[derive(Debug, Clone, PartialEq)]
pub enum Distribution {
    Finite(Vec<f64>),
    Cloud { points: Vec<f64>, weights: Vec<f64> },
}

/// Distribution masses must sum to 1 to this tolerance.
pub const MASS_TOL: f64 = 1e-10;

impl Distribution {
    pub fn point_mass_symbol(sym: usize, dim: usize) -> Self {
        let mut masses = vec![0.0; dim];
        masses[sym] = 1.0;
        Distribution::Finite(masses)
    }

    pub fn point_mass_position(x: f64) -> Self {
        Distribution::Cloud {
            points: vec![x],
            weights: vec![1.0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let masses: &[f64] = match self {
            Distribution::Finite(m) => m,
            Distribution::Cloud { points, weights } => {
                if points.len() != weights.len() {
                    return Err(Error::Config("cloud points/weights mismatch".into()));
                }
                weights
            }
        };
        let mut sum = 0.0;
        for &w in masses {
            if w.is_nan() || w < 0.0 {
                return Err(Error::Config(format!("negative mass {w}")));
            }
            sum += w;
        }
        if (sum - 1.0).abs() > MASS_TOL {
            return Err(Error::Config(format!(
                "distribution masses sum to {sum}, expected 1 within {MASS_TOL}"
            )));
        }
        Ok(())
    }

    pub fn finite_masses(&self) -> Result<&[f64]> {
        match self {
            Distribution::Finite(m) => Ok(m),
            Distribution::Cloud { .. } => Err(Error::UnsupportedExact(
                "a finite-alphabet distribution is required".into(),
            )),
        }
    }

    /// Mass of a target set.
    pub fn mass_in(&self, set: &TargetSet) -> f64 {
        match self {
            Distribution::Finite(masses) => masses
                .iter()
                .enumerate()
                .filter(|(sym, _)| set.contains_symbol(*sym))
                .map(|(_, &w)| w)
                .sum(),
            Distribution::Cloud { points, weights } => points
                .iter()
                .zip(weights)
                .filter(|(&x, _)| set.contains_point(x))
                .map(|(_, &w)| w)
                .sum(),
        }
    }

    /// Draws one trait.
    pub fn sample(&self, rng: &mut Rng) -> Trait {
        match self {
            Distribution::Finite(masses) => Trait::Sym(draw_index(masses, rng)),
            Distribution::Cloud { points, weights } => Trait::Pos(points[draw_index(weights, rng)]),
        }
    }
}

/// Kernel-product order for n-step distributions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Order {
    /// `nu Q_0 Q_1 ... Q_{n-1}`: the law of `Y_n` under `xi`.
    Forward,
    /// `nu Q_{n-1} ... Q_0`: the law of `Y_n` under the reversed
    /// environment `xi^(n)`.
    Backward,
}

/// Exact n-step distribution of the auxiliary chain over the whole
/// sequence, in the requested order. Finite-alphabet models only.
pub fn aux_n_step_distribution(
    init: &Distribution,
    seq: &EnvSequence,
    model: &TraitModel,
    order: Order,
) -> Result<Distribution> {
    let masses = init.finite_masses()?.to_vec();
    if !model.is_finite() {
        return Err(Error::UnsupportedExact(
            "n-step distributions need a finite alphabet; use Monte Carlo sampling".into(),
        ));
    }
    let kernels = exact_kernels(seq, model)?;
    let mut dist = masses;
    match order {
        Order::Forward => {
            for q in &kernels {
                dist = q.apply_left(&dist);
            }
        }
        Order::Backward => {
            for q in kernels.iter().rev() {
                dist = q.apply_left(&dist);
            }
        }
    }
    Ok(Distribution::Finite(dist))
}

/// Samples a path `Y_0, ..., Y_n` of the auxiliary chain along `seq`.
pub fn sample_aux_path(
    x0: Trait,
    seq: &EnvSequence,
    model: &TraitModel,
    rng: &mut Rng,
) -> Result<Vec<Trait>> {
    let mut by_id: std::collections::HashMap<usize, AuxKernel> = Default::default();
    let mut path = Vec::with_capacity(seq.len() + 1);
    path.push(x0);
    let mut x = x0;
    for state in seq.states() {
        if let std::collections::hash_map::Entry::Vacant(slot) = by_id.entry(state.id) {
            slot.insert(build_aux_kernel(state, model)?);
        }
        x = by_id[&state.id].step(x, rng);
        path.push(x);
    }
    Ok(path)
}

/// Draws `(N, children traits)` for one individual at trait `x` under the
/// state's offspring law and the model's kernels.
pub fn sample_offspring(
    state: &EnvState,
    model: &TraitModel,
    x: Trait,
    rng: &mut Rng,
) -> Result<(usize, Vec<Trait>)> {
    let k = draw_index(&state.offspring_pmf, rng);
    let children = sample_children(state, model, x, k, rng)?;
    Ok((k, children))
}

/// Children traits given the realized litter size.
pub fn sample_children(
    state: &EnvState,
    model: &TraitModel,
    x: Trait,
    litter: usize,
    rng: &mut Rng,
) -> Result<Vec<Trait>> {
    if litter == 0 {
        return Ok(Vec::new());
    }
    match model {
        TraitModel::SymmetricIndependent { base } => {
            let row = base.row(x.symbol());
            Ok((0..litter)
                .map(|_| Trait::Sym(draw_index(row, rng)))
                .collect())
        }
        TraitModel::FiniteStateJoint { per_state, joint } => {
            if let Some(hook) = joint {
                let syms = hook.0.sample_siblings(state.id, litter, x.symbol(), rng);
                if syms.len() != litter {
                    return Err(Error::Config(format!(
                        "joint sampler returned {} siblings for litter {litter}",
                        syms.len()
                    )));
                }
                return Ok(syms.into_iter().map(Trait::Sym).collect());
            }
            let set = &per_state[state.id];
            Ok((0..litter)
                .map(|i| Trait::Sym(draw_index(set.kernel(litter, i).row(x.symbol()), rng)))
                .collect())
        }
        TraitModel::IidIncrements { per_state } => {
            let dist = &per_state[state.id];
            let pos = x.position();
            Ok((0..litter)
                .map(|_| Trait::Pos(pos + dist.sample(rng)))
                .collect())
        }
        TraitModel::LocationRwre { location } => {
            let pos = x.position();
            let w = location.omega_at(pos as i64);
            Ok((0..litter)
                .map(|_| {
                    let right = rng.gen::<f64>() < w;
                    Trait::Pos(if right { pos + 1.0 } else { pos - 1.0 })
                })
                .collect())
        }
    }
}
