//! Environment sequences and per-state offspring laws.
//!
//! The environment is a stationary ergodic sequence of states, each state
//! carrying an offspring distribution for that generation. Cumulative mean
//! population sizes are carried in log space throughout; the raw product
//! overflows well before desk horizons end.

use crate::error::{Error, Result};
use crate::rng::Rng;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

/// Probability weights must sum to 1 to this tolerance.
pub const WEIGHT_TOL: f64 = 1e-12;

/// One realized environment component: an offspring law `{p_k}` with its
/// mean. The `id` doubles as the key under which trait kernels look up
/// their per-state parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvState {
    pub id: usize,
    pub offspring_pmf: Vec<f64>,
}

impl EnvState {
    pub fn new(id: usize, offspring_pmf: Vec<f64>) -> Result<Self> {
        let state = Self { id, offspring_pmf };
        state.validate()?;
        Ok(state)
    }

    pub fn validate(&self) -> Result<()> {
        if self.offspring_pmf.is_empty() {
            return Err(Error::Config(format!(
                "state {}: empty offspring pmf",
                self.id
            )));
        }
        let mut sum = 0.0;
        for (k, &p) in self.offspring_pmf.iter().enumerate() {
            if p.is_nan() || p < 0.0 || !p.is_finite() {
                return Err(Error::Config(format!(
                    "state {}: offspring pmf entry p_{k} = {p} is invalid",
                    self.id
                )));
            }
            sum += p;
        }
        if (sum - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::Config(format!(
                "state {}: offspring pmf sums to {sum}, expected 1 within {WEIGHT_TOL}",
                self.id
            )));
        }
        Ok(())
    }

    /// Mean offspring count `m = sum_k k p_k`.
    pub fn mean(&self) -> f64 {
        self.offspring_pmf
            .iter()
            .enumerate()
            .map(|(k, &p)| k as f64 * p)
            .sum()
    }

    /// Second moment `E N^2`.
    pub fn second_moment(&self) -> f64 {
        self.offspring_pmf
            .iter()
            .enumerate()
            .map(|(k, &p)| (k * k) as f64 * p)
            .sum()
    }

    pub fn max_litter(&self) -> usize {
        self.offspring_pmf
            .iter()
            .rposition(|&p| p > 0.0)
            .unwrap_or(0)
    }
}

/// Spatial environment for the location random walk: step-right
/// probabilities on a periodic integer window, each in `(delta, 1 - delta)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocationEnv {
    pub omega: Vec<f64>,
    pub delta: f64,
}

impl LocationEnv {
    pub fn new(omega: Vec<f64>, delta: f64) -> Result<Self> {
        let env = Self { omega, delta };
        env.validate()?;
        Ok(env)
    }

    pub fn validate(&self) -> Result<()> {
        if self.omega.is_empty() {
            return Err(Error::Config("location environment: empty omega window".into()));
        }
        if !(self.delta > 0.0 && self.delta < 0.5) {
            return Err(Error::Config(format!(
                "location environment: delta = {} must lie in (0, 0.5)",
                self.delta
            )));
        }
        for (x, &w) in self.omega.iter().enumerate() {
            if !(w > self.delta && w < 1.0 - self.delta) {
                return Err(Error::Config(format!(
                    "location environment: omega_{x} = {w} outside ({}, {})",
                    self.delta,
                    1.0 - self.delta
                )));
            }
        }
        Ok(())
    }

    pub fn period(&self) -> usize {
        self.omega.len()
    }

    /// Step-right probability at integer site `x` (periodic extension).
    pub fn omega_at(&self, x: i64) -> f64 {
        let l = self.omega.len() as i64;
        self.omega[x.rem_euclid(l) as usize]
    }
}

/// How the environment sequence is generated. All modes are stationary
/// ergodic by construction; `FiniteMarkov` is checked for irreducibility
/// and aperiodicity at load time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum EnvMode {
    Constant(EnvState),
    IidOverStates {
        states: Vec<EnvState>,
        weights: Vec<f64>,
    },
    FiniteMarkov {
        states: Vec<EnvState>,
        transition: Vec<Vec<f64>>,
        initial: Vec<f64>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnvironmentSpec {
    pub mode: EnvMode,
    /// Present only for models with an environment in locations.
    pub location: Option<LocationEnv>,
}

impl EnvironmentSpec {
    pub fn constant(state: EnvState) -> Result<Self> {
        let spec = Self {
            mode: EnvMode::Constant(state),
            location: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn iid(states: Vec<EnvState>, weights: Vec<f64>) -> Result<Self> {
        let spec = Self {
            mode: EnvMode::IidOverStates { states, weights },
            location: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_location(mut self, location: LocationEnv) -> Result<Self> {
        location.validate()?;
        self.location = Some(location);
        Ok(self)
    }

    pub fn states(&self) -> &[EnvState] {
        match &self.mode {
            EnvMode::Constant(s) => std::slice::from_ref(s),
            EnvMode::IidOverStates { states, .. } => states,
            EnvMode::FiniteMarkov { states, .. } => states,
        }
    }

    /// Whether reversal in law is established for this mode. Constant and
    /// i.i.d. sequences are exchangeable; a general Markov mode would need
    /// a detailed-balance argument we do not attempt.
    pub fn reversible_in_law(&self) -> bool {
        matches!(
            self.mode,
            EnvMode::Constant(_) | EnvMode::IidOverStates { .. }
        )
    }

    pub fn validate(&self) -> Result<()> {
        let states = self.states();
        if states.is_empty() {
            return Err(Error::Config("environment: no states".into()));
        }
        for (i, s) in states.iter().enumerate() {
            s.validate()?;
            if s.id != i {
                return Err(Error::Config(format!(
                    "environment: state at position {i} has id {}, ids must be 0..n in order",
                    s.id
                )));
            }
        }
        match &self.mode {
            EnvMode::Constant(_) => {}
            EnvMode::IidOverStates { states, weights } => {
                check_weights(weights, states.len(), "environment weights")?;
            }
            EnvMode::FiniteMarkov {
                states,
                transition,
                initial,
            } => {
                check_weights(initial, states.len(), "initial weights")?;
                if transition.len() != states.len() {
                    return Err(Error::Config(format!(
                        "transition matrix has {} rows for {} states",
                        transition.len(),
                        states.len()
                    )));
                }
                for (i, row) in transition.iter().enumerate() {
                    check_weights(row, states.len(), &format!("transition row {i}"))?;
                }
                check_irreducible_aperiodic(transition)?;
            }
        }
        if let Some(loc) = &self.location {
            loc.validate()?;
        }
        Ok(())
    }
}

fn check_weights(weights: &[f64], expected_len: usize, what: &str) -> Result<()> {
    if weights.len() != expected_len {
        return Err(Error::Config(format!(
            "{what}: length {} does not match state count {expected_len}",
            weights.len()
        )));
    }
    let mut sum = 0.0;
    for &w in weights {
        if w.is_nan() || w < 0.0 {
            return Err(Error::Config(format!("{what}: negative weight {w}")));
        }
        sum += w;
    }
    if (sum - 1.0).abs() > WEIGHT_TOL {
        return Err(Error::Config(format!(
            "{what}: sums to {sum}, expected 1 within {WEIGHT_TOL}"
        )));
    }
    Ok(())
}

/// Irreducibility by reachability on the positive-entry digraph, then
/// aperiodicity via gcd of `level(u) + 1 - level(v)` over edges of a BFS
/// tree (standard period computation for strongly connected digraphs).
fn check_irreducible_aperiodic(transition: &[Vec<f64>]) -> Result<()> {
    let n = transition.len();
    let reachable_from = |start: usize| -> Vec<bool> {
        let mut seen = vec![false; n];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(u) = stack.pop() {
            for v in 0..n {
                if transition[u][v] > 0.0 && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    };
    for s in 0..n {
        if reachable_from(s).iter().any(|&r| !r) {
            return Err(Error::Config(
                "Markov environment: transition matrix is reducible".into(),
            ));
        }
    }

    let mut level = vec![usize::MAX; n];
    let mut queue = std::collections::VecDeque::from([0usize]);
    level[0] = 0;
    let mut g: u64 = 0;
    while let Some(u) = queue.pop_front() {
        for v in 0..n {
            if transition[u][v] <= 0.0 {
                continue;
            }
            if level[v] == usize::MAX {
                level[v] = level[u] + 1;
                queue.push_back(v);
            } else {
                let diff = (level[u] as i64 + 1 - level[v] as i64).unsigned_abs();
                g = gcd(g, diff);
            }
        }
    }
    if g != 1 {
        return Err(Error::Config(format!(
            "Markov environment: transition matrix is periodic (period {g})"
        )));
    }
    Ok(())
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// A realized environment sequence `(xi_0, ..., xi_{n-1})` together with
/// cumulative log means `log P_0 = 0, ..., log P_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvSequence {
    states: Vec<EnvState>,
    log_cumulative_means: Vec<f64>,
}

impl EnvSequence {
    pub fn from_states(states: Vec<EnvState>) -> Self {
        let mut log_cumulative_means = Vec::with_capacity(states.len() + 1);
        let mut acc = 0.0;
        log_cumulative_means.push(acc);
        for s in &states {
            acc += s.mean().ln();
            log_cumulative_means.push(acc);
        }
        Self {
            states,
            log_cumulative_means,
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, gen: usize) -> &EnvState {
        &self.states[gen]
    }

    pub fn states(&self) -> &[EnvState] {
        &self.states
    }

    /// `log P_k` for `k` in `0..=len`.
    pub fn log_p(&self, k: usize) -> f64 {
        self.log_cumulative_means[k]
    }

    pub fn log_cumulative_means(&self) -> &[f64] {
        &self.log_cumulative_means
    }
}

/// Draws an environment sequence of length `n`; a pure function of
/// `(spec, seed, n)`.
pub fn sample_env_sequence(spec: &EnvironmentSpec, seed: u64, n: usize) -> Result<EnvSequence> {
    if n == 0 {
        return Err(Error::Argument("environment length must be >= 1".into()));
    }
    spec.validate()?;
    let mut rng = crate::rng::env_rng(seed);
    let states = match &spec.mode {
        EnvMode::Constant(s) => vec![s.clone(); n],
        EnvMode::IidOverStates { states, weights } => (0..n)
            .map(|_| states[draw_index(weights, &mut rng)].clone())
            .collect(),
        EnvMode::FiniteMarkov {
            states,
            transition,
            initial,
        } => {
            let mut seq = Vec::with_capacity(n);
            let mut current = draw_index(initial, &mut rng);
            seq.push(states[current].clone());
            for _ in 1..n {
                current = draw_index(&transition[current], &mut rng);
                seq.push(states[current].clone());
            }
            seq
        }
    };
    Ok(EnvSequence::from_states(states))
}

/// Inverse-CDF draw from a finite weight vector.
pub(crate) fn draw_index(weights: &[f64], rng: &mut Rng) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.len() - 1
}

/// The environment time reversed: `(xi_{n-1}, ..., xi_0)`, with normalizers
/// recomputed for the reversed order. The total `log P_n` is unchanged.
pub fn reverse_env(seq: &EnvSequence) -> EnvSequence {
    let mut states = seq.states.clone();
    states.reverse();
    EnvSequence::from_states(states)
}

/// The shift `T^r`: drops the first `r` components and rebases `P_0 = 1`.
pub fn shift_env(seq: &EnvSequence, r: usize) -> Result<EnvSequence> {
    if r > seq.len() {
        return Err(Error::Argument(format!(
            "shift offset {r} exceeds sequence length {}",
            seq.len()
        )));
    }
    Ok(EnvSequence::from_states(seq.states[r..].to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary_state(id: usize) -> EnvState {
        EnvState::new(id, vec![0.0, 0.0, 1.0]).unwrap()
    }

    #[test]
    fn constant_mode_replicates_state_and_logs_means() {
        let spec = EnvironmentSpec::constant(binary_state(0)).unwrap();
        let seq = sample_env_sequence(&spec, 0, 5).unwrap();
        assert_eq!(seq.len(), 5);
        assert!(seq.states().iter().all(|s| s == seq.state(0)));
        assert!((seq.log_p(5) - 5.0 * 2.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn iid_log_p_matches_realized_sum() {
        let a = EnvState::new(0, vec![0.0, 0.0, 1.0]).unwrap(); // m = 2
        let b = EnvState::new(1, vec![0.0, 0.0, 0.0, 1.0]).unwrap(); // m = 3
        let spec = EnvironmentSpec::iid(vec![a, b], vec![0.5, 0.5]).unwrap();
        let seq = sample_env_sequence(&spec, 11, 20).unwrap();
        let direct: f64 = seq.states().iter().map(|s| s.mean().ln()).sum();
        assert!((seq.log_p(20) - direct).abs() < 1e-12);
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let a = EnvState::new(0, vec![0.5, 0.5]).unwrap();
        let b = EnvState::new(1, vec![0.0, 1.0]).unwrap();
        let spec = EnvironmentSpec {
            mode: EnvMode::FiniteMarkov {
                states: vec![a, b],
                transition: vec![vec![0.3, 0.7], vec![0.6, 0.4]],
                initial: vec![0.5, 0.5],
            },
            location: None,
        };
        let s1 = sample_env_sequence(&spec, 7, 10).unwrap();
        let s2 = sample_env_sequence(&spec, 7, 10).unwrap();
        assert_eq!(s1, s2);
    }

    #[test]
    fn exp_log_p_matches_direct_product_at_small_n() {
        let a = EnvState::new(0, vec![0.1, 0.4, 0.5]).unwrap();
        let b = EnvState::new(1, vec![0.0, 0.3, 0.3, 0.4]).unwrap();
        let spec = EnvironmentSpec::iid(vec![a, b], vec![0.4, 0.6]).unwrap();
        let seq = sample_env_sequence(&spec, 3, 60).unwrap();
        let mut product = 1.0;
        for (k, s) in seq.states().iter().enumerate() {
            product *= s.mean();
            let rel = (seq.log_p(k + 1).exp() - product).abs() / product;
            assert!(rel < 1e-10, "generation {k}: rel err {rel}");
        }
    }

    #[test]
    fn reverse_preserves_total_and_reverses_states() {
        let a = EnvState::new(0, vec![0.0, 0.0, 1.0]).unwrap();
        let b = EnvState::new(1, vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        let seq = EnvSequence::from_states(vec![a.clone(), a.clone(), b.clone()]);
        let rev = reverse_env(&seq);
        assert_eq!(rev.states(), &[b, a.clone(), a]);
        assert!((rev.log_p(3) - seq.log_p(3)).abs() < 1e-12);
        assert_eq!(reverse_env(&rev), seq);
    }

    #[test]
    fn shift_drops_prefix_and_rebases() {
        let a = EnvState::new(0, vec![0.0, 0.0, 1.0]).unwrap();
        let b = EnvState::new(1, vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        let seq = EnvSequence::from_states(vec![a.clone(), b.clone(), a.clone()]);
        assert_eq!(shift_env(&seq, 0).unwrap(), seq);
        let s2 = shift_env(&seq, 2).unwrap();
        assert_eq!(s2.states(), &[a.clone()]);
        assert_eq!(s2.log_p(0), 0.0);
        // semigroup: shift(shift(s, 1), 1) == shift(s, 2)
        let once = shift_env(&seq, 1).unwrap();
        assert_eq!(shift_env(&once, 1).unwrap(), s2);
        assert!(shift_env(&seq, 4).is_err());
    }

    #[test]
    fn markov_mode_rejects_reducible_and_periodic() {
        let a = EnvState::new(0, vec![0.5, 0.5]).unwrap();
        let b = EnvState::new(1, vec![0.0, 1.0]).unwrap();
        let reducible = EnvironmentSpec {
            mode: EnvMode::FiniteMarkov {
                states: vec![a.clone(), b.clone()],
                transition: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
                initial: vec![0.5, 0.5],
            },
            location: None,
        };
        assert!(reducible.validate().is_err());

        let periodic = EnvironmentSpec {
            mode: EnvMode::FiniteMarkov {
                states: vec![a, b],
                transition: vec![vec![0.0, 1.0], vec![1.0, 0.0]],
                initial: vec![0.5, 0.5],
            },
            location: None,
        };
        assert!(periodic.validate().is_err());
    }

    #[test]
    fn iid_state_frequencies_match_weights() {
        let a = EnvState::new(0, vec![0.5, 0.5]).unwrap();
        let b = EnvState::new(1, vec![0.0, 1.0]).unwrap();
        let weights = [0.3, 0.7];
        let spec = EnvironmentSpec::iid(vec![a, b], weights.to_vec()).unwrap();
        let n = 100_000;
        let seq = sample_env_sequence(&spec, 5, n).unwrap();
        for (id, &w) in weights.iter().enumerate() {
            let freq =
                seq.states().iter().filter(|s| s.id == id).count() as f64 / n as f64;
            let se = (w * (1.0 - w) / n as f64).sqrt();
            assert!(
                (freq - w).abs() <= 3.0 * se,
                "state {id}: freq {freq} vs weight {w}"
            );
        }
    }

    #[test]
    fn location_env_bounds_are_enforced() {
        assert!(LocationEnv::new(vec![0.5, 0.5], 0.05).is_ok());
        assert!(LocationEnv::new(vec![0.5, 0.01], 0.05).is_err());
        assert!(LocationEnv::new(vec![], 0.05).is_err());
        let loc = LocationEnv::new(vec![0.3, 0.7], 0.05).unwrap();
        assert_eq!(loc.omega_at(-1), 0.7);
        assert_eq!(loc.omega_at(2), 0.3);
    }
}
