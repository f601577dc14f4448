//! Exact small-instance oracles and condition checkers: the many-to-one
//! identity, Doeblin screening, and Cesaro normalized-size checks.

use crate::env::EnvSequence;
use crate::error::{Error, Result};
use crate::kernels::{
    exact_kernels, sample_aux_path, Distribution, Trait, TraitModel,
};
use crate::measure::TargetSet;
use crate::rng::Rng;
use crate::sim::{simulate, SimOptions, Trajectory};
use crate::stats;
use serde::Serialize;

/// Enumeration limits for the exact many-to-one oracle.
const MAX_ENUM_LITTER: usize = 3;
const MAX_ENUM_HORIZON: usize = 4;

/// A scalar function of the trait, in the forms the harnesses need.
#[derive(Debug, Clone)]
pub enum TraitFn {
    One,
    Indicator(TargetSet),
    /// Explicit table over a finite alphabet.
    Values(Vec<f64>),
}

impl TraitFn {
    pub fn eval(&self, t: Trait) -> f64 {
        match self {
            TraitFn::One => 1.0,
            TraitFn::Indicator(set) => {
                if t.in_set(set) {
                    1.0
                } else {
                    0.0
                }
            }
            TraitFn::Values(table) => table[t.symbol()],
        }
    }

    /// Value table over a finite alphabet of size `dim`.
    pub fn table(&self, dim: usize) -> Vec<f64> {
        match self {
            TraitFn::One => vec![1.0; dim],
            TraitFn::Indicator(set) => (0..dim)
                .map(|s| if set.contains_symbol(s) { 1.0 } else { 0.0 })
                .collect(),
            TraitFn::Values(table) => table.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Tolerance {
    Relative { tol: f64 },
    Absolute { tol: f64 },
    ThreeSigma { se: f64 },
}

/// Two routes to one quantity, with the verdict of their comparison.
#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub lhs: f64,
    pub rhs: f64,
    /// Standard errors of the two estimates; zero for exact routes.
    pub lhs_se: f64,
    pub rhs_se: f64,
    pub abs_error: f64,
    pub rel_error: f64,
    pub tolerance: Tolerance,
    pub usable: bool,
    pub pass: bool,
    pub method: String,
}

impl OracleReport {
    fn compare(lhs: f64, rhs: f64, ses: (f64, f64), tolerance: Tolerance, method: String) -> Self {
        let abs_error = (lhs - rhs).abs();
        let scale = lhs.abs().max(rhs.abs());
        let rel_error = if scale == 0.0 { 0.0 } else { abs_error / scale };
        let within = match tolerance {
            Tolerance::Relative { tol } => rel_error <= tol,
            Tolerance::Absolute { tol } => abs_error <= tol,
            Tolerance::ThreeSigma { se } => abs_error <= 3.0 * se,
        };
        let usable = lhs.is_finite() && rhs.is_finite();
        OracleReport {
            lhs,
            rhs,
            lhs_se: ses.0,
            rhs_se: ses.1,
            abs_error,
            rel_error,
            tolerance,
            usable,
            pass: usable && within,
            method,
        }
    }

    fn unusable(tolerance: Tolerance, method: String) -> Self {
        OracleReport {
            lhs: f64::NAN,
            rhs: f64::NAN,
            lhs_se: f64::NAN,
            rhs_se: f64::NAN,
            abs_error: f64::NAN,
            rel_error: f64::NAN,
            tolerance,
            usable: false,
            pass: false,
            method,
        }
    }
}

/// Sum of floating-point terms accumulated smallest-magnitude first.
fn sorted_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap());
    terms.into_iter().sum()
}

/// The exact many-to-one check: the normalized expected sum of `f` over
/// generation `n` equals the expectation of `f` along the auxiliary chain.
/// The left side is computed by exhaustive enumeration over litter sizes
/// and child-trait configurations, generation by generation, with exact
/// probability weights and sorted accumulation; the right side by the
/// auxiliary matrix product. Neither side touches the other's code path.
pub fn many_to_one_exact(
    model: &TraitModel,
    seq: &EnvSequence,
    n: usize,
    f: &TraitFn,
    x0: usize,
) -> Result<OracleReport> {
    let dim = model.alphabet().ok_or_else(|| {
        Error::UnsupportedExact("many-to-one enumeration needs a finite alphabet".into())
    })?;
    if n > MAX_ENUM_HORIZON {
        return Err(Error::EnumerationBudget(format!(
            "horizon {n} > {MAX_ENUM_HORIZON}"
        )));
    }
    if n > seq.len() {
        return Err(Error::Argument(format!(
            "horizon {n} exceeds environment length {}",
            seq.len()
        )));
    }
    for state in &seq.states()[..n] {
        if state.max_litter() > MAX_ENUM_LITTER {
            return Err(Error::EnumerationBudget(format!(
                "state {} has litter sizes up to {} > {MAX_ENUM_LITTER}",
                state.id,
                state.max_litter()
            )));
        }
    }
    let table = f.table(dim);

    // Left side: S[r][x] = E[ sum over generation-n descendants of f | trait
    // x at generation r ], built backwards. Sibling traits enter through
    // their (k, i)-marginals; the subtree sums are additive, so no joint
    // structure is needed.
    let mut s = table.clone();
    for r in (0..n).rev() {
        let state = seq.state(r);
        let mut next = vec![0.0; dim];
        for x in 0..dim {
            let mut terms: Vec<f64> = Vec::new();
            for (k, &p_k) in state.offspring_pmf.iter().enumerate() {
                if p_k <= 0.0 || k == 0 {
                    continue;
                }
                let rows: Vec<&[f64]> = (0..k)
                    .map(|i| child_kernel_row(model, state.id, k, i, x))
                    .collect::<Result<_>>()?;
                // Odometer over child-trait tuples in alphabet^k.
                let mut tuple = vec![0usize; k];
                loop {
                    let mut weight = p_k;
                    let mut value = 0.0;
                    for (i, &y) in tuple.iter().enumerate() {
                        weight *= rows[i][y];
                        value += s[y];
                    }
                    if weight > 0.0 {
                        terms.push(weight * value);
                    }
                    let mut pos = 0;
                    loop {
                        if pos == k {
                            break;
                        }
                        tuple[pos] += 1;
                        if tuple[pos] < dim {
                            break;
                        }
                        tuple[pos] = 0;
                        pos += 1;
                    }
                    if pos == k {
                        break;
                    }
                }
            }
            next[x] = sorted_sum(terms);
        }
        s = next;
    }
    let expected_n: f64 = seq.states()[..n].iter().map(|st| st.mean()).product();
    let lhs = s[x0] / expected_n;

    // Right side: (Q_0 ... Q_{n-1} f)(x0).
    let kernels = exact_kernels(seq, model)?;
    let mut g = table;
    for q in kernels[..n].iter().rev() {
        g = q.apply_right(&g);
    }
    let rhs = g[x0];

    Ok(OracleReport::compare(
        lhs,
        rhs,
        (0.0, 0.0),
        Tolerance::Relative { tol: 1e-10 },
        format!("many-to-one exact, n={n}, x0={x0}"),
    ))
}

fn child_kernel_row(
    model: &TraitModel,
    state_id: usize,
    litter: usize,
    child: usize,
    x: usize,
) -> Result<&[f64]> {
    match model {
        TraitModel::SymmetricIndependent { base } => Ok(base.row(x)),
        TraitModel::FiniteStateJoint { per_state, .. } => {
            Ok(per_state[state_id].kernel(litter, child).row(x))
        }
        _ => Err(Error::UnsupportedExact(
            "numeric-trait models have no kernel rows".into(),
        )),
    }
}

/// Normalizes a signed sum by `exp(log_p)` in log space.
fn normalized(sum: f64, log_p: f64) -> f64 {
    if sum == 0.0 {
        0.0
    } else if sum > 0.0 {
        (sum.ln() - log_p).exp()
    } else {
        -(((-sum).ln() - log_p).exp())
    }
}

/// Monte Carlo many-to-one check, usable for every model. The left side
/// averages `sum_v f(X(v)) / P_n` over simulated trees; the right side is
/// the exact matrix route when the alphabet is finite and an independent
/// auxiliary-path average otherwise. Passes within three combined standard
/// errors.
#[allow(clippy::too_many_arguments)]
pub fn many_to_one_mc(
    model: &TraitModel,
    seq: &EnvSequence,
    n: usize,
    f: &TraitFn,
    x0: Trait,
    replicates: u64,
    cap: u64,
    rng: &mut Rng,
) -> Result<OracleReport> {
    if n > seq.len() {
        return Err(Error::Argument(format!(
            "horizon {n} exceeds environment length {}",
            seq.len()
        )));
    }
    let init = match (model.alphabet(), x0) {
        (Some(dim), Trait::Sym(s)) => Distribution::point_mass_symbol(s, dim),
        (None, Trait::Pos(x)) => Distribution::point_mass_position(x),
        _ => return Err(Error::Argument("start trait does not match the model".into())),
    };
    let opts = SimOptions {
        cap,
        record_measures: true,
        ..SimOptions::default()
    };
    let log_p = seq.log_p(n);
    let mut lhs_samples = Vec::with_capacity(replicates as usize);
    for _ in 0..replicates {
        let out = simulate(seq, &init, n, model, &opts, rng)?;
        if out.trajectory.truncated {
            return Ok(OracleReport::unusable(
                Tolerance::ThreeSigma { se: f64::NAN },
                format!("many-to-one MC, n={n}: population cap breached"),
            ));
        }
        let measure = out.trajectory.measures[n].as_ref().expect("recorded");
        let sum = match measure {
            crate::measure::CountingMeasure::Finite { counts } => {
                let table = f.table(counts.len());
                counts
                    .iter()
                    .zip(&table)
                    .map(|(&c, &v)| c as f64 * v)
                    .sum::<f64>()
            }
            crate::measure::CountingMeasure::Numeric { positions } => {
                positions.iter().map(|&x| f.eval(Trait::Pos(x))).sum()
            }
        };
        lhs_samples.push(normalized(sum, log_p));
    }
    let lhs = stats::mean(&lhs_samples);
    let lhs_se = stats::standard_error(&lhs_samples);

    let (rhs, rhs_se) = match model.alphabet() {
        Some(dim) => {
            let kernels = exact_kernels(seq, model)?;
            let mut g = f.table(dim);
            for q in kernels[..n].iter().rev() {
                g = q.apply_right(&g);
            }
            (g[x0.symbol()], 0.0)
        }
        None => {
            let prefix = EnvSequence::from_states(seq.states()[..n].to_vec());
            let samples: Vec<f64> = (0..replicates)
                .map(|_| {
                    sample_aux_path(x0, &prefix, model, rng)
                        .map(|path| f.eval(path[n]))
                })
                .collect::<Result<_>>()?;
            (stats::mean(&samples), stats::standard_error(&samples))
        }
    };
    let se = (lhs_se * lhs_se + rhs_se * rhs_se).sqrt();
    Ok(OracleReport::compare(
        lhs,
        rhs,
        (lhs_se, rhs_se),
        Tolerance::ThreeSigma { se },
        format!("many-to-one MC, n={n}, replicates={replicates}"),
    ))
}

/// Doeblin-type screening of the auxiliary chain: max over window starts of
/// the worst row ratio of the `b`-step product, singleton test sets.
#[derive(Debug, Clone, Serialize)]
pub struct DoeblinReport {
    pub step_count: usize,
    pub bound: f64,
    /// Worst ratio per window start; `inf` when some column mixes a zero
    /// with a positive entry.
    pub per_window: Vec<f64>,
    pub max_ratio: f64,
    pub pass: bool,
}

pub fn check_doeblin(
    model: &TraitModel,
    seq: &EnvSequence,
    b: usize,
    m_bound: f64,
) -> Result<DoeblinReport> {
    if b == 0 || b > seq.len() {
        return Err(Error::Argument(format!(
            "window length {b} out of range 1..={}",
            seq.len()
        )));
    }
    let kernels = exact_kernels(seq, model)?;
    let dim = kernels[0].dim();
    let mut per_window = Vec::new();
    for r in 0..=(seq.len() - b) {
        let mut prod = kernels[r].clone();
        for q in &kernels[r + 1..r + b] {
            prod = prod.matmul(q);
        }
        let mut worst: f64 = 1.0;
        for col in 0..dim {
            for x in 0..dim {
                for y in 0..dim {
                    let (a, c) = (prod.entry(x, col), prod.entry(y, col));
                    if a == 0.0 && c == 0.0 {
                        continue;
                    }
                    if c == 0.0 {
                        worst = f64::INFINITY;
                    } else {
                        worst = worst.max(a / c);
                    }
                }
            }
        }
        per_window.push(worst);
    }
    let max_ratio = per_window.iter().copied().fold(1.0, f64::max);
    Ok(DoeblinReport {
        step_count: b,
        bound: m_bound,
        per_window,
        max_ratio,
        pass: max_ratio.is_finite() && max_ratio <= m_bound,
    })
}

/// Cesaro average of the normalized sizes against the final value.
#[derive(Debug, Clone, Serialize)]
pub struct CesaroReport {
    pub cesaro_mean: f64,
    pub final_w: f64,
    pub gap: f64,
}

pub fn cesaro_w_check(trajectory: &Trajectory) -> Result<CesaroReport> {
    if trajectory.truncated {
        return Err(Error::Argument(
            "Cesaro check needs a non-truncated trajectory".into(),
        ));
    }
    let n = trajectory.stats.len() - 1;
    if n == 0 {
        return Err(Error::Argument("trajectory has no steps".into()));
    }
    let cesaro_mean =
        trajectory.stats[1..].iter().map(|s| s.w).sum::<f64>() / n as f64;
    let final_w = trajectory.final_w();
    Ok(CesaroReport {
        cesaro_mean,
        final_w,
        gap: (cesaro_mean - final_w).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{EnvSequence, EnvState};
    use crate::kernels::JointKernelSet;
    use crate::matrix::StochasticMatrix;
    use crate::rng::aux_rng;

    fn two_state_kernel() -> StochasticMatrix {
        StochasticMatrix::new(vec![vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap()
    }

    fn binary_seq(n: usize) -> EnvSequence {
        EnvSequence::from_states(vec![EnvState::new(0, vec![0.0, 0.0, 1.0]).unwrap(); n])
    }

    fn symmetric_model() -> TraitModel {
        TraitModel::SymmetricIndependent {
            base: two_state_kernel(),
        }
    }

    #[test]
    fn constant_function_normalizes_on_both_sides() {
        let report =
            many_to_one_exact(&symmetric_model(), &binary_seq(3), 3, &TraitFn::One, 0).unwrap();
        assert!((report.lhs - 1.0).abs() < 1e-12);
        assert!((report.rhs - 1.0).abs() < 1e-12);
        assert!(report.pass);
    }

    #[test]
    fn zero_horizon_returns_f_at_start() {
        let f = TraitFn::Values(vec![0.25, -1.5]);
        let report = many_to_one_exact(&symmetric_model(), &binary_seq(2), 0, &f, 1).unwrap();
        assert_eq!(report.lhs, -1.5);
        assert_eq!(report.rhs, -1.5);
        assert!(report.pass);
    }

    #[test]
    fn two_step_indicator_matches_hand_squared_kernel() {
        let f = TraitFn::Indicator(TargetSet::Symbols { set: vec![0] });
        let report = many_to_one_exact(&symmetric_model(), &binary_seq(2), 2, &f, 0).unwrap();
        // (p^2)(s0, s0) = 0.9*0.9 + 0.1*0.2 = 0.83
        assert!((report.lhs - 0.83).abs() <= 1e-12, "lhs {}", report.lhs);
        assert!((report.rhs - 0.83).abs() <= 1e-12);
        assert!(report.pass && report.rel_error <= 1e-12);
    }

    #[test]
    fn exact_oracle_covers_slot_dependent_kernels() {
        // Distinct first/second-child kernels; compare against a full joint
        // enumeration over all tree shapes and trait assignments, written
        // independently below for n = 2, litter <= 2, alphabet 2.
        let p21 = StochasticMatrix::new(vec![vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        let p22 = StochasticMatrix::new(vec![vec![0.5, 0.5], vec![0.3, 0.7]]).unwrap();
        let p11 = StochasticMatrix::new(vec![vec![0.6, 0.4], vec![0.1, 0.9]]).unwrap();
        let pmf = vec![0.2, 0.3, 0.5];
        let state = EnvState::new(0, pmf.clone()).unwrap();
        let model = TraitModel::FiniteStateJoint {
            per_state: vec![JointKernelSet {
                per_litter: vec![
                    vec![],
                    vec![p11.clone()],
                    vec![p21.clone(), p22.clone()],
                ],
            }],
            joint: None,
        };
        let seq = EnvSequence::from_states(vec![state.clone(); 2]);
        let f_table = [1.0, -2.0];
        let f = TraitFn::Values(f_table.to_vec());
        let report = many_to_one_exact(&model, &seq, 2, &f, 0).unwrap();
        assert!(report.pass, "{report:?}");

        // Full joint enumeration: every (k_root, root-children traits), then
        // every (k, traits) per child.
        let kernel_row = |k: usize, i: usize, _x: usize| -> &StochasticMatrix {
            match (k, i) {
                (1, 0) => &p11,
                (2, 0) => &p21,
                (2, 1) => &p22,
                _ => unreachable!(),
            }
        };
        let mut brute = 0.0;
        for k_root in 0..=2usize {
            if pmf[k_root] == 0.0 {
                continue;
            }
            let child_tuples = (0..2u32.pow(k_root as u32)).map(|bits| {
                (0..k_root).map(|i| ((bits >> i) & 1) as usize).collect::<Vec<_>>()
            });
            for kids in child_tuples {
                let mut w_root = pmf[k_root];
                for (i, &y) in kids.iter().enumerate() {
                    w_root *= kernel_row(k_root, i, 0).entry(0, y);
                }
                if w_root == 0.0 {
                    continue;
                }
                // Expected sum over generation 2 given the generation-1
                // traits: per child, sum over its own litter configuration.
                let mut expected = 0.0;
                for &y in &kids {
                    for k in 0..=2usize {
                        if pmf[k] == 0.0 {
                            continue;
                        }
                        for bits in 0..2u32.pow(k as u32) {
                            let mut w = pmf[k];
                            let mut val = 0.0;
                            for i in 0..k {
                                let z = ((bits >> i) & 1) as usize;
                                w *= kernel_row(k, i, y).entry(y, z);
                                val += f_table[z];
                            }
                            expected += w * val;
                        }
                    }
                }
                brute += w_root * expected;
            }
        }
        let mean = state.mean();
        let brute_lhs = brute / (mean * mean);
        assert!(
            (report.lhs - brute_lhs).abs() <= 1e-12,
            "dp {} vs brute {}",
            report.lhs,
            brute_lhs
        );
    }

    #[test]
    fn enumeration_budget_is_enforced() {
        let big = EnvState::new(0, vec![0.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        let seq = EnvSequence::from_states(vec![big; 2]);
        assert!(matches!(
            many_to_one_exact(&symmetric_model(), &seq, 2, &TraitFn::One, 0),
            Err(Error::EnumerationBudget(_))
        ));
        assert!(matches!(
            many_to_one_exact(&symmetric_model(), &binary_seq(6), 5, &TraitFn::One, 0),
            Err(Error::EnumerationBudget(_))
        ));
    }

    #[test]
    fn shifted_environment_case_passes() {
        let a = EnvState::new(0, vec![0.0, 0.5, 0.5]).unwrap();
        let b = EnvState::new(1, vec![0.0, 0.0, 1.0]).unwrap();
        let seq = EnvSequence::from_states(vec![a, b.clone(), b.clone(), b]);
        let shifted = crate::env::shift_env(&seq, 1).unwrap();
        let f = TraitFn::Indicator(TargetSet::Symbols { set: vec![1] });
        for (s, n) in [(&seq, 3), (&shifted, 3)] {
            let report = many_to_one_exact(&symmetric_model(), s, n, &f, 0).unwrap();
            assert!(report.pass, "{report:?}");
        }
    }

    #[test]
    fn mc_oracle_agrees_on_deterministic_tree() {
        // Deterministic binary tree with a copy kernel: zero variance.
        let model = TraitModel::SymmetricIndependent {
            base: StochasticMatrix::identity(2),
        };
        let f = TraitFn::Indicator(TargetSet::Symbols { set: vec![0] });
        let mut rng = aux_rng(10);
        let report = many_to_one_mc(
            &model,
            &binary_seq(5),
            5,
            &f,
            Trait::Sym(0),
            50,
            1 << 20,
            &mut rng,
        )
        .unwrap();
        assert_eq!(report.lhs, 1.0);
        assert_eq!(report.rhs, 1.0);
        assert!(report.pass);
    }

    #[test]
    fn mc_oracle_estimates_martingale_mean() {
        let state = EnvState::new(0, vec![0.0, 0.5, 0.5]).unwrap();
        let seq = EnvSequence::from_states(vec![state; 8]);
        let mut rng = aux_rng(11);
        let report = many_to_one_mc(
            &symmetric_model(),
            &seq,
            8,
            &TraitFn::One,
            Trait::Sym(0),
            3000,
            1 << 20,
            &mut rng,
        )
        .unwrap();
        // f = 1 makes the left side an estimator of E W_n = 1.
        assert!((report.rhs - 1.0).abs() < 1e-12);
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn mc_oracle_flags_cap_breach() {
        let mut rng = aux_rng(12);
        let report = many_to_one_mc(
            &symmetric_model(),
            &binary_seq(10),
            10,
            &TraitFn::One,
            Trait::Sym(0),
            5,
            100,
            &mut rng,
        )
        .unwrap();
        assert!(!report.usable && !report.pass);
    }

    #[test]
    fn doeblin_single_step_ratio_of_positive_kernel() {
        let report = check_doeblin(&symmetric_model(), &binary_seq(5), 1, 10.0).unwrap();
        // Max ratio within the kernel: col 0: 0.9/0.2 = 4.5; col 1: 0.8/0.1 = 8.
        assert!((report.max_ratio - 8.0).abs() < 1e-12);
        assert!(report.pass);
        // Constant environment: every window reports the same ratio.
        assert!(report
            .per_window
            .iter()
            .all(|&m| (m - 8.0).abs() < 1e-12));
    }

    #[test]
    fn doeblin_identity_kernel_fails() {
        let model = TraitModel::SymmetricIndependent {
            base: StochasticMatrix::identity(2),
        };
        let report = check_doeblin(&model, &binary_seq(3), 1, 1e12).unwrap();
        assert!(report.max_ratio.is_infinite());
        assert!(!report.pass);
    }

    #[test]
    fn doeblin_ratio_is_monotone_in_window_length() {
        let a = EnvState::new(0, vec![0.0, 0.5, 0.5]).unwrap();
        let b = EnvState::new(1, vec![0.0, 0.0, 1.0]).unwrap();
        let seq = EnvSequence::from_states(vec![
            a.clone(),
            b.clone(),
            a.clone(),
            a,
            b.clone(),
            b,
        ]);
        let mut prev = f64::INFINITY;
        for b_len in 1..=4 {
            let report = check_doeblin(&symmetric_model(), &seq, b_len, 1e9).unwrap();
            assert!(
                report.max_ratio <= prev + 1e-9,
                "b={b_len}: {} > {prev}",
                report.max_ratio
            );
            prev = report.max_ratio;
        }
    }

    #[test]
    fn cesaro_for_deterministic_and_extinct_runs() {
        let init = Distribution::point_mass_symbol(0, 2);
        let mut rng = aux_rng(13);
        let out = simulate(
            &binary_seq(6),
            &init,
            6,
            &symmetric_model(),
            &SimOptions::default(),
            &mut rng,
        )
        .unwrap();
        let report = cesaro_w_check(&out.trajectory).unwrap();
        assert!((report.cesaro_mean - 1.0).abs() < 1e-12);
        assert!((report.final_w - 1.0).abs() < 1e-12);
        assert!(report.gap < 1e-12);

        let dead = EnvState::new(0, vec![1.0]).unwrap();
        let seq = EnvSequence::from_states(vec![dead; 6]);
        let out = simulate(
            &seq,
            &init,
            6,
            &symmetric_model(),
            &SimOptions::default(),
            &mut rng,
        )
        .unwrap();
        let report = cesaro_w_check(&out.trajectory).unwrap();
        assert_eq!(report.cesaro_mean, 0.0);
        assert_eq!(report.final_w, 0.0);
    }
}
