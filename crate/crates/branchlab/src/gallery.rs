//! Preconfigured model instances, addressable by name from the CLI and
//! config files. Each entry bundles an environment spec, a trait model and
//! whatever analytic targets the instance admits; all entries validate at
//! load time.
//!
//! | name   | structure                                                        |
//! |--------|------------------------------------------------------------------|
//! | ex2_1  | symmetric independent kernels, constant environment              |
//! | ex3_1  | homogeneous per-child kernels along a Galton-Watson tree         |
//! | ex3_2  | symmetric homogeneous kernel, random offspring environment       |
//! | ex3_3  | multitype process: per-state, per-child-slot kernels             |
//! | ex3_4  | strictly positive kernels (Doeblin screening instance)           |
//! | ex3_5  | branching walk on the line, increments per time environment      |
//! | ex3_6  | branching walk on the lattice, environment in locations          |

use crate::env::{EnvState, EnvironmentSpec, LocationEnv};
use crate::error::{Error, Result};
use crate::kernels::{
    build_aux_kernel, Distribution, IncrementDist, JointKernelSet, TraitModel,
};
use crate::matrix::StochasticMatrix;
use serde::Deserialize;

/// Names accepted by [`make_example`].
pub const GALLERY_NAMES: [&str; 7] = [
    "ex2_1", "ex3_1", "ex3_2", "ex3_3", "ex3_4", "ex3_5", "ex3_6",
];

/// How CLT normalizers are formed for an entry.
#[derive(Debug, Clone, PartialEq)]
pub enum CltRecipe {
    /// Per-generation increment moments summed along the realized
    /// environment: centering = sum of means, scale = sqrt of summed
    /// variances.
    IncrementMoments,
    /// Externally supplied drift and diffusion constants for the location
    /// walk: centering = n * gamma, scale = sqrt(n * diffusion).
    WalkConstants { gamma: f64, diffusion: f64 },
}

/// Analytic targets an entry carries, when they exist.
#[derive(Debug, Clone, Default)]
pub struct AnalyticTargets {
    /// Fixed point of the (time homogeneous) auxiliary kernel.
    pub stationary: Option<Vec<f64>>,
    pub clt: Option<CltRecipe>,
}

#[derive(Debug, Clone)]
pub struct GalleryEntry {
    pub name: String,
    pub env_spec: EnvironmentSpec,
    pub model: TraitModel,
    pub targets: AnalyticTargets,
}

impl GalleryEntry {
    /// Default initial trait law: point mass at symbol 0 or at the origin.
    pub fn default_init(&self) -> Distribution {
        match self.model.alphabet() {
            Some(dim) => Distribution::point_mass_symbol(0, dim),
            None => Distribution::point_mass_position(0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.env_spec.validate()?;
        self.model.validate_against(self.env_spec.states())?;
        for state in self.env_spec.states() {
            build_aux_kernel(state, &self.model)?;
        }
        Ok(())
    }
}

fn parse_params<T: serde::de::DeserializeOwned + Default>(
    params: &serde_json::Value,
) -> Result<T> {
    if params.is_null() {
        return Ok(T::default());
    }
    serde_json::from_value(params.clone())
        .map_err(|e| Error::Config(format!("model params: {e}")))
}

fn matrix(rows: &[Vec<f64>]) -> Result<StochasticMatrix> {
    StochasticMatrix::new(rows.to_vec())
}

fn default_kernel() -> Vec<Vec<f64>> {
    vec![vec![0.9, 0.1], vec![0.2, 0.8]]
}

fn default_binary_pmf() -> Vec<f64> {
    vec![0.0, 0.0, 1.0]
}

fn states_from_pmfs(pmfs: &[Vec<f64>]) -> Result<Vec<EnvState>> {
    pmfs.iter()
        .enumerate()
        .map(|(id, pmf)| EnvState::new(id, pmf.clone()))
        .collect()
}

fn uniform_weights(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct HomogeneousParams {
    #[serde(default = "default_binary_pmf")]
    pmf: Vec<f64>,
    #[serde(default = "default_kernel")]
    kernel: Vec<Vec<f64>>,
}

impl Default for HomogeneousParams {
    fn default() -> Self {
        Self {
            pmf: default_binary_pmf(),
            kernel: default_kernel(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SymmetricEnvParams {
    #[serde(default = "SymmetricEnvParams::default_pmfs")]
    pmfs: Vec<Vec<f64>>,
    #[serde(default)]
    weights: Option<Vec<f64>>,
    #[serde(default = "default_kernel")]
    kernel: Vec<Vec<f64>>,
}

impl SymmetricEnvParams {
    fn default_pmfs() -> Vec<Vec<f64>> {
        // Means 2 and 2; litters within the enumeration budget.
        vec![vec![0.0, 0.0, 1.0], vec![0.0, 0.5, 0.0, 0.5]]
    }
}

impl Default for SymmetricEnvParams {
    fn default() -> Self {
        Self {
            pmfs: Self::default_pmfs(),
            weights: None,
            kernel: default_kernel(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MultitypeParams {
    #[serde(default = "MultitypeParams::default_pmfs")]
    pmfs: Vec<Vec<f64>>,
    #[serde(default)]
    weights: Option<Vec<f64>>,
    /// One kernel per environment state, applied to every child slot.
    /// Absent: the built-in slot-dependent kernel set.
    #[serde(default)]
    kernels: Option<Vec<Vec<Vec<f64>>>>,
}

impl MultitypeParams {
    fn default_pmfs() -> Vec<Vec<f64>> {
        vec![vec![0.0, 0.0, 1.0], vec![0.0, 0.5, 0.5]]
    }
}

impl Default for MultitypeParams {
    fn default() -> Self {
        Self {
            pmfs: Self::default_pmfs(),
            weights: None,
            kernels: None,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DoeblinParams {
    #[serde(default = "DoeblinParams::default_pmfs")]
    pmfs: Vec<Vec<f64>>,
    #[serde(default)]
    weights: Option<Vec<f64>>,
    #[serde(default = "DoeblinParams::default_kernels")]
    kernels: Vec<Vec<Vec<f64>>>,
}

impl DoeblinParams {
    fn default_pmfs() -> Vec<Vec<f64>> {
        vec![vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 1.0]]
    }
    fn default_kernels() -> Vec<Vec<Vec<f64>>> {
        vec![
            vec![vec![0.85, 0.15], vec![0.75, 0.25]],
            vec![vec![0.8, 0.2], vec![0.7, 0.3]],
        ]
    }
}

impl Default for DoeblinParams {
    fn default() -> Self {
        Self {
            pmfs: Self::default_pmfs(),
            weights: None,
            kernels: Self::default_kernels(),
        }
    }
}

/// Increment law in config form.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IncrementSpec {
    Normal { mean: f64, std_dev: f64 },
    Discrete { support: Vec<f64>, probs: Vec<f64> },
}

impl From<IncrementSpec> for IncrementDist {
    fn from(spec: IncrementSpec) -> Self {
        match spec {
            IncrementSpec::Normal { mean, std_dev } => IncrementDist::Normal { mean, std_dev },
            IncrementSpec::Discrete { support, probs } => {
                IncrementDist::Discrete { support, probs }
            }
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WalkTimeParams {
    #[serde(default = "DoeblinParams::default_pmfs")]
    pmfs: Vec<Vec<f64>>,
    #[serde(default)]
    weights: Option<Vec<f64>>,
    #[serde(default)]
    increments: Option<Vec<IncrementSpec>>,
}

impl Default for WalkTimeParams {
    fn default() -> Self {
        Self {
            pmfs: DoeblinParams::default_pmfs(),
            weights: None,
            increments: None,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WalkLocationParams {
    #[serde(default = "WalkLocationParams::default_pmfs")]
    pmfs: Vec<Vec<f64>>,
    #[serde(default)]
    weights: Option<Vec<f64>>,
    /// Step-right probabilities on a periodic window.
    #[serde(default = "WalkLocationParams::default_omega")]
    omega: Vec<f64>,
    #[serde(default = "WalkLocationParams::default_delta")]
    delta: f64,
    /// Drift and diffusion of the walk; the symmetric default is exact,
    /// any other window needs externally supplied constants.
    #[serde(default)]
    gamma: f64,
    #[serde(default = "WalkLocationParams::default_diffusion")]
    diffusion: f64,
}

impl WalkLocationParams {
    fn default_pmfs() -> Vec<Vec<f64>> {
        vec![vec![0.0, 0.8, 0.2], vec![0.0, 0.9, 0.1]]
    }
    fn default_omega() -> Vec<f64> {
        vec![0.5; 16]
    }
    fn default_delta() -> f64 {
        0.05
    }
    fn default_diffusion() -> f64 {
        1.0
    }
}

impl Default for WalkLocationParams {
    fn default() -> Self {
        Self {
            pmfs: Self::default_pmfs(),
            weights: None,
            omega: Self::default_omega(),
            delta: Self::default_delta(),
            gamma: 0.0,
            diffusion: Self::default_diffusion(),
        }
    }
}

/// Builds a gallery entry by name. Unknown names and out-of-range
/// parameters are configuration errors.
pub fn make_example(name: &str, params: &serde_json::Value) -> Result<GalleryEntry> {
    let entry = match name {
        "ex2_1" => {
            let p: HomogeneousParams = parse_params(params)?;
            let kernel = matrix(&p.kernel)?;
            let state = EnvState::new(0, p.pmf)?;
            GalleryEntry {
                name: name.into(),
                env_spec: EnvironmentSpec::constant(state)?,
                targets: AnalyticTargets {
                    stationary: Some(kernel.stationary()?),
                    clt: None,
                },
                model: TraitModel::SymmetricIndependent { base: kernel },
            }
        }
        "ex3_1" => {
            let p: HomogeneousParams = parse_params(params)?;
            let kernel = matrix(&p.kernel)?;
            let state = EnvState::new(0, p.pmf)?;
            let max_litter = state.max_litter();
            GalleryEntry {
                name: name.into(),
                env_spec: EnvironmentSpec::constant(state)?,
                targets: AnalyticTargets {
                    stationary: Some(kernel.stationary()?),
                    clt: None,
                },
                model: TraitModel::FiniteStateJoint {
                    per_state: vec![JointKernelSet::uniform(kernel, max_litter)],
                    joint: None,
                },
            }
        }
        "ex3_2" => {
            let p: SymmetricEnvParams = parse_params(params)?;
            let kernel = matrix(&p.kernel)?;
            let states = states_from_pmfs(&p.pmfs)?;
            let weights = p.weights.unwrap_or_else(|| uniform_weights(states.len()));
            GalleryEntry {
                name: name.into(),
                env_spec: EnvironmentSpec::iid(states, weights)?,
                targets: AnalyticTargets {
                    stationary: Some(kernel.stationary()?),
                    clt: None,
                },
                model: TraitModel::SymmetricIndependent { base: kernel },
            }
        }
        "ex3_3" => {
            let p: MultitypeParams = parse_params(params)?;
            let states = states_from_pmfs(&p.pmfs)?;
            let weights = p.weights.unwrap_or_else(|| uniform_weights(states.len()));
            let per_state = match &p.kernels {
                Some(kernels) => {
                    if kernels.len() != states.len() {
                        return Err(Error::Config(format!(
                            "ex3_3: {} kernels for {} states",
                            kernels.len(),
                            states.len()
                        )));
                    }
                    kernels
                        .iter()
                        .zip(&states)
                        .map(|(k, s)| Ok(JointKernelSet::uniform(matrix(k)?, s.max_litter())))
                        .collect::<Result<Vec<_>>>()?
                }
                None => default_multitype_kernels(&states)?,
            };
            GalleryEntry {
                name: name.into(),
                env_spec: EnvironmentSpec::iid(states, weights)?,
                targets: AnalyticTargets::default(),
                model: TraitModel::FiniteStateJoint {
                    per_state,
                    joint: None,
                },
            }
        }
        "ex3_4" => {
            let p: DoeblinParams = parse_params(params)?;
            let states = states_from_pmfs(&p.pmfs)?;
            let weights = p.weights.unwrap_or_else(|| uniform_weights(states.len()));
            if p.kernels.len() != states.len() {
                return Err(Error::Config(format!(
                    "ex3_4: {} kernels for {} states",
                    p.kernels.len(),
                    states.len()
                )));
            }
            let per_state = p
                .kernels
                .iter()
                .zip(&states)
                .map(|(k, s)| {
                    let m = matrix(k)?;
                    for r in 0..m.dim() {
                        for c in 0..m.dim() {
                            if m.entry(r, c) <= 0.0 {
                                return Err(Error::Config(format!(
                                    "ex3_4: kernel for state {} has a zero entry at ({r},{c}); \
                                     the screening instance requires strictly positive kernels",
                                    s.id
                                )));
                            }
                        }
                    }
                    Ok(JointKernelSet::uniform(m, s.max_litter()))
                })
                .collect::<Result<Vec<_>>>()?;
            GalleryEntry {
                name: name.into(),
                env_spec: EnvironmentSpec::iid(states, weights)?,
                targets: AnalyticTargets::default(),
                model: TraitModel::FiniteStateJoint {
                    per_state,
                    joint: None,
                },
            }
        }
        "ex3_5" => {
            let p: WalkTimeParams = parse_params(params)?;
            let states = states_from_pmfs(&p.pmfs)?;
            let weights = p.weights.unwrap_or_else(|| uniform_weights(states.len()));
            let per_state: Vec<IncrementDist> = match p.increments {
                Some(specs) => {
                    if specs.len() != states.len() {
                        return Err(Error::Config(format!(
                            "ex3_5: {} increment laws for {} states",
                            specs.len(),
                            states.len()
                        )));
                    }
                    specs.into_iter().map(IncrementDist::from).collect()
                }
                None => vec![
                    IncrementDist::Normal {
                        mean: 0.0,
                        std_dev: 1.0
                    };
                    states.len()
                ],
            };
            GalleryEntry {
                name: name.into(),
                env_spec: EnvironmentSpec::iid(states, weights)?,
                targets: AnalyticTargets {
                    stationary: None,
                    clt: Some(CltRecipe::IncrementMoments),
                },
                model: TraitModel::IidIncrements { per_state },
            }
        }
        "ex3_6" => {
            let p: WalkLocationParams = parse_params(params)?;
            let states = states_from_pmfs(&p.pmfs)?;
            let weights = p.weights.unwrap_or_else(|| uniform_weights(states.len()));
            let location = LocationEnv::new(p.omega, p.delta)?;
            GalleryEntry {
                name: name.into(),
                env_spec: EnvironmentSpec::iid(states, weights)?
                    .with_location(location.clone())?,
                targets: AnalyticTargets {
                    stationary: None,
                    clt: Some(CltRecipe::WalkConstants {
                        gamma: p.gamma,
                        diffusion: p.diffusion,
                    }),
                },
                model: TraitModel::LocationRwre { location },
            }
        }
        other => {
            return Err(Error::Config(format!(
                "unknown model {other:?}; available: {}",
                GALLERY_NAMES.join(", ")
            )))
        }
    };
    entry.validate()?;
    Ok(entry)
}

/// Built-in slot-dependent kernels for the multitype instance: first and
/// later children transition differently.
fn default_multitype_kernels(states: &[EnvState]) -> Result<Vec<JointKernelSet>> {
    if states.len() != 2 {
        return Err(Error::Config(
            "ex3_3 default kernels cover exactly 2 environment states; \
             pass explicit kernels for other state counts"
                .into(),
        ));
    }
    let s0_p21 = matrix(&[vec![0.9, 0.1], vec![0.2, 0.8]])?;
    let s0_p22 = matrix(&[vec![0.8, 0.2], vec![0.3, 0.7]])?;
    let s1_p11 = matrix(&[vec![0.3, 0.7], vec![0.6, 0.4]])?;
    let s1_p22 = matrix(&[vec![0.5, 0.5], vec![0.5, 0.5]])?;
    let sets = vec![
        JointKernelSet {
            per_litter: vec![vec![], vec![s0_p21.clone()], vec![s0_p21, s0_p22]],
        },
        JointKernelSet {
            per_litter: vec![vec![], vec![s1_p11.clone()], vec![s1_p11, s1_p22]],
        },
    ];
    // Cover any litter the pmfs allow beyond 2.
    for (set, state) in sets.iter().zip(states) {
        if state.max_litter() >= set.per_litter.len() {
            return Err(Error::Config(format!(
                "ex3_3 default kernels cover litters up to 2, state {} allows {}",
                state.id,
                state.max_litter()
            )));
        }
    }
    Ok(sets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::sample_env_sequence;
    use crate::kernels::{sample_aux_path, Trait};
    use crate::rng::aux_rng;
    use crate::verify::{many_to_one_exact, many_to_one_mc, TraitFn};

    #[test]
    fn every_entry_validates_with_defaults() {
        for name in GALLERY_NAMES {
            let entry = make_example(name, &serde_json::Value::Null).unwrap();
            entry.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn unknown_names_and_bad_params_are_rejected() {
        assert!(make_example("ex9_9", &serde_json::Value::Null).is_err());
        let bad = serde_json::json!({"pmf": [0.4, 0.4]});
        assert!(make_example("ex3_1", &bad).is_err());
        let unknown_key = serde_json::json!({"pmff": [0.5, 0.5]});
        assert!(make_example("ex3_1", &unknown_key).is_err());
    }

    #[test]
    fn symmetric_entry_kernel_equals_base() {
        let entry = make_example("ex3_2", &serde_json::Value::Null).unwrap();
        let base = match &entry.model {
            TraitModel::SymmetricIndependent { base } => base.clone(),
            _ => panic!(),
        };
        for state in entry.env_spec.states() {
            let q = build_aux_kernel(state, &entry.model).unwrap();
            assert!(q.exact().unwrap().max_abs_diff(&base) <= 1e-12);
        }
    }

    #[test]
    fn homogeneous_targets_are_fixed_points() {
        let entry = make_example("ex3_1", &serde_json::Value::Null).unwrap();
        let pi = entry.targets.stationary.clone().unwrap();
        assert!((pi[0] - 2.0 / 3.0).abs() < 1e-12);
        let q = build_aux_kernel(&entry.env_spec.states()[0], &entry.model).unwrap();
        let next = q.exact().unwrap().apply_left(&pi);
        assert!(crate::matrix::total_variation(&pi, &next) < 1e-12);
    }

    #[test]
    fn walk_kernel_ignores_the_time_environment() {
        let entry = make_example("ex3_6", &serde_json::Value::Null).unwrap();
        let states = entry.env_spec.states();
        let k0 = build_aux_kernel(&states[0], &entry.model).unwrap();
        let k1 = build_aux_kernel(&states[1], &entry.model).unwrap();
        assert!(k0.same_law(&k1));

        // Rebuild under a different time environment entirely.
        let other = make_example(
            "ex3_6",
            &serde_json::json!({"pmfs": [[0.0, 0.5, 0.5], [0.0, 0.2, 0.8]]}),
        )
        .unwrap();
        let k2 = build_aux_kernel(&other.env_spec.states()[0], &other.model).unwrap();
        assert!(k0.same_law(&k2));
    }

    #[test]
    fn finite_entries_pass_a_many_to_one_spot_check() {
        for name in ["ex2_1", "ex3_1", "ex3_2", "ex3_3", "ex3_4"] {
            let entry = make_example(name, &serde_json::Value::Null).unwrap();
            let seq = sample_env_sequence(&entry.env_spec, 3, 3).unwrap();
            let f = TraitFn::Indicator(crate::measure::TargetSet::Symbols { set: vec![0] });
            let report = many_to_one_exact(&entry.model, &seq, 3, &f, 0).unwrap();
            assert!(report.pass, "{name}: {report:?}");
        }
    }

    #[test]
    fn continuous_entries_pass_the_mc_oracle() {
        for (name, f) in [
            (
                "ex3_5",
                TraitFn::Indicator(crate::measure::TargetSet::HalfLine { upper: 0.0 }),
            ),
            ("ex3_6", TraitFn::One),
        ] {
            let entry = make_example(name, &serde_json::Value::Null).unwrap();
            let seq = sample_env_sequence(&entry.env_spec, 4, 6).unwrap();
            let mut rng = aux_rng(21);
            let report = many_to_one_mc(
                &entry.model,
                &seq,
                6,
                &f,
                Trait::Pos(0.0),
                2000,
                1 << 22,
                &mut rng,
            )
            .unwrap();
            assert!(report.pass, "{name}: {report:?}");
        }
    }

    #[test]
    fn walk_paths_stay_on_the_lattice() {
        let entry = make_example("ex3_6", &serde_json::Value::Null).unwrap();
        let seq = sample_env_sequence(&entry.env_spec, 6, 20).unwrap();
        let mut rng = aux_rng(22);
        let path = sample_aux_path(Trait::Pos(0.0), &seq, &entry.model, &mut rng).unwrap();
        for (k, t) in path.iter().enumerate() {
            let x = t.position();
            assert_eq!(x, x.round());
            assert!(x.abs() <= k as f64);
        }
    }
}
