use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use pfspace::bp::BpOptions;
use pfspace::group::FiniteGroup;
use pfspace::opnorm::SolverBudget;
use pfspace::rep::Representation;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Registered suites, in the order they are listed by `list-suites`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteName {
    Dinf,
    Mp,
    Monotonicity,
    UniversalGap,
    AmplifiedIsometry,
    Duality,
    CbFunctional,
    P2Oracle,
}

impl SuiteName {
    pub const ALL: [SuiteName; 8] = [
        SuiteName::Dinf,
        SuiteName::Mp,
        SuiteName::Monotonicity,
        SuiteName::UniversalGap,
        SuiteName::AmplifiedIsometry,
        SuiteName::Duality,
        SuiteName::CbFunctional,
        SuiteName::P2Oracle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SuiteName::Dinf => "dinf",
            SuiteName::Mp => "mp",
            SuiteName::Monotonicity => "monotonicity",
            SuiteName::UniversalGap => "universal_gap",
            SuiteName::AmplifiedIsometry => "amplified_isometry",
            SuiteName::Duality => "duality",
            SuiteName::CbFunctional => "cb_functional",
            SuiteName::P2Oracle => "p2_oracle",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            SuiteName::Dinf => "||U + V|| = max(||U||, ||V||) for block diagonal sums",
            SuiteName::Mp => "||alpha U beta|| <= ||alpha|| ||U|| ||beta|| for scalar compressions",
            SuiteName::Monotonicity => "restriction to cyclic subrepresentations is p-completely contractive",
            SuiteName::UniversalGap => "||pi(f)|| - ||Pi(f)|| lies in [-tol, 1/r_max + tol] on the probes",
            SuiteName::AmplifiedIsometry => "the same bracket for n x n arrays",
            SuiteName::Duality => "coefficient functions of functionals are contractive; brackets are nonempty",
            SuiteName::CbFunctional => "||u_n|| = ||u_1|| for n <= n_max",
            SuiteName::P2Oracle => "on abelian groups the p = 2 bracket contains the Fourier norm (runs at p = 2 whatever the config p)",
        }
    }
}

impl fmt::Display for SuiteName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    /// `cyclic` or `dihedral` (of order `2n`).
    pub family: Option<String>,
    pub n: Option<usize>,
    /// Explicit multiplication table.
    pub table: Option<Vec<Vec<usize>>>,
}

impl GroupSpec {
    pub fn build(&self) -> Result<FiniteGroup, ConfigError> {
        match (&self.family, self.n, &self.table) {
            (Some(name), Some(n), None) => {
                if n == 0 {
                    return Err(ConfigError::Invalid("group.n must be at least 1".into()));
                }
                match name.as_str() {
                    "cyclic" => Ok(FiniteGroup::cyclic(n)),
                    "dihedral" if n >= 3 => Ok(FiniteGroup::dihedral(n)),
                    "dihedral" => Err(ConfigError::Invalid("group.n must be at least 3 for the dihedral family".into())),
                    other => Err(ConfigError::Invalid(format!("group.family: unknown family `{other}`, expected `cyclic` or `dihedral`"))),
                }
            }
            (None, None, Some(table)) => {
                FiniteGroup::from_table(table.clone(), None).map_err(|e| ConfigError::Invalid(format!("group.table: {e}")))
            }
            _ => Err(ConfigError::Invalid("group: give either `family` and `n` or `table`".into())),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RepSpec {
    Regular,
    Trivial,
    /// `action[g][i]` is the image of point `i` under `g`.
    Permutation { action: Vec<Vec<usize>> },
}

impl RepSpec {
    pub fn build(&self, group: &Arc<FiniteGroup>, p: f64) -> Result<Representation, ConfigError> {
        let r = match self {
            RepSpec::Regular => Representation::left_regular(group.clone(), p),
            RepSpec::Trivial => Representation::trivial(group.clone(), p),
            RepSpec::Permutation { action } => Representation::permutation(group.clone(), action, p),
        };
        r.map_err(|e| ConfigError::Invalid(format!("representations: {e}")))
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    /// Number of seeded random probes.
    #[serde(default)]
    pub random: usize,
    /// Explicit real-valued probes.
    #[serde(default)]
    pub values: Vec<Vec<f64>>,
    /// Include the point masses `delta_g`.
    #[serde(default)]
    pub deltas: bool,
}

/// An element of `B_p(G)` given by values or by a realization on the first
/// representation (real vectors).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementSpec {
    pub values: Option<Vec<f64>>,
    pub xi: Option<Vec<f64>>,
    pub eta: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub starts: Option<usize>,
    pub max_iter: Option<usize>,
    pub tol: Option<f64>,
    pub resolution: Option<usize>,
    pub brute_force_sphere_dim: Option<usize>,
    pub grid_points: Option<usize>,
    pub polish: Option<usize>,
    pub consensus_tol: Option<f64>,
    pub cut_iters: Option<usize>,
    pub cut_tol: Option<f64>,
    pub upper_starts: Option<usize>,
    pub upper_evals: Option<usize>,
    pub max_pieces: Option<usize>,
    pub ascent_starts: Option<usize>,
    pub ascent_iters: Option<usize>,
    pub alternations: Option<usize>,
}

impl SolverConfig {
    pub fn budget(&self, seed: u64) -> SolverBudget {
        let d = SolverBudget::with_seed(seed);
        SolverBudget {
            starts: self.starts.unwrap_or(d.starts),
            max_iter: self.max_iter.unwrap_or(d.max_iter),
            tol: self.tol.unwrap_or(d.tol),
            resolution: self.resolution.unwrap_or(d.resolution),
            brute_force_sphere_dim: self.brute_force_sphere_dim.unwrap_or(d.brute_force_sphere_dim),
            grid_points: self.grid_points.unwrap_or(d.grid_points),
            polish: self.polish.unwrap_or(d.polish),
            consensus_tol: self.consensus_tol.unwrap_or(d.consensus_tol),
            seed,
        }
    }

    pub fn bp_options(&self, seed: u64) -> BpOptions {
        let d = BpOptions::default();
        BpOptions {
            budget: self.budget(seed),
            cut_iters: self.cut_iters.unwrap_or(d.cut_iters),
            cut_tol: self.cut_tol.unwrap_or(d.cut_tol),
            upper_starts: self.upper_starts.unwrap_or(d.upper_starts),
            upper_evals: self.upper_evals.unwrap_or(d.upper_evals),
            max_pieces: self.max_pieces.unwrap_or(d.max_pieces),
            ascent_starts: self.ascent_starts.unwrap_or(d.ascent_starts),
            ascent_iters: self.ascent_iters.unwrap_or(d.ascent_iters),
            alternations: self.alternations.unwrap_or(d.alternations),
            seed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DinfParams {
    pub instances: usize,
    /// Size of each block.
    pub n: usize,
}

impl Default for DinfParams {
    fn default() -> Self {
        Self { instances: 10, n: 1 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MpParams {
    pub instances: usize,
    /// Size of `U`.
    pub m: usize,
    /// Size of the compression `alpha U beta`.
    pub n: usize,
}

impl Default for MpParams {
    fn default() -> Self {
        Self { instances: 10, m: 2, n: 1 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonotonicityParams {
    /// Random functions per subrepresentation.
    pub instances: usize,
    /// Random arrays per subrepresentation and size `2..=n_max`.
    pub arrays: usize,
    pub n_max: usize,
    /// Random generators added to the structured ones.
    pub random_generators: usize,
}

impl Default for MonotonicityParams {
    fn default() -> Self {
        Self { instances: 5, arrays: 1, n_max: 2, random_generators: 1 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AmplifiedParams {
    pub arrays: usize,
    pub n: usize,
}

impl Default for AmplifiedParams {
    fn default() -> Self {
        Self { arrays: 3, n: 2 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DualityParams {
    /// Random functionals besides the configured realizations.
    pub instances: usize,
    /// Number of `(xi, eta)` terms per functional.
    pub terms: usize,
}

impl Default for DualityParams {
    fn default() -> Self {
        Self { instances: 5, terms: 1 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CbParams {
    pub instances: usize,
    pub n_max: usize,
}

impl Default for CbParams {
    fn default() -> Self {
        Self { instances: 3, n_max: 2 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct P2Params {
    /// Random real-valued functions besides `1` and `delta_e`.
    pub instances: usize,
}

impl Default for P2Params {
    fn default() -> Self {
        Self { instances: 3 }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteParams {
    pub dinf: DinfParams,
    pub mp: MpParams,
    pub monotonicity: MonotonicityParams,
    pub amplified_isometry: AmplifiedParams,
    pub duality: DualityParams,
    pub cb_functional: CbParams,
    pub p2_oracle: P2Params,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("reports") }
    }
}

fn default_reps() -> Vec<RepSpec> {
    vec![RepSpec::Regular]
}

fn default_r_max() -> usize {
    4
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub p: f64,
    pub group: GroupSpec,
    #[serde(default = "default_reps")]
    pub representations: Vec<RepSpec>,
    #[serde(default)]
    pub probes: ProbeSpec,
    #[serde(default = "default_r_max")]
    pub r_max: usize,
    #[serde(default)]
    pub elements: Vec<ElementSpec>,
    #[serde(default)]
    pub solver: SolverConfig,
    pub suites: Vec<SuiteName>,
    #[serde(default)]
    pub params: SuiteParams,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(ConfigError::Invalid("p must lie in (1, inf)".into()));
        }
        if self.r_max == 0 {
            return Err(ConfigError::Invalid("r_max must be at least 1".into()));
        }
        if self.suites.is_empty() {
            return Err(ConfigError::Invalid("suites: at least one suite is required".into()));
        }
        if self.representations.is_empty() {
            return Err(ConfigError::Invalid("representations: at least one representation is required".into()));
        }
        let group = self.group.build()?;
        let order = group.order();
        for (k, v) in self.probes.values.iter().enumerate() {
            if v.len() != order {
                return Err(ConfigError::Invalid(format!("probes.values[{k}]: expected {order} values, found {}", v.len())));
            }
        }
        for (k, e) in self.elements.iter().enumerate() {
            match (&e.values, &e.xi, &e.eta) {
                (Some(v), None, None) if v.len() != order => {
                    return Err(ConfigError::Invalid(format!("elements[{k}].values: expected {order} values, found {}", v.len())))
                }
                (Some(_), None, None) | (None, Some(_), Some(_)) => {}
                _ => return Err(ConfigError::Invalid(format!("elements[{k}]: give either `values` or both `xi` and `eta`"))),
            }
        }
        if self.suites.contains(&SuiteName::P2Oracle)
            && !group.is_abelian() {
                return Err(ConfigError::Invalid("p2_oracle requires an abelian group".into()));
            }
        let needs_probes = self.suites.iter().any(|s| matches!(s, SuiteName::UniversalGap | SuiteName::AmplifiedIsometry));
        if needs_probes && self.probes.random == 0 && self.probes.values.is_empty() && !self.probes.deltas {
            return Err(ConfigError::Invalid("probes: universal_gap and amplified_isometry need at least one probe".into()));
        }
        let p = &self.params;
        if p.dinf.n == 0 || p.mp.m == 0 || p.mp.n == 0 || p.amplified_isometry.n == 0 || p.monotonicity.n_max == 0 || p.cb_functional.n_max == 0
        {
            return Err(ConfigError::Invalid("params: array sizes must be at least 1".into()));
        }
        if p.duality.terms == 0 {
            return Err(ConfigError::Invalid("params.duality.terms must be at least 1".into()));
        }
        Ok(())
    }
}
