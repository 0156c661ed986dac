use std::sync::Arc;

use pfspace::bp::{
    bp_norm_lower, bp_norm_upper, cb_functional_check, coefficient_function, duality_contractivity_check, fourier_oracle_p2, BpElement,
    BpOptions, RealizedFunctional,
};
use pfspace::check::{CheckRecord, Expr, Quantity, Relation, Tag, GAP_GATE};
use pfspace::group::{FiniteGroup, GroupFunction};
use pfspace::linalg::{CMat, CVec, C64, ONE};
use pfspace::opnorm::SolverBudget;
use pfspace::pseudo::{amplified_isometry_check, axiom_check_dinf, axiom_check_mp, build_universal_family, pi_isometry_gap, restriction_pcb_check, UniversalFamily};
use pfspace::rep::{cyclic_subrep, random_array, Representation, Subrepresentation};
use pfspace::rng::{self, label_hash};
use pfspace::space::{DualVector, SpaceVector};
use rayon::prelude::*;

use crate::config::{ConfigError, ExperimentConfig, SuiteName};

/// Tolerance of the duality contractivity records.
pub const DUALITY_TOL: f64 = 1e-4;
/// Tolerance of the cb-functional and Fourier oracle records.
pub const BRACKET_TOL: f64 = 1e-3;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{suite} unit {unit}: {source}")]
    Numeric { suite: SuiteName, unit: usize, source: pfspace::error::Error },
    #[error("setup: {0}")]
    Setup(#[from] pfspace::error::Error),
}

/// Everything the suites share: the group, representations, probes, budgets
/// and the universal family when a suite needs it.
pub struct Context {
    pub config: ExperimentConfig,
    pub group: Arc<FiniteGroup>,
    pub reps: Vec<Arc<Representation>>,
    pub probes: Vec<GroupFunction>,
    pub elements: Vec<BpElement>,
    pub budget: SolverBudget,
    pub bp: BpOptions,
    pub family: Option<Arc<UniversalFamily>>,
    /// The configured representations rebuilt at `p = 2` for the Fourier oracle.
    pub p2_reps: Vec<Arc<Representation>>,
    pub subreps: Vec<Subrepresentation>,
}

fn real_cvec(v: &[f64]) -> CVec {
    CVec::from_iterator(v.len(), v.iter().map(|&x| C64::new(x, 0.0)))
}

impl Context {
    pub fn new(config: &ExperimentConfig) -> Result<Self, RunError> {
        config.validate()?;
        let config = config.clone();
        let group = Arc::new(config.group.build()?);
        let reps = config
            .representations
            .iter()
            .map(|r| r.build(&group, config.p).map(Arc::new))
            .collect::<Result<Vec<_>, _>>()?;
        let seed = config.seed;
        let budget = config.solver.budget(seed);
        let bp = config.solver.bp_options(seed);

        let mut probes = Vec::new();
        if config.probes.deltas {
            probes.extend((0..group.order()).map(|g| GroupFunction::delta(group.clone(), g)));
        }
        for v in &config.probes.values {
            probes.push(GroupFunction::from_real(group.clone(), v)?);
        }
        let mut r = rng::stream(seed, &[label_hash("probes")]);
        for _ in 0..config.probes.random {
            probes.push(GroupFunction::random(group.clone(), &mut r));
        }

        let first = &reps[0];
        let mut elements = Vec::new();
        for (k, e) in config.elements.iter().enumerate() {
            let el = match (&e.values, &e.xi, &e.eta) {
                (Some(v), _, _) => BpElement::from_real(group.clone(), v)?,
                (None, Some(xi), Some(eta)) => {
                    let s = first.space().clone();
                    let xi = SpaceVector::new(s.clone(), real_cvec(xi))
                        .map_err(|e| ConfigError::Invalid(format!("elements[{k}].xi: {e}")))?;
                    let eta = DualVector::new(s, real_cvec(eta)).map_err(|e| ConfigError::Invalid(format!("elements[{k}].eta: {e}")))?;
                    coefficient_function(first.clone(), &xi, &eta)?
                }
                _ => unreachable!("validated"),
            };
            elements.push(el);
        }

        let needs_family = config.suites.iter().any(|s| matches!(s, SuiteName::UniversalGap | SuiteName::AmplifiedIsometry));
        let family = if needs_family {
            Some(Arc::new(build_universal_family(first.clone(), &probes, config.r_max, seed, &budget)?))
        } else {
            None
        };
        let subreps = if config.suites.contains(&SuiteName::Monotonicity) {
            let p = &config.params.monotonicity;
            extract_cyclic_subreps(first, p.random_generators, seed)?
        } else {
            Vec::new()
        };
        let p2_reps = if config.suites.contains(&SuiteName::P2Oracle) {
            config.representations.iter().map(|r| r.build(&group, 2.0).map(Arc::new)).collect::<Result<Vec<_>, _>>()?
        } else {
            Vec::new()
        };
        Ok(Self { config, group, reps, probes, elements, budget, bp, family, p2_reps, subreps })
    }

    fn blocks(&self) -> Vec<&Representation> {
        self.reps.iter().map(|r| r.as_ref()).collect()
    }

    fn family(&self) -> &UniversalFamily {
        self.family.as_deref().expect("family is built for the suites that use it")
    }

    /// Number of independent work units of a suite.
    pub fn units(&self, suite: SuiteName) -> usize {
        let p = &self.config.params;
        match suite {
            SuiteName::Dinf => p.dinf.instances,
            SuiteName::Mp => p.mp.instances,
            SuiteName::Monotonicity => self.subreps.len(),
            SuiteName::UniversalGap => self.probes.len(),
            SuiteName::AmplifiedIsometry => p.amplified_isometry.arrays,
            SuiteName::Duality => self.realized_elements().len() + p.duality.instances,
            SuiteName::CbFunctional => self.elements.len() + p.cb_functional.instances,
            SuiteName::P2Oracle => 2 + self.elements.len() + p.p2_oracle.instances,
        }
    }

    fn realized_elements(&self) -> Vec<&BpElement> {
        self.elements.iter().filter(|e| e.realization.is_some()).collect()
    }

    fn unit_rng(&self, suite: SuiteName, k: usize) -> rng::DetRng {
        rng::stream(self.config.seed, &[label_hash(suite.as_str()), k as u64])
    }

    pub fn run_unit(&self, suite: SuiteName, k: usize) -> pfspace::error::Result<Vec<CheckRecord>> {
        let name = suite.as_str();
        let tag = Tag::new(name, k.to_string());
        let mut r = self.unit_rng(suite, k);
        let rep = self.reps[0].as_ref();
        let g = &self.group;
        let params = &self.config.params;
        match suite {
            SuiteName::Dinf => {
                let n = params.dinf.n;
                let u = random_array(g, n, &mut r);
                let v = random_array(g, n, &mut r);
                Ok(vec![axiom_check_dinf(&tag, rep, &u, &v, &self.budget)?])
            }
            SuiteName::Mp => {
                let (m, n) = (params.mp.m, params.mp.n);
                let u = random_array(g, m, &mut r);
                let alpha = rng::random_cmat(&mut r, n, m);
                let beta = rng::random_cmat(&mut r, m, n);
                Ok(vec![axiom_check_mp(&tag, rep, &u, &alpha, &beta, &self.budget)?])
            }
            SuiteName::Monotonicity => {
                let mp = &params.monotonicity;
                let sub = &self.subreps[k];
                let mut arrays: Vec<_> = (0..mp.instances).map(|_| random_array(g, 1, &mut r)).collect();
                for n in 2..=mp.n_max {
                    arrays.extend((0..mp.arrays).map(|_| random_array(g, n, &mut r)));
                }
                let tag = Tag::new(name, format!("sub{k}(dim {})", sub.rep.dim()));
                restriction_pcb_check(&tag, rep, sub, &arrays, &self.budget)
            }
            SuiteName::UniversalGap => {
                let tag = Tag::new(name, format!("probe{k}"));
                pi_isometry_gap(&tag, self.family(), std::slice::from_ref(&self.probes[k]), &self.budget)
            }
            SuiteName::AmplifiedIsometry => {
                let a = random_array(g, params.amplified_isometry.n, &mut r);
                amplified_isometry_check(&tag, self.family(), &[a], &self.budget)
            }
            SuiteName::Duality => {
                let realized = self.realized_elements();
                let phi = match realized.get(k) {
                    Some(e) => {
                        let re = e.realization.as_ref().expect("realized");
                        RealizedFunctional { terms: vec![(re.xi.clone(), re.eta.clone())] }
                    }
                    None => RealizedFunctional {
                        terms: (0..params.duality.terms)
                            .map(|_| (rng::random_cvec(&mut r, rep.dim()), random_functional(rep, &mut r)))
                            .collect(),
                    },
                };
                duality_contractivity_check(&tag, rep, &[phi], DUALITY_TOL, &self.bp)
            }
            SuiteName::CbFunctional => {
                let u = match self.elements.get(k) {
                    Some(e) => e.clone(),
                    None => BpElement::new(g.clone(), rng::random_cvec(&mut r, g.order()).iter().copied().collect())?,
                };
                cb_functional_check(&tag, &self.blocks(), &u, params.cb_functional.n_max, BRACKET_TOL, &self.bp)
            }
            SuiteName::P2Oracle => {
                let u = match k {
                    0 => BpElement::one(g.clone()),
                    1 => BpElement::delta_e(g.clone()),
                    _ => match self.elements.get(k - 2) {
                        Some(e) => e.clone(),
                        None => BpElement::new(g.clone(), rng::random_real_cvec(&mut r, g.order()).iter().copied().collect())?,
                    },
                };
                let blocks: Vec<&Representation> = self.p2_reps.iter().map(|r| r.as_ref()).collect();
                p2_oracle_records(&tag, &blocks, &u, &self.bp)
            }
        }
    }

    /// Runs one suite over its units on the current rayon pool; records come
    /// back ordered by instance hash.
    pub fn run_suite(&self, suite: SuiteName) -> Result<Vec<CheckRecord>, RunError> {
        let units: Vec<Vec<CheckRecord>> = (0..self.units(suite))
            .into_par_iter()
            .map(|k| self.run_unit(suite, k).map_err(|source| RunError::Numeric { suite, unit: k, source }))
            .collect::<Result<_, _>>()?;
        let mut records: Vec<CheckRecord> = units.into_iter().flatten().collect();
        records.sort_by(|a, b| a.instance.cmp(&b.instance).then_with(|| a.check.cmp(&b.check)));
        Ok(records)
    }
}

/// A random functional on the representation space that annihilates the
/// null subspace.
fn random_functional(rep: &Representation, r: &mut rng::DetRng) -> CVec {
    let s = rep.space();
    let w = rng::random_cvec(r, s.ambient_dim());
    let n = s.null_basis();
    if n.ncols() == 0 {
        return w;
    }
    // remove the bilinear pairing with N: w - conj(N) (N^T conj(N))^{-1} N^T w
    let nc = n.map(|z| z.conj());
    let gram = n.transpose() * &nc;
    let coef = gram.lu().solve(&(n.transpose() * &w)).unwrap_or_else(|| CVec::zeros(n.ncols()));
    w - nc * coef
}

/// The oracle lies in `[lower, upper]` up to the tolerance.
pub fn p2_oracle_records(tag: &Tag, blocks: &[&Representation], u: &BpElement, opts: &BpOptions) -> pfspace::error::Result<Vec<CheckRecord>> {
    let exact = fourier_oracle_p2(u)?;
    let lower = bp_norm_lower(blocks, u, opts)?;
    let upper = bp_norm_upper(u, blocks, opts)?;
    let oracle = Quantity::Bracket { label: "fourier".into(), lo: exact, hi: exact };
    Ok(vec![
        CheckRecord::new(
            tag,
            "oracle_lower",
            Relation::LessEq,
            Expr::Q(0),
            Expr::Q(1),
            vec![lower.ratio_quantity("lower", u), oracle.clone()],
            BRACKET_TOL,
            GAP_GATE,
        ),
        CheckRecord::new(
            tag,
            "oracle_upper",
            Relation::LessEq,
            Expr::Q(0),
            Expr::Q(1),
            vec![oracle, upper.realization.quantity("upper")],
            BRACKET_TOL,
            GAP_GATE,
        ),
    ])
}

/// Cyclic subrepresentations generated by structured vectors (constants,
/// alternating signs, `e_0 +- e_i`) and seeded random vectors, deduplicated
/// by their spans.
pub fn extract_cyclic_subreps(rep: &Representation, random: usize, seed: u64) -> pfspace::error::Result<Vec<Subrepresentation>> {
    let d = rep.dim();
    let mut gens: Vec<CVec> = vec![CVec::from_element(d, ONE)];
    gens.push(CVec::from_fn(d, |i, _| if i % 2 == 0 { ONE } else { -ONE }));
    for i in 1..d {
        for s in [ONE, -ONE] {
            let mut v = CVec::zeros(d);
            v[0] = ONE;
            v[i] = s;
            gens.push(v);
        }
    }
    let mut r = rng::stream(seed, &[label_hash("generators")]);
    gens.extend((0..random).map(|_| rng::random_cvec(&mut r, d)));
    let mut out: Vec<Subrepresentation> = Vec::new();
    let mut projectors: Vec<CMat> = Vec::new();
    for xi in gens {
        let sub = match cyclic_subrep(rep, &xi) {
            Ok(s) => s,
            Err(pfspace::error::Error::ZeroVector) => continue,
            Err(e) => return Err(e),
        };
        let q = &sub.inclusion;
        let proj = q * q.adjoint();
        if projectors.iter().any(|p| (p - &proj).norm() < 1e-8) {
            continue;
        }
        projectors.push(proj);
        out.push(sub);
    }
    Ok(out)
}
