//! Coefficient functions and the dual picture of `B_p(G)`: pairing with
//! pseudofunctions, dual-norm lower bounds by cutting planes over the unit
//! ball of `||Pi(.)||`, realization upper bounds, matrix norms through
//! scalar compressions, and the Fourier oracle for abelian groups at p = 2.

use std::f64::consts::PI;
use std::sync::Arc;

use microlp::{ComparisonOp, OptimizationDirection, Problem, Solution, Variable};

use crate::check::{CheckRecord, Expr, Quantity, Relation, Tag, GAP_GATE};
use crate::error::{Error, Result};
use crate::group::{FiniteGroup, GroupFunction};
use crate::linalg::{column_basis, least_squares, lp_norm, norming_functional, null_space, pair, CMat, CVec, C64, ONE, ZERO};
use crate::opnorm::{mixed_scalar_norm, opnorm, NormEstimate, SolverBudget};
use crate::optim::compass_search;
use crate::pseudo::{Array, UniversalFamily};
use crate::rep::{direct_sum_rep, Representation};
use crate::rng;
use crate::space::{amplify_space, DualVector, QSLpSpace, SpaceVector};

const SPAN_TOL: f64 = 1e-9;

/// A realization `u(x) = <pi(x) xi, eta>`.
#[derive(Debug, Clone)]
pub struct Realization {
    pub rep: Arc<Representation>,
    /// Coordinates in the representation space.
    pub xi: CVec,
    /// Ambient functional, annihilating the null subspace.
    pub eta: CVec,
}

impl Realization {
    pub fn norm_product(&self) -> f64 {
        let s = self.rep.space();
        let eta = DualVector::new(s.clone(), self.eta.clone()).expect("stored functional is admissible");
        s.norm(&self.xi) * eta.norm()
    }

    pub fn quantity(&self, label: &str) -> Quantity {
        Quantity::Realization {
            label: label.into(),
            space: self.rep.space().as_ref().clone(),
            xi: (&self.xi).into(),
            eta: (&self.eta).into(),
            value: self.norm_product(),
        }
    }
}

/// An element of `B_p(G)` given by its values.
#[derive(Debug, Clone)]
pub struct BpElement {
    pub group: Arc<FiniteGroup>,
    pub values: Vec<C64>,
    pub realization: Option<Realization>,
}

impl BpElement {
    pub fn new(group: Arc<FiniteGroup>, values: Vec<C64>) -> Result<Self> {
        if values.len() != group.order() {
            return Err(Error::ShapeMismatch(format!("{} values on a group of order {}", values.len(), group.order())));
        }
        Ok(Self { group, values, realization: None })
    }

    pub fn from_real(group: Arc<FiniteGroup>, values: &[f64]) -> Result<Self> {
        Self::new(group, values.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    pub fn one(group: Arc<FiniteGroup>) -> Self {
        let n = group.order();
        Self { group, values: vec![ONE; n], realization: None }
    }

    pub fn zero(group: Arc<FiniteGroup>) -> Self {
        let n = group.order();
        Self { group, values: vec![ZERO; n], realization: None }
    }

    pub fn delta_e(group: Arc<FiniteGroup>) -> Self {
        let mut u = Self::zero(group);
        let e = u.group.identity();
        u.values[e] = ONE;
        u
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { group: self.group.clone(), values: self.values.iter().map(|v| v * c).collect(), realization: None }
    }

    /// Pointwise product.
    pub fn product(&self, other: &Self) -> Result<Self> {
        if *self.group != *other.group {
            return Err(Error::GroupMismatch);
        }
        Ok(Self {
            group: self.group.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
            realization: None,
        })
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest deviation between the values and the attached realization.
    pub fn realization_error(&self) -> Option<f64> {
        let r = self.realization.as_ref()?;
        let u = coefficient_values(&r.rep, &r.xi, &r.eta);
        Some(u.iter().zip(&self.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }
}

fn coefficient_values(rep: &Representation, xi: &CVec, eta: &CVec) -> Vec<C64> {
    let g = rep.space().basis().transpose() * eta;
    rep.matrices().iter().map(|m| pair(g.as_slice(), (m * xi).as_slice())).collect()
}

/// `u(x) = <pi(x) xi, eta>`.
pub fn coefficient_function(rep: Arc<Representation>, xi: &SpaceVector, eta: &DualVector) -> Result<BpElement> {
    let s = rep.space();
    if (!Arc::ptr_eq(&xi.space, s) && *xi.space != **s) || (!Arc::ptr_eq(&eta.space, s) && *eta.space != **s) {
        return Err(Error::SpaceMismatch);
    }
    let values = coefficient_values(&rep, &xi.coords, &eta.functional);
    Ok(BpElement {
        group: rep.group().clone(),
        values,
        realization: Some(Realization { rep, xi: xi.coords.clone(), eta: eta.functional.clone() }),
    })
}

/// `<pi(f), u> = sum_x f(x) u(x)`.
pub fn pairing(f: &GroupFunction, u: &BpElement) -> Result<C64> {
    if !f.on_group(&u.group) {
        return Err(Error::GroupMismatch);
    }
    Ok(pair(f.coeffs(), &u.values))
}

/// `<pi(f) xi, eta>` through the attached realization.
pub fn realized_pairing(f: &GroupFunction, u: &BpElement) -> Result<Option<C64>> {
    let Some(r) = &u.realization else { return Ok(None) };
    let a = r.rep.lift_matrix(f)?;
    let g = r.rep.space().basis().transpose() * &r.eta;
    Ok(Some(pair(g.as_slice(), (a * &r.xi).as_slice())))
}

#[derive(Debug, Clone)]
pub struct BpOptions {
    pub budget: SolverBudget,
    /// Cutting-plane iterations for dual-norm maximization.
    pub cut_iters: usize,
    /// Relative gap between relaxation and certified value to stop at.
    pub cut_tol: f64,
    /// Multistart count for the realization search.
    pub upper_starts: usize,
    pub upper_evals: usize,
    /// Largest number of candidate representations combined in a direct sum.
    pub max_pieces: usize,
    /// Random compression vectors tried besides the corner.
    pub ascent_starts: usize,
    /// Cutting-plane iterations per step of the compression ascent.
    pub ascent_iters: usize,
    pub alternations: usize,
    pub seed: u64,
}

impl Default for BpOptions {
    fn default() -> Self {
        Self {
            budget: SolverBudget::default(),
            cut_iters: 200,
            cut_tol: 1e-7,
            upper_starts: 6,
            upper_evals: 20_000,
            max_pieces: 3,
            ascent_starts: 1,
            ascent_iters: 30,
            alternations: 2,
            seed: 0,
        }
    }
}

/// The unit ball of `F -> ||Pi^(n)(F)||` for `Pi` the direct sum of the
/// given blocks, parametrized by coefficients along a complement of the
/// common null ideal (one block of `r` coefficients per array entry).
pub struct DualBall<'a> {
    blocks: Vec<&'a Representation>,
    n: usize,
    h: CMat,
    null: CMat,
    budget: SolverBudget,
    /// Cheaper budget used inside the cutting-plane loop.
    inner: SolverBudget,
}

struct BallNorm {
    estimate: NormEstimate,
    block: usize,
    matrix: CMat,
    space: QSLpSpace,
    cut: Option<CVec>,
}

impl<'a> DualBall<'a> {
    pub fn new(blocks: &[&'a Representation], n: usize, budget: &SolverBudget) -> Result<Self> {
        let Some(first) = blocks.first() else {
            return Err(Error::InvalidRepresentation("the dual ball needs at least one block".into()));
        };
        if n == 0 {
            return Err(Error::ShapeMismatch("amplification order must be at least 1".into()));
        }
        let g = first.group();
        if blocks.iter().any(|b| *b.group() != *g) {
            return Err(Error::GroupMismatch);
        }
        let order = g.order();
        let rows: usize = blocks.iter().map(|b| b.dim() * b.dim()).sum();
        let mut vecs = CMat::zeros(rows, order);
        let mut off = 0;
        for b in blocks {
            let d = b.dim();
            for (x, m) in b.matrices().iter().enumerate() {
                for k in 0..d * d {
                    vecs[(off + k, x)] = m[(k % d, k / d)];
                }
            }
            off += d * d;
        }
        let null = null_space(&vecs, SPAN_TOL);
        // complement: real-orthogonal is enough, use the row space of `vecs`
        let h = column_basis(&vecs.transpose(), SPAN_TOL);
        let inner = SolverBudget { starts: budget.starts.min(8), brute_force_sphere_dim: 0, polish: 2, ..budget.clone() };
        Ok(Self { blocks: blocks.to_vec(), n, h, null, budget: budget.clone(), inner })
    }

    pub fn from_family(family: &'a UniversalFamily, n: usize, budget: &SolverBudget) -> Result<Self> {
        let blocks: Vec<&Representation> = family.pieces.iter().map(|p| &p.sub.rep).collect();
        Self::new(&blocks, n, budget)
    }

    fn r(&self) -> usize {
        self.h.ncols()
    }

    pub fn dim(&self) -> usize {
        self.n * self.n * self.r()
    }

    fn group(&self) -> &Arc<FiniteGroup> {
        self.blocks[0].group()
    }

    /// Basis of the common null ideal (columns indexed by group elements).
    pub fn null_ideal(&self) -> &CMat {
        &self.null
    }

    pub fn array(&self, z: &CVec) -> Array {
        let (n, r) = (self.n, self.r());
        (0..n)
            .map(|s| {
                (0..n)
                    .map(|t| {
                        let zk = z.rows((s * n + t) * r, r);
                        let f = &self.h * zk;
                        GroupFunction::new(self.group().clone(), f.iter().copied().collect()).expect("group length")
                    })
                    .collect()
            })
            .collect()
    }

    /// Linear functional on `z` from per-entry functions `w_st`:
    /// `z -> sum_st sum_y f_st(y) w_st(y)`.
    fn functional(&self, w: impl Fn(usize, usize, usize) -> C64) -> CVec {
        let (n, r, order) = (self.n, self.r(), self.group().order());
        let mut c = CVec::zeros(self.dim());
        for s in 0..n {
            for t in 0..n {
                for k in 0..r {
                    let mut acc = ZERO;
                    for y in 0..order {
                        acc += self.h[(y, k)] * w(s, t, y);
                    }
                    c[(s * n + t) * r + k] = acc;
                }
            }
        }
        c
    }

    /// Cut from a unit vector `x` and a unit functional `g` (coordinate
    /// form) of block `b`: `F -> g^T Pi_b^(n)(F) x`.
    fn cut(&self, b: usize, x: &CVec, g: &CVec) -> CVec {
        let rep = self.blocks[b];
        let (d, n) = (rep.dim(), self.n);
        let xs = CMat::from_fn(d, n, |i, t| x[t * d + i]);
        let gs = CMat::from_fn(d, n, |i, s| g[s * d + i]);
        let p: Vec<CMat> = rep.matrices().iter().map(|m| gs.transpose() * m * &xs).collect();
        self.functional(|s, t, y| p[y][(s, t)])
    }

    fn initial_cuts(&self) -> Vec<CVec> {
        let mut cuts = Vec::new();
        for (b, rep) in self.blocks.iter().enumerate() {
            let e = amplify_space(rep.space(), self.n);
            let dim = e.dim();
            let mut gs = Vec::new();
            let mut xs = Vec::new();
            for i in 0..dim {
                let mut v = CVec::zeros(dim);
                v[i] = ONE;
                let nv = e.norm(&v);
                if nv > 0.0 {
                    xs.push(&v / C64::new(nv, 0.0));
                    let (_, g) = e.norm_and_gradient(&v);
                    gs.push(g);
                }
            }
            if !e.is_plain() {
                let mut stream = rng::stream(rng::label_hash("initial-cuts"), &[b as u64, self.n as u64]);
                for _ in 0..dim {
                    let v = rng::random_cvec(&mut stream, dim);
                    let (_, g) = e.norm_and_gradient(&v);
                    gs.push(g);
                }
            }
            for x in &xs {
                for g in &gs {
                    let c = self.cut(b, x, g);
                    if c.norm() > 1e-12 {
                        cuts.push(c);
                    }
                }
            }
        }
        cuts
    }

    fn norm(&self, z: &CVec) -> Result<BallNorm> {
        self.norm_with(z, &self.budget)
    }

    fn norm_with(&self, z: &CVec, budget: &SolverBudget) -> Result<BallNorm> {
        let array = self.array(z);
        let mut best: Option<BallNorm> = None;
        let mut upper: f64 = 0.0;
        let mut certified = Some(0.0f64);
        for (b, rep) in self.blocks.iter().enumerate() {
            let a = rep.amplify(&array)?;
            let e = amplify_space(rep.space(), self.n);
            let est = opnorm(&a, &e, &e, budget)?;
            upper = upper.max(est.upper);
            certified = certified.zip(est.certified_upper).map(|(x, y)| x.max(y));
            if best.as_ref().is_none_or(|c| est.lower > c.estimate.lower) {
                best = Some(BallNorm { estimate: est, block: b, matrix: a, space: e, cut: None });
            }
        }
        let mut out = best.expect("nonempty");
        out.estimate.upper = upper.max(out.estimate.lower);
        out.estimate.certified_upper = certified.map(|c| c.max(out.estimate.lower));
        let x = &out.estimate.witness;
        let nx = out.space.norm(x);
        if nx > 0.0 && out.estimate.lower > 0.0 {
            let x = x / C64::new(nx, 0.0);
            let (_, g) = out.space.norm_and_gradient(&(&out.matrix * &x));
            out.cut = Some(self.cut(out.block, &x, &g));
        }
        Ok(out)
    }
}

/// Result of maximizing `Re <a, z>` over the unit ball.
#[derive(Debug, Clone)]
pub struct DualMax {
    /// `|<a, z>| / upper(||Pi(z)||)` at the best point.
    pub lower: f64,
    /// Value of the final relaxation, an upper bound for the maximum.
    pub relaxation: f64,
    pub z: CVec,
    pub array: Array,
    pub norm: NormEstimate,
    pub block: usize,
    pub block_matrix: CMat,
    pub block_space: QSLpSpace,
    pub iterations: usize,
    pub converged: bool,
}

impl DualMax {
    pub fn norm_quantity(&self, label: &str) -> Quantity {
        Quantity::operator(label, &self.block_matrix, &self.block_space, &self.block_space, self.norm.clone())
    }
}

fn phase_row(c: &CVec, theta: f64) -> Vec<f64> {
    let w = C64::from_polar(1.0, -theta);
    let d = c.len();
    let mut row = vec![0.0; 2 * d];
    for k in 0..d {
        let v = w * c[k];
        row[k] = v.re;
        row[d + k] = -v.im;
    }
    row
}

enum Lp {
    Solved(Vec<f64>, f64),
    Unbounded,
}

/// `max obj . x` subject to `row . x <= 1`, re-optimized from the previous
/// basis as rows are added.
struct CutLp {
    obj: Vec<f64>,
    rows: Vec<Vec<f64>>,
    state: Option<(Vec<Variable>, Solution)>,
}

fn sparse(vars: &[Variable], row: &[f64]) -> Vec<(Variable, f64)> {
    vars.iter().zip(row).filter(|(_, c)| **c != 0.0).map(|(v, c)| (*v, *c)).collect()
}

impl CutLp {
    fn new(obj: Vec<f64>) -> Self {
        Self { obj, rows: Vec::new(), state: None }
    }

    fn add(&mut self, row: Vec<f64>) {
        if let Some((vars, sol)) = self.state.take() {
            let expr = sparse(&vars, &row);
            // fall back to a cold solve if the warm start fails
            if let Ok(Ok(sol)) = sol.add_constraint(expr.as_slice(), ComparisonOp::Le, 1.0).map(|o| o.into_solution()) {
                self.state = Some((vars, sol));
            }
        }
        self.rows.push(row);
    }

    fn solve(&mut self) -> Result<Lp> {
        if self.state.is_none() {
            let mut problem = Problem::new(OptimizationDirection::Maximize);
            let vars: Vec<_> = self.obj.iter().map(|&c| problem.add_var(c, (f64::NEG_INFINITY, f64::INFINITY))).collect();
            for row in &self.rows {
                problem.add_constraint(sparse(&vars, row).as_slice(), ComparisonOp::Le, 1.0);
            }
            match problem.solve() {
                Ok(outcome) => {
                    let sol = outcome.into_solution().map_err(|_| Error::Unsupported("linear program interrupted".into()))?;
                    self.state = Some((vars, sol));
                }
                Err(microlp::Error::Unbounded) => return Ok(Lp::Unbounded),
                Err(e) => return Err(Error::Unsupported(format!("linear program failed: {e}"))),
            }
        }
        let (vars, sol) = self.state.as_ref().expect("solved");
        Ok(Lp::Solved(vars.iter().map(|v| sol.var_value(*v)).collect(), sol.objective()))
    }
}

/// Kelley cutting planes for `max Re <a, z>` subject to `||Pi^(n)(z)|| <= 1`.
/// Each solver witness yields a valid cut `|<c, z>| <= ||Pi^(n)(z)||`; discs
/// are cut by half-planes at the phase of the current iterate. Iterates are
/// scored with a cheap budget and the incumbent is confirmed with the full one.
fn maximize_linear(ball: &DualBall, a: &CVec, max_iters: usize, tol: f64) -> Result<Option<DualMax>> {
    let d = ball.dim();
    let obj: Vec<f64> = a.iter().map(|v| v.re).chain(a.iter().map(|v| -v.im)).collect();
    let mut cuts = ball.initial_cuts();
    let mut lp = CutLp::new(obj);
    for c in &cuts {
        for j in 0..4 {
            lp.add(phase_row(c, j as f64 * PI / 2.0));
        }
    }
    let score = |z: &CVec, bn: BallNorm, relaxation: f64, confirmed: bool| {
        let val = pair(a.as_slice(), z.as_slice()).norm();
        let lower = if bn.estimate.upper > 0.0 { val / bn.estimate.upper } else { 0.0 };
        let m = DualMax {
            lower,
            relaxation,
            z: z.clone(),
            array: ball.array(z),
            norm: bn.estimate,
            block: bn.block,
            block_matrix: bn.matrix,
            block_space: bn.space,
            iterations: 0,
            converged: false,
        };
        (m, bn.cut, confirmed)
    };
    let mut best: Option<(DualMax, bool)> = None;
    let mut relaxation = f64::INFINITY;
    let mut it = 0;
    let mut converged = false;
    while it < max_iters {
        it += 1;
        let (x, value) = match lp.solve()? {
            Lp::Solved(x, v) => (x, v),
            Lp::Unbounded => return Ok(None),
        };
        relaxation = relaxation.min(value.max(0.0));
        if value <= 1e-14 {
            // a vanishes on the ball
            let zero = CVec::zeros(d);
            let (m, _, _) = score(&zero, ball.norm(&zero)?, 0.0, true);
            best = Some((m, true));
            converged = true;
            break;
        }
        let z = CVec::from_fn(d, |k, _| C64::new(x[k], x[d + k]));
        let (m, cut, _) = score(&z, ball.norm_with(&z, &ball.inner)?, relaxation, false);
        let mut new_cuts: Vec<CVec> = cut.into_iter().collect();
        if best.as_ref().is_none_or(|(b, _)| m.lower > b.lower) {
            best = Some((m, false));
        }
        let (b, confirmed) = best.as_mut().expect("incumbent");
        if relaxation - b.lower <= tol * b.lower.max(1.0) {
            if !*confirmed {
                let zb = b.z.clone();
                let (full, cut, _) = score(&zb, ball.norm(&zb)?, relaxation, true);
                *b = full;
                *confirmed = true;
                new_cuts.extend(cut);
            }
            if relaxation - b.lower <= tol * b.lower.max(1.0) {
                converged = true;
                break;
            }
        }
        let mut added = false;
        for c in &new_cuts {
            let phase = pair(c.as_slice(), z.as_slice()).arg();
            lp.add(phase_row(c, phase));
            added = true;
        }
        for c in &cuts {
            let v = pair(c.as_slice(), z.as_slice());
            if v.norm() > 1.0 + 1e-9 {
                lp.add(phase_row(c, v.arg()));
                added = true;
            }
        }
        cuts.extend(new_cuts);
        if !added {
            break;
        }
    }
    let (mut out, confirmed) = best.expect("at least one iterate");
    if !confirmed {
        let zb = out.z.clone();
        out = score(&zb, ball.norm(&zb)?, relaxation, true).0;
    }
    out.relaxation = relaxation.max(out.lower);
    out.iterations = it;
    out.converged = converged;
    Ok(Some(out))
}

/// Lower bound for `||u||` as a functional on the completion of
/// `Pi(L_1(G))`, with the relaxation value as a matching upper bound.
#[derive(Debug, Clone)]
pub struct BpLower {
    pub lower: f64,
    pub relaxation: f64,
    pub witness: GroupFunction,
    pub pairing: C64,
    pub norm: NormEstimate,
    pub block_matrix: CMat,
    pub block_space: QSLpSpace,
    pub iterations: usize,
    pub converged: bool,
    /// `u` does not vanish on the null ideal of `Pi`: the functional is unbounded.
    pub unbounded: bool,
}

impl BpLower {
    /// Replayable `|<f, u>| / ||Pi(f)||`.
    pub fn ratio_quantity(&self, label: &str, u: &BpElement) -> Quantity {
        Quantity::Ratio {
            label: label.into(),
            num: Box::new(Quantity::Pairing {
                label: format!("{label}.pairing"),
                f: (&CVec::from_column_slice(self.witness.coeffs())).into(),
                u: (&CVec::from_column_slice(&u.values)).into(),
            }),
            den: Box::new(Quantity::operator(
                &format!("{label}.norm"),
                &self.block_matrix,
                &self.block_space,
                &self.block_space,
                self.norm.clone(),
            )),
        }
    }

    /// `[lower, relaxation]` as one quantity.
    pub fn bracket_quantity(&self, label: &str, u: &BpElement) -> Quantity {
        Quantity::Bounded { label: label.into(), lower: Box::new(self.ratio_quantity(label, u)), upper: self.relaxation }
    }
}

/// Maximize `|<f, u>|` over `||Pi(f)|| <= 1` for `Pi` the direct sum of
/// `blocks`.
pub fn bp_norm_lower(blocks: &[&Representation], u: &BpElement, opts: &BpOptions) -> Result<BpLower> {
    let ball = DualBall::new(blocks, 1, &opts.budget)?;
    if !u.group.as_ref().eq(ball.group().as_ref()) {
        return Err(Error::GroupMismatch);
    }
    let uv = CVec::from_column_slice(&u.values);
    let leak = (ball.null_ideal().transpose() * &uv).norm();
    let unbounded = leak > 1e-9 * uv.norm().max(1.0);
    if unbounded {
        let f = GroupFunction::zero(u.group.clone());
        let bn = ball.norm(&CVec::zeros(ball.dim()))?;
        return Ok(BpLower {
            lower: f64::INFINITY,
            relaxation: f64::INFINITY,
            witness: f,
            pairing: ZERO,
            norm: bn.estimate,
            block_matrix: bn.matrix,
            block_space: bn.space,
            iterations: 0,
            converged: false,
            unbounded: true,
        });
    }
    let a = ball.functional(|_, _, y| u.values[y]);
    let m = maximize_linear(&ball, &a, opts.cut_iters, opts.cut_tol)?.ok_or_else(|| Error::Unsupported("dual relaxation is unbounded".into()))?;
    let f = m.array[0][0].clone();
    let pairing = pair(f.coeffs(), &u.values);
    Ok(BpLower {
        lower: m.lower,
        relaxation: m.relaxation,
        witness: f,
        pairing,
        norm: m.norm,
        block_matrix: m.block_matrix,
        block_space: m.block_space,
        iterations: m.iterations,
        converged: m.converged,
        unbounded: false,
    })
}

pub fn bp_norm_lower_family(family: &UniversalFamily, u: &BpElement, opts: &BpOptions) -> Result<BpLower> {
    let blocks: Vec<&Representation> = family.pieces.iter().map(|p| &p.sub.rep).collect();
    bp_norm_lower(&blocks, u, opts)
}

#[derive(Debug, Clone)]
pub struct BpUpper {
    pub upper: f64,
    pub realization: Realization,
    /// Index of the candidate; indices past the inputs are direct sums.
    pub candidate: usize,
}

/// `min ||eta||` over functionals realizing `u` with the given `xi`, or
/// `None` when `u` is not reachable from `xi`.
fn best_eta(rep: &Representation, u: &CVec, xi: &CVec, annihilator: &CMat) -> Option<(f64, CVec)> {
    let s = rep.space();
    let m = s.ambient_dim();
    let order = u.len();
    let j = s.null_basis().ncols();
    let mut sys = CMat::zeros(order + j, m);
    let mut rhs = CVec::zeros(order + j);
    for (x, mx) in rep.matrices().iter().enumerate() {
        let v = s.basis() * (mx * xi);
        for i in 0..m {
            sys[(x, i)] = v[i];
        }
        rhs[x] = u[x];
    }
    for c in 0..j {
        for i in 0..m {
            sys[(order + c, i)] = s.null_basis()[(i, c)];
        }
    }
    let (eta0, res) = least_squares(&sys, &rhs);
    if !res.is_finite() || res > 1e-9 * u.norm().max(1.0) {
        return None;
    }
    let free = null_space(&sys, SPAN_TOL);
    let dirs = if annihilator.ncols() == 0 {
        free
    } else {
        let mut all = CMat::zeros(m, free.ncols() + annihilator.ncols());
        all.view_mut((0, 0), free.shape()).copy_from(&free);
        all.view_mut((0, free.ncols()), annihilator.shape()).copy_from(annihilator);
        all
    };
    let r = crate::space::min_affine_lp(&eta0, &dirs, s.q());
    Some((r.value, r.representative))
}

fn realization_search(rep: &Representation, u: &CVec, opts: &BpOptions, salt: u64) -> Option<(f64, CVec, CVec)> {
    let s = rep.space().clone();
    let d = rep.dim();
    let ann = if s.is_plain() { CMat::zeros(s.ambient_dim(), 0) } else { s.annihilator() };
    let eval = |xi: &CVec| -> Option<(f64, CVec)> {
        let nx = s.norm(xi);
        if nx.is_nan() || nx <= 0.0 {
            return None;
        }
        let (v, eta) = best_eta(rep, u, xi, &ann)?;
        Some((nx * v, eta))
    };
    let to_c = |x: &[f64]| CVec::from_fn(d, |i, _| C64::new(x[2 * i], x[2 * i + 1]));
    let mut stream = rng::stream(opts.seed, &[rng::label_hash("realization"), salt]);
    let mut starts: Vec<CVec> = (0..d)
        .map(|i| {
            let mut v = CVec::from_element(d, C64::new(0.05, 0.0));
            v[i] = ONE;
            v
        })
        .collect();
    starts.push(CVec::from_element(d, ONE));
    while starts.len() < opts.upper_starts.max(1) + d + 1 {
        starts.push(rng::random_cvec(&mut stream, d));
    }
    let mut best: Option<(f64, CVec, CVec)> = None;
    for x0 in starts.iter() {
        if eval(x0).is_none() {
            continue;
        }
        let flat: Vec<f64> = x0.iter().flat_map(|z| [z.re, z.im]).collect();
        let scale = x0.norm();
        let r = compass_search(
            |x| eval(&to_c(x)).map_or(f64::INFINITY, |(v, _)| v),
            &flat,
            0.25 * scale,
            1e-9 * scale,
            opts.upper_evals,
        );
        let xi = to_c(&r.x);
        if let Some((v, eta)) = eval(&xi) {
            if best.as_ref().is_none_or(|b| v < b.0) {
                best = Some((v, xi, eta));
            }
        }
    }
    best
}

/// Smallest `||xi|| ||eta||` found over realizations `u = <pi(.) xi, eta>` on
/// each candidate and on direct sums of up to `max_pieces` of them.
pub fn bp_norm_upper(u: &BpElement, candidates: &[&Representation], opts: &BpOptions) -> Result<BpUpper> {
    let uv = CVec::from_column_slice(&u.values);
    let mut reps: Vec<Representation> = candidates.iter().map(|r| (*r).clone()).collect();
    if candidates.len() >= 2 && opts.max_pieces >= 2 {
        let k = candidates.len().min(opts.max_pieces);
        reps.push(direct_sum_rep(&candidates[..k])?);
    }
    let mut best: Option<BpUpper> = None;
    for (idx, rep) in reps.iter().enumerate() {
        if **rep.group() != *u.group {
            return Err(Error::GroupMismatch);
        }
        if uv.iter().all(|v| *v == ZERO) {
            let xi = CVec::zeros(rep.dim());
            let eta = CVec::zeros(rep.space().ambient_dim());
            return Ok(BpUpper { upper: 0.0, realization: Realization { rep: Arc::new(rep.clone()), xi, eta }, candidate: idx });
        }
        if let Some((v, xi, eta)) = realization_search(rep, &uv, opts, idx as u64) {
            if best.as_ref().is_none_or(|b| v < b.upper) {
                best = Some(BpUpper { upper: v, realization: Realization { rep: Arc::new(rep.clone()), xi, eta }, candidate: idx });
            }
        }
    }
    best.ok_or(Error::Infeasible)
}

/// `sum_chi |u^(chi)|` over the characters of a finite abelian group.
pub fn fourier_oracle_p2(u: &BpElement) -> Result<f64> {
    let chars = characters(&u.group)?;
    let n = u.group.order() as f64;
    Ok(chars
        .iter()
        .map(|chi| (u.values.iter().zip(chi).map(|(a, c)| a * c.conj()).sum::<C64>() / n).norm())
        .sum())
}

/// Character table of a finite abelian group, one row per character.
pub fn characters(group: &FiniteGroup) -> Result<Vec<Vec<C64>>> {
    if !group.is_abelian() {
        return Err(Error::NotAbelian);
    }
    let order = group.order();
    let e = group.identity();
    // greedy generating set
    let mut gens = Vec::new();
    let mut span = vec![e];
    while span.len() < order {
        let g = (0..order).find(|x| !span.contains(x)).expect("element outside the span");
        gens.push(g);
        span = closure(group, &gens);
    }
    let orders: Vec<usize> = gens.iter().map(|&g| group.element_order(g)).collect();
    let mut out = Vec::new();
    let total: usize = orders.iter().product();
    for mut code in 0..total {
        let mut vals = Vec::with_capacity(gens.len());
        for &o in &orders {
            vals.push(C64::from_polar(1.0, 2.0 * PI * (code % o) as f64 / o as f64));
            code /= o;
        }
        if let Some(chi) = extend_character(group, &gens, &vals) {
            if !out.iter().any(|c: &Vec<C64>| c.iter().zip(&chi).all(|(a, b)| (a - b).norm() < 1e-9)) {
                out.push(chi);
            }
        }
    }
    if out.len() != order {
        return Err(Error::Unsupported(format!("found {} characters for a group of order {order}", out.len())));
    }
    Ok(out)
}

fn closure(group: &FiniteGroup, gens: &[usize]) -> Vec<usize> {
    let mut seen = vec![false; group.order()];
    let mut stack = vec![group.identity()];
    seen[group.identity()] = true;
    while let Some(x) = stack.pop() {
        for &g in gens {
            let y = group.mul(x, g);
            if !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    (0..group.order()).filter(|&x| seen[x]).collect()
}

fn extend_character(group: &FiniteGroup, gens: &[usize], vals: &[C64]) -> Option<Vec<C64>> {
    let order = group.order();
    let mut chi: Vec<Option<C64>> = vec![None; order];
    chi[group.identity()] = Some(ONE);
    let mut stack = vec![group.identity()];
    while let Some(x) = stack.pop() {
        let cx = chi[x].expect("visited");
        for (g, v) in gens.iter().zip(vals) {
            let y = group.mul(x, *g);
            let cy = cx * v;
            match chi[y] {
                Some(c) if (c - cy).norm() > 1e-9 => return None,
                Some(_) => {}
                None => {
                    chi[y] = Some(cy);
                    stack.push(y);
                }
            }
        }
    }
    chi.into_iter().collect()
}

/// `S(F)_{(s,i),(t,j)} = <f_st, u_ij>`, an `nm x nm` scalar matrix.
pub fn compression_matrix(array: &Array, us: &[Vec<BpElement>]) -> CMat {
    let n = array.len();
    let m = us.len();
    CMat::from_fn(n * m, n * m, |row, col| {
        let (s, i) = (row / m, row % m);
        let (t, j) = (col / m, col % m);
        pair(array[s][t].coeffs(), &us[i][j].values)
    })
}

/// Best certified compression ratio `||S(F)||_{p->p} / ||Pi^(n)(F)||`.
#[derive(Debug, Clone)]
pub struct CompressionBound {
    pub n: usize,
    pub lower: f64,
    pub array: Array,
    pub s_matrix: CMat,
    pub s_norm: NormEstimate,
    pub pi_norm: NormEstimate,
    pub block_matrix: CMat,
    pub block_space: QSLpSpace,
}

impl CompressionBound {
    pub fn quantity(&self, label: &str, p: f64) -> Quantity {
        Quantity::Ratio {
            label: label.into(),
            num: Box::new(Quantity::scalar(&format!("{label}.S"), &self.s_matrix, p, p, self.s_norm.clone())),
            den: Box::new(Quantity::operator(
                &format!("{label}.Pi"),
                &self.block_matrix,
                &self.block_space,
                &self.block_space,
                self.pi_norm.clone(),
            )),
        }
    }
}

fn evaluate_compression(ball: &DualBall, z: &CVec, us: &[Vec<BpElement>], p: f64, budget: &SolverBudget) -> Result<Option<CompressionBound>> {
    if z.iter().all(|v| *v == ZERO) {
        return Ok(None);
    }
    let array = ball.array(z);
    let s = compression_matrix(&array, us);
    let s_norm = mixed_scalar_norm(&s, p, p, budget);
    let bn = ball.norm(z)?;
    if bn.estimate.upper <= 0.0 {
        return Ok(None);
    }
    Ok(Some(CompressionBound {
        n: ball.n,
        lower: s_norm.lower / bn.estimate.upper,
        array,
        s_matrix: s,
        s_norm,
        pi_norm: bn.estimate,
        block_matrix: bn.matrix,
        block_space: bn.space,
    }))
}

/// Ascent for `sup ||S(F)|| / ||Pi^(n)(F)||` at one `n`. Starts from the
/// corner embedding of `corner` (an entry-level witness) and from seeded
/// compression vectors, alternating between the LP over `F` for fixed
/// `(alpha, beta)` and the norming vectors of `S(F)`.
pub fn compression_ascent(
    blocks: &[&Representation],
    us: &[Vec<BpElement>],
    n: usize,
    corner: Option<&GroupFunction>,
    opts: &BpOptions,
) -> Result<CompressionBound> {
    let m = us.len();
    if m == 0 || us.iter().any(|r| r.len() != m) {
        return Err(Error::ShapeMismatch("expected a nonempty square array of coefficient functions".into()));
    }
    let ball = DualBall::new(blocks, n, &opts.budget)?;
    let p = blocks[0].p();
    let q = crate::linalg::conjugate_exponent(p);
    let r = ball.r();
    let mut best: Option<CompressionBound> = None;
    let keep = |best: &mut Option<CompressionBound>, c: Option<CompressionBound>| {
        if let Some(c) = c {
            if best.as_ref().is_none_or(|b| c.lower > b.lower) {
                *best = Some(c);
            }
        }
    };
    if let Some(f) = corner {
        // coefficients of f along the complement basis
        let (coef, _) = least_squares(&ball.h, &CVec::from_column_slice(f.coeffs()));
        let mut z = CVec::zeros(ball.dim());
        z.rows_mut(0, r).copy_from(&coef);
        keep(&mut best, evaluate_compression(&ball, &z, us, p, &opts.budget)?);
    }
    let mut stream = rng::stream(opts.seed, &[rng::label_hash("compression"), n as u64, m as u64]);
    let mut starts: Vec<(CVec, CVec)> = Vec::new();
    let mut e1 = CVec::zeros(n * m);
    e1[0] = ONE;
    starts.push((e1.clone(), e1));
    for _ in 0..opts.ascent_starts {
        let a = rng::random_cvec(&mut stream, n * m);
        let b = rng::random_cvec(&mut stream, n * m);
        let a = &a / C64::new(lp_norm(a.as_slice(), p), 0.0);
        let b = &b / C64::new(lp_norm(b.as_slice(), q), 0.0);
        starts.push((a, b));
    }
    for (mut alpha, mut beta) in starts {
        for _ in 0..opts.alternations.max(1) {
            let obj = ball.functional(|s, t, y| {
                let mut acc = ZERO;
                for i in 0..m {
                    for j in 0..m {
                        acc += beta[s * m + i] * alpha[t * m + j] * us[i][j].values[y];
                    }
                }
                acc
            });
            let Some(dm) = maximize_linear(&ball, &obj, opts.ascent_iters, opts.cut_tol)? else { break };
            let cand = evaluate_compression(&ball, &dm.z, us, p, &opts.budget)?;
            let Some(c) = cand else { break };
            let w = c.s_norm.witness.clone();
            let nw = lp_norm(w.as_slice(), p);
            if nw == 0.0 {
                keep(&mut best, Some(c));
                break;
            }
            alpha = &w / C64::new(nw, 0.0);
            beta = norming_functional((&c.s_matrix * &alpha).as_slice(), p);
            keep(&mut best, Some(c));
        }
    }
    match best {
        Some(b) => Ok(b),
        None => {
            let z = CVec::zeros(ball.dim());
            let bn = ball.norm(&z)?;
            Ok(CompressionBound {
                n,
                lower: 0.0,
                array: ball.array(&z),
                s_matrix: CMat::zeros(n * m, n * m),
                s_norm: mixed_scalar_norm(&CMat::zeros(n * m, n * m), p, p, &opts.budget),
                pi_norm: bn.estimate,
                block_matrix: bn.matrix,
                block_space: bn.space,
            })
        }
    }
}

/// Lower bound for the norm of `[u_ij]` in `M_m(B_p(G))`: the best
/// compression ratio over `n <= n_max`.
pub fn bp_matrix_norm(
    blocks: &[&Representation],
    us: &[Vec<BpElement>],
    n_max: usize,
    opts: &BpOptions,
) -> Result<CompressionBound> {
    let corner = if us.is_empty() || us[0].is_empty() {
        None
    } else {
        let l = bp_norm_lower(blocks, &us[0][0], opts)?;
        (!l.unbounded).then_some(l.witness)
    };
    let mut best: Option<CompressionBound> = None;
    for n in 1..=n_max.max(1) {
        let c = compression_ascent(blocks, us, n, corner.as_ref(), opts)?;
        if best.as_ref().is_none_or(|b| c.lower > b.lower) {
            best = Some(c);
        }
    }
    Ok(best.expect("n_max >= 1"))
}

/// `||u_n|| = ||u_1||` for `n <= n_max`, as two one-sided records per `n`:
/// no compression beats the bracket of `u` (`cb_upper`) and the best
/// compression reaches it (`cb_lower`).
pub fn cb_functional_check(
    tag: &Tag,
    blocks: &[&Representation],
    u: &BpElement,
    n_max: usize,
    tol: f64,
    opts: &BpOptions,
) -> Result<Vec<CheckRecord>> {
    let p = blocks[0].p();
    let one = bp_norm_lower(blocks, u, opts)?;
    if one.unbounded {
        return Err(Error::InvalidRepresentation("u does not vanish on the null ideal".into()));
    }
    let us = vec![vec![u.clone()]];
    let mut out = Vec::new();
    for n in 1..=n_max {
        let c = compression_ascent(blocks, &us, n, Some(&one.witness), opts)?;
        let qs = vec![c.quantity("u_n", p), one.bracket_quantity("u_1", u)];
        let sub = tag.child(format!("n={n}"));
        out.push(CheckRecord::new(&sub, "cb_upper", Relation::LessEq, Expr::Q(0), Expr::Q(1), qs.clone(), tol, GAP_GATE));
        out.push(CheckRecord::new(&sub, "cb_lower", Relation::LessEq, Expr::Q(1), Expr::Q(0), qs, tol, GAP_GATE));
    }
    Ok(out)
}

/// A functional on `PF_{p,pi}(G)` given by `sum_k <pi(.) xi_k, eta_k>`.
#[derive(Debug, Clone)]
pub struct RealizedFunctional {
    pub terms: Vec<(CVec, CVec)>,
}

impl RealizedFunctional {
    /// `u(x) = phi(pi(x))`; for a finite group this determines `u` uniquely.
    pub fn coefficient(&self, rep: &Representation) -> BpElement {
        let order = rep.group().order();
        let mut values = vec![ZERO; order];
        for (xi, eta) in &self.terms {
            for (v, w) in values.iter_mut().zip(coefficient_values(rep, xi, eta)) {
                *v += w;
            }
        }
        let realization = (self.terms.len() == 1).then(|| Realization {
            rep: Arc::new(rep.clone()),
            xi: self.terms[0].0.clone(),
            eta: self.terms[0].1.clone(),
        });
        BpElement { group: rep.group().clone(), values, realization }
    }

    pub fn quantities(&self, rep: &Representation, label: &str) -> Vec<Quantity> {
        let r = Arc::new(rep.clone());
        self.terms
            .iter()
            .enumerate()
            .map(|(k, (xi, eta))| Realization { rep: r.clone(), xi: xi.clone(), eta: eta.clone() }.quantity(&format!("{label}[{k}]")))
            .collect()
    }
}

/// For each functional: `||u|| <= sum_k ||xi_k|| ||eta_k||` (lower bound of
/// the dual norm over the ball of `rep`), and the bracket
/// `[lower, realization upper]` is nonempty.
pub fn duality_contractivity_check(
    tag: &Tag,
    rep: &Representation,
    functionals: &[RealizedFunctional],
    tol: f64,
    opts: &BpOptions,
) -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    for (k, phi) in functionals.iter().enumerate() {
        let u = phi.coefficient(rep);
        let lower = bp_norm_lower(&[rep], &u, opts)?;
        let sub = tag.child(k);
        let mut qs = vec![lower.ratio_quantity("u", &u)];
        let terms = phi.quantities(rep, "phi");
        let sum: Vec<Expr> = (1..=terms.len()).map(Expr::Q).collect();
        qs.extend(terms);
        out.push(CheckRecord::new(&sub, "contractive", Relation::LessEq, Expr::Q(0), Expr::Sum(sum), qs, tol, GAP_GATE));
        let upper = bp_norm_upper(&u, &[rep], opts)?;
        let qs = vec![lower.ratio_quantity("u", &u), upper.realization.quantity("upper")];
        out.push(CheckRecord::new(&sub, "bracket", Relation::LessEq, Expr::Q(0), Expr::Q(1), qs, tol, GAP_GATE));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check::Verdict;

    fn z(n: usize) -> Arc<FiniteGroup> {
        Arc::new(FiniteGroup::cyclic(n))
    }

    fn opts() -> BpOptions {
        BpOptions::default()
    }

    fn basis(d: usize, i: usize) -> CVec {
        let mut v = CVec::zeros(d);
        v[i] = ONE;
        v
    }

    #[test]
    fn coefficient_examples() {
        let g = z(2);
        let triv = Arc::new(Representation::trivial(g.clone(), 3.0).unwrap());
        let s = triv.space().clone();
        let u = coefficient_function(
            triv.clone(),
            &SpaceVector::new(s.clone(), basis(1, 0)).unwrap(),
            &DualVector::new(s, basis(1, 0)).unwrap(),
        )
        .unwrap();
        assert_eq!(u.values, vec![ONE, ONE]);
        let reg = Arc::new(Representation::left_regular(g.clone(), 3.0).unwrap());
        let s = reg.space().clone();
        let x = SpaceVector::new(s.clone(), basis(2, 0)).unwrap();
        let u = coefficient_function(reg.clone(), &x, &DualVector::new(s.clone(), basis(2, 0)).unwrap()).unwrap();
        assert_eq!(u.values, vec![ONE, ZERO]);
        let u = coefficient_function(reg, &x, &DualVector::new(s, basis(2, 1)).unwrap()).unwrap();
        assert_eq!(u.values, vec![ZERO, ONE]);
        assert!(u.realization_error().unwrap() < 1e-12);
    }

    #[test]
    fn pairing_examples() {
        let g = z(3);
        let mut r = rng::stream(1, &[]);
        let f = GroupFunction::random(g.clone(), &mut r);
        let u = BpElement::new(g.clone(), rng::random_cvec(&mut r, 3).iter().copied().collect()).unwrap();
        assert!((pairing(&GroupFunction::delta(g.clone(), 0), &u).unwrap() - u.values[0]).norm() < 1e-15);
        assert!((pairing(&f, &BpElement::one(g.clone())).unwrap() - f.haar_integral()).norm() < 1e-12);
        let reg = Arc::new(Representation::left_regular(g.clone(), 2.5).unwrap());
        let s = reg.space().clone();
        let xi = SpaceVector::new(s.clone(), rng::random_cvec(&mut r, 3)).unwrap();
        let eta = DualVector::new(s, rng::random_cvec(&mut r, 3)).unwrap();
        let u = coefficient_function(reg, &xi, &eta).unwrap();
        let a = pairing(&f, &u).unwrap();
        let b = realized_pairing(&f, &u).unwrap().unwrap();
        assert!((a - b).norm() < 1e-9);
    }

    #[test]
    fn fourier_examples() {
        for n in [2, 3, 4, 5] {
            assert!((fourier_oracle_p2(&BpElement::one(z(n))).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!((fourier_oracle_p2(&BpElement::delta_e(z(2))).unwrap() - 1.0).abs() < 1e-12);
        let u = BpElement::from_real(z(2), &[1.0, -1.0]).unwrap();
        assert!((fourier_oracle_p2(&u).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(fourier_oracle_p2(&BpElement::one(Arc::new(FiniteGroup::dihedral(3)))), Err(Error::NotAbelian)));
    }

    #[test]
    fn characters_of_product_group() {
        // Z_2 x Z_2 as a table
        let t: Vec<Vec<usize>> = (0..4).map(|a| (0..4).map(|b| a ^ b).collect()).collect();
        let g = FiniteGroup::from_table(t, Some(0)).unwrap();
        let chars = characters(&g).unwrap();
        assert_eq!(chars.len(), 4);
        for (i, a) in chars.iter().enumerate() {
            for (j, b) in chars.iter().enumerate() {
                let ip: C64 = a.iter().zip(b).map(|(x, y)| x * y.conj()).sum();
                let want = if i == j { 4.0 } else { 0.0 };
                assert!((ip - C64::new(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn lower_examples() {
        let g = z(3);
        let reg = Representation::left_regular(g.clone(), 3.0).unwrap();
        let triv = Representation::trivial(g.clone(), 3.0).unwrap();
        let l = bp_norm_lower(&[&reg, &triv], &BpElement::one(g.clone()), &opts()).unwrap();
        assert!(l.lower >= 1.0 - 1e-6 && l.converged, "{l:?}");
        assert!(l.relaxation <= 1.0 + 1e-5);
        let l = bp_norm_lower(&[&reg], &BpElement::zero(g.clone()), &opts()).unwrap();
        assert_eq!(l.lower, 0.0);
        let mut r = rng::stream(2, &[]);
        let u = BpElement::new(g.clone(), rng::random_cvec(&mut r, 3).iter().copied().collect()).unwrap();
        let a = bp_norm_lower(&[&reg], &u, &opts()).unwrap();
        let c = C64::new(-1.5, 2.0);
        let b = bp_norm_lower(&[&reg], &u.scale(c), &opts()).unwrap();
        assert!((b.lower - c.norm() * a.lower).abs() < 1e-5 * b.lower.max(1.0));
    }

    #[test]
    fn unbounded_when_u_misses_null_ideal() {
        let g = z(2);
        let triv = Representation::trivial(g.clone(), 2.0).unwrap();
        let u = BpElement::from_real(g, &[1.0, -1.0]).unwrap();
        assert!(bp_norm_lower(&[&triv], &u, &opts()).unwrap().unbounded);
    }

    #[test]
    fn upper_examples() {
        let g = z(2);
        let triv = Representation::trivial(g.clone(), 2.5).unwrap();
        let up = bp_norm_upper(&BpElement::one(g.clone()), &[&triv], &opts()).unwrap();
        assert!((up.upper - 1.0).abs() < 1e-9);
        let reg = Representation::left_regular(g.clone(), 2.0).unwrap();
        let up = bp_norm_upper(&BpElement::delta_e(g.clone()), &[&reg], &opts()).unwrap();
        assert!(up.upper <= 1.0 + 1e-9);
        assert!(matches!(
            bp_norm_upper(&BpElement::from_real(g, &[1.0, -1.0]).unwrap(), &[&triv], &opts()),
            Err(Error::Infeasible)
        ));
    }

    #[test]
    fn p2_bracket_contains_fourier_norm() {
        let mut r = rng::stream(3, &[]);
        for n in [2, 3, 4] {
            let g = z(n);
            let reg = Representation::left_regular(g.clone(), 2.0).unwrap();
            let vals: Vec<f64> = (0..n).map(|_| rng::normal(&mut r)).collect();
            for u in [BpElement::one(g.clone()), BpElement::delta_e(g.clone()), BpElement::from_real(g.clone(), &vals).unwrap()] {
                let exact = fourier_oracle_p2(&u).unwrap();
                let lo = bp_norm_lower(&[&reg], &u, &opts()).unwrap();
                let up = bp_norm_upper(&u, &[&reg], &opts()).unwrap();
                assert!(lo.lower <= exact + 1e-3 && up.upper >= exact - 1e-3, "n={n} {} {exact} {}", lo.lower, up.upper);
                assert!((lo.lower - exact).abs() < 1e-4 && (up.upper - exact).abs() < 1e-4, "n={n} {} {exact} {}", lo.lower, up.upper);
            }
        }
    }

    #[test]
    fn matrix_norm_examples() {
        let g = z(2);
        let reg = Representation::left_regular(g.clone(), 3.0).unwrap();
        let mut r = rng::stream(4, &[]);
        let u = BpElement::new(g.clone(), rng::random_cvec(&mut r, 2).iter().copied().collect()).unwrap();
        let low = bp_norm_lower(&[&reg], &u, &opts()).unwrap();
        let one = bp_matrix_norm(&[&reg], &[vec![u.clone()]], 1, &opts()).unwrap();
        assert!((one.lower - low.lower).abs() < 1e-4);
        let two = bp_matrix_norm(&[&reg], &[vec![u.clone()]], 2, &opts()).unwrap();
        assert!(two.lower >= one.lower - 1e-12);
        let zero = BpElement::zero(g.clone());
        let diag = vec![vec![u.clone(), zero.clone()], vec![zero.clone(), u.clone()]];
        let d = bp_matrix_norm(&[&reg], &diag, 1, &opts()).unwrap();
        assert!(d.lower >= low.lower - 1e-4);
        let z0 = bp_matrix_norm(&[&reg], &[vec![zero]], 2, &opts()).unwrap();
        assert_eq!(z0.lower, 0.0);
    }

    #[test]
    fn cb_norm_equals_norm() {
        let g = z(2);
        let mut r = rng::stream(5, &[]);
        for p in [2.0, 3.0] {
            let reg = Representation::left_regular(g.clone(), p).unwrap();
            let u = BpElement::new(g.clone(), rng::random_cvec(&mut r, 2).iter().copied().collect()).unwrap();
            for rec in cb_functional_check(&Tag::new("t", "0"), &[&reg], &u, 2, 1e-3, &opts()).unwrap() {
                assert_eq!(rec.verdict, Verdict::Pass, "{p} {} {:?} {:?}", rec.check, rec.lhs_value, rec.rhs_value);
            }
        }
    }

    #[test]
    fn duality_examples() {
        let g = z(3);
        let mut r = rng::stream(6, &[]);
        let reg = Representation::left_regular(g.clone(), 2.5).unwrap();
        let phis = vec![
            RealizedFunctional { terms: vec![(rng::random_cvec(&mut r, 3), rng::random_cvec(&mut r, 3))] },
            RealizedFunctional { terms: vec![(CVec::zeros(3), CVec::zeros(3))] },
        ];
        for rec in duality_contractivity_check(&Tag::new("t", "0"), &reg, &phis, 1e-4, &opts()).unwrap() {
            assert_eq!(rec.verdict, Verdict::Pass, "{} {:?} {:?}", rec.check, rec.lhs_value, rec.rhs_value);
        }
        let u = phis[1].coefficient(&reg);
        assert!(u.values.iter().all(|v| *v == ZERO));
        // trivial representation: u is the constant phi(1)
        let triv = Representation::trivial(g.clone(), 2.5).unwrap();
        let phi = RealizedFunctional { terms: vec![(basis(1, 0) * C64::new(2.0, 0.0), basis(1, 0) * C64::new(0.0, 1.5))] };
        let u = phi.coefficient(&triv);
        assert!(u.values.iter().all(|v| (v - C64::new(0.0, 3.0)).norm() < 1e-12));
        let l = bp_norm_lower(&[&triv], &u, &opts()).unwrap();
        assert!((l.lower - 3.0).abs() < 1e-6);
    }

    #[test]
    fn enlarging_the_family_can_only_lower_the_dual_norm() {
        let g = z(4);
        let reg = Representation::left_regular(g.clone(), 3.0).unwrap();
        let triv = Representation::trivial(g.clone(), 3.0).unwrap();
        let u = BpElement::one(g.clone());
        let small = bp_norm_lower(&[&triv], &u, &opts()).unwrap();
        let big = bp_norm_lower(&[&triv, &reg], &u, &opts()).unwrap();
        assert!(big.lower <= small.relaxation + 1e-6);
        let mut r = rng::stream(7, &[]);
        let v = BpElement::new(g.clone(), rng::random_cvec(&mut r, 4).iter().copied().collect()).unwrap();
        let a = bp_norm_lower(&[&reg], &v, &opts()).unwrap();
        let b = bp_norm_lower(&[&reg, &triv], &v, &opts()).unwrap();
        assert!(b.lower <= a.relaxation + 1e-6);
    }
}
