//! Representations of finite groups by invertible isometries of QSL_p
//! spaces, their lifts to `L_1(G)`, direct sums, amplifications and cyclic
//! subrepresentations.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::group::{FiniteGroup, GroupFunction};
use crate::linalg::{block_diag, column_basis, max_abs_diff, rank, span_contains, CMat, CVec, C64, ONE, ZERO};
use crate::opnorm::{opnorm, NormEstimate, SolverBudget};
use crate::rng;
use crate::space::{amplify_space, direct_sum_space, QSLpSpace};

const HOM_TOL: f64 = 1e-9;
const EXHAUSTIVE_ORDER: usize = 16;
const SPAN_TOL: f64 = 1e-9;
pub const ISOMETRY_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct Representation {
    group: Arc<FiniteGroup>,
    space: Arc<QSLpSpace>,
    matrices: Vec<CMat>,
}

/// `pi(f) = sum_x f(x) pi(x)`.
#[derive(Debug, Clone)]
pub struct LiftedOperator {
    pub f: GroupFunction,
    pub matrix: CMat,
}

impl Representation {
    /// Validates shapes, `pi(e) = I` and the homomorphism property (all pairs
    /// up to order 16, a seeded sample above). Isometry is checked separately
    /// by [`Representation::verify`] since it needs the norm solvers.
    pub fn new(group: Arc<FiniteGroup>, space: Arc<QSLpSpace>, matrices: Vec<CMat>) -> Result<Self> {
        let n = group.order();
        let d = space.dim();
        if matrices.len() != n {
            return Err(Error::InvalidRepresentation(format!("{} matrices for a group of order {n}", matrices.len())));
        }
        if let Some(bad) = matrices.iter().position(|m| m.shape() != (d, d)) {
            return Err(Error::InvalidRepresentation(format!("matrix {bad} is not {d}x{d}")));
        }
        let rep = Self { group, space, matrices };
        rep.check_homomorphism()?;
        Ok(rep)
    }

    fn check_homomorphism(&self) -> Result<()> {
        let g = &self.group;
        let d = self.dim();
        let id = CMat::identity(d, d);
        if max_abs_diff(&self.matrices[g.identity()], &id) > HOM_TOL {
            return Err(Error::InvalidRepresentation("identity does not act as the identity".into()));
        }
        let scale = self.matrices.iter().map(|m| m.norm()).fold(1.0, f64::max);
        let check = |a: usize, b: usize| -> Result<()> {
            let err = max_abs_diff(&(&self.matrices[a] * &self.matrices[b]), &self.matrices[g.mul(a, b)]);
            if err > HOM_TOL * scale * scale {
                Err(Error::InvalidRepresentation(format!("pi({a}) pi({b}) != pi({a}*{b}), error {err:.3e}")))
            } else {
                Ok(())
            }
        };
        let n = g.order();
        if n <= EXHAUSTIVE_ORDER {
            for a in 0..n {
                for b in 0..n {
                    check(a, b)?;
                }
            }
        } else {
            let mut r = rng::stream(n as u64, &[rng::label_hash("homomorphism")]);
            for _ in 0..4096 {
                let a = (rng::uniform(&mut r) * n as f64) as usize % n;
                let b = (rng::uniform(&mut r) * n as f64) as usize % n;
                check(a, b)?;
            }
            for a in 0..n {
                check(a, g.inverse(a))?;
            }
        }
        Ok(())
    }

    /// `lambda(g) delta_x = delta_{g x}` on `l_p(G)`.
    pub fn left_regular(group: Arc<FiniteGroup>, p: f64) -> Result<Self> {
        let n = group.order();
        let action: Vec<Vec<usize>> = (0..n).map(|g| (0..n).map(|x| group.mul(g, x)).collect()).collect();
        Self::permutation(group, &action, p)
    }

    pub fn trivial(group: Arc<FiniteGroup>, p: f64) -> Result<Self> {
        let space = Arc::new(QSLpSpace::lp(1, p)?);
        let matrices = vec![CMat::identity(1, 1); group.order()];
        Self::new(group, space, matrices)
    }

    /// Permutation representation of an action, `action[g][x] = g . x`.
    pub fn permutation(group: Arc<FiniteGroup>, action: &[Vec<usize>], p: f64) -> Result<Self> {
        let n = group.order();
        if action.len() != n {
            return Err(Error::InvalidRepresentation(format!("action table has {} rows, group order {n}", action.len())));
        }
        let m = action.first().map_or(0, |r| r.len());
        if m == 0 {
            return Err(Error::InvalidRepresentation("action on an empty set".into()));
        }
        for (g, row) in action.iter().enumerate() {
            let mut seen = vec![false; m];
            if row.len() != m || row.iter().any(|&x| x >= m || std::mem::replace(&mut seen[x], true)) {
                return Err(Error::InvalidRepresentation(format!("row {g} of the action is not a permutation")));
            }
        }
        let space = Arc::new(QSLpSpace::lp(m, p)?);
        let matrices = action
            .iter()
            .map(|row| {
                let mut a = CMat::zeros(m, m);
                for (x, &gx) in row.iter().enumerate() {
                    a[(gx, x)] = ONE;
                }
                a
            })
            .collect();
        Self::new(group, space, matrices)
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn space(&self) -> &Arc<QSLpSpace> {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn p(&self) -> f64 {
        self.space.p()
    }

    pub fn matrix(&self, g: usize) -> &CMat {
        &self.matrices[g]
    }

    pub fn matrices(&self) -> &[CMat] {
        &self.matrices
    }

    pub fn lift(&self, f: &GroupFunction) -> Result<LiftedOperator> {
        Ok(LiftedOperator { f: f.clone(), matrix: self.lift_matrix(f)? })
    }

    pub fn lift_matrix(&self, f: &GroupFunction) -> Result<CMat> {
        if !f.on_group(&self.group) {
            return Err(Error::GroupMismatch);
        }
        let d = self.dim();
        let mut out = CMat::zeros(d, d);
        for (x, &c) in f.coeffs().iter().enumerate() {
            if c != ZERO {
                out += &self.matrices[x] * c;
            }
        }
        Ok(out)
    }

    /// `pi^(n)([f_ij]) = [pi(f_ij)]` on `E^(n)`.
    pub fn amplify(&self, array: &[Vec<GroupFunction>]) -> Result<CMat> {
        let n = array.len();
        if n == 0 || array.iter().any(|row| row.len() != n) {
            return Err(Error::ShapeMismatch("amplification needs a nonempty square array".into()));
        }
        let d = self.dim();
        let mut out = CMat::zeros(n * d, n * d);
        for (i, row) in array.iter().enumerate() {
            for (j, f) in row.iter().enumerate() {
                let block = self.lift_matrix(f)?;
                out.view_mut((i * d, j * d), (d, d)).copy_from(&block);
            }
        }
        Ok(out)
    }

    pub fn amplified_space(&self, n: usize) -> QSLpSpace {
        amplify_space(&self.space, n)
    }

    /// Operator norm of `pi(g)` for every `g`; the representation is isometric
    /// when all of them are within `ISOMETRY_TOL` of 1 (this covers inverses
    /// since `pi(g)^{-1} = pi(g^{-1})`).
    pub fn verify(&self, budget: &SolverBudget) -> Result<IsometryReport> {
        let norms = self
            .matrices
            .iter()
            .map(|m| isometry_norm(m, &self.space, budget))
            .collect::<Result<Vec<_>>>()?;
        let worst = norms.iter().map(deviation).fold(0.0, f64::max);
        Ok(IsometryReport { isometric: worst <= ISOMETRY_TOL, worst_deviation: worst, norms })
    }
}

#[derive(Debug, Clone)]
pub struct IsometryReport {
    pub isometric: bool,
    pub worst_deviation: f64,
    pub norms: Vec<NormEstimate>,
}

fn deviation(e: &NormEstimate) -> f64 {
    (e.lower - 1.0).abs().max(e.upper - 1.0)
}

/// Monomial matrices with unimodular entries are isometries of plain `l_p`.
fn is_unimodular_monomial(a: &CMat) -> bool {
    a.is_square()
        && (0..a.nrows()).all(|i| {
            let nz: Vec<C64> = a.row(i).iter().copied().filter(|z| *z != ZERO).collect();
            nz.len() == 1 && (nz[0].norm() - 1.0).abs() <= 1e-15
        })
        && (0..a.ncols()).all(|j| a.column(j).iter().filter(|z| **z != ZERO).count() == 1)
}

fn isometry_norm(a: &CMat, space: &QSLpSpace, budget: &SolverBudget) -> Result<NormEstimate> {
    if space.is_plain() && is_unimodular_monomial(a) {
        let mut w = CVec::zeros(a.ncols());
        w[0] = ONE;
        return Ok(NormEstimate {
            lower: 1.0,
            upper: 1.0,
            upper_kind: crate::opnorm::UpperKind::Certified,
            certified_upper: Some(1.0),
            witness: w,
            method: crate::opnorm::Method::ClosedForm,
            iterations: 0,
            converged: true,
        });
    }
    opnorm(a, space, space, budget)
}

/// Whether `a` is an isometry of `space`, to `ISOMETRY_TOL`.
pub fn is_isometry(a: &CMat, space: &QSLpSpace, budget: &SolverBudget) -> Result<(bool, NormEstimate)> {
    let e = isometry_norm(a, space, budget)?;
    Ok((deviation(&e) <= ISOMETRY_TOL, e))
}

pub fn left_regular(group: Arc<FiniteGroup>, p: f64) -> Result<Representation> {
    Representation::left_regular(group, p)
}

pub fn trivial_rep(group: Arc<FiniteGroup>, p: f64) -> Result<Representation> {
    Representation::trivial(group, p)
}

pub fn lift(rep: &Representation, f: &GroupFunction) -> Result<LiftedOperator> {
    rep.lift(f)
}

/// Block-diagonal direct sum on the `l_p` direct sum of the spaces.
pub fn direct_sum_rep(reps: &[&Representation]) -> Result<Representation> {
    let Some(first) = reps.first() else {
        return Err(Error::InvalidRepresentation("empty direct sum".into()));
    };
    if reps.iter().any(|r| !Arc::ptr_eq(&r.group, &first.group) && *r.group != *first.group) {
        return Err(Error::GroupMismatch);
    }
    let spaces: Vec<&QSLpSpace> = reps.iter().map(|r| r.space.as_ref()).collect();
    let space = Arc::new(direct_sum_space(&spaces)?);
    let matrices = (0..first.group.order())
        .map(|g| block_diag(&reps.iter().map(|r| r.matrices[g].clone()).collect::<Vec<_>>()))
        .collect();
    Ok(Representation { group: first.group.clone(), space, matrices })
}

/// A subrepresentation on an invariant subspace, with its inclusion.
#[derive(Debug, Clone)]
pub struct Subrepresentation {
    pub rep: Representation,
    /// Columns: the subspace basis in the coordinates of the parent space.
    pub inclusion: CMat,
    pub generator: Option<CVec>,
}

impl Subrepresentation {
    /// Parent coordinates of a vector of the subspace.
    pub fn include(&self, c: &CVec) -> CVec {
        &self.inclusion * c
    }
}

/// Restriction of `rep` to the invariant subspace spanned by `cols`.
pub fn restrict(rep: &Representation, cols: &CMat) -> Result<Subrepresentation> {
    let q = column_basis(cols, SPAN_TOL);
    if q.ncols() == 0 {
        return Err(Error::ZeroVector);
    }
    for m in &rep.matrices {
        if !span_contains(&q, &(m * &q), 1e-8) {
            return Err(Error::InvalidRepresentation("subspace is not invariant".into()));
        }
    }
    let space = Arc::new(rep.space.subspace_of(&q));
    let qh = q.adjoint();
    let matrices = rep.matrices.iter().map(|m| &qh * m * &q).collect();
    let sub = Representation { group: rep.group.clone(), space, matrices };
    sub.check_homomorphism()?;
    Ok(Subrepresentation { rep: sub, inclusion: q, generator: None })
}

/// The orbit matrix `[pi(g) xi]_g`.
pub fn orbit(rep: &Representation, xi: &CVec) -> CMat {
    CMat::from_columns(&rep.matrices.iter().map(|m| m * xi).collect::<Vec<_>>())
}

/// Cyclic subrepresentation on `span{pi(g) xi}`.
pub fn cyclic_subrep(rep: &Representation, xi: &CVec) -> Result<Subrepresentation> {
    if xi.len() != rep.dim() {
        return Err(Error::ShapeMismatch(format!("vector of length {} in a space of dimension {}", xi.len(), rep.dim())));
    }
    if rep.space.norm(xi) <= 1e-14 * xi.norm().max(1.0) || xi.norm() == 0.0 {
        return Err(Error::ZeroVector);
    }
    let mut sub = restrict(rep, &orbit(rep, xi))?;
    sub.generator = Some(sub.inclusion.adjoint() * xi);
    Ok(sub)
}

#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    pub invertible: bool,
    pub forward: NormEstimate,
    pub backward: Option<NormEstimate>,
    pub isometric: bool,
    pub intertwining_error: f64,
    /// Worst intertwining error of `T^(n)` on random arrays, `n = 1, 2, 3`.
    pub amplified_error: f64,
    pub failures: Vec<String>,
    pub pass: bool,
}

/// Check that `T: E_1 -> E_2` is an invertible isometry with
/// `rho(g) T = T pi(g)` for all `g`, and that `T^(n)` intertwines the
/// amplifications for `n <= 3`.
pub fn equivalence_check(
    rep1: &Representation,
    rep2: &Representation,
    t: &CMat,
    budget: &SolverBudget,
) -> Result<EquivalenceReport> {
    if t.shape() != (rep2.dim(), rep1.dim()) {
        return Err(Error::ShapeMismatch(format!("T is {:?}, expected {}x{}", t.shape(), rep2.dim(), rep1.dim())));
    }
    if *rep1.group != *rep2.group {
        return Err(Error::GroupMismatch);
    }
    let mut failures = Vec::new();
    let forward = opnorm(t, &rep1.space, &rep2.space, budget)?;
    let inv = if t.is_square() && rank(t, 1e-12) == t.ncols() { t.clone().try_inverse() } else { None };
    let invertible = inv.is_some();
    if !invertible {
        failures.push("T is not invertible".into());
    }
    let backward = match &inv {
        Some(ti) => Some(opnorm(ti, &rep2.space, &rep1.space, budget)?),
        None => None,
    };
    let isometric = deviation(&forward) <= ISOMETRY_TOL && backward.as_ref().is_some_and(|b| deviation(b) <= ISOMETRY_TOL);
    if !isometric {
        failures.push(format!(
            "T is not isometric: ||T|| in [{:.6}, {:.6}], ||T^-1|| = {}",
            forward.lower,
            forward.upper,
            backward.as_ref().map_or("n/a".into(), |b| format!("[{:.6}, {:.6}]", b.lower, b.upper))
        ));
    }
    let scale = t.norm().max(1.0);
    let intertwining_error = (0..rep1.group.order())
        .map(|g| max_abs_diff(&(&rep2.matrices[g] * t), &(t * &rep1.matrices[g])))
        .fold(0.0, f64::max)
        / scale;
    if intertwining_error > HOM_TOL {
        failures.push(format!("T does not intertwine, error {intertwining_error:.3e}"));
    }
    let mut r = rng::stream(budget.seed, &[rng::label_hash("equivalence")]);
    let mut amplified_error: f64 = 0.0;
    for n in 1..=3 {
        let array = random_array(&rep1.group, n, &mut r);
        let tn = block_diag(&vec![t.clone(); n]);
        let lhs = rep2.amplify(&array)? * &tn;
        let rhs = &tn * rep1.amplify(&array)?;
        let s = lhs.norm().max(1.0);
        amplified_error = amplified_error.max(max_abs_diff(&lhs, &rhs) / s);
    }
    if amplified_error > HOM_TOL {
        failures.push(format!("T^(n) does not intertwine amplifications, error {amplified_error:.3e}"));
    }
    Ok(EquivalenceReport {
        invertible,
        forward,
        backward,
        isometric,
        intertwining_error,
        amplified_error,
        pass: failures.is_empty(),
        failures,
    })
}

/// Seeded random `n x n` array of group functions.
pub fn random_array(group: &Arc<FiniteGroup>, n: usize, r: &mut rng::DetRng) -> Vec<Vec<GroupFunction>> {
    (0..n).map(|_| (0..n).map(|_| GroupFunction::random(group.clone(), r)).collect()).collect()
}

#[derive(Debug, Clone)]
pub struct MatrixDecomposition {
    /// Basis of `K = span{pi^(n)(F) x}` in coordinates of `E^(n)`.
    pub k_basis: CMat,
    /// Bases of the component cyclic spaces `F_k = span{pi(g) x_k}`.
    pub components: Vec<CMat>,
    /// Basis of the internal sum `F_1 + ... + F_n`.
    pub sum_basis: CMat,
    pub rank_k: usize,
    pub rank_sum_amplified: usize,
    pub equal: bool,
}

/// Compare the cyclic subspace generated by `x` in `E^(n)` under all arrays
/// with the amplification of the sum of the component cyclic spaces.
pub fn cyclic_matrix_decompose(rep: &Representation, n: usize, x: &CVec) -> Result<MatrixDecomposition> {
    let d = rep.dim();
    if n == 0 || x.len() != n * d {
        return Err(Error::ShapeMismatch(format!("vector of length {} in E^({n}) of dimension {}", x.len(), n * d)));
    }
    if x.iter().all(|z| *z == ZERO) {
        return Err(Error::ZeroVector);
    }
    let parts: Vec<CVec> = (0..n).map(|k| x.rows(k * d, d).into_owned()).collect();
    // generators of K: block i = pi(g) x_j for every (i, j, g)
    let mut gens = Vec::new();
    for i in 0..n {
        for part in &parts {
            for m in &rep.matrices {
                let mut v = CVec::zeros(n * d);
                v.rows_mut(i * d, d).copy_from(&(m * part));
                gens.push(v);
            }
        }
    }
    let k_basis = column_basis(&CMat::from_columns(&gens), SPAN_TOL);
    let components: Vec<CMat> = parts
        .iter()
        .map(|v| {
            if v.iter().all(|z| *z == ZERO) {
                CMat::zeros(d, 0)
            } else {
                column_basis(&orbit(rep, v), SPAN_TOL)
            }
        })
        .collect();
    let mut all = CMat::zeros(d, 0);
    for c in &components {
        let cols = all.ncols();
        all = all.resize_horizontally(cols + c.ncols(), ZERO);
        all.view_mut((0, cols), c.shape()).copy_from(c);
    }
    let sum_basis = column_basis(&all, SPAN_TOL);
    let amplified = block_diag(&vec![sum_basis.clone(); n]);
    let rank_k = k_basis.ncols();
    let rank_sum_amplified = amplified.ncols();
    let equal = rank_k == rank_sum_amplified
        && span_contains(&k_basis, &amplified, SPAN_TOL)
        && span_contains(&amplified, &k_basis, SPAN_TOL);
    Ok(MatrixDecomposition { k_basis, components, sum_basis, rank_k, rank_sum_amplified, equal })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn cv(xs: &[f64]) -> CVec {
        CVec::from_iterator(xs.len(), xs.iter().map(|&x| c(x)))
    }

    fn b() -> SolverBudget {
        SolverBudget::default()
    }

    #[test]
    fn regular_examples() {
        let t = Arc::new(FiniteGroup::cyclic(1));
        let r = left_regular(t, 2.0).unwrap();
        assert_eq!(r.matrix(0), &CMat::identity(1, 1));
        let z2 = Arc::new(FiniteGroup::cyclic(2));
        let r = left_regular(z2, 3.0).unwrap();
        assert_eq!(r.matrix(1), &CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]));
        let z4 = Arc::new(FiniteGroup::cyclic(4));
        let r = left_regular(z4, 3.0).unwrap();
        let m = r.matrix(1);
        assert_eq!(m * m * m * m, CMat::identity(4, 4));
        assert!(r.verify(&b()).unwrap().isometric);
    }

    #[test]
    fn lift_examples() {
        let z2 = Arc::new(FiniteGroup::cyclic(2));
        let r = left_regular(z2.clone(), 2.0).unwrap();
        let f = GroupFunction::from_real(z2.clone(), &[2.0, 5.0]).unwrap();
        assert_eq!(r.lift_matrix(&f).unwrap(), CMat::from_row_slice(2, 2, &[c(2.0), c(5.0), c(5.0), c(2.0)]));
        assert_eq!(r.lift_matrix(&GroupFunction::delta(z2.clone(), 0)).unwrap(), CMat::identity(2, 2));
        let t = trivial_rep(z2.clone(), 2.0).unwrap();
        assert_eq!(t.lift_matrix(&f).unwrap()[(0, 0)], f.haar_integral());
        let other = GroupFunction::delta(Arc::new(FiniteGroup::cyclic(3)), 0);
        assert_eq!(r.lift(&other).unwrap_err(), Error::GroupMismatch);
    }

    #[test]
    fn trivial_rep_properties() {
        let z3 = Arc::new(FiniteGroup::cyclic(3));
        for p in [1.5, 2.0, 4.0] {
            let t = trivial_rep(z3.clone(), p).unwrap();
            assert!(t.verify(&b()).unwrap().isometric);
            let f = GroupFunction::from_real(z3.clone(), &[1.0, -3.0, 0.5]).unwrap();
            let e = opnorm(&t.lift_matrix(&f).unwrap(), t.space(), t.space(), &b()).unwrap();
            assert!((e.lower - 1.5).abs() < 1e-12);
        }
    }

    #[test]
    fn lift_respects_convolution() {
        let g = Arc::new(FiniteGroup::dihedral(3));
        let r = left_regular(g.clone(), 2.5).unwrap();
        let mut s = rng::stream(1, &[]);
        for _ in 0..10 {
            let f = GroupFunction::random(g.clone(), &mut s);
            let h = GroupFunction::random(g.clone(), &mut s);
            let lhs = r.lift_matrix(&f.convolve(&h).unwrap()).unwrap();
            let rhs = r.lift_matrix(&f).unwrap() * r.lift_matrix(&h).unwrap();
            assert!(max_abs_diff(&lhs, &rhs) <= 1e-9 * (1.0 + f.l1_norm() * h.l1_norm()));
        }
    }

    #[test]
    fn rejects_non_homomorphism() {
        let z2 = Arc::new(FiniteGroup::cyclic(2));
        let space = Arc::new(QSLpSpace::lp(1, 2.0).unwrap());
        let bad = vec![CMat::identity(1, 1), CMat::from_element(1, 1, c(2.0))];
        assert!(Representation::new(z2, space, bad).is_err());
    }

    #[test]
    fn direct_sum_examples() {
        let z3 = Arc::new(FiniteGroup::cyclic(3));
        let r = left_regular(z3.clone(), 3.0).unwrap();
        let t = trivial_rep(z3.clone(), 3.0).unwrap();
        let s = direct_sum_rep(&[&r, &t]).unwrap();
        let f = GroupFunction::from_real(z3.clone(), &[1.0, 2.0, -0.5]).unwrap();
        let want = block_diag(&[r.lift_matrix(&f).unwrap(), t.lift_matrix(&f).unwrap()]);
        assert_eq!(s.lift_matrix(&f).unwrap(), want);
        let n_sum = opnorm(&want, s.space(), s.space(), &b()).unwrap().lower;
        let n_r = opnorm(&r.lift_matrix(&f).unwrap(), r.space(), r.space(), &b()).unwrap().lower;
        assert!((n_sum - n_r.max(2.5)).abs() < 1e-9);
        let left = direct_sum_rep(&[&direct_sum_rep(&[&r, &t]).unwrap(), &r]).unwrap();
        let right = direct_sum_rep(&[&r, &direct_sum_rep(&[&t, &r]).unwrap()]).unwrap();
        assert_eq!(left.lift_matrix(&f).unwrap(), right.lift_matrix(&f).unwrap());
        let r2 = left_regular(z3, 2.0).unwrap();
        assert!(direct_sum_rep(&[&r, &r2]).is_err());
    }

    #[test]
    fn amplify_examples() {
        let z3 = Arc::new(FiniteGroup::cyclic(3));
        let r = left_regular(z3.clone(), 2.5).unwrap();
        let f = GroupFunction::from_real(z3.clone(), &[1.0, 0.5, -1.0]).unwrap();
        assert_eq!(r.amplify(&[vec![f.clone()]]).unwrap(), r.lift_matrix(&f).unwrap());
        let z = GroupFunction::zero(z3.clone());
        let diag = r.amplify(&[vec![f.clone(), z.clone()], vec![z, f.clone()]]).unwrap();
        let big = r.amplified_space(2);
        let a = opnorm(&diag, &big, &big, &b()).unwrap();
        let one = opnorm(&r.lift_matrix(&f).unwrap(), r.space(), r.space(), &b()).unwrap();
        assert!((a.lower - one.lower).abs() < 1e-9);
        assert!(r.amplify(&[vec![f.clone(), f.clone()]]).is_err());
    }

    #[test]
    fn amplify_commutes_with_direct_sum() {
        let g = Arc::new(FiniteGroup::cyclic(3));
        let r = left_regular(g.clone(), 3.0).unwrap();
        let t = trivial_rep(g.clone(), 3.0).unwrap();
        let s = direct_sum_rep(&[&r, &t]).unwrap();
        let mut rs = rng::stream(2, &[]);
        let n = 2;
        let arr = random_array(&g, n, &mut rs);
        let lhs = s.amplify(&arr).unwrap();
        let rhs = block_diag(&[r.amplify(&arr).unwrap(), t.amplify(&arr).unwrap()]);
        let perm = crate::space::amplify_reindex(&[r.dim(), t.dim()], n);
        let mut p = CMat::zeros(lhs.nrows(), lhs.ncols());
        for (i, &j) in perm.iter().enumerate() {
            p[(j, i)] = ONE;
        }
        assert!(max_abs_diff(&(&p * &lhs), &(&rhs * &p)) < 1e-12);
    }

    #[test]
    fn cyclic_subrep_examples() {
        let z2 = Arc::new(FiniteGroup::cyclic(2));
        let r = left_regular(z2.clone(), 3.0).unwrap();
        let sub = cyclic_subrep(&r, &cv(&[1.0, 0.0])).unwrap();
        assert_eq!(sub.rep.dim(), 2);
        let sum = direct_sum_rep(&[&r, &r]).unwrap();
        let v = cv(&[1.0, 1.0]);
        let sub = cyclic_subrep(&sum, &cv(&[1.0, 1.0, 1.0, 1.0])).unwrap();
        assert_eq!(sub.rep.dim(), cyclic_subrep(&r, &v).unwrap().rep.dim());
        assert_eq!(sub.rep.dim(), 1);
        let t = trivial_rep(z2, 3.0).unwrap();
        assert_eq!(cyclic_subrep(&t, &cv(&[1.0])).unwrap().rep.dim(), 1);
        assert_eq!(cyclic_subrep(&r, &cv(&[0.0, 0.0])).unwrap_err(), Error::ZeroVector);
    }

    #[test]
    fn cyclic_subrep_is_isometric_and_monotone() {
        let g = Arc::new(FiniteGroup::cyclic(4));
        let r = left_regular(g.clone(), 3.0).unwrap();
        let sub = cyclic_subrep(&r, &cv(&[1.0, 0.0, 1.0, 0.0])).unwrap();
        assert_eq!(sub.rep.dim(), 2);
        assert!(sub.rep.verify(&b()).unwrap().isometric);
        let mut s = rng::stream(3, &[]);
        for _ in 0..5 {
            let f = GroupFunction::random(g.clone(), &mut s);
            let big = opnorm(&r.lift_matrix(&f).unwrap(), r.space(), r.space(), &b()).unwrap();
            let small = opnorm(&sub.rep.lift_matrix(&f).unwrap(), sub.rep.space(), sub.rep.space(), &b()).unwrap();
            assert!(small.lower <= big.upper + 5e-5);
        }
    }

    #[test]
    fn equivalence_examples() {
        let z2 = Arc::new(FiniteGroup::cyclic(2));
        let r = left_regular(z2.clone(), 3.0).unwrap();
        assert!(equivalence_check(&r, &r, &CMat::identity(2, 2), &b()).unwrap().pass);
        let swap = CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        assert!(equivalence_check(&r, &r, &swap, &b()).unwrap().pass);
        let d = CMat::from_row_slice(2, 2, &[c(2.0), ZERO, ZERO, ONE]);
        let rep = equivalence_check(&r, &r, &d, &b()).unwrap();
        assert!(!rep.pass && !rep.isometric);
    }

    #[test]
    fn equivalent_reps_have_equal_lift_norms() {
        // conjugating the regular representation of Z_3 by a signed permutation
        let g = Arc::new(FiniteGroup::cyclic(3));
        let r = left_regular(g.clone(), 2.5).unwrap();
        let t = CMat::from_row_slice(3, 3, &[ZERO, -ONE, ZERO, ZERO, ZERO, C64::new(0.0, 1.0), ONE, ZERO, ZERO]);
        let ti = t.clone().try_inverse().unwrap();
        let mats = r.matrices().iter().map(|m| &t * m * &ti).collect();
        let r2 = Representation::new(g.clone(), r.space().clone(), mats).unwrap();
        assert!(equivalence_check(&r, &r2, &t, &b()).unwrap().pass);
        let mut s = rng::stream(4, &[]);
        for _ in 0..5 {
            let f = GroupFunction::random(g.clone(), &mut s);
            let a = opnorm(&r.lift_matrix(&f).unwrap(), r.space(), r.space(), &b()).unwrap();
            let c2 = opnorm(&r2.lift_matrix(&f).unwrap(), r2.space(), r2.space(), &b()).unwrap();
            assert!((a.lower - c2.lower).abs() < 1e-8);
        }
    }

    #[test]
    fn matrix_decomposition_examples() {
        let g = Arc::new(FiniteGroup::cyclic(3));
        let r = left_regular(g.clone(), 3.0).unwrap();
        let xi = cv(&[1.0, 0.0, 0.0]);
        let one = cyclic_matrix_decompose(&r, 1, &xi).unwrap();
        assert!(one.equal);
        assert_eq!(one.rank_k, cyclic_subrep(&r, &xi).unwrap().rep.dim());
        let x = cv(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let two = cyclic_matrix_decompose(&r, 2, &x).unwrap();
        assert!(two.equal && two.rank_k == 6);
        let mut s = rng::stream(5, &[]);
        for _ in 0..5 {
            let x = rng::random_cvec(&mut s, 6);
            assert!(cyclic_matrix_decompose(&r, 2, &x).unwrap().equal);
        }
        // a non-cyclic pair: both components in the trivial isotypic line
        let x = cv(&[1.0, 1.0, 1.0, 2.0, 2.0, 2.0]);
        let d = cyclic_matrix_decompose(&r, 2, &x).unwrap();
        assert!(d.equal && d.rank_k == 2);
    }
}
