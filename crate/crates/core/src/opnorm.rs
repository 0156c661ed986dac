//! Operator norms between represented QSL_p spaces.
//!
//! Every estimate carries a lower bound attained by an explicit witness, and
//! an upper bound that is either certified (closed forms, SVD, interpolation,
//! norm equivalence) or heuristic (agreement of independent multistart runs).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    conjugate_exponent, from_real, lp_norm, max_col_sum, max_row_sum, norming_functional, to_real, CMat, CVec, C64,
    ONE, ZERO,
};
use crate::optim::{bfgs, BfgsOptions};
use crate::rng;
use crate::space::QSLpSpace;

/// Largest real dimension of the unit sphere that brute force will grid.
pub const BRUTE_FORCE_MAX_SPHERE_DIM: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Svd,
    BoydMultistart,
    BruteForce,
    RieszThorin,
    RatioAscent,
    DirectSum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpperKind {
    Certified,
    Heuristic,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormEstimate {
    pub lower: f64,
    pub upper: f64,
    pub upper_kind: UpperKind,
    /// Best certified upper bound known, when one is available.
    pub certified_upper: Option<f64>,
    #[serde(with = "cvec_serde")]
    pub witness: CVec,
    pub method: Method,
    pub iterations: usize,
    pub converged: bool,
}

mod cvec_serde {
    use crate::check::MatrixData;
    use crate::linalg::CVec;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &CVec, s: S) -> Result<S::Ok, S::Error> {
        MatrixData::from(v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CVec, D::Error> {
        Ok(MatrixData::deserialize(d)?.to_cvec())
    }
}

impl NormEstimate {
    pub fn gap(&self) -> f64 {
        (self.upper - self.lower).max(0.0)
    }

    /// Whether `upper - lower <= gate * max(1, lower)`.
    pub fn is_tight(&self, gate: f64) -> bool {
        self.gap() <= gate * self.lower.max(1.0)
    }

    fn exact(value: f64, witness: CVec, method: Method) -> Self {
        Self {
            lower: value,
            upper: value,
            upper_kind: UpperKind::Certified,
            certified_upper: Some(value),
            witness,
            method,
            iterations: 0,
            converged: true,
        }
    }

    fn zero(dim: usize) -> Self {
        let mut w = CVec::zeros(dim);
        if dim > 0 {
            w[0] = ONE;
        }
        Self::exact(0.0, w, Method::ClosedForm)
    }

    /// Scale every bound by `c >= 0`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.lower *= c;
        out.upper *= c;
        out.certified_upper = out.certified_upper.map(|u| u * c);
        out
    }
}

/// Solver budgets.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverBudget {
    pub starts: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub resolution: usize,
    /// Sphere dimensions up to this are dispatched to brute force.
    pub brute_force_sphere_dim: usize,
    /// Cap on the number of grid points per brute-force call.
    pub grid_points: usize,
    pub polish: usize,
    /// Relative agreement required between multistart runs for a heuristic upper bound.
    pub consensus_tol: f64,
    pub seed: u64,
}

impl Default for SolverBudget {
    fn default() -> Self {
        Self {
            starts: 32,
            max_iter: 2000,
            tol: 1e-14,
            resolution: 400,
            brute_force_sphere_dim: 4,
            grid_points: 1_000_000,
            polish: 8,
            consensus_tol: 1e-9,
            seed: 0,
        }
    }
}

impl SolverBudget {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }
}

/// Normed coordinate space seen by the solvers: raw `l_p^n` (any `p` in
/// `[1, inf]`) or a represented QSL_p space.
#[derive(Clone, Copy)]
enum Geom<'a> {
    Lp { p: f64, n: usize },
    Q(&'a QSLpSpace),
}

impl Geom<'_> {
    fn of(space: &QSLpSpace) -> Geom<'_> {
        if space.is_plain() {
            Geom::Lp { p: space.p(), n: space.dim() }
        } else {
            Geom::Q(space)
        }
    }

    fn dim(&self) -> usize {
        match self {
            Geom::Lp { n, .. } => *n,
            Geom::Q(s) => s.dim(),
        }
    }

    fn p(&self) -> f64 {
        match self {
            Geom::Lp { p, .. } => *p,
            Geom::Q(s) => s.p(),
        }
    }

    fn is_plain(&self) -> bool {
        matches!(self, Geom::Lp { .. })
    }

    fn norm(&self, c: &CVec) -> f64 {
        match self {
            Geom::Lp { p, .. } => lp_norm(c.as_slice(), *p),
            Geom::Q(s) => s.norm(c),
        }
    }

    fn norm_and_gradient(&self, c: &CVec) -> (f64, CVec) {
        match self {
            Geom::Lp { p, .. } => (lp_norm(c.as_slice(), *p), norming_functional(c.as_slice(), *p)),
            Geom::Q(s) => s.norm_and_gradient(c),
        }
    }
}

fn ratio(a: &CMat, dom: Geom, cod: Geom, c: &CVec) -> f64 {
    let d = dom.norm(c);
    if d == 0.0 {
        return 0.0;
    }
    cod.norm(&(a * c)) / d
}

/// `||A x|| / ||x||` for a stored witness.
pub fn witness_ratio(a: &CMat, dom: &QSLpSpace, cod: &QSLpSpace, x: &CVec) -> f64 {
    ratio(a, Geom::of(dom), Geom::of(cod), x)
}

/// `||A x||_{p_out} / ||x||_{p_in}` on raw `l_p` coordinates.
pub fn witness_ratio_lp(a: &CMat, p_in: f64, p_out: f64, x: &CVec) -> f64 {
    ratio(a, Geom::Lp { p: p_in, n: a.ncols() }, Geom::Lp { p: p_out, n: a.nrows() }, x)
}

fn instance_seed(seed: u64, a: &CMat, label: &str) -> u64 {
    let mut labels = vec![rng::label_hash(label), a.nrows() as u64, a.ncols() as u64];
    labels.extend(a.iter().flat_map(|z| [z.re.to_bits(), z.im.to_bits()]));
    rng::derive(seed, &labels)
}

fn check_shape(a: &CMat, dom: &QSLpSpace, cod: &QSLpSpace) -> Result<()> {
    if a.ncols() != dom.dim() || a.nrows() != cod.dim() {
        return Err(Error::ShapeMismatch(format!(
            "operator is {}x{}, spaces have dimensions {} -> {}",
            a.nrows(),
            a.ncols(),
            dom.dim(),
            cod.dim()
        )));
    }
    Ok(())
}

/// `||A||_1^{1/p} ||A||_inf^{1 - 1/p}` for `l_p -> l_p`.
pub fn riesz_thorin_upper(a: &CMat, p: f64) -> f64 {
    let c1 = max_col_sum(a);
    let ci = max_row_sum(a);
    if p.is_infinite() {
        return ci;
    }
    if c1 == 0.0 || ci == 0.0 {
        return 0.0;
    }
    c1.powf(1.0 / p) * ci.powf(1.0 - 1.0 / p)
}

/// Certified upper bound for raw `l_{p_in} -> l_{p_out}`.
fn lp_certified_upper(a: &CMat, p_in: f64, p_out: f64) -> f64 {
    let (m, n) = a.shape();
    let sigma = crate::linalg::top_singular(a).0;
    // ||x||_2 <= n^{max(0, 1/2 - 1/p_in)} ||x||_{p_in}, ||y||_{p_out} <= m^{max(0, 1/p_out - 1/2)} ||y||_2
    let e_in = (0.5 - 1.0 / p_in).max(0.0);
    let e_out = (1.0 / p_out - 0.5).max(0.0);
    let euclid = sigma * (n as f64).powf(e_in) * (m as f64).powf(e_out);
    let interp = if p_in == p_out {
        riesz_thorin_upper(a, p_in)
    } else {
        // factor through l_{p_in}^m
        let id = if p_out <= p_in { (m as f64).powf(1.0 / p_out - 1.0 / p_in) } else { 1.0 };
        riesz_thorin_upper(a, p_in) * id
    };
    euclid.min(interp)
}

/// Certified upper bound by comparison with Euclidean norms.
fn equivalence_upper(a: &CMat, dom: Geom, cod: Geom) -> f64 {
    match (dom, cod) {
        (Geom::Lp { p: pi, .. }, Geom::Lp { p: po, .. }) => lp_certified_upper(a, pi, po),
        _ => {
            let (r_dom, lo_dom) = hilbert_parts(dom);
            let (r_cod, hi_cod) = match cod {
                Geom::Lp { p, n } => {
                    let e = (1.0 / p - 0.5).max(0.0);
                    (CMat::identity(n, n), (n as f64).powf(e))
                }
                Geom::Q(s) => (s.hilbert_factor(), s.euclidean_equivalence().1),
            };
            let Some(inv) = r_dom.try_inverse() else { return f64::INFINITY };
            let m = r_cod * a * inv;
            crate::linalg::top_singular(&m).0 * hi_cod / lo_dom
        }
    }
}

fn hilbert_parts(g: Geom) -> (CMat, f64) {
    match g {
        Geom::Lp { p, n } => {
            let e = (1.0 / p - 0.5).min(0.0);
            (CMat::identity(n, n), (n as f64).powf(e))
        }
        Geom::Q(s) => (s.hilbert_factor(), s.euclidean_equivalence().0),
    }
}

/// Operator norm `dom -> cod` of `A`, dispatched to the most exact method
/// available.
pub fn opnorm(a: &CMat, dom: &QSLpSpace, cod: &QSLpSpace, budget: &SolverBudget) -> Result<NormEstimate> {
    check_shape(a, dom, cod)?;
    if dom.dim() == 0 || a.iter().all(|z| *z == ZERO) {
        return Ok(NormEstimate::zero(dom.dim()));
    }
    if dom.p() == 2.0 && cod.p() == 2.0 {
        return Ok(hilbert_svd(a, dom, cod));
    }
    // fold the codomain subspace and a full-rank domain change of basis into the matrix
    let mut eff = a.clone();
    let mut cod_g = Geom::of(cod);
    if !cod.is_plain() && !cod.has_null() {
        eff = cod.basis() * eff;
        cod_g = Geom::Lp { p: cod.p(), n: cod.ambient_dim() };
    }
    let mut dom_g = Geom::of(dom);
    let mut back = None;
    if !dom.is_plain() && !dom.has_null() && dom.dim() == dom.ambient_dim() {
        if let Some(inv) = dom.basis().clone().try_inverse() {
            eff *= &inv;
            dom_g = Geom::Lp { p: dom.p(), n: dom.ambient_dim() };
            back = Some(inv);
        }
    }
    let mut est = if dom_g.is_plain() && cod_g.is_plain() {
        plain_dispatch(&eff, dom_g.p(), cod_g.p(), budget)
    } else if 2 * dom_g.dim() - 1 <= budget.brute_force_sphere_dim {
        bruteforce_geom(&eff, dom_g, cod_g, budget.resolution, budget)?
    } else {
        ratio_ascent(&eff, dom_g, cod_g, budget)
    };
    if let Some(inv) = back {
        est.witness = inv * &est.witness;
    }
    // restate the lower bound in the caller's coordinates
    est.lower = witness_ratio(a, dom, cod, &est.witness);
    est.upper = est.upper.max(est.lower);
    Ok(est)
}

/// Operator norm `l_{p_in} -> l_{p_out}` on raw coordinates, `p` in `[1, inf]`.
pub fn opnorm_lp(a: &CMat, p_in: f64, p_out: f64, budget: &SolverBudget) -> NormEstimate {
    if a.ncols() == 0 || a.iter().all(|z| *z == ZERO) {
        return NormEstimate::zero(a.ncols());
    }
    plain_dispatch(a, p_in, p_out, budget)
}

fn is_diagonal(a: &CMat) -> bool {
    a.is_square() && (0..a.nrows()).all(|i| (0..a.ncols()).all(|j| i == j || a[(i, j)] == ZERO))
}

fn plain_dispatch(a: &CMat, p_in: f64, p_out: f64, budget: &SolverBudget) -> NormEstimate {
    let (m, n) = a.shape();
    let unit = |k: usize| {
        let mut e = CVec::zeros(n);
        e[k] = ONE;
        e
    };
    if p_in == 2.0 && p_out == 2.0 {
        let (s, v) = crate::linalg::top_singular(a);
        let mut est = NormEstimate::exact(s, v, Method::Svd);
        est.lower = witness_ratio_lp(a, 2.0, 2.0, &est.witness);
        est.upper = est.upper.max(est.lower);
        return est;
    }
    if p_in == p_out && is_diagonal(a) {
        let (k, v) = (0..n).map(|k| (k, a[(k, k)].norm())).fold((0, -1.0), |b, c| if c.1 > b.1 { c } else { b });
        return NormEstimate::exact(v, unit(k), Method::ClosedForm);
    }
    if n == 1 {
        let v = lp_norm(a.column(0).as_slice(), p_out);
        return NormEstimate::exact(v, unit(0), Method::ClosedForm);
    }
    if m == 1 || p_out.is_infinite() {
        // sup over rows of the dual norm of the row
        let q = conjugate_exponent(p_in);
        let (best_row, v) = (0..m)
            .map(|i| (i, lp_norm(a.row(i).transpose().as_slice(), q)))
            .fold((0, -1.0), |b, c| if c.1 > b.1 { c } else { b });
        let row: Vec<C64> = a.row(best_row).iter().copied().collect();
        let x = norming_functional(&row, q);
        let mut est = NormEstimate::exact(v, x, Method::ClosedForm);
        est.lower = witness_ratio_lp(a, p_in, p_out, &est.witness);
        return est;
    }
    if p_in == 1.0 {
        let (k, v) = (0..n)
            .map(|k| (k, lp_norm(a.column(k).as_slice(), p_out)))
            .fold((0, -1.0), |b, c| if c.1 > b.1 { c } else { b });
        return NormEstimate::exact(v, unit(k), Method::ClosedForm);
    }
    if 2 * n - 1 <= budget.brute_force_sphere_dim {
        let g_in = Geom::Lp { p: p_in, n };
        let g_out = Geom::Lp { p: p_out, n: m };
        return bruteforce_geom(a, g_in, g_out, budget.resolution, budget).expect("dimension checked");
    }
    boyd_lp(a, p_in, p_out, budget.starts, instance_seed(budget.seed, a, "boyd"), budget)
}

fn hilbert_svd(a: &CMat, dom: &QSLpSpace, cod: &QSLpSpace) -> NormEstimate {
    let r_dom = dom.hilbert_factor();
    let r_cod = cod.hilbert_factor();
    let inv = r_dom.try_inverse().expect("Hilbert factor of a nonzero space is invertible");
    let m = &r_cod * a * &inv;
    let (s, v) = crate::linalg::top_singular(&m);
    let witness = &inv * v;
    let mut est = NormEstimate::exact(s, witness, Method::Svd);
    est.lower = witness_ratio(a, dom, cod, &est.witness);
    est.upper = s.max(est.lower);
    est.certified_upper = Some(est.upper);
    est
}

/// Combine multistart results into an estimate.
fn consensus(
    a: &CMat,
    dom: Geom,
    cod: Geom,
    runs: Vec<(f64, CVec, usize, bool)>,
    method: Method,
    budget: &SolverBudget,
) -> NormEstimate {
    let certified = equivalence_upper(a, dom, cod);
    let (best_idx, best) = runs
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |b, (i, r)| if r.0 > b.1 { (i, r.0) } else { b });
    let agree = runs.iter().filter(|r| r.0 >= best * (1.0 - budget.consensus_tol)).count();
    let iterations = runs.iter().map(|r| r.2).sum();
    let converged = runs[best_idx].3;
    let witness = runs[best_idx].1.clone();
    let lower = ratio(a, dom, cod, &witness);
    let (upper, upper_kind) = if agree >= 2 && lower * (1.0 + budget.consensus_tol) < certified {
        (lower * (1.0 + budget.consensus_tol), UpperKind::Heuristic)
    } else {
        (certified.max(lower), UpperKind::Certified)
    };
    NormEstimate {
        lower,
        upper,
        upper_kind,
        certified_upper: certified.is_finite().then_some(certified.max(lower)),
        witness,
        method,
        iterations,
        converged,
    }
}

fn boyd_run(a: &CMat, at: &CMat, x0: &CVec, p_in: f64, p_out: f64, budget: &SolverBudget) -> (f64, CVec, usize, bool) {
    let q_in = conjugate_exponent(p_in);
    let nx = lp_norm(x0.as_slice(), p_in);
    if nx == 0.0 {
        return (0.0, x0.clone(), 0, false);
    }
    let mut x = x0 / C64::new(nx, 0.0);
    let mut val = lp_norm((a * &x).as_slice(), p_out);
    let mut stall = 0;
    for it in 0..budget.max_iter {
        let y = a * &x;
        if y.iter().all(|z| *z == ZERO) {
            return (0.0, x, it, false);
        }
        let w = norming_functional(y.as_slice(), p_out);
        let z = at * w;
        let xn = norming_functional(z.as_slice(), q_in);
        let vn = lp_norm((a * &xn).as_slice(), p_out);
        if vn >= val {
            let gain = vn - val;
            x = xn;
            val = vn;
            if gain <= budget.tol * val {
                stall += 1;
                if stall >= 3 {
                    return (val, x, it + 1, true);
                }
            } else {
                stall = 0;
            }
        } else {
            return (val, x, it + 1, true);
        }
    }
    (val, x, budget.max_iter, false)
}

/// Multistart nonlinear power iteration for `l_{p_in} -> l_{p_out}`.
pub fn boyd_lp(a: &CMat, p_in: f64, p_out: f64, starts: usize, seed: u64, budget: &SolverBudget) -> NormEstimate {
    let n = a.ncols();
    let at = a.transpose();
    let mut inits: Vec<CVec> = vec![CVec::from_element(n, ONE)];
    for k in 0..n.min(8) {
        let mut e = CVec::zeros(n);
        e[k] = ONE;
        inits.push(e);
    }
    let mut r = rng::stream(seed, &[]);
    let target = starts.max(inits.len() + 4);
    while inits.len() < target {
        inits.push(rng::random_cvec(&mut r, n));
    }
    let runs: Vec<_> = inits.iter().map(|x0| boyd_run(a, &at, x0, p_in, p_out, budget)).collect();
    let g_in = Geom::Lp { p: p_in, n };
    let g_out = Geom::Lp { p: p_out, n: a.nrows() };
    consensus(a, g_in, g_out, runs, Method::BoydMultistart, budget)
}

/// Multistart power iteration on plain spaces.
pub fn opnorm_boyd(a: &CMat, dom: &QSLpSpace, cod: &QSLpSpace, starts: usize, seed: u64) -> Result<NormEstimate> {
    check_shape(a, dom, cod)?;
    if !dom.is_plain() || !cod.is_plain() {
        return Err(Error::Unsupported("power iteration needs plain l_p spaces".into()));
    }
    if dom.dim() == 0 || a.iter().all(|z| *z == ZERO) {
        return Ok(NormEstimate::zero(dom.dim()));
    }
    let budget = SolverBudget { starts, seed, ..SolverBudget::default() };
    Ok(boyd_lp(a, dom.p(), cod.p(), starts, instance_seed(seed, a, "boyd"), &budget))
}

/// One ratio-ascent run from `c0`: BFGS on `log ||c|| - log ||A c||`.
fn ratio_polish(a: &CMat, dom: Geom, cod: Geom, c0: &CVec, budget: &SolverBudget) -> (f64, CVec, usize, bool) {
    let at = a.transpose();
    let obj = |t: &[f64]| -> (f64, Vec<f64>) {
        let c = from_real(t);
        let (den, gden) = dom.norm_and_gradient(&c);
        let y = a * &c;
        let (num, gnum) = cod.norm_and_gradient(&y);
        if den == 0.0 || num == 0.0 {
            return (f64::INFINITY, vec![0.0; t.len()]);
        }
        let g = gden / C64::new(den, 0.0) - (&at * gnum) / C64::new(num, 0.0);
        let d = c.len();
        let mut grad = vec![0.0; 2 * d];
        for k in 0..d {
            grad[k] = g[k].re;
            grad[d + k] = -g[k].im;
        }
        (den.ln() - num.ln(), grad)
    };
    let n0 = dom.norm(c0);
    let start = if n0 > 0.0 { c0 / C64::new(n0, 0.0) } else { c0.clone() };
    let opts = BfgsOptions { max_iter: budget.max_iter.min(1000), grad_tol: 1e-11, value_tol: 1e-16 };
    let res = bfgs(obj, &to_real(&start), opts);
    let c = from_real(&res.x);
    let nc = dom.norm(&c);
    let c = if nc > 0.0 { c / C64::new(nc, 0.0) } else { c };
    let v = ratio(a, dom, cod, &c);
    (v, c, res.iterations, res.converged)
}

fn ratio_ascent(a: &CMat, dom: Geom, cod: Geom, budget: &SolverBudget) -> NormEstimate {
    let d = dom.dim();
    let mut r = rng::stream(instance_seed(budget.seed, a, "ratio"), &[]);
    let mut inits: Vec<CVec> = Vec::new();
    for k in 0..d.min(8) {
        let mut e = CVec::zeros(d);
        e[k] = ONE;
        inits.push(e);
    }
    // Euclidean top singular direction is usually close to optimal
    inits.push(crate::linalg::top_singular(a).1);
    let target = budget.starts.max(inits.len() + 4);
    while inits.len() < target {
        inits.push(rng::random_cvec(&mut r, d));
    }
    let runs = inits
        .iter()
        .map(|c0| ratio_polish(a, dom, cod, c0, budget))
        .filter(|r| r.0.is_finite())
        .collect();
    consensus(a, dom, cod, runs, Method::RatioAscent, budget)
}

fn sphere_point(angles: &[f64], phases: &[f64], p_mag: Option<f64>) -> CVec {
    let d = angles.len() + 1;
    let mut s = vec![0.0; d];
    let mut prod = 1.0;
    for i in 0..d - 1 {
        s[i] = prod * angles[i].cos();
        prod *= angles[i].sin();
    }
    s[d - 1] = prod;
    CVec::from_iterator(
        d,
        (0..d).map(|i| {
            let r = match p_mag {
                Some(p) => s[i].abs().powf(2.0 / p),
                None => s[i].abs(),
            };
            let th = if i == 0 { 0.0 } else { phases[i - 1] };
            C64::from_polar(r, th)
        }),
    )
}

/// Grid search over the unit sphere followed by local polish.
pub fn opnorm_bruteforce(
    a: &CMat,
    dom: &QSLpSpace,
    cod: &QSLpSpace,
    resolution: usize,
    budget: &SolverBudget,
) -> Result<NormEstimate> {
    check_shape(a, dom, cod)?;
    if dom.dim() == 0 || a.iter().all(|z| *z == ZERO) {
        return Ok(NormEstimate::zero(dom.dim()));
    }
    bruteforce_geom(a, Geom::of(dom), Geom::of(cod), resolution, budget)
}

/// Brute force on raw `l_{p_in} -> l_{p_out}` coordinates.
pub fn opnorm_bruteforce_lp(a: &CMat, p_in: f64, p_out: f64, resolution: usize, budget: &SolverBudget) -> Result<NormEstimate> {
    if a.ncols() == 0 || a.iter().all(|z| *z == ZERO) {
        return Ok(NormEstimate::zero(a.ncols()));
    }
    bruteforce_geom(a, Geom::Lp { p: p_in, n: a.ncols() }, Geom::Lp { p: p_out, n: a.nrows() }, resolution, budget)
}

fn bruteforce_geom(a: &CMat, dom: Geom, cod: Geom, resolution: usize, budget: &SolverBudget) -> Result<NormEstimate> {
    let d = dom.dim();
    let sphere = 2 * d - 1;
    if sphere > BRUTE_FORCE_MAX_SPHERE_DIM {
        return Err(Error::DimensionTooLarge(sphere, BRUTE_FORCE_MAX_SPHERE_DIM));
    }
    if d == 1 {
        let c = CVec::from_element(1, ONE);
        let v = ratio(a, dom, cod, &c);
        return Ok(NormEstimate { method: Method::BruteForce, ..NormEstimate::exact(v, c, Method::BruteForce) });
    }
    let params = 2 * (d - 1);
    let mut res = resolution.max(4);
    if (res as f64).powi(params as i32) > budget.grid_points as f64 {
        res = ((budget.grid_points as f64).powf(1.0 / params as f64).floor() as usize).max(4);
    }
    let p_mag = if dom.is_plain() { Some(dom.p()) } else { None };
    let mag_step = std::f64::consts::FRAC_PI_2 / (res - 1) as f64;
    let phase_step = 2.0 * std::f64::consts::PI / res as f64;
    let keep = budget.polish.max(1);
    let mut top: Vec<(f64, CVec)> = Vec::with_capacity(keep + 1);
    let mut idx = vec![0usize; params];
    let mut angles = vec![0.0; d - 1];
    let mut phases = vec![0.0; d - 1];
    let mut evaluated = 0usize;
    loop {
        for i in 0..d - 1 {
            angles[i] = idx[i] as f64 * mag_step;
            phases[i] = idx[d - 1 + i] as f64 * phase_step;
        }
        let c = sphere_point(&angles, &phases, p_mag);
        let v = ratio(a, dom, cod, &c);
        evaluated += 1;
        if top.len() < keep || v > top.last().map_or(f64::NEG_INFINITY, |t| t.0) {
            let pos = top.iter().position(|t| t.0 < v).unwrap_or(top.len());
            top.insert(pos, (v, c));
            top.truncate(keep);
        }
        // odometer increment
        let mut k = 0;
        loop {
            if k == params {
                break;
            }
            idx[k] += 1;
            if idx[k] < res {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == params {
            break;
        }
    }
    let grid_best = top.first().map_or(0.0, |t| t.0);
    let runs: Vec<_> = top.iter().map(|(_, c)| ratio_polish(a, dom, cod, c, budget)).collect();
    let (bi, _) = runs
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |b, (i, r)| if r.0 > b.1 { (i, r.0) } else { b });
    let witness = if grid_best > runs[bi].0 { top[0].1.clone() } else { runs[bi].1.clone() };
    let lower = ratio(a, dom, cod, &witness);
    let h = mag_step.max(phase_step);
    let certified = equivalence_upper(a, dom, cod);
    let agree = runs.iter().filter(|r| r.0 >= lower * (1.0 - budget.consensus_tol)).count();
    let mut slack_upper = lower.max(grid_best) * (1.0 + h * h);
    if agree >= 2 {
        slack_upper = slack_upper.min(lower * (1.0 + budget.consensus_tol));
    }
    let (upper, upper_kind) =
        if slack_upper < certified { (slack_upper, UpperKind::Heuristic) } else { (certified.max(lower), UpperKind::Certified) };
    Ok(NormEstimate {
        lower,
        upper,
        upper_kind,
        certified_upper: certified.is_finite().then_some(certified.max(lower)),
        witness,
        method: Method::BruteForce,
        iterations: evaluated,
        converged: true,
    })
}

/// `sup_k ||T_k||` for a block-diagonal operator on an `l_p` direct sum,
/// without assembling the big matrix. The witness lives in the direct sum.
pub fn directsum_opnorm(blocks: &[(&CMat, &QSLpSpace)], budget: &SolverBudget) -> Result<NormEstimate> {
    let Some((_, first)) = blocks.first() else {
        return Err(Error::InvalidSpace("empty direct sum".into()));
    };
    let p = first.p();
    if let Some((_, s)) = blocks.iter().find(|(_, s)| s.p() != p) {
        return Err(Error::ExponentMismatch(p, s.p()));
    }
    let total: usize = blocks.iter().map(|(_, s)| s.dim()).sum();
    let mut best: Option<(usize, NormEstimate)> = None;
    let mut upper: f64 = 0.0;
    let mut certified: Option<f64> = Some(0.0);
    let mut all_certified = true;
    let mut iterations = 0;
    let mut converged = true;
    for (k, (t, s)) in blocks.iter().enumerate() {
        let e = opnorm(t, s, s, budget)?;
        upper = upper.max(e.upper);
        certified = match (certified, e.certified_upper) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
        all_certified &= e.upper_kind == UpperKind::Certified;
        iterations += e.iterations;
        converged &= e.converged;
        if best.as_ref().is_none_or(|(_, b)| e.lower > b.lower) {
            best = Some((k, e));
        }
    }
    let (k, e) = best.expect("nonempty");
    let offset: usize = blocks[..k].iter().map(|(_, s)| s.dim()).sum();
    let mut witness = CVec::zeros(total);
    witness.rows_mut(offset, e.witness.len()).copy_from(&e.witness);
    Ok(NormEstimate {
        lower: e.lower,
        upper: upper.max(e.lower),
        upper_kind: if all_certified { UpperKind::Certified } else { UpperKind::Heuristic },
        certified_upper: certified,
        witness,
        method: Method::DirectSum,
        iterations,
        converged,
    })
}

/// Norm of a scalar matrix `l_{p_in}^m -> l_{p_out}^n`.
pub fn mixed_scalar_norm(m: &CMat, p_in: f64, p_out: f64, budget: &SolverBudget) -> NormEstimate {
    opnorm_lp(m, p_in, p_out, budget)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(rows: usize, cols: usize, v: &[f64]) -> CMat {
        CMat::from_row_iterator(rows, cols, v.iter().map(|&x| C64::new(x, 0.0)))
    }

    fn b() -> SolverBudget {
        SolverBudget::default()
    }

    #[test]
    fn identity_and_diagonal() {
        for p in [1.5, 2.0, 3.0] {
            let e = QSLpSpace::lp(3, p).unwrap();
            let est = opnorm(&CMat::identity(3, 3), &e, &e, &b()).unwrap();
            assert!((est.lower - 1.0).abs() < 1e-12 && (est.upper - 1.0).abs() < 1e-12);
            let e2 = QSLpSpace::lp(2, p).unwrap();
            let est = opnorm(&real(2, 2, &[2.0, 0.0, 0.0, 1.0]), &e2, &e2, &b()).unwrap();
            assert!((est.lower - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn all_ones_two_by_two() {
        let a = real(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        for p in [1.5, 2.0, 2.5, 3.0] {
            let e = QSLpSpace::lp(2, p).unwrap();
            let est = opnorm(&a, &e, &e, &b()).unwrap();
            assert!((est.lower - 2.0).abs() < 1e-9, "p={p}: {est:?}");
            // witness (2^{-1/p}, 2^{-1/p}) up to phase
            let w = &est.witness;
            assert!((w[0].norm() - w[1].norm()).abs() < 1e-4);
            let bf = opnorm_bruteforce(&a, &e, &e, 400, &b()).unwrap();
            assert!((bf.lower - 2.0).abs() < 1e-4);
        }
        assert!((riesz_thorin_upper(&a, 3.0) - 2.0).abs() < 1e-12);
        assert_eq!(riesz_thorin_upper(&CMat::identity(2, 2), 3.0), 1.0);
        assert_eq!(riesz_thorin_upper(&real(2, 2, &[2.0, 0.0, 0.0, 1.0]), 3.0), 2.0);
    }

    #[test]
    fn witness_reproduces_lower() {
        let mut r = rng::stream(1, &[]);
        for d in [2, 3, 5] {
            let a = rng::random_cmat(&mut r, d, d);
            let e = QSLpSpace::lp(d, 2.5).unwrap();
            let est = opnorm(&a, &e, &e, &b()).unwrap();
            let again = witness_ratio(&a, &e, &e, &est.witness);
            assert!((again - est.lower).abs() <= 1e-10 * est.lower);
            assert!(est.lower <= est.upper + 1e-12);
        }
    }

    #[test]
    fn bruteforce_matches_closed_forms() {
        let mut r = rng::stream(2, &[]);
        for _ in 0..5 {
            let a = rng::random_cmat(&mut r, 2, 2);
            let svd = crate::linalg::top_singular(&a).0;
            let bf = opnorm_bruteforce_lp(&a, 2.0, 2.0, 400, &b()).unwrap();
            assert!((bf.lower - svd).abs() < 1e-4 * svd);
            let c1 = max_col_sum(&a);
            let bf1 = opnorm_bruteforce_lp(&a, 1.0 + 1e-9, 1.0 + 1e-9, 400, &b()).unwrap();
            assert!((bf1.lower - c1).abs() < 1e-4 * c1, "{} vs {c1}", bf1.lower);
        }
    }

    #[test]
    fn bruteforce_rejects_large_dimension() {
        let e = QSLpSpace::lp(4, 3.0).unwrap();
        let err = opnorm_bruteforce(&CMat::identity(4, 4), &e, &e, 10, &b()).unwrap_err();
        assert_eq!(err, Error::DimensionTooLarge(7, 6));
    }

    #[test]
    fn permutation_has_norm_one() {
        let a = real(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0]);
        let e = QSLpSpace::lp(3, 3.0).unwrap();
        let est = opnorm_boyd(&a, &e, &e, 8, 0).unwrap();
        assert!((est.lower - 1.0).abs() < 1e-12);
    }

    #[test]
    fn closed_forms_at_endpoints() {
        let mut r = rng::stream(3, &[]);
        for _ in 0..10 {
            let a = rng::random_cmat(&mut r, 3, 3);
            let e1 = opnorm_lp(&a, 1.0, 1.0, &b());
            assert!((e1.lower - max_col_sum(&a)).abs() < 1e-10);
            let ei = opnorm_lp(&a, f64::INFINITY, f64::INFINITY, &b());
            assert!((ei.lower - max_row_sum(&a)).abs() < 1e-10);
            let b1 = boyd_lp(&a, 1.0, 1.0, 8, 0, &b());
            assert!((b1.lower - max_col_sum(&a)).abs() < 1e-10);
            let bi = boyd_lp(&a, f64::INFINITY, f64::INFINITY, 8, 0, &b());
            assert!((bi.lower - max_row_sum(&a)).abs() < 1e-10);
        }
    }

    #[test]
    fn mixed_scalar_examples() {
        let m = 4;
        for p in [1.5, 3.0] {
            let q = conjugate_exponent(p);
            let row = CMat::from_element(1, m, ONE);
            let est = mixed_scalar_norm(&row, p, p, &b());
            assert!((est.lower - (m as f64).powf(1.0 / q)).abs() < 1e-12);
            let col = CMat::from_element(m, 1, ONE);
            let est = mixed_scalar_norm(&col, p, p, &b());
            assert!((est.lower - (m as f64).powf(1.0 / p)).abs() < 1e-12);
            let est = mixed_scalar_norm(&CMat::identity(3, 3), p, p, &b());
            assert_eq!(est.lower, 1.0);
        }
    }

    #[test]
    fn directsum_examples() {
        let e = QSLpSpace::lp(2, 3.0).unwrap();
        let a = real(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        let c = real(2, 2, &[3.0, 0.0, 0.0, 0.5]);
        let est = directsum_opnorm(&[(&a, &e), (&c, &e)], &b()).unwrap();
        assert!((est.lower - 3.0).abs() < 1e-12);
        assert_eq!(est.witness.len(), 4);
        let single = directsum_opnorm(&[(&a, &e)], &b()).unwrap();
        assert!((single.lower - 2.0).abs() < 1e-12);
        let f = QSLpSpace::lp(2, 2.0).unwrap();
        assert!(directsum_opnorm(&[(&a, &e), (&c, &f)], &b()).is_err());
    }

    #[test]
    fn directsum_matches_assembled() {
        let mut r = rng::stream(4, &[]);
        let e = QSLpSpace::lp(3, 2.5).unwrap();
        for _ in 0..5 {
            let a = rng::random_cmat(&mut r, 3, 3);
            let c = rng::random_cmat(&mut r, 3, 3);
            let ds = directsum_opnorm(&[(&a, &e), (&c, &e)], &b()).unwrap();
            let big = crate::linalg::block_diag(&[a.clone(), c.clone()]);
            let s = crate::space::direct_sum_space(&[&e, &e]).unwrap();
            let full = opnorm(&big, &s, &s, &b()).unwrap();
            assert!((ds.lower - full.lower).abs() < 1e-6 * ds.lower, "{} vs {}", ds.lower, full.lower);
        }
    }

    #[test]
    fn subspace_domain_ratio_ascent() {
        // span{(1,1,0), (0,0,1)} in l_p^3 is isometric to l_p^2 with weights (2^{1/p}, 1)
        let p = 3.0;
        let s = real(3, 2, &[1.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
        let e = QSLpSpace::subspace(p, s).unwrap();
        let a = real(2, 2, &[1.0, 2.0, -1.0, 0.5]);
        let est = opnorm(&a, &e, &e, &b()).unwrap();
        let w = 2f64.powf(1.0 / p);
        // same operator on weighted coordinates x = D c with D = diag(w, 1)
        let d = real(2, 2, &[w, 0.0, 0.0, 1.0]);
        let dinv = real(2, 2, &[1.0 / w, 0.0, 0.0, 1.0]);
        let plain = QSLpSpace::lp(2, p).unwrap();
        let want = opnorm(&(&d * &a * &dinv), &plain, &plain, &b()).unwrap();
        assert!((est.lower - want.lower).abs() < 1e-7, "{} vs {}", est.lower, want.lower);
    }

    #[test]
    fn quotient_domain_bruteforce_and_ascent_agree() {
        let p = 1.5;
        let n = real(3, 1, &[1.0, -1.0, 0.5]);
        let e = QSLpSpace::new(p, CMat::identity(3, 3), n).unwrap();
        let mut r = rng::stream(9, &[]);
        let a = rng::random_cmat(&mut r, 2, 2);
        let bf = opnorm_bruteforce(&a, &e, &e, 200, &b()).unwrap();
        let asc = ratio_ascent(&a, Geom::of(&e), Geom::of(&e), &b());
        assert!((bf.lower - asc.lower).abs() < 1e-6 * bf.lower, "{} vs {}", bf.lower, asc.lower);
    }

    #[test]
    fn boyd_agrees_with_bruteforce() {
        let mut r = rng::stream(5, &[]);
        for d in [2, 3] {
            for p in [1.5, 2.5, 3.0] {
                for _ in 0..6 {
                    let a = rng::random_cmat(&mut r, d, d);
                    let bf = opnorm_bruteforce_lp(&a, p, p, 400, &b()).unwrap();
                    let by = boyd_lp(&a, p, p, 32, 1, &b());
                    assert!((bf.lower - by.lower).abs() <= 1e-6 * bf.lower, "d={d} p={p}: {} vs {}", bf.lower, by.lower);
                }
            }
        }
    }

    #[test]
    fn nonnegative_matrix_single_start_from_ones() {
        let mut r = rng::stream(6, &[]);
        for _ in 0..5 {
            let a = rng::random_cmat(&mut r, 3, 3).map(|z| C64::new(z.norm(), 0.0));
            let one = boyd_run(&a, &a.transpose(), &CVec::from_element(3, ONE), 2.5, 2.5, &b());
            let bf = opnorm_bruteforce_lp(&a, 2.5, 2.5, 400, &b()).unwrap();
            assert!((one.0 - bf.lower).abs() <= 1e-6 * bf.lower);
        }
    }
}
