//! Represented QSL_p spaces: a subspace `span(S)` of `l_p^m` modulo a null
//! subspace `span(N) ⊂ span(S)`, with the quotient norm
//! `||c|| = min_z ||B c + N z||_p`.
//!
//! Coordinates of a vector are taken in a fixed basis `B` of representatives
//! for `span(S) / span(N)`. When `N` is empty, `B = S`.

use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, block_diag, column_basis, complement_basis, conjugate_exponent, least_squares_mat, lp_norm,
    norming_functional, pair, rank, span_contains, CMat, CVec, C64, ZERO,
};

const SPAN_TOL: f64 = 1e-10;
const QUOTIENT_TOL: f64 = 1e-9;
const QUOTIENT_BUDGET: usize = 10_000;

/// Outcome of `min_z ||x + N z||_p`.
#[derive(Debug, Clone)]
pub struct AffineMin {
    pub value: f64,
    /// Minimizing representative `x + N z*`.
    pub representative: CVec,
    pub z: CVec,
    pub iterations: usize,
    /// Gradient norm of `z -> ||x + N z||_p` at the returned point, relative to `||x||`.
    pub grad_norm: f64,
    pub converged: bool,
}

/// Minimize `||x0 + N z||_p` over complex `z` by damped Newton steps on
/// `sum |y_i|^p`, started from the least-squares point.
pub fn min_affine_lp(x0: &CVec, n: &CMat, p: f64) -> AffineMin {
    let j = n.ncols();
    let scale = lp_norm(x0.as_slice(), p);
    if j == 0 || scale == 0.0 {
        return AffineMin {
            value: scale,
            representative: x0.clone(),
            z: CVec::zeros(j),
            iterations: 0,
            grad_norm: 0.0,
            converged: true,
        };
    }
    let x = x0 / C64::new(scale, 0.0);
    let (z_ls, _) = linalg::least_squares_mat(n, &CMat::from_column_slice(x.len(), 1, (-&x).as_slice()));
    let z_ls = z_ls.column(0).into_owned();
    let finish = |z: CVec, iterations: usize, grad_norm: f64, converged: bool| {
        let y = &x + n * &z;
        let value = lp_norm(y.as_slice(), p) * scale;
        AffineMin {
            value,
            representative: y * C64::new(scale, 0.0),
            z: z * C64::new(scale, 0.0),
            iterations,
            grad_norm,
            converged,
        }
    };
    if p == 2.0 {
        return finish(z_ls, 0, 0.0, true);
    }

    let m = x.len();
    let dim = 2 * j;
    let residual = |t: &[f64]| -> CVec {
        let z = CVec::from_iterator(j, (0..j).map(|k| C64::new(t[k], t[j + k])));
        &x + n * z
    };
    let objective = |y: &CVec| -> f64 { y.iter().map(|v| v.norm().powf(p)).sum() };
    // gradient and Hessian of sum |y_i|^p in the real variables t
    let derivatives = |y: &CVec| -> (Vec<f64>, Vec<f64>) {
        let mut g = vec![0.0; dim];
        let mut h = vec![0.0; dim * dim];
        let ymax = y.iter().fold(0.0_f64, |a, v| a.max(v.norm()));
        let floor = 1e-6 * ymax.max(1e-300);
        for i in 0..m {
            let yi = y[i];
            let r = yi.norm();
            let rr = r.max(floor);
            let w = p * rr.powf(p - 2.0);
            let (u0, u1) = if r > 0.0 { (yi.re / r, yi.im / r) } else { (0.0, 0.0) };
            let gi = [p * r.powf(p - 1.0) * u0, p * r.powf(p - 1.0) * u1];
            let hi = [
                w * (1.0 + (p - 2.0) * u0 * u0),
                w * (p - 2.0) * u0 * u1,
                w * (p - 2.0) * u0 * u1,
                w * (1.0 + (p - 2.0) * u1 * u1),
            ];
            // J_i: rows (re, im), columns (a_k, b_k)
            let mut jac = vec![[0.0; 2]; dim];
            for k in 0..j {
                let nk = n[(i, k)];
                jac[k] = [nk.re, nk.im];
                jac[j + k] = [-nk.im, nk.re];
            }
            for a in 0..dim {
                g[a] += jac[a][0] * gi[0] + jac[a][1] * gi[1];
                let ha = [jac[a][0] * hi[0] + jac[a][1] * hi[2], jac[a][0] * hi[1] + jac[a][1] * hi[3]];
                for b in 0..dim {
                    h[a * dim + b] += ha[0] * jac[b][0] + ha[1] * jac[b][1];
                }
            }
        }
        (g, h)
    };

    let mut t: Vec<f64> = z_ls.iter().map(|v| v.re).chain(z_ls.iter().map(|v| v.im)).collect();
    let mut y = residual(&t);
    let mut f = objective(&y);
    let mut grad_norm = f64::INFINITY;
    let mut mu = 1e-12;
    for it in 0..QUOTIENT_BUDGET {
        let (g, h) = derivatives(&y);
        let norm_val = f.powf(1.0 / p);
        // gradient of ||y||_p rather than of its p-th power
        grad_norm = g.iter().map(|v| v * v).sum::<f64>().sqrt() / (p * f.powf((p - 1.0) / p)).max(1e-300);
        if grad_norm <= QUOTIENT_TOL || norm_val == 0.0 {
            let z = CVec::from_iterator(j, (0..j).map(|k| C64::new(t[k], t[j + k])));
            return finish(z, it, grad_norm, true);
        }
        let hm = nalgebra::DMatrix::from_row_slice(dim, dim, &h);
        let trace = (0..dim).map(|a| h[a * dim + a]).sum::<f64>() / dim as f64;
        let mut step = None;
        for _ in 0..30 {
            let reg = &hm + nalgebra::DMatrix::<f64>::identity(dim, dim) * (mu * trace.max(1e-300));
            if let Some(chol) = reg.cholesky() {
                let d = chol.solve(&DVector::from_column_slice(&g)) * -1.0;
                step = Some(d);
                break;
            }
            mu = (mu * 10.0).max(1e-10);
        }
        let Some(d) = step else { break };
        let slope: f64 = d.iter().zip(&g).map(|(a, b)| a * b).sum();
        // Newton decrement: predicted decrease of sum |y|^p is -slope / 2
        if -slope <= 1e-24 * f {
            let z = CVec::from_iterator(j, (0..j).map(|k| C64::new(t[k], t[j + k])));
            return finish(z, it, grad_norm, true);
        }
        let mut s = 1.0;
        let mut moved = false;
        for _ in 0..60 {
            let tn: Vec<f64> = t.iter().zip(d.iter()).map(|(a, b)| a + s * b).collect();
            let yn = residual(&tn);
            let fn_ = objective(&yn);
            if fn_ <= f + 1e-4 * s * slope {
                moved = fn_ < f;
                t = tn;
                y = yn;
                f = fn_;
                break;
            }
            s *= 0.5;
        }
        if s == 1.0 {
            mu = (mu * 0.1).max(1e-14);
        } else {
            mu = (mu * 4.0).min(1e6);
        }
        if !moved && s < 1e-12 {
            let z = CVec::from_iterator(j, (0..j).map(|k| C64::new(t[k], t[j + k])));
            return finish(z, it, grad_norm, grad_norm <= QUOTIENT_TOL * 1e3);
        }
    }
    let z = CVec::from_iterator(j, (0..j).map(|k| C64::new(t[k], t[j + k])));
    finish(z, QUOTIENT_BUDGET, grad_norm, false)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QSLpSpace {
    p: f64,
    q: f64,
    #[serde(with = "crate::check::cmat_serde")]
    subspace: CMat,
    #[serde(with = "crate::check::cmat_serde")]
    null: CMat,
    #[serde(with = "crate::check::cmat_serde")]
    basis: CMat,
    plain: bool,
}

fn check_exponent(p: f64) -> Result<()> {
    if p.is_finite() && p > 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidExponent(p))
    }
}

impl QSLpSpace {
    /// Plain `l_p^n`.
    pub fn lp(n: usize, p: f64) -> Result<Self> {
        check_exponent(p)?;
        Ok(Self {
            p,
            q: conjugate_exponent(p),
            subspace: CMat::identity(n, n),
            null: CMat::zeros(n, 0),
            basis: CMat::identity(n, n),
            plain: true,
        })
    }

    /// The space `span(S) / span(N)` inside `l_p^m`.
    pub fn new(p: f64, subspace: CMat, null: CMat) -> Result<Self> {
        check_exponent(p)?;
        let m = subspace.nrows();
        let k = subspace.ncols();
        let j = null.ncols();
        if null.nrows() != m && j > 0 {
            return Err(Error::InvalidSpace(format!("N has {} rows, S has {m}", null.nrows())));
        }
        if k > m || rank(&subspace, SPAN_TOL) != k {
            return Err(Error::InvalidSpace("subspace basis columns are not linearly independent".into()));
        }
        if j > k || (j > 0 && rank(&null, SPAN_TOL) != j) {
            return Err(Error::InvalidSpace("null basis columns are not linearly independent".into()));
        }
        let null = if j == 0 { CMat::zeros(m, 0) } else { null };
        if j > 0 && !span_contains(&subspace, &null, SPAN_TOL) {
            return Err(Error::InvalidSpace("null basis does not lie in the span of the subspace".into()));
        }
        let basis = if j == 0 {
            subspace.clone()
        } else {
            let (coef, _) = least_squares_mat(&subspace, &null);
            &subspace * complement_basis(&coef, k, SPAN_TOL)
        };
        let plain = j == 0 && k == m && subspace == CMat::identity(m, m);
        Ok(Self { p, q: conjugate_exponent(p), subspace, null, basis, plain })
    }

    /// Subspace `span(S)` with nothing quotiented out.
    pub fn subspace(p: f64, subspace: CMat) -> Result<Self> {
        let m = subspace.nrows();
        Self::new(p, subspace, CMat::zeros(m, 0))
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Conjugate exponent `p' = p / (p - 1)`.
    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn ambient_dim(&self) -> usize {
        self.subspace.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn is_plain(&self) -> bool {
        self.plain
    }

    pub fn subspace_basis(&self) -> &CMat {
        &self.subspace
    }

    pub fn null_basis(&self) -> &CMat {
        &self.null
    }

    /// Representatives of the quotient basis, as columns in `l_p^m`.
    pub fn basis(&self) -> &CMat {
        &self.basis
    }

    pub fn has_null(&self) -> bool {
        self.null.ncols() > 0
    }

    /// `B c` in the ambient space.
    pub fn ambient(&self, c: &CVec) -> CVec {
        &self.basis * c
    }

    pub fn norm(&self, c: &CVec) -> f64 {
        if self.plain {
            return lp_norm(c.as_slice(), self.p);
        }
        self.norm_report(c).value
    }

    pub fn norm_report(&self, c: &CVec) -> AffineMin {
        min_affine_lp(&self.ambient(c), &self.null, self.p)
    }

    /// Norm together with a norming functional in coordinates: the returned
    /// `g` satisfies `Re <h, g>` = directional derivative of the norm at `c`.
    pub fn norm_and_gradient(&self, c: &CVec) -> (f64, CVec) {
        if self.plain {
            let v = lp_norm(c.as_slice(), self.p);
            return (v, norming_functional(c.as_slice(), self.p));
        }
        let r = self.norm_report(c);
        let w = norming_functional(r.representative.as_slice(), self.p);
        (r.value, self.basis.transpose() * w)
    }

    /// Coordinates of `S a` in the quotient basis.
    pub fn from_subspace_coords(&self, a: &CVec) -> Result<CVec> {
        if a.len() != self.subspace.ncols() {
            return Err(Error::ShapeMismatch(format!("{} subspace coordinates for k = {}", a.len(), self.subspace.ncols())));
        }
        if !self.has_null() {
            return Ok(a.clone());
        }
        let y = &self.subspace * a;
        let joint = concat_cols(&self.basis, &self.null);
        let (sol, _) = least_squares_mat(&joint, &CMat::from_column_slice(y.len(), 1, y.as_slice()));
        Ok(sol.view((0, 0), (self.dim(), 1)).column(0).into_owned())
    }

    /// Factor `R` with `||c|| = ||R c||_2` when `p = 2`.
    pub fn hilbert_factor(&self) -> CMat {
        let mut w = self.basis.clone();
        if self.has_null() {
            let qn = column_basis(&self.null, SPAN_TOL);
            w -= &qn * (qn.adjoint() * &w);
        }
        if w.ncols() == 0 {
            return CMat::zeros(0, 0);
        }
        w.qr().r()
    }

    /// Constants `(lo, hi)` with `lo ||R c||_2 <= ||c|| <= hi ||R c||_2`,
    /// `R` the Hilbert factor.
    pub fn euclidean_equivalence(&self) -> (f64, f64) {
        let m = self.ambient_dim() as f64;
        let e = 1.0 / self.p - 0.5;
        if e >= 0.0 {
            (1.0, m.powf(e))
        } else {
            (m.powf(e), 1.0)
        }
    }

    /// Basis of the bilinear annihilator of `span(S)` in the ambient dual.
    pub fn annihilator(&self) -> CMat {
        linalg::null_space(&self.subspace.transpose(), SPAN_TOL)
    }

    /// The subspace of `self` spanned by the coordinate vectors `q`
    /// (columns), with coordinates taken along `q`.
    pub fn subspace_of(&self, q: &CMat) -> QSLpSpace {
        let basis = &self.basis * q;
        let subspace = if self.has_null() { concat_cols(&basis, &self.null) } else { basis.clone() };
        let m = self.ambient_dim();
        let plain = !self.has_null() && basis.shape() == (m, m) && basis == CMat::identity(m, m);
        QSLpSpace { p: self.p, q: self.q, subspace, null: self.null.clone(), basis, plain }
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.p == other.p && self.basis.shape() == other.basis.shape()
    }

    pub fn zero_vector(self: &Arc<Self>) -> SpaceVector {
        SpaceVector { space: self.clone(), coords: CVec::zeros(self.dim()) }
    }
}

fn concat_cols(a: &CMat, b: &CMat) -> CMat {
    let mut out = CMat::zeros(a.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((0, a.ncols()), b.shape()).copy_from(b);
    out
}

#[derive(Debug, Clone)]
pub struct SpaceVector {
    pub space: Arc<QSLpSpace>,
    pub coords: CVec,
}

impl SpaceVector {
    pub fn new(space: Arc<QSLpSpace>, coords: CVec) -> Result<Self> {
        if coords.len() != space.dim() {
            return Err(Error::ShapeMismatch(format!("{} coordinates for a space of dimension {}", coords.len(), space.dim())));
        }
        Ok(Self { space, coords })
    }

    pub fn from_slice(space: Arc<QSLpSpace>, coords: &[C64]) -> Result<Self> {
        Self::new(space, CVec::from_column_slice(coords))
    }

    pub fn norm(&self) -> f64 {
        self.space.norm(&self.coords)
    }
}

/// A functional on a QSL_p space, given by its ambient coordinates in
/// `l_{p'}^m`. It must annihilate `span(N)`.
#[derive(Debug, Clone)]
pub struct DualVector {
    pub space: Arc<QSLpSpace>,
    pub functional: CVec,
}

impl DualVector {
    pub fn new(space: Arc<QSLpSpace>, functional: CVec) -> Result<Self> {
        if functional.len() != space.ambient_dim() {
            return Err(Error::ShapeMismatch(format!(
                "{} functional entries for ambient dimension {}",
                functional.len(),
                space.ambient_dim()
            )));
        }
        if space.has_null() {
            let leak = (space.null_basis().transpose() * &functional).norm();
            if leak > 1e-9 * functional.norm().max(1.0) {
                return Err(Error::InvalidSpace("functional does not annihilate the null subspace".into()));
            }
        }
        Ok(Self { space, functional })
    }

    pub fn from_slice(space: Arc<QSLpSpace>, functional: &[C64]) -> Result<Self> {
        Self::new(space, CVec::from_column_slice(functional))
    }

    /// The functional in quotient coordinates: `<c, B^T w>`.
    pub fn coordinate_functional(&self) -> CVec {
        self.space.basis().transpose() * &self.functional
    }

    /// Norm in `E*`: `min ||w + a||_{p'}` over `a` annihilating `span(S)`.
    pub fn norm(&self) -> f64 {
        if self.space.is_plain() {
            return lp_norm(self.functional.as_slice(), self.space.q());
        }
        min_affine_lp(&self.functional, &self.space.annihilator(), self.space.q()).value
    }
}

pub fn vector_norm(v: &SpaceVector) -> f64 {
    v.norm()
}

pub fn dual_norm(w: &DualVector) -> f64 {
    w.norm()
}

pub fn dual_pair(v: &SpaceVector, w: &DualVector) -> Result<C64> {
    if !Arc::ptr_eq(&v.space, &w.space) && *v.space != *w.space {
        return Err(Error::SpaceMismatch);
    }
    Ok(pair(v.space.ambient(&v.coords).as_slice(), w.functional.as_slice()))
}

/// `l_p` direct sum. Coordinates of the sum are the concatenated coordinates.
pub fn direct_sum_space(spaces: &[&QSLpSpace]) -> Result<QSLpSpace> {
    let Some(first) = spaces.first() else {
        return Err(Error::InvalidSpace("empty direct sum".into()));
    };
    let p = first.p;
    if let Some(s) = spaces.iter().find(|s| s.p != p) {
        return Err(Error::ExponentMismatch(p, s.p));
    }
    let subspace = block_diag(&spaces.iter().map(|s| s.subspace.clone()).collect::<Vec<_>>());
    let null = block_diag(&spaces.iter().map(|s| s.null.clone()).collect::<Vec<_>>());
    let basis = block_diag(&spaces.iter().map(|s| s.basis.clone()).collect::<Vec<_>>());
    let plain = spaces.iter().all(|s| s.plain);
    Ok(QSLpSpace { p, q: first.q, subspace, null, basis, plain })
}

/// `E^(n)`, the `n`-fold `l_p` direct sum of `E`, block index major.
pub fn amplify_space(space: &QSLpSpace, n: usize) -> QSLpSpace {
    assert!(n >= 1, "amplification needs n >= 1");
    direct_sum_space(&vec![space; n]).expect("equal exponents")
}

/// Permutation `perm` with `perm[i]` = index in `E_1^(n) ⊕ ... ⊕ E_K^(n)` of
/// coordinate `i` of `(E_1 ⊕ ... ⊕ E_K)^(n)`.
pub fn amplify_reindex(dims: &[usize], n: usize) -> Vec<usize> {
    let total: usize = dims.iter().sum();
    let offsets: Vec<usize> = dims.iter().scan(0, |acc, &d| {
        let o = *acc;
        *acc += n * d;
        Some(o)
    }).collect();
    let mut perm = Vec::with_capacity(n * total);
    for block in 0..n {
        for (k, &d) in dims.iter().enumerate() {
            for c in 0..d {
                perm.push(offsets[k] + block * d + c);
            }
        }
    }
    perm
}

/// Apply a coordinate permutation as produced by [`amplify_reindex`].
pub fn permute(v: &CVec, perm: &[usize]) -> CVec {
    let mut out = CVec::from_element(v.len(), ZERO);
    for (i, &j) in perm.iter().enumerate() {
        out[j] = v[i];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn cv(xs: &[f64]) -> CVec {
        CVec::from_iterator(xs.len(), xs.iter().map(|&x| C64::new(x, 0.0)))
    }

    #[test]
    fn plain_norm_examples() {
        let e = QSLpSpace::lp(2, 2.0).unwrap();
        assert!((e.norm(&cv(&[3.0, 4.0])) - 5.0).abs() < 1e-12);
        let e3 = QSLpSpace::lp(2, 3.0).unwrap();
        assert!((e3.norm(&cv(&[1.0, 1.0])) - 2f64.powf(1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_exponent() {
        assert_eq!(QSLpSpace::lp(2, 1.0).unwrap_err(), Error::InvalidExponent(1.0));
        assert!(QSLpSpace::lp(2, f64::INFINITY).is_err());
    }

    fn grid_quotient(x: &[f64], nvec: &[f64], p: f64) -> f64 {
        // oracle: min over real t on a fine grid, refined once
        let eval = |t: f64| -> f64 {
            x.iter().zip(nvec).map(|(a, b)| (a + t * b).abs().powf(p)).sum::<f64>().powf(1.0 / p)
        };
        let mut best = (f64::INFINITY, 0.0);
        for i in -200_000..=200_000 {
            let t = i as f64 * 1e-4;
            let v = eval(t);
            if v < best.0 {
                best = (v, t);
            }
        }
        let c = best.1;
        for i in -20_000..=20_000 {
            let t = c + i as f64 * 1e-8;
            best.0 = best.0.min(eval(t));
        }
        best.0
    }

    #[test]
    fn quotient_norm_example() {
        let e = QSLpSpace::new(2.0, CMat::identity(2, 2), CMat::from_column_slice(2, 1, &[C64::new(1.0, 0.0), ZERO])).unwrap();
        assert_eq!(e.dim(), 1);
        let a = e.from_subspace_coords(&cv(&[5.0, 2.0])).unwrap();
        assert!((e.norm(&a) - 2.0).abs() < 1e-12);
        assert!((grid_quotient(&[5.0, 2.0], &[1.0, 0.0], 2.0) - 2.0).abs() < 1e-6);
    }

    #[test]
    fn quotient_norm_matches_grid_oracle() {
        // real data, so the minimizing z is real and a 1-D grid is a valid oracle
        let mut r = rng::stream(7, &[1]);
        for p in [1.3, 1.5, 2.5, 3.0, 4.0] {
            for _ in 0..6 {
                let x: Vec<f64> = (0..3).map(|_| rng::normal(&mut r)).collect();
                let nv: Vec<f64> = (0..3).map(|_| rng::normal(&mut r)).collect();
                let got = min_affine_lp(&cv(&x), &CMat::from_column_slice(3, 1, cv(&nv).as_slice()), p);
                assert!(got.converged, "{got:?}");
                let want = grid_quotient(&x, &nv, p);
                assert!((got.value - want).abs() < 1e-6, "p={p}: {} vs {want}", got.value);
            }
        }
    }

    #[test]
    fn direct_sum_examples() {
        let a = QSLpSpace::lp(1, 3.0).unwrap();
        let s = direct_sum_space(&[&a, &a]).unwrap();
        assert_eq!(s, QSLpSpace::lp(2, 3.0).unwrap());
        let b = QSLpSpace::lp(2, 3.0).unwrap();
        let s = direct_sum_space(&[&b, &b]).unwrap();
        assert!((s.norm(&cv(&[1.0, 0.0, 0.0, 1.0])) - 2f64.powf(1.0 / 3.0)).abs() < 1e-12);
        let c = QSLpSpace::lp(2, 2.0).unwrap();
        assert_eq!(direct_sum_space(&[&b, &c]).unwrap_err(), Error::ExponentMismatch(3.0, 2.0));
    }

    #[test]
    fn amplify_examples() {
        let e = QSLpSpace::lp(2, 2.5).unwrap();
        assert_eq!(amplify_space(&e, 1), e);
        assert_eq!(amplify_space(&e, 3), QSLpSpace::lp(6, 2.5).unwrap());
    }

    #[test]
    fn amplify_reindex_preserves_norm() {
        let p = 2.5;
        let e1 = QSLpSpace::new(p, CMat::identity(3, 3), CMat::from_column_slice(3, 1, cv(&[1.0, 1.0, 0.0]).as_slice())).unwrap();
        let e2 = QSLpSpace::lp(2, p).unwrap();
        let n = 3;
        let lhs = amplify_space(&direct_sum_space(&[&e1, &e2]).unwrap(), n);
        let rhs = direct_sum_space(&[&amplify_space(&e1, n), &amplify_space(&e2, n)]).unwrap();
        let perm = amplify_reindex(&[e1.dim(), e2.dim()], n);
        let mut r = rng::stream(3, &[]);
        for _ in 0..5 {
            let v = rng::random_cvec(&mut r, lhs.dim());
            let w = permute(&v, &perm);
            assert!((lhs.norm(&v) - rhs.norm(&w)).abs() < 1e-9);
        }
    }

    #[test]
    fn dual_pairing_examples() {
        let e = Arc::new(QSLpSpace::lp(2, 3.0).unwrap());
        let v = SpaceVector::from_slice(e.clone(), &[C64::new(1.0, 0.0), ZERO]).unwrap();
        let w = DualVector::from_slice(e.clone(), &[C64::new(1.0, 0.0), ZERO]).unwrap();
        assert_eq!(dual_pair(&v, &w).unwrap(), C64::new(1.0, 0.0));
    }

    #[test]
    fn dual_of_direct_sum_is_conjugate_sum() {
        let p = 3.0;
        let e = QSLpSpace::lp(2, p).unwrap();
        let s = Arc::new(direct_sum_space(&[&e, &e]).unwrap());
        let mut r = rng::stream(11, &[]);
        for _ in 0..10 {
            let x = rng::random_cvec(&mut r, 4);
            let v = SpaceVector::new(s.clone(), x.clone()).unwrap();
            // Holder equality case: the norming functional
            let w = DualVector::new(s.clone(), norming_functional(x.as_slice(), p)).unwrap();
            let closed = (lp_norm(&w.functional.as_slice()[..2], s.q()).powf(s.q())
                + lp_norm(&w.functional.as_slice()[2..], s.q()).powf(s.q()))
            .powf(1.0 / s.q());
            assert!((w.norm() - closed).abs() < 1e-12);
            assert!((dual_pair(&v, &w).unwrap().re - v.norm() * w.norm()).abs() < 1e-10);
        }
    }

    #[test]
    fn coset_pairing_is_constant() {
        let n = CMat::from_column_slice(3, 1, cv(&[1.0, -1.0, 0.0]).as_slice());
        let e = Arc::new(QSLpSpace::new(1.5, CMat::identity(3, 3), n.clone()).unwrap());
        let w = DualVector::new(e.clone(), cv(&[0.5, 0.5, -1.0])).unwrap();
        let a = cv(&[1.0, 2.0, 3.0]);
        let b = &a + n.column(0) * C64::new(4.0, 0.0);
        let pa = pair(a.as_slice(), w.functional.as_slice());
        let pb = pair(b.as_slice(), w.functional.as_slice());
        assert!((pa - pb).norm() < 1e-12);
        assert!(DualVector::new(e, cv(&[1.0, 0.0, 0.0])).is_err());
    }

    #[test]
    fn subspace_dual_norm_is_extension_minimum() {
        // E = span{(1,1)} in l_p^2: ||c|| = |c| 2^{1/p}; functional w on E has
        // norm |w_1 + w_2| 2^{-1/p}
        let p = 3.0;
        let e = Arc::new(QSLpSpace::subspace(p, CMat::from_column_slice(2, 1, cv(&[1.0, 1.0]).as_slice())).unwrap());
        let w = DualVector::new(e, cv(&[0.7, -0.2])).unwrap();
        assert!((w.norm() - 0.5 * 2f64.powf(-1.0 / p)).abs() < 1e-9);
    }

    #[test]
    fn hilbert_factor_reproduces_p2_norm() {
        let n = CMat::from_column_slice(3, 1, cv(&[1.0, 2.0, 0.0]).as_slice());
        let e = QSLpSpace::new(2.0, CMat::identity(3, 3), n).unwrap();
        let r = e.hilbert_factor();
        let mut g = rng::stream(5, &[]);
        for _ in 0..5 {
            let c = rng::random_cvec(&mut g, e.dim());
            assert!(((&r * &c).norm() - e.norm(&c)).abs() < 1e-10);
        }
    }
}
