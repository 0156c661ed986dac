//! Dense complex linear algebra helpers and finite-dimensional `l_p` norms.
//!
//! All pairings in this crate are bilinear, `<v, w> = sum_i v_i w_i`, matching
//! the dual pairing between `l_p` and `l_{p'}`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = Complex { re: 0.0, im: 0.0 };
pub const ONE: C64 = Complex { re: 1.0, im: 0.0 };

/// Conjugate exponent, with `1 <-> inf`.
pub fn conjugate_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// `(sum |v_i|^p)^(1/p)`, scaled by the largest entry to avoid overflow.
pub fn lp_norm(v: &[C64], p: f64) -> f64 {
    let big = v.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
    if big == 0.0 || !big.is_finite() {
        return big;
    }
    if p.is_infinite() {
        return big;
    }
    if p == 1.0 {
        return v.iter().map(|z| z.norm()).sum();
    }
    if p == 2.0 {
        let s: f64 = v.iter().map(|z| (z.norm() / big).powi(2)).sum();
        return big * s.sqrt();
    }
    let s: f64 = v.iter().map(|z| (z.norm() / big).powf(p)).sum();
    big * s.powf(1.0 / p)
}

/// `sum |v_i|^p` for finite `p`.
pub fn lp_norm_pow(v: &[C64], p: f64) -> f64 {
    v.iter().map(|z| z.norm().powf(p)).sum()
}

/// Norming functional of `y` for the `l_q` norm: the returned `w` has
/// `||w||_{q'} = 1` and `<y, w> = ||y||_q`. The zero vector maps to zero.
pub fn norming_functional(y: &[C64], q: f64) -> CVec {
    let n = y.len();
    let norm = lp_norm(y, q);
    if norm == 0.0 {
        return CVec::zeros(n);
    }
    let sgn = |z: C64| if z.norm() == 0.0 { ZERO } else { (z / z.norm()).conj() };
    if q.is_infinite() {
        let (k, _) = y
            .iter()
            .enumerate()
            .fold((0, -1.0), |(bk, bm), (i, z)| if z.norm() > bm { (i, z.norm()) } else { (bk, bm) });
        let mut w = CVec::zeros(n);
        w[k] = sgn(y[k]);
        return w;
    }
    if q == 1.0 {
        return CVec::from_iterator(n, y.iter().map(|&z| sgn(z)));
    }
    CVec::from_iterator(n, y.iter().map(|&z| sgn(z) * (z.norm() / norm).powf(q - 1.0)))
}

/// Bilinear pairing `sum_i v_i w_i`.
pub fn pair(v: &[C64], w: &[C64]) -> C64 {
    v.iter().zip(w).map(|(a, b)| a * b).sum()
}

/// Largest singular value and the corresponding right singular vector.
pub fn top_singular(a: &CMat) -> (f64, CVec) {
    if a.nrows() == 0 || a.ncols() == 0 {
        return (0.0, CVec::zeros(a.ncols()));
    }
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let (k, s) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, -1.0), |(bk, bs), (i, &s)| if s > bs { (i, s) } else { (bk, bs) });
    let v = v_t.row(k).transpose().map(|z| z.conj());
    (s, v)
}

/// Singular values in nonincreasing order.
pub fn singular_values(a: &CMat) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.clone().singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.partial_cmp(x).unwrap());
    s
}

/// Numerical rank relative to the largest singular value.
pub fn rank(a: &CMat, tol: f64) -> usize {
    let s = singular_values(a);
    match s.first() {
        Some(&top) if top > 0.0 => s.iter().filter(|&&x| x > tol * top.max(1.0)).count(),
        _ => 0,
    }
}

/// Orthonormal basis (as columns) of the column space of `a`.
pub fn column_basis(a: &CMat, tol: f64) -> CMat {
    let m = a.nrows();
    if a.ncols() == 0 || m == 0 {
        return CMat::zeros(m, 0);
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let top = svd.singular_values.iter().fold(0.0_f64, |x, &y| x.max(y));
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > tol * top.max(1.0))
        .collect();
    let mut out = CMat::zeros(m, keep.len());
    for (j, &i) in keep.iter().enumerate() {
        out.set_column(j, &u.column(i));
    }
    out
}

/// Orthonormal basis of the right null space `{x : a x = 0}`.
pub fn null_space(a: &CMat, tol: f64) -> CMat {
    let n = a.ncols();
    if n == 0 {
        return CMat::zeros(0, 0);
    }
    // pad to at least square so that the SVD returns a full V
    let rows = a.nrows().max(n);
    let mut padded = CMat::zeros(rows, n);
    padded.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let top = svd.singular_values.iter().fold(0.0_f64, |x, &y| x.max(y));
    let cols: Vec<CVec> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= tol * top.max(1.0))
        .map(|i| v_t.row(i).transpose().map(|z| z.conj()))
        .collect();
    if cols.is_empty() {
        CMat::zeros(n, 0)
    } else {
        CMat::from_columns(&cols)
    }
}

/// Least-squares solution of `a x = b` together with the residual norm.
pub fn least_squares(a: &CMat, b: &CVec) -> (CVec, f64) {
    if a.ncols() == 0 {
        return (CVec::zeros(0), b.norm());
    }
    let svd = a.clone().svd(true, true);
    let x = svd.solve(b, 1e-13 * svd.singular_values.max().max(1e-300)).expect("svd solve");
    let r = (a * &x - b).norm();
    (x, r)
}

/// Least-squares solution of `a X = b` for a matrix right-hand side.
pub fn least_squares_mat(a: &CMat, b: &CMat) -> (CMat, f64) {
    let svd = a.clone().svd(true, true);
    let x = svd.solve(b, 1e-13 * svd.singular_values.max().max(1e-300)).expect("svd solve");
    let r = (a * &x - b).norm();
    (x, r)
}

/// Block-diagonal assembly.
pub fn block_diag(blocks: &[CMat]) -> CMat {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMat::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

/// Orthonormal basis of the orthogonal complement of `span(cols)` inside
/// `C^k`, built by Gram-Schmidt over the standard basis so that the result is
/// `[I; 0]` whenever `cols` spans trailing coordinates.
pub fn complement_basis(cols: &CMat, k: usize, tol: f64) -> CMat {
    let span = column_basis(cols, tol);
    let mut basis: Vec<CVec> = Vec::new();
    let target = k - span.ncols();
    for i in 0..k {
        if basis.len() == target {
            break;
        }
        let mut v = CVec::zeros(k);
        v[i] = ONE;
        for _ in 0..2 {
            for j in 0..span.ncols() {
                let c = span.column(j);
                let coef = c.dotc(&v);
                v -= c * coef;
            }
            for b in &basis {
                let coef = b.dotc(&v);
                v -= b * coef;
            }
        }
        let n = v.norm();
        if n > 1e-8 {
            basis.push(v / C64::new(n, 0.0));
        }
    }
    if basis.is_empty() {
        CMat::zeros(k, 0)
    } else {
        CMat::from_columns(&basis)
    }
}

/// Whether every column of `a` lies in the column span of `b`.
pub fn span_contains(b: &CMat, a: &CMat, tol: f64) -> bool {
    if a.ncols() == 0 {
        return true;
    }
    if b.ncols() == 0 {
        return a.norm() <= tol;
    }
    let q = column_basis(b, 1e-10);
    let resid = a - &q * (q.adjoint() * a);
    resid.norm() <= tol * a.norm().max(1.0)
}

/// Max absolute column sum (`l_1 -> l_1` norm).
pub fn max_col_sum(a: &CMat) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Max absolute row sum (`l_inf -> l_inf` norm).
pub fn max_row_sum(a: &CMat) -> f64 {
    (0..a.nrows())
        .map(|i| a.row(i).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Split a complex vector into `[re; im]`.
pub fn to_real(v: &CVec) -> Vec<f64> {
    v.iter().map(|z| z.re).chain(v.iter().map(|z| z.im)).collect()
}

/// Inverse of [`to_real`].
pub fn from_real(x: &[f64]) -> CVec {
    let n = x.len() / 2;
    CVec::from_iterator(n, (0..n).map(|i| C64::new(x[i], x[n + i])))
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    (a - b).iter().fold(0.0, |m, z| m.max(z.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn lp_norm_closed_forms() {
        let v = [c(3.0), c(4.0)];
        assert!((lp_norm(&v, 2.0) - 5.0).abs() < 1e-14);
        assert!((lp_norm(&v, 1.0) - 7.0).abs() < 1e-14);
        assert!((lp_norm(&v, f64::INFINITY) - 4.0).abs() < 1e-14);
        let w = [c(1.0), c(1.0)];
        assert!((lp_norm(&w, 3.0) - 2f64.powf(1.0 / 3.0)).abs() < 1e-14);
    }

    #[test]
    fn norming_functional_attains_norm() {
        let y = [C64::new(1.0, -2.0), C64::new(0.5, 0.25), c(0.0)];
        for &q in &[1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
            let w = norming_functional(&y, q);
            let val = pair(&y, w.as_slice());
            assert!((val.re - lp_norm(&y, q)).abs() < 1e-12, "q={q}");
            assert!(val.im.abs() < 1e-12);
            assert!((lp_norm(w.as_slice(), conjugate_exponent(q)) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn complement_of_trailing_coordinates_is_identity_block() {
        let mut n = CMat::zeros(3, 1);
        n[(2, 0)] = c(2.0);
        let q = complement_basis(&n, 3, 1e-10);
        assert_eq!(q.ncols(), 2);
        assert!((q[(0, 0)] - ONE).norm() < 1e-14);
        assert!((q[(1, 1)] - ONE).norm() < 1e-14);
        assert!(q[(2, 0)].norm() < 1e-14 && q[(2, 1)].norm() < 1e-14);
    }

    #[test]
    fn null_space_of_wide_matrix() {
        let a = CMat::from_row_slice(1, 2, &[c(1.0), c(1.0)]);
        let k = null_space(&a, 1e-10);
        assert_eq!(k.ncols(), 1);
        assert!((&a * &k).norm() < 1e-12);
    }
}
