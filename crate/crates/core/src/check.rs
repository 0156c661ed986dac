//! Verdict records and serialization helpers.

use serde::{Deserialize, Serialize};

use crate::linalg::{CMat, CVec, C64};

/// Dense complex matrix in a serializable row-major layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixData {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl From<&CMat> for MatrixData {
    fn from(m: &CMat) -> Self {
        let (rows, cols) = m.shape();
        let mut re = Vec::with_capacity(rows * cols);
        let mut im = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                re.push(m[(i, j)].re);
                im.push(m[(i, j)].im);
            }
        }
        Self { rows, cols, re, im }
    }
}

impl From<&CVec> for MatrixData {
    fn from(v: &CVec) -> Self {
        Self { rows: v.len(), cols: 1, re: v.iter().map(|z| z.re).collect(), im: v.iter().map(|z| z.im).collect() }
    }
}

impl MatrixData {
    pub fn to_cmat(&self) -> CMat {
        CMat::from_fn(self.rows, self.cols, |i, j| {
            let k = i * self.cols + j;
            C64::new(self.re[k], self.im[k])
        })
    }

    pub fn to_cvec(&self) -> CVec {
        CVec::from_iterator(self.re.len(), self.re.iter().zip(&self.im).map(|(&a, &b)| C64::new(a, b)))
    }
}

pub(crate) mod cmat_serde {
    use super::MatrixData;
    use crate::linalg::CMat;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &CMat, s: S) -> Result<S::Ok, S::Error> {
        MatrixData::from(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMat, D::Error> {
        Ok(MatrixData::deserialize(d)?.to_cmat())
    }
}

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{lp_norm, pair};
use crate::opnorm::{witness_ratio, witness_ratio_lp, NormEstimate};
use crate::space::{DualVector, QSLpSpace};

/// Relative agreement required between a stored and a recomputed value.
pub const REPLAY_TOL: f64 = 1e-10;
/// Absolute tolerance for norm (in)equalities.
pub const CHECK_TOL: f64 = 5e-5;
/// Brackets wider than this (relative) make equality checks inconclusive.
pub const GAP_GATE: f64 = 1e-3;

/// Suite name and instance label of a check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tag {
    pub suite: String,
    pub instance: String,
}

impl Tag {
    pub fn new(suite: &str, instance: impl Into<String>) -> Self {
        Self { suite: suite.into(), instance: instance.into() }
    }

    pub fn child(&self, part: impl fmt::Display) -> Self {
        Self { suite: self.suite.clone(), instance: format!("{}/{part}", self.instance) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn point(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo).max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `|lhs - rhs| <= tol`, with both brackets narrower than the gap gate.
    Equal,
    /// `lhs <= rhs + tol`.
    LessEq,
}

/// A measured quantity together with the data needed to recompute its
/// witnessed bound without running any multistart solver.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Quantity {
    /// `||A||` between QSL_p spaces; the lower bound is `||A x|| / ||x||`.
    Operator { label: String, matrix: MatrixData, domain: QSLpSpace, codomain: QSLpSpace, estimate: NormEstimate },
    /// `||A||` from raw `l_{p_in}` to `l_{p_out}`.
    Scalar { label: String, matrix: MatrixData, p_in: f64, p_out: f64, estimate: NormEstimate },
    /// `|sum_x f(x) u(x)|`, exact.
    Pairing { label: String, f: MatrixData, u: MatrixData },
    /// `||xi|| ||eta||` for a realization on a QSL_p space.
    Realization { label: String, space: QSLpSpace, xi: MatrixData, eta: MatrixData, value: f64 },
    /// `num / den` as an interval quotient of two other quantities.
    Ratio { label: String, num: Box<Quantity>, den: Box<Quantity> },
    /// A replayable lower bound paired with an upper bound from a
    /// relaxation or realization that is stored as a number.
    Bounded { label: String, lower: Box<Quantity>, upper: f64 },
    /// A bracket reported by a solver without a replayable witness.
    Bracket { label: String, lo: f64, hi: f64 },
}

impl Quantity {
    pub fn operator(label: &str, a: &crate::linalg::CMat, dom: &QSLpSpace, cod: &QSLpSpace, estimate: NormEstimate) -> Self {
        Quantity::Operator {
            label: label.into(),
            matrix: a.into(),
            domain: dom.clone(),
            codomain: cod.clone(),
            estimate,
        }
    }

    pub fn scalar(label: &str, a: &crate::linalg::CMat, p_in: f64, p_out: f64, estimate: NormEstimate) -> Self {
        Quantity::Scalar { label: label.into(), matrix: a.into(), p_in, p_out, estimate }
    }

    pub fn label(&self) -> &str {
        match self {
            Quantity::Operator { label, .. }
            | Quantity::Scalar { label, .. }
            | Quantity::Pairing { label, .. }
            | Quantity::Realization { label, .. }
            | Quantity::Ratio { label, .. }
            | Quantity::Bounded { label, .. }
            | Quantity::Bracket { label, .. } => label,
        }
    }

    /// Bracket implied by the stored values.
    pub fn interval(&self) -> Interval {
        match self {
            Quantity::Operator { estimate, .. } | Quantity::Scalar { estimate, .. } => {
                Interval { lo: estimate.lower, hi: estimate.upper }
            }
            Quantity::Pairing { f, u, .. } => Interval::point(pair(f.to_cvec().as_slice(), u.to_cvec().as_slice()).norm()),
            Quantity::Realization { value, .. } => Interval::point(*value),
            Quantity::Ratio { num, den, .. } => {
                let (n, d) = (num.interval(), den.interval());
                let lo = if d.hi > 0.0 { n.lo / d.hi } else { 0.0 };
                let hi = if d.lo > 0.0 { n.hi / d.lo } else if n.hi == 0.0 { 0.0 } else { f64::INFINITY };
                Interval { lo, hi }
            }
            Quantity::Bounded { lower, upper, .. } => {
                let lo = lower.interval().lo;
                Interval { lo, hi: upper.max(lo) }
            }
            Quantity::Bracket { lo, hi, .. } => Interval { lo: *lo, hi: *hi },
        }
    }

    /// Recompute every witnessed value and compare with the stored one.
    pub fn replay(&self) -> Result<()> {
        let close = |stored: f64, again: f64, label: &str| -> Result<()> {
            if (stored - again).abs() > REPLAY_TOL * stored.abs().max(1.0) {
                Err(Error::ReplayMismatch(format!("{label}: stored {stored:.15e}, recomputed {again:.15e}")))
            } else {
                Ok(())
            }
        };
        match self {
            Quantity::Operator { label, matrix, domain, codomain, estimate } => {
                let w = &estimate.witness;
                if w.is_empty() && domain.dim() > 0 {
                    return Err(Error::WitnessMissing(label.clone()));
                }
                close(estimate.lower, witness_ratio(&matrix.to_cmat(), domain, codomain, w), label)
            }
            Quantity::Scalar { label, matrix, p_in, p_out, estimate } => {
                let w = &estimate.witness;
                if w.is_empty() && matrix.cols > 0 {
                    return Err(Error::WitnessMissing(label.clone()));
                }
                close(estimate.lower, witness_ratio_lp(&matrix.to_cmat(), *p_in, *p_out, w), label)
            }
            Quantity::Pairing { .. } | Quantity::Bracket { .. } => Ok(()),
            Quantity::Realization { label, space, xi, eta, value } => {
                let xi = xi.to_cvec();
                let s = std::sync::Arc::new(space.clone());
                let eta = DualVector::new(s.clone(), eta.to_cvec())?;
                let again = if space.is_plain() { lp_norm(xi.as_slice(), space.p()) } else { space.norm(&xi) } * eta.norm();
                close(*value, again, label)
            }
            Quantity::Ratio { num, den, .. } => {
                num.replay()?;
                den.replay()
            }
            Quantity::Bounded { lower, .. } => lower.replay(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "op", content = "args", rename_all = "snake_case")]
pub enum Expr {
    /// Index into the record's quantity list.
    Q(usize),
    Const(f64),
    Max(Vec<Expr>),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    /// `(sum_k x_k^p)^{1/p}` of nonnegative terms.
    PowSum(f64, Vec<Expr>),
}

impl Expr {
    pub fn eval(&self, qs: &[Quantity]) -> Interval {
        let fold = |xs: &[Expr], init: f64, f: fn(f64, f64) -> f64| {
            xs.iter().map(|e| e.eval(qs)).fold(Interval::point(init), |a, b| Interval { lo: f(a.lo, b.lo), hi: f(a.hi, b.hi) })
        };
        match self {
            Expr::Q(i) => qs[*i].interval(),
            Expr::Const(c) => Interval::point(*c),
            Expr::Max(xs) => fold(xs, f64::NEG_INFINITY, f64::max),
            Expr::Sum(xs) => fold(xs, 0.0, |a, b| a + b),
            Expr::Product(xs) => fold(xs, 1.0, |a, b| a * b),
            Expr::PowSum(p, xs) => {
                let (mut lo, mut hi) = (0.0, 0.0);
                for e in xs {
                    let v = e.eval(qs);
                    lo += v.lo.max(0.0).powf(*p);
                    hi += v.hi.max(0.0).powf(*p);
                }
                Interval { lo: lo.powf(1.0 / p), hi: hi.powf(1.0 / p) }
            }
        }
    }
}

/// Decide a relation between two brackets.
pub fn decide(relation: Relation, lhs: Interval, rhs: Interval, tol: f64, gap_gate: f64) -> Verdict {
    match relation {
        Relation::Equal => {
            let wide = |i: Interval| i.width() > gap_gate * i.lo.abs().max(1.0);
            if wide(lhs) || wide(rhs) {
                Verdict::Inconclusive
            } else if (lhs.lo - rhs.lo).abs() <= tol {
                Verdict::Pass
            } else {
                Verdict::Fail
            }
        }
        Relation::LessEq => {
            if lhs.lo > rhs.hi + tol {
                Verdict::Fail
            } else if lhs.hi <= rhs.lo + tol {
                Verdict::Pass
            } else {
                Verdict::Inconclusive
            }
        }
    }
}

/// One machine-readable verdict.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckRecord {
    pub suite: String,
    pub check: String,
    pub instance: String,
    pub label: String,
    pub relation: Relation,
    pub lhs: Expr,
    pub rhs: Expr,
    pub quantities: Vec<Quantity>,
    pub lhs_value: Interval,
    pub rhs_value: Interval,
    pub tolerance: f64,
    pub gap_gate: f64,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckRecord {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        tag: &Tag,
        check: &str,
        relation: Relation,
        lhs: Expr,
        rhs: Expr,
        quantities: Vec<Quantity>,
        tolerance: f64,
        gap_gate: f64,
    ) -> Self {
        let lhs_value = lhs.eval(&quantities);
        let rhs_value = rhs.eval(&quantities);
        let verdict = decide(relation, lhs_value, rhs_value, tolerance, gap_gate);
        Self {
            suite: tag.suite.clone(),
            check: check.into(),
            instance: instance_hash(&tag.suite, check, &tag.instance),
            label: tag.instance.clone(),
            relation,
            lhs,
            rhs,
            quantities,
            lhs_value,
            rhs_value,
            tolerance,
            gap_gate,
            verdict,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Violation size `lhs - rhs` on lower bounds (for reporting).
    pub fn excess(&self) -> f64 {
        self.lhs_value.lo - self.rhs_value.lo
    }
}

/// Stable hex key for a check instance.
pub fn instance_hash(suite: &str, check: &str, instance: &str) -> String {
    let h = crate::rng::derive(
        crate::rng::label_hash(suite),
        &[crate::rng::label_hash(check), crate::rng::label_hash(instance)],
    );
    format!("{h:016x}")
}

/// Recompute a record from its stored witnesses. Fails with
/// `ReplayMismatch` when a witnessed value drifted or the verdict changed.
pub fn replay(record: &CheckRecord) -> Result<Verdict> {
    for q in &record.quantities {
        q.replay()?;
    }
    let lhs = record.lhs.eval(&record.quantities);
    let rhs = record.rhs.eval(&record.quantities);
    let verdict = decide(record.relation, lhs, rhs, record.tolerance, record.gap_gate);
    if verdict != record.verdict {
        return Err(Error::ReplayMismatch(format!("verdict {verdict} differs from stored {}", record.verdict)));
    }
    Ok(verdict)
}
