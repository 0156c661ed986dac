//! Finite groups given by multiplication tables, and the group algebra
//! `L_1(G)` under counting Haar measure.

use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{C64, ZERO};
use crate::rng::{self, DetRng};

const EXHAUSTIVE_ASSOCIATIVITY_LIMIT: usize = 64;
const SAMPLED_TRIPLES: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteGroup {
    order: usize,
    mul_table: Vec<Vec<usize>>,
    identity: usize,
    inverse_table: Vec<usize>,
}

impl FiniteGroup {
    /// Validate a multiplication table: square, Latin, associative, with a
    /// two-sided identity. `identity_hint` is checked rather than trusted.
    pub fn from_table(table: Vec<Vec<usize>>, identity_hint: Option<usize>) -> Result<Self> {
        let order = table.len();
        if order == 0 {
            return Err(Error::NotAGroup("empty table".into()));
        }
        for (i, row) in table.iter().enumerate() {
            if row.len() != order {
                return Err(Error::NotAGroup(format!("row {i} has length {}", row.len())));
            }
            if let Some(&bad) = row.iter().find(|&&x| x >= order) {
                return Err(Error::NotAGroup(format!("entry {bad} out of range in row {i}")));
            }
        }
        for i in 0..order {
            let mut seen_row = vec![false; order];
            let mut seen_col = vec![false; order];
            for j in 0..order {
                if std::mem::replace(&mut seen_row[table[i][j]], true) {
                    return Err(Error::NotAGroup(format!("not a Latin square: row {i} repeats {}", table[i][j])));
                }
                if std::mem::replace(&mut seen_col[table[j][i]], true) {
                    return Err(Error::NotAGroup(format!("not a Latin square: column {i} repeats {}", table[j][i])));
                }
            }
        }
        let is_identity = |e: usize| (0..order).all(|g| table[e][g] == g && table[g][e] == g);
        let identity = match identity_hint {
            Some(e) if e < order && is_identity(e) => e,
            Some(e) => return Err(Error::NotAGroup(format!("{e} is not a two-sided identity"))),
            None => (0..order)
                .find(|&e| is_identity(e))
                .ok_or_else(|| Error::NotAGroup("no two-sided identity".into()))?,
        };
        let check = |a: usize, b: usize, c: usize| -> Result<()> {
            if table[table[a][b]][c] != table[a][table[b][c]] {
                Err(Error::NotAGroup(format!("associativity fails for ({a}, {b}, {c})")))
            } else {
                Ok(())
            }
        };
        if order <= EXHAUSTIVE_ASSOCIATIVITY_LIMIT {
            for a in 0..order {
                for b in 0..order {
                    for c in 0..order {
                        check(a, b, c)?;
                    }
                }
            }
        } else {
            let mut r = rng::stream(order as u64, &[rng::label_hash("associativity")]);
            for _ in 0..SAMPLED_TRIPLES {
                let pick = |r: &mut DetRng| (rng::uniform(r) * order as f64) as usize % order;
                let (a, b, c) = (pick(&mut r), pick(&mut r), pick(&mut r));
                check(a, b, c)?;
            }
        }
        let inverse_table = (0..order)
            .map(|g| (0..order).find(|&h| table[g][h] == identity).expect("Latin row contains identity"))
            .collect();
        Ok(Self { order, mul_table: table, identity, inverse_table })
    }

    /// `Z_n` with `i * j = (i + j) mod n`.
    pub fn cyclic(n: usize) -> Self {
        assert!(n >= 1, "cyclic group needs n >= 1");
        let table = (0..n).map(|i| (0..n).map(|j| (i + j) % n).collect()).collect();
        Self::from_table(table, Some(0)).expect("Z_n is a group")
    }

    /// Dihedral group of order `2n`. Index `f * n + k` is `r^k s^f`, so the
    /// first `n` elements are rotations and the rest reflections.
    pub fn dihedral(n: usize) -> Self {
        assert!(n >= 2, "dihedral group needs n >= 2");
        let decode = |x: usize| (x / n, x % n);
        let table = (0..2 * n)
            .map(|x| {
                (0..2 * n)
                    .map(|y| {
                        let (f, a) = decode(x);
                        let (g, b) = decode(y);
                        // r^a s^f r^b s^g = r^(a + (-1)^f b) s^(f + g)
                        let k = if f == 0 { (a + b) % n } else { (a + n - b) % n };
                        ((f + g) % 2) * n + k
                    })
                    .collect()
            })
            .collect();
        Self::from_table(table, Some(0)).expect("D_n is a group")
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul_table[a][b]
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inverse_table[a]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.mul_table
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|a| (0..a).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    /// Order of an element.
    pub fn element_order(&self, g: usize) -> usize {
        let mut x = g;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }
}

/// An element of `L_1(G)`: one complex value per group element.
#[derive(Debug, Clone)]
pub struct GroupFunction {
    group: Arc<FiniteGroup>,
    coeffs: Vec<C64>,
}

fn same_group(a: &Arc<FiniteGroup>, b: &Arc<FiniteGroup>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

impl GroupFunction {
    pub fn new(group: Arc<FiniteGroup>, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != group.order() {
            return Err(Error::ShapeMismatch(format!(
                "{} coefficients for a group of order {}",
                coeffs.len(),
                group.order()
            )));
        }
        Ok(Self { group, coeffs })
    }

    pub fn from_real(group: Arc<FiniteGroup>, values: &[f64]) -> Result<Self> {
        Self::new(group, values.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    pub fn zero(group: Arc<FiniteGroup>) -> Self {
        let n = group.order();
        Self { group, coeffs: vec![ZERO; n] }
    }

    /// Point mass at `g`.
    pub fn delta(group: Arc<FiniteGroup>, g: usize) -> Self {
        let mut f = Self::zero(group);
        f.coeffs[g] = C64::new(1.0, 0.0);
        f
    }

    pub fn constant(group: Arc<FiniteGroup>, c: C64) -> Self {
        let n = group.order();
        Self { group, coeffs: vec![c; n] }
    }

    pub fn random(group: Arc<FiniteGroup>, rng: &mut DetRng) -> Self {
        let coeffs = (0..group.order()).map(|_| rng::complex_normal(rng)).collect();
        Self { group, coeffs }
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn get(&self, x: usize) -> C64 {
        self.coeffs[x]
    }

    pub fn same_group(&self, other: &Self) -> bool {
        same_group(&self.group, &other.group)
    }

    pub fn on_group(&self, group: &Arc<FiniteGroup>) -> bool {
        same_group(&self.group, group)
    }

    pub fn l1_norm(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm()).sum()
    }

    /// `sum_x f(x)` (counting Haar measure).
    pub fn haar_integral(&self) -> C64 {
        self.coeffs.iter().sum()
    }

    /// `(f * g)(x) = sum_y f(y) g(y^{-1} x)`.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        if !self.same_group(other) {
            return Err(Error::GroupMismatch);
        }
        let g = &self.group;
        let mut out = vec![ZERO; g.order()];
        for (y, &fy) in self.coeffs.iter().enumerate() {
            if fy == ZERO {
                continue;
            }
            for (z, &hz) in other.coeffs.iter().enumerate() {
                // x = y z  <=>  z = y^{-1} x
                out[g.mul(y, z)] += fy * hz;
            }
        }
        Ok(Self { group: self.group.clone(), coeffs: out })
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { group: self.group.clone(), coeffs: self.coeffs.iter().map(|&z| z * c).collect() }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        if !self.same_group(other) {
            return Err(Error::GroupMismatch);
        }
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(Self { group: self.group.clone(), coeffs })
    }

    /// Pointwise product.
    pub fn pointwise(&self, other: &Self) -> Result<Self> {
        if !self.same_group(other) {
            return Err(Error::GroupMismatch);
        }
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).collect();
        Ok(Self { group: self.group.clone(), coeffs })
    }
}

impl Add for &GroupFunction {
    type Output = GroupFunction;
    fn add(self, rhs: Self) -> GroupFunction {
        self.try_add(rhs).expect("group mismatch in addition")
    }
}

impl Sub for &GroupFunction {
    type Output = GroupFunction;
    fn sub(self, rhs: Self) -> GroupFunction {
        self.try_add(&rhs.scale(C64::new(-1.0, 0.0))).expect("group mismatch in subtraction")
    }
}

impl Mul for &GroupFunction {
    type Output = GroupFunction;
    /// Convolution.
    fn mul(self, rhs: Self) -> GroupFunction {
        self.convolve(rhs).expect("group mismatch in convolution")
    }
}
