//! Deterministic randomness: every stream is keyed by `(seed, key)` so that
//! results never depend on evaluation order or thread count.

use crate::linalg::{CMat, CVec, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type DetRng = ChaCha8Rng;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child key from a parent key and a list of integer labels.
pub fn derive(seed: u64, labels: &[u64]) -> u64 {
    labels.iter().fold(splitmix(seed), |acc, &l| splitmix(acc ^ splitmix(l)))
}

/// FNV-1a over a label string, used to key streams by names.
pub fn label_hash(label: &str) -> u64 {
    label
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325_u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

pub fn stream(seed: u64, labels: &[u64]) -> DetRng {
    ChaCha8Rng::seed_from_u64(derive(seed, labels))
}

pub fn normal(rng: &mut DetRng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn complex_normal(rng: &mut DetRng) -> C64 {
    C64::new(normal(rng), normal(rng))
}

pub fn random_cvec(rng: &mut DetRng, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| complex_normal(rng))
}

pub fn random_real_cvec(rng: &mut DetRng, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| C64::new(normal(rng), 0.0))
}

pub fn random_cmat(rng: &mut DetRng, r: usize, c: usize) -> CMat {
    CMat::from_fn(r, c, |_, _| complex_normal(rng))
}

pub fn uniform(rng: &mut DetRng) -> f64 {
    rng.random::<f64>()
}
