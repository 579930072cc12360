//! Seeded random instances for sweeps.
//!
//! Instance `i` of a sweep draws from its own ChaCha stream keyed by
//! `(seed, i)`, so results do not depend on scheduling.

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::hyperspace::FiniteSubset;
use crate::measures::{AtomicMeasure, Rational};
use crate::system::{FiniteSystem, Metric};

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 20_240_601;

pub fn instance_rng(seed: u64, instance: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(instance);
    rng
}

/// A random permutation on `n` points embedded in `[0, 1)` at distinct
/// coordinates.
pub fn random_system(rng: &mut impl Rng, n: usize) -> Result<FiniteSystem> {
    let mut map: Vec<usize> = (0..n).collect();
    map.shuffle(rng);
    let mut slots: Vec<usize> = (0..n).collect();
    slots.shuffle(rng);
    let coords = slots.iter().map(|&s| (s as f64 + rng.gen_range(0.0..0.5)) / n as f64).collect();
    FiniteSystem::new(map, Metric::Line(coords), true)
}

/// `k` distinct points of `0..host`, sorted.
pub fn random_points(rng: &mut impl Rng, host: usize, k: usize) -> Vec<usize> {
    let mut v = index::sample(rng, host, k.min(host)).into_vec();
    v.sort_unstable();
    v
}

/// A nonempty random subset of `0..host` with at most `max_len` points.
pub fn random_subset(rng: &mut impl Rng, host: usize, max_len: usize) -> Result<FiniteSubset> {
    let k = rng.gen_range(1..=max_len.min(host).max(1));
    FiniteSubset::new(random_points(rng, host, k), host)
}

/// A measure on at most `max_support` points with integer weights `1..=9`,
/// normalized exactly.
pub fn random_measure(rng: &mut impl Rng, host: usize, max_support: usize) -> Result<AtomicMeasure> {
    let k = rng.gen_range(1..=max_support.min(host).max(1));
    let points = random_points(rng, host, k);
    random_measure_on(rng, &points, host)
}

pub fn random_measure_on(rng: &mut impl Rng, points: &[usize], host: usize) -> Result<AtomicMeasure> {
    let atoms = points.iter().map(|&p| (p, Rational::from_integer(rng.gen_range(1..=9i64).into()))).collect();
    AtomicMeasure::normalized(atoms, host)
}
