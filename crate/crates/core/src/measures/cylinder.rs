//! Convex combinations of cylinder conditionals of the Haar measure on the
//! dyadic odometer, handled exactly without truncating the space.
//!
//! Haar measure `λ` gives every length-`n` cylinder mass `2^{-n}` and is
//! invariant, so `T_M λ_C = λ_{TC}`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::cylinder::{cylinder_points, odometer_step, CylinderSystem, Word};
use crate::error::{Error, Result};

use super::{AtomicMeasure, Rational};

/// `Σ_i w_i λ_{C_i}` with positive weights summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct CylinderMixture {
    components: BTreeMap<Word, Rational>,
}

impl CylinderMixture {
    pub fn new(components: Vec<(Word, Rational)>) -> Result<Self> {
        let mut map: BTreeMap<Word, Rational> = BTreeMap::new();
        for (w, m) in components {
            CylinderSystem::Odometer.validate_word(&w)?;
            if m < Rational::zero() {
                return Err(Error::InvalidMeasure(format!("negative weight on {w}")));
            }
            if m.is_zero() {
                continue;
            }
            *map.entry(w).or_insert_with(Rational::zero) += m;
        }
        let total: Rational = map.values().sum();
        if !total.is_one() {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}, not 1")));
        }
        Ok(CylinderMixture { components: map })
    }

    /// `λ_C`.
    pub fn cylinder(w: Word) -> Result<Self> {
        Self::new(vec![(w, Rational::one())])
    }

    /// Haar measure itself, written as the mixture of the two 1-cylinders.
    pub fn haar() -> Self {
        let half = Rational::new(1.into(), 2.into());
        CylinderMixture { components: BTreeMap::from([(Word::new(vec![0]), half.clone()), (Word::new(vec![1]), half)]) }
    }

    pub fn components(&self) -> impl Iterator<Item = (&Word, &Rational)> {
        self.components.iter()
    }

    /// Length of the longest cylinder used.
    pub fn depth(&self) -> usize {
        self.components.keys().map(Word::len).max().unwrap_or(0)
    }

    /// `T_M` applied once.
    pub fn push(&self) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (w, m) in &self.components {
            map.insert(odometer_step(w)?, m.clone());
        }
        Ok(CylinderMixture { components: map })
    }

    /// Mass of the cylinder `[u]`.
    pub fn mass_of(&self, u: &Word) -> Result<Rational> {
        CylinderSystem::Odometer.validate_word(u)?;
        let mut total = Rational::zero();
        for (c, m) in &self.components {
            if u.is_prefix_of(c) {
                total += m.clone();
            } else if c.is_prefix_of(u) {
                let shrink = BigInt::one() << (u.len() - c.len());
                total += m.clone() / Rational::from_integer(shrink);
            }
        }
        Ok(total)
    }

    /// Masses of all length-`depth` cylinders, indexed by LSB-first value.
    /// The mixture is determined by this vector once `depth ≥ self.depth()`.
    pub fn cylinder_masses(&self, depth: usize) -> Result<Vec<Rational>> {
        if depth < self.depth() || depth > crate::cylinder::MAX_TRUNCATION_DEPTH as usize {
            return Err(Error::InvalidField {
                field: "depth".into(),
                reason: format!("need {}..={}", self.depth(), crate::cylinder::MAX_TRUNCATION_DEPTH),
            });
        }
        let mut out = vec![Rational::zero(); 1 << depth];
        for (c, m) in &self.components {
            let spread = 1usize << (depth - c.len());
            let share = m.clone() / Rational::from_integer(BigInt::from(spread));
            for idx in cylinder_points(depth as u32, c)? {
                out[idx] += share.clone();
            }
        }
        Ok(out)
    }

    /// The image in the depth-`depth` odometer truncation: each `λ_C`
    /// becomes the uniform measure on the points of `[C]`.
    pub fn to_atomic(&self, depth: u32) -> Result<AtomicMeasure> {
        let masses = self.cylinder_masses(depth as usize)?;
        AtomicMeasure::new(masses.into_iter().enumerate().collect(), 1 << depth)
    }

    /// Least `p ≥ 1` with `T_M^p μ = μ`.
    ///
    /// `T^{2^d}` fixes every cylinder of length `d`, so the period divides
    /// `2^d` for `d = self.depth()` and only powers of two are tried.
    pub fn period(&self) -> Result<u64> {
        let d = self.depth();
        let masses = self.cylinder_masses(d)?;
        let n = masses.len();
        for k in 0..=d {
            let p = 1usize << k;
            if (0..n).all(|i| masses[(i + p) % n] == masses[i]) {
                return Ok(p as u64);
            }
        }
        Ok(n as u64)
    }
}
