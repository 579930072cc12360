//! The induced measure system `(M(X), T_M)` on a finite space.
//!
//! Masses are exact rationals by default ([`Rational`]); `f64` masses are
//! accepted for large sweeps and normalized to within `1e-12`.

mod conditional;
mod cylinder;
mod metric;

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Sub};

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::ser::{Serialize, SerializeSeq, SerializeStruct, Serializer};

use crate::error::{Error, Result};
use crate::hyperspace::FiniteSubset;
use crate::system::{FactorMap, FiniteSystem};

pub use conditional::{
    conditional_perturbation_check, decomposition_identity, pushforward_conditional_check, symmetric_difference_mass,
    PerturbationCheck,
};
pub use cylinder::CylinderMixture;
pub use metric::{
    prohorov_distance, prohorov_distance_with, series_metric, FunctionFamily, PROHOROV_SUPPORT_CAP, PROHOROV_TOLERANCE,
};

pub type Rational = num_rational::BigRational;

/// Default cap on the size of an `M_n` lattice enumeration.
pub const DEFAULT_LATTICE_CAP: u128 = 1 << 20;

/// Allowed drift of the total mass in floating mode.
pub const FLOAT_MASS_TOLERANCE: f64 = 1e-12;

/// Scalar type for probability masses.
pub trait Mass:
    Clone
    + Debug
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    fn to_f64(&self) -> f64;
    fn from_ratio(num: u64, den: u64) -> Self;
    fn is_unit_total(&self) -> bool;
}

impl Mass for Rational {
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_ratio(num: u64, den: u64) -> Self {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }

    fn is_unit_total(&self) -> bool {
        self.is_one()
    }
}

impl Mass for f64 {
    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_ratio(num: u64, den: u64) -> Self {
        num as f64 / den as f64
    }

    fn is_unit_total(&self) -> bool {
        (self - 1.0).abs() <= FLOAT_MASS_TOLERANCE
    }
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// A finitely supported probability vector on `0..host`. Only positive
/// masses are stored.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomicMeasure<M: Mass = Rational> {
    atoms: BTreeMap<usize, M>,
    host: usize,
}

impl<M: Mass> AtomicMeasure<M> {
    /// Repeated indices are summed; zero masses are dropped.
    pub fn new(atoms: Vec<(usize, M)>, host: usize) -> Result<Self> {
        let map = collect_atoms(atoms, host)?;
        let total = map.values().cloned().fold(M::zero(), |a, b| a + b);
        if !total.is_unit_total() {
            return Err(Error::InvalidMeasure(format!("masses sum to {:?}, not 1", total)));
        }
        Ok(AtomicMeasure { atoms: map, host })
    }

    /// Divide by the total mass.
    pub fn normalized(atoms: Vec<(usize, M)>, host: usize) -> Result<Self> {
        let map = collect_atoms(atoms, host)?;
        let total = map.values().cloned().fold(M::zero(), |a, b| a + b);
        if total.is_zero() {
            return Err(Error::ZeroMass);
        }
        let atoms = map.into_iter().map(|(k, v)| (k, v / total.clone())).collect();
        Ok(AtomicMeasure { atoms, host })
    }

    pub fn dirac(x: usize, host: usize) -> Result<Self> {
        if x >= host {
            return Err(Error::IndexOutOfRange { index: x, len: host });
        }
        Ok(AtomicMeasure { atoms: BTreeMap::from([(x, M::one())]), host })
    }

    /// Equal mass on each listed point.
    pub fn uniform(points: &[usize], host: usize) -> Result<Self> {
        let k = points.len() as u64;
        if k == 0 {
            return Err(Error::Empty("uniform measure on no points".into()));
        }
        Self::new(points.iter().map(|&p| (p, M::from_ratio(1, k))).collect(), host)
    }

    pub fn host(&self) -> usize {
        self.host
    }

    pub fn atoms(&self) -> impl Iterator<Item = (usize, &M)> + '_ {
        self.atoms.iter().map(|(&k, v)| (k, v))
    }

    pub fn support(&self) -> Vec<usize> {
        self.atoms.keys().copied().collect()
    }

    pub fn mass_at(&self, x: usize) -> M {
        self.atoms.get(&x).cloned().unwrap_or_else(M::zero)
    }

    /// `μ(A)` for an arbitrary index list (duplicates are counted once).
    pub fn mass_of(&self, set: &[usize]) -> M {
        let mut seen = std::collections::BTreeSet::new();
        set.iter().filter(|x| seen.insert(**x)).filter_map(|x| self.atoms.get(x)).cloned().fold(M::zero(), |a, b| a + b)
    }

    pub fn mass_of_subset(&self, a: &FiniteSubset) -> M {
        a.elements().iter().filter_map(|x| self.atoms.get(x)).cloned().fold(M::zero(), |a, b| a + b)
    }

    /// `t·self + (1−t)·other`.
    pub fn mix(&self, other: &Self, t: M) -> Result<Self> {
        same_host(self.host, other.host)?;
        if t < M::zero() || t > M::one() {
            return Err(Error::InvalidMeasure("mixing weight outside [0, 1]".into()));
        }
        let s = M::one() - t.clone();
        let atoms = self
            .atoms
            .iter()
            .map(|(&k, v)| (k, v.clone() * t.clone()))
            .chain(other.atoms.iter().map(|(&k, v)| (k, v.clone() * s.clone())))
            .collect();
        Ok(AtomicMeasure { atoms: collect_atoms(atoms, self.host)?, host: self.host })
    }

    /// Dense `f64` vector of length `host`.
    pub fn to_f64_vec(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.host];
        for (&k, m) in &self.atoms {
            v[k] = m.to_f64();
        }
        v
    }

    pub fn to_float(&self) -> AtomicMeasure<f64> {
        AtomicMeasure { atoms: self.atoms.iter().map(|(&k, v)| (k, v.to_f64())).collect(), host: self.host }
    }
}

fn collect_atoms<M: Mass>(atoms: Vec<(usize, M)>, host: usize) -> Result<BTreeMap<usize, M>> {
    let mut map: BTreeMap<usize, M> = BTreeMap::new();
    for (k, v) in atoms {
        if k >= host {
            return Err(Error::IndexOutOfRange { index: k, len: host });
        }
        if v < M::zero() {
            return Err(Error::InvalidMeasure(format!("negative mass {v:?} at {k}")));
        }
        if v.is_zero() {
            continue;
        }
        match map.get_mut(&k) {
            Some(m) => *m = m.clone() + v,
            None => {
                map.insert(k, v);
            }
        }
    }
    Ok(map)
}

pub(crate) fn same_host(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::HostMismatch { left, right })
    }
}

impl AtomicMeasure<Rational> {
    /// Parse `{"atoms": [[index, "p/q"], …]}`.
    pub fn from_json(text: &str, host: usize) -> Result<Self> {
        #[derive(serde::Deserialize)]
        struct Raw {
            atoms: Vec<(usize, String)>,
        }
        let raw: Raw = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let atoms = raw
            .atoms
            .into_iter()
            .map(|(k, s)| {
                s.parse::<Rational>()
                    .map(|r| (k, r))
                    .map_err(|_| Error::Parse(format!("bad rational `{s}` at atom {k}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(atoms, host)
    }
}

struct AtomList<'a>(&'a BTreeMap<usize, Rational>);

impl Serialize for AtomList<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.0.len()))?;
        for (k, v) in self.0 {
            seq.serialize_element(&(k, v.to_string()))?;
        }
        seq.end()
    }
}

impl Serialize for AtomicMeasure<Rational> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("AtomicMeasure", 1)?;
        st.serialize_field("atoms", &AtomList(&self.atoms))?;
        st.end()
    }
}

/// A finitely supported measure on `M(X)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureOnMeasures<M: Mass = Rational> {
    atoms: Vec<(AtomicMeasure<M>, M)>,
}

impl<M: Mass> MeasureOnMeasures<M> {
    pub fn new(atoms: Vec<(AtomicMeasure<M>, M)>) -> Result<Self> {
        let Some((first, _)) = atoms.first() else {
            return Err(Error::Empty("measure on measures with no atoms".into()));
        };
        let host = first.host;
        let mut total = M::zero();
        for (theta, w) in &atoms {
            same_host(host, theta.host)?;
            if *w < M::zero() {
                return Err(Error::InvalidMeasure(format!("negative weight {w:?}")));
            }
            total = total + w.clone();
        }
        if !total.is_unit_total() {
            return Err(Error::InvalidMeasure(format!("weights sum to {total:?}, not 1")));
        }
        Ok(MeasureOnMeasures { atoms })
    }

    pub fn atoms(&self) -> &[(AtomicMeasure<M>, M)] {
        &self.atoms
    }

    /// Image under the induced map of `T_M`: each atom `θ` moves to `T_M θ`.
    pub fn push_atoms(&self, system: &FiniteSystem) -> Result<Self> {
        let atoms = self
            .atoms
            .iter()
            .map(|(theta, w)| pushforward(system, theta).map(|t| (t, w.clone())))
            .collect::<Result<Vec<_>>>()?;
        Ok(MeasureOnMeasures { atoms })
    }
}

pub fn dirac<M: Mass>(system: &FiniteSystem, x: usize) -> Result<AtomicMeasure<M>> {
    AtomicMeasure::dirac(x, system.len())
}

/// `(T_M μ)(i) = Σ_{j: T(j)=i} μ(j)`.
pub fn pushforward<M: Mass>(system: &FiniteSystem, mu: &AtomicMeasure<M>) -> Result<AtomicMeasure<M>> {
    same_host(system.len(), mu.host)?;
    Ok(AtomicMeasure { atoms: push_atoms(mu, |x| system.apply(x)), host: mu.host })
}

/// Image `π μ` of a measure under a factor map.
pub fn pushforward_by<M: Mass>(factor: &FactorMap, mu: &AtomicMeasure<M>) -> Result<AtomicMeasure<M>> {
    same_host(factor.source_len(), mu.host)?;
    Ok(AtomicMeasure { atoms: push_atoms(mu, |x| factor.apply(x)), host: factor.target_len() })
}

fn push_atoms<M: Mass>(mu: &AtomicMeasure<M>, f: impl Fn(usize) -> usize) -> BTreeMap<usize, M> {
    let mut out: BTreeMap<usize, M> = BTreeMap::new();
    for (&k, v) in &mu.atoms {
        match out.get_mut(&f(k)) {
            Some(m) => *m = m.clone() + v.clone(),
            None => {
                out.insert(f(k), v.clone());
            }
        }
    }
    out
}

/// `μ_A(B) = μ(A∩B)/μ(A)`.
pub fn conditional<M: Mass>(mu: &AtomicMeasure<M>, a: &FiniteSubset) -> Result<AtomicMeasure<M>> {
    same_host(mu.host, a.host())?;
    conditional_on(mu, a.elements())
}

pub(crate) fn conditional_on<M: Mass>(mu: &AtomicMeasure<M>, set: &[usize]) -> Result<AtomicMeasure<M>> {
    let atoms: Vec<(usize, M)> = set.iter().filter_map(|&x| mu.atoms.get(&x).map(|m| (x, m.clone()))).collect();
    let total = atoms.iter().map(|(_, m)| m.clone()).fold(M::zero(), |a, b| a + b);
    if total.is_zero() {
        return Err(Error::ZeroMass);
    }
    let atoms = atoms.into_iter().map(|(k, m)| (k, m / total.clone())).collect();
    Ok(AtomicMeasure { atoms, host: mu.host })
}

/// `∫ θ dν(θ)`.
pub fn barycenter<M: Mass>(nu: &MeasureOnMeasures<M>) -> Result<AtomicMeasure<M>> {
    let host = nu.atoms[0].0.host;
    let atoms = nu
        .atoms
        .iter()
        .flat_map(|(theta, w)| theta.atoms.iter().map(move |(&k, m)| (k, m.clone() * w.clone())))
        .collect();
    Ok(AtomicMeasure { atoms: collect_atoms(atoms, host)?, host })
}

/// `C(n + N − 1, N − 1)`, saturating.
pub fn lattice_count(points: usize, n: usize) -> u128 {
    let (top, k) = ((n + points - 1) as u128, (points - 1).min(n) as u128);
    let mut c: u128 = 1;
    for i in 0..k {
        c = match c.checked_mul(top - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    c
}

/// `M_n(X)`: every measure with masses in `{0, 1/n, …, 1}`, each once,
/// ordered lexicographically by the multiset of points.
pub fn enumerate_mn_lattice(system: &FiniteSystem, n: usize) -> Result<Vec<AtomicMeasure>> {
    enumerate_mn_lattice_capped(system, n, DEFAULT_LATTICE_CAP)
}

pub fn enumerate_mn_lattice_capped(system: &FiniteSystem, n: usize, cap: u128) -> Result<Vec<AtomicMeasure>> {
    if n == 0 {
        return Err(Error::InvalidField { field: "n".into(), reason: "must be at least 1".into() });
    }
    let points = system.len();
    let count = lattice_count(points, n);
    if count > cap {
        return Err(Error::CapExceeded { what: format!("M_{n} lattice"), count, cap });
    }
    let mut out = Vec::with_capacity(count as usize);
    // nondecreasing sequences x_1 ≤ … ≤ x_n
    let mut idx = vec![0usize; n];
    loop {
        let atoms = idx.iter().map(|&x| (x, Rational::from_ratio(1, n as u64))).collect();
        out.push(AtomicMeasure { atoms: collect_atoms(atoms, points)?, host: points });
        let Some(i) = (0..n).rev().find(|&i| idx[i] + 1 < points) else { break };
        let v = idx[i] + 1;
        for slot in &mut idx[i..] {
            *slot = v;
        }
    }
    Ok(out)
}

/// Least `p ≤ bound` with `T_M^p μ = μ`.
pub fn measure_period<M: Mass>(system: &FiniteSystem, mu: &AtomicMeasure<M>, bound: usize) -> Result<Option<usize>> {
    system.require_tds()?;
    same_host(system.len(), mu.host)?;
    let mut cur = mu.clone();
    for p in 1..=bound {
        cur = pushforward(system, &cur)?;
        if cur == *mu {
            return Ok(Some(p));
        }
    }
    Ok(None)
}

/// `(1/N) Σ_{i<N} δ_{T^i x}`.
pub fn empirical_measure(system: &FiniteSystem, x: usize, steps: usize) -> Result<AtomicMeasure> {
    system.check_index(x)?;
    if steps == 0 {
        return Err(Error::Empty("empirical measure over zero steps".into()));
    }
    let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
    let mut cur = x;
    for _ in 0..steps {
        *counts.entry(cur).or_default() += 1;
        cur = system.apply(cur);
    }
    let atoms = counts.into_iter().map(|(k, c)| (k, Rational::from_ratio(c, steps as u64))).collect();
    AtomicMeasure::new(atoms, system.len())
}
