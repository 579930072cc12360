//! Return-time sets `N(x, U) = {n : T^n x ∈ U}` and
//! `N(U, V) = {n : T^{-n}V ∩ U ≠ ∅}`, with gap, run and density analytics.
//!
//! Finite systems give sets observed through a window `[0, W)`; every
//! verdict drawn from such a set is an estimate. Cylinder systems give exact
//! eventually periodic sets ([`ResidueTimeSet`]).

use std::fmt::Write as _;

use num_integer::Integer;
use serde::Serialize;

use crate::cylinder::{CylinderSystem, Word};
use crate::error::{Error, Result};
use crate::measures::Rational;
use crate::par::Exec;
use crate::system::FiniteSystem;

/// Most generators accepted by [`fs_generate`].
pub const MAX_FS_GENERATORS: usize = 20;

/// Largest modulus materialized when intersecting residue sets.
pub const MAX_RESIDUE_MODULUS: u64 = 1 << 24;

/// A set of nonnegative integers seen through the window `[0, window)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TimeSet {
    window: u64,
    members: Vec<u64>,
}

impl TimeSet {
    pub fn new(window: u64, mut members: Vec<u64>) -> Result<Self> {
        if window == 0 {
            return Err(Error::Window { window, reason: "window must be positive".into() });
        }
        members.sort_unstable();
        members.dedup();
        if let Some(&m) = members.last().filter(|&&m| m >= window) {
            return Err(Error::Window { window, reason: format!("member {m} lies outside the window") });
        }
        Ok(TimeSet { window, members })
    }

    pub fn full(window: u64) -> Result<Self> {
        Self::new(window, (0..window).collect())
    }

    pub fn from_predicate(window: u64, pred: impl Fn(u64) -> bool) -> Result<Self> {
        Self::new(window, (0..window).filter(|&n| pred(n)).collect())
    }

    pub fn window(&self) -> u64 {
        self.window
    }

    pub fn members(&self) -> &[u64] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, n: u64) -> bool {
        self.members.binary_search(&n).is_ok()
    }

    /// `|S ∩ [0, n)|`.
    pub fn count_below(&self, n: u64) -> usize {
        self.members.partition_point(|&m| m < n)
    }

    /// Intersection within the common part of both windows.
    pub fn intersection(&self, other: &TimeSet) -> TimeSet {
        let window = self.window.min(other.window);
        let members = self.members.iter().copied().filter(|&n| n < window && other.contains(n)).collect();
        TimeSet { window, members }
    }

    pub fn is_subset_of(&self, other: &TimeSet) -> bool {
        self.members.iter().all(|&n| n >= other.window || other.contains(n))
    }

    /// One integer per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for m in &self.members {
            let _ = writeln!(out, "{m}");
        }
        out
    }
}

/// `{n : (n mod modulus ∈ residues) XOR (n ∈ prefix_exceptions)}`.
///
/// Exceptions are finitely many and toggle membership, so the set agrees
/// with the residue classes beyond the largest exception.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ResidueTimeSet {
    modulus: u64,
    residues: Vec<u64>,
    prefix_exceptions: Vec<u64>,
}

impl ResidueTimeSet {
    pub fn new(modulus: u64, mut residues: Vec<u64>, mut prefix_exceptions: Vec<u64>) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::InvalidField { field: "modulus".into(), reason: "must be positive".into() });
        }
        if let Some(&r) = residues.iter().find(|&&r| r >= modulus) {
            return Err(Error::InvalidField {
                field: "residues".into(),
                reason: format!("{r} is not reduced modulo {modulus}"),
            });
        }
        residues.sort_unstable();
        residues.dedup();
        prefix_exceptions.sort_unstable();
        prefix_exceptions.dedup();
        Ok(ResidueTimeSet { modulus, residues, prefix_exceptions })
    }

    /// `{n ≡ r mod m}`.
    pub fn progression(modulus: u64, residue: u64) -> Result<Self> {
        Self::new(modulus, vec![residue % modulus.max(1)], vec![])
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn residues(&self) -> &[u64] {
        &self.residues
    }

    pub fn prefix_exceptions(&self) -> &[u64] {
        &self.prefix_exceptions
    }

    /// Every `n ≥ prefix_len()` follows the residue classes.
    pub fn prefix_len(&self) -> u64 {
        self.prefix_exceptions.last().map_or(0, |&e| e + 1)
    }

    fn periodic_contains(&self, n: u64) -> bool {
        self.residues.binary_search(&(n % self.modulus)).is_ok()
    }

    pub fn contains(&self, n: u64) -> bool {
        self.periodic_contains(n) ^ self.prefix_exceptions.binary_search(&n).is_ok()
    }

    pub fn window(&self, window: u64) -> Result<TimeSet> {
        TimeSet::from_predicate(window, |n| self.contains(n))
    }

    /// Smallest member, if any.
    pub fn first(&self) -> Option<u64> {
        (0..self.prefix_len() + self.modulus).find(|&n| self.contains(n))
    }

    pub fn is_empty(&self) -> bool {
        self.first().is_none()
    }

    /// Exact intersection; the modulus is the lcm of the two moduli.
    pub fn intersection(&self, other: &ResidueTimeSet) -> Result<ResidueTimeSet> {
        let modulus = self.modulus.lcm(&other.modulus);
        if modulus > MAX_RESIDUE_MODULUS {
            return Err(Error::CapExceeded {
                what: "residue modulus".into(),
                count: modulus as u128,
                cap: MAX_RESIDUE_MODULUS as u128,
            });
        }
        let residues: Vec<u64> =
            (0..modulus).filter(|&r| self.periodic_contains(r) && other.periodic_contains(r)).collect();
        let prefix = self.prefix_len().max(other.prefix_len());
        let exceptions = (0..prefix)
            .filter(|&n| {
                let periodic = residues.binary_search(&(n % modulus)).is_ok();
                periodic != (self.contains(n) && other.contains(n))
            })
            .collect();
        ResidueTimeSet::new(modulus, residues, exceptions)
    }

    /// Syndetic exactly when some residue class survives.
    pub fn is_syndetic(&self) -> bool {
        !self.residues.is_empty()
    }

    /// Thick exactly when the residues cover every class: otherwise runs are
    /// bounded by `prefix_len() + modulus`.
    pub fn is_thick(&self) -> bool {
        self.residues.len() as u64 == self.modulus
    }
}

/// `{n < W : T^n x ∈ U}`.
pub fn return_times_point(system: &FiniteSystem, x: usize, u: &[usize], window: u64) -> Result<TimeSet> {
    system.check_index(x)?;
    let mask = membership_mask(system, u)?;
    let mut members = Vec::new();
    let mut cur = x;
    for n in 0..window {
        if mask[cur] {
            members.push(n);
        }
        cur = system.apply(cur);
    }
    TimeSet::new(window, members)
}

/// `{n < W : T^n U ∩ V ≠ ∅}`.
pub fn return_times_set(system: &FiniteSystem, u: &[usize], v: &[usize], window: u64) -> Result<TimeSet> {
    let _ = membership_mask(system, u)?;
    let target = membership_mask(system, v)?;
    let mut cur: Vec<usize> = u.to_vec();
    let mut members = Vec::new();
    for n in 0..window {
        if cur.iter().any(|&x| target[x]) {
            members.push(n);
        }
        for x in &mut cur {
            *x = system.apply(*x);
        }
        cur.sort_unstable();
        cur.dedup();
    }
    TimeSet::new(window, members)
}

fn membership_mask(system: &FiniteSystem, set: &[usize]) -> Result<Vec<bool>> {
    if set.is_empty() {
        return Err(Error::Empty("return-time target set".into()));
    }
    let mut mask = vec![false; system.len()];
    for &x in set {
        system.check_index(x)?;
        mask[x] = true;
    }
    Ok(mask)
}

/// Exact `N([u], [v])` for a cylinder system.
///
/// Full shift: `n` belongs unless `n < |u|` and `u` and `v` disagree where
/// they overlap at offset `n`. Odometer: `T^n[u] = [u ⊕ n]` meets `[v]` iff
/// the two agree on the first `k = min(|u|, |v|)` coordinates, i.e.
/// `n ≡ int(v) − int(u) mod 2^k`.
pub fn cylinder_return_times(system: &CylinderSystem, u: &Word, v: &Word) -> Result<ResidueTimeSet> {
    system.validate_word(u)?;
    system.validate_word(v)?;
    match system {
        CylinderSystem::FullShift { .. } => {
            let (us, vs) = (u.symbols(), v.symbols());
            let exceptions =
                (0..us.len()).filter(|&n| us[n..].iter().zip(vs).any(|(a, b)| a != b)).map(|n| n as u64).collect();
            ResidueTimeSet::new(1, vec![0], exceptions)
        }
        CylinderSystem::Odometer => {
            let k = u.len().min(v.len());
            let modulus = odometer_modulus(k)?;
            let iu = Word::new(u.symbols()[..k].to_vec()).index(2);
            let iv = Word::new(v.symbols()[..k].to_vec()).index(2);
            ResidueTimeSet::progression(modulus, (iv + modulus - iu) % modulus)
        }
    }
}

/// Exact `N(x, [w])` on the odometer, where `x` is known through its first
/// `|x| ≥ |w|` coordinates.
pub fn odometer_point_return_times(x: &Word, w: &Word) -> Result<ResidueTimeSet> {
    CylinderSystem::Odometer.validate_word(x)?;
    CylinderSystem::Odometer.validate_word(w)?;
    if x.len() < w.len() {
        return Err(Error::InvalidWord(format!("point {x} is shorter than the cylinder {w}")));
    }
    let k = w.len();
    let modulus = odometer_modulus(k)?;
    let ix = Word::new(x.symbols()[..k].to_vec()).index(2);
    ResidueTimeSet::progression(modulus, (w.index(2) + modulus - ix) % modulus)
}

fn odometer_modulus(k: usize) -> Result<u64> {
    if k >= 63 {
        return Err(Error::Overflow(format!("odometer modulus 2^{k}")));
    }
    Ok(1u64 << k)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SyndeticGap {
    /// Largest gap, counting from `0` to the first member and from the last
    /// member to the window end.
    pub max_gap: u64,
    /// In-window syndeticity estimate: at least two members and no gap
    /// longer than half the window.
    pub covers_window: bool,
}

pub fn syndetic_gap(s: &TimeSet) -> Result<SyndeticGap> {
    let (Some(&first), Some(&last)) = (s.members.first(), s.members.last()) else {
        return Err(Error::Empty("gap of an empty time set".into()));
    };
    let inner = s.members.windows(2).map(|w| w[1] - w[0]).max().unwrap_or(0);
    let max_gap = inner.max(first).max(s.window - last);
    Ok(SyndeticGap { max_gap, covers_window: s.members.len() >= 2 && max_gap <= s.window / 2 })
}

/// Longest block of consecutive integers in `s`.
pub fn max_run(s: &TimeSet) -> u64 {
    let mut best = 0;
    let mut run = 0;
    let mut prev: Option<u64> = None;
    for &m in &s.members {
        run = if prev == Some(m.wrapping_sub(1)) && m > 0 { run + 1 } else { 1 };
        best = best.max(run);
        prev = Some(m);
    }
    best
}

/// `max_{⌈W/2⌉ ≤ n ≤ W} |S ∩ [0, n)| / n`, a proxy for the upper density.
pub fn upper_density_estimate(s: &TimeSet) -> f64 {
    let w = s.window;
    (w.div_ceil(2).max(1)..=w).map(|n| s.count_below(n) as f64 / n as f64).fold(0.0, f64::max)
}

/// Largest share of `S` in any window `[a, a+L) ⊆ [0, W)`.
///
/// Windows have exactly length `L`. Allowing longer windows would let odd
/// lengths beat the true density of a periodic set.
pub fn banach_density_estimate(s: &TimeSet, len: u64) -> Result<f64> {
    if len == 0 || len > s.window {
        return Err(Error::Window { window: s.window, reason: format!("interval length {len} not in 1..=window") });
    }
    let best = (0..=s.window - len).map(|a| s.count_below(a + len) - s.count_below(a)).max().unwrap_or(0);
    Ok(best as f64 / len as f64)
}

/// `FS(p_1, …, p_m)`: all nonempty subset sums, windowed to the largest.
pub fn fs_generate(generators: &[u64]) -> Result<TimeSet> {
    if generators.is_empty() || generators.len() > MAX_FS_GENERATORS {
        return Err(Error::InvalidField {
            field: "generators".into(),
            reason: format!("need 1..={MAX_FS_GENERATORS} generators, got {}", generators.len()),
        });
    }
    if generators.contains(&0) {
        return Err(Error::InvalidField { field: "generators".into(), reason: "generators must be positive".into() });
    }
    let total = generators
        .iter()
        .try_fold(0u64, |a, &g| a.checked_add(g))
        .filter(|t| *t < u64::MAX)
        .ok_or_else(|| Error::Overflow("sum of FS generators".into()))?;
    let mut sums = vec![0u64; 1 << generators.len()];
    for mask in 1..sums.len() {
        let low = mask.trailing_zeros() as usize;
        sums[mask] = sums[mask & (mask - 1)] + generators[low];
    }
    sums.remove(0);
    TimeSet::new(total + 1, sums)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IpSample {
    pub generators: Vec<u64>,
    pub intersects: bool,
    /// Smallest element of `S ∩ FS`.
    pub witness: Option<u64>,
}

/// Does `s` meet each sampled IP set? Evidence for IP*-ness, never a proof.
pub fn ip_star_window_check(s: &TimeSet, samples: &[Vec<u64>]) -> Result<Vec<IpSample>> {
    samples
        .iter()
        .map(|g| {
            let fs = fs_generate(g)?;
            if fs.window > s.window {
                return Err(Error::Window {
                    window: s.window,
                    reason: format!("FS of {g:?} reaches {}", fs.window - 1),
                });
            }
            let witness = fs.members.iter().copied().find(|&n| s.contains(n));
            Ok(IpSample { generators: g.clone(), intersects: witness.is_some(), witness })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Proximality {
    pub min_dist: f64,
    /// First time the minimum is attained.
    pub at: u64,
    pub proximal_in_window: bool,
}

/// `min_{n<W} ρ(T^n x, T^n y)`. On a finite space `liminf = 0` iff the pair
/// collides, which a window covering one joint period decides.
pub fn pair_proximality(system: &FiniteSystem, x: usize, y: usize, window: u64) -> Result<Proximality> {
    system.check_index(x)?;
    system.check_index(y)?;
    if window == 0 {
        return Err(Error::Window { window, reason: "window must be positive".into() });
    }
    let (mut a, mut b) = (x, y);
    let (mut best, mut at) = (f64::INFINITY, 0);
    for n in 0..window {
        let d = system.distance(a, b);
        if d < best {
            best = d;
            at = n;
        }
        a = system.apply(a);
        b = system.apply(b);
    }
    Ok(Proximality { min_dist: best, at, proximal_in_window: best == 0.0 })
}

/// `(1/N) Σ_{i<N} 1_U(T^i x)`, exact.
pub fn birkhoff_average(system: &FiniteSystem, x: usize, u: &[usize], steps: u64) -> Result<Rational> {
    if steps == 0 {
        return Err(Error::Window { window: 0, reason: "average over zero steps".into() });
    }
    let hits = return_times_point(system, x, u, steps)?.len();
    Ok(Rational::new((hits as u64).into(), steps.into()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairWitness {
    pub u: String,
    pub v: String,
    /// Smallest `n ∈ N(U, U) ∩ N(U, V)`.
    pub n: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WeakMixingReport {
    pub system: String,
    pub max_len: usize,
    pub pairs_checked: usize,
    pub pass: bool,
    /// One witness per pair in scan order, up to the first failure.
    pub witnesses: Vec<PairWitness>,
    /// First pair `(U, V)` with `N(U, U) ∩ N(U, V) = ∅`.
    pub counterexample: Option<(String, String)>,
}

/// Evaluates `N(U, U) ∩ N(U, V) ≠ ∅` over all ordered pairs of cylinders of
/// length `1..=max_len`, exactly.
pub fn weak_mixing_criterion(system: &CylinderSystem, max_len: usize) -> Result<WeakMixingReport> {
    weak_mixing_criterion_with(system, max_len, Exec::default())
}

pub fn weak_mixing_criterion_with(system: &CylinderSystem, max_len: usize, exec: Exec) -> Result<WeakMixingReport> {
    if max_len == 0 {
        return Err(Error::InvalidField { field: "max_len".into(), reason: "must be at least 1".into() });
    }
    let words = system.cylinders_up_to(max_len);
    let pairs = (words.len() as u128).pow(2);
    if pairs > 1 << 24 {
        return Err(Error::CapExceeded { what: "cylinder pairs".into(), count: pairs, cap: 1 << 24 });
    }
    let m = words.len();
    let outcomes: Vec<Result<Option<u64>>> = exec.map_range(0..m * m, |i| {
        let (u, v) = (&words[i / m], &words[i % m]);
        let uu = cylinder_return_times(system, u, u)?;
        let uv = cylinder_return_times(system, u, v)?;
        Ok(uu.intersection(&uv)?.first())
    });
    let mut witnesses = Vec::new();
    let mut counterexample = None;
    for (i, out) in outcomes.into_iter().enumerate() {
        let (u, v) = (&words[i / m], &words[i % m]);
        match out? {
            Some(n) => witnesses.push(PairWitness { u: u.to_string(), v: v.to_string(), n }),
            None => {
                counterexample = Some((u.to_string(), v.to_string()));
                break;
            }
        }
    }
    Ok(WeakMixingReport {
        system: system.name().to_string(),
        max_len,
        pairs_checked: m * m,
        pass: counterexample.is_none(),
        witnesses,
        counterexample,
    })
}
