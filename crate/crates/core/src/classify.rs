//! Property detectors for finite systems and periodic-measure probes.
//!
//! On a finite t.d.s. the map is a permutation, so transitivity means a
//! single cycle, every point is periodic and minimal, and the uniform
//! measure on the cycle is the unique invariant measure of a transitive
//! system.

use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::cylinder::{cylinder_points, odometer_truncation, CylinderSystem, Word, MAX_TRUNCATION_DEPTH};
use crate::error::{Error, Result};
use crate::hyperspace::{enumerate_kn, kn_count, period_of_set};
use crate::measures::{
    enumerate_mn_lattice, lattice_count, measure_period, series_metric, AtomicMeasure, CylinderMixture, FunctionFamily,
    Rational,
};
use crate::par::Exec;
use crate::system::FiniteSystem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Qualifier {
    /// Decided exactly.
    Exact,
    /// Decided within an explicit search space or window only.
    AtResolution,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Flag {
    pub value: bool,
    pub qualifier: Qualifier,
}

impl Flag {
    pub fn exact(value: bool) -> Self {
        Flag { value, qualifier: Qualifier::Exact }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum TransitivityWitness {
    /// A point whose orbit is the whole space.
    TransitivePoint { point: usize },
    /// Two disjoint nonempty invariant sets.
    InvariantSplit { first: Vec<usize>, second: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Transitivity {
    pub transitive: bool,
    pub witness: TransitivityWitness,
}

pub fn is_transitive(system: &FiniteSystem) -> Result<Transitivity> {
    system.require_tds()?;
    let mut cycles = system.cycles();
    if cycles.len() == 1 {
        return Ok(Transitivity { transitive: true, witness: TransitivityWitness::TransitivePoint { point: 0 } });
    }
    let second = cycles.swap_remove(1);
    let first = cycles.swap_remove(0);
    let sorted = |mut v: Vec<usize>| {
        v.sort_unstable();
        v
    };
    Ok(Transitivity {
        transitive: false,
        witness: TransitivityWitness::InvariantSplit { first: sorted(first), second: sorted(second) },
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TotalTransitivity {
    pub up_to: usize,
    pub verdict: bool,
    pub first_failing_power: Option<usize>,
}

/// Transitivity of `T^k` for `k = 1..=up_to`. A cycle of length `L` splits
/// under `T^k` into `gcd(L, k)` cycles.
pub fn is_totally_transitive(system: &FiniteSystem, up_to: usize) -> Result<TotalTransitivity> {
    system.require_tds()?;
    let cycles = system.cycles();
    let first_failing_power = (1..=up_to).find(|&k| !(cycles.len() == 1 && cycles[0].len().gcd(&k) == 1));
    Ok(TotalTransitivity { up_to, verdict: first_failing_power.is_none(), first_failing_power })
}

/// `P(T)`: points on a cycle.
pub fn periodic_points(system: &FiniteSystem) -> Vec<usize> {
    (0..system.len()).filter(|&x| system.period(x).is_some()).collect()
}

/// `AP(T)`: the orbit closure of `x` is its forward orbit. That orbit ends
/// in a cycle, a closed invariant subset which is proper unless `x` is on it.
pub fn minimal_points(system: &FiniteSystem) -> Vec<usize> {
    (0..system.len())
        .filter(|&x| {
            let orbit = system.orbit(x, system.len()).unwrap_or_default();
            let tail = system.iterate(x, system.len());
            let cycle = system.orbit(tail, system.len()).unwrap_or_default();
            orbit.iter().all(|y| cycle.contains(y))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witnesses {
    pub transitivity: TransitivityWitness,
    /// Uniform measure on the cycle, when transitive.
    pub invariant_measure: Option<AtomicMeasure>,
    pub first_failing_power: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub points: usize,
    pub cycle_lengths: Vec<usize>,
    pub global_period: Option<u64>,
    pub transitive: Flag,
    pub totally_transitive: TotalTransitivity,
    pub pointwise_periodic: Flag,
    pub periodic: Flag,
    pub p_system: Flag,
    pub m_system: Flag,
    pub e_system: Flag,
    pub witnesses: Witnesses,
}

pub fn classify(system: &FiniteSystem, up_to: usize) -> Result<ClassificationReport> {
    let trans = is_transitive(system)?;
    let total = is_totally_transitive(system, up_to)?;
    let cycles = system.cycles();
    let n = system.len();
    let pointwise = periodic_points(system).len() == n;
    let global_period = system.global_period();
    let periodic = global_period.is_some_and(|m| (0..n).all(|x| system.period(x).is_some_and(|p| m % p as u64 == 0)));
    let dense_minimal = minimal_points(system).len() == n;
    let invariant_measure = if trans.transitive { Some(AtomicMeasure::uniform(&cycles[0], n)?) } else { None };
    let full_support = invariant_measure.as_ref().is_some_and(|m| m.support().len() == n);
    Ok(ClassificationReport {
        points: n,
        cycle_lengths: cycles.iter().map(Vec::len).collect(),
        global_period,
        transitive: Flag::exact(trans.transitive),
        totally_transitive: total.clone(),
        pointwise_periodic: Flag::exact(pointwise),
        periodic: Flag::exact(periodic),
        p_system: Flag::exact(trans.transitive && pointwise),
        m_system: Flag::exact(trans.transitive && dense_minimal),
        e_system: Flag::exact(trans.transitive && full_support),
        witnesses: Witnesses {
            transitivity: trans.witness,
            invariant_measure,
            first_failing_power: total.first_failing_power,
        },
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PeriodicityCrossCheck {
    pub periodic: bool,
    pub hyperspace_pointwise_periodic: bool,
    pub measure_pointwise_periodic: bool,
    pub hyperspace_elements: usize,
    pub lattice_elements: usize,
    pub agree: bool,
}

/// Periodicity of `T` against pointwise periodicity of `T_K` on `K_n` and of
/// `T_M` on the lattice `M_n`. Both are invariant finite sets, so an element
/// is periodic iff it returns within as many steps as the set has elements.
pub fn periodicity_cross_check(system: &FiniteSystem, n: usize, exec: Exec) -> Result<PeriodicityCrossCheck> {
    system.require_tds()?;
    let periodic = system.global_period().is_some();
    let sets = enumerate_kn(system, n)?;
    let k_bound = kn_count(system.len(), n) as usize;
    let k_periods = exec.map_slice(&sets, |a| period_of_set(system, a, k_bound));
    let mut hyper = true;
    for p in k_periods {
        hyper &= p?.is_some();
    }
    let lattice = enumerate_mn_lattice(system, n)?;
    let m_bound = lattice_count(system.len(), n) as usize;
    let m_periods = exec.map_slice(&lattice, |mu| measure_period(system, mu, m_bound));
    let mut meas = true;
    for p in m_periods {
        meas &= p?.is_some();
    }
    Ok(PeriodicityCrossCheck {
        periodic,
        hyperspace_pointwise_periodic: hyper,
        measure_pointwise_periodic: meas,
        hyperspace_elements: sets.len(),
        lattice_elements: lattice.len(),
        agree: periodic == hyper && hyper == meas,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeWitness {
    pub measure: AtomicMeasure,
    pub period: u64,
    /// `μ(U^c)` as an exact fraction.
    pub complement_mass: String,
    pub qualifier: Qualifier,
}

/// Search the periodic measures of a finite system (Diracs of periodic
/// points and uniform measures on cycles) for `μ` with `μ(U^c) < ε`.
///
/// Among all candidates the one with the least `μ(U^c)` is returned, ties
/// broken by the lexicographically smallest support. `None` means no
/// witness among these candidates, not a negative verdict.
pub fn almost_dense_periodic_probe(
    system: &FiniteSystem,
    u: &[usize],
    epsilon: f64,
    exec: Exec,
) -> Result<Option<ProbeWitness>> {
    system.require_tds()?;
    if u.is_empty() {
        return Err(Error::Empty("probe target set".into()));
    }
    for &x in u {
        system.check_index(x)?;
    }
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidField { field: "epsilon".into(), reason: "must be positive".into() });
    }
    let n = system.len();
    let mut candidates: Vec<AtomicMeasure> = Vec::new();
    for cycle in system.cycles() {
        candidates.push(AtomicMeasure::uniform(&cycle, n)?);
        if cycle.len() > 1 {
            for &x in &cycle {
                candidates.push(AtomicMeasure::dirac(x, n)?);
            }
        }
    }
    let inside: Vec<bool> = (0..n).map(|x| u.contains(&x)).collect();
    let scored = exec.map_slice(&candidates, |mu| {
        let out: Rational = mu.atoms().filter(|(k, _)| !inside[*k]).map(|(_, m)| m.clone()).sum();
        (out, mu.support())
    });
    let Some(best) = (0..candidates.len()).min_by(|&i, &j| scored[i].cmp(&scored[j])) else {
        return Ok(None);
    };
    let (out, _) = &scored[best];
    if crate::measures::Mass::to_f64(out) >= epsilon {
        return Ok(None);
    }
    let mu = candidates.swap_remove(best);
    let bound = system.global_period().unwrap_or(u64::MAX).min(n as u64 * n as u64) as usize;
    let period = measure_period(system, &mu, bound)?
        .ok_or_else(|| Error::Overflow("periodic candidate without a period".into()))? as u64;
    Ok(Some(ProbeWitness { measure: mu, period, complement_mass: out.to_string(), qualifier: Qualifier::AtResolution }))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CylinderProbeWitness {
    pub cylinder: String,
    pub period: u64,
    pub complement_mass: String,
    pub qualifier: Qualifier,
}

/// The same probe on the odometer: candidates are the conditionals `λ_C` of
/// Haar measure on every cylinder with `|C| ≤ max_depth`, each periodic with
/// period `2^{|C|}`. Ties go to the shortest cylinder, then the smallest
/// LSB-first value.
pub fn odometer_almost_dense_periodic_probe(
    u: &Word,
    epsilon: f64,
    max_depth: usize,
) -> Result<Option<CylinderProbeWitness>> {
    let odo = CylinderSystem::Odometer;
    odo.validate_word(u)?;
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidField { field: "epsilon".into(), reason: "must be positive".into() });
    }
    if max_depth == 0 || max_depth > MAX_TRUNCATION_DEPTH as usize - 1 {
        return Err(Error::ParamOutOfRange {
            name: "probe depth".into(),
            param: max_depth as u64,
            range: format!("1..={}", MAX_TRUNCATION_DEPTH - 1),
        });
    }
    let mut best: Option<(Rational, Word)> = None;
    for c in odo.cylinders_up_to(max_depth) {
        let out = Rational::one() - CylinderMixture::cylinder(c.clone())?.mass_of(u)?;
        if best.as_ref().is_none_or(|(b, _)| out < *b) {
            best = Some((out, c));
        }
    }
    let Some((out, c)) = best else { return Ok(None) };
    if crate::measures::Mass::to_f64(&out) >= epsilon {
        return Ok(None);
    }
    let period = CylinderMixture::cylinder(c.clone())?.period()?;
    Ok(Some(CylinderProbeWitness {
        cylinder: c.to_string(),
        period,
        complement_mass: out.to_string(),
        qualifier: Qualifier::AtResolution,
    }))
}

/// Exact period of `λ_C` computed independently in a finite truncation of
/// depth `|C| + 1`.
pub fn cylinder_measure_period_in_truncation(c: &Word) -> Result<Option<usize>> {
    let depth = c.len() as u32 + 1;
    let t = odometer_truncation(depth)?;
    let mu: AtomicMeasure = AtomicMeasure::uniform(&cylinder_points(depth, c)?, t.len())?;
    measure_period(&t, &mu, t.len())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub depth: u32,
    pub distance: f64,
}

/// Distance from `target` (a measure on the depth-`D` odometer truncation)
/// to the convex combinations of cylinder conditionals of length `d`, for
/// each requested `d ≤ D`.
///
/// At each depth `d'` the candidate is the mixture `Σ_{|C|=d'} target([C]) λ_C`,
/// which matches `target` on every cylinder of length at most `d'`.
/// Combinations at depth `d' ≤ d` are also combinations at depth `d`, so the
/// reported distance is the best over all `d' ≤ d` and never increases.
/// Distances use the cylinder-indicator family on the truncation.
pub fn dense_periodic_measures_probe(target: &AtomicMeasure, depths: &[u32]) -> Result<Vec<CurvePoint>> {
    let host = target.host();
    if !host.is_power_of_two() || host < 2 {
        return Err(Error::InvalidMeasure(format!("{host} points is not an odometer truncation")));
    }
    let top = host.trailing_zeros();
    if let Some(&d) = depths.iter().find(|&&d| d == 0 || d > top) {
        return Err(Error::ParamOutOfRange { name: "depth".into(), param: d as u64, range: format!("1..={top}") });
    }
    let system = odometer_truncation(top)?;
    let family = FunctionFamily::CylinderIndicators { depth: top };
    let max_d = depths.iter().copied().max().unwrap_or(0);
    let mut best_at = Vec::with_capacity(max_d as usize);
    let mut best = f64::INFINITY;
    for d in 1..=max_d {
        let dist = series_metric(&system, target, &projection(target, d)?, &family)?;
        best = best.min(dist);
        best_at.push(best);
    }
    Ok(depths.iter().map(|&d| CurvePoint { depth: d, distance: best_at[d as usize - 1] }).collect())
}

/// `Σ_{|C|=d} μ([C]) λ_C` realized in the truncation hosting `mu`.
fn projection(mu: &AtomicMeasure, d: u32) -> Result<AtomicMeasure> {
    let modulus = 1usize << d;
    let mut masses = vec![Rational::zero(); modulus];
    for (k, m) in mu.atoms() {
        masses[k % modulus] += m.clone();
    }
    let components =
        masses.into_iter().enumerate().map(|(v, m)| (Word::from_index(v as u64, d as usize, 2), m)).collect();
    CylinderMixture::new(components)?.to_atomic(mu.host().trailing_zeros())
}
