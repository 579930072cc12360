//! Named checks run by `hyperdyn verify`.
//!
//! Each check is a pure function of the seed and returns a verdict with a
//! JSON witness. Randomized instances draw from per-instance streams, so a
//! report is identical under either execution strategy.

use std::time::Instant;

use num_traits::Zero;
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::catalog::{block_cycling, block_cycling_measure, block_cycling_set, finite_catalog_fixtures};
use crate::classify::{
    cylinder_measure_period_in_truncation, dense_periodic_measures_probe, odometer_almost_dense_periodic_probe,
    periodicity_cross_check,
};
use crate::cylinder::{cylinder_points, odometer_add, odometer_truncation, CylinderSystem, Word};
use crate::error::{Error, Result};
use crate::hyperspace::{enumerate_kn, hausdorff_distance, period_of_set, FiniteSubset};
use crate::joinings::{disjointness_sweep, projection_inequality_at};
use crate::measures::{
    conditional_perturbation_check, decomposition_identity, measure_period, prohorov_distance, pushforward_by,
    pushforward_conditional_check, AtomicMeasure, CylinderMixture, FunctionFamily, Mass, Rational,
};
use crate::par::Exec;
use crate::recurrence::{birkhoff_average, weak_mixing_criterion_with};
use crate::sample::{instance_rng, random_measure, random_points, random_subset, random_system};
use crate::system::{FactorMap, FiniteSystem};

/// Triangle-inequality slack for floating metrics.
pub const TRIANGLE_TOLERANCE: f64 = 1e-9;

/// Check ids in report order, with the claim each one exercises.
pub const CHECKS: &[(&str, &str)] = &[
    ("lemma-2.2", "conditional measures: partition identity, 2-epsilon perturbation bound, factor compatibility"),
    ("metrics", "Hausdorff and Prohorov metric axioms; Prohorov distance of Dirac pairs is min(rho, 1)"),
    ("odometer", "carry addition, single-cycle truncations, cylinder measure periods 2^|C|, Birkhoff averages 2^-k"),
    ("lemma-4.2", "N(U,U) meets N(U,V) for all cylinder pairs of the full shift but not of the odometer"),
    ("example-3.3", "the set {0, 1, 1/2, ..., 1/2^m} has hyperspace period 2^m"),
    ("example-4.5", "the measure sum 2^-n delta(1/2^(n-1)) has period 2^m"),
    ("thm-3.4-4.6", "periodic iff hyperspace pointwise periodic iff measure lattice pointwise periodic"),
    ("disjointness", "cycle(p) and cycle(q) are disjoint iff gcd(p, q) = 1; disjoint pairs have a minimal factor"),
    ("thm-5.2", "rho(T^n x, u) <= d_H(T_K^n A, {u}) for x in A"),
    ("def-4.7", "every odometer cylinder U carries a periodic measure with mu(U^c) = 0 and period 2^|U|"),
    ("remark-4.12", "cylinder-conditional combinations approach lattice targets monotonically in depth"),
];

#[derive(Clone, Copy, Debug)]
pub struct VerifyConfig {
    pub seed: u64,
    pub exec: Exec,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub id: String,
    pub anchor: String,
    pub verdict: Verdict,
    pub witness: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl CheckRecord {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Expand `"all"` or validate a single id.
pub fn resolve_ids(id: &str) -> Result<Vec<&'static str>> {
    if id == "all" {
        return Ok(CHECKS.iter().map(|(id, _)| *id).collect());
    }
    CHECKS.iter().find(|(c, _)| *c == id).map(|(c, _)| vec![*c]).ok_or_else(|| Error::UnknownCheck(id.to_string()))
}

pub fn run_check(id: &str, cfg: &VerifyConfig) -> Result<CheckRecord> {
    let (id, anchor) = CHECKS.iter().find(|(c, _)| *c == id).ok_or_else(|| Error::UnknownCheck(id.to_string()))?;
    let start = Instant::now();
    let (ok, witness) = match *id {
        "lemma-2.2" => conditional_measures(cfg)?,
        "metrics" => metrics(cfg)?,
        "odometer" => odometer(cfg)?,
        "lemma-4.2" => weak_mixing_separation(cfg)?,
        "example-3.3" => block_set_periods()?,
        "example-4.5" => block_measure_periods()?,
        "thm-3.4-4.6" => periodicity_agreement(cfg)?,
        "disjointness" => disjointness(cfg)?,
        "thm-5.2" => projection_inequality(cfg)?,
        "def-4.7" => cylinder_periodic_witnesses()?,
        "remark-4.12" => density_curve(cfg)?,
        other => return Err(Error::UnknownCheck(other.to_string())),
    };
    Ok(CheckRecord {
        id: id.to_string(),
        anchor: anchor.to_string(),
        verdict: if ok { Verdict::Pass } else { Verdict::Fail },
        witness,
        elapsed_ms: Some(start.elapsed().as_millis() as u64),
    })
}

type Outcome = Result<(bool, Value)>;

/// Streams are namespaced per sub-check so adding instances to one sweep
/// leaves the others unchanged.
fn stream(sub: u64, i: usize) -> u64 {
    (sub << 32) | i as u64
}

fn collect_errors<T>(rs: Vec<Result<T>>) -> Result<Vec<T>> {
    rs.into_iter().collect()
}

pub fn conditional_measures(cfg: &VerifyConfig) -> Outcome {
    let seed = cfg.seed;
    let identity = collect_errors(cfg.exec.map_range(0..200, |i| {
        let mut rng = instance_rng(seed, stream(1, i));
        let n = rng.gen_range(2..=8);
        let mu = random_measure(&mut rng, n, n)?;
        let support = mu.support();
        let k = rng.gen_range(1..=support.len());
        // each part gets one support point; the other points join a random
        // part or stay outside
        let anchors = random_points(&mut rng, support.len(), k);
        let mut parts: Vec<Vec<usize>> = anchors.iter().map(|&a| vec![support[a]]).collect();
        for x in 0..n {
            if parts.iter().any(|p| p[0] == x) {
                continue;
            }
            let slot = rng.gen_range(0..=k);
            if slot < k {
                parts[slot].push(x);
            }
        }
        let parts = parts.into_iter().map(|p| FiniteSubset::new(p, n)).collect::<Result<Vec<_>>>()?;
        decomposition_identity(&mu, &parts)
    }))?;
    let identity_failures = identity.iter().filter(|ok| !**ok).count();

    let bounds = collect_errors(cfg.exec.map_range(0..1000, |i| {
        let mut rng = instance_rng(seed, stream(2, i));
        let n = rng.gen_range(2..=10);
        let system = random_system(&mut rng, n)?;
        let mu = random_measure(&mut rng, n, n)?;
        let support = mu.support();
        let pick = support[rng.gen_range(0..support.len())];
        let mut a = random_subset(&mut rng, n, n)?.elements().to_vec();
        a.push(pick);
        let a = FiniteSubset::new(a, n)?;
        let mut b: Vec<usize> = a.elements().to_vec();
        for _ in 0..rng.gen_range(0..=2) {
            let x = rng.gen_range(0..n);
            match b.iter().position(|&y| y == x) {
                Some(p) if b.len() > 1 => {
                    b.remove(p);
                }
                Some(_) => {}
                None => b.push(x),
            }
        }
        if !b.iter().any(|x| support.contains(x)) {
            b.push(pick);
        }
        let b = FiniteSubset::new(b, n)?;
        let ratio = (crate::measures::symmetric_difference_mass(&mu, &a, &b)? / mu.mass_of_subset(&a)).to_f64();
        let epsilon = if ratio == 0.0 { rng.gen_range(0.001..1.0) } else { ratio * rng.gen_range(1.001..3.0) };
        let family = if i % 2 == 0 {
            FunctionFamily::Default
        } else {
            let count = rng.gen_range(1..=12);
            FunctionFamily::Explicit((0..count).map(|_| (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect()).collect())
        };
        conditional_perturbation_check(&system, &mu, &a, &b, epsilon, &family)
    }))?;
    let hypothesis_met = bounds.iter().filter(|r| r.hypothesis_holds).count();
    let bound_violations = bounds.iter().filter(|r| r.bound_holds == Some(false)).count();
    let worst = bounds.iter().map(|r| r.distance / (2.0 * r.epsilon)).fold(0.0, f64::max);

    let mut factor_cases = 0usize;
    let mut factor_failures = 0usize;
    for k in 1..=6usize {
        let factor = FactorMap::cycle_reduction(2 * k, k)?;
        let mut measures = vec![AtomicMeasure::uniform(&(0..2 * k).collect::<Vec<_>>(), 2 * k)?];
        for r in 0..5 {
            let mut rng = instance_rng(seed, stream(3, k * 8 + r));
            measures.push(random_measure(&mut rng, 2 * k, 2 * k)?);
        }
        for mu in &measures {
            let image = pushforward_by(&factor, mu)?;
            for mask in 1usize..1 << k {
                let a: Vec<usize> = (0..k).filter(|&y| mask >> y & 1 == 1).collect();
                if image.mass_of(&a).is_zero() {
                    continue;
                }
                factor_cases += 1;
                if !pushforward_conditional_check(&factor, mu, &a)? {
                    factor_failures += 1;
                }
            }
        }
    }
    let ok = identity_failures == 0 && bound_violations == 0 && hypothesis_met == 1000 && factor_failures == 0;
    Ok((
        ok,
        json!({
            "identity": {"instances": identity.len(), "failures": identity_failures},
            "bound": {"instances": bounds.len(), "hypothesis_met": hypothesis_met,
                      "violations": bound_violations, "max_distance_over_bound": worst},
            "factor": {"cases": factor_cases, "failures": factor_failures},
        }),
    ))
}

pub fn metrics(cfg: &VerifyConfig) -> Outcome {
    let mut hausdorff_pairs = 0usize;
    let mut hausdorff_violations = Vec::new();
    for (name, system) in finite_catalog_fixtures().into_iter().filter(|(_, s)| s.len() <= 6) {
        let sets = enumerate_kn(&system, 3)?;
        let m = sets.len();
        let d =
            collect_errors(cfg.exec.map_range(0..m * m, |i| hausdorff_distance(&system, &sets[i / m], &sets[i % m])))?;
        hausdorff_pairs += m * m;
        let bad = axiom_violations(m, |i, j| d[i * m + j], cfg.exec);
        if let Some(v) = bad {
            hausdorff_violations.push(json!({"system": name, "violation": v}));
        }
    }

    let seed = cfg.seed;
    let prohorov = collect_errors(cfg.exec.map_range(0..500, |i| -> Result<Option<String>> {
        let mut rng = instance_rng(seed, stream(4, i));
        let n = rng.gen_range(2..=8);
        let system = random_system(&mut rng, n)?;
        let mu = random_measure(&mut rng, n, 6)?;
        let nu = random_measure(&mut rng, n, 6)?;
        let la = random_measure(&mut rng, n, 6)?;
        let d = |a: &AtomicMeasure, b: &AtomicMeasure| prohorov_distance(&system, a, b);
        let (mn, nm, ml, nl, mm) = (d(&mu, &nu)?, d(&nu, &mu)?, d(&mu, &la)?, d(&nu, &la)?, d(&mu, &mu)?);
        Ok(if mm != 0.0 {
            Some(format!("instance {i}: D(mu, mu) = {mm}"))
        } else if mn != nm {
            Some(format!("instance {i}: asymmetric {mn} vs {nm}"))
        } else if (mu != nu) != (mn > 0.0) {
            Some(format!("instance {i}: D = {mn} for mu != nu"))
        } else if ml > mn + nl + TRIANGLE_TOLERANCE {
            Some(format!("instance {i}: triangle {ml} > {mn} + {nl}"))
        } else {
            None
        })
    }))?;
    let prohorov_violations: Vec<String> = prohorov.into_iter().flatten().collect();

    let mut dirac_pairs = 0usize;
    let mut dirac_worst = 0.0f64;
    for (_, system) in finite_catalog_fixtures() {
        let n = system.len();
        let errs = collect_errors(cfg.exec.map_range(0..n * n, |i| -> Result<f64> {
            let (x, y) = (i / n, i % n);
            let dx: AtomicMeasure = AtomicMeasure::dirac(x, n)?;
            let dy: AtomicMeasure = AtomicMeasure::dirac(y, n)?;
            Ok((prohorov_distance(&system, &dx, &dy)? - system.distance(x, y).min(1.0)).abs())
        }))?;
        dirac_pairs += errs.len();
        dirac_worst = errs.into_iter().fold(dirac_worst, f64::max);
    }
    let ok = hausdorff_violations.is_empty() && prohorov_violations.is_empty() && dirac_worst <= 1e-9;
    Ok((
        ok,
        json!({
            "hausdorff": {"pairs": hausdorff_pairs, "violations": hausdorff_violations},
            "prohorov": {"instances": 500, "violations": prohorov_violations},
            "dirac": {"pairs": dirac_pairs, "max_error": dirac_worst},
        }),
    ))
}

/// First violated metric axiom of a distance table, if any.
fn axiom_violations(m: usize, d: impl Fn(usize, usize) -> f64 + Sync + Send, exec: Exec) -> Option<String> {
    for i in 0..m {
        for j in 0..m {
            let v = d(i, j);
            if (i == j) != (v == 0.0) || v < 0.0 {
                return Some(format!("d({i},{j}) = {v}"));
            }
            if v != d(j, i) {
                return Some(format!("d({i},{j}) != d({j},{i})"));
            }
        }
    }
    let bad = exec.find_first(0..m * m, |ij| {
        let (i, j) = (ij / m, ij % m);
        (0..m).any(|k| d(i, j) > d(i, k) + d(k, j) + TRIANGLE_TOLERANCE)
    });
    bad.map(|ij| format!("triangle inequality fails for d({},{})", ij / m, ij % m))
}

pub fn odometer(cfg: &VerifyConfig) -> Outcome {
    let adds = collect_errors(cfg.exec.map_range(0..256, |x| -> Result<usize> {
        let wx = Word::from_index(x as u64, 8, 2);
        let mut bad = 0;
        for y in 0..256u64 {
            let sum = odometer_add(&wx, &Word::from_index(y, 8, 2))?;
            if sum.index(2) != (x as u64 + y) % 256 {
                bad += 1;
            }
        }
        Ok(bad)
    }))?;
    let add_failures: usize = adds.iter().sum();

    let mut cycle_failures = Vec::new();
    for depth in 1..=12u32 {
        let cycles = odometer_truncation(depth)?.cycles();
        if cycles.len() != 1 || cycles[0].len() != 1 << depth {
            cycle_failures.push(depth);
        }
    }

    let cylinders = CylinderSystem::Odometer.cylinders_up_to(10);
    let periods = collect_errors(cfg.exec.map_slice(&cylinders, |c| -> Result<bool> {
        let expect = 1u64 << c.len();
        let exact = CylinderMixture::cylinder(c.clone())?.period()?;
        let truncated = cylinder_measure_period_in_truncation(c)?;
        Ok(exact == expect && truncated == Some(expect as usize))
    }))?;
    let period_failures: Vec<String> =
        cylinders.iter().zip(&periods).filter(|(_, ok)| !**ok).map(|(c, _)| c.to_string()).collect();

    let t = odometer_truncation(12)?;
    let jobs: Vec<(usize, Word)> =
        (1..=8usize).flat_map(|k| CylinderSystem::Odometer.cylinders(k).into_iter().map(move |c| (k, c))).collect();
    let birkhoff = collect_errors(cfg.exec.map_slice(&jobs, |(k, c)| -> Result<usize> {
        let points = cylinder_points(12, c)?;
        let expect = Rational::new(1.into(), (1u64 << k).into());
        let mut bad = 0;
        for j in 0..=4 {
            if birkhoff_average(&t, 0, &points, 1 << (k + j))? != expect {
                bad += 1;
            }
        }
        Ok(bad)
    }))?;
    let birkhoff_failures: usize = birkhoff.iter().sum();

    let ok = add_failures == 0 && cycle_failures.is_empty() && period_failures.is_empty() && birkhoff_failures == 0;
    Ok((
        ok,
        json!({
            "addition": {"cases": 65536, "failures": add_failures},
            "single_cycle_depths": {"checked": 12, "failures": cycle_failures},
            "cylinder_periods": {"cylinders": cylinders.len(), "failures": period_failures},
            "birkhoff": {"cases": jobs.len() * 5, "failures": birkhoff_failures},
        }),
    ))
}

pub fn weak_mixing_separation(cfg: &VerifyConfig) -> Outcome {
    let shift = weak_mixing_criterion_with(&CylinderSystem::FullShift { alphabet: 2 }, 5, cfg.exec)?;
    let odo = weak_mixing_criterion_with(&CylinderSystem::Odometer, 1, cfg.exec)?;
    let expected = Some(("[0]".to_string(), "[1]".to_string()));
    let ok = shift.pass && shift.witnesses.len() == shift.pairs_checked && !odo.pass && odo.counterexample == expected;
    let max_witness = shift.witnesses.iter().map(|w| w.n).max();
    Ok((
        ok,
        json!({
            "full_shift": {"pairs": shift.pairs_checked, "pass": shift.pass, "largest_witness": max_witness,
                           "witnesses": shift.witnesses.iter().take(6).collect::<Vec<_>>()},
            "odometer": {"pass": odo.pass, "counterexample": odo.counterexample},
        }),
    ))
}

pub fn block_set_periods() -> Outcome {
    let mut periods = Vec::new();
    for m in 1..=12u32 {
        let s = block_cycling(m)?;
        periods.push(period_of_set(&s, &block_cycling_set(m)?, 1 << (m + 1))?);
    }
    let ok = periods.iter().enumerate().all(|(i, p)| *p == Some(1 << (i + 1)));
    Ok((ok, json!({"m": (1..=12).collect::<Vec<_>>(), "periods": periods})))
}

pub fn block_measure_periods() -> Outcome {
    let mut periods = Vec::new();
    for m in 1..=12u32 {
        let s = block_cycling(m)?;
        periods.push(measure_period(&s, &block_cycling_measure(m)?, 1 << (m + 1))?);
    }
    let ok = periods.iter().enumerate().all(|(i, p)| *p == Some(1 << (i + 1)));
    Ok((ok, json!({"m": (1..=12).collect::<Vec<_>>(), "periods": periods})))
}

pub fn periodicity_agreement(cfg: &VerifyConfig) -> Outcome {
    let mut rows = Vec::new();
    let mut ok = true;
    for (name, system) in finite_catalog_fixtures() {
        let c = periodicity_cross_check(&system, 3, cfg.exec)?;
        ok &= c.agree;
        rows.push(json!({"system": name, "periodic": c.periodic, "hyperspace": c.hyperspace_pointwise_periodic,
                         "measures": c.measure_pointwise_periodic, "k3": c.hyperspace_elements,
                         "m3": c.lattice_elements}));
    }
    Ok((ok, Value::Array(rows)))
}

pub fn disjointness(cfg: &VerifyConfig) -> Outcome {
    let rows = disjointness_sweep(2, 8, cfg.exec)?;
    let mismatches: Vec<(usize, usize)> = rows.iter().filter(|r| r.disjoint != r.coprime).map(|r| (r.p, r.q)).collect();
    let no_minimal = rows.iter().filter(|r| r.disjoint && !r.has_minimal_factor).count();
    let disjoint = rows.iter().filter(|r| r.disjoint).count();
    let ok = mismatches.is_empty() && no_minimal == 0;
    Ok((
        ok,
        json!({"pairs": rows.len(), "disjoint": disjoint, "mismatches": mismatches,
               "disjoint_without_minimal_factor": no_minimal}),
    ))
}

pub fn projection_inequality(cfg: &VerifyConfig) -> Outcome {
    let mut systems: Vec<FiniteSystem> = finite_catalog_fixtures().into_iter().map(|(_, s)| s).collect();
    systems.push(block_cycling(3)?);
    let seed = cfg.seed;
    let results = collect_errors(cfg.exec.map_range(0..10_000, |i| {
        let mut rng = instance_rng(seed, stream(5, i));
        let s = &systems[rng.gen_range(0..systems.len())];
        let a = random_subset(&mut rng, s.len(), 4)?;
        let u = rng.gen_range(0..s.len());
        let n = rng.gen_range(0..=64);
        projection_inequality_at(s, &a, u, n)
    }))?;
    let violations = results.iter().filter(|ok| !**ok).count();
    Ok((violations == 0, json!({"triples": results.len(), "horizon": 64, "violations": violations})))
}

pub fn cylinder_periodic_witnesses() -> Outcome {
    let mut failures = Vec::new();
    let mut found = 0usize;
    for u in CylinderSystem::Odometer.cylinders_up_to(6) {
        let expect = 1u64 << u.len();
        if cylinder_measure_period_in_truncation(&u)? != Some(expect as usize) {
            failures.push(format!("{u}: truncation period"));
        }
        for eps in [0.5, 0.1, 0.01] {
            match odometer_almost_dense_periodic_probe(&u, eps, 6)? {
                Some(w) if w.complement_mass == "0" && w.period == expect => found += 1,
                Some(w) => failures.push(format!("{u} eps={eps}: {} period {}", w.complement_mass, w.period)),
                None => failures.push(format!("{u} eps={eps}: no witness")),
            }
        }
    }
    Ok((failures.is_empty(), json!({"cases": 126 * 3, "witnesses": found, "failures": failures})))
}

pub fn density_curve(cfg: &VerifyConfig) -> Outcome {
    const DEPTH: u32 = 10;
    const RESOLUTION: usize = 10;
    let host = 1usize << DEPTH;
    let depths: Vec<u32> = (1..=8).collect();
    let seed = cfg.seed;
    let curves = collect_errors(cfg.exec.map_range(0..20, |t| {
        let mut rng = instance_rng(seed, stream(6, t));
        let y = rng.gen_range(0..host);
        // even targets cluster around y: atoms share its first 7 coordinates
        let atoms: Vec<(usize, Rational)> = (0..RESOLUTION)
            .map(|_| {
                let x = if t % 2 == 0 { y ^ (rng.gen_range(0..8usize) << 7) } else { rng.gen_range(0..host) };
                (x, Rational::new(1.into(), (RESOLUTION as u64).into()))
            })
            .collect();
        let target = AtomicMeasure::new(atoms, host)?;
        dense_periodic_measures_probe(&target, &depths)
    }))?;
    let monotone = curves.iter().all(|c| c.windows(2).all(|p| p[1].distance <= p[0].distance));
    let last: Vec<f64> = curves.iter().map(|c| c[c.len() - 1].distance).collect();
    let worst = last.iter().copied().fold(0.0, f64::max);
    let first = curves.iter().map(|c| c[0].distance).fold(0.0, f64::max);
    Ok((
        monotone && worst < 0.01,
        json!({"targets": curves.len(), "depths": depths, "monotone": monotone,
               "max_distance_at_depth_1": first, "max_distance_at_depth_8": worst}),
    ))
}

/// True when every record passed.
pub fn all_passed(records: &[CheckRecord]) -> bool {
    records.iter().all(CheckRecord::passed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_resolve() {
        assert_eq!(resolve_ids("all").unwrap().len(), CHECKS.len());
        assert_eq!(resolve_ids("lemma-2.2").unwrap(), vec!["lemma-2.2"]);
        assert_eq!(resolve_ids("nope").unwrap_err(), Error::UnknownCheck("nope".into()));
    }

    #[test]
    fn quick_checks_pass() {
        let cfg = VerifyConfig { seed: 1, exec: Exec::default() };
        for id in ["lemma-4.2", "example-3.3", "example-4.5", "def-4.7"] {
            assert!(run_check(id, &cfg).unwrap().passed(), "{id}");
        }
    }
}
