//! Conditional-measure identities: decomposition over a partition, the
//! perturbation bound `d(μ_A, μ_B) ≤ 2ε`, and compatibility with factor maps.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hyperspace::FiniteSubset;
use crate::system::{FactorMap, FiniteSystem};

use super::metric::{series_metric, FunctionFamily};
use super::{conditional, conditional_on, pushforward_by, same_host, AtomicMeasure, Mass};

/// `μ(A △ B)`.
pub fn symmetric_difference_mass<M: Mass>(mu: &AtomicMeasure<M>, a: &FiniteSubset, b: &FiniteSubset) -> Result<M> {
    same_host(mu.host(), a.host())?;
    same_host(mu.host(), b.host())?;
    let only_a = a.elements().iter().filter(|&&x| !b.contains(x));
    let only_b = b.elements().iter().filter(|&&x| !a.contains(x));
    Ok(only_a.chain(only_b).map(|&x| mu.mass_at(x)).fold(M::zero(), |s, m| s + m))
}

/// Checks `μ_A = Σ_i (μ(A_i)/μ(A)) μ_{A_i}` for `A = ⋃ A_i`.
///
/// The parts must carry positive mass and overlap only on null sets.
pub fn decomposition_identity<M: Mass>(mu: &AtomicMeasure<M>, parts: &[FiniteSubset]) -> Result<bool> {
    if parts.is_empty() {
        return Err(Error::Empty("decomposition over no parts".into()));
    }
    for p in parts {
        same_host(mu.host(), p.host())?;
    }
    for (i, p) in parts.iter().enumerate() {
        for q in &parts[i + 1..] {
            let overlap = p.elements().iter().filter(|&&x| q.contains(x)).map(|&x| mu.mass_at(x));
            if overlap.fold(M::zero(), |s, m| s + m) > M::zero() {
                return Err(Error::InvalidMeasure("parts overlap on a set of positive mass".into()));
            }
        }
    }
    let union = parts[1..].iter().try_fold(parts[0].clone(), |acc, p| acc.union(p))?;
    let lhs = conditional(mu, &union)?;
    let total = mu.mass_of_subset(&union);
    let mut terms = Vec::new();
    for p in parts {
        let w = mu.mass_of_subset(p) / total.clone();
        let c = conditional(mu, p)?;
        terms.extend(c.atoms().map(|(k, m)| (k, m.clone() * w.clone())));
    }
    let rhs = AtomicMeasure::new(terms, mu.host())?;
    Ok(lhs == rhs)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerturbationCheck {
    /// `d(μ_A, μ_B)` in the chosen function family.
    pub distance: f64,
    /// `ε' = μ(A △ B)/μ(A)`.
    pub ratio: f64,
    /// The declared `ε`.
    pub epsilon: f64,
    /// Whether `μ(A △ B) < μ(A)·ε`.
    pub hypothesis_holds: bool,
    /// `distance ≤ 2ε`, asserted only when the hypothesis holds.
    pub bound_holds: Option<bool>,
}

/// Evaluate both sides of the perturbation bound for `μ_A` and `μ_B`.
pub fn conditional_perturbation_check<M: Mass>(
    system: &FiniteSystem,
    mu: &AtomicMeasure<M>,
    a: &FiniteSubset,
    b: &FiniteSubset,
    epsilon: f64,
    family: &FunctionFamily,
) -> Result<PerturbationCheck> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidField { field: "epsilon".into(), reason: "must be positive".into() });
    }
    let mu_a = conditional(mu, a)?;
    let mu_b = conditional(mu, b)?;
    let ratio = (symmetric_difference_mass(mu, a, b)? / mu.mass_of_subset(a)).to_f64();
    let distance = series_metric(system, &mu_a, &mu_b, family)?;
    let hypothesis_holds = ratio < epsilon;
    Ok(PerturbationCheck {
        distance,
        ratio,
        epsilon,
        hypothesis_holds,
        bound_holds: hypothesis_holds.then_some(distance <= 2.0 * epsilon),
    })
}

/// `π(μ_{π^{-1}A}) = (πμ)_A`, compared exactly.
pub fn pushforward_conditional_check<M: Mass>(factor: &FactorMap, mu: &AtomicMeasure<M>, a: &[usize]) -> Result<bool> {
    same_host(factor.source_len(), mu.host())?;
    if let Some(&index) = a.iter().find(|&&y| y >= factor.target_len()) {
        return Err(Error::IndexOutOfRange { index, len: factor.target_len() });
    }
    let lhs = pushforward_by(factor, &conditional_on(mu, &factor.preimage(a))?)?;
    let mut a = a.to_vec();
    a.sort_unstable();
    a.dedup();
    let rhs = conditional_on(&pushforward_by(factor, mu)?, &a)?;
    Ok(lhs == rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{ratio, Rational};

    fn set(e: &[usize], host: usize) -> FiniteSubset {
        FiniteSubset::new(e.to_vec(), host).unwrap()
    }

    #[test]
    fn decomposition_on_uniform() {
        let mu: AtomicMeasure = AtomicMeasure::uniform(&[0, 1, 2, 3], 4).unwrap();
        assert!(decomposition_identity(&mu, &[set(&[0], 4), set(&[1, 2], 4)]).unwrap());
        // hand oracle: μ_A = (1/3)δ_0 + (2/3)·uniform{1,2}
        let a = conditional(&mu, &set(&[0, 1, 2], 4)).unwrap();
        assert_eq!(a.mass_at(0), ratio(1, 3));
        assert_eq!(a.mass_at(2), ratio(1, 3));
        assert!(decomposition_identity(&mu, &[set(&[0, 1], 4), set(&[1], 4)]).is_err());
    }

    #[test]
    fn perturbation_examples() {
        let c10 = FiniteSystem::cycle(10).unwrap();
        let all: Vec<usize> = (0..10).collect();
        let mu: AtomicMeasure = AtomicMeasure::uniform(&all, 10).unwrap();
        let a = set(&[0, 1, 2, 3, 4], 10);
        let b = set(&[0, 1, 2, 3, 4, 5], 10);
        let r = conditional_perturbation_check(&c10, &mu, &a, &b, 0.25, &FunctionFamily::Default).unwrap();
        assert!((r.ratio - 0.2).abs() < 1e-15);
        assert!(r.hypothesis_holds);
        assert_eq!(r.bound_holds, Some(true));
        let same = conditional_perturbation_check(&c10, &mu, &a, &a, 1e-9, &FunctionFamily::Default).unwrap();
        assert_eq!(same.distance, 0.0);
        assert_eq!(same.bound_holds, Some(true));
        assert_eq!(symmetric_difference_mass(&mu, &a, &b).unwrap(), ratio(1, 10));
    }

    #[test]
    fn factor_compatibility() {
        let f = FactorMap::cycle_reduction(4, 2).unwrap();
        let mu: AtomicMeasure = AtomicMeasure::uniform(&[0, 1, 2, 3], 4).unwrap();
        assert!(pushforward_conditional_check(&f, &mu, &[0]).unwrap());
        let id = FactorMap::identity(&FiniteSystem::cycle(3).unwrap());
        let nu = AtomicMeasure::new(vec![(0, ratio(1, 6)), (2, ratio(5, 6))], 3).unwrap();
        assert!(pushforward_conditional_check(&id, &nu, &[0, 1]).unwrap());
        let d: AtomicMeasure<Rational> = AtomicMeasure::dirac(0, 4).unwrap();
        assert_eq!(pushforward_conditional_check(&f, &d, &[1]).unwrap_err(), Error::ZeroMass);
    }
}
