//! The induced hyperspace system `(K(X), T_K)` on a finite space.
//!
//! Every subset of a finite metric space is closed and open, so `K(X)` is the
//! set of nonempty subsets and a Vietoris basis element may use arbitrary
//! nonempty subsets as its opens.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::system::FiniteSystem;

/// Default cap on the number of subsets [`enumerate_kn`] may produce.
pub const DEFAULT_KN_CAP: u128 = 1 << 20;

/// A point of `K(X)`: a nonempty set of point indices, kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(into = "Vec<usize>")]
pub struct FiniteSubset {
    elements: Vec<usize>,
    #[serde(skip)]
    host: usize,
}

impl From<FiniteSubset> for Vec<usize> {
    fn from(s: FiniteSubset) -> Self {
        s.elements
    }
}

impl FiniteSubset {
    pub fn new(mut elements: Vec<usize>, host: usize) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::Empty("subsets of K(X) are nonempty".into()));
        }
        elements.sort_unstable();
        elements.dedup();
        if let Some(&index) = elements.last().filter(|&&e| e >= host) {
            return Err(Error::IndexOutOfRange { index, len: host });
        }
        Ok(FiniteSubset { elements, host })
    }

    pub fn singleton(x: usize, host: usize) -> Result<Self> {
        Self::new(vec![x], host)
    }

    pub fn full(host: usize) -> Result<Self> {
        Self::new((0..host).collect(), host)
    }

    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn host(&self) -> usize {
        self.host
    }

    pub fn contains(&self, x: usize) -> bool {
        self.elements.binary_search(&x).is_ok()
    }

    pub fn union(&self, other: &FiniteSubset) -> Result<FiniteSubset> {
        same_host(self.host, other.host)?;
        let mut e = self.elements.clone();
        e.extend_from_slice(&other.elements);
        FiniteSubset::new(e, self.host)
    }

    pub fn is_subset_of(&self, other: &FiniteSubset) -> bool {
        self.elements.iter().all(|&x| other.contains(x))
    }

    fn check_host(&self, system: &FiniteSystem) -> Result<()> {
        same_host(self.host, system.len())
    }
}

fn same_host(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::HostMismatch { left, right })
    }
}

/// `⟨U_1, …, U_n⟩`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(into = "Vec<Vec<usize>>")]
pub struct VietorisBasisElement {
    opens: Vec<Vec<usize>>,
    #[serde(skip)]
    host: usize,
}

impl From<VietorisBasisElement> for Vec<Vec<usize>> {
    fn from(v: VietorisBasisElement) -> Self {
        v.opens
    }
}

impl VietorisBasisElement {
    pub fn new(opens: Vec<Vec<usize>>, host: usize) -> Result<Self> {
        if opens.is_empty() {
            return Err(Error::Empty("a Vietoris basis element needs at least one open set".into()));
        }
        let opens = opens.into_iter().map(|u| FiniteSubset::new(u, host).map(Vec::from)).collect::<Result<Vec<_>>>()?;
        Ok(VietorisBasisElement { opens, host })
    }

    pub fn opens(&self) -> &[Vec<usize>] {
        &self.opens
    }
}

/// `d_H(A, B) = max(max_{x∈A} min_{y∈B} ρ(x,y), max_{y∈B} min_{x∈A} ρ(x,y))`.
pub fn hausdorff_distance(system: &FiniteSystem, a: &FiniteSubset, b: &FiniteSubset) -> Result<f64> {
    a.check_host(system)?;
    b.check_host(system)?;
    Ok(directed(system, a, b).max(directed(system, b, a)))
}

fn directed(system: &FiniteSystem, from: &FiniteSubset, to: &FiniteSubset) -> f64 {
    from.elements
        .iter()
        .map(|&x| to.elements.iter().map(|&y| system.distance(x, y)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

/// `T_K(A) = T(A)`.
pub fn induced_map_k(system: &FiniteSystem, a: &FiniteSubset) -> Result<FiniteSubset> {
    a.check_host(system)?;
    FiniteSubset::new(a.elements.iter().map(|&x| system.apply(x)).collect(), a.host)
}

/// `A ∈ ⟨U_1, …, U_n⟩` iff `A ⊆ ⋃U_i` and `A ∩ U_i ≠ ∅` for each `i`.
pub fn vietoris_contains(a: &FiniteSubset, v: &VietorisBasisElement) -> Result<bool> {
    same_host(a.host, v.host)?;
    let covered = a.elements.iter().all(|x| v.opens.iter().any(|u| u.binary_search(x).is_ok()));
    let meets = v.opens.iter().all(|u| u.iter().any(|&x| a.contains(x)));
    Ok(covered && meets)
}

/// `Σ_{k=1}^{min(n,N)} C(N, k)`, saturating.
pub fn kn_count(points: usize, n: usize) -> u128 {
    let mut total: u128 = 0;
    let mut binom: u128 = 1;
    for k in 1..=n.min(points) {
        binom = binom.saturating_mul((points - k + 1) as u128) / k as u128;
        total = total.saturating_add(binom);
    }
    total
}

/// All nonempty subsets of size at most `n`, by size then lexicographically.
pub fn enumerate_kn(system: &FiniteSystem, n: usize) -> Result<Vec<FiniteSubset>> {
    enumerate_kn_capped(system, n, DEFAULT_KN_CAP)
}

pub fn enumerate_kn_capped(system: &FiniteSystem, n: usize, cap: u128) -> Result<Vec<FiniteSubset>> {
    if n == 0 {
        return Err(Error::InvalidField { field: "n".into(), reason: "must be at least 1".into() });
    }
    let points = system.len();
    let count = kn_count(points, n);
    if count > cap {
        return Err(Error::CapExceeded { what: format!("K_{n} enumeration"), count, cap });
    }
    let mut out = Vec::with_capacity(count as usize);
    for k in 1..=n.min(points) {
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            out.push(FiniteSubset { elements: idx.clone(), host: points });
            // advance to the next k-combination
            let mut i = k;
            while i > 0 && idx[i - 1] == points - k + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for j in i..k {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    Ok(out)
}

/// Least `p ≤ bound` with `T_K^p(A) = A`.
pub fn period_of_set(system: &FiniteSystem, a: &FiniteSubset, bound: usize) -> Result<Option<usize>> {
    system.require_tds()?;
    a.check_host(system)?;
    let mut cur = a.elements.clone();
    let mut scratch = Vec::with_capacity(cur.len());
    for p in 1..=bound {
        scratch.clear();
        scratch.extend(cur.iter().map(|&x| system.apply(x)));
        scratch.sort_unstable();
        scratch.dedup();
        std::mem::swap(&mut cur, &mut scratch);
        if cur == a.elements {
            return Ok(Some(p));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{block_cycling, block_cycling_set};
    use crate::system::Metric;

    fn two_points() -> FiniteSystem {
        FiniteSystem::new(vec![1, 0], Metric::Matrix { n: 2, data: vec![0.0, 1.0, 1.0, 0.0] }, true).unwrap()
    }

    #[test]
    fn hausdorff_examples() {
        let s = two_points();
        let a = FiniteSubset::singleton(0, 2).unwrap();
        let ab = FiniteSubset::full(2).unwrap();
        assert_eq!(hausdorff_distance(&s, &a, &a).unwrap(), 0.0);
        assert_eq!(hausdorff_distance(&s, &a, &ab).unwrap(), 1.0);
        assert_eq!(hausdorff_distance(&s, &ab, &a).unwrap(), 1.0);
        let other = FiniteSubset::singleton(0, 3).unwrap();
        assert!(matches!(hausdorff_distance(&s, &a, &other), Err(Error::HostMismatch { .. })));
    }

    #[test]
    fn induced_map_examples() {
        let c2 = FiniteSystem::cycle(2).unwrap();
        let full = FiniteSubset::full(2).unwrap();
        assert_eq!(induced_map_k(&c2, &full).unwrap(), full);
        let x = FiniteSubset::singleton(0, 2).unwrap();
        assert_eq!(induced_map_k(&c2, &x).unwrap().elements(), &[1]);
    }

    #[test]
    fn vietoris_examples() {
        let (p, q, r) = (0, 1, 2);
        let v = VietorisBasisElement::new(vec![vec![p], vec![q]], 3).unwrap();
        assert!(vietoris_contains(&FiniteSubset::new(vec![p, q], 3).unwrap(), &v).unwrap());
        assert!(!vietoris_contains(&FiniteSubset::singleton(p, 3).unwrap(), &v).unwrap());
        let v1 = VietorisBasisElement::new(vec![vec![p, q]], 3).unwrap();
        assert!(!vietoris_contains(&FiniteSubset::new(vec![p, q, r], 3).unwrap(), &v1).unwrap());
        assert!(VietorisBasisElement::new(vec![], 3).is_err());
        assert!(VietorisBasisElement::new(vec![vec![]], 3).is_err());
    }

    #[test]
    fn kn_enumeration_counts() {
        let c3 = FiniteSystem::cycle(3).unwrap();
        assert_eq!(enumerate_kn(&c3, 2).unwrap().len(), 6);
        assert_eq!(enumerate_kn(&c3, 3).unwrap().len(), 7);
        let singles = enumerate_kn(&c3, 1).unwrap();
        assert_eq!(singles.iter().map(|s| s.elements()[0]).collect::<Vec<_>>(), vec![0, 1, 2]);
        let c30 = FiniteSystem::cycle(30).unwrap();
        let err = enumerate_kn(&c30, 30).unwrap_err();
        assert!(err.is_cap());
        assert!(err.to_string().contains("1073741823"), "{err}");
    }

    #[test]
    fn kn_enumeration_is_exhaustive_and_unique() {
        let c6 = FiniteSystem::cycle(6).unwrap();
        let all = enumerate_kn(&c6, 6).unwrap();
        assert_eq!(all.len(), 63);
        let mut sorted = all.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 63);
    }

    #[test]
    fn set_periods() {
        let s = block_cycling(3).unwrap();
        let k = block_cycling_set(3).unwrap();
        assert_eq!(k.elements(), &[0, 1, 2, 4, 8]);
        assert_eq!(period_of_set(&s, &k, 100).unwrap(), Some(8));
        assert_eq!(period_of_set(&s, &k, 7).unwrap(), None);
        let x = FiniteSubset::singleton(5, s.len()).unwrap();
        assert_eq!(period_of_set(&s, &x, 100).unwrap(), s.period(5));
    }
}
