//! Joinings of finite systems and the disjointness decision.
//!
//! For permutations the closed invariant subsets of `X × Y` are exactly the
//! unions of product cycles, so the joinings are the unions of cycles whose
//! projections cover both factors.

use std::fmt::Write as _;

use num_integer::Integer;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hyperspace::{hausdorff_distance, induced_map_k, FiniteSubset};
use crate::par::Exec;
use crate::system::FiniteSystem;

/// Largest `|X|·|Y|` accepted by [`enumerate_joinings`].
pub const DEFAULT_JOINING_POINT_CAP: usize = 64;

/// Largest number of product cycles; the search visits `2^cycles` unions.
pub const MAX_PRODUCT_ORBITS: usize = 20;

/// The forward orbit of `seed`, which on a finite space is its closure.
pub fn orbit_closure(system: &FiniteSystem, seed: usize) -> Result<FiniteSubset> {
    let orbit = system.orbit(seed, system.len())?;
    FiniteSubset::new(orbit, system.len())
}

/// A closed invariant subset of `X × Y` projecting onto both factors.
/// Pair `(i, j)` has index `i·|Y| + j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(into = "Vec<usize>")]
pub struct Joining {
    pairs: Vec<usize>,
    #[serde(skip)]
    left_len: usize,
    #[serde(skip)]
    right_len: usize,
}

impl From<Joining> for Vec<usize> {
    fn from(j: Joining) -> Self {
        j.pairs
    }
}

impl Joining {
    pub fn pairs(&self) -> &[usize] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.pairs.len() == self.left_len * self.right_len
    }

    pub fn coordinates(&self) -> Vec<(usize, usize)> {
        self.pairs.iter().map(|&p| FiniteSystem::split_pair(p, self.right_len)).collect()
    }

    /// Re-checks every defining property from scratch: nonempty, mapped into
    /// itself by `T × S`, and onto both factors.
    pub fn verify(&self, x: &FiniteSystem, y: &FiniteSystem) -> bool {
        if self.pairs.is_empty() || x.len() != self.left_len || y.len() != self.right_len {
            return false;
        }
        let coords = self.coordinates();
        let invariant =
            coords.iter().all(|&(i, j)| self.pairs.binary_search(&(x.apply(i) * self.right_len + y.apply(j))).is_ok());
        let mut left = vec![false; self.left_len];
        let mut right = vec![false; self.right_len];
        for &(i, j) in &coords {
            left[i] = true;
            right[j] = true;
        }
        invariant && left.iter().all(|&b| b) && right.iter().all(|&b| b)
    }
}

/// All joinings of `x` and `y`, smallest first, then lexicographically.
/// The last entry is always `X × Y`.
pub fn enumerate_joinings(x: &FiniteSystem, y: &FiniteSystem) -> Result<Vec<Joining>> {
    enumerate_joinings_with(x, y, DEFAULT_JOINING_POINT_CAP, Exec::default())
}

pub fn enumerate_joinings_with(x: &FiniteSystem, y: &FiniteSystem, cap: usize, exec: Exec) -> Result<Vec<Joining>> {
    x.require_tds()?;
    y.require_tds()?;
    let product = x.product_capped(y, cap)?;
    let orbits = product.cycles();
    if orbits.len() > MAX_PRODUCT_ORBITS {
        return Err(Error::CapExceeded {
            what: "product orbits".into(),
            count: orbits.len() as u128,
            cap: MAX_PRODUCT_ORBITS as u128,
        });
    }
    let (n, m) = (x.len(), y.len());
    // per-orbit projection masks
    let shadows: Vec<(u64, u64)> = orbits
        .iter()
        .map(|o| {
            o.iter().fold((0u64, 0u64), |(l, r), &p| {
                let (i, j) = FiniteSystem::split_pair(p, m);
                (l | 1 << i, r | 1 << j)
            })
        })
        .collect();
    let (full_left, full_right) = (mask_of(n), mask_of(m));
    let chosen: Vec<Option<Joining>> = exec.map_range(1..1usize << orbits.len(), |set| {
        let (l, r) = (0..orbits.len())
            .filter(|k| set >> k & 1 == 1)
            .fold((0u64, 0u64), |(l, r), k| (l | shadows[k].0, r | shadows[k].1));
        if l != full_left || r != full_right {
            return None;
        }
        let mut pairs: Vec<usize> =
            (0..orbits.len()).filter(|k| set >> k & 1 == 1).flat_map(|k| orbits[k].iter().copied()).collect();
        pairs.sort_unstable();
        Some(Joining { pairs, left_len: n, right_len: m })
    });
    let mut out: Vec<Joining> = chosen.into_iter().flatten().collect();
    out.sort_by(|a, b| a.pairs.len().cmp(&b.pairs.len()).then_with(|| a.pairs.cmp(&b.pairs)));
    Ok(out)
}

fn mask_of(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Joinings that are a single orbit closure.
pub fn minimal_joinings(x: &FiniteSystem, y: &FiniteSystem) -> Result<Vec<Joining>> {
    let product = x.product_capped(y, DEFAULT_JOINING_POINT_CAP)?;
    let orbits = product.cycles();
    Ok(enumerate_joinings(x, y)?
        .into_iter()
        .filter(|j| orbits.iter().any(|o| o.len() == j.len() && j.pairs.binary_search(&o[0]).is_ok()))
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Disjointness {
    pub disjoint: bool,
    pub joinings: usize,
    /// The smallest proper joining, when one exists.
    pub witness: Option<Joining>,
}

pub fn is_disjoint(x: &FiniteSystem, y: &FiniteSystem) -> Result<Disjointness> {
    is_disjoint_with(x, y, Exec::default())
}

pub fn is_disjoint_with(x: &FiniteSystem, y: &FiniteSystem, exec: Exec) -> Result<Disjointness> {
    let all = enumerate_joinings_with(x, y, DEFAULT_JOINING_POINT_CAP, exec)?;
    let witness = all.iter().find(|j| !j.is_full()).cloned();
    Ok(Disjointness { disjoint: witness.is_none(), joinings: all.len(), witness })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepRow {
    pub p: usize,
    pub q: usize,
    pub disjoint: bool,
    pub witness_size: usize,
    pub coprime: bool,
    /// At least one of the two cycles is minimal, which every cycle is.
    pub has_minimal_factor: bool,
}

/// `is_disjoint(cycle(p), cycle(q))` over `lo ≤ p, q ≤ hi`.
pub fn disjointness_sweep(lo: usize, hi: usize, exec: Exec) -> Result<Vec<SweepRow>> {
    let pairs: Vec<(usize, usize)> = (lo..=hi).flat_map(|p| (lo..=hi).map(move |q| (p, q))).collect();
    exec.map_slice(&pairs, |&(p, q)| {
        let (x, y) = (FiniteSystem::cycle(p)?, FiniteSystem::cycle(q)?);
        let d = is_disjoint_with(&x, &y, Exec::Sequential)?;
        Ok(SweepRow {
            p,
            q,
            disjoint: d.disjoint,
            witness_size: d.witness.as_ref().map_or(0, Joining::len),
            coprime: p.gcd(&q) == 1,
            has_minimal_factor: x.cycles().len() == 1 || y.cycles().len() == 1,
        })
    })
    .into_iter()
    .collect()
}

/// `p,q,disjoint,witness_size` rows with a header.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("p,q,disjoint,witness_size\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", r.p, r.q, r.disjoint, r.witness_size);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProjectionCheck {
    pub comparisons: usize,
    pub violations: usize,
}

impl ProjectionCheck {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// `ρ(T^n x, u) ≤ d_H(T_K^n A, {u})` for all `x ∈ A` and `0 ≤ n ≤ horizon`.
pub fn projection_inequality_check(
    system: &FiniteSystem,
    a: &FiniteSubset,
    u: usize,
    horizon: usize,
) -> Result<ProjectionCheck> {
    system.check_index(u)?;
    let point = FiniteSubset::singleton(u, system.len())?;
    let mut image = a.clone();
    let mut points: Vec<usize> = a.elements().to_vec();
    let (mut comparisons, mut violations) = (0, 0);
    for _ in 0..=horizon {
        let rhs = hausdorff_distance(system, &image, &point)?;
        for &p in &points {
            comparisons += 1;
            if system.distance(p, u) > rhs {
                violations += 1;
            }
        }
        image = induced_map_k(system, &image)?;
        for p in &mut points {
            *p = system.apply(*p);
        }
    }
    Ok(ProjectionCheck { comparisons, violations })
}

/// The same inequality at a single time `n`.
pub fn projection_inequality_at(system: &FiniteSystem, a: &FiniteSubset, u: usize, n: usize) -> Result<bool> {
    system.check_index(u)?;
    let image = FiniteSubset::new(a.elements().iter().map(|&x| system.iterate(x, n)).collect(), system.len())?;
    let rhs = hausdorff_distance(system, &image, &FiniteSubset::singleton(u, system.len())?)?;
    Ok(a.elements().iter().all(|&x| system.distance(system.iterate(x, n), u) <= rhs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(p: usize) -> FiniteSystem {
        FiniteSystem::cycle(p).unwrap()
    }

    #[test]
    fn orbit_closures() {
        let p = cycle(2).product(&cycle(3)).unwrap();
        assert_eq!(orbit_closure(&p, 0).unwrap().len(), 6);
        let d = cycle(2).product(&cycle(2)).unwrap();
        assert_eq!(orbit_closure(&d, 0).unwrap().elements(), &[0, 3]);
        let f = FiniteSystem::trivial().product(&FiniteSystem::trivial()).unwrap();
        assert_eq!(orbit_closure(&f, 0).unwrap().len(), 1);
    }

    #[test]
    fn joinings_of_small_cycles() {
        let j = enumerate_joinings(&cycle(2), &cycle(3)).unwrap();
        assert_eq!(j.len(), 1);
        assert!(j[0].is_full());
        let j = enumerate_joinings(&cycle(2), &cycle(2)).unwrap();
        let sets: Vec<&[usize]> = j.iter().map(|j| j.pairs()).collect();
        assert_eq!(sets, vec![&[0, 3][..], &[1, 2][..], &[0, 1, 2, 3][..]]);
        assert!(j.iter().all(|j| j.verify(&cycle(2), &cycle(2))));
        assert_eq!(minimal_joinings(&cycle(2), &cycle(2)).unwrap().len(), 2);
        let j = enumerate_joinings(&cycle(4), &FiniteSystem::trivial()).unwrap();
        assert_eq!(j.len(), 1);
    }

    #[test]
    fn disjointness() {
        for p in 2..=8 {
            for q in 2..=8 {
                assert_eq!(is_disjoint(&cycle(p), &cycle(q)).unwrap().disjoint, p.gcd(&q) == 1);
            }
        }
        let self_join = is_disjoint(&cycle(3), &cycle(3)).unwrap();
        assert_eq!(self_join.witness.unwrap().pairs(), &[0, 4, 8]);
        assert!(is_disjoint(&FiniteSystem::trivial(), &cycle(7)).unwrap().disjoint);
        assert!(enumerate_joinings(&cycle(9), &cycle(9)).unwrap_err().is_cap());
    }

    #[test]
    fn sweep_output() {
        let rows = disjointness_sweep(2, 3, Exec::Sequential).unwrap();
        assert_eq!(sweep_csv(&rows), "p,q,disjoint,witness_size\n2,2,false,2\n2,3,true,0\n3,2,true,0\n3,3,false,3\n");
    }

    #[test]
    fn projection_inequality() {
        let s = crate::catalog::block_cycling(3).unwrap();
        let single = FiniteSubset::singleton(5, s.len()).unwrap();
        assert!(projection_inequality_check(&s, &single, 2, 64).unwrap().holds());
        let a = FiniteSubset::new(vec![0, 3, 9, 14], s.len()).unwrap();
        for u in 0..s.len() {
            assert!(projection_inequality_check(&s, &a, u, 64).unwrap().holds());
        }
    }
}
