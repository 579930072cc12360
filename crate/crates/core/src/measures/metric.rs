//! Metrics on `M(X)`: the Prohorov metric and the weighted series metric
//! `Σ_n |∫f_n dμ − ∫f_n dν| / (2^n (‖f_n‖ + 1))`.

use crate::error::{Error, Result};
use crate::par::Exec;
use crate::system::FiniteSystem;

use super::{same_host, AtomicMeasure, Mass};

/// Largest `|supp μ ∪ supp ν|` handled by the exhaustive subset check.
pub const PROHOROV_SUPPORT_CAP: usize = 20;

/// Width of the final bisection bracket.
pub const PROHOROV_TOLERANCE: f64 = 1e-10;

/// Slack for the floating mass comparisons in the feasibility test.
const MASS_SLACK: f64 = 1e-12;

/// `D(μ, ν) = inf{ε : μ(A) ≤ ν(A^ε)+ε and ν(A) ≤ μ(A^ε)+ε for all A}` with
/// `A^ε = {x : ρ(x, A) < ε}`.
///
/// Only subsets of the union of supports matter: outside it both measures
/// vanish, and enlarging `A` by massless points only enlarges `A^ε`. The
/// infimum is bracketed by bisection on `[0, 1]`; a result within the
/// bracket width of `0` or of a pairwise distance snaps to that value.
pub fn prohorov_distance<M: Mass>(system: &FiniteSystem, mu: &AtomicMeasure<M>, nu: &AtomicMeasure<M>) -> Result<f64> {
    prohorov_distance_with(system, mu, nu, PROHOROV_SUPPORT_CAP, Exec::default())
}

pub fn prohorov_distance_with<M: Mass>(
    system: &FiniteSystem,
    mu: &AtomicMeasure<M>,
    nu: &AtomicMeasure<M>,
    cap: usize,
    exec: Exec,
) -> Result<f64> {
    same_host(system.len(), mu.host())?;
    same_host(mu.host(), nu.host())?;
    let mut pts = mu.support();
    pts.extend(nu.support());
    pts.sort_unstable();
    pts.dedup();
    let s = pts.len();
    if s > cap.min(PROHOROV_SUPPORT_CAP) {
        return Err(Error::CapExceeded {
            what: "Prohorov support".into(),
            count: s as u128,
            cap: cap.min(PROHOROV_SUPPORT_CAP) as u128,
        });
    }
    if mu == nu {
        return Ok(0.0);
    }
    let a: Vec<f64> = pts.iter().map(|&p| mu.mass_at(p).to_f64()).collect();
    let b: Vec<f64> = pts.iter().map(|&p| nu.mass_at(p).to_f64()).collect();
    let dist: Vec<f64> = pts.iter().flat_map(|&i| pts.iter().map(move |&j| system.distance(i, j))).collect();

    let checker = SubsetChecker::new(&a, &b);
    let feasible = |eps: f64| {
        let nbr: Vec<u32> =
            (0..s).map(|i| (0..s).filter(|&j| dist[i * s + j] < eps).fold(0u32, |m, j| m | (1 << j))).collect();
        checker.feasible(&nbr, eps, exec)
    };

    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > PROHOROV_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let snap = std::iter::once(0.0).chain(dist.iter().copied()).chain(std::iter::once(1.0));
    let nearest = snap.min_by(|x, y| (x - hi).abs().total_cmp(&(y - hi).abs())).unwrap_or(hi);
    Ok(if (nearest - hi).abs() <= 2.0 * PROHOROV_TOLERANCE { nearest } else { hi })
}

/// Exhaustive check over all subsets of an `s`-point support, split into
/// low and high halves so that per-subset quantities are a sum (or union) of
/// two table lookups.
struct SubsetChecker {
    low_bits: usize,
    high_bits: usize,
    a_low: Vec<f64>,
    a_high: Vec<f64>,
    b_low: Vec<f64>,
    b_high: Vec<f64>,
}

impl SubsetChecker {
    fn new(a: &[f64], b: &[f64]) -> Self {
        let s = a.len();
        let low_bits = s / 2;
        let high_bits = s - low_bits;
        SubsetChecker {
            low_bits,
            high_bits,
            a_low: subset_sums(&a[..low_bits]),
            a_high: subset_sums(&a[low_bits..]),
            b_low: subset_sums(&b[..low_bits]),
            b_high: subset_sums(&b[low_bits..]),
        }
    }

    fn mass(&self, low: &[f64], high: &[f64], mask: u32) -> f64 {
        let lm = (1u32 << self.low_bits) - 1;
        low[(mask & lm) as usize] + high[(mask >> self.low_bits) as usize]
    }

    fn feasible(&self, nbr: &[u32], eps: f64, exec: Exec) -> bool {
        let low_nbr = subset_unions(&nbr[..self.low_bits]);
        let high_nbr = subset_unions(&nbr[self.low_bits..]);
        let low_count = 1usize << self.low_bits;
        exec.all_range(0..1usize << self.high_bits, |h| {
            (0..low_count).all(|l| {
                let mask = ((h << self.low_bits) | l) as u32;
                let grown = low_nbr[l] | high_nbr[h];
                let (ma, mb) = (self.mass(&self.a_low, &self.a_high, mask), self.mass(&self.b_low, &self.b_high, mask));
                let (ga, gb) =
                    (self.mass(&self.a_low, &self.a_high, grown), self.mass(&self.b_low, &self.b_high, grown));
                ma <= gb + eps + MASS_SLACK && mb <= ga + eps + MASS_SLACK
            })
        })
    }
}

fn subset_sums(w: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; 1 << w.len()];
    for mask in 1..out.len() {
        let low = mask.trailing_zeros() as usize;
        out[mask] = out[mask & (mask - 1)] + w[low];
    }
    out
}

fn subset_unions(n: &[u32]) -> Vec<u32> {
    let mut out = vec![0u32; 1 << n.len()];
    for mask in 1..out.len() {
        let low = mask.trailing_zeros() as usize;
        out[mask] = out[mask & (mask - 1)] | n[low];
    }
    out
}

/// An ordered family `f_1, f_2, …` of real functions on the host space.
#[derive(Clone, Debug, PartialEq)]
pub enum FunctionFamily {
    /// Point indicators `1_{x_0}, …, 1_{x_{N−1}}`, then distance functions
    /// `ρ(·, x_0), …, ρ(·, x_{N−1})`.
    Default,
    /// Indicators of the cylinders of length `1..=depth` on an odometer
    /// truncation of the same depth, shortest first, then by LSB-first value.
    CylinderIndicators { depth: u32 },
    /// Explicit values; each function must give a finite value at every point.
    Explicit(Vec<Vec<f64>>),
}

impl FunctionFamily {
    fn validate(&self, host: usize) -> Result<()> {
        match self {
            FunctionFamily::Default => Ok(()),
            FunctionFamily::CylinderIndicators { depth } => {
                if *depth == 0 || *depth >= usize::BITS || 1usize << depth != host {
                    Err(Error::BadFamily(format!("cylinder family of depth {depth} on {host} points")))
                } else {
                    Ok(())
                }
            }
            FunctionFamily::Explicit(fs) => {
                if fs.is_empty() {
                    return Err(Error::BadFamily("empty family".into()));
                }
                for (n, f) in fs.iter().enumerate() {
                    if f.len() != host {
                        return Err(Error::BadFamily(format!("f_{} has {} values for {host} points", n + 1, f.len())));
                    }
                    if let Some(x) = f.iter().position(|v| !v.is_finite()) {
                        return Err(Error::BadFamily(format!("f_{} is undefined at point {x}", n + 1)));
                    }
                }
                Ok(())
            }
        }
    }
}

/// `Σ_n |∫f_n dμ − ∫f_n dν| / (2^n (‖f_n‖ + 1))`, summed in family order.
///
/// Terms with `2^n` beyond the `f64` range are exactly zero and are skipped.
pub fn series_metric<M: Mass>(
    system: &FiniteSystem,
    mu: &AtomicMeasure<M>,
    nu: &AtomicMeasure<M>,
    family: &FunctionFamily,
) -> Result<f64> {
    same_host(system.len(), mu.host())?;
    same_host(mu.host(), nu.host())?;
    let host = system.len();
    family.validate(host)?;
    let a: Vec<(usize, f64)> = mu.atoms().map(|(k, m)| (k, m.to_f64())).collect();
    let b: Vec<(usize, f64)> = nu.atoms().map(|(k, m)| (k, m.to_f64())).collect();
    let integral = |w: &[(usize, f64)], f: &dyn Fn(usize) -> f64| w.iter().map(|&(k, m)| m * f(k)).sum::<f64>();

    let mut total = 0.0;
    let mut scale = 1.0f64;
    let mut term = |f: &dyn Fn(usize) -> f64, norm: f64| -> bool {
        scale *= 2.0;
        if !scale.is_finite() {
            return false;
        }
        let diff = (integral(&a, f) - integral(&b, f)).abs();
        total += diff / (scale * (norm + 1.0));
        true
    };

    match family {
        FunctionFamily::Default => {
            for x in 0..host {
                let ind = move |k: usize| if k == x { 1.0 } else { 0.0 };
                if !term(&ind, 1.0) {
                    return Ok(total);
                }
            }
            for p in 0..host {
                let f = |k: usize| system.distance(k, p);
                let norm = (0..host).map(|k| system.distance(k, p)).fold(0.0, f64::max);
                if !term(&f, norm) {
                    return Ok(total);
                }
            }
        }
        FunctionFamily::CylinderIndicators { depth } => {
            // ∫ 1_[C] dμ is the mass of one residue class, so each length
            // needs a single pass over the atoms.
            for len in 1..=*depth {
                let modulus = 1usize << len;
                let buckets = |w: &[(usize, f64)]| {
                    let mut out = vec![0.0; modulus];
                    for &(k, m) in w {
                        out[k % modulus] += m;
                    }
                    out
                };
                let (ba, bb) = (buckets(&a), buckets(&b));
                for value in 0..modulus {
                    scale *= 2.0;
                    if !scale.is_finite() {
                        return Ok(total);
                    }
                    total += (ba[value] - bb[value]).abs() / (scale * 2.0);
                }
            }
        }
        FunctionFamily::Explicit(fs) => {
            for f in fs {
                let norm = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if !term(&|k: usize| f[k], norm) {
                    return Ok(total);
                }
            }
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{ratio, Rational};
    use crate::system::Metric;

    fn two_points() -> FiniteSystem {
        FiniteSystem::new(vec![1, 0], Metric::Matrix { n: 2, data: vec![0.0, 1.0, 1.0, 0.0] }, true).unwrap()
    }

    /// Brute-force oracle: scan a fine ε grid over all subsets of the host,
    /// straight from the definition.
    fn prohorov_grid(system: &FiniteSystem, a: &[f64], b: &[f64], steps: usize) -> f64 {
        let n = system.len();
        for k in 0..=steps {
            let eps = k as f64 / steps as f64;
            let ok = (1u32..1 << n).all(|mask| {
                let inside = |x: usize| mask & (1 << x) != 0;
                let grown = |x: usize| (0..n).any(|y| inside(y) && system.distance(x, y) < eps);
                let mass = |w: &[f64], f: &dyn Fn(usize) -> bool| (0..n).filter(|&x| f(x)).map(|x| w[x]).sum::<f64>();
                mass(a, &inside) <= mass(b, &grown) + eps + 1e-12 && mass(b, &inside) <= mass(a, &grown) + eps + 1e-12
            });
            if ok {
                return eps;
            }
        }
        1.0
    }

    #[test]
    fn dirac_pair_at_unit_distance() {
        let s = two_points();
        let d0: AtomicMeasure = AtomicMeasure::dirac(0, 2).unwrap();
        let d1: AtomicMeasure = AtomicMeasure::dirac(1, 2).unwrap();
        assert_eq!(prohorov_distance(&s, &d0, &d1).unwrap(), 1.0);
        assert_eq!(prohorov_grid(&s, &[1.0, 0.0], &[0.0, 1.0], 1000), 1.0);
        assert_eq!(prohorov_distance(&s, &d0, &d0).unwrap(), 0.0);
    }

    #[test]
    fn dirac_against_half_mixture() {
        let s = two_points();
        let d0: AtomicMeasure = AtomicMeasure::dirac(0, 2).unwrap();
        let half = AtomicMeasure::new(vec![(0, ratio(1, 2)), (1, ratio(1, 2))], 2).unwrap();
        let d = prohorov_distance(&s, &d0, &half).unwrap();
        assert!((d - 0.5).abs() <= 1e-9, "{d}");
        assert_eq!(prohorov_grid(&s, &[1.0, 0.0], &[0.5, 0.5], 1000), 0.5);
    }

    #[test]
    fn matches_grid_oracle_on_a_line() {
        let s = FiniteSystem::new(vec![0, 1, 2, 3], Metric::Line(vec![0.0, 0.13, 0.4, 0.91]), true).unwrap();
        let mu = AtomicMeasure::new(vec![(0, ratio(1, 4)), (2, ratio(3, 4))], 4).unwrap();
        let nu = AtomicMeasure::new(vec![(1, ratio(1, 2)), (3, ratio(1, 2))], 4).unwrap();
        let d = prohorov_distance(&s, &mu, &nu).unwrap();
        let grid = prohorov_grid(&s, &mu.to_f64_vec(), &nu.to_f64_vec(), 10_000);
        assert!(d <= grid + 1e-9 && grid - d <= 1e-4, "{d} vs {grid}");
    }

    #[test]
    fn support_cap() {
        let c = FiniteSystem::cycle(30).unwrap();
        let all: Vec<usize> = (0..30).collect();
        let u: AtomicMeasure = AtomicMeasure::uniform(&all, 30).unwrap();
        let d: AtomicMeasure = AtomicMeasure::dirac(0, 30).unwrap();
        assert!(prohorov_distance(&c, &u, &d).unwrap_err().is_cap());
    }

    #[test]
    fn series_four_terms() {
        let s = two_points();
        let d0: AtomicMeasure = AtomicMeasure::dirac(0, 2).unwrap();
        let d1: AtomicMeasure = AtomicMeasure::dirac(1, 2).unwrap();
        // independent hand summation of the four terms
        let oracle = 1.0 / (2.0 * 2.0) + 1.0 / (4.0 * 2.0) + 1.0 / (8.0 * 2.0) + 1.0 / (16.0 * 2.0);
        assert_eq!(oracle, 0.46875);
        assert_eq!(series_metric(&s, &d0, &d1, &FunctionFamily::Default).unwrap(), 0.46875);
        assert_eq!(series_metric(&s, &d0, &d0, &FunctionFamily::Default).unwrap(), 0.0);
    }

    #[test]
    fn series_family_errors() {
        let s = two_points();
        let d0: AtomicMeasure<Rational> = AtomicMeasure::dirac(0, 2).unwrap();
        let bad = FunctionFamily::Explicit(vec![vec![1.0]]);
        assert!(matches!(series_metric(&s, &d0, &d0, &bad), Err(Error::BadFamily(_))));
        let nan = FunctionFamily::Explicit(vec![vec![1.0, f64::NAN]]);
        assert!(matches!(series_metric(&s, &d0, &d0, &nan), Err(Error::BadFamily(_))));
        let ok = FunctionFamily::Explicit(vec![vec![2.0, -1.0]]);
        let d1: AtomicMeasure<Rational> = AtomicMeasure::dirac(1, 2).unwrap();
        assert_eq!(series_metric(&s, &d0, &d1, &ok).unwrap(), 3.0 / (2.0 * 3.0));
    }

    #[test]
    fn cylinder_family_matches_explicit_indicators() {
        let t = crate::cylinder::odometer_truncation(4).unwrap();
        let mut fs = Vec::new();
        for len in 1..=4u32 {
            let m = 1usize << len;
            for v in 0..m {
                fs.push((0..16).map(|k| if k % m == v { 1.0 } else { 0.0 }).collect());
            }
        }
        let mu = AtomicMeasure::new(vec![(1, ratio(1, 3)), (6, ratio(1, 6)), (11, ratio(1, 2))], 16).unwrap();
        let nu = AtomicMeasure::new(vec![(0, ratio(3, 4)), (9, ratio(1, 4))], 16).unwrap();
        let fast = series_metric(&t, &mu, &nu, &FunctionFamily::CylinderIndicators { depth: 4 }).unwrap();
        let slow = series_metric(&t, &mu, &nu, &FunctionFamily::Explicit(fs)).unwrap();
        assert!((fast - slow).abs() <= 1e-15, "{fast} vs {slow}");
    }

    #[test]
    fn series_on_large_space_terminates() {
        let s = crate::catalog::block_cycling(12).unwrap();
        let d0: AtomicMeasure = AtomicMeasure::dirac(0, s.len()).unwrap();
        let d1: AtomicMeasure = AtomicMeasure::dirac(1, s.len()).unwrap();
        let v = series_metric(&s, &d0, &d1, &FunctionFamily::Default).unwrap();
        assert!(v > 0.0 && v.is_finite());
    }
}
