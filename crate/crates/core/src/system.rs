//! Finite dynamical systems: a finite metric space with a self-map.

use std::sync::Arc;

use num_integer::Integer;

use crate::error::{Error, Result};

/// Relative slack allowed when validating the triangle inequality on
/// floating metric data.
const TRIANGLE_SLACK: f64 = 1e-12;

/// Default cap on the number of points a product may materialize.
pub const DEFAULT_PRODUCT_CAP: usize = 1 << 16;

/// Metric on the point set `0..n`.
///
/// Large catalog spaces use closed-form metrics so that nothing of size
/// `n²` is ever allocated.
#[derive(Clone, Debug, PartialEq)]
pub enum Metric {
    /// Dense row-major distance matrix.
    Matrix { n: usize, data: Vec<f64> },
    /// Points on the real line, `ρ(i, j) = |x_i − x_j|`.
    Line(Vec<f64>),
    /// Binary words of length `depth` encoded LSB-first as integers;
    /// `ρ(x, y) = 2^{-k}` where `k` is the length of the longest common prefix.
    Dyadic { depth: u32 },
    /// Max-coordinate metric on a product; index `i` is the pair
    /// `(i / right_len, i % right_len)`.
    Product { left: Arc<Metric>, right: Arc<Metric>, right_len: usize },
    /// Disjoint union; cross distances are the constant `gap`.
    Union { left: Arc<Metric>, right: Arc<Metric>, left_len: usize, gap: f64 },
}

impl Metric {
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        match self {
            Metric::Matrix { n, data } => data[i * n + j],
            Metric::Line(xs) => (xs[i] - xs[j]).abs(),
            Metric::Dyadic { .. } => {
                if i == j {
                    0.0
                } else {
                    let common = (i ^ j).trailing_zeros() as i32;
                    (2.0f64).powi(-common)
                }
            }
            Metric::Product { left, right, right_len } => {
                let l = left.distance(i / right_len, j / right_len);
                let r = right.distance(i % right_len, j % right_len);
                l.max(r)
            }
            Metric::Union { left, right, left_len, gap } => match (i < *left_len, j < *left_len) {
                (true, true) => left.distance(i, j),
                (false, false) => right.distance(i - left_len, j - left_len),
                _ => *gap,
            },
        }
    }

    fn diameter(&self, n: usize) -> f64 {
        match self {
            Metric::Matrix { data, .. } => data.iter().copied().fold(0.0, f64::max),
            Metric::Line(xs) => {
                let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if xs.is_empty() {
                    0.0
                } else {
                    hi - lo
                }
            }
            Metric::Dyadic { .. } => {
                if n > 1 {
                    1.0
                } else {
                    0.0
                }
            }
            Metric::Product { left, right, right_len } => left.diameter(n / right_len).max(right.diameter(*right_len)),
            Metric::Union { left, right, left_len, gap } => left
                .diameter(*left_len)
                .max(right.diameter(n - left_len))
                .max(if *left_len > 0 && n > *left_len { *gap } else { 0.0 }),
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        match self {
            Metric::Matrix { n: m, data } => {
                if *m != n || data.len() != n * n {
                    return Err(Error::InvalidField {
                        field: "metric.data".into(),
                        reason: format!("expected a {n}x{n} matrix"),
                    });
                }
                validate_matrix(n, |i, j| data[i * n + j])
            }
            Metric::Line(xs) => {
                if xs.len() != n {
                    return Err(Error::InvalidField {
                        field: "metric.data".into(),
                        reason: format!("expected {n} coordinates, got {}", xs.len()),
                    });
                }
                if let Some(i) = xs.iter().position(|x| !x.is_finite()) {
                    return Err(Error::MetricAxiom { i, j: i, reason: "non-finite coordinate".into() });
                }
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
                for w in order.windows(2) {
                    if xs[w[0]] == xs[w[1]] {
                        let (i, j) = (w[0].min(w[1]), w[0].max(w[1]));
                        return Err(Error::MetricAxiom { i, j, reason: "distinct points at distance 0".into() });
                    }
                }
                Ok(())
            }
            Metric::Dyadic { depth } => {
                if *depth >= usize::BITS || n != 1usize << depth {
                    return Err(Error::InvalidField {
                        field: "metric".into(),
                        reason: format!("dyadic metric of depth {depth} needs 2^{depth} points"),
                    });
                }
                Ok(())
            }
            // Built only by the constructors below from validated parts.
            Metric::Product { .. } | Metric::Union { .. } => Ok(()),
        }
    }
}

fn validate_matrix(n: usize, d: impl Fn(usize, usize) -> f64) -> Result<()> {
    for i in 0..n {
        for j in 0..n {
            let v = d(i, j);
            if !v.is_finite() || v < 0.0 {
                return Err(Error::MetricAxiom { i, j, reason: format!("distance {v} is not a nonnegative real") });
            }
            if i == j && v != 0.0 {
                return Err(Error::MetricAxiom { i, j, reason: format!("self-distance {v} is not zero") });
            }
            if i != j && v == 0.0 {
                return Err(Error::MetricAxiom { i, j, reason: "distinct points at distance 0".into() });
            }
            if v != d(j, i) {
                return Err(Error::MetricAxiom { i, j, reason: "matrix is not symmetric".into() });
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            let dij = d(i, j);
            for k in 0..n {
                let via = d(i, k) + d(k, j);
                if dij > via * (1.0 + TRIANGLE_SLACK) + TRIANGLE_SLACK {
                    return Err(Error::MetricAxiom {
                        i,
                        j,
                        reason: format!("triangle inequality fails through {k}: {dij} > {via}"),
                    });
                }
            }
        }
    }
    Ok(())
}

/// A finite metric space with a self-map, the desk-scale `(X, T)`.
///
/// When `tds` is set the map is checked to be surjective, which on a finite
/// set makes it a permutation.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteSystem {
    map: Vec<usize>,
    metric: Metric,
    labels: Option<Vec<String>>,
    tds: bool,
}

impl FiniteSystem {
    pub fn new(map: Vec<usize>, metric: Metric, tds: bool) -> Result<Self> {
        let n = map.len();
        if n == 0 {
            return Err(Error::Empty("a system needs at least one point".into()));
        }
        if let Some((index, &target)) = map.iter().enumerate().find(|(_, &t)| t >= n) {
            return Err(Error::MapOutOfRange { index, target, len: n });
        }
        metric.validate(n)?;
        if tds {
            let mut hit = vec![false; n];
            for &t in &map {
                hit[t] = true;
            }
            if let Some(missing) = hit.iter().position(|h| !h) {
                return Err(Error::NotSurjective { missing });
            }
        }
        Ok(FiniteSystem { map, metric, labels: None, tds })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.len() {
            return Err(Error::InvalidField {
                field: "labels".into(),
                reason: format!("expected {} labels, got {}", self.len(), labels.len()),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Single `p`-cycle `i ↦ i+1 mod p` with metric `|i−j|/p`.
    pub fn cycle(p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::Empty("cycle length must be positive".into()));
        }
        let map = (0..p).map(|i| (i + 1) % p).collect();
        let coords = (0..p).map(|i| i as f64 / p as f64).collect();
        FiniteSystem::new(map, Metric::Line(coords), true)
    }

    /// The one-point system.
    pub fn trivial() -> Self {
        FiniteSystem { map: vec![0], metric: Metric::Line(vec![0.0]), labels: None, tds: true }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn is_tds(&self) -> bool {
        self.tds
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.map[i]
    }

    #[inline]
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.metric.distance(i, j)
    }

    pub fn diameter(&self) -> f64 {
        self.metric.diameter(self.len())
    }

    pub fn check_index(&self, index: usize) -> Result<()> {
        if index < self.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index, len: self.len() })
        }
    }

    pub fn require_tds(&self) -> Result<()> {
        if self.tds {
            Ok(())
        } else {
            Err(Error::NotTds)
        }
    }

    /// `T^k x`.
    pub fn iterate(&self, mut x: usize, k: usize) -> usize {
        for _ in 0..k {
            x = self.map[x];
        }
        x
    }

    /// `[x, Tx, …, T^steps x]`.
    pub fn orbit(&self, x: usize, steps: usize) -> Result<Vec<usize>> {
        self.check_index(x)?;
        let mut out = Vec::with_capacity(steps + 1);
        let mut cur = x;
        out.push(cur);
        for _ in 0..steps {
            cur = self.map[cur];
            out.push(cur);
        }
        Ok(out)
    }

    /// Least `p ≥ 1` with `T^p x = x`, or `None` if `x` is not periodic.
    pub fn period(&self, x: usize) -> Option<usize> {
        let mut cur = self.map[x];
        for p in 1..=self.len() {
            if cur == x {
                return Some(p);
            }
            cur = self.map[cur];
        }
        None
    }

    /// The periodic cycles, each listed from its smallest point, ordered by
    /// that point.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] || self.period(start).is_none() {
                continue;
            }
            let mut cyc = vec![start];
            seen[start] = true;
            let mut cur = self.map[start];
            while cur != start {
                seen[cur] = true;
                cyc.push(cur);
                cur = self.map[cur];
            }
            out.push(cyc);
        }
        out
    }

    /// Least common multiple of the cycle lengths: the least `m` with
    /// `T^m = id` on a t.d.s. `None` on overflow or when not a permutation.
    pub fn global_period(&self) -> Option<u64> {
        if !self.tds {
            return None;
        }
        let mut l: u64 = 1;
        for c in self.cycles() {
            let g = l.gcd(&(c.len() as u64));
            l = (l / g).checked_mul(c.len() as u64)?;
        }
        Some(l)
    }

    /// `(X, T^k)` on the same space.
    pub fn power(&self, k: usize) -> FiniteSystem {
        let map = (0..self.len()).map(|x| self.iterate(x, k)).collect();
        FiniteSystem { map, metric: self.metric.clone(), labels: self.labels.clone(), tds: self.tds }
    }

    /// `(X × Y, T × S)` with the max-coordinate metric. The pair `(i, j)` has
    /// index `i * |Y| + j`.
    pub fn product(&self, other: &FiniteSystem) -> Result<FiniteSystem> {
        self.product_capped(other, DEFAULT_PRODUCT_CAP)
    }

    pub fn product_capped(&self, other: &FiniteSystem, cap: usize) -> Result<FiniteSystem> {
        let count = (self.len() as u128) * (other.len() as u128);
        if count > cap as u128 {
            return Err(Error::CapExceeded { what: "product system".into(), count, cap: cap as u128 });
        }
        let m = other.len();
        let map = (0..self.len() * m).map(|idx| self.map[idx / m] * m + other.map[idx % m]).collect();
        let metric = Metric::Product {
            left: Arc::new(self.metric.clone()),
            right: Arc::new(other.metric.clone()),
            right_len: m,
        };
        let labels = match (&self.labels, &other.labels) {
            (Some(a), Some(b)) => {
                Some((0..self.len() * m).map(|idx| format!("({},{})", a[idx / m], b[idx % m])).collect())
            }
            _ => None,
        };
        Ok(FiniteSystem { map, metric, labels, tds: self.tds && other.tds })
    }

    /// Disjoint union; points of `other` are shifted by `self.len()`.
    pub fn disjoint_union(&self, other: &FiniteSystem) -> FiniteSystem {
        let shift = self.len();
        let map = self.map.iter().copied().chain(other.map.iter().map(|&t| t + shift)).collect();
        let gap = self.diameter().max(other.diameter()).max(1.0);
        let metric = Metric::Union {
            left: Arc::new(self.metric.clone()),
            right: Arc::new(other.metric.clone()),
            left_len: shift,
            gap,
        };
        FiniteSystem { map, metric, labels: None, tds: self.tds && other.tds }
    }

    /// Split a product index into its coordinates.
    pub fn split_pair(index: usize, right_len: usize) -> (usize, usize) {
        (index / right_len, index % right_len)
    }
}

/// A factor map `π: (X, T) → (Y, S)`: onto and `π ∘ T = S ∘ π`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorMap {
    map: Vec<usize>,
    target_len: usize,
}

impl FactorMap {
    pub fn new(source: &FiniteSystem, target: &FiniteSystem, map: Vec<usize>) -> Result<Self> {
        if map.len() != source.len() {
            return Err(Error::InvalidField {
                field: "factor map".into(),
                reason: format!("expected {} entries, got {}", source.len(), map.len()),
            });
        }
        if let Some((index, &t)) = map.iter().enumerate().find(|(_, &t)| t >= target.len()) {
            return Err(Error::MapOutOfRange { index, target: t, len: target.len() });
        }
        let mut hit = vec![false; target.len()];
        for &t in &map {
            hit[t] = true;
        }
        if let Some(missing) = hit.iter().position(|h| !h) {
            return Err(Error::NotSurjective { missing });
        }
        if let Some(point) = (0..source.len()).find(|&x| map[source.apply(x)] != target.apply(map[x])) {
            return Err(Error::NotEquivariant { point });
        }
        Ok(FactorMap { map, target_len: target.len() })
    }

    pub fn identity(system: &FiniteSystem) -> Self {
        FactorMap { map: (0..system.len()).collect(), target_len: system.len() }
    }

    /// Reduction `cycle(a) → cycle(b)`, `i ↦ i mod b`, for `b | a`.
    pub fn cycle_reduction(a: usize, b: usize) -> Result<Self> {
        let (src, dst) = (FiniteSystem::cycle(a)?, FiniteSystem::cycle(b)?);
        FactorMap::new(&src, &dst, (0..a).map(|i| i % b).collect())
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }

    pub fn source_len(&self) -> usize {
        self.map.len()
    }

    pub fn target_len(&self) -> usize {
        self.target_len
    }

    /// `π^{-1}(a)` as a sorted index list.
    pub fn preimage(&self, a: &[usize]) -> Vec<usize> {
        let mut want = vec![false; self.target_len];
        for &y in a {
            want[y] = true;
        }
        (0..self.map.len()).filter(|&x| want[self.map[x]]).collect()
    }
}
