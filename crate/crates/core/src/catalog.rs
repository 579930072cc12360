//! Named example systems and the descriptor syntax used to refer to them.
//!
//! Descriptor grammar, loosest binding first:
//! `desc := union ('+' union)*`, `union := term ('*' term)*`,
//! `term := name[:param] | @path`. `*` is the product, `+` the disjoint union.

use std::path::PathBuf;

use crate::cylinder::CylinderSystem;
use crate::error::{Error, Result};
use crate::hyperspace::FiniteSubset;
use crate::io::load_system;
use crate::measures::{AtomicMeasure, Rational};
use crate::system::{FiniteSystem, Metric};

pub const CATALOG_NAMES: [&str; 5] = ["cycle", "example33", "example45-space", "odometer", "full-shift"];

/// Largest supported truncation level for the block-cycling example.
pub const MAX_BLOCK_LEVEL: u64 = 20;
pub const MAX_CYCLE: u64 = 1 << 20;
pub const MAX_ALPHABET: u64 = 36;

#[derive(Clone, Debug, PartialEq)]
pub enum CatalogSystem {
    Finite(FiniteSystem),
    Cylinder(CylinderSystem),
}

impl CatalogSystem {
    pub fn into_finite(self) -> Result<FiniteSystem> {
        match self {
            CatalogSystem::Finite(s) => Ok(s),
            CatalogSystem::Cylinder(c) => Err(Error::InvalidField {
                field: "system".into(),
                reason: format!("{} is a cylinder system; use a truncation", c.name()),
            }),
        }
    }
}

fn check_range(name: &str, param: u64, lo: u64, hi: u64) -> Result<()> {
    if (lo..=hi).contains(&param) {
        Ok(())
    } else {
        Err(Error::ParamOutOfRange { name: name.into(), param, range: format!("{lo}..={hi}") })
    }
}

pub fn make_catalog_system(name: &str, param: u64) -> Result<CatalogSystem> {
    match name {
        "cycle" => {
            check_range(name, param, 1, MAX_CYCLE)?;
            FiniteSystem::cycle(param as usize).map(CatalogSystem::Finite)
        }
        "example33" | "example45-space" => {
            check_range(name, param, 1, MAX_BLOCK_LEVEL)?;
            block_cycling(param as u32).map(CatalogSystem::Finite)
        }
        "odometer" => {
            // The parameter carries no information for the odometer itself.
            check_range(name, param, 1, u64::MAX)?;
            Ok(CatalogSystem::Cylinder(CylinderSystem::Odometer))
        }
        "full-shift" => {
            check_range(name, param, 1, MAX_ALPHABET)?;
            Ok(CatalogSystem::Cylinder(CylinderSystem::FullShift { alphabet: param as u8 }))
        }
        other => Err(Error::UnknownCatalog(other.to_string())),
    }
}

/// Truncation of `{0} ∪ {1/k}` at level `m`: index `0` is the point `0`,
/// index `k ≥ 1` is `1/k` for `k < 2^{m+1}`. `0` and `1` are fixed, and each
/// block `1/2^n, …, 1/(2^{n+1}−1)` for `1 ≤ n ≤ m` is cycled forward,
/// `1/k ↦ 1/(k+1)` with the last element returning to `1/2^n`.
pub fn block_cycling(m: u32) -> Result<FiniteSystem> {
    if m == 0 || m as u64 > MAX_BLOCK_LEVEL {
        return Err(Error::ParamOutOfRange {
            name: "example33".into(),
            param: m as u64,
            range: format!("1..={MAX_BLOCK_LEVEL}"),
        });
    }
    let n = 1usize << (m + 1);
    let mut map = vec![0usize; n];
    map[1] = 1;
    for level in 1..=m {
        let lo = 1usize << level;
        let hi = (1usize << (level + 1)) - 1;
        for (k, slot) in map.iter_mut().enumerate().take(hi).skip(lo) {
            *slot = k + 1;
        }
        map[hi] = lo;
    }
    let coords = std::iter::once(0.0).chain((1..n).map(|k| 1.0 / k as f64)).collect();
    let labels = std::iter::once("0".to_string()).chain((1..n).map(|k| format!("1/{k}"))).collect();
    FiniteSystem::new(map, Metric::Line(coords), true)?.with_labels(labels)
}

/// `K_m = {0, 1, 1/2, 1/4, …, 1/2^m}` inside [`block_cycling`]`(m)`.
pub fn block_cycling_set(m: u32) -> Result<FiniteSubset> {
    let host = 1usize << (m + 1);
    let elems = std::iter::once(0).chain((0..=m).map(|n| 1usize << n)).collect();
    FiniteSubset::new(elems, host)
}

/// `μ_m ∝ Σ_{n=1}^{m+1} 2^{-n} δ_{1/2^{n-1}}`, renormalized, inside
/// [`block_cycling`]`(m)`.
pub fn block_cycling_measure(m: u32) -> Result<AtomicMeasure> {
    let host = 1usize << (m + 1);
    let atoms = (1..=m + 1).map(|n| {
        let w = Rational::new(1.into(), num_bigint::BigInt::from(1u64) << n);
        (1usize << (n - 1), w)
    });
    AtomicMeasure::normalized(atoms.collect(), host)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SystemDescriptor {
    File(PathBuf),
    Catalog { name: String, param: u64 },
    Product(Box<SystemDescriptor>, Box<SystemDescriptor>),
    Union(Box<SystemDescriptor>, Box<SystemDescriptor>),
}

impl SystemDescriptor {
    /// Parse the descriptor grammar; bare names take `default_param`.
    pub fn parse(s: &str, default_param: Option<u64>) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Parse("empty system descriptor".into()));
        }
        if let Some((a, b)) = s.rsplit_once('+') {
            return Ok(SystemDescriptor::Union(
                Box::new(Self::parse(a, default_param)?),
                Box::new(Self::parse(b, default_param)?),
            ));
        }
        if let Some((a, b)) = s.rsplit_once('*') {
            return Ok(SystemDescriptor::Product(
                Box::new(Self::parse(a, default_param)?),
                Box::new(Self::parse(b, default_param)?),
            ));
        }
        if let Some(path) = s.strip_prefix('@') {
            return Ok(SystemDescriptor::File(PathBuf::from(path)));
        }
        let (name, param) = match s.split_once(':') {
            Some((n, p)) => {
                let p = p.trim().parse::<u64>().map_err(|_| Error::Parse(format!("bad parameter `{p}` in `{s}`")))?;
                (n.trim(), p)
            }
            None => (s, default_param.ok_or_else(|| Error::Parse(format!("`{s}` needs a parameter")))?),
        };
        if !CATALOG_NAMES.contains(&name) {
            return Err(Error::UnknownCatalog(name.to_string()));
        }
        Ok(SystemDescriptor::Catalog { name: name.to_string(), param })
    }

    pub fn resolve(&self) -> Result<CatalogSystem> {
        match self {
            SystemDescriptor::File(p) => load_system(p).map(CatalogSystem::Finite),
            SystemDescriptor::Catalog { name, param } => make_catalog_system(name, *param),
            SystemDescriptor::Product(a, b) => {
                let a = a.resolve()?.into_finite()?;
                let b = b.resolve()?.into_finite()?;
                a.product(&b).map(CatalogSystem::Finite)
            }
            SystemDescriptor::Union(a, b) => {
                let a = a.resolve()?.into_finite()?;
                let b = b.resolve()?.into_finite()?;
                Ok(CatalogSystem::Finite(a.disjoint_union(&b)))
            }
        }
    }
}

impl std::fmt::Display for SystemDescriptor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SystemDescriptor::File(p) => write!(f, "@{}", p.display()),
            SystemDescriptor::Catalog { name, param } => write!(f, "{name}:{param}"),
            SystemDescriptor::Product(a, b) => write!(f, "{a}*{b}"),
            SystemDescriptor::Union(a, b) => write!(f, "{a}+{b}"),
        }
    }
}

/// The finite catalog fixtures used by the cross-validation checks.
pub fn finite_catalog_fixtures() -> Vec<(String, FiniteSystem)> {
    let mut out = Vec::new();
    for p in 1..=6 {
        out.push((format!("cycle:{p}"), FiniteSystem::cycle(p).expect("cycle")));
    }
    for m in 1..=2 {
        out.push((format!("example33:{m}"), block_cycling(m).expect("example33")));
    }
    let c2 = FiniteSystem::cycle(2).expect("cycle");
    let c3 = FiniteSystem::cycle(3).expect("cycle");
    out.push(("cycle:2*cycle:3".into(), c2.product(&c3).expect("product")));
    out.push(("cycle:2*cycle:2".into(), c2.product(&c2).expect("product")));
    out.push(("cycle:2+cycle:3".into(), c2.disjoint_union(&c3)));
    out.push(("odometer-truncation:3".into(), crate::cylinder::odometer_truncation(3).expect("odometer")));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycle_three() {
        let CatalogSystem::Finite(s) = make_catalog_system("cycle", 3).unwrap() else { panic!() };
        assert_eq!(s.map(), &[1, 2, 0]);
    }

    #[test]
    fn block_periods() {
        let s = block_cycling(2).unwrap();
        assert_eq!(s.len(), 8);
        assert_eq!(s.period(0), Some(1));
        assert_eq!(s.period(1), Some(1));
        assert_eq!(s.period(2), Some(2));
        assert_eq!(s.period(4), Some(4));
        assert_eq!(s.labels().unwrap()[4], "1/4");
        // forward cycling inside a block: 1/2 -> 1/3 -> 1/2
        assert_eq!(s.apply(2), 3);
        assert_eq!(s.apply(3), 2);
    }

    #[test]
    fn cycle_structure_of_level_three() {
        let s = block_cycling(3).unwrap();
        let mut lens: Vec<usize> = s.cycles().iter().map(Vec::len).collect();
        lens.sort_unstable();
        assert_eq!(lens, vec![1, 1, 2, 4, 8]);
    }

    #[test]
    fn catalog_errors() {
        assert_eq!(make_catalog_system("torus", 1).unwrap_err(), Error::UnknownCatalog("torus".into()));
        assert!(matches!(make_catalog_system("cycle", 0), Err(Error::ParamOutOfRange { .. })));
        assert!(matches!(make_catalog_system("example33", 21), Err(Error::ParamOutOfRange { .. })));
        assert!(matches!(
            make_catalog_system("full-shift", 2).unwrap(),
            CatalogSystem::Cylinder(CylinderSystem::FullShift { alphabet: 2 })
        ));
    }

    #[test]
    fn descriptors() {
        let d = SystemDescriptor::parse("cycle:2*cycle:3+cycle:4", None).unwrap();
        assert_eq!(d.to_string(), "cycle:2*cycle:3+cycle:4");
        let s = d.resolve().unwrap().into_finite().unwrap();
        assert_eq!(s.len(), 10);
        assert_eq!(
            SystemDescriptor::parse("cycle", Some(5)).unwrap(),
            SystemDescriptor::Catalog { name: "cycle".into(), param: 5 }
        );
        assert!(SystemDescriptor::parse("cycle", None).is_err());
        assert!(SystemDescriptor::parse("odometer:3", None).unwrap().resolve().unwrap().into_finite().is_err());
    }

    #[test]
    fn block_measure_is_normalized() {
        let mu = block_cycling_measure(2).unwrap();
        // weights 1/2, 1/4, 1/8 over total 7/8
        assert_eq!(mu.mass_at(1), Rational::new(4.into(), 7.into()));
        assert_eq!(mu.mass_at(4), Rational::new(1.into(), 7.into()));
    }
}
