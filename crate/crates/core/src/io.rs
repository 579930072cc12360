//! JSON system-description files.
//!
//! ```json
//! {"points": 2, "labels": ["a", "b"],
//!  "metric": {"kind": "matrix", "data": [[0, 1], [1, 0]]},
//!  "map": [1, 0], "tds": true}
//! ```
//!
//! `metric` may also be `{"kind": "coords1d", "data": [x_0, …]}`. Floats are
//! written with at most 12 significant digits.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::system::{FiniteSystem, Metric};

/// Largest system a description file may declare.
pub const MAX_FILE_POINTS: usize = 4096;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemFile {
    points: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
    metric: MetricFile,
    map: Vec<usize>,
    #[serde(default = "default_tds")]
    tds: bool,
}

fn default_tds() -> bool {
    true
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "lowercase")]
enum MetricFile {
    Matrix(Vec<Vec<f64>>),
    Coords1d(Vec<f64>),
}

/// Round to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

pub fn parse_system(text: &str) -> Result<FiniteSystem> {
    let file: SystemFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let n = file.points;
    if n == 0 {
        return Err(Error::InvalidField { field: "points".into(), reason: "must be positive".into() });
    }
    if n > MAX_FILE_POINTS {
        return Err(Error::CapExceeded { what: "system file".into(), count: n as u128, cap: MAX_FILE_POINTS as u128 });
    }
    if file.map.len() != n {
        return Err(Error::InvalidField {
            field: "map".into(),
            reason: format!("expected {n} entries, got {}", file.map.len()),
        });
    }
    let metric = match file.metric {
        MetricFile::Matrix(rows) => {
            if rows.len() != n {
                return Err(Error::InvalidField {
                    field: "metric.data".into(),
                    reason: format!("expected {n} rows, got {}", rows.len()),
                });
            }
            let mut data = Vec::with_capacity(n * n);
            for (i, row) in rows.into_iter().enumerate() {
                if row.len() != n {
                    return Err(Error::InvalidField {
                        field: format!("metric.data[{i}]"),
                        reason: format!("expected {n} entries, got {}", row.len()),
                    });
                }
                data.extend(row);
            }
            Metric::Matrix { n, data }
        }
        MetricFile::Coords1d(xs) => Metric::Line(xs),
    };
    let system = FiniteSystem::new(file.map, metric, file.tds)?;
    match file.labels {
        Some(labels) => system.with_labels(labels),
        None => Ok(system),
    }
}

pub fn load_system(path: impl AsRef<Path>) -> Result<FiniteSystem> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_system(&text)
}

/// Serialize a system; line metrics stay as coordinates, everything else
/// is written as a full matrix.
pub fn system_to_json(system: &FiniteSystem) -> Result<String> {
    let n = system.len();
    if n > MAX_FILE_POINTS {
        return Err(Error::CapExceeded { what: "system file".into(), count: n as u128, cap: MAX_FILE_POINTS as u128 });
    }
    let metric = match system.metric() {
        Metric::Line(xs) => MetricFile::Coords1d(xs.iter().copied().map(round12).collect()),
        _ => MetricFile::Matrix((0..n).map(|i| (0..n).map(|j| round12(system.distance(i, j))).collect()).collect()),
    };
    let file = SystemFile {
        points: n,
        labels: system.labels().map(<[String]>::to_vec),
        metric,
        map: system.map().to_vec(),
        tds: system.is_tds(),
    };
    serde_json::to_string_pretty(&file).map_err(|e| Error::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_cycle_file() {
        let s = parse_system(r#"{"points":2,"metric":{"kind":"matrix","data":[[0,1],[1,0]]},"map":[1,0],"tds":true}"#)
            .unwrap();
        assert_eq!(s.map(), &[1, 0]);
        assert_eq!(s.cycles(), vec![vec![0, 1]]);
    }

    #[test]
    fn zero_distance_between_distinct_points() {
        let err =
            parse_system(r#"{"points":2,"metric":{"kind":"matrix","data":[[0,0],[0,0]]},"map":[1,0]}"#).unwrap_err();
        assert!(matches!(err, Error::MetricAxiom { i: 0, j: 1, .. }), "{err}");
    }

    #[test]
    fn errors_name_the_field() {
        let err = parse_system(r#"{"points":2,"metric":{"kind":"coords1d","data":[0,1]},"map":[1]}"#).unwrap_err();
        assert!(err.to_string().contains("`map`"), "{err}");
        let err =
            parse_system(r#"{"points":2,"metric":{"kind":"matrix","data":[[0,1],[1]]},"map":[1,0]}"#).unwrap_err();
        assert!(err.to_string().contains("metric.data[1]"), "{err}");
        let err = parse_system(r#"{"points":2,"metric":{"kind":"coords1d","data":[0,1]},"map":[1,1]}"#).unwrap_err();
        assert_eq!(err, Error::NotSurjective { missing: 0 });
        let err = parse_system(r#"{"points":2,"metrik":{}}"#).unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
    }

    #[test]
    fn non_tds_mode_accepts_non_surjective_maps() {
        let s =
            parse_system(r#"{"points":2,"metric":{"kind":"coords1d","data":[0,1]},"map":[1,1],"tds":false}"#).unwrap();
        assert!(!s.is_tds());
    }

    #[test]
    fn twelve_digits() {
        assert_eq!(round12(1.0 / 3.0), 0.333333333333);
        assert_eq!(round12(0.0), 0.0);
    }

    #[test]
    fn json_roundtrip() {
        let s = crate::catalog::block_cycling(2).unwrap();
        let back = parse_system(&system_to_json(&s).unwrap()).unwrap();
        assert_eq!(back.map(), s.map());
        assert_eq!(back.labels(), s.labels());
        let p = FiniteSystem::cycle(2).unwrap().product(&FiniteSystem::cycle(2).unwrap()).unwrap();
        let back = parse_system(&system_to_json(&p).unwrap()).unwrap();
        assert_eq!(back.distance(0, 3), p.distance(0, 3));
    }
}
