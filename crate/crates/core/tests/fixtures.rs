use std::path::Path;

use hyperdyn::catalog::{block_cycling, block_cycling_set, SystemDescriptor};
use hyperdyn::hyperspace::period_of_set;
use hyperdyn::io::{load_system, parse_system, system_to_json};

fn fixture() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/example33_m3.json")
}

#[test]
fn shipped_truncation_matches_the_catalog() {
    let file = load_system(fixture()).unwrap();
    let built = block_cycling(3).unwrap();
    assert_eq!(file.len(), 16);
    assert_eq!(file.map(), built.map());
    for i in 0..16 {
        for j in 0..16 {
            assert!((file.distance(i, j) - built.distance(i, j)).abs() < 1e-11);
        }
    }
    assert_eq!(period_of_set(&file, &block_cycling_set(3).unwrap(), 32).unwrap(), Some(8));
}

#[test]
fn descriptor_loads_files_and_combines() {
    let desc = format!("@{}*cycle:2", fixture().display());
    let s = SystemDescriptor::parse(&desc, None).unwrap().resolve().unwrap().into_finite().unwrap();
    assert_eq!(s.len(), 32);
}

#[test]
fn json_round_trip() {
    let s = block_cycling(2).unwrap();
    let back = parse_system(&system_to_json(&s).unwrap()).unwrap();
    assert_eq!(back.map(), s.map());
    assert_eq!(back.labels(), s.labels());
}

#[test]
fn written_files_load_back() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sys.json");
    std::fs::write(&path, system_to_json(&block_cycling(1).unwrap()).unwrap()).unwrap();
    assert_eq!(load_system(&path).unwrap().len(), 4);
}
