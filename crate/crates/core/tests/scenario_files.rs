use std::path::{Path, PathBuf};

use invsim::imitation::default_training_grid;
use invsim::scenario::{load_scenarios, LoadSpec};

fn dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

#[test]
fn shipped_files_parse_and_validate() {
    for (file, count) in [
        ("nominal.toml", 4),
        ("case1.toml", 30),
        ("case2.toml", 20),
        ("resistive_subset.toml", 10),
        ("training_grid.toml", 60),
    ] {
        let s = load_scenarios(&dir().join(file)).unwrap_or_else(|e| panic!("{file}: {e}"));
        assert_eq!(s.len(), count, "{file}");
        let mut ids: Vec<_> = s.iter().map(|s| s.id.as_str()).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), count, "{file}: duplicate ids");
    }
}

#[test]
fn training_grid_file_matches_builtin_grid() {
    let file = load_scenarios(&dir().join("training_grid.toml")).unwrap();
    assert_eq!(file, default_training_grid(5.0));
}

#[test]
fn case_files_hold_the_expected_load_kinds() {
    let c1 = load_scenarios(&dir().join("case1.toml")).unwrap();
    let open: Vec<_> = c1.iter().filter(|s| s.load == LoadSpec::Open).map(|s| s.id.as_str()).collect();
    assert_eq!(open, ["S10", "S20", "S30"]);
    let c2 = load_scenarios(&dir().join("case2.toml")).unwrap();
    assert!(c2.iter().all(|s| matches!(s.load, LoadSpec::Rectifier { .. })));
    assert_eq!(c2.first().unwrap().id, "S31");
    assert_eq!(c2.last().unwrap().id, "S50");
    let subset = load_scenarios(&dir().join("resistive_subset.toml")).unwrap();
    assert_eq!(subset[..], c1[..10]);
}
