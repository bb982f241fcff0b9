use std::fs;
use std::path::{Path, PathBuf};

use gully_core::model::Scenario;
use gully_core::GullyError;

fn shipped() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .collect();
    files.sort();
    files
}

/// Same document with its top-level tables in reverse order.
fn reversed_tables(text: &str) -> String {
    let mut blocks: Vec<String> = Vec::new();
    for line in text.lines() {
        if line.starts_with('[') || blocks.is_empty() {
            blocks.push(String::new());
        }
        let block = blocks.last_mut().unwrap();
        block.push_str(line);
        block.push('\n');
    }
    let head = blocks.remove(0);
    blocks.reverse();
    head + &blocks.concat()
}

#[test]
fn every_shipped_scenario_loads() {
    let files = shipped();
    assert!(files.len() >= 6);
    for path in files {
        let scenario = Scenario::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(scenario.epsilons.len() >= 3, "{}", path.display());
        assert!(scenario.epsilons.windows(2).all(|w| w[1] < w[0]));
    }
}

#[test]
fn digest_ignores_table_order() {
    for path in shipped() {
        let text = fs::read_to_string(&path).unwrap();
        let reordered = reversed_tables(&text);
        assert_ne!(text, reordered);
        let a = Scenario::from_toml_str(&text).unwrap();
        let b = Scenario::from_toml_str(&reordered).unwrap();
        assert_eq!(a.digest(), b.digest(), "{}", path.display());
    }
}

#[test]
fn digest_tracks_physics() {
    let path = &shipped()[0];
    let text = fs::read_to_string(path).unwrap();
    let base = Scenario::from_toml_str(&text).unwrap();
    let mut changed = base.clone();
    changed.final_time *= 2.0;
    assert_ne!(base.digest(), changed.digest());
}

#[test]
fn unknown_key_is_reported_with_its_path() {
    let text = fs::read_to_string(&shipped()[0]).unwrap().replace("[kernel]", "[kernel]\nbogus = 1");
    match Scenario::from_toml_str(&text) {
        Err(GullyError::Config { path, .. }) => assert!(path.contains("kernel"), "{path}"),
        other => panic!("expected a config error, got {other:?}"),
    }
}
