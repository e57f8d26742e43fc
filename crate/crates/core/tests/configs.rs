use std::path::{Path, PathBuf};

use quasidiff::harness::{load_config_dir, run_experiment, sweep, ExperimentConfig, SweepSpec};
use quasidiff::markov::PathChain;

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn sweep_specs() -> Vec<(PathBuf, SweepSpec)> {
    let dir = configs_dir().join("sweep");
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let spec = serde_json::from_str(&std::fs::read_to_string(&p).unwrap())
                .unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            (p, spec)
        })
        .collect()
}

#[test]
fn every_config_parses_and_builds() {
    let simulate = load_config_dir(&configs_dir().join("simulate")).unwrap();
    assert!(simulate.len() >= 8);
    for (path, c) in &simulate {
        let g = c.graph.build().unwrap();
        c.init
            .build(&g)
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
    let sweeps = sweep_specs();
    assert!(sweeps.len() >= 12);
    for (path, s) in &sweeps {
        assert!(!s.expand().is_empty(), "{}", path.display());
    }
    for entry in std::fs::read_dir(configs_dir().join("chains")).unwrap() {
        let path = entry.unwrap().path();
        let _: PathChain = serde_json::from_str(&std::fs::read_to_string(&path).unwrap())
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}

#[test]
fn rsw_configs_stay_fixed() {
    for (path, c) in load_config_dir(&configs_dir().join("simulate")).unwrap() {
        if path
            .file_name()
            .unwrap()
            .to_string_lossy()
            .starts_with("rsw_fixed_point")
        {
            let s = run_experiment(&c, None).unwrap();
            assert_eq!(
                s.final_discrepancy,
                s.initial_discrepancy,
                "{}",
                path.display()
            );
            assert_eq!(s.steps, 500);
        }
    }
}

#[test]
fn halfload_configs_reach_half_d() {
    for d in [4usize, 8] {
        let path = configs_dir().join(format!("simulate/hypercube_halfload_d{d}.json"));
        let s = run_experiment(&ExperimentConfig::load(&path).unwrap(), None).unwrap();
        assert_eq!(s.max_deviation, Some(d as f64 / 2.0));
        assert_eq!(s.final_discrepancy, d as i64);
    }
}

#[test]
fn error_decomposition_sweep() {
    let spec: SweepSpec = serde_json::from_str(
        &std::fs::read_to_string(configs_dir().join("sweep/error_decomposition.json")).unwrap(),
    )
    .unwrap();
    let report = sweep(&spec.expand(), None).unwrap();
    assert_eq!(report.rows.len(), 6);
    assert!(report
        .rows
        .iter()
        .all(|r| r.ansatz_residual.unwrap() <= 1e-9));
}

/// Canonical serialization pins the hash; a change here means old result
/// tables no longer match their configs.
#[test]
fn config_hash_is_frozen() {
    let c =
        ExperimentConfig::load(&configs_dir().join("simulate/hypercube_halfload_d4.json")).unwrap();
    assert_eq!(c.hash(), FROZEN_HALFLOAD_D4_HASH);
}

// sha256 of the sorted-key compact JSON, recomputed outside Rust
const FROZEN_HALFLOAD_D4_HASH: &str = "66505572b0997ed2";
