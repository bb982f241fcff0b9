use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(format!("{name}.toml"))
}

fn gully(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gully")).args(args).output().expect("binary runs")
}

fn run(command: &str, scenario: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![command, "--scenario", scenario.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    gully(&args)
}

fn csv_files(dir: &Path) -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    files.sort();
    files
}

fn read_rows(path: &Path) -> (String, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn edited(base: &str, edits: &[(&str, &str)], dir: &Path) -> PathBuf {
    let mut text = fs::read_to_string(scenario(base)).unwrap();
    for (from, to) in edits {
        assert!(text.contains(from), "{from} not in {base}");
        text = text.replace(from, to);
    }
    let path = dir.join(format!("{base}_edited.toml"));
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn simulate_is_byte_identical_across_runs_and_thread_counts() {
    let tmp = TempDir::new().unwrap();
    let sine = scenario("sine");
    let outs: Vec<PathBuf> = ["1", "4", "4"]
        .iter()
        .enumerate()
        .map(|(k, threads)| {
            let out = tmp.path().join(format!("run{k}"));
            let o = run("simulate", &sine, &out, &["--threads", threads, "--epsilon-index", "1"]);
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
            out
        })
        .collect();
    let reference = csv_files(&outs[0]);
    assert!(reference.len() > 2);
    for other in &outs[1..] {
        let files = csv_files(other);
        assert_eq!(files.len(), reference.len());
        for (a, b) in reference.iter().zip(&files) {
            assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap(), "{}", a.display());
        }
    }
}

#[test]
fn zero_scenario_writes_only_zeros() {
    let tmp = TempDir::new().unwrap();
    let o = run("simulate", &scenario("zero"), tmp.path(), &[]);
    assert!(o.status.success());
    let files = csv_files(tmp.path());
    assert!(!files.is_empty());
    for f in files {
        let (header, rows) = read_rows(&f);
        assert_eq!(header, "sigma,s,u");
        assert!(rows.iter().all(|r| r.len() == 3 && r[2] == 0.0));
    }
}

#[test]
fn heat_oracle_final_field_matches_fourier_mode() {
    let tmp = TempDir::new().unwrap();
    let o = run("simulate", &scenario("heat_oracle"), tmp.path(), &[]);
    assert!(o.status.success());
    let last = csv_files(tmp.path()).pop().unwrap();
    let (_, rows) = read_rows(&last);
    let decay = (-std::f64::consts::PI.powi(2) * 0.1).exp();
    let err = rows
        .iter()
        .map(|r| (r[2] - decay * (std::f64::consts::PI * r[0]).sin()).abs())
        .fold(0.0, f64::max);
    assert!(err <= 5e-3, "sup error {err}");
}

#[test]
fn reduce_writes_axis_profiles_with_threshold_restored() {
    let tmp = TempDir::new().unwrap();
    let o = run("reduce", &scenario("sine"), tmp.path(), &[]);
    assert!(o.status.success());
    let (header, rows) = read_rows(&csv_files(tmp.path())[0]);
    assert_eq!(header, "sigma,u");
    // Inlet ramp starts at 0 in physical units.
    assert_eq!(rows[0][1], 0.0);
}

#[test]
fn manifest_lists_every_emitted_file() {
    let tmp = TempDir::new().unwrap();
    let o = run("reduce", &scenario("zero"), tmp.path(), &[]);
    assert!(o.status.success());
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("manifest.json")).unwrap()).unwrap();
    let listed: Vec<String> = manifest["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    let on_disk = fs::read_dir(tmp.path()).unwrap().count();
    assert_eq!(listed.len(), on_disk);
    assert!(listed.iter().all(|p| Path::new(p).exists()));
    assert_eq!(manifest["pass"], true);
    assert_eq!(manifest["command"], "reduce");
}

#[test]
fn reflection_suite_reports_hand_values() {
    let tmp = TempDir::new().unwrap();
    let path = edited(
        "heat_oracle",
        &[("L = 0.2", "L = 1.0"), ("epsilon_list = [0.1, 0.05, 0.025]", "epsilon_list = [0.1, 0.05]")],
        tmp.path(),
    );
    let out = tmp.path().join("out");
    let o = run("verify-reflection", &path, &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("reflection.json")).unwrap()).unwrap();
    assert_eq!(report["setup"]["reflections"], 2);
    assert_eq!(report["setup"]["extended_width"], 0.5);
    assert_eq!(report["pass"], true);
}

#[test]
fn suites_pass_on_shipped_circle() {
    for command in ["verify-geometry", "verify-kernel", "verify-reflection", "verify-gronwall"] {
        let tmp = TempDir::new().unwrap();
        let o = run(command, &scenario("circle"), tmp.path(), &[]);
        assert!(o.status.success(), "{command}: {}", String::from_utf8_lossy(&o.stdout));
        assert!(String::from_utf8_lossy(&o.stdout).contains(&format!("{command}: pass")));
    }
}

#[test]
fn seed_flag_is_echoed() {
    let tmp = TempDir::new().unwrap();
    let o = run("verify-kernel", &scenario("zero"), tmp.path(), &["--seed", "77"]);
    assert!(o.status.success());
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["analysis"]["seed"], 77);
}

#[test]
fn failing_check_exits_with_one() {
    let tmp = TempDir::new().unwrap();
    let path = edited("heat_oracle", &[("A = 0.0", "A = 5.0"), ("C_L = 1.0", "C_L = 0.5")], tmp.path());
    let o = run("verify-kernel", &path, &tmp.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn malformed_key_exits_with_two_and_names_the_path() {
    let tmp = TempDir::new().unwrap();
    let path = edited("heat_oracle", &[("epsilon_list = [0.1, 0.05, 0.025]", "epsilon_list = \"x\"")], tmp.path());
    let o = run("simulate", &path, &tmp.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("domain.epsilon_list"));
}

#[test]
fn usage_errors_exit_with_two() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(gully(&["bogus"]).status.code(), Some(2));
    assert_eq!(gully(&["simulate"]).status.code(), Some(2));
    let missing = tmp.path().join("absent.toml");
    assert_eq!(run("simulate", &missing, tmp.path(), &[]).status.code(), Some(2));
    let o = run("simulate", &scenario("zero"), tmp.path(), &["--epsilon-index", "9"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("epsilon_index"));
}
