use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use asymcat::report::ExperimentReport;
use serde_json::{json, Value};
use tempfile::TempDir;

fn asymcat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_asymcat"))
        .args(args)
        .env("ASYMCAT_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn real(rows: &[&[f64]]) -> Value {
    let n = rows.len();
    let m = rows[0].len();
    json!({
        "rows": n,
        "cols": m,
        "re": rows,
        "im": vec![vec![0.0; m]; n],
    })
}

fn write(dir: &TempDir, name: &str, v: &Value) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, v.to_string()).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn qubit_generator() -> Value {
    json!({
        "kind": "HamiltonianGenerated",
        "systems": [{"label": "S", "dim": 2}],
        "generators": [real(&[&[0.0, 0.0], &[0.0, 1.0]])],
    })
}

fn z2_action() -> Value {
    json!({
        "kind": "FiniteGroup",
        "systems": [{"label": "A", "dim": 2}],
        "elements": [[real(&[&[1.0, 0.0], &[0.0, 1.0]])], [real(&[&[1.0, 0.0], &[0.0, -1.0]])]],
    })
}

fn plus() -> Value {
    real(&[&[0.5, 0.5], &[0.5, 0.5]])
}

#[test]
fn gamma_of_plus_state_is_one() {
    let dir = TempDir::new().unwrap();
    let state = write(&dir, "plus.json", &plus());
    let action = write(&dir, "gen.json", &qubit_generator());
    let out = asymcat(&["gamma", "--state", s(&state), "--action", s(&action), "--json"]);
    assert!(out.status.success());
    let v = json_of(&out);
    assert!((v["gamma"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert_eq!(v["inputs_digest"].as_str().unwrap().len(), 64);
}

#[test]
fn gamma_of_symmetric_state_is_zero() {
    let dir = TempDir::new().unwrap();
    let state = write(&dir, "diag.json", &real(&[&[0.3, 0.0], &[0.0, 0.7]]));
    let action = write(&dir, "gen.json", &qubit_generator());
    let v = json_of(&asymcat(&["gamma", "--state", s(&state), "--action", s(&action), "--json"]));
    assert!(v["gamma"].as_f64().unwrap().abs() < 1e-10);
}

#[test]
fn gamma_of_clock_state_is_log_t() {
    let dir = TempDir::new().unwrap();
    let q = [0.25; 4];
    let state = write(&dir, "clock.json", &real(&[&q, &q, &q, &q]));
    let action = write(
        &dir,
        "osc.json",
        &json!({
            "kind": "HamiltonianGenerated",
            "systems": [{"label": "R", "dim": 4}],
            "generators": [real(&[&[0.0, 0.0, 0.0, 0.0], &[0.0, 1.0, 0.0, 0.0], &[0.0, 0.0, 2.0, 0.0], &[0.0, 0.0, 0.0, 3.0]])],
        }),
    );
    let v = json_of(&asymcat(&["gamma", "--state", s(&state), "--action", s(&action), "--json"]));
    assert!((v["gamma"].as_f64().unwrap() - 2.0).abs() < 1e-10);
}

#[test]
fn gamma_exit_codes() {
    let dir = TempDir::new().unwrap();
    let garbage = dir.path().join("garbage.json");
    std::fs::write(&garbage, "{not json").unwrap();
    let action = write(&dir, "gen.json", &qubit_generator());
    let out = asymcat(&["gamma", "--state", s(&garbage), "--action", s(&action)]);
    assert_eq!(out.status.code(), Some(2));

    let big = write(&dir, "mixed3.json", &real(&[&[0.5, 0.0, 0.0], &[0.0, 0.25, 0.0], &[0.0, 0.0, 0.25]]));
    let out = asymcat(&["gamma", "--state", s(&big), "--action", s(&action)]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn clock_t4_meets_floor() {
    let out = asymcat(&["clock", "--T", "4", "--k", "1", "--json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json_of(&out);
    assert!(v["recovery"]["achieved_fidelity"].as_f64().unwrap() >= 0.917004);
    assert!((v["bounds"]["delta_gamma"].as_f64().unwrap() - 0.25).abs() < 1e-8);
    assert_eq!(v["pass"], true);
}

#[test]
fn clock_stride_two_respects_ceiling() {
    let v = json_of(&asymcat(&["clock", "--T", "4", "--k", "2", "--json"]));
    let s_fid = v["metrics"]["s_fidelity_max_over_t"].as_f64().unwrap();
    assert!(s_fid <= std::f64::consts::FRAC_1_SQRT_2 + 1e-6);
    assert_eq!(v["pass"], true);
}

#[test]
fn cloner_matches_werner() {
    let out = asymcat(&["cloner", "--d", "2", "--n", "1", "--k", "1", "--json"]);
    assert!(out.status.success());
    let r: ExperimentReport = serde_json::from_slice(&out.stdout).unwrap();
    assert!((r.recovery.achieved_fidelity - (2.0f64 / 3.0).sqrt()).abs() < 1e-8);
    assert!(r.check("petz_equals_werner").unwrap().pass);
    assert!(r.audit());
}

#[test]
fn sweep_writes_one_csv_row_per_instance() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("sweep.csv");
    let out = asymcat(&["clock", "--sweep", "2,3,4", "--csv", s(&csv)]);
    assert!(out.status.success());
    let mut rd = csv::Reader::from_path(&csv).unwrap();
    let headers = rd.headers().unwrap().clone();
    assert_eq!(headers.iter().collect::<Vec<_>>(), asymcat::report::CSV_COLUMNS.to_vec());
    let rows: Vec<_> = rd.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(&rows[1][2], "T=3,k=1");
}

#[test]
fn json_output_is_deterministic() {
    let a = asymcat(&["cloner", "--d", "2", "--n", "2", "--k", "1", "--json"]);
    let b = asymcat(&["cloner", "--d", "2", "--n", "2", "--k", "1", "--json"]);
    assert_eq!(a.stdout, b.stdout);
    assert!(json_of(&a).get("wall_time_seconds").is_none());
}

#[test]
fn timing_flag_adds_wall_time() {
    let v = json_of(&asymcat(&["clock", "--T", "2", "--json", "--timing"]));
    assert!(v["wall_time_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn run_reads_spec_files() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "clock.json", &json!({"clock": {"T": 4, "k": 1}}));
    let v = json_of(&asymcat(&["run", s(&spec), "--json"]));
    assert_eq!(v["instance"], "T=4,k=1");
    let spec = write(&dir, "cloner.json", &json!({"cloner": {"d": 3, "n": 1, "kk": 1, "probes": 4}}));
    let v = json_of(&asymcat(&["run", s(&spec), "--json"]));
    assert!((v["recovery"]["achieved_fidelity"].as_f64().unwrap() - 0.5f64.sqrt()).abs() < 1e-8);
    let bad = write(&dir, "bad.json", &json!({"pendulum": {}}));
    assert_eq!(asymcat(&["run", s(&bad)]).status.code(), Some(2));
}

#[test]
fn out_of_guard_specs_are_invariant_violations() {
    assert_eq!(asymcat(&["clock", "--T", "1"]).status.code(), Some(3));
    assert_eq!(asymcat(&["cloner", "--d", "10", "--n", "3", "--k", "2"]).status.code(), Some(3));
}

#[test]
fn stricter_floor_tolerance_still_passes_clock() {
    let out = asymcat(&["clock", "--T", "2", "--tol-floor", "1e-9", "--tol-eq", "1e-10"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn recover_identity_is_perfect() {
    let dir = TempDir::new().unwrap();
    let ch = write(
        &dir,
        "id.json",
        &json!({"in_dim": 2, "out_dim": 2, "kraus": [real(&[&[1.0, 0.0], &[0.0, 1.0]])], "name": "id"}),
    );
    let st = write(&dir, "plus.json", &plus());
    let act = write(&dir, "z2.json", &z2_action());
    let out = asymcat(&["recover", "--channel", s(&ch), "--state", s(&st), "--action", s(&act), "--json"]);
    assert!(out.status.success());
    let v = json_of(&out);
    assert!((v["recovery"]["achieved_fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-8);
}

#[test]
fn recover_after_twirl_meets_floor() {
    let dir = TempDir::new().unwrap();
    let h = 0.5f64.sqrt();
    let ch = write(
        &dir,
        "twirl.json",
        &json!({"in_dim": 2, "out_dim": 2, "kraus": [real(&[&[h, 0.0], &[0.0, h]]), real(&[&[h, 0.0], &[0.0, -h]])], "name": "twirl"}),
    );
    let st = write(&dir, "plus.json", &plus());
    let act = write(&dir, "z2.json", &z2_action());
    let v = json_of(&asymcat(&["recover", "--channel", s(&ch), "--state", s(&st), "--action", s(&act), "--json"]));
    assert!((v["delta_gamma"].as_f64().unwrap() - 1.0).abs() < 1e-8);
    assert!(v["recovery"]["achieved_fidelity"].as_f64().unwrap() >= h - 1e-6);
    assert_eq!(v["pass"], true);
}

#[test]
fn recover_rejects_non_covariant_channel() {
    let dir = TempDir::new().unwrap();
    let h = 0.5f64.sqrt();
    let ch = write(
        &dir,
        "hadamard.json",
        &json!({"in_dim": 2, "out_dim": 2, "kraus": [real(&[&[h, h], &[h, -h]])], "name": "H"}),
    );
    let st = write(&dir, "plus.json", &plus());
    let act = write(&dir, "z2.json", &z2_action());
    let out = asymcat(&["recover", "--channel", s(&ch), "--state", s(&st), "--action", s(&act)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not covariant"));
}

#[test]
fn verify_core_suite_passes() {
    let out = asymcat(&["verify", "--suite", "core", "--seed", "7", "--json"]);
    assert!(out.status.success());
    let v = json_of(&out);
    assert_eq!(v["failures"], 0);
    assert!(v["properties"].as_array().unwrap().len() >= 5);
}

#[test]
fn verify_is_seed_reproducible() {
    let a = asymcat(&["verify", "--suite", "asymmetry", "--seed", "11", "--json"]);
    let b = asymcat(&["verify", "--suite", "asymmetry", "--seed", "11", "--json"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn bad_thread_count_is_a_parse_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_asymcat"))
        .args(["clock", "--T", "2"])
        .env("ASYMCAT_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
