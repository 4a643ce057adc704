use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn sohq(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sohq")).current_dir(dir).args(args).output().expect("spawn sohq")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = sohq(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn write_json(dir: &Path, name: &str, v: &Value) -> String {
    fs::write(dir.join(name), serde_json::to_string_pretty(v).unwrap()).unwrap();
    name.to_string()
}

fn sim_config() -> Value {
    json!({
        "n_particles": 64,
        "v0": 1.0,
        "nu": 1.0,
        "D": 0.5,
        "kernel": {"type": "smooth", "radius": 1.0},
        "dt": 0.01,
        "t_end": 0.5,
        "domain": [3.0, 3.0, 3.0],
        "seed": 11
    })
}

fn pde_config() -> Value {
    json!({
        "n_cells": 64,
        "dx": 0.1,
        "dt": 0.01,
        "t_end": 0.2,
        "d": 1.0,
        "initial": {"type": "bump", "amplitude": 0.3, "width": 0.8, "q": [0.8, 0.2, 0.4, 0.4]},
        "output_every": 5
    })
}

fn files_in(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| !p.to_string_lossy().ends_with("manifest.json"))
        .collect();
    v.sort();
    v
}

fn assert_same_files(a: &[PathBuf], b: &[PathBuf]) {
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap(), "{x:?} vs {y:?}");
    }
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path).unwrap().lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn coeffs_reports_exact_c3() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["coeffs", "--d", "1.0,2.0", "--nodes", "128", "--output", "c.csv"]);
    let rows = csv_rows(&dir.path().join("c.csv"));
    assert_eq!(rows[0].join(","), "d,c1,c2,c3,c4,ct2,ct3,ct4,quad_err");
    let c3: f64 = rows[1][3].parse().unwrap();
    assert_eq!(c3, 0.5);
    let ct3: f64 = rows[2][6].parse().unwrap();
    assert_eq!(ct3, 2.0);
    assert!(dir.path().join("c.csv.manifest.json").exists());
}

#[test]
fn gci_grid_doubling_and_cache() {
    let dir = tempfile::tempdir().unwrap();
    let c2_at = |nodes: &str| -> f64 {
        let out = format!("c{nodes}.csv");
        ok(dir.path(), &["coeffs", "--d", "1.0", "--nodes", nodes, "--cache-dir", "cache", "--output", &out]);
        csv_rows(&dir.path().join(&out))[1][2].parse().unwrap()
    };
    let (a, b) = (c2_at("256"), c2_at("512"));
    assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    assert_eq!(fs::read_dir(dir.path().join("cache")).unwrap().count(), 2);
    assert_eq!(c2_at("256"), a);

    let out = ok(dir.path(), &["gci", "--d", "1.0", "--nodes", "64", "--output", "g.csv"]);
    let summary: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(summary.is_object());
    let rows = csv_rows(&dir.path().join("g.csv"));
    assert_eq!(rows[0].join(","), "r,h,hprime");
    assert!(rows.len() > 64);
}

#[test]
fn config_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = sim_config();
    cfg.as_object_mut().unwrap().remove("dt");
    let name = write_json(dir.path(), "bad.json", &cfg);
    let out = sohq(dir.path(), &["simulate", "--config", &name]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dt"));

    let mut cfg = sim_config();
    cfg["dt"] = json!(0.5);
    let name = write_json(dir.path(), "stiff.json", &cfg);
    let out = sohq(dir.path(), &["simulate", "--config", &name]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dt"));

    assert_eq!(sohq(dir.path(), &["sample", "--d", "-1", "--n", "3"]).status.code(), Some(2));
    assert_eq!(sohq(dir.path(), &["bogus"]).status.code(), Some(2));
    assert_eq!(sohq(dir.path(), &["simulate", "--config", "missing.json"]).status.code(), Some(2));
    assert!(ok(dir.path(), &["--help"]).stdout.len() > 100);
}

#[test]
fn sample_is_reproducible_and_replayable() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["sample", "--d", "1.0", "--n", "500", "--seed", "3", "--qbar", "-0.5,0.5,0.5,0.5"];
    ok(dir.path(), &[&args[..], &["--output", "a.csv"]].concat());
    ok(dir.path(), &[&args[..], &["--output", "b.csv"]].concat());
    ok(dir.path(), &["replay", "--manifest", "a.csv.manifest.json", "--output", "c.csv"]);
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.csv")).unwrap());
    assert_eq!(a, fs::read(dir.path().join("c.csv")).unwrap());
    let rows = csv_rows(&dir.path().join("a.csv"));
    assert_eq!(rows.len(), 501);
    for r in &rows[1..] {
        let n: f64 = r.iter().map(|x| x.parse::<f64>().unwrap().powi(2)).sum();
        assert!((n - 1.0).abs() < 1e-12);
    }
    ok(dir.path(), &["sample", "--d", "1.0", "--n", "500", "--seed", "4", "--output", "d.csv"]);
    assert_ne!(a, fs::read(dir.path().join("d.csv")).unwrap());
}

#[test]
fn simulate_is_reproducible_and_replayable() {
    let dir = tempfile::tempdir().unwrap();
    let name = write_json(dir.path(), "sim.json", &sim_config());
    let base = ["simulate", "--config", name.as_str(), "--stride", "5", "--snapshot-stride", "25"];
    ok(dir.path(), &[&base[..], &["--output", "a.ndjson", "--snapshots", "snap_a.csv"]].concat());
    ok(dir.path(), &[&base[..], &["--output", "b.ndjson", "--snapshots", "snap_b.csv"]].concat());
    ok(dir.path(), &["replay", "--manifest", "a.ndjson.manifest.json", "--output", "c.ndjson"]);
    let a = fs::read(dir.path().join("a.ndjson")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.ndjson")).unwrap());
    assert_eq!(a, fs::read(dir.path().join("c.ndjson")).unwrap());
    let snap = fs::read(dir.path().join("snap_a.csv")).unwrap();
    assert_eq!(snap, fs::read(dir.path().join("snap_b.csv")).unwrap());
    assert_eq!(snap, fs::read(dir.path().join("c.ndjson.snapshots.csv")).unwrap());

    let lines: Vec<Value> = String::from_utf8(a).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 11);
    assert_eq!(lines[10]["step"], json!(50));
    assert!(lines.iter().all(|l| l["nematic_order"].as_f64().unwrap() >= 0.0));
    let snap_rows = csv_rows(&dir.path().join("snap_a.csv"));
    assert_eq!(snap_rows[0].join(","), "step,particle,x1,x2,x3,w,qx,qy,qz");
    assert_eq!(snap_rows.len(), 1 + 3 * 64);

    ok(dir.path(), &[&base[..], &["--seed", "12", "--output", "d.ndjson"]].concat());
    assert_ne!(fs::read(dir.path().join("a.ndjson")).unwrap(), fs::read(dir.path().join("d.ndjson")).unwrap());
    let manifest: Value = serde_json::from_slice(&fs::read(dir.path().join("d.ndjson.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["job"]["config"]["seed"], json!(12));
}

#[test]
fn equivalence_is_reproducible_and_replayable() {
    let dir = tempfile::tempdir().unwrap();
    let mut sim = sim_config();
    sim["n_particles"] = json!(32);
    sim["kernel"] = json!({"type": "indicator", "radius": 10.0});
    sim["D"] = json!(1.0);
    sim["t_end"] = json!(1.0);
    let cfg = json!({"sim": sim, "n_seeds": 2, "burn_in": 0.5, "sample_every": 0.25});
    let name = write_json(dir.path(), "eq.json", &cfg);
    ok(dir.path(), &["equivalence", "--config", &name, "--output", "a.json"]);
    ok(dir.path(), &["equivalence", "--config", &name, "--output", "b.json", "--threads", "2"]);
    ok(dir.path(), &["replay", "--manifest", "a.json.manifest.json", "--output", "c.json"]);
    let a = fs::read(dir.path().join("a.json")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.json")).unwrap());
    assert_eq!(a, fs::read(dir.path().join("c.json")).unwrap());
    let report: Value = serde_json::from_slice(&a).unwrap();
    assert!(report["ks_p_value"].as_f64().unwrap() >= 0.0);
}

#[test]
fn pde_is_reproducible_and_replayable() {
    let dir = tempfile::tempdir().unwrap();
    let name = write_json(dir.path(), "pde.json", &pde_config());
    ok(dir.path(), &["pde", "--config", &name, "--output-dir", "a"]);
    ok(dir.path(), &["pde", "--config", &name, "--output-dir", "b"]);
    ok(dir.path(), &["replay", "--manifest", "a/manifest.json", "--output", "c"]);
    let fa = files_in(&dir.path().join("a"));
    assert_eq!(fa.len(), 5);
    assert_same_files(&fa, &files_in(&dir.path().join("b")));
    assert_same_files(&fa, &files_in(&dir.path().join("c")));
    let rows = csv_rows(&fa[0]);
    assert_eq!(rows[0].join(","), "cell,rho,w,qx,qy,qz");
    assert_eq!(rows.len(), 65);

    let mut bad = pde_config();
    bad["dt"] = json!(1.0);
    let name = write_json(dir.path(), "cfl.json", &bad);
    let out = sohq(dir.path(), &["pde", "--config", &name, "--output-dir", "d"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gci_and_coeffs_are_replayable() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["gci", "--d", "0.5", "--nodes", "64", "--output", "g.csv"]);
    ok(dir.path(), &["replay", "--manifest", "g.csv.manifest.json", "--output", "h.csv"]);
    assert_eq!(fs::read(dir.path().join("g.csv")).unwrap(), fs::read(dir.path().join("h.csv")).unwrap());
    assert_eq!(
        fs::read(dir.path().join("g.csv.summary.json")).unwrap(),
        fs::read(dir.path().join("h.csv.summary.json")).unwrap()
    );
    ok(dir.path(), &["coeffs", "--d", "0.5", "--nodes", "64", "--output", "c.csv"]);
    ok(dir.path(), &["replay", "--manifest", "c.csv.manifest.json", "--output", "e.csv"]);
    assert_eq!(fs::read(dir.path().join("c.csv")).unwrap(), fs::read(dir.path().join("e.csv")).unwrap());
}
