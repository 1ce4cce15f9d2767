use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn thinfilm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thinfilm")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, v: &Value) -> String {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(v).unwrap()).unwrap();
    path.to_string_lossy().into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn without_wall_time(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("wall_time_s");
    v
}

fn small_evolve(out: &Path) -> Value {
    json!({
        "kind": "evolve", "n": 1, "q": 2.5, "alpha": 0.2145, "grid": { "N": 128 },
        "perturbation": { "kind": "second_derivative", "amplitude": 1e-3 },
        "controls": { "epsilon": 1e-8, "t_max": 2.0 },
        "output": { "dir": out.to_string_lossy(), "snapshot_every": 20 }
    })
}

#[test]
fn steady_partner_manifest() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("steady");
    let cfg = write_config(
        tmp.path(),
        "steady.json",
        &json!({ "q": 1.768, "alpha": 0.05, "partner": true, "grid": { "N": 256 } }),
    );
    let res = thinfilm(&["steady", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let m = read_json(&out.join("manifest.json"));
    let primary = &m["base"]["reference_steady"];
    let partner = &m["base"]["steady"];
    assert!((primary["E"].as_f64().unwrap() - 39.46).abs() < 0.05);
    assert!((partner["D"].as_f64().unwrap() - 0.8010).abs() < 0.002);
    assert!((partner["A"].as_f64().unwrap() - primary["A"].as_f64().unwrap()).abs() < 1e-6);
    assert!(out.join("snap_0.csv").exists());
    assert!(out.join("snap_reference.csv").exists());
}

#[test]
fn bifurcation_branch_is_stable_for_q_1_5() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("bif");
    let cfg = write_config(tmp.path(), "bif.json", &json!({ "q": 1.5, "bond": 1.083, "alpha_count": 12 }));
    let res = thinfilm(&["bifurcation", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let csv = std::fs::read_to_string(out.join("branch.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("alpha,E,amplitude,stability"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 12);
    assert!(rows.iter().all(|r| r.ends_with(",Stable")));
}

#[test]
fn evolve_regenerates_identically_from_its_echoed_config() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("run");
    let cfg = write_config(tmp.path(), "evolve.json", &small_evolve(&out));
    let res = thinfilm(&["evolve", "--config", &cfg]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let first = read_json(&out.join("manifest.json"));
    let series = std::fs::read_to_string(out.join("series.csv")).unwrap();
    assert!(series.starts_with("t,dt,hmin,hmax,mass,energy,resolved\n"));

    let echoed = write_config(tmp.path(), "echoed.json", &first["config"]);
    std::fs::remove_dir_all(&out).unwrap();
    let res = thinfilm(&["evolve", "--config", &echoed]);
    assert!(res.status.success());
    let second = read_json(&out.join("manifest.json"));
    assert_eq!(without_wall_time(first), without_wall_time(second));
    assert_eq!(series, std::fs::read_to_string(out.join("series.csv")).unwrap());
}

#[test]
fn config_errors_name_the_offending_field() {
    let tmp = TempDir::new().unwrap();
    let unknown = tmp.path().join("unknown.json");
    std::fs::write(&unknown, "{\n  \"q\": 2.5,\n  \"alhpa\": 0.2\n}\n").unwrap();
    let res = thinfilm(&["evolve", "--config", unknown.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("alhpa") && err.contains("line 3"), "{err}");

    let both = write_config(tmp.path(), "both.json", &json!({ "q": 2.5, "alpha": 0.2, "hbar": 1.0 }));
    let res = thinfilm(&["evolve", "--config", &both]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("config field"));

    let mismatch = write_config(tmp.path(), "kind.json", &json!({ "kind": "steady", "q": 2.5, "alpha": 0.2 }));
    let res = thinfilm(&["evolve", "--config", &mismatch]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn sweep_rows_are_sorted_by_exponent() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("sweep");
    let cfg = write_config(
        tmp.path(),
        "sweep.json",
        &json!({
            "kind": "sweep", "q": 2.5, "n_list": [0, 1, 2], "alpha": 0.2145, "grid": { "N": 128 },
            "perturbation": { "kind": "second_derivative", "amplitude": 1e-3 },
            "controls": { "epsilon": 1e-8, "t_max": 1.0 },
            "workers": 2
        }),
    );
    let res = thinfilm(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    let ns: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ns, ["0", "1", "2"]);
    let m = read_json(&out.join("manifest.json"));
    let runs = m["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 3);
    assert_eq!(runs[2]["m"].as_f64(), Some(3.5));
}

#[test]
fn analyze_recomputes_diagnostics() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("run");
    let cfg = write_config(tmp.path(), "evolve.json", &small_evolve(&out));
    assert!(thinfilm(&["evolve", "--config", &cfg]).status.success());
    let analyze = write_config(
        tmp.path(),
        "analyze.json",
        &json!({ "kind": "analyze", "run_dir": out.to_string_lossy(), "output": { "dir": out.to_string_lossy() } }),
    );
    let res = thinfilm(&["analyze", "--config", &analyze]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let d = read_json(&out.join("diagnostics.json"));
    let manifest = read_json(&out.join("manifest.json"));
    assert!(d["mass_drift"].as_f64().unwrap() < 1e-12);
    assert_eq!(d["rows"].as_u64().unwrap() as usize, manifest["accepted_steps"].as_u64().unwrap() as usize + 1);
}

#[test]
fn shipped_configs_resolve() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            let cfg = thinfilm_cli::ExperimentConfig::load(&path).unwrap();
            cfg.resolve().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 5);
}
