use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nlslab::{ExperimentConfig, ExperimentName};
use serde_json::Value;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, cfg: &ExperimentConfig) -> PathBuf {
    let path = dir.join("config.toml");
    std::fs::write(&path, cfg.to_toml()).unwrap();
    path
}

fn manifest_line(out: &str) -> PathBuf {
    let line = out.lines().find_map(|l| l.strip_prefix("manifest: ")).expect("manifest path printed");
    PathBuf::from(line.trim())
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn list_names_every_experiment() {
    let o = lab(&["list"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for name in ExperimentName::ALL {
        assert!(text.contains(name.as_str()), "{name} missing from list");
    }
}

#[test]
fn preset_output_parses_back() {
    for name in ExperimentName::ALL {
        let o = lab(&["preset", name.as_str()]);
        assert!(o.status.success());
        let cfg = ExperimentConfig::from_toml(&stdout(&o)).unwrap();
        assert_eq!(cfg, ExperimentConfig::preset(name));
    }
}

#[test]
fn unknown_preset_is_an_error() {
    assert_eq!(lab(&["preset", "no-such-thing"]).status.code(), Some(2));
}

#[test]
fn ode_gap_run_verifies_and_reproduces() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::preset(ExperimentName::OdeGap);
    cfg.output = tmp.path().join("runs");
    let config = write_config(tmp.path(), &cfg);

    let first = lab(&["run", config.to_str().unwrap()]);
    assert_eq!(first.status.code(), Some(0), "{}", stdout(&first));
    let manifest = manifest_line(&stdout(&first));
    let json: Value = serde_json::from_slice(&std::fs::read(&manifest).unwrap()).unwrap();
    assert_eq!(json["verdict"], Value::Bool(true));

    let verified = lab(&["verify", manifest.to_str().unwrap()]);
    assert_eq!(verified.status.code(), Some(0));
    assert!(stdout(&verified).contains("files: ok"));

    let run_dir = manifest.parent().unwrap();
    let before = csv_files(run_dir);
    assert!(!before.is_empty());
    std::fs::remove_dir_all(run_dir).unwrap();
    let second = lab(&["run", config.to_str().unwrap()]);
    assert_eq!(second.status.code(), Some(0));
    assert_eq!(manifest_line(&stdout(&second)), manifest);
    assert_eq!(csv_files(run_dir), before);
}

#[test]
fn verify_detects_tampering() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::preset(ExperimentName::OdeGap);
    cfg.output = tmp.path().join("runs");
    let config = write_config(tmp.path(), &cfg);
    let manifest = manifest_line(&stdout(&lab(&["run", config.to_str().unwrap()])));
    let (name, mut bytes) = csv_files(manifest.parent().unwrap()).remove(0);
    bytes.extend_from_slice(b"0\n");
    std::fs::write(manifest.parent().unwrap().join(&name), bytes).unwrap();
    let o = lab(&["verify", manifest.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains(&name));
}

#[test]
fn empty_sigma_list_fails_before_compute() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::preset(ExperimentName::LocalContinuity);
    cfg.output = tmp.path().join("runs");
    let text = cfg.to_toml();
    let text: String = text
        .lines()
        .map(|l| if l.starts_with("sigma") { "sigma = []" } else { l })
        .collect::<Vec<_>>()
        .join("\n");
    let path = tmp.path().join("bad.toml");
    std::fs::write(&path, text).unwrap();
    let o = lab(&["run", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sigma"));
    assert!(!cfg.output.exists());
}

#[test]
fn ode_prints_csv() {
    let o = lab(&["ode", "--kind", "generic", "--alpha", "2", "--t-end", "10", "--samples", "5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with('t'));
    let rows: Vec<Vec<f64>> =
        lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert!(rows.len() >= 5);
    for r in rows {
        assert!((r[1] - (1.0 + r[0] * r[0]).sqrt()).abs() < 1e-8);
    }
}

#[test]
fn simulate_then_metrics_and_fp() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sim");
    let o = lab(&[
        "simulate", "--model", "log", "--n", "512", "--half-width", "16", "--dt", "0.01", "--t-end", "0.5",
        "--probes", "2", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("probes.csv").exists());
    let mut fields: Vec<_> = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "nlsf"))
        .collect();
    fields.sort();
    assert!(fields.len() >= 2);
    let (a, b) = (fields[0].to_str().unwrap(), fields[fields.len() - 1].to_str().unwrap());

    let m = lab(&["metrics", a, a]);
    assert!(m.status.success());
    let v: Value = serde_json::from_slice(&m.stdout).unwrap();
    assert_eq!(v["w1"].as_f64().unwrap(), 0.0);
    let m = lab(&["metrics", a, b]);
    let v: Value = serde_json::from_slice(&m.stdout).unwrap();
    assert!(v["w1"].as_f64().unwrap() > 0.0);

    let fp_out = tmp.path().join("fp.nlsf");
    let o = lab(&["fp", "--s", "0.3", "--input", b, "--output", fp_out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let before = nlslab_core::checkpoint::read(Path::new(b)).unwrap().to_density().mass();
    let after = nlslab_core::checkpoint::read(&fp_out).unwrap().to_density().mass();
    assert!((after - before).abs() < 1e-8 * before);
}

#[test]
fn fp_check_gaussian_contraction() {
    let o = lab(&["fp-check", "contraction", "--s", "0.5", "--mean", "1.0", "--var", "0.3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["ok"], Value::Bool(true));
}
