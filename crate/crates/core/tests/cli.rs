use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_gdnls");

fn gdnls(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("cfg.json");
    std::fs::write(&path, body).unwrap();
    path
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// The single run directory under `root`.
fn only_run(root: &Path) -> PathBuf {
    let mut dirs: Vec<_> = std::fs::read_dir(root).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(dirs.len(), 1, "{dirs:?}");
    dirs.pop().unwrap()
}

const PLANE_WAVE: &str = r#"{
  "num_modes": 16,
  "model": { "sigma": 1.0 },
  "solver": { "dt": 0.001, "t_final": 0.2, "snapshot_every": 10, "invariant_every": 10 },
  "initial": { "kind": "plane_wave", "amplitude": [0.5, 0.0], "k": 2 }
}"#;

#[test]
fn zero_datum_gives_zero_invariants() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{
  "num_modes": 8,
  "model": { "sigma": 1.5, "cutoff": 4 },
  "solver": { "dt": 0.01, "t_final": 0.1 },
  "initial": { "kind": "mode_list", "modes": [] }
}"#,
    );
    let out = tmp.path().join("out");
    let o = gdnls(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(only_run(&out).join("invariants.csv")).unwrap();
    let mut lines = csv.lines();
    lines.next().unwrap();
    for line in lines {
        assert!(line.split(',').skip(1).all(|v| v.parse::<f64>().unwrap() == 0.0), "{line}");
    }
}

#[test]
fn plane_wave_run_reports_its_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), PLANE_WAVE);
    let out = tmp.path().join("out");
    let o = gdnls(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("PASS plane-wave"), "{}", stdout(&o));
    let dir = only_run(&out);
    for f in ["manifest.json", "invariants.csv", "config.json", "snapshots/index.csv"] {
        assert!(dir.join(f).exists(), "{f}");
    }

    // Probes read the stored trajectory back.
    let reports = tmp.path().join("reports");
    let o = gdnls(&[
        "probe",
        "--name",
        "lower-order",
        "--r",
        "2",
        "--trajectory",
        dir.to_str().unwrap(),
        "--out",
        reports.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).starts_with("PASS lower_order"), "{}", stdout(&o));
    let rep = only_run(&reports);
    assert!(rep.join("report.json").exists());
    assert!(rep.join("samples.csv").exists());
}

#[test]
fn overrides_change_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), PLANE_WAVE);
    let out = tmp.path().join("out");
    let o = gdnls(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--override",
        "solver.t_final=0.05",
        "--seed",
        "9",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let dir = only_run(&out);
    assert!(dir.file_name().unwrap().to_str().unwrap().ends_with("seed9"));
    let stored = std::fs::read_to_string(dir.join("config.json")).unwrap();
    assert!(stored.contains("0.05"), "{stored}");
}

#[test]
fn bad_configs_exit_with_usage_status() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        (PLANE_WAVE.replace("\"sigma\"", "\"sigmaa\""), "sigmaa"),
        (PLANE_WAVE.replace("\"sigma\": 1.0", "\"sigma\": 1.0, \"cutoff\": 32"), "num_modes"),
        (PLANE_WAVE.replace("0.001", "\"fast\""), "solver.dt"),
        (PLANE_WAVE.replace("\"k\": 2", "\"k\": 2,"), "line"),
    ];
    for (body, needle) in cases {
        let cfg = write_config(tmp.path(), &body);
        let o = gdnls(&["run", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{needle}");
        assert!(stderr(&o).contains(needle), "{needle}: {}", stderr(&o));
    }
    let o = gdnls(&["run"]);
    assert_eq!(o.status.code(), Some(2));
    let o = gdnls(&["probe", "--name", "no-such-probe"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tampered_trajectory_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), PLANE_WAVE);
    let out = tmp.path().join("out");
    assert!(gdnls(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .status
        .success());
    let dir = only_run(&out);
    let snap = dir.join("snapshots/000001.bin");
    let mut bytes = std::fs::read(&snap).unwrap();
    bytes[0] ^= 1;
    std::fs::write(&snap, bytes).unwrap();
    let o = gdnls(&["probe", "--name", "hamiltonian", "--trajectory", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_static_small() {
    let tmp = tempfile::tempdir().unwrap();
    let o = gdnls(&["verify-static", "--samples", "20", "--seed", "3", "--out", tmp.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("PASS")).count(), 4, "{}", stdout(&o));
    assert_eq!(std::fs::read_dir(tmp.path()).unwrap().count(), 4);
}
