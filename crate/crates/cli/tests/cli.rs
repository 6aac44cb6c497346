use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use quintlab_cli::config::ExperimentConfig;

fn lab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lab"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("lab.toml");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn couplings_for_depth_three() {
    let tmp = tempfile::tempdir().unwrap();
    let out = lab(&["couplings", "--k", "3", "--out", "c"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&tmp.path().join("c"));
    assert_eq!(r["metrics"]["map_count"], 15.0);
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["kind"], "couplings");
    assert!(tmp.path().join("c/plot/levels.dat").exists());
    assert!(tmp.path().join("c/plot/levels.gp").exists());
}

#[test]
fn zero_time_nls_run_has_one_snapshot() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[nls]\ndim = 1\nn = 16\ntime = 0.0\n");
    let out = lab(&["nls-run", "--config", &cfg, "--out", "run"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(tmp.path().join("run/snapshots.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.starts_with("time,mass,energy"));
}

#[test]
fn identical_runs_give_identical_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "seed = 11\n[nls]\ndim = 2\nn = 16\ntime = 0.1\ndt = 0.01\nsnapshot_every = 2\n[chaos]\nparticles = [2, 3]\ntimes = [0.05]\n",
    );
    for kind in ["nls-run", "chaos"] {
        for dir in ["a", "b"] {
            let out = lab(&[kind, "--config", &cfg, "--out", &format!("{kind}-{dir}")], tmp.path());
            assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        }
        let a = tmp.path().join(format!("{kind}-a"));
        let b = tmp.path().join(format!("{kind}-b"));
        for entry in fs::read_dir(&a).unwrap() {
            let name = entry.unwrap().file_name();
            if name.to_string_lossy().ends_with(".csv") || name.to_string_lossy().ends_with(".bin") {
                assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap(), "{name:?}");
            }
        }
    }
    let other = lab(&["nls-run", "--config", &cfg, "--seed", "12", "--out", "c"], tmp.path());
    assert_eq!(other.status.code(), Some(0));
    assert_ne!(
        fs::read(tmp.path().join("nls-run-a/snapshots.csv")).unwrap(),
        fs::read(tmp.path().join("c/snapshots.csv")).unwrap()
    );
}

#[test]
fn validation_errors_name_every_field_and_leave_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[nls]\nn = 7\ndt = -0.1\n");
    let out = lab(&["nls-run", "--config", &cfg, "--out", "bad"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("nls.n") && err.contains("nls.dt"), "{err}");
    assert!(!tmp.path().join("bad").exists());

    let cfg = write_config(tmp.path(), "[nls]\nspeed = 3\n");
    let out = lab(&["nls-run", "--config", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("speed"));
}

#[test]
fn runtime_failures_remove_partial_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    // A potential narrower than the grid passes validation but not the solver.
    let cfg = write_config(
        tmp.path(),
        "[manybody]\nn = 8\nparticles = 2\npotential = { type = \"truncated-gaussian\", sigma = 0.01, mass = 1.0 }\n",
    );
    let out = lab(&["manybody-run", "--config", &cfg, "--out", "mb"], tmp.path());
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!tmp.path().join("mb").exists());
}

#[test]
fn tolerance_failure_exits_one_and_keeps_the_report() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[hufl]\npower_law_tolerance = 1e-300\n");
    let out = lab(&["hufl", "--config", &cfg, "--out", "h"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&tmp.path().join("h"))["passed"], false);
}

#[test]
fn probe_requires_a_lemma_and_writes_its_table() {
    let tmp = tempfile::tempdir().unwrap();
    let out = lab(&["probe"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let cfg = write_config(tmp.path(), "[probe]\nsamples = 4\n");
    let out = lab(&["probe", "--lemma", "approx-identity", "--config", &cfg, "--out", "p"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let dat = fs::read_to_string(tmp.path().join("p/plot/ratios_approx-identity.dat")).unwrap();
    assert!(dat.starts_with("# alpha max_ratio"));
    assert_eq!(dat.lines().count(), 4);
}

#[test]
fn config_round_trips() {
    let mut cfg = ExperimentConfig {
        seed: 42,
        ..ExperimentConfig::default()
    };
    cfg.nls.cutoffs = vec![1.0, 8.0];
    cfg.chaos.coupling = Some(0.25);
    cfg.probe.samples = Some(9);
    let text = cfg.emit();
    assert_eq!(ExperimentConfig::parse(&text).unwrap(), cfg);
    assert_eq!(ExperimentConfig::parse(&ExperimentConfig::default().emit()).unwrap(), ExperimentConfig::default());
}

#[test]
fn shipped_defaults_match_the_built_in_ones() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/defaults.toml");
    let shipped = ExperimentConfig::load(&path).unwrap();
    assert_eq!(shipped, ExperimentConfig::default());
}
