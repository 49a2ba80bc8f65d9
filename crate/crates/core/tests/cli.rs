use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_neutral-stab"))
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("problem.toml");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn config(name: &str) -> String {
    configs().join(name).to_str().unwrap().to_string()
}

#[test]
fn check_sine_rate_writes_csv() {
    let dir = TempDir::new().unwrap();
    let o = run(&["check", "--config", &config("sine_rate.toml")], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("certified: true"));

    let text = fs::read_to_string(dir.path().join("check.csv")).unwrap();
    assert!(text.lines().any(|l| l == "# param.r = 0.2"));
    let body: String = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n");
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        [
            "criterion",
            "lhs",
            "rhs",
            "margin",
            "satisfied",
            "precondition_ok",
            "notes"
        ]
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    let thm_a = rows.iter().find(|r| &r[0] == "THM1_A").unwrap();
    assert_eq!(&thm_a[4], "true");
    let lhs: f64 = thm_a[1].parse().unwrap();
    assert!((lhs - 0.2 * 1.3016667).abs() < 1e-6, "{lhs}");
}

#[test]
fn check_reports_not_certified() {
    let dir = TempDir::new().unwrap();
    let body = fs::read_to_string(configs().join("sine_rate.toml"))
        .unwrap()
        .replace("r = 0.2", "r = 0.5");
    let cfg = write_config(dir.path(), &body);
    let o = run(&["check", "--config", &cfg, "--format", "json"], dir.path());
    assert_eq!(code(&o), 10);
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("check.json")).unwrap()).unwrap();
    assert_eq!(v["certified"], false);
    assert!(v["verdicts"].as_array().unwrap().len() >= 4);
}

#[test]
fn logistic_check_uses_linearization() {
    let dir = TempDir::new().unwrap();
    let o = run(
        &["check", "--config", &config("logistic.toml"), "--format", "json"],
        dir.path(),
    );
    // only the printed corollary holds at tau = 0.9, and it is not counted
    assert_eq!(code(&o), 10, "{}", String::from_utf8_lossy(&o.stdout));
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("check.json")).unwrap()).unwrap();
    assert_eq!(v["kind"], "logistic");
    assert_eq!(v["certified"], false);
    assert_eq!(v["certified_as_printed"], true);
    let a_max = v["bounds"]["bounds"]["A0"].as_f64().unwrap();
    assert!((a_max - 0.8).abs() < 1e-12);
}

#[test]
fn simulate_ode_writes_trajectory() {
    let dir = TempDir::new().unwrap();
    let o = run(&["simulate", "--config", &config("ode.toml")], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let traj = fs::read_to_string(dir.path().join("simulate_trajectory.csv")).unwrap();
    let mut lines = traj.lines();
    assert_eq!(lines.next(), Some("t,x,dx"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 10_001);
    let last: Vec<f64> = rows.last().unwrap().split(',').map(|s| s.parse().unwrap()).collect();
    assert!((last[0] - 10.0).abs() < 1e-9);
    assert!((last[1] - (-10.0f64).exp()).abs() < 1e-7);
    let summary = fs::read_to_string(dir.path().join("simulate.csv")).unwrap();
    assert!(summary.contains("decaying"));
}

#[test]
fn simulate_flags_divergence() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "[equation]\nb = \"-0.5\"\nphi = \"1\"\n[simulate]\nT = 100\ndt = 0.01\n",
    );
    let o = run(&["simulate", "--config", &cfg, "--format", "json"], dir.path());
    assert_eq!(code(&o), 10);
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("simulate.json")).unwrap()).unwrap();
    assert_eq!(v["status"]["status"], "diverged");
}

#[test]
fn fundamental_overrides() {
    let dir = TempDir::new().unwrap();
    let o = run(
        &[
            "fundamental",
            "--config",
            &config("ode.toml"),
            "--s",
            "1",
            "--horizon",
            "30",
            "--dt",
            "0.01",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let traj = fs::read_to_string(dir.path().join("fundamental_trajectory.csv")).unwrap();
    let first: Vec<f64> = traj
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|s| s.parse().unwrap())
        .collect();
    assert_eq!(first[0], 1.0);
    assert_eq!(first[1], 1.0);
}

#[test]
fn sweep_sine_rate_thresholdss() {
    let dir = TempDir::new().unwrap();
    let o = run(&["sweep", "--config", &config("sine_rate.toml")], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("thresholds.json")).unwrap()).unwrap();
    let thm_a = v["thresholds"]
        .as_array()
        .unwrap()
        .iter()
        .find(|t| t["criterion"] == "THM1_A")
        .unwrap();
    let x = thm_a["thresholds"][0].as_f64().unwrap();
    assert!((x - 0.4 / 1.3016667).abs() < 1e-5, "{x}");
    let grid = fs::read_to_string(dir.path().join("sweep_grid.csv")).unwrap();
    let rows = grid.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(rows, 1 + 50 * 4);
}

#[test]
fn config_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let o = run(&["check", "--config", "/nonexistent/problem.toml"], dir.path());
    assert_eq!(code(&o), 2);

    let cfg = write_config(dir.path(), "[equation]\nb = \"1\"\nphi = \"1\"\nbogus = 3\n");
    assert_eq!(code(&run(&["check", "--config", &cfg], dir.path())), 2);

    let cfg = write_config(dir.path(), "[equation]\nb = \"1\"\nphi = \"1 +\"\n");
    assert_eq!(code(&run(&["simulate", "--config", &cfg], dir.path())), 2);

    let o = run(&["simulate", "--config", &config("ode.toml"), "--dt", "-1"], dir.path());
    assert_eq!(code(&o), 2);

    let o = run(&["sweep", "--config", &config("ode.toml")], dir.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn unwritable_output_exits_1() {
    let dir = TempDir::new().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let o = run(&["check", "--config", &config("ode.toml")], &blocker);
    assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn in_process_entry_point() {
    assert_eq!(neutral_stab::cli::run(["neutral-stab", "--help"]), 0);
    assert_eq!(neutral_stab::cli::run(["neutral-stab", "frobnicate"]), 2);
}
