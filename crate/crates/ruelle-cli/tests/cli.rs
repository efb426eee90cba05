//! End-to-end tests of the `ruelle` binary: exit codes, artifact layout and
//! byte-identical reruns.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_ruelle")
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ruelle-cli-test-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

const RPF_CONFIG: &str = r#"
experiment = "rpf"

[alphabet]
kind = "two-point"

[potential]
family = "nn-ising"
beta = 1.0

[numerics]
depth = 1
tol = 1e-14
itmax = 50000

[criteria]
lambda = 1.5430806348152437
lambda-tol = 1e-10
"#;

#[test]
fn run_passes_and_writes_artifacts() {
    let dir = tmp_dir("pass");
    let cfg = write_config(&dir, "rpf.toml", RPF_CONFIG);
    let out = dir.join("out");
    let res = run(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stdout)
    );
    let report = out.join("rpf").join("report.json");
    let text = fs::read_to_string(&report).unwrap();
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(json["status"], "pass");
    assert_eq!(json["experiment"], "rpf");
    assert!(json["config_hash"].as_str().unwrap().starts_with("sha256:"));
    assert!(json["metrics"]["lambda"].as_f64().unwrap() > 1.5);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tmp_dir("determinism");
    let body = r#"
experiment = "correlations"

[alphabet]
kind = "two-point"

[potential]
family = "nn-ising"
beta = 1.0

[numerics]
depth = 1
tol = 1e-15
itmax = 50000
n-max = 12
seed = 42
"#;
    let cfg = write_config(&dir, "corr.toml", body);
    let out1 = dir.join("a");
    let out2 = dir.join("b");
    for out in [&out1, &out2] {
        let res = run(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(res.status.success());
    }
    for name in ["report.json", "series.csv"] {
        let a = fs::read(out1.join("corr").join(name)).unwrap();
        let b = fs::read(out2.join("corr").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}

#[test]
fn failing_criterion_exits_one() {
    let dir = tmp_dir("fail");
    let body = RPF_CONFIG.replace("lambda = 1.5430806348152437", "lambda = 2.0");
    let cfg = write_config(&dir, "bad.toml", &body);
    let out = dir.join("out");
    let res = run(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("bad").join("report.json")).unwrap())
            .unwrap();
    assert_eq!(json["status"], "fail");
}

#[test]
fn unknown_keys_are_usage_errors() {
    let dir = tmp_dir("badkey");
    let body = format!("{RPF_CONFIG}\nunexpected-key = 1\n");
    let cfg = write_config(&dir, "unknown.toml", &body);
    let res = run(&["run", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(64));
}

#[test]
fn missing_section_is_usage_error() {
    let dir = tmp_dir("missing");
    let cfg = write_config(&dir, "m.toml", "experiment = \"rpf\"\n");
    let res = run(&["run", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(64));
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tmp_dir("seed");
    let cfg = write_config(&dir, "rpf.toml", RPF_CONFIG);
    let out = dir.join("out");
    let res = run(&[
        "run",
        cfg.to_str().unwrap(),
        "--seed",
        "777",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success());
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("rpf").join("report.json")).unwrap())
            .unwrap();
    assert_eq!(json["seed"], 777);
}

#[test]
fn resource_limit_exits_three() {
    let dir = tmp_dir("resource");
    let body = r#"
experiment = "ising-gks"

[ising]
alpha = 3.0
window-lo = 1
window-hi = 30
"#;
    let cfg = write_config(&dir, "big.toml", body);
    let res = run(&["run", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(3));
}

#[test]
fn env_var_sets_output_root() {
    let dir = tmp_dir("env");
    let cfg = write_config(&dir, "rpf.toml", RPF_CONFIG);
    let out = dir.join("envout");
    let res = Command::new(bin())
        .args(["run", cfg.to_str().unwrap()])
        .env("RUELLE_OUT", &out)
        .output()
        .unwrap();
    assert!(res.status.success());
    assert!(out.join("rpf").join("report.json").exists());
}

#[test]
fn describe_lists_criteria_ids() {
    let res = run(&["describe", "spectrum"]);
    assert!(res.status.success());
    let text = String::from_utf8_lossy(&res.stdout);
    assert!(text.contains("spectrum.tau"));
    let bad = run(&["describe", "nope"]);
    assert_eq!(bad.status.code(), Some(64));
}

#[test]
fn suite_runs_and_aggregates() {
    let dir = tmp_dir("suite");
    write_config(&dir, "rpf.toml", RPF_CONFIG);
    let meta = write_config(
        &dir,
        "meta.toml",
        r#"
[[experiments]]
name = "one"
config = "rpf.toml"

[[experiments]]
name = "two"
config = "rpf.toml"
"#,
    );
    let out = dir.join("out");
    let res = run(&[
        "suite",
        meta.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--threads",
        "2",
    ]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("suite_report.json")).unwrap()).unwrap();
    assert_eq!(json["status"], "pass");
    assert_eq!(json["experiments"].as_array().unwrap().len(), 2);
    assert!(out.join("one").join("report.json").exists());
    assert!(out.join("two").join("report.json").exists());
}

#[test]
fn csv_schema_is_stable() {
    let dir = tmp_dir("csv");
    let body = r#"
experiment = "ising-decay"

[ising]
alpha = 3.0
window-lo = 1
window-hi = 10
n-list = [1, 2, 3, 4, 5, 6, 7, 8]
"#;
    let cfg = write_config(&dir, "decay.toml", body);
    let out = dir.join("out");
    let res = run(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stdout)
    );
    let csv = fs::read_to_string(out.join("decay").join("two_point.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,value,tanh_bound,taylor_bound,margin"
    );
    assert_eq!(lines.count(), 8);
    assert!(!csv.contains('\r'), "LF line endings required");
}
