use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dualrail")).args(args).output().unwrap()
}

fn run_in(cmd: &str, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

fn data_lines(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path).unwrap().lines().filter(|l| !l.starts_with('#')).map(String::from).collect()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["no-such-study"]).status.code(), Some(1));
    assert_eq!(run(&["project", "--seed", "x"]).status.code(), Some(1));
    let bad = run_in("project", dir.path(), &["--config", "/nonexistent/config.toml"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("/nonexistent/config.toml"));
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[sampler]\np = 2.0\n").unwrap();
    assert_eq!(run_in("project", dir.path(), &["--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn projection_json_has_three_rates() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in("project", dir.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("projection.json")).unwrap()).unwrap();
    for key in ["p_intrinsic", "p_pauli_induced", "p_fp"] {
        let p = v["result"][key].as_f64().unwrap();
        assert!(p > 0.0 && p < 0.1, "{key} = {p}");
    }
    assert!(v["config"].is_object());
}

#[test]
fn scheme_comparison_has_four_rows() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_in("compare-schemes", dir.path(), &[]).status.success());
    let lines = data_lines(&dir.path().join("scheme_comparison.csv"));
    assert_eq!(lines[0], "scheme_index,upper_level,p_erasure,p_pauli,duration_us");
    assert_eq!(lines.len(), 5);
}

#[test]
fn outputs_are_reproducible_and_echo_seed() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        assert!(run_in("sample-channel", d.path(), &["--seed", "1234"]).status.success());
        assert!(run_in("parity", d.path(), &["--seed", "1234"]).status.success());
    }
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(a.path().join("sample_channel.json")).unwrap()).unwrap();
    assert_eq!(v["seed"], 1234);
    assert_eq!(v["config"]["seed"], 1234);
    for entry in std::fs::read_dir(a.path()).unwrap() {
        let p = entry.unwrap().path();
        let other = b.path().join(p.file_name().unwrap());
        assert_eq!(std::fs::read(&p).unwrap(), std::fs::read(other).unwrap(), "{} differs", p.display());
        if p.extension().is_some_and(|e| e == "csv") {
            assert!(std::fs::read_to_string(&p).unwrap().starts_with("# seed = 1234\n"));
        }
    }
}

#[test]
fn sequential_jobs_match_parallel() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert!(run_in("parity", a.path(), &["--jobs", "1"]).status.success());
    assert!(run_in("parity", b.path(), &["--jobs", "2"]).status.success());
    for entry in std::fs::read_dir(a.path()).unwrap() {
        let p = entry.unwrap().path();
        assert_eq!(std::fs::read(&p).unwrap(), std::fs::read(b.path().join(p.file_name().unwrap())).unwrap());
    }
}
