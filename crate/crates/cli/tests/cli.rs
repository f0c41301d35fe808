use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn transport(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_transport"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn tmp(label: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("transport-cli-{}-{label}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gen_suite(dir: &Path) -> PathBuf {
    let suite = dir.join("suite");
    let o = transport(&["--seed", "3", "gen", "--houses", "2", "--tasks-per-house", "2", "--out", s(&suite)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("2 houses, 4 tasks"));
    suite
}

#[test]
fn gen_validate_run_replay() {
    let dir = tmp("flow");
    let suite = gen_suite(&dir);

    let o = transport(&["validate", "--suite", s(&suite)]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "ok: 2 houses, 4 tasks");

    let traces = dir.join("traces");
    let hist = dir.join("hist.csv");
    let o = transport(&[
        "--seed", "1", "--format", "structured", "run", "--suite", s(&suite), "--agent", "frontier", "--budget", "150",
        "--traces", s(&traces), "--histogram", s(&hist), "--parallelism", "2",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let episodes = report["episodes"].as_array().unwrap();
    assert_eq!(episodes.len(), 4);
    assert!(episodes.iter().all(|e| e["steps"].as_u64().unwrap() <= 150));
    assert_eq!(std::fs::read_to_string(&hist).unwrap().lines().count(), 3);

    let trace = traces.join(episodes[0]["trace_file"].as_str().unwrap());
    let out = dir.join("replay.ppm");
    let o = transport(&["replay", "--scene", s(&suite), "--trace", s(&trace), "--out", s(&out), "--scale", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let img = std::fs::read(&out).unwrap();
    assert!(img.starts_with(b"P6\n80 80\n255\n"));

    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn same_seed_gives_same_table() {
    let dir = tmp("repeat");
    let suite = gen_suite(&dir);
    let args = ["--seed", "5", "run", "--suite", s(&suite), "--agent", "random", "--budget", "100"];
    let a = transport(&args);
    let b = transport(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn config_file_and_overrides_apply() {
    let dir = tmp("config");
    let suite = gen_suite(&dir);
    let cfg = dir.join("cfg.toml");
    std::fs::write(&cfg, "budget = 40\np_drop = 0.0\n").unwrap();
    let run = |extra: &[&str]| {
        let mut args = vec!["--config", s(&cfg), "--format", "structured"];
        args.extend_from_slice(extra);
        args.extend_from_slice(&["run", "--suite", s(&suite), "--agent", "random"]);
        let o = transport(&args);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        v["episodes"].as_array().unwrap().iter().map(|e| e["steps"].as_u64().unwrap()).max().unwrap()
    };
    assert!(run(&[]) <= 40);
    assert!(run(&["--set", "budget=20"]) <= 20);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(transport(&["run", "--bogus"]).status.code(), Some(2));
    assert_eq!(transport(&[]).status.code(), Some(2));
    let o = transport(&["run", "--suite", "x", "--agent", "nobody"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_with_one() {
    let dir = tmp("errors");
    let o = transport(&["validate", "--suite", s(&dir.join("missing"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));

    let o = transport(&["--set", "warp_speed=9", "validate", "--suite", "x"]);
    assert_eq!(o.status.code(), Some(1));

    let suite = gen_suite(&dir);
    let file = suite.join("suite.jsonl");
    let text = std::fs::read_to_string(&file).unwrap();
    std::fs::write(&file, text.replacen("\"task_id\"", "\"tusk_id\"", 1)).unwrap();
    let o = transport(&["validate", "--suite", s(&suite)]);
    assert_eq!(o.status.code(), Some(1));
    std::fs::remove_dir_all(&dir).unwrap();
}
