use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn cup(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cup"))
        .args(args)
        .env_remove("CUPPL_SEED")
        .output()
        .expect("cup runs")
}

fn program(dir: &TempDir, name: &str, src: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, src).unwrap();
    p
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_prints_the_value() {
    let dir = TempDir::new().unwrap();
    let p = program(&dir, "a.cup", "reset(1 + shift(k, k(2)))\n");
    let out = cup(&["run", arg(&p)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(text(&out.stdout), "3\n");
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let bad_type = program(&dir, "t.cup", "1 + true\n");
    let bad_run = program(&dir, "r.cup", "v <- [1, 2];\nv[5]\n");
    let missing = dir.path().join("nope.cup");

    let out = cup(&["run", arg(&bad_type)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).starts_with("error:"), "{}", text(&out.stderr));

    let out = cup(&["run", arg(&bad_run)]);
    assert_eq!(out.status.code(), Some(2));

    let out = cup(&["run", arg(&missing)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("file not found"));

    assert_eq!(cup(&["run"]).status.code(), Some(1));
}

#[test]
fn check_reports_ok() {
    let dir = TempDir::new().unwrap();
    let p = program(&dir, "c.cup", "f <- function (x) { x + 1 };\nf(2)\n");
    let out = cup(&["check", arg(&p)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(text(&out.stdout).starts_with("ok: "));
}

#[test]
fn seed_flag_and_env_agree() {
    let dir = TempDir::new().unwrap();
    let p = program(
        &dir,
        "m.cup",
        "model <- function () { sample(normal(0.0, 1.0)) };\nimportance(model, 50)\n",
    );
    let by_flag = cup(&["run", arg(&p), "--seed", "7", "--format", "json"]);
    let by_env = Command::new(env!("CARGO_BIN_EXE_cup"))
        .args(["run", arg(&p), "--format", "json"])
        .env("CUPPL_SEED", "7")
        .output()
        .unwrap();
    let other = cup(&["run", arg(&p), "--seed", "8", "--format", "json"]);
    assert_eq!(by_flag.status.code(), Some(0));
    assert_eq!(by_flag.stdout, by_env.stdout);
    assert_ne!(by_flag.stdout, other.stdout);
    assert!(cup_cli::parse_json(&text(&by_flag.stdout)).is_ok());
}
