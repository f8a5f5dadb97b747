//! Accept/reject suite for the type checker. Each program under `typing/`
//! starts with `// expect: accept <result type>` or `// expect: reject <kind>`.

use std::fs;
use std::path::Path;
use std::time::Instant;

use cup_core::pipeline::{check, CompileError};
use cup_core::types::TypeError;

fn kind(e: &CompileError) -> &'static str {
    match e {
        CompileError::Type(t) => match t {
            TypeError::Mismatch { .. } => "mismatch",
            TypeError::Occurs { .. } => "infinite",
            TypeError::Unbound { .. } => "unbound",
            TypeError::ShiftOutsideReset { .. } => "shift",
            TypeError::NotConcrete { .. } => "concrete",
            TypeError::NotNumeric { .. } => "numeric",
            TypeError::Declaration { .. } => "declaration",
            TypeError::Pattern { .. } => "pattern",
        },
        CompileError::Frontend(_) => "syntax",
        CompileError::Lowering(_) => "lowering",
    }
}

struct Case {
    name: String,
    source: String,
    verdict: String,
    detail: String,
}

fn cases() -> Vec<Case> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/typing");
    let mut out: Vec<Case> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "cup"))
        .map(|p| {
            let source = fs::read_to_string(&p).unwrap();
            let header = source.lines().next().unwrap_or_default();
            let rest = header
                .strip_prefix("// expect: ")
                .unwrap_or_else(|| panic!("{} has no expect header", p.display()));
            let (verdict, detail) = rest.split_once(' ').unwrap_or((rest, ""));
            Case {
                name: p.file_stem().unwrap().to_string_lossy().into_owned(),
                verdict: verdict.to_string(),
                detail: detail.to_string(),
                source,
            }
        })
        .collect();
    out.sort_by(|a, b| a.name.cmp(&b.name));
    out
}

fn uses_control(src: &str) -> bool {
    src.lines().skip(1).any(|l| !l.trim_start().starts_with("//") && (l.contains("shift") || l.contains("reset")))
}

#[test]
fn suite_shape() {
    let all = cases();
    assert!(all.len() >= 20, "{} programs", all.len());
    let control = all.iter().filter(|c| uses_control(&c.source)).count();
    assert!(control >= 6, "{control} programs use shift/reset");
    assert!(all.iter().any(|c| c.verdict == "accept"));
    assert!(all.iter().any(|c| c.verdict == "reject"));
}

#[test]
fn verdicts_match_headers() {
    let start = Instant::now();
    let mut failures = Vec::new();
    for c in cases() {
        let got = check(&c.source, &format!("{}.cup", c.name));
        match (c.verdict.as_str(), got) {
            ("accept", Ok(t)) => {
                let ty = t.result_type.to_string();
                if ty != c.detail {
                    failures.push(format!("{}: result type {ty}, expected {}", c.name, c.detail));
                }
            }
            ("accept", Err(e)) => failures.push(format!("{}: rejected: {e}", c.name)),
            ("reject", Ok(_)) => failures.push(format!("{}: accepted", c.name)),
            ("reject", Err(e)) => {
                if kind(&e) != c.detail {
                    failures.push(format!("{}: rejected as {} ({e}), expected {}", c.name, kind(&e), c.detail));
                }
            }
            (v, _) => failures.push(format!("{}: unknown verdict {v}", c.name)),
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
    assert!(start.elapsed().as_secs_f64() < 5.0);
}

#[test]
fn unapplied_polymorphism_message() {
    let e = check("id <- function (x) { x };\nid", "t.cup").unwrap_err();
    assert!(e.to_string().contains("could not statically determine the concrete"), "{e}");
}
