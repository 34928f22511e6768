//! Runs the acceptance suite through the binary, twice with the same seed,
//! and prints one verdict line per criterion.

use std::process::{Command, ExitCode, Stdio};

use rnpcert::acceptance::{determinism, name, DETERMINISM, IN_PROCESS};

const SEED: &str = "20240917";

fn selftest(out: &std::path::Path) -> i32 {
    let status = Command::new(env!("CARGO_BIN_EXE_rnpcert"))
        .args(["selftest", "--seed", SEED, "--out", out.to_str().unwrap()])
        .stderr(Stdio::null())
        .status()
        .expect("binary runs");
    status.code().expect("exit code")
}

#[derive(serde::Deserialize)]
struct Criterion {
    id: u32,
    pass: bool,
    failure_count: usize,
    failures: Vec<String>,
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("first.json"), dir.path().join("second.json"));
    let code = selftest(&a);
    selftest(&b);
    let (first, second) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let report: serde_json::Value = serde_json::from_slice(&first).unwrap();
    let criteria: Vec<Criterion> = serde_json::from_value(report["criteria"].clone()).unwrap();
    let mut failed = Vec::new();
    for id in IN_PROCESS {
        let line = match criteria.iter().find(|c| c.id == id) {
            Some(c) if c.pass => format!("PASS  criterion {id} ({})", name(id)),
            Some(c) => {
                failed.push(id);
                format!("FAIL  criterion {id} ({}): {} failures, first {:?}", name(id), c.failure_count, c.failures.first())
            }
            None => {
                failed.push(id);
                format!("FAIL  criterion {id} ({}): missing from the report", name(id))
            }
        };
        println!("{line}");
    }
    let det = determinism(&first, &second);
    println!(
        "{}  criterion {DETERMINISM} ({}): {} bytes each run",
        if det.pass { "PASS" } else { "FAIL" },
        name(DETERMINISM),
        first.len()
    );
    if !det.pass {
        failed.push(DETERMINISM);
    }
    let expected = if failed.iter().any(|&i| i != DETERMINISM) { 1 } else { 0 };
    if code != expected {
        println!("selftest exited with {code}, expected {expected}");
        return ExitCode::FAILURE;
    }
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failing criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
