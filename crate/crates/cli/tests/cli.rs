use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn rnpcert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rnpcert"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_diamond_level_two() {
    let out = rnpcert(&["generate", "diamond", "--level", "2", "--seed", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["vertices"].as_array().unwrap().len(), 12);
    assert_eq!(doc["edges"].as_array().unwrap().len(), 16);
    assert_eq!(doc["seed"], 5);
    assert_eq!(doc["edges"][0]["len"], serde_json::json!({"num": 1, "den": 4}));
}

#[test]
fn generated_graphs_read_back_and_tampering_is_caught() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("x2.json");
    let out = rnpcert(&["generate", "laakso2", "--level", "2", "--out", path(&file)]);
    assert_eq!(out.status.code(), Some(0));
    let out = rnpcert(&["geodesics", "--graph", path(&file), "--from", "u", "--to", "v", "--limit", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["count"], 3);

    let mut doc: Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    doc["edges"][0]["len"] = serde_json::json!({"num": 1, "den": 2});
    std::fs::write(&file, doc.to_string()).unwrap();
    let out = rnpcert(&["geodesics", "--graph", path(&file), "--from", "u", "--to", "v"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_inputs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.json");
    std::fs::write(&empty, "").unwrap();
    let out = rnpcert(&["distortion", "--embedding", path(&empty), "--diamond", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let stray = dir.path().join("stray.json");
    std::fs::write(&stray, r#"{"norm": "l1", "points": {}, "colour": 1}"#).unwrap();
    let out = rnpcert(&["distortion", "--embedding", path(&stray), "--diamond", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = rnpcert(&["geodesics", "--diamond", "1", "--from", "u", "--to", "nowhere"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn resource_cap_exits_with_three() {
    let out = rnpcert(&["generate", "diamond", "--level", "9", "--cap", "1000"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn martingale_from_the_d5_tree_embedding() {
    let dir = tempfile::tempdir().unwrap();
    let emb = dir.path().join("stegall_d5.json");
    let out = rnpcert(&["embed", "stegall", "--level", "5", "--out", path(&emb)]);
    assert_eq!(out.status.code(), Some(0));
    let out = rnpcert(&["martingale", "extract", "--embedding", path(&emb), "--oracle", "diamond", "--steps", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    let lines = doc["certificate"]["lines"].as_array().unwrap();
    let even: Vec<&Value> = lines.iter().filter(|l| l["check"] == "even difference").collect();
    assert_eq!(even.len(), 2);
    for l in even {
        // Each value is at least 1/8.
        let v = &l["value"];
        assert!(8 * v["num"].as_i64().unwrap() >= v["den"].as_i64().unwrap(), "{v}");
        assert_eq!(l["pass"], true);
    }

    let out = rnpcert(&["distortion", "--embedding", path(&emb)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["certificate"]["lower holds"], true);
}

#[test]
fn certificate_failures_exit_with_one() {
    // The fork points of a diamond witness are 1 apart in total, short of 2·d(u, v).
    let out = rnpcert(&["certify", "thick", "--diamond", "2", "--c", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["pass"], false);
    // A chain with a detour is not a geodesic.
    let out = rnpcert(&["partition", "--diamond", "1", "--points", "u,a,b,v"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn witnesses_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("w.json");
    let out = rnpcert(&["certify", "thick", "--laakso", "0", "--out", path(&w)]);
    assert_eq!(out.status.code(), Some(0));
    let out = rnpcert(&["certify", "thick", "--laakso", "0", "--witness", path(&w)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["pass"], true);
}

#[test]
fn traces_come_out_as_csv() {
    let dir = tempfile::tempdir().unwrap();
    let emb = dir.path().join("d2.json");
    rnpcert(&["embed", "stegall", "--level", "2", "--out", path(&emb)]);
    let out = rnpcert(&[
        "martingale", "extract", "--embedding", path(&emb), "--oracle", "diamond", "--steps", "2", "--format", "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# seed 0"));
    assert_eq!(lines.next(), Some("step,interval,left,right,value"));
    assert!(lines.any(|l| l.starts_with("2,1,1/2,1,")));
}
