use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn relext(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relext"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}\n{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

fn write(dir: &Path, name: &str, value: &Value) {
    fs::write(dir.join(name), serde_json::to_string_pretty(value).unwrap()).unwrap();
}

fn interval_fixture(dir: &Path) {
    let n = 6;
    let dist: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| (i as f64 - j as f64).abs()).collect()).collect();
    let labels: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    write(dir, "space.json", &json!({ "labels": labels, "dist": dist }));
    write(dir, "a.json", &json!({ "space": "space.json", "members": [0, 1, 5] }));
    write(
        dir,
        "f.json",
        &json!({ "domain": "space.json", "codomain": "space.json", "pairs": [[0, 2], [1, 2], [1, 3], [5, 4]] }),
    );
}

#[test]
fn validate_names_the_broken_triangle() {
    let dir = TempDir::new().unwrap();
    write(
        dir.path(),
        "bad.json",
        &json!({ "labels": ["a", "b", "c"], "dist": [[0, 1, 5], [1, 0, 1], [5, 1, 0]] }),
    );
    let out = relext(dir.path(), &["validate", "--space", "bad.json"]);
    assert_eq!(out.status.code(), Some(1));
    let report = stdout_json(&out);
    assert_eq!(report["valid"], false);
    let messages = report["messages"].to_string();
    assert!(messages.contains("(0,2,1)") || messages.contains("(0, 2, 1)") || messages.contains("(0,1,2)"), "{messages}");
}

#[test]
fn validate_accepts_a_good_fixture() {
    let dir = TempDir::new().unwrap();
    interval_fixture(dir.path());
    let out = relext(dir.path(), &["validate", "--space", "space.json", "--subset", "a.json", "--map", "f.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(stdout_json(&out)["valid"], true);
}

#[test]
fn extension_restricts_back_to_the_input() {
    let dir = TempDir::new().unwrap();
    interval_fixture(dir.path());
    for verb in ["extend", "extend-retract"] {
        let out = relext(
            dir.path(),
            &[verb, "--space", "space.json", "--subset", "a.json", "--map", "f.json", "--out", "big.json", "--dot", "big.dot"],
        );
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let summary = stdout_json(&out);
        assert_eq!(summary["equal_on"], "ok");
        assert_eq!(summary["total"], true);
        let big: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("big.json")).unwrap()).unwrap();
        assert_eq!(big["domain"], "space.json");
        let pairs: Vec<(u64, u64)> =
            big["pairs"].as_array().unwrap().iter().map(|p| (p[0].as_u64().unwrap(), p[1].as_u64().unwrap())).collect();
        let on_a: Vec<_> = pairs.iter().copied().filter(|(x, _)| [0, 1, 5].contains(x)).collect();
        assert_eq!(on_a, vec![(0, 2), (1, 2), (1, 3), (5, 4)]);
        assert!(fs::read_to_string(dir.path().join("big.dot")).unwrap().starts_with("digraph"));
    }
}

#[test]
fn relation_files_round_trip_through_compose() {
    let dir = TempDir::new().unwrap();
    interval_fixture(dir.path());
    relext(dir.path(), &["extend", "--space", "space.json", "--subset", "a.json", "--map", "f.json", "--out", "big.json"]);
    write(dir.path(), "id.json", &json!({
        "domain": "space.json", "codomain": "space.json",
        "pairs": (0..6).map(|i| [i, i]).collect::<Vec<_>>()
    }));
    let out = relext(dir.path(), &["compose", "--map", "id.json", "--map", "big.json", "--out", "same.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let read = |name: &str| -> Value { serde_json::from_str(&fs::read_to_string(dir.path().join(name)).unwrap()).unwrap() };
    assert_eq!(read("same.json")["pairs"], read("big.json")["pairs"]);
}

#[test]
fn torus_demo_reports_both_legs() {
    let dir = TempDir::new().unwrap();
    let out = relext(dir.path(), &["torus-demo"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    assert_eq!(report["single_valued"]["search"]["extends"], false);
    assert_eq!(report["single_valued"]["boundary_winding"], 1);
    assert_eq!(report["set_valued"]["extension_total"], true);
    assert_eq!(report["set_valued"]["equal_on"], true);
}

#[test]
fn outputs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    interval_fixture(dir.path());
    write(dir.path(), "partial.json", &json!({
        "domain": "space.json", "codomain": "space.json", "support": [0, 1, 3, 5],
        "pairs": [[0, 1], [1, 0], [1, 3], [3, 5], [5, 4]]
    }));
    let args = ["reach", "--map", "partial.json"];
    let first = relext(dir.path(), &args);
    let second = relext(dir.path(), &args);
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stderr));
    assert_eq!(first.stdout, second.stdout);
    let serial = Command::new(env!("CARGO_BIN_EXE_relext"))
        .current_dir(dir.path())
        .env("RELEXT_THREADS", "1")
        .args(args)
        .output()
        .unwrap();
    assert_eq!(first.stdout, serial.stdout);
    let report = stdout_json(&first);
    assert_eq!(report["dead_ends"], json!([2, 4]));
    assert_eq!(report["points"][0]["infinite"], true);
    assert_eq!(report["points"][3]["infinite"], false);
}

#[test]
fn sample_is_reproducible_per_seed() {
    let dir = TempDir::new().unwrap();
    let run = |seed: &str, tag: &str| {
        let space = format!("s{tag}.json");
        let map = format!("m{tag}.json");
        let out = relext(
            dir.path(),
            &["--seed", seed, "sample", "--kind", "random", "--resolution", "12", "--out", &space, "--map-out", &map],
        );
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        (fs::read_to_string(dir.path().join(&space)).unwrap(), fs::read_to_string(dir.path().join(&map)).unwrap())
    };
    let a = run("7", "a");
    let b = run("7", "b");
    let c = run("8", "c");
    assert_eq!(a.0, b.0);
    assert_eq!(a.1.replace("sb.json", "sa.json"), b.1.replace("sb.json", "sa.json").replace("sb", "sa"));
    assert_ne!(a.0, c.0);
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    assert_eq!(relext(dir.path(), &["extend", "--space"]).status.code(), Some(2));
    assert_eq!(relext(dir.path(), &["no-such-verb"]).status.code(), Some(2));
    assert_eq!(relext::cli::run(["relext", "winding"]), 2);
}

#[test]
fn in_process_run_reports_failures() {
    let dir = TempDir::new().unwrap();
    let residues = dir.path().join("loop.json");
    fs::write(&residues, "[0, 3, 1]").unwrap();
    let path = residues.to_str().unwrap();
    // the first step is too long for the bound
    assert_eq!(relext::cli::run(["relext", "winding", "--map", path, "--resolution", "8"]), 1);
    fs::write(&residues, "[0, 1, 2, 3, 4, 5, 6, 7]").unwrap();
    assert_eq!(relext::cli::run(["relext", "winding", "--map", path, "--resolution", "8", "--out",
        dir.path().join("w.json").to_str().unwrap()]), 0);
    let w: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("w.json")).unwrap()).unwrap();
    assert_eq!(w["winding"], 1);
}

#[test]
fn usc_check_flags_a_jump() {
    let dir = TempDir::new().unwrap();
    interval_fixture(dir.path());
    write(dir.path(), "step.json", &json!({
        "domain": "space.json", "codomain": "space.json",
        "pairs": [[0, 0], [1, 0], [2, 0], [3, 5], [4, 5], [5, 5]]
    }));
    let out = relext(dir.path(), &["check-usc", "--map", "step.json", "--delta", "0", "--delta", "1", "--eps", "0.5"]);
    assert_eq!(out.status.code(), Some(1));
    let report = stdout_json(&out);
    assert_eq!(report["holds"], false);
    assert_eq!(report["failures"][0]["delta"], 1.0);
}
