use std::process::{Command, Output};

use serde_json::Value;

fn sepcheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sepcheck")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json report")
}

#[test]
fn analyze_reports_verdicts_and_exits_zero() {
    let report = json(&sepcheck(&["analyze", "--family", "bell-mixture", "--param", "lambda=0.25"]));
    let verdicts = report["criteria"]["verdicts"].as_array().unwrap();
    assert_eq!(verdicts.len(), 4, "empty selection runs every criterion");
    let avg = verdicts.iter().find(|v| v["criterion"] == "avg-ent").unwrap();
    assert_eq!(avg["outcome"], "ENTANGLED");
    assert!((avg["evidence"]["avg_entanglement"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!((avg["evidence"]["entropy"].as_f64().unwrap() - 0.811278124459133).abs() < 1e-9);
    for v in verdicts.iter().filter(|v| v["outcome"] == "ENTANGLED") {
        assert!(!v["evidence"].as_object().unwrap().is_empty());
    }
}

#[test]
fn werner_zero_is_certified_by_ppt() {
    let report = json(&sepcheck(&["analyze", "--family", "werner", "--param", "p=0", "--criteria", "ppt"]));
    let v = &report["criteria"]["verdicts"][0];
    assert_eq!(v["outcome"], "SEPARABLE_CERTIFIED");
    assert_eq!(v["certificate"], "PPT-2x2");
    assert_eq!(report["tolerances"]["criterion"].as_f64(), Some(1e-9));
}

#[test]
fn zoo_state_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("state.json");
    let p = path.to_str().unwrap();
    assert!(sepcheck(&["zoo", "--family", "random-density", "--param", "seed=5", "--param", "rank=3", "--out", p])
        .status
        .success());
    let first = std::fs::read_to_string(&path).unwrap();
    let from_file = json(&sepcheck(&["analyze", "--state", p]));
    let from_family = json(&sepcheck(&["analyze", "--family", "random-density", "--param", "seed=5", "--param", "rank=3"]));
    assert_eq!(from_file["criteria"]["verdicts"], from_family["criteria"]["verdicts"]);

    let value: Value = serde_json::from_str(&first).unwrap();
    let reserialized = serde_json::to_string_pretty(&value).unwrap() + "\n";
    std::fs::write(&path, &reserialized).unwrap();
    let again = json(&sepcheck(&["analyze", "--state", p]));
    assert_eq!(again["criteria"], from_file["criteria"]);
}

#[test]
fn malformed_trace_names_the_deviation() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"dim_a":2,"dim_b":2,"matrix":[
        [[0.45,0],[0,0],[0,0],[0,0]],
        [[0,0],[0,0],[0,0],[0,0]],
        [[0,0],[0,0],[0,0],[0,0]],
        [[0,0],[0,0],[0,0],[0.45,0]]]}"#)
    .unwrap();
    let out = sepcheck(&["analyze", "--state", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("trace") && err.contains("1.000e-1"), "{err}");
}

#[test]
fn parse_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{\"dim_a\": 2,\n \"dim_b\": }").unwrap();
    let out = sepcheck(&["analyze", "--state", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    assert_eq!(sepcheck(&["analyze", "--family", "werner", "--param", "p=1.5"]).status.code(), Some(2));
    assert_eq!(sepcheck(&["sweep", "--family", "werner", "--grid", "1:0:0.1"]).status.code(), Some(2));
    assert_eq!(sepcheck(&["analyze", "--family", "werner", "--criteria", "nope"]).status.code(), Some(2));
}

#[test]
fn resource_caps_exit_three() {
    let out = sepcheck(&["prodspan", "--family", "random-density", "--param", "da=3", "--param", "db=3", "--param", "rank=9", "--n", "4"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn sweep_csv_has_constant_width() {
    let out = sepcheck(&["sweep", "--family", "bell-mixture", "--grid", "0:1:0.1"]);
    assert!(out.status.success());
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let width = reader.headers().unwrap().len();
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 11);
    assert!(rows.iter().all(|r| r.len() == width));
    let headers = reader.headers().unwrap().clone();
    let col = headers.iter().position(|h| h == "avg_ent_outcome").unwrap();
    for (i, r) in rows.iter().enumerate() {
        let expected = if i == 5 { "INCONCLUSIVE" } else { "ENTANGLED" };
        assert_eq!(&r[col], expected, "row {i}");
    }
}

#[test]
fn seeded_commands_are_byte_stable() {
    let cases: [&[&str]; 4] = [
        &["prodspan", "--family", "random-separable", "--param", "seed=3", "--restarts", "16", "--seed", "9"],
        &["sweep", "--family", "werner", "--grid", "0:1:0.05", "--threads", "3"],
        &["typicality", "--spectrum", "0.75,0.25", "--n", "4,8,12"],
        &["analyze", "--family", "random-density", "--param", "da=2", "--param", "db=3", "--param", "seed=4"],
    ];
    for args in cases {
        let a = sepcheck(args);
        let b = sepcheck(args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn typicality_csv_columns() {
    let out = sepcheck(&["typicality", "--spectrum", "0.5,0.5", "--n", "20", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    for col in ["n", "counts", "exact_count", "log2_exact_count", "n_entropy", "gap", "string_probability"] {
        assert!(header.split(',').any(|h| h == col), "{header}");
    }
    assert!(lines.next().unwrap().contains("184756"));
}
