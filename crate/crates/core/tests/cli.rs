use std::process::{Command, Output};

fn isoflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isoflow")).args(args).output().expect("spawn isoflow")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn exit_codes() {
    assert_eq!(isoflow(&["describe", "--model", "su21"]).status.code(), Some(0));
    assert_eq!(isoflow(&["describe", "--model", "so42"]).status.code(), Some(2));
    assert_eq!(isoflow(&["describe", "--model", "sl2r", "--k", "2"]).status.code(), Some(2));
    assert_eq!(isoflow(&["verify", "--format", "csv"]).status.code(), Some(2));
    assert_eq!(isoflow(&["flow", "--step", "-1"]).status.code(), Some(2));
    assert_eq!(isoflow(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(isoflow(&["--help"]).status.code(), Some(0));
}

#[test]
fn verify_passes_on_every_model() {
    for m in ["sl2r", "sl3r", "su21", "su31"] {
        let o = isoflow(&["verify", "--model", m]);
        assert_eq!(o.status.code(), Some(0), "{m}: {}", String::from_utf8_lossy(&o.stderr));
        let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(v["pass"], true);
    }
}

#[test]
fn verdicts() {
    let v: serde_json::Value =
        serde_json::from_str(&stdout(&isoflow(&["verify", "--model", "sl3r", "--k", "1"]))).unwrap();
    assert_eq!(v["verdict"], "adapted");
    let v: serde_json::Value = serde_json::from_str(&stdout(&isoflow(&["adaptedness", "--model", "su21"]))).unwrap();
    assert_eq!(v["report"]["verdict"], "not_adapted");
}

#[test]
fn output_is_deterministic() {
    let args = ["flow", "--model", "su31", "--t1", "-2.5", "--horizon", "3"];
    assert_eq!(isoflow(&args).stdout, isoflow(&args).stdout);
    let args = ["adaptedness", "--model", "sl3r", "--t1", "0.4"];
    assert_eq!(isoflow(&args).stdout, isoflow(&args).stdout);
}

#[test]
fn flow_csv_distance_column_matches_closed_form() {
    // su21: one slot with |lambda| = 1/(2 sqrt 3), m = 2, m2 = 1
    let l = 1.0 / (2.0 * 3f64.sqrt());
    let rate = l * l * 4.0;
    let t1 = 1.5;
    let o = isoflow(&["flow", "--model", "su21", "--t1", "1.5", "--horizon", "10", "--record-every", "1000"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "dist_to_ref").unwrap();
    let mut rows = 0;
    for line in lines {
        let f: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        let t = f[0];
        let expected = ((-rate * t).exp() * (l * t1).sinh()).asinh() / l;
        assert!((f[col] - expected).abs() < 1e-8, "t = {t}: {} vs {expected}", f[col]);
        rows += 1;
    }
    assert_eq!(rows, 11);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("describe.json");
    let o = isoflow(&["describe", "--model", "sl3r", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["rank"], 2);
}

#[test]
fn malformed_datum_reports_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\"rank\": 1,\n\"roots\": [[0.5]\n").unwrap();
    let o = isoflow(&["describe", "--datum", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line"), "{err}");
}

#[test]
fn datum_only_runs_are_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bc1.json");
    std::fs::write(&path, r#"{"rank":1,"roots":[[0.5],[1.0]],"mult":[2,1],"double_mult":[1,0]}"#).unwrap();
    let o = isoflow(&["describe", "--datum", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unverified"));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verified"], false);
}
