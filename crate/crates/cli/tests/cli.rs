use std::path::PathBuf;
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn oscispec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oscispec"))
        .args(args)
        .env("OSCISPEC_FIXTURES", fixtures())
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn num(v: &serde_json::Value) -> f64 {
    v.as_str().expect("numbers are strings").parse().unwrap()
}

#[test]
fn free_dirichlet_eigenvalues() {
    let d = json(&oscispec(&["forward", "--potential", "zero", "--modes", "4"]));
    let lambdas: Vec<f64> = d["entries"].as_array().unwrap().iter().map(|e| num(&e["lambda"])).collect();
    assert_eq!(lambdas.len(), 4);
    for (l, expect) in lambdas.iter().zip([3.0, 7.0, 11.0, 15.0]) {
        assert!((l - expect).abs() < 1e-8, "{l}");
    }
}

#[test]
fn robin_shifts_are_positive_for_a_positive_bump() {
    let d = json(&oscispec(&["forward", "--potential", "gaussian", "--boundary", "robin:0.5", "--modes", "4"]));
    assert_eq!(d["boundary"]["type"], "robin");
    for e in d["entries"].as_array().unwrap() {
        assert!(num(&e["mu"]) > 0.0);
    }
}

#[test]
fn csv_output_has_one_row_per_mode() {
    let out = oscispec(&["forward", "--potential", "zero", "--modes", "3", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,lambda,mu,s,r");
    assert_eq!(lines.len(), 4);
}

#[test]
fn output_is_byte_identical() {
    let args = ["forward", "--potential", "gaussian", "--modes", "6"];
    assert_eq!(oscispec(&args).stdout, oscispec(&args).stdout);
    let args = ["hardy-transform", "--potential", "cos_gaussian", "--order", "8"];
    assert_eq!(oscispec(&args).stdout, oscispec(&args).stdout);
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"kind\": \"grid\", \"h\": ").unwrap();
    let bad = bad.to_str().unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["forward", "--potential", bad],
        vec!["forward", "--potential", "no_such_file"],
        vec!["forward", "--potential", "zero", "--boundary", "neither"],
        vec!["forward", "--potential", "zero", "--boundary", "robin:x"],
        vec!["forward", "--potential", "zero", "--modes", "0"],
        vec!["forward", "--potential", "zero", "--tol", "-1"],
        vec!["forward"],
        vec!["verify", "--potential", "zero", "--suite", "nonsense"],
        vec!["invert", "--data", bad],
        vec!["frobnicate"],
    ];
    for args in cases {
        let out = oscispec(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn dry_run_validates_only() {
    let dir = tempfile::tempdir().unwrap();
    let out_file = dir.path().join("never.json");
    let out = out_file.to_str().unwrap();
    for args in [
        vec!["forward", "--potential", "gaussian"],
        vec!["verify", "--potential", "gaussian"],
        vec!["darboux", "--potential", "gaussian", "--mode", "1", "--time", "-0.5"],
        vec!["weber-table"],
        vec!["hardy-transform", "--potential", "x2_gaussian"],
    ] {
        let mut a = args.clone();
        a.extend(["--dry-run", "--out", out]);
        assert_eq!(oscispec(&a).status.code(), Some(0), "{a:?}");
        let mut a = args.clone();
        a.extend(["--dry-run", "--boundary", "robin:"]);
        assert_eq!(oscispec(&a).status.code(), Some(2), "{a:?}");
    }
    assert!(!out_file.exists());
}

#[test]
fn verify_reports_failures_with_exit_one() {
    let out = oscispec(&["verify", "--potential", "zero", "--suite", "traces", "--modes", "8"]);
    let r = json(&out);
    assert_eq!(r["pass"], true);

    let dir = tempfile::tempdir().unwrap();
    let strong = dir.path().join("strong.json");
    std::fs::write(&strong, r#"{"kind":"closed_form","terms":[{"a":"8","c":"4"}]}"#).unwrap();
    let out = oscispec(&["verify", "--potential", strong.to_str().unwrap(), "--suite", "traces", "--modes", "3"]);
    assert_eq!(out.status.code(), Some(1));
    let r: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["pass"], false);
}

#[test]
fn weber_table_matches_free_eigenvalues() {
    let t = json(&oscispec(&["weber-table", "--boundary", "robin:0", "--modes", "3"]));
    let rows = t["rows"].as_array().unwrap();
    for (n, row) in rows.iter().enumerate() {
        assert_eq!(num(&row["lambda0"]), 4.0 * n as f64 + 1.0);
        assert!(num(&row["dpsi0"]).abs() < 1e-12);
    }
}

#[test]
fn darboux_output_feeds_back_into_forward() {
    let dir = tempfile::tempdir().unwrap();
    let flowed = dir.path().join("flowed.json");
    let out = oscispec(&["darboux", "--potential", "gaussian", "--mode", "1", "--time", "0.3"]);
    let doc = json(&out);
    std::fs::write(&flowed, doc["potential"].to_string()).unwrap();
    let before = json(&oscispec(&["forward", "--potential", "gaussian", "--modes", "3"]));
    let after = json(&oscispec(&["forward", "--potential", flowed.to_str().unwrap(), "--modes", "3"]));
    for n in 0..3 {
        let (b, a) = (&before["entries"][n], &after["entries"][n]);
        assert!((num(&a["lambda"]) - num(&b["lambda"])).abs() < 1e-7);
        let shift = if n == 1 { 0.3 } else { 0.0 };
        assert!((num(&a["s"]) - num(&b["s"]) - shift).abs() < 1e-6, "n={n}");
    }
}

#[test]
fn invert_recovers_forward_data() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.json");
    let pot = dir.path().join("pot.json");
    let d = data.to_str().unwrap();
    assert!(oscispec(&["forward", "--potential", "gaussian", "--modes", "4", "--out", d]).status.success());
    let rec = json(&oscispec(&["invert", "--data", d]));
    assert_eq!(rec["reconstruction"]["converged"], true);
    std::fs::write(&pot, rec["potential"].to_string()).unwrap();
    let again = json(&oscispec(&["forward", "--potential", pot.to_str().unwrap(), "--modes", "4"]));
    let target: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&data).unwrap()).unwrap();
    for n in 0..4 {
        let (a, t) = (&again["entries"][n], &target["entries"][n]);
        assert!((num(&a["mu"]) - num(&t["mu"])).abs() < 1e-6, "n={n}");
        assert!((num(&a["r"]) - num(&t["r"])).abs() < 1e-6, "n={n}");
    }
}
