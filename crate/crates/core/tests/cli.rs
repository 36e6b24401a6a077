use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_gammaseq");
const SIGMA3: &str = r#"{"words":[{"coeff":[2,0],"factors":[{"degree":1,"terms":[{"coeff":[1,0],"indices":[3]}]}]}]}"#;

fn gammaseq(args: &[&str]) -> std::process::Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

#[test]
fn norm_scan_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scan.csv");
    let o = gammaseq(&["norm-scan", "--n-min", "2", "--n-max", "5", "--p", SIGMA3, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("N,value"));
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 4);
    for row in rows {
        let v: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert!((v - 1.0).abs() < 1e-10, "{row}");
    }
    assert!(out.with_extension("json").exists());
}

#[test]
fn scans_are_deterministic() {
    let p = r#"{"random":{"max_degree":2,"words":2,"max_factors":2}}"#;
    let args = ["norm-scan", "--n-min", "3", "--n-max", "6", "--p", p, "--seed", "9", "--engine", "implicit"];
    let a = gammaseq(&args);
    let b = gammaseq(&args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn invalid_range_is_an_input_error() {
    let o = gammaseq(&["norm-scan", "--n-min", "6", "--n-max", "3", "--p", SIGMA3]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}

#[test]
fn malformed_json_reports_path() {
    let o = gammaseq(&["quantize", "--n", "3", "--p", r#"{"words":[{"coeff":"x","factors":[]}]}"#]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("words[0].coeff"));
}

#[test]
fn failed_assertion_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        format!(
            r#"{{"kind":"norm_scan","n_range":{{"min":2,"max":4}},"inputs":{{"p":{{"polynomial":{SIGMA3}}}}},
               "assertions":{{"max_abs_value":0.5}}}}"#
        ),
    )
    .unwrap();
    let o = gammaseq(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn bracket_of_generators() {
    let s1 = r#"{"words":[{"coeff":[2,0],"factors":[{"degree":1,"terms":[{"coeff":[1,0],"indices":[1]}]}]}]}"#;
    let s2 = r#"{"words":[{"coeff":[2,0],"factors":[{"degree":1,"terms":[{"coeff":[1,0],"indices":[2]}]}]}]}"#;
    let o = gammaseq(&["bracket", "--p", s1, "--q", s2]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let words = v["words"].as_array().unwrap();
    assert_eq!(words.len(), 1);
    assert_eq!(words[0]["factors"][0]["terms"][0]["indices"][0], 3);
}
