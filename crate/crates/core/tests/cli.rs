use std::f64::consts::{LN_2, PI};
use std::fs;
use std::process::{Command, Output};

fn minlen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_minlen")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect()
}

/// Every float field is printed in shortest round-trip form.
fn assert_round_trip(csv: &str) {
    for line in csv.lines().skip(1).filter(|l| !l.starts_with('#')) {
        for field in line.split(',') {
            if let Ok(v) = field.parse::<f64>() {
                if field.contains('.') || field.contains('e') || field.contains("NaN") {
                    assert_eq!(format!("{v:?}"), field);
                }
            }
        }
    }
}

#[test]
fn validate_exit_codes() {
    assert_eq!(minlen(&["validate", "--mod", "kmm", "--beta", "1"]).status.code(), Some(0));
    let poly = minlen(&["validate", "--mod", "poly", "--coeff", "-1"]);
    assert_eq!(poly.status.code(), Some(1));
    assert!(stdout(&poly).contains("convexity: FAILED"));
    assert_eq!(minlen(&["validate", "--mod", "cosh", "--beta", "0.5"]).status.code(), Some(0));
}

#[test]
fn bad_input_exits_with_3() {
    for args in [
        vec!["kmax", "--mod", "sinh"],
        vec!["kmax", "--beta", "-1"],
        vec!["entropy", "--gamma-grid", "1:0:4"],
        vec!["frobnicate"],
        vec!["scan", "--states", "0"],
    ] {
        let o = minlen(&args);
        assert_eq!(o.status.code(), Some(3), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
    assert_eq!(minlen(&["--help"]).status.code(), Some(0));
}

#[test]
fn kmax_values() {
    let k: f64 = stdout(&minlen(&["kmax", "--mod", "kmm"])).trim().parse().unwrap();
    assert!((k - PI / 2.0).abs() < 1e-10);
    let k: f64 = stdout(&minlen(&["kmax", "--mod", "cosh"])).trim().parse().unwrap();
    assert!((k - PI / 2.0).abs() < 1e-8);
    assert_eq!(stdout(&minlen(&["kmax", "--mod", "poly"])).trim(), "inf");
}

#[test]
fn tradeoff_csv_contract() {
    let o = minlen(&["tradeoff", "--mod", "kmm", "--lambda-grid", "16"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("lambda,u,delta_x,delta_p,bound_eq13"));
    assert_round_trip(&text);
    let r = rows(&text);
    assert_eq!(r.len(), 16);
    assert!(r.windows(2).all(|w| w[0][0] < w[1][0]));
    let last = r.last().unwrap();
    assert_eq!(last[0], 1.0);
    assert!((last[2] - 1.0).abs() < 1e-6);

    let cosh = rows(&stdout(&minlen(&["tradeoff", "--mod", "cosh", "--lambda-grid", "8"])));
    assert!((cosh.last().unwrap()[2] - 1.0).abs() < 1e-6);

    let quartic = rows(&stdout(&minlen(&["tradeoff", "--mod", "quartic", "--lambda-grid", "12"])));
    assert!(quartic.iter().all(|r| r[4] <= r[2]));
}

#[test]
fn entropy_csv_contract() {
    let o = minlen(&["entropy", "--gamma-grid", "log:0.05:5:12"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("gamma,h_k_analytic,h_k_numeric,h_x_numeric"));
    assert_round_trip(&text);
    let body: Vec<&str> = text.lines().skip(1).collect();
    let first_comment = body.iter().position(|l| l.starts_with('#')).unwrap();
    assert!(body[first_comment..].iter().all(|l| l.starts_with('#')));
    let r = rows(&text);
    assert_eq!(r.len(), 15);
    let at = |g: f64| r.iter().find(|row| row[0] == g).unwrap();
    assert!((at(1.0)[1] - 0.837877).abs() < 1e-6);
    assert!((at(1.0)[3] - 1.374).abs() < 5e-3);
    assert!((at(0.5)[2] - 1.0).abs() < 1e-5);
    assert!(r.iter().any(|row| row[0] == 1e-6));
    assert!(r.windows(2).all(|w| w[1][1] < w[0][1]));

    let bits = rows(&stdout(&minlen(&["entropy", "--gamma-grid", "log:0.05:5:12", "--units", "bits"])));
    for (n, b) in r.iter().zip(&bits) {
        assert_eq!(n[0], b[0]);
        for j in 1..4 {
            assert_eq!(b[j], n[j] / LN_2);
        }
    }
}

#[test]
fn minlength_json() {
    let o = minlen(&["minlength", "--mod", "kmm", "--beta", "1", "--units", "bits"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["min_entropy"].as_f64(), Some(1.0));
    assert_eq!(v["variance"].as_f64(), Some(1.0));
    assert_eq!(v["labels"]["min_entropy"], "ANALYTIC");
    assert_eq!(v["labels"]["variance"], "ANALYTIC");
    assert_eq!(v["labels"]["shannon_conjectured"], "CONJECTURED");
    let top: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("  \""))
        .map(|l| l.trim().split('"').nth(1).unwrap())
        .collect();
    let mut sorted = top.clone();
    sorted.sort();
    assert_eq!(top, sorted);

    let flat: serde_json::Value = serde_json::from_str(&stdout(&minlen(&["minlength", "--mod", "poly"]))).unwrap();
    assert!(flat["variance"].is_null());
    assert!(flat["min_entropy"].is_null());
    assert!(flat["shannon_conjectured"].is_null());
    assert_eq!(flat["labels"]["variance"], "none");
}

#[test]
fn scan_is_deterministic_with_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let o = minlen(&["scan", "--states", "150", "--seed", "7", "--lambda-grid", "16", "--out", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    assert_eq!(text.lines().next(), Some("index,h_x,h_k,delta_x,delta_p,divergent_x"));
    assert_eq!(text.lines().count(), 151);
    for (i, line) in text.lines().skip(1).enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[0], i.to_string());
        assert!(fields[5] == "true" || fields[5] == "false");
    }
    let sidecar: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("a.json")).unwrap()).unwrap();
    let v = &sidecar["report"]["violations"];
    for key in ["bb", "ceiling", "heisenberg", "eq13", "conjectured_boundary", "dominance", "hull_dominance"] {
        assert_eq!(v[key].as_u64(), Some(0), "{key}");
    }
    assert_eq!(sidecar["coefficient_law"], "complex-gaussian");
    assert_eq!(sidecar["state_count"].as_u64(), Some(150));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"modification": {"kind": "kmm", "beta": 4.0}, "units": "bits"}"#).unwrap();
    let cfg = cfg.to_str().unwrap();
    let k: f64 = stdout(&minlen(&["kmax", "--config", cfg])).trim().parse().unwrap();
    assert!((k - PI / 4.0).abs() < 1e-10);
    let k: f64 = stdout(&minlen(&["kmax", "--config", cfg, "--beta", "1"])).trim().parse().unwrap();
    assert!((k - PI / 2.0).abs() < 1e-10);
    let v: serde_json::Value =
        serde_json::from_str(&stdout(&minlen(&["minlength", "--config", cfg, "--beta", "1", "--mod", "cosh"]))).unwrap();
    assert_eq!(v["units"], "bits");
    assert_eq!(v["modification"]["kind"], "cosh");

    fs::write(dir.path().join("bad.json"), r#"{"modfication": {}}"#).unwrap();
    let o = minlen(&["kmax", "--config", dir.path().join("bad.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}
