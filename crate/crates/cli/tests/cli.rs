use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qmoments(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmoments"))
        .args(args)
        .env_remove("QMOMENTS_PRECISION")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

fn json(args: &[&str]) -> Value {
    let out = qmoments(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn strings(v: &Value) -> Vec<String> {
    v.as_array()
        .expect("array")
        .iter()
        .map(|x| x.as_str().expect("string").to_string())
        .collect()
}

/// `s` rounds to `printed` at the number of decimals `printed` shows.
fn rounds_to(s: &str, printed: &str) -> bool {
    let decimals = printed.split('.').nth(1).map_or(0, str::len) as i32;
    let x: f64 = s.trim_end_matches('~').parse().unwrap();
    let want: f64 = printed.parse().unwrap();
    (x - want).abs() <= 0.5 * 10f64.powi(-decimals)
}

fn prefix(s: &str, n: usize) -> &str {
    &s[..n.min(s.len())]
}

#[test]
fn coeffs_p2_n3() {
    let v = json(&["coeffs", "--p", "2", "--n", "3"]);
    let a = strings(&v["a"]);
    assert!(rounds_to(&a[0], "0.500128"), "{}", a[0]);
    assert!(rounds_to(&a[1], "0.243941"), "{}", a[1]);
    assert!(rounds_to(&a[2], "0.153942"), "{}", a[2]);
    assert_eq!(prefix(&a[0], 10), "0.50012783");
    assert_eq!(v["bases"], serde_json::json!([2, 2, 2]));
    assert_eq!(v["q"], serde_json::json!([4, 4, 4]));
    assert_eq!(v["method"], "polynomial-roots");
    assert_eq!(v["converged"], true);
    assert_eq!(v["radius"].as_array().unwrap().len(), 3);
    // 50 certified significant digits by default.
    let digits = a[0].trim_start_matches("0.").len();
    assert_eq!(digits, 50, "{}", a[0]);
    assert!(!a[0].ends_with('~'));
}

#[test]
fn coeffs_single_summand() {
    let v = json(&["coeffs", "--p", "2", "--n", "1", "--digits", "10"]);
    assert_eq!(strings(&v["a"]), vec!["0.5773502692"]);
}

#[test]
fn coeffs_mixed_bases() {
    let v = json(&["coeffs", "--bases", "2,3", "--digits", "20"]);
    let a = strings(&v["a"]);
    assert!(rounds_to(&a[0], "0.4971773"), "{}", a[0]);
    assert!(rounds_to(&a[1], "0.1797374"), "{}", a[1]);
    assert_eq!(v["method"], "newton-mixed");
    assert_eq!(v["converged"], true);
}

#[test]
fn nodes_examples() {
    let v = json(&["nodes", "--p", "2", "--n", "3", "--digits", "12"]);
    let nodes = strings(&v["nodes"]);
    assert_eq!(nodes.len(), 8);
    assert!(rounds_to(&nodes[7], "0.898011"), "{}", nodes[7]);
    assert_eq!(v["weight"], "1/8");
    assert_eq!(v["degree"], 7);

    let v = json(&["nodes", "--p", "2", "--n", "2", "--digits", "10"]);
    let nodes = strings(&v["nodes"]);
    assert_eq!(prefix(&nodes[0], 7), "-0.7946");
    assert_eq!(prefix(&nodes[1], 7), "-0.1875");
    assert_eq!(prefix(&nodes[2], 6), "0.1875");
    assert_eq!(prefix(&nodes[3], 6), "0.7946");

    let v = json(&["nodes", "--bases", "3,2", "--digits", "10"]);
    let nodes = strings(&v["nodes"]);
    assert_eq!(nodes.len(), 6);
    assert!(nodes.iter().any(|s| rounds_to(s, "0.196288")));
    assert!(nodes.iter().any(|s| rounds_to(s, "-0.196288")));
}

#[test]
fn nodes_csv_one_line_per_node() {
    let out = qmoments(&["nodes", "--p", "3", "--n", "2", "--format", "csv", "--digits", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(!text.contains('\r'));
    assert_eq!(text.lines().count(), 9);
    assert_eq!(text.lines().next().unwrap().split(',').count(), 4);

    let out = qmoments(&["nodes", "--p", "3", "--n", "2", "--format", "csv", "--csv-header"]);
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some("value,radius,x1,x2"));
    assert_eq!(text.lines().count(), 10);
}

#[test]
fn verify_passes_on_examples() {
    for args in [
        ["verify", "--p", "2", "--n", "3"].as_slice(),
        &["verify", "--p", "2", "--n", "1"],
        &["verify", "--bases", "2,3"],
    ] {
        let v = json(args);
        assert_eq!(v["passed"], true, "{args:?}: {v}");
        for c in v["checks"].as_array().unwrap() {
            assert_eq!(c["pass"], true, "{c}");
        }
    }
    let mixed = json(&["verify", "--bases", "2,3"]);
    let names: Vec<&str> = mixed["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(names.contains(&"mixed_system"));
    assert!(!names.contains(&"power_sums"));
}

#[test]
fn verify_round_trip_from_file() {
    let dir = tempfile::tempdir().unwrap();
    for (spec, file) in [
        (["--p", "2", "--n", "3"].as_slice(), "uniform.json"),
        (&["--bases", "3,2"], "mixed.json"),
    ] {
        let path = dir.path().join(file);
        let path_str = path.to_str().unwrap();
        let mut args = vec!["nodes", "--output", path_str];
        args.extend_from_slice(spec);
        assert_eq!(qmoments(&args).status.code(), Some(0));

        let from_file = json(&["verify", "--from-file", path_str]);
        let mut args = vec!["verify"];
        args.extend_from_slice(spec);
        let computed = json(&args);
        for name in ["exactness", "sharpness", "ruler", "symmetry"] {
            let verdict = |doc: &Value| {
                doc["checks"]
                    .as_array()
                    .unwrap()
                    .iter()
                    .find(|c| c["name"] == name)
                    .map(|c| c["pass"].clone())
            };
            assert_eq!(verdict(&from_file), verdict(&computed), "{file}: {name}");
        }
        assert_eq!(from_file["passed"], true);
    }
}

#[test]
fn verify_reports_tampered_nodes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nodes.json");
    let out = qmoments(&["nodes", "--p", "2", "--n", "2", "--digits", "20"]);
    let mut doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    doc["nodes"][0] = Value::String("-0.80000000000000000000".into());
    std::fs::write(&path, serde_json::to_string(&doc).unwrap()).unwrap();
    let out = qmoments(&["verify", "--from-file", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], false);
}

fn golden(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    std::fs::read_to_string(path).expect("golden file")
}

#[test]
fn figure_text_golden() {
    let out = qmoments(&["figure", "--p", "2", "--n", "3", "--format", "text"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), golden("figure_p2_n3.txt"));
    let dots = stdout(&out).lines().last().unwrap().matches('o').count();
    assert_eq!(dots, 8);
}

#[test]
fn figure_svg_golden() {
    let out = qmoments(&["figure", "--bases", "2,3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), golden("figure_bases_2_3.svg"));

    let out = qmoments(&["figure", "--p", "2", "--n", "1", "--format", "svg"]);
    assert_eq!(stdout(&out).matches("<circle").count(), 2);
}

#[test]
fn cubature_counts() {
    for (args, points) in [
        (["--p", "2", "--n", "1", "--dim", "2"], 4usize),
        (["--p", "2", "--n", "2", "--dim", "2"], 16),
        (["--p", "2", "--n", "3", "--dim", "3"], 512),
    ] {
        let mut all = vec!["cubature", "--digits", "12"];
        all.extend_from_slice(&args);
        let out = qmoments(&all);
        assert_eq!(out.status.code(), Some(0));
        let text = stdout(&out);
        let mut lines = text.lines();
        let meta: Value = serde_json::from_str(lines.next().unwrap().strip_prefix("# ").unwrap()).unwrap();
        assert_eq!(meta["points"], points as u64);
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), points);
        let dim = meta["dim"].as_u64().unwrap() as usize;
        assert!(rows.iter().all(|r| r.split(',').count() == dim));
        if points == 512 {
            assert_eq!(meta["weight"], "1/512");
        }
    }
}

#[test]
fn output_is_deterministic() {
    for args in [
        ["coeffs", "--p", "3", "--n", "4"].as_slice(),
        &["nodes", "--bases", "2,3,2", "--format", "csv"],
        &["figure", "--p", "3", "--n", "2"],
        &["verify", "--p", "2", "--n", "4"],
        &["cubature", "--p", "2", "--n", "2", "--dim", "3", "--format", "json"],
    ] {
        let first = qmoments(args);
        let second = qmoments(args);
        assert_eq!(first.status.code(), Some(0), "{args:?}");
        assert_eq!(first.stdout, second.stdout, "{args:?}");
    }
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("coeffs.json");
    let out = qmoments(&["coeffs", "--p", "2", "--n", "2", "--output", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let written = std::fs::read(&path).unwrap();
    assert_eq!(written, qmoments(&["coeffs", "--p", "2", "--n", "2"]).stdout);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        ["coeffs", "--p", "2"].as_slice(),
        &["coeffs", "--p", "1", "--n", "3"],
        &["coeffs", "--bases", "2,1"],
        &["coeffs", "--p", "2", "--n", "3", "--digits", "5"],
        &["coeffs", "--p", "2", "--n", "3", "--format", "svg"],
        &["figure", "--p", "2", "--n", "3", "--format", "csv"],
        &["nodes", "--p", "2", "--n", "30"],
        &["verify"],
        &["verify", "--from-file", "/nonexistent/nodes.json"],
        &["frobnicate"],
    ] {
        let out = qmoments(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn precision_override_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_qmoments"))
        .args(["coeffs", "--p", "2", "--n", "1", "--digits", "10"])
        .env("QMOMENTS_PRECISION", "1024")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let r = v["radius"][0]["a"].as_str().unwrap();
    let exp: i32 = r.split('e').nth(1).unwrap().parse().unwrap();
    assert!(exp < -250, "radius {r}");

    let out = Command::new(env!("CARGO_BIN_EXE_qmoments"))
        .args(["coeffs", "--p", "2", "--n", "1"])
        .env("QMOMENTS_PRECISION", "lots")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
