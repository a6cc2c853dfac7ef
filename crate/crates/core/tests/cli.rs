use std::path::Path;
use std::process::{Command, Output};

use num_rational::Ratio;

use hormander::regions::{in_a, ExponentPoint};

fn run(dir: &Path, config: &str, args: &[&str]) -> Output {
    let cfg = dir.join("config.toml");
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_hormander"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap()
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn apply_writes_sample_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), "[grid]\npoints = 32\n[norm]\nlevels = 2\n", &["apply"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = csv_rows(&dir.path().join("out/apply.csv"));
    assert_eq!(header, ["index", "x1", "re", "im"]);
    assert_eq!(rows.len(), 32);
    assert_eq!(rows[0][1], format!("{:.16e}", -1.0));
}

#[test]
fn norm_of_constant_symbol_has_no_x_derivative() {
    let dir = tempfile::tempdir().unwrap();
    let config = "[symbol]\nname = \"constant\"\n[norm]\nlevels = 0\n";
    let out = run(dir.path(), config, &["norm"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = csv_rows(&dir.path().join("out/norm.csv"));
    assert_eq!(header, ["piece", "j", "alpha0", "alpha1", "total"]);
    assert_eq!(rows.len(), 2);
    assert_eq!((rows[0][0].as_str(), rows[0][1].as_str()), ("low", "-1"));
    assert_eq!((rows[1][0].as_str(), rows[1][1].as_str()), ("band", "0"));
    for row in &rows {
        assert_eq!(row[3].parse::<f64>().unwrap(), 0.0);
        assert!(row[4].parse::<f64>().unwrap() > 0.0);
    }
}

#[test]
fn norm_scan_has_one_slope_per_order() {
    let dir = tempfile::tempdir().unwrap();
    let config = "[symbol]\nname = \"coifman_meyer\"\n[norm]\nlevels = 2\ns_list = [1.0, 2.0]\n";
    let out = run(dir.path(), config, &["norm"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = csv_rows(&dir.path().join("out/norm_scan.csv"));
    assert_eq!(header, ["s", "piece", "j", "alpha0", "alpha1", "total", "slope"]);
    assert_eq!(rows.len(), 2 * 4);
}

#[test]
fn region_csv_matches_exact_membership() {
    let dir = tempfile::tempdir().unwrap();
    let config = "[region]\nn = 2\nalpha = 2.0\nstep_denominator = 4\nmax = 2\n";
    let out = run(dir.path(), config, &["region"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = csv_rows(&dir.path().join("out/region.csv"));
    assert_eq!(header, ["x1", "x2", "in_a", "in_b"]);
    assert_eq!(rows.len(), 64);
    for row in rows {
        let coords: Vec<Ratio<i64>> = row[..2]
            .iter()
            .map(|v| Ratio::new((v.parse::<f64>().unwrap() * 4.0).round() as i64, 4))
            .collect();
        let expected = in_a(&ExponentPoint::new(coords).unwrap(), &Ratio::from_integer(2));
        assert_eq!(row[2], expected.as_str());
        assert_eq!(row[2], row[3]);
    }
}

#[test]
fn classify_and_decompose_emit_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), "[symbol]\nname = \"constant\"\n", &["classify"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&dir.path().join("out/classify.json"));
    for key in ["symbol", "options", "probe_count", "rows"] {
        assert!(report.get(key).is_some(), "missing {key}");
    }

    let out = run(dir.path(), "", &["decompose"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&dir.path().join("out/decompose.json"));
    assert_eq!(report["within_tolerance"], true);
    assert_eq!(report["second_support_exact"], true);
    assert!(report["provenance"]["config_hash"].as_str().unwrap().len() == 64);
}

#[test]
fn bench_is_reproducible_up_to_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    let config = "[ensemble]\nsize = 8\ngroups = 2\n";
    let mut reports = Vec::new();
    for threads in ["1", "3"] {
        let out = run(dir.path(), config, &["bench", "--threads", threads]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let mut report = json(&dir.path().join("out/bench.json"));
        for key in ["provenance", "groups", "summary", "symbol_norm", "stable", "regions"] {
            assert!(report.get(key).is_some(), "missing {key}");
        }
        report["provenance"]["timestamp"] = 0.into();
        reports.push(report);
    }
    assert_eq!(reports[0], reports[1]);

    let out = run(dir.path(), config, &["bench", "--seed-override", "5"]);
    assert!(out.status.success());
    let report = json(&dir.path().join("out/bench.json"));
    assert_eq!(report["provenance"]["seed"], 5);
}

#[test]
fn configuration_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), "[grid]\npoint = 64\n", &["bench"]);
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["status"], "config_error");

    let out = run(dir.path(), "[symbol]\nname = \"nope\"\n", &["norm"]);
    assert_eq!(out.status.code(), Some(1));

    let out = Command::new(env!("CARGO_BIN_EXE_hormander")).arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}
