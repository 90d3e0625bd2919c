use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const LOGISTIC: &str = r#"{"lead": -1, "real_roots": [{"root": 0, "mult": 1}, {"root": 1, "mult": 1}]}"#;
const THICK: &str = r#"{"lead": -1, "real_roots": [{"root": 0, "mult": 2}, {"root": 1, "mult": 3}]}"#;
const SQUARE: &str = r#"{"lead": 1, "real_roots": [{"root": 0, "mult": 2}, {"root": 1, "mult": 2}]}"#;

fn hyperdyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyperdyn")).args(args).output().unwrap()
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn csv_rows(text: &str) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(text.as_bytes()).records().map(Result::unwrap).collect()
}

#[test]
fn analyze_logistic_end_to_end() {
    let dir = TempDir::new().unwrap();
    let poly = write(&dir, "g.json", LOGISTIC);
    let cyl = dir.path().join("cyl.csv");
    let out = hyperdyn(&["analyze", "--poly", s(&poly), "--a", "5", "--depth", "10", "--cylinders-csv", s(&cyl)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["cylinder_stats"][9]["count"], 1024);
    assert_eq!(r["certificate"]["route"]["kind"], "UniformBound");
    assert_eq!(r["certificate"]["verdict"], "Hyperbolic");
    // |f'| = a·sqrt(1 - 4/a) at the outer endpoints, where it is smallest
    let lambda = r["certificate"]["lambda"].as_f64().unwrap();
    assert!((lambda - 5f64.sqrt()).abs() < 1e-12, "{lambda}");
    assert_eq!(r["config"]["lambda"], 1.1);
    assert_eq!(r["config"]["epsilon"], 0.5);
    assert_eq!(r["config"]["strategy"], "auto");
    assert!(r["conjugacy"]["violations"].as_array().unwrap().is_empty());
    assert_eq!(r["complex"]["critical_points"]["e1"].as_array().unwrap().len(), 1);

    let text = fs::read_to_string(&cyl).unwrap();
    assert!(text.starts_with("word,left,right,length\n"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 1024);
    let mut spans: Vec<(f64, f64)> = rows.iter().map(|r| (r[1].parse().unwrap(), r[2].parse().unwrap())).collect();
    spans.sort_by(|x, y| x.0.total_cmp(&y.0));
    assert!(spans.windows(2).all(|w| w[0].1 < w[1].0));
}

#[test]
fn below_threshold_is_exit_3() {
    let dir = TempDir::new().unwrap();
    let poly = write(&dir, "g.json", LOGISTIC);
    let out = hyperdyn(&["analyze", "--poly", s(&poly), "--a", "3.5"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("hypotheses not satisfied"));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["status"], "hypotheses not satisfied");
    assert_eq!(r["thresholds"]["clears"], false);
}

#[test]
fn config_errors_are_exit_2() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", "{\"polynomial\": ");
    assert_eq!(hyperdyn(&["analyze", "--config", s(&bad)]).status.code(), Some(2));
    let poly = write(&dir, "g.json", LOGISTIC);
    for args in [
        vec!["analyze", "--poly", s(&poly), "--a", "5", "--depth", "41"],
        vec!["analyze", "--poly", s(&poly), "--a", "5", "--lambda", "1"],
        vec!["analyze", "--poly", s(&poly), "--a", "5", "--epsilon", "1.5"],
        vec!["analyze", "--poly", s(&poly), "--a", "0"],
        vec!["analyze", "--poly", s(&poly), "--a", "5", "--strategy", "magic"],
        vec!["scan", "--poly", s(&poly), "--a-range", "1:2"],
    ] {
        assert_eq!(hyperdyn(&args).status.code(), Some(2), "{args:?}");
    }
    let unknown = write(&dir, "u.json", r#"{"polynomial": {"lead": 1}, "a": 5, "colour": "red"}"#);
    assert_eq!(hyperdyn(&["analyze", "--config", s(&unknown)]).status.code(), Some(2));
}

#[test]
fn config_file_with_inline_matrix() {
    let dir = TempDir::new().unwrap();
    let report = dir.path().join("r.json");
    let cfg = format!(
        r#"{{"polynomial": {LOGISTIC}, "a": 6, "depth": 4, "matrix": [[1, 1], [1, 1]], "outputs": {{"report": "{}"}}}}"#,
        report.display()
    );
    let cfg = write(&dir, "cfg.json", &cfg);
    let out = hyperdyn(&["analyze", "--config", s(&cfg), "--depth", "6"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["config"]["depth"], 6);
    assert_eq!(r["config"]["a"], 6.0);
    assert_eq!(r["supplied_matrix"]["matches_system"], true);
    assert_eq!(r["supplied_matrix"]["eventual_positivity"]["eventually_positive"], true);
}

#[test]
fn scan_thick_cubic_min_derivative_decreases() {
    let dir = TempDir::new().unwrap();
    let poly = write(&dir, "g.json", THICK);
    let out = hyperdyn(&["scan", "--poly", s(&poly), "--a-range", "1e3:1e7:9:log"]);
    assert!(out.status.success());
    let rows = csv_rows(std::str::from_utf8(&out.stdout).unwrap());
    assert_eq!(rows.len(), 9);
    let mins: Vec<f64> = rows.iter().map(|r| r[4].parse().unwrap()).collect();
    assert!(mins.windows(2).all(|w| w[1] < w[0]), "{mins:?}");
    for r in &rows[1..] {
        assert_eq!(&r[7], "true");
        assert_eq!(&r[8], "true");
        assert_eq!(&r[9], "true");
        assert_eq!(&r[10], "");
    }
    let us: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(us[8] < 1e-6);
}

#[test]
fn scan_square_min_derivative_tends_to_two() {
    let dir = TempDir::new().unwrap();
    let poly = write(&dir, "g.json", SQUARE);
    let out = dir.path().join("s.csv");
    assert!(hyperdyn(&["scan", "--poly", s(&poly), "--a-range", "1e3:1e7:5", "--out", s(&out)]).status.success());
    let rows = csv_rows(&fs::read_to_string(&out).unwrap());
    let gaps: Vec<f64> = rows.iter().map(|r| (2.0 - r[4].parse::<f64>().unwrap()).abs()).collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    assert!(gaps[4] < 1e-5);
    assert!(rows.iter().all(|r| &r[6] == "UniformBound"));
}

#[test]
fn scan_empty_range_is_header_only() {
    let dir = TempDir::new().unwrap();
    let poly = write(&dir, "g.json", LOGISTIC);
    let out = hyperdyn(&["scan", "--poly", s(&poly), "--a-range", "5:50:0"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("a,context,u_a,v_a,min_abs_derivative,verdict,route"));
}

#[test]
fn scan_records_row_errors() {
    let dir = TempDir::new().unwrap();
    let poly = write(&dir, "g.json", LOGISTIC);
    let out = hyperdyn(&["scan", "--poly", s(&poly), "--a-range", "2:6:3:lin"]);
    assert!(out.status.success());
    let rows = csv_rows(std::str::from_utf8(&out.stdout).unwrap());
    assert!(rows[0][10].contains("hypotheses not satisfied"));
    assert_eq!(&rows[2][10], "");
}

fn pgm_pixels(bytes: &[u8]) -> (String, &[u8]) {
    let mut fields = 0;
    let mut i = 0;
    while fields < 4 {
        while bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        while !bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        fields += 1;
    }
    (String::from_utf8(bytes[..i].to_vec()).unwrap(), &bytes[i + 1..])
}

#[test]
fn julia_grid_and_sidecar() {
    let dir = TempDir::new().unwrap();
    let poly = write(&dir, "g.json", LOGISTIC);
    let pgm = dir.path().join("j.pgm");
    let start = std::time::Instant::now();
    let out = hyperdyn(&["julia", "--poly", s(&poly), "--a", "5", "--window", "-0.5:1.5:-1:1", "--res", "64", "--out", s(&pgm)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(start.elapsed().as_secs_f64() < 1.0);
    let bytes = fs::read(&pgm).unwrap();
    let (header, data) = pgm_pixels(&bytes);
    assert_eq!(header, "P5\n64 64\n100");
    assert_eq!(data.len(), 64 * 64);
    let side: Value = serde_json::from_str(&fs::read_to_string(pgm.with_extension("json")).unwrap()).unwrap();
    assert_eq!(side["k"], 2.0);
    assert_eq!(side["budget"], 100);
    assert_eq!(side["width"], 64);

    let again = dir.path().join("k.pgm");
    hyperdyn(&["--threads", "3", "julia", "--poly", s(&poly), "--a", "5", "--window", "-0.5:1.5:-1:1", "--res", "64", "--out", s(&again)]);
    assert_eq!(fs::read(&again).unwrap(), bytes);
}

#[test]
fn julia_outside_trap_is_all_zero() {
    let dir = TempDir::new().unwrap();
    let poly = write(&dir, "g.json", LOGISTIC);
    let pgm = dir.path().join("z.pgm");
    assert!(hyperdyn(&["julia", "--poly", s(&poly), "--a", "5", "--window", "3:5:3:5", "--res", "32", "--out", s(&pgm)]).status.success());
    let bytes = fs::read(&pgm).unwrap();
    let (_, data) = pgm_pixels(&bytes);
    assert_eq!(data.len(), 32 * 32);
    assert!(data.iter().all(|&b| b == 0));
}

#[test]
fn julia_bad_window_is_exit_2() {
    let dir = TempDir::new().unwrap();
    let poly = write(&dir, "g.json", LOGISTIC);
    let pgm = dir.path().join("z.pgm");
    for w in ["1:1:0:1", "0:1:2:1", "0:1:0", "a:b:c:d"] {
        let out = hyperdyn(&["julia", "--poly", s(&poly), "--a", "5", "--window", w, "--out", s(&pgm)]);
        assert_eq!(out.status.code(), Some(2), "{w}");
    }
    assert_eq!(hyperdyn(&["julia", "--poly", s(&poly), "--a", "5", "--out", s(&pgm)]).status.code(), Some(2));
}

#[test]
fn reports_identical_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    let poly = write(&dir, "g.json", THICK);
    let run = |t: &str| {
        let out = hyperdyn(&["--threads", t, "analyze", "--poly", s(&poly), "--a", "1e4", "--depth", "8"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    };
    let one = run("1");
    assert_eq!(one, run("4"));
    assert_eq!(one, run("1"));
}
