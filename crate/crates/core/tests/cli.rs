use std::fs;
use std::path::{Path, PathBuf};

use replicability::cli;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("replicability").chain(args.iter().copied());
    let code = cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn fwer_on_hippocampal_writes_discoveries() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture("hippocampal.csv");
    let (code, out, _) = run(&[
        "analyze", "--input", &input, "--mode", "fwer", "--alpha1", "0.025", "--alpha", "0.05",
        "--out-dir", path_str(dir.path()),
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("R2: 1\n"));
    assert!(out.ends_with("rejected: MSRB3\n"));
    let csv = fs::read_to_string(dir.path().join("discoveries.csv")).unwrap();
    assert_eq!(
        csv,
        "id,p1,p2,z,adjusted_p,rejected\n\
         DPP4,5.2e-8,0.7,7.000,1.000,0\n\
         ASTN2,1e-7,0.2,2.000,1.000,0\n\
         MSRB3,5.5e-9,0.002,0.02750,0.02750,1\n\
         WIF1,2.2e-8,0.0007,0.1100,0.1100,0\n\
         HRK,4.8e-8,5.8e-5,0.2400,0.2400,0\n"
    );
    let summary = fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert_eq!(summary, out);
}

#[test]
fn quiet_prints_only_rejected_ids() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture("hippocampal.csv");
    let (code, out, err) =
        run(&["--quiet", "analyze", "--input", &input, "--mode", "fwer", "--out-dir", path_str(dir.path())]);
    assert_eq!(code, 0);
    assert_eq!(out, "MSRB3\n");
    assert!(err.is_empty());
}

#[test]
fn crohns_rejection_counts_by_dependence_mode() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture("crohns.csv");
    let d = path_str(dir.path());
    let count = |extra: &[&str]| {
        let mut args = vec!["--quiet", "analyze", "--input", &input, "--q1", "0.04", "--q", "0.05", "--out-dir", d];
        args.extend_from_slice(extra);
        let (code, out, _) = run(&args);
        assert_eq!(code, 0);
        out.lines().count()
    };
    assert_eq!(count(&[]), 36);
    assert_eq!(count(&["--dependence", "item1"]), 21);
    assert_eq!(count(&["--dependence", "item2", "--t", "5e-5"]), 23);
}

#[test]
fn adjust_table_golden() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("adj.csv");
    let input = fixture("hippocampal.csv");
    let (code, _, _) = run(&[
        "adjust", "--input", &input, "--c", "0.2", "--flavor", "bonferroni", "--out", path_str(&out_path),
    ]);
    assert_eq!(code, 0);
    assert_eq!(
        fs::read_to_string(out_path).unwrap(),
        "id,p1,p2,z,adjusted_p\n\
         MSRB3,5.5e-9,0.002,0.06875,0.06875\n\
         WIF1,2.2e-8,0.0007,0.2750,0.2750\n\
         HRK,4.8e-8,5.8e-5,0.6000,0.6000\n\
         ASTN2,1e-7,0.2,1.250,1.000\n\
         DPP4,5.2e-8,0.7,4.375,1.000\n"
    );
}

#[test]
fn power_null_means() {
    let (code, out, _) = run(&["power", "--mu11", "0", "--mu21", "0", "--m", "100"]);
    assert_eq!(code, 0);
    assert_eq!(out, "pi1 = 2.5e-07\n");
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = fixture("sparse_equal_sd.scenario");
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for (path, threads) in [(&a, "1"), (&b, "4")] {
        let (code, _, _) =
            run(&["simulate", "--scenario", &scenario, "--reps", "200", "--threads", threads, "--out", path_str(path)]);
        assert_eq!(code, 0);
    }
    let first = fs::read(&a).unwrap();
    assert_eq!(first, fs::read(&b).unwrap());
    assert!(first.ends_with(b"\n"));
}

#[test]
fn exit_code_usage() {
    let (code, _, err) = run(&["analyze"]);
    assert_eq!(code, 1);
    assert!(err.contains("--input"));
    let (code, _, _) = run(&["analyze", "--input", &fixture("hippocampal.csv"), "--q", "1.5"]);
    assert_eq!(code, 1);
}

#[test]
fn exit_code_data() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "id,p1,p2\na,1.5,0.1\n").unwrap();
    let (code, _, err) = run(&["analyze", "--input", path_str(&bad), "--out-dir", path_str(dir.path())]);
    assert_eq!(code, 2);
    assert!(err.starts_with("error: "));
    fs::write(&bad, "name,p1,p2\na,0.5,0.1\n").unwrap();
    let (code, _, _) = run(&["analyze", "--input", path_str(&bad), "--out-dir", path_str(dir.path())]);
    assert_eq!(code, 2);
}

#[test]
fn exit_code_applicability() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = run(&[
        "analyze", "--input", &fixture("crohns.csv"), "--q1", "0.04", "--dependence", "item2", "--t", "1e-12",
        "--out-dir", path_str(dir.path()),
    ]);
    assert_eq!(code, 3);
    assert!(err.contains("threshold"));
}

#[test]
fn exit_code_io() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.csv");
    let (code, _, err) = run(&["analyze", "--input", path_str(&missing)]);
    assert_eq!(code, 4);
    assert!(err.contains("missing.csv"));
}
