//! End-to-end runs of the `loopfactor` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use loopfactor::{LaurentPoly, MatrixLoop, C64};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_loopfactor"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn build_g2_single_pair() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "z.json", r#"{"kind":"zeta","pairs":[[0,0,0.3,0]]}"#);
    let o = run(&["build-g2", "--input", input.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let g: MatrixLoop = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(g, MatrixLoop::lower_unipotent(LaurentPoly::monomial(C64::new(0.3, 0.0), 1)));
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "e.json", r#"{"kind":"eta","pairs":[[0.1,0.2,-0.3,0.1],[0.2,0,0.1,-0.1]]}"#);
    let out = dir.path().join("g.json");
    let a = run(&["build-g1", "--input", input.to_str().unwrap()]);
    let b = run(&["build-g1", "--input", input.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert_eq!(b.status.code(), Some(0));
    assert_eq!(stdout(&a), std::fs::read_to_string(out).unwrap());
}

#[test]
fn counterexample_reports_exceptional_step() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(
        dir.path(),
        "g.json",
        r#"{"a":{"terms":[[-2,1,0],[-1,-1,0],[0,1,0]]},
            "b":{"terms":[[-3,1,0],[-1,1,0]]},
            "c":{"terms":[[1,1,0],[2,-2,0],[3,1,0]]},
            "d":{"terms":[[0,1,0],[1,-1,0],[2,1,0]]}}"#,
    );
    let o = run(&["recover-zeta", "--input", input.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["error"], "ExceptionalSet");
    assert_eq!(v["step"], 1);

    let o = run(&["factor", "--input", input.to_str().unwrap(), "--N", "16"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn det_table_converges() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "z.json", r#"{"kind":"zeta","pairs":[[0.3,0,0.4,0]]}"#);
    let o = run(&["det-table", "--input", input.to_str().unwrap(), "--N", "32"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("N,re,im,abs_err"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.iter().map(|r| r[0] as usize).collect::<Vec<_>>(), vec![4, 8, 16, 32]);
    let last = rows.last().unwrap();
    let expected = 1.0 / (1.0 - 0.3 * 0.4);
    assert!((last[1] - expected).abs() < 1e-7 && last[2].abs() < 1e-7);
    assert!(last[3] < 1e-7);
}

#[test]
fn verify_is_deterministic() {
    let a = run(&["verify", "--suite", "paper-fixtures"]);
    assert_eq!(a.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(v["passed"], true);

    let x = run(&["verify", "--suite", "oracle", "--seed", "17"]);
    let y = run(&["verify", "--suite", "oracle", "--seed", "17"]);
    assert_eq!(x.status.code(), Some(0));
    assert_eq!(stdout(&x), stdout(&y));
}

#[test]
fn bad_input_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "bad.json", r#"{"kind":"zeta","pairs":[[0,0]]}"#);
    assert_eq!(run(&["build-g2", "--input", input.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(run(&["build-g2"]).status.code(), Some(1));
    assert_eq!(run(&["verify", "--suite", "oracle", "--tol-exceptional", "1"]).status.code(), Some(1));
    assert_eq!(run(&["det-table", "--mode", "sideways"]).status.code(), Some(1));
    // an η sequence handed to the ζ builder
    let eta = write(dir.path(), "eta.json", r#"{"kind":"eta","pairs":[]}"#);
    assert_eq!(run(&["build-g2", "--input", eta.to_str().unwrap()]).status.code(), Some(1));
}
