use std::path::PathBuf;
use std::process::Command;

use cnls_cli::{run, EXIT_HYPOTHESIS, EXIT_INPUT, EXIT_OK, EXIT_SOLVER};
use cnls_core::config::Report;

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

/// Runs in-process; returns (code, stdout, stderr).
fn cnls(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("cnls").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn check_passes_on_the_shipped_configs() {
    for name in ["weakly-coupled.toml", "spinor.toml", "odd.toml"] {
        let path = config(name);
        let (code, out, err) = cnls(&["check", path.to_str().unwrap()]);
        assert_eq!(code, EXIT_OK, "{name}: {err}");
        let report = Report::parse(&out).unwrap();
        for id in ["i", "ii", "iii", "iv", "v", "vi"] {
            assert_eq!(report.get(&format!("hypothesis.{id}")), Some("pass"), "{name} {id}\n{out}");
        }
    }
}

#[test]
fn solve_writes_a_profile_and_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("wave.csv");
    let rep = dir.path().join("wave.txt");
    let path = config("weakly-coupled.toml");
    let (code, _, err) = cnls(&[
        "solve",
        path.to_str().unwrap(),
        "--grid-N",
        "1501",
        "--out",
        csv.to_str().unwrap(),
        "--report",
        rep.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("x,u1,u2"));
    let data = rows(&text);
    assert_eq!(data.len(), 1501);
    assert!(data.windows(2).all(|w| w[1][0] > w[0][0]));
    assert!(data.iter().all(|r| r[1] >= 0.0 && r[2] >= 0.0));
    let report = Report::parse(&std::fs::read_to_string(&rep).unwrap()).unwrap();
    assert_eq!(report.get("status"), Some("ok"));
    let norm: f64 = report.get("norm").unwrap().parse().unwrap();
    let r: f64 = report.get("r").unwrap().parse().unwrap();
    let big_r: f64 = report.get("R").unwrap().parse().unwrap();
    assert!(r <= norm && norm <= big_r);
    assert!(report.get("residual").unwrap().parse::<f64>().unwrap() <= 1e-6);
}

#[test]
fn profile_goes_to_stdout_without_out() {
    let path = config("spinor.toml");
    let (code, out, err) = cnls(&["solve", path.to_str().unwrap(), "--grid-N", "801"]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert_eq!(rows(&out).len(), 801);
    assert_eq!(Report::parse(&err).unwrap().get("status"), Some("ok"));
}

#[test]
fn odd_solve_is_odd() {
    let path = config("odd.toml");
    let (code, out, err) = cnls(&["solve-odd", path.to_str().unwrap(), "--grid-N", "1501"]);
    assert_eq!(code, EXIT_OK, "{err}");
    let data = rows(&out);
    let n = data.len();
    for j in 0..n {
        assert_eq!(data[j][1], -data[n - 1 - j][1]);
    }
}

#[test]
fn origin_in_support_rejects_odd_solve() {
    let path = config("weakly-coupled.toml");
    let (code, _, err) = cnls(&["solve-odd", path.to_str().unwrap(), "--grid-N", "801"]);
    assert_eq!(code, EXIT_INPUT, "{err}");
    assert!(err.contains("origin"), "{err}");
}

#[test]
fn branch_table_has_one_row_per_lambda() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("branch.csv");
    let path = config("weakly-coupled.toml");
    let (code, _, err) = cnls(&[
        "branch",
        path.to_str().unwrap(),
        "--grid-N",
        "1501",
        "--lambdas",
        "0.25,1,4",
        "--out",
        csv.to_str().unwrap(),
        "--profiles",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("lambda,norm,r_lambda,R_lambda,converged"));
    let data: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(data.len(), 3);
    let norms: Vec<f64> = data.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!((norms[0] / norms[1] - 2.0).abs() < 1e-9);
    assert!((norms[1] / norms[2] - 2.0).abs() < 1e-9);
    for i in 0..3 {
        assert!(dir.path().join(format!("point_{i}.csv")).exists());
    }
}

#[test]
fn failing_hypothesis_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(config("weakly-coupled.toml"))
        .unwrap()
        .replace("value = 0.5", "value = 3.0");
    let path = write(&dir, "strong.toml", &text);
    let (code, out, _) = cnls(&["check", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_HYPOTHESIS);
    assert_eq!(Report::parse(&out).unwrap().get("hypothesis.vi"), Some("fail"));
    let (code, _, err) = cnls(&["solve", path.to_str().unwrap(), "--grid-N", "801"]);
    assert_eq!(code, EXIT_HYPOTHESIS, "{err}");
}

#[test]
fn solver_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(config("weakly-coupled.toml"))
        .unwrap()
        .replace("value = 0.5", "value = 3.0");
    let path = write(&dir, "strong.toml", &text);
    let (code, _, err) = cnls(&["solve", path.to_str().unwrap(), "--grid-N", "801", "--override-hypotheses"]);
    assert_eq!(code, EXIT_SOLVER, "{err}");
    assert!(err.contains("no nontrivial solution"), "{err}");
}

#[test]
fn empty_coupling_support_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        &dir,
        "free.toml",
        "[grid]\nL = 15.0\nN = 801\n[a]\nkind = \"constant\"\nvalue = 1.0\n\
         [d]\nkind = \"constant\"\nvalue = 1.0\n[nonlinearity]\nkind = \"weakly-coupled\"\n",
    );
    let (code, _, err) = cnls(&["solve", path.to_str().unwrap(), "--override-hypotheses"]);
    assert_eq!(code, EXIT_INPUT, "{err}");
    assert!(err.contains("empty"), "{err}");
}

#[test]
fn bad_input_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(&dir, "bad.toml", "[a]\nkind = \"constant\"\nvalue = -1.0\n");
    let (code, _, err) = cnls(&["check", bad.to_str().unwrap()]);
    assert_eq!(code, EXIT_INPUT);
    assert!(!err.is_empty());
    let (code, _, _) = cnls(&["check", "/nonexistent/problem.toml"]);
    assert_eq!(code, EXIT_INPUT);
    let (code, _, _) = cnls(&["solve"]);
    assert_eq!(code, EXIT_INPUT);
}

#[test]
fn oracle_agrees_with_solve() {
    let path = config("weakly-coupled.toml");
    let (code, green, _) = cnls(&["solve", path.to_str().unwrap(), "--grid-N", "1501"]);
    assert_eq!(code, EXIT_OK);
    let (code, fd, err) = cnls(&["oracle", path.to_str().unwrap(), "--grid-N", "1501"]);
    assert_eq!(code, EXIT_OK, "{err}");
    let gap = rows(&green)
        .iter()
        .zip(rows(&fd))
        .map(|(a, b)| (a[1] - b[1]).abs().max((a[2] - b[2]).abs()))
        .fold(0.0, f64::max);
    assert!(gap < 1e-6, "{gap}");
}

#[test]
fn greens_samples_a_symmetric_kernel() {
    let path = config("weakly-coupled.toml");
    let (code, out, err) = cnls(&["greens", path.to_str().unwrap(), "--grid-N", "401", "--stride", "40"]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert_eq!(out.lines().next(), Some("x,s,G"));
    let data = rows(&out);
    assert_eq!(data.len(), 11 * 11);
    for r in &data {
        let exact = (-(r[0] - r[1]).abs()).exp() / 2.0;
        assert!((r[2] - exact).abs() < 1e-8);
    }
}

#[test]
fn binary_reports_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_cnls");
    let ok = Command::new(bin)
        .args(["check", config("weakly-coupled.toml").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    let bad = Command::new(bin).arg("--no-such-flag").output().unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_INPUT));
}
