use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn imstep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_imstep")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn lines(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path).unwrap().lines().map(str::to_string).collect()
}

#[test]
fn converge_writes_one_row_per_tau() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("conv.csv");
    let res = imstep(&[
        "converge", "--scheme", "rk4", "--composed", "--problem", "cubic", "--taus", "0.2,0.1,0.05", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    let rows = lines(&out);
    assert_eq!(rows[0], "tau,global_error,roc,rhs_evals,wall_time");
    assert_eq!(rows.len(), 4);
    let roc: f64 = rows[3].split(',').nth(2).unwrap().parse().unwrap();
    assert!((roc - 5.0).abs() < 0.4, "{roc}");
}

#[test]
fn stability_grid_has_every_node() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("stab.csv");
    let res = imstep(&[
        "stability", "--scheme", "rk2", "--box", "-4,1,-3,3", "--nx", "11", "--ny", "7", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    assert_eq!(lines(&out).len(), 1 + 11 * 7);
}

#[test]
fn integrate_fixed_and_adaptive_traces() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("trace.csv");
    let path = out.to_str().unwrap();
    let res = imstep(&["integrate", "--scheme", "rk2", "--composed", "--problem", "cubic", "--tau", "0.5", "--out", path]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    let rows = lines(&out);
    assert_eq!(rows[0], "t,tau,y_0,err_est,exact_err");
    assert_eq!(rows.len(), 5);
    assert!(rows[4].starts_with("2,0.5,"));

    let res = imstep(&[
        "integrate", "--scheme", "rk4", "--composed", "--problem", "lambert", "--param", "delta=0.1", "--adaptive",
        "--tol", "1e-8", "--tau0", "0.1", "--out", path,
    ]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    let last = lines(&out).pop().unwrap();
    assert!(last.starts_with("20,"), "{last}");
}

#[test]
fn config_file_selects_the_problem() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("problem.cfg");
    std::fs::write(&cfg, "# linear decay\nname = linear\nproblem.lambda = -2\n").unwrap();
    let out = dir.path().join("trace.csv");
    let res = imstep(&[
        "integrate", "--scheme", "rk4", "--config", cfg.to_str().unwrap(), "--tau", "0.25", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    let last = lines(&out).pop().unwrap();
    let y: f64 = last.split(',').nth(2).unwrap().parse().unwrap();
    assert!((y - (-2.0f64).exp()).abs() < 1e-3, "{y}");
}

#[test]
fn compare_fixed_and_adaptive() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("cmp.csv");
    let path = out.to_str().unwrap();
    let res = imstep(&["compare", "--schemes", "dop5,composed-rk4", "--problem", "cubic", "--taus", "0.1,0.05", "--out", path]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    assert_eq!(lines(&out).len(), 1 + 4);

    let res = imstep(&["compare", "--schemes", "bs3", "--problem", "cubic", "--adaptive", "1e-6:0.1,1e-8:0.1", "--out", path]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    assert_eq!(lines(&out).len(), 1 + 2);
}

#[test]
fn residual_bpl_run() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("bpl.csv");
    let res = imstep(&[
        "integrate", "--scheme", "bpl5", "--problem", "cubic", "--residual", "--tol", "1e-8", "--tau0", "0.01",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    assert!(lines(&out).pop().unwrap().starts_with("2,"));
}

#[test]
fn bad_arguments_exit_with_3() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("x.csv");
    let path = out.to_str().unwrap();
    assert_eq!(code(&imstep(&["integrate", "--scheme", "rk9", "--problem", "cubic", "--tau", "0.1", "--out", path])), 3);
    assert_eq!(code(&imstep(&["integrate", "--scheme", "rk4", "--problem", "nope", "--tau", "0.1", "--out", path])), 3);
    assert_eq!(
        code(&imstep(&["integrate", "--scheme", "rk4", "--problem", "cubic", "--param", "bogus=1", "--tau", "0.1", "--out", path])),
        3
    );
    assert_eq!(code(&imstep(&["converge", "--scheme", "rk4"])), 3);
    assert_eq!(code(&imstep(&["frobnicate"])), 3);
    assert_eq!(code(&imstep(&["--help"])), 0);
}

#[test]
fn integration_failure_exits_with_2_and_keeps_the_partial_trace() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("blowup.csv");
    // Explicit Euler from y0 = 10 with tau = 1 overshoots until the state overflows.
    let res = imstep(&[
        "integrate", "--scheme", "rk1", "--problem", "cubic", "--param", "y0=10", "--tau", "1", "--param", "t_end=50",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&res), 2, "{}", String::from_utf8_lossy(&res.stderr));
    assert!(lines(&out).len() > 1);
}
