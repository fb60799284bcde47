use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn capfrac(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_capfrac"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

/// `(first coordinate, value)` pairs of a zonal density CSV.
fn zonal_rows(path: &PathBuf) -> Vec<(f64, f64)> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    rdr.records()
        .map(|r| r.unwrap())
        .map(|r| (r[0].parse().unwrap(), r[r.len() - 1].parse().unwrap()))
        .collect()
}

#[test]
fn apply_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    for (alpha, n) in [("0.5", 2usize), ("1", 3)] {
        let o = capfrac(
            &[
                "apply",
                "--op",
                "S-minus",
                "--alpha",
                alpha,
                "--n",
                &n.to_string(),
                "--route",
                "zonal",
                "--manufactured",
                "zonal-closed-form",
                "--radial-nodes",
                "96",
                "--output",
                "out.csv",
            ],
            dir.path(),
        );
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let a: f64 = alpha.parse().unwrap();
        let half = n as f64 / 2.0;
        let rows = zonal_rows(&dir.path().join("out.csv"));
        let mut worst = 0.0f64;
        for (theta, v) in rows {
            let u = (theta / 2.0).tan().powi(2);
            let want = if u.is_finite() {
                2f64.powf(a) * (1.0 + u).powf(half - a) * (-u).exp()
            } else {
                0.0
            };
            worst = worst.max((v - want).abs());
        }
        // values peak at 2^α near the south pole
        assert!(worst / 2f64.powf(a) < 1e-5, "alpha {alpha}, n {n}: {worst}");
    }
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| {
        vec![
            "apply",
            "--op",
            "S-plus",
            "--alpha",
            "0.75",
            "--route",
            "conjugated",
            "--manufactured",
            "tilted",
            "--radial-nodes",
            "24",
            "--jmax",
            "3",
            "--output",
            out,
        ]
    };
    assert_eq!(code(&capfrac(&args("a.csv"), dir.path())), 0);
    assert_eq!(code(&capfrac(&args("b.csv"), dir.path())), 0);
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn input_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&capfrac(
            &[
                "apply",
                "--op",
                "S-minus",
                "--alpha",
                "0.5",
                "--manufactured",
                "constant",
                "--radial-nodes",
                "8",
                "--output",
                "c.csv"
            ],
            dir.path()
        )),
        0
    );
    std::fs::write(dir.path().join("c.csv"), "").unwrap();
    let o = capfrac(
        &[
            "apply", "--op", "S-minus", "--alpha", "0.5", "--input", "c.csv", "--output", "d.csv",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stderr));
    let o = capfrac(
        &[
            "apply",
            "--op",
            "S-minus",
            "--alpha",
            "0.5",
            "--input",
            "missing.csv",
            "--output",
            "d.csv",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 1);
    // a plane density handed to a sphere operator
    assert_eq!(
        code(&capfrac(
            &[
                "apply",
                "--op",
                "B-minus",
                "--alpha",
                "1",
                "--manufactured",
                "gaussian",
                "--radial-nodes",
                "16",
                "--output",
                "g.csv"
            ],
            dir.path()
        )),
        0
    );
    let o = capfrac(
        &[
            "apply", "--op", "S-minus", "--alpha", "1", "--input", "g.csv", "--output", "h.csv",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 1);
}

#[test]
fn domain_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = capfrac(
        &[
            "apply",
            "--op",
            "S-minus",
            "--alpha",
            "-0.5",
            "--manufactured",
            "constant",
            "--output",
            "x.csv",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("positive"));
    let o = capfrac(
        &[
            "invert-riesz",
            "--alpha",
            "1",
            "--manufactured",
            "constant",
            "--radial-nodes",
            "8",
            "--output",
            "x.csv",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 2);
    let o = capfrac(
        &[
            "riesz",
            "--alpha",
            "2.5",
            "--manufactured",
            "constant",
            "--output",
            "x.csv",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 2);
    let o = capfrac(
        &[
            "apply",
            "--op",
            "S-minus",
            "--alpha",
            "0.5",
            "--cap-b",
            "1.5",
            "--manufactured",
            "constant",
            "--output",
            "x.csv",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 2);
}

#[test]
fn bad_thread_count_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_capfrac"))
        .args(["oracle", "--sweep", "psi"])
        .env("CAPFRAC_THREADS", "many")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
    let o = Command::new(env!("CARGO_BIN_EXE_capfrac"))
        .args(["oracle", "--sweep", "psi"])
        .env("CAPFRAC_THREADS", "2")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 10);
}

#[test]
fn verify_appendix_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = capfrac(
        &["verify", "--suite", "appendix", "--output", "report.csv"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "identity,computed,reference,abs_err,rel_err,budget,rel_tol,pass"
    );
    let rows: Vec<&str> = lines.collect();
    assert!(rows.iter().any(|r| r.starts_with("psi")));
    assert!(rows.iter().any(|r| r.starts_with("lambda")));
    assert!(rows.iter().all(|r| r.ends_with("true")));
}

#[test]
fn apply_then_invert_recovers_input() {
    let dir = tempfile::tempdir().unwrap();
    let o = capfrac(
        &[
            "apply",
            "--op",
            "S-minus",
            "--alpha",
            "0.5",
            "--route",
            "zonal",
            "--manufactured",
            "zonal-closed-form",
            "--radial-nodes",
            "64",
            "--output",
            "f.csv",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let o = capfrac(
        &[
            "invert", "--op", "S-minus", "--alpha", "0.5", "--input", "f.csv", "--output",
            "phi.csv",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for (theta, v) in zonal_rows(&dir.path().join("phi.csv")) {
        let h = -theta.cos();
        if !(-0.8..0.6).contains(&h) {
            continue;
        }
        let u = (theta / 2.0).tan().powi(2);
        let want = (1.0 + u).powf(1.5) * (-u).exp();
        assert!(
            (v - want).abs() < 1e-3 * want.max(0.1),
            "theta {theta}: {v} vs {want}"
        );
    }
    let diag = std::fs::read_to_string(dir.path().join("phi.diagnostics.csv")).unwrap();
    assert!(diag.starts_with("i,a,u,stage,k,eps,value,converged"));
    assert!(diag.lines().count() > 64);
}

#[test]
fn riesz_of_constant_is_two() {
    let dir = tempfile::tempdir().unwrap();
    for route in ["direct", "minus-first", "plus-first"] {
        let o = capfrac(
            &[
                "riesz",
                "--alpha",
                "1",
                "--route",
                route,
                "--manufactured",
                "constant",
                "--radial-nodes",
                "12",
                "--stage-nodes",
                "48",
                "--output",
                "r.csv",
            ],
            dir.path(),
        );
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        for (_, v) in zonal_rows(&dir.path().join("r.csv")) {
            assert!((v - 2.0).abs() < 1e-3, "{route}: {v}");
        }
    }
}

#[test]
fn cap_pipeline_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let cap = ["--cap-a", "0.2"];
    let mut args = vec![
        "riesz",
        "--alpha",
        "1",
        "--route",
        "direct",
        "--manufactured",
        "cap-bump",
        "--radial-nodes",
        "32",
        "--output",
        "f.csv",
    ];
    args.extend(cap);
    assert_eq!(code(&capfrac(&args, dir.path())), 0);
    for route in ["pipeline", "modes"] {
        let mut args = vec![
            "invert-riesz",
            "--alpha",
            "1",
            "--route",
            route,
            "--input",
            "f.csv",
            "--stage-nodes",
            "32",
            "--output",
            "phi.csv",
        ];
        args.extend(cap);
        let o = capfrac(&args, dir.path());
        assert_eq!(
            code(&o),
            0,
            "{route}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        for (theta, v) in zonal_rows(&dir.path().join("phi.csv")) {
            let h = -theta.cos();
            if !(0.35..0.85).contains(&h) {
                continue;
            }
            let want = 10.0 * (h - 0.2f64).powi(2) * (1.0 - h).powi(2);
            assert!((v - want).abs() < 2e-3, "{route} at h = {h}: {v} vs {want}");
        }
        assert!(dir.path().join("phi.diagnostics.csv").exists());
    }
}
