use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use yamabe::expr::Expr;
use yamabe::geometry::Domain;
use yamabe_cli::commands::{
    estimate_sup, resolve_bounds, EXIT_CERTIFICATE, EXIT_CONFIG, EXIT_NOT_CONVERGED,
};
use yamabe_cli::config::{parse_config, Mode};

const BALL: &str = "\
[domain]
shape = ball 0 0 0 0.05

[problem]
R = 1 - 100*z*z
S = -cos(10*x)
r_bound = 1
s_bound = 1

[run]
mode = solve
mesh_size = 0.005
";

fn yamabe(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_yamabe"))
        .args(args)
        .current_dir(cwd)
        .env("YAMABE_WORKERS", "1")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn solve_writes_every_artifact() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "ball.cfg", BALL);
    let out = tmp.path().join("run");
    let o = yamabe(
        &[
            "solve",
            cfg.to_str().unwrap(),
            "--output-dir",
            out.to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in [
        "trace.csv",
        "solution_f.csv",
        "solution_u.csv",
        "certificate.json",
        "summary.json",
        "timing.json",
    ] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let summary = json(&out.join("summary.json"));
    assert_eq!(summary["converged"], true);
    assert_eq!(summary["certified"], true);
    assert_eq!(summary["bounds"]["bounds_estimated"], false);
    let echoed = summary["config"].as_str().unwrap();
    let original = parse_config(BALL, None).unwrap();
    let reparsed = parse_config(echoed, None).unwrap();
    assert_eq!(reparsed.render(), original.render());
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert!(trace.starts_with("k,sup_grad,diff_h10,ratio,residual"));
}

#[test]
fn artifacts_are_bit_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "ball.cfg", BALL);
    let dirs = ["a", "b"].map(|d| tmp.path().join(d));
    for d in &dirs {
        let o = yamabe(
            &[
                "solve",
                cfg.to_str().unwrap(),
                "--output-dir",
                d.to_str().unwrap(),
            ],
            tmp.path(),
        );
        assert_eq!(code(&o), 0);
    }
    let mut compared = 0;
    for entry in fs::read_dir(&dirs[0]).unwrap() {
        let name = entry.unwrap().file_name();
        if name == "timing.json" {
            continue;
        }
        let a = fs::read(dirs[0].join(&name)).unwrap();
        let b = fs::read(dirs[1].join(&name)).unwrap();
        assert!(a == b, "{name:?} differs");
        compared += 1;
    }
    assert!(compared >= 5);
}

#[test]
fn config_errors_exit_one_with_line_numbers() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = BALL
        .replace("mesh_size = 0.005", "mesh_size = fast")
        .replace("r_bound = 1", "r_bnd = 1");
    let cfg = write_config(tmp.path(), "bad.cfg", &bad);
    let o = yamabe(&["solve", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(code(&o), EXIT_CONFIG);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 7: unknown key `r_bnd`"), "{err}");
    assert!(err.contains("line 12"), "{err}");
    let o = yamabe(&["solve", "missing.cfg"], tmp.path());
    assert_eq!(code(&o), EXIT_CONFIG);
    let o = yamabe(&["frobnicate"], tmp.path());
    assert_eq!(code(&o), EXIT_CONFIG);
}

#[test]
fn failed_certificate_exits_two_and_still_writes_it() {
    let tmp = tempfile::tempdir().unwrap();
    let big = BALL.replace("0.05\n", "1\n").replace("0.005", "0.1");
    let cfg = write_config(tmp.path(), "big.cfg", &big);
    let out = tmp.path().join("big");
    let o = yamabe(
        &[
            "solve",
            cfg.to_str().unwrap(),
            "--output-dir",
            out.to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert_eq!(code(&o), EXIT_CERTIFICATE);
    let cert = json(&out.join("certificate.json"));
    assert_eq!(cert["passed"], false);
    assert!(!cert["violated"].as_array().unwrap().is_empty());
    let o = yamabe(&["certify", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(code(&o), EXIT_CERTIFICATE);
}

#[test]
fn override_runs_uncertified() {
    let tmp = tempfile::tempdir().unwrap();
    let big = BALL
        .replace("0.05\n", "0.3\n")
        .replace("0.005", "0.03")
        .replace("1 - 100*z*z", "1")
        .replace("-cos(10*x)", "1");
    let cfg = write_config(tmp.path(), "big.cfg", &big);
    let out = tmp.path().join("big");
    let o = yamabe(
        &[
            "solve",
            cfg.to_str().unwrap(),
            "--override-certificate",
            "--output-dir",
            out.to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert!(code(&o) == 0 || code(&o) == EXIT_NOT_CONVERGED);
    let summary = json(&out.join("summary.json"));
    assert_eq!(summary["certified"], false);
    assert_eq!(summary["override_certificate"], true);
}

#[test]
fn iteration_budget_exhaustion_exits_three() {
    let tmp = tempfile::tempdir().unwrap();
    let text = format!("{BALL}max_iter = 1\n");
    let cfg = write_config(tmp.path(), "short.cfg", &text);
    let out = tmp.path().join("short");
    let o = yamabe(
        &[
            "solve",
            cfg.to_str().unwrap(),
            "--output-dir",
            out.to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert_eq!(code(&o), EXIT_NOT_CONVERGED);
    assert_eq!(
        json(&out.join("summary.json"))["stop_reason"],
        "max_iterations"
    );
}

#[test]
fn sweep_rows_follow_the_product_order() {
    let tmp = tempfile::tempdir().unwrap();
    let text = "\
[domain]
shape = ball 0 0 0 1

[problem]
curvature = 0.01
scale = 0.05

[run]
mode = sweep
pipeline = deform
mesh_size = 0.125
sweep.curvature = -0.1, 0.1
sweep.scale = 0.02:0.04:3
";
    let cfg = write_config(tmp.path(), "sweep.cfg", text);
    let out = tmp.path().join("sweep");
    let o = yamabe(
        &[
            "sweep",
            cfg.to_str().unwrap(),
            "--output-dir",
            out.to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 6);
    let expect = [
        (-0.1, 0.02),
        (-0.1, 0.03),
        (-0.1, 0.04),
        (0.1, 0.02),
        (0.1, 0.03),
        (0.1, 0.04),
    ];
    for (i, (row, (c, d))) in rows.iter().zip(expect).enumerate() {
        assert_eq!(row[0].parse::<usize>().unwrap(), i);
        assert!((row[1].parse::<f64>().unwrap() - c).abs() < 1e-15);
        assert!((row[2].parse::<f64>().unwrap() - d).abs() < 1e-15);
        assert!(out
            .join(format!("row_{i:04}"))
            .join("summary.json")
            .is_file());
    }
}

#[test]
fn estimate_green_reports_the_centre_value() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("green");
    let o = yamabe(
        &[
            "estimate-green",
            "--dim",
            "3",
            "--output-dir",
            out.to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let g = json(&out.join("green.json"));
    assert!((g["Cn"].as_f64().unwrap() - 0.75).abs() < 1e-3);
    assert_eq!(g["within_evans_bound"], true);
    assert!(
        fs::read_to_string(out.join("green_scan.csv"))
            .unwrap()
            .lines()
            .count()
            > 10
    );
}

#[test]
fn missing_bounds_are_estimated_with_safety_factor() {
    let domain = Domain::cuboid(vec![0.0; 3], vec![1.0; 3]).unwrap();
    let e: Expr = "exp(2*x)".parse().unwrap();
    let est = estimate_sup(&domain, &e);
    assert!((est - 1.05 * 2f64.exp()).abs() < 1e-12, "{est}");
    let cfg = parse_config(
        "[domain]\nshape = box 0 0 0 1 1 1\n\n[problem]\nR = exp(2*x)\nS = 1\ns_bound = 2\n\n[run]\nmesh_size = 0.1\n",
        Some(Mode::Certify),
    )
    .unwrap();
    let b = resolve_bounds(&cfg, &domain);
    assert!(b.r_estimated && !b.s_estimated && b.bounds_estimated);
    assert_eq!(b.s_bound, 2.0);
}
