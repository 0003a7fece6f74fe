use std::path::Path;
use std::process::{Command, Output};

use refraction_billiards::boundary::EllipseBoundary;
use refraction_billiards::return_map::free_fall_delta;
use refraction_billiards::PhysParams;

fn run(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_refraction-billiards"));
    cmd.args(args).env_remove("REFRACTION_BILLIARDS_THREADS");
    if let Some(t) = threads {
        cmd.env("REFRACTION_BILLIARDS_THREADS", t);
    }
    cmd.output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_str(&stdout(out)).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn bifurcation_anchor() {
    let out = run(
        &[
            "bifurcate",
            "--E",
            "2.5",
            "--omega",
            "1.41421356",
            "--mu",
            "2",
            "--ecc",
            "0.1",
            "--axis",
            "1",
            "--param",
            "h",
            "--lo",
            "50",
            "--hi",
            "200",
        ],
        None,
    );
    let root = json(&out)["root"].as_f64().unwrap();
    assert!((root - 109.091).abs() < 0.01, "{root}");
}

#[test]
fn stability_reports_minor_axis_discriminant() {
    let out = run(
        &[
            "stability",
            "--E",
            "2.5",
            "--omega",
            "1.41421356",
            "--h",
            "0.1",
            "--mu",
            "1",
            "--ecc",
            "0.1",
            "--axis",
            "1",
        ],
        None,
    );
    let doc = json(&out);
    assert!(doc["delta"].as_f64().is_some());
    assert_eq!(doc["axis"], 1);
    assert!(["center", "saddle", "degenerate"].contains(&doc["classification"].as_str().unwrap()));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "run.json",
        r#"{"params": {"E": 2.5, "omega": 1.41421356, "h": 50, "mu": 2},
            "boundary": {"type": "ellipse", "eccentricity": 0.3}}"#,
    );
    let from_file = json(&run(&["stability", "--config", &cfg], None));
    assert_eq!(from_file["params"]["h"], 50.0);
    assert_eq!(from_file["boundary"]["eccentricity"], 0.3);
    let overridden = json(&run(
        &["stability", "--config", &cfg, "--h", "100", "--ecc", "0.1"],
        None,
    ));
    assert_eq!(overridden["params"]["h"], 100.0);
    assert_eq!(overridden["params"]["mu"], 2.0);
    assert_eq!(overridden["boundary"]["eccentricity"], 0.1);
}

#[test]
fn custom_boundary_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "polar.json",
        r#"{"boundary": {"type": "custom", "name": "polar", "r0": 1.0, "amplitude": 0.05, "harmonic": 4},
            "orbit": {"xi": 0.2, "alpha": 0.1, "iterations": 4}}"#,
    );
    let csv = stdout(&run(&["orbit", "--config", &cfg], None));
    assert_eq!(csv.lines().count(), 5);
    let doc = json(&run(&["stability", "--config", &cfg, "--xi", "0"], None));
    assert_eq!(doc["boundary"]["type"], "polar");
}

#[test]
fn invalid_configuration_exits_with_one() {
    assert_eq!(
        run(&["freefall", "--theta-samples", "0"], None)
            .status
            .code(),
        Some(1)
    );
    assert_eq!(run(&["orbit", "--mu", "-1"], None).status.code(), Some(1));
    assert_eq!(run(&["orbit", "--ecc", "1.5"], None).status.code(), Some(1));
    assert_eq!(run(&["portrait"], Some("zero")).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"params": {"energy": 2.5, "bogus": 1}}"#,
    );
    assert_eq!(
        run(&["orbit", "--config", &bad], None).status.code(),
        Some(1)
    );
    let hill = write(
        dir.path(),
        "hill.json",
        r#"{"params": {"E": 1.0, "omega": 5.0}}"#,
    );
    assert_eq!(
        run(&["orbit", "--config", &hill], None).status.code(),
        Some(1)
    );
}

#[test]
fn numerical_failure_exits_with_two() {
    let out = run(
        &[
            "bifurcate",
            "--ecc",
            "0.1",
            "--mu",
            "2",
            "--axis",
            "0",
            "--lo",
            "50",
            "--hi",
            "200",
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn csv_headers_and_row_counts() {
    let empty = stdout(&run(&["portrait", "--n-xi", "0"], None));
    assert_eq!(empty, "orbit_id,iter,xi,alpha,termination\n");
    let two = stdout(&run(
        &[
            "portrait",
            "--n-xi",
            "2",
            "--n-alpha",
            "1",
            "--iterations",
            "3",
        ],
        None,
    ));
    assert_eq!(two.lines().count(), 7);
    let scan = stdout(&run(&["delta-scan", "--nx", "3", "--ny", "2"], None));
    assert_eq!(scan.lines().next(), Some("x,y,delta0,delta1,sign0,sign1"));
    assert_eq!(scan.lines().count(), 7);
    let ff = stdout(&run(&["freefall", "--theta-samples", "4"], None));
    assert_eq!(ff.lines().next(), Some("theta,delta,clamped"));
    assert_eq!(ff.lines().count(), 5);
}

#[test]
fn numbers_round_trip_exactly() {
    let csv = stdout(&run(
        &[
            "freefall",
            "--E",
            "2.5",
            "--omega",
            "1.4142135623730951",
            "--h",
            "120",
            "--mu",
            "2",
            "--ecc",
            "0.1",
            "--theta-samples",
            "7",
        ],
        None,
    ));
    let p = PhysParams::new(2.5, std::f64::consts::SQRT_2, 120.0, 2.0).unwrap();
    let c = EllipseBoundary::new(0.1).unwrap();
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let theta: f64 = f[0].parse().unwrap();
        let delta: f64 = f[1].parse().unwrap();
        assert_eq!(
            delta.to_bits(),
            free_fall_delta(&p, &c, theta).unwrap().delta.to_bits()
        );
    }
}

#[test]
fn svg_outputs_are_self_contained() {
    let dir = tempfile::tempdir().unwrap();
    for (cmd, extra) in [
        (
            "portrait",
            vec!["--n-xi", "3", "--n-alpha", "2", "--iterations", "5"],
        ),
        ("freefall", vec![]),
        ("delta-scan", vec!["--nx", "4", "--ny", "4"]),
    ] {
        let svg = dir.path().join(format!("{cmd}.svg"));
        let csv = dir.path().join(format!("{cmd}.csv"));
        let mut args = vec![
            cmd,
            "--svg",
            svg.to_str().unwrap(),
            "--out",
            csv.to_str().unwrap(),
        ];
        args.extend(extra);
        let out = run(&args, None);
        assert!(out.status.success());
        assert!(out.stdout.is_empty());
        let text = std::fs::read_to_string(&svg).unwrap();
        assert!(text.starts_with("<svg") && text.trim_end().ends_with("</svg>"));
        assert!(!text.contains("href"));
        assert!(std::fs::metadata(&csv).unwrap().len() > 0);
    }
}

/// Criterion 12 at the binary level: scan outputs and the self-test report are byte-identical
/// across runs and thread counts.
#[test]
fn criterion_12_outputs_are_byte_identical() {
    let jobs: [&[&str]; 4] = [
        &["delta-scan", "--ecc", "0.3", "--nx", "15", "--ny", "12"],
        &[
            "freefall",
            "--h",
            "120",
            "--mu",
            "2",
            "--theta-samples",
            "60",
        ],
        &[
            "portrait",
            "--ecc",
            "0.3",
            "--n-xi",
            "6",
            "--n-alpha",
            "4",
            "--iterations",
            "40",
        ],
        &["brake", "--h", "120", "--mu", "2"],
    ];
    for args in jobs {
        let one = run(args, Some("1"));
        let four = run(args, Some("4"));
        let again = run(args, Some("4"));
        assert_eq!(stdout(&one), stdout(&four), "{args:?}");
        assert_eq!(one.stdout, again.stdout, "{args:?}");
    }
    let a = run(&["selftest"], Some("1"));
    let b = run(&["selftest"], Some("4"));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.status.code(), b.status.code());
    let text = String::from_utf8(a.stdout).unwrap();
    assert_eq!(text.lines().count(), 12);
    println!("{text}");
}
