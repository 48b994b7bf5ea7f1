//! End-to-end runs of the two binaries against the bundled data.

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use skewloop_cli::Report;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(bin: &str, args: &[&str]) -> Output {
    Command::new(bin)
        .args(args)
        .env_remove("SKEWLOOP_TOL")
        .env_remove("SKEWLOOP_BUDGET")
        .env_remove("SKEWLOOP_SEED")
        .env_remove("SKEWLOOP_WORKERS")
        .env_remove("SKEWLOOP_OUT")
        .env_remove("SKEWLOOP_FORMAT")
        .output()
        .expect("binary runs")
}

fn skew(args: &[&str]) -> Output {
    run(env!("CARGO_BIN_EXE_skew"), args)
}

fn quadric(args: &[&str]) -> Output {
    run(env!("CARGO_BIN_EXE_quadric"), args)
}

fn report(out: &Output) -> Report {
    Report::from_json(&String::from_utf8_lossy(&out.stdout)).expect("stdout holds a report")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn tempdir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("skewloop-cli-{}-{:?}", std::process::id(), std::thread::current().id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn construct_asym3_reports_closed_form_margin() {
    let dir = tempdir();
    let loop_path = dir.join("loop.json");
    let rep_path = dir.join("report.json");
    let out = skew(&[
        "construct",
        "--support",
        &data("asym3.json"),
        "--out",
        loop_path.to_str().unwrap(),
        "--margin-report",
        rep_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rep = Report::from_json(&std::fs::read_to_string(&rep_path).unwrap()).unwrap();
    let r = &rep.results;
    assert!((r["tau"].as_f64().unwrap() - 0.04).abs() < 1e-10);
    let lo = r["margin"]["lower"].as_f64().unwrap();
    let hi = r["margin"]["upper"].as_f64().unwrap();
    assert!(lo > 0.0 && (lo - 0.04).abs() < 1e-8 && (hi - 0.04).abs() < 1e-8);
    assert!(r["projection_degree"].as_u64().is_some());
    assert_eq!(r["certificate"]["status"], "CertifiedSkew");

    let v = skew(&["verify", loop_path.to_str().unwrap()]);
    assert_eq!(code(&v), 0);
    assert_eq!(report(&v).results["certificate"]["status"], "CertifiedSkew");
}

#[test]
fn planar_circle_is_a_finding_not_a_failure() {
    let out = skew(&["verify", &data("planar_circle.json")]);
    assert_eq!(code(&out), 0);
    let rep = report(&out);
    assert_eq!(rep.results["certificate"]["status"], "NotSkew");
    assert!(rep.results["certificate"]["witness"].is_object());
}

#[test]
fn malformed_json_exits_2_with_diagnostic() {
    let dir = tempdir();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{\"kind\": \"curve3\", ").unwrap();
    let out = skew(&["verify", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("malformed JSON"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn input_errors_exit_2() {
    assert_eq!(code(&skew(&["verify", "/nonexistent/loop.json"])), 2);
    assert_eq!(code(&skew(&["oval", "analyze", &data("planar_circle.json")])), 2);
    assert_eq!(code(&skew(&["verify", &data("planar_circle.json"), "--tol", "-1"])), 2);
    assert_eq!(code(&skew(&["construct", "--support", &data("symmetric_oval.json")])), 2);
    assert_eq!(code(&quadric(&["section", "--surface", "torus", "--plane", "0", "0", "1", "0"])), 2);
    // a latitude of the sphere does not lie on sigma
    let off = quadric(&["demo", "--surface", "sigma", "--loop", &data("sphere_latitude.json"), "--check", "noperiod"]);
    assert_eq!(code(&off), 2);
}

#[test]
fn exhausted_budget_exits_1() {
    let dir = tempdir();
    let loop_path = dir.join("loop.json");
    let c = skew(&["construct", "--support", &data("asym3.json"), "--out", loop_path.to_str().unwrap()]);
    assert_eq!(code(&c), 0);
    let out = skew(&["verify", loop_path.to_str().unwrap(), "--budget", "1"]);
    assert_eq!(code(&out), 1);
    assert_eq!(report(&out).results["certificate"]["status"], "Inconclusive");
}

#[test]
fn environment_overrides_flags() {
    let out = Command::new(env!("CARGO_BIN_EXE_skew"))
        .args(["verify", &data("planar_circle.json")])
        .env("SKEWLOOP_BUDGET", "1234")
        .env("SKEWLOOP_TOL", "1e-9")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let rep = report(&out);
    assert_eq!(rep.config.box_budget, 1234);
    assert_eq!(rep.config.refute_tol, 1e-9);
    let bad = Command::new(env!("CARGO_BIN_EXE_skew"))
        .args(["verify", &data("planar_circle.json")])
        .env("SKEWLOOP_TOL", "0")
        .output()
        .unwrap();
    assert_eq!(code(&bad), 2);
}

#[test]
fn same_seed_gives_identical_reports() {
    let dir = tempdir();
    let loop_path = dir.join("loop.json");
    skew(&["construct", "--support", &data("asym3.json"), "--out", loop_path.to_str().unwrap()]);
    let args = ["verify", loop_path.to_str().unwrap(), "--stability-trials", "8", "--seed", "42"];
    let a = report(&skew(&args)).without_timings();
    let b = report(&skew(&args)).without_timings();
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.results["stability"]["trials"], 8);

    // the worker count is echoed in the config but must not change results
    let mut with_workers = args.to_vec();
    with_workers.extend(["--workers", "2"]);
    let c = report(&skew(&with_workers));
    assert_eq!(a.results, c.results);
}

#[test]
fn report_round_trips() {
    let out = skew(&["oval", "analyze", &data("asym3.json")]);
    let text = String::from_utf8_lossy(&out.stdout).into_owned();
    let rep = Report::from_json(&text).unwrap();
    assert_eq!(rep.to_json().trim(), text.trim());
    assert_eq!(Report::from_json(&rep.to_json()).unwrap(), rep);
}

#[test]
fn oval_analysis_of_asym3() {
    let out = skew(&["oval", "analyze", &data("asym3.json")]);
    assert_eq!(code(&out), 0);
    let r = report(&out).results;
    assert_eq!(r["symmetry"]["symmetric"], false);
    // v = 1 - 0.4 cos 3t ranges over [0.6, 1.4]
    let kmax = r["curvature"]["curvature_max"].as_array().unwrap();
    assert!(kmax[0].as_f64().unwrap() <= 1.0 / 0.6 + 1e-9 && kmax[1].as_f64().unwrap() >= 1.0 / 0.6 - 1e-9);
    assert!((r["perimeter"].as_f64().unwrap() - std::f64::consts::TAU).abs() < 1e-12);
    let sym = report(&skew(&["oval", "analyze", &data("symmetric_oval.json")])).results;
    assert_eq!(sym["symmetry"]["symmetric"], true);
}

#[test]
fn export_tables_and_plots() {
    let out = skew(&["export", &data("fig8_cylinder.json"), "--format", "csv", "--samples", "64"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x,y,z,dx,dy,dz,tx,ty,tz"));
    assert_eq!(lines.count(), 64);

    let dir = tempdir();
    let svg_path = dir.join("plot.svg");
    let out = skew(&["export", &data("asym3.json"), "--format", "svg", "--out", svg_path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert!(svg.contains("antipodal image"));
    assert_eq!(report(&out).results["format"], "svg");
    assert_eq!(code(&skew(&["export", &data("asym3.json"), "--format", "json"])), 2);
}

#[test]
fn quadric_section_findings_exit_0() {
    let tangent = quadric(&["section", "--surface", "sphere", "--plane", "0", "0", "1", "1"]);
    assert_eq!(code(&tangent), 0);
    assert_eq!(report(&tangent).results["section"]["kind"], "tangent_plane");
    let empty = quadric(&["section", "--surface", "sphere", "--plane", "0", "0", "1", "-2"]);
    assert_eq!(report(&empty).results["section"]["kind"], "empty");
    let ell = quadric(&["section", "--surface", "ellipsoid", "3", "2", "1", "--plane", "1", "-1", "2", "0.4"]);
    assert_eq!(code(&ell), 0);
    let r = report(&ell).results;
    assert_eq!(r["section"]["kind"], "ellipse");
    assert!(r["section"]["symmetry"]["asymmetry"].as_f64().unwrap() < 1e-10);
}

#[test]
fn quadric_demo_checks() {
    let sphere = data("sphere_latitude.json");
    let get = |args: &[&str]| {
        let out = quadric(args);
        assert_eq!(code(&out), 0, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        report(&out).results["result"].clone()
    };
    let r = get(&["demo", "--surface", "sphere", "--loop", &sphere, "--check", "noperiod"]);
    assert!(r["report"]["residual_mod_2pi"].as_f64().unwrap() < 1e-8);
    let r = get(&["demo", "--surface", "sphere", "--loop", &sphere, "--check", "bisection"]);
    assert!(r["report"]["defect"].as_f64().unwrap() < 1e-4);
    let r = get(&["demo", "--surface", "sphere", "--loop", &sphere, "--check", "homotopy"]);
    assert_eq!(r["regular"], true);
    let r = get(&["demo", "--surface", "sphere", "--loop", &sphere, "--check", "witness"]);
    assert_eq!(r["found"], true);
    let r = get(&["demo", "--surface", "sigma", "--loop", &data("sigma_latitude.json"), "--check", "noperiod"]);
    let v: &Value = &r["report"]["residual"];
    assert!(v.as_f64().unwrap() < 1e-6);
    // the bisection check needs a spherical loop
    let wrong = quadric(&["demo", "--surface", "sigma", "--loop", &data("sigma_latitude.json"), "--check", "bisection"]);
    assert_eq!(code(&wrong), 2);
}

/// The commands listed in the README, each of which must exit 0.
#[test]
fn bundled_examples_exit_0() {
    let dir = tempdir();
    let loop_path = dir.join("asym3_loop.json");
    let lp = loop_path.to_str().unwrap();
    let skew_runs: Vec<Vec<String>> = vec![
        vec!["oval".into(), "analyze".into(), data("unit_circle.json")],
        vec!["oval".into(), "analyze".into(), data("asym3.json")],
        vec!["oval".into(), "analyze".into(), data("symmetric_oval.json")],
        vec!["construct".into(), "--support".into(), data("asym3.json"), "--out".into(), lp.into()],
        vec!["verify".into(), lp.into()],
        vec!["verify".into(), data("planar_circle.json")],
        vec!["verify".into(), data("ellipse.json")],
        vec!["verify".into(), data("fig8_cylinder.json")],
        vec!["export".into(), data("fig8_cylinder.json"), "--format".into(), "svg".into()],
    ];
    for args in &skew_runs {
        let a: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = skew(&a);
        assert_eq!(code(&out), 0, "skew {a:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let quadric_runs = [
        vec!["demo", "--surface", "sphere", "--loop", "SPHERE", "--check", "noperiod"],
        vec!["demo", "--surface", "sigma", "--loop", "SIGMA", "--check", "noperiod"],
        vec!["demo", "--surface", "sigma", "--loop", "SIGMA", "--check", "witness"],
        vec!["section", "--surface", "ellipsoid", "3", "2", "1", "--plane", "1", "1", "1", "0.5"],
    ];
    let (sphere, sigma) = (data("sphere_latitude.json"), data("sigma_latitude.json"));
    for args in &quadric_runs {
        let a: Vec<&str> = args
            .iter()
            .map(|s| match *s {
                "SPHERE" => sphere.as_str(),
                "SIGMA" => sigma.as_str(),
                s => s,
            })
            .collect();
        let out = quadric(&a);
        assert_eq!(code(&out), 0, "quadric {a:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let fig8 = report(&skew(&["verify", &data("fig8_cylinder.json")]));
    assert_eq!(fig8.results["certificate"]["status"], "UncertifiedSkew");
    assert_eq!(fig8.results["certificate"]["certified"], false);
}
