//! The `quadric` subcommands: invariant checks for loops on quadrics and
//! plane sections.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use skewloop_core::quadric::lorentz::{noperiod_residual, SURFACE_TOL};
use skewloop_core::quadric::sphere::{
    bisection_defect, sphere_connection_residual, sphere_connection_residual_rotated, UnitSpeedLoop,
};
use skewloop_core::quadric::{planar_section, QuadricError, QuadricKind, QuadricModel, Section};
use skewloop_core::verify::find_parallel_pair;
use skewloop_core::{Mat3, SpaceCurve, Vec3};

use crate::config::{CommonArgs, PrimaryTol, RunConfig};
use crate::skew::{load_curve, Emission};
use crate::{run_timed, CliError, Outcome, EXIT_INCONCLUSIVE, EXIT_OK};

#[derive(Parser, Debug)]
#[command(name = "quadric", version, about = "Skew loop obstructions on quadrics")]
pub struct QuadricCli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: QuadricCommand,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Check {
    /// Connection integral over the tantrix.
    Noperiod,
    /// Total geodesic curvature of the tantrix against half the sphere.
    Bisection,
    /// Search for a parallel tangent pair.
    Witness,
    /// Minimum speed along the tantrix homotopy.
    Homotopy,
}

#[derive(Subcommand, Debug)]
pub enum QuadricCommand {
    /// Run one check on a loop lying on a surface.
    Demo {
        /// sphere | sigma | paraboloid | ellipsoid A B C | approx R
        #[arg(long, num_args = 1..=4, required = true)]
        surface: Vec<String>,
        /// Loop file (curve3 or sampled_c1 JSON).
        #[arg(long = "loop")]
        loop_path: PathBuf,
        #[arg(long, value_enum)]
        check: Check,
        /// Number of samples used by the sampled checks.
        #[arg(long, default_value_t = 512, env = "SKEWLOOP_SAMPLES")]
        samples: usize,
    },
    /// Intersect a surface with the plane `n·x = d`.
    Section {
        /// sphere | sigma | paraboloid | ellipsoid A B C | approx R
        #[arg(long, num_args = 1..=4, required = true)]
        surface: Vec<String>,
        /// Plane normal and offset.
        #[arg(long, num_args = 4, value_names = ["NX", "NY", "NZ", "D"], allow_negative_numbers = true)]
        plane: Vec<f64>,
    },
}

pub fn parse_surface(words: &[String]) -> Result<QuadricModel, CliError> {
    let num = |s: &String| {
        s.parse::<f64>()
            .map_err(|_| CliError::Input(format!("expected a number, got {s:?}")))
    };
    let kind = match words {
        [w] if w == "sphere" => QuadricKind::Ellipsoid { a: 1.0, b: 1.0, c: 1.0 },
        [w] if w == "sigma" || w == "hyperboloid" => QuadricKind::HyperboloidTwoSheets,
        [w] if w == "paraboloid" => QuadricKind::EllipticParaboloid,
        [w, a, b, c] if w == "ellipsoid" => QuadricKind::Ellipsoid {
            a: num(a)?,
            b: num(b)?,
            c: num(c)?,
        },
        [w, r] if w == "approx" => QuadricKind::ParaboloidApproxEllipsoid { r: num(r)? },
        _ => {
            return Err(CliError::Input(format!(
                "unknown surface {words:?}; use sphere, sigma, paraboloid, ellipsoid A B C or approx R"
            )))
        }
    };
    QuadricModel::new(kind).map_err(|e| CliError::Input(e.to_string()))
}

fn vec_json(v: &Vec3) -> Value {
    json!([v.x, v.y, v.z])
}

fn mat_json(m: &Mat3) -> Value {
    json!((0..3).map(|i| [m[(i, 0)], m[(i, 1)], m[(i, 2)]]).collect::<Vec<_>>())
}

/// Largest relative implicit-equation residual over `m` samples, or an
/// input error if the loop leaves the surface.
fn check_membership(model: &QuadricModel, curve: &SpaceCurve, m: usize) -> Result<f64, CliError> {
    let period = curve.period();
    let mut worst = 0.0_f64;
    for j in 0..m {
        let x = curve.eval(period * j as f64 / m as f64);
        let scale = 1.0 + x.norm_squared();
        let r = model.residual(&x).abs() / scale;
        worst = worst.max(r);
        if !model.contains(&x, SURFACE_TOL * scale) {
            return Err(CliError::Input(format!(
                "loop leaves the surface at sample {j} (relative residual {r:e})"
            )));
        }
    }
    Ok(worst)
}

/// Ellipsoid loops are carried to the unit sphere by `diag(1/a, 1/b, 1/c)`.
/// The map is linear, so it preserves parallel tangents.
fn to_unit_sphere(kind: QuadricKind, curve: &SpaceCurve) -> Option<(SpaceCurve, Mat3)> {
    match kind {
        QuadricKind::Ellipsoid { a, b, c } => {
            let m = Mat3::from_diagonal(&Vec3::new(1.0 / a, 1.0 / b, 1.0 / c));
            Some((curve.apply_affine(&m, &Vec3::zeros()).0, m))
        }
        _ => None,
    }
}

fn hypothesis_failed(check: &str, e: &QuadricError) -> Outcome {
    Outcome {
        results: json!({ "check": check, "applicable": false, "reason": e.to_string() }),
        exit: EXIT_OK,
    }
}

fn input_err(e: QuadricError) -> CliError {
    CliError::Input(e.to_string())
}

pub fn demo(
    surface: &[String],
    loop_path: &Path,
    check: Check,
    samples: usize,
    cfg: &RunConfig,
) -> Result<Outcome, CliError> {
    if samples < 64 {
        return Err(CliError::Input("at least 64 samples are needed".into()));
    }
    let model = parse_surface(surface)?;
    let curve = load_curve(loop_path)?;
    let residual = check_membership(&model, &curve, samples)?;
    let is_sigma = matches!(model.kind, QuadricKind::HyperboloidTwoSheets);
    let spherical = to_unit_sphere(model.kind, &curve);
    let needs_sphere = |name: &str| {
        CliError::Input(format!("the {name} check applies to loops on a sphere or ellipsoid"))
    };
    let mut results = json!({
        "surface": serde_json::to_value(model.kind).expect("kinds serialize"),
        "surface_residual": residual,
    });
    if let Some((_, m)) = &spherical {
        if m != &Mat3::identity() {
            results["normalized_by"] = mat_json(m);
        }
    }
    let outcome = match check {
        Check::Noperiod if is_sigma => {
            let r = noperiod_residual(curve.as_loop(), cfg.quadrature_tol).map_err(input_err)?;
            json!({
                "check": "noperiod",
                "applicable": true,
                "report": r,
                "vanishes": r.residual <= 1e-6,
                "contradiction": r.contradiction(1e-6),
            })
        }
        Check::Noperiod => {
            let Some((sphere_loop, _)) = &spherical else {
                return Err(CliError::Input(
                    "the noperiod check applies to loops on sigma, a sphere or an ellipsoid".into(),
                ));
            };
            let (r, rotation) = match sphere_connection_residual(sphere_loop.as_loop(), cfg.quadrature_tol) {
                Ok(r) => (r, None),
                Err(QuadricError::PoleCrossing { .. }) => {
                    let (r, m) = sphere_connection_residual_rotated(sphere_loop.as_loop(), cfg.quadrature_tol)
                        .map_err(input_err)?;
                    (r, Some(m))
                }
                Err(e) => return Err(input_err(e)),
            };
            json!({
                "check": "noperiod",
                "applicable": true,
                "report": r,
                "rotation": rotation.as_ref().map(mat_json),
                "vanishes_mod_2pi": r.residual_mod_2pi <= 1e-6,
            })
        }
        Check::Bisection => {
            let Some((sphere_loop, _)) = &spherical else {
                return Err(needs_sphere("bisection"));
            };
            match bisection_defect(sphere_loop.as_loop(), cfg.quadrature_tol) {
                Ok(r) => json!({
                    "check": "bisection",
                    "applicable": true,
                    "report": r,
                    "bisects": r.defect <= 1e-4,
                }),
                Err(e @ (QuadricError::NotEmbedded { .. } | QuadricError::PoleCrossing { .. })) => {
                    return Ok(hypothesis_failed("bisection", &e))
                }
                Err(e) => return Err(input_err(e)),
            }
        }
        Check::Homotopy => {
            let Some((sphere_loop, _)) = &spherical else {
                return Err(needs_sphere("homotopy"));
            };
            let u = UnitSpeedLoop::from_loop(sphere_loop.as_loop(), samples).map_err(input_err)?;
            let min_speed = u.min_speed(samples);
            json!({
                "check": "homotopy",
                "applicable": true,
                "grid": [samples, samples],
                "min_speed": min_speed,
                "regular": min_speed >= 1.0 - 1e-10,
            })
        }
        Check::Witness => {
            let pairs = find_parallel_pair(&curve, samples.min(1024), cfg.refute_tol);
            let found = !pairs.is_empty();
            let out = json!({
                "check": "witness",
                "applicable": true,
                "found": found,
                "witnesses": pairs,
            });
            if !found {
                results["result"] = out;
                return Ok(Outcome {
                    results,
                    exit: EXIT_INCONCLUSIVE,
                });
            }
            out
        }
    };
    results["result"] = outcome;
    Ok(Outcome { results, exit: EXIT_OK })
}

pub fn section(surface: &[String], plane: &[f64], _cfg: &RunConfig) -> Result<Outcome, CliError> {
    let model = parse_surface(surface)?;
    let [nx, ny, nz, d] = plane else {
        return Err(CliError::Input("--plane takes four numbers: nx ny nz d".into()));
    };
    let n = Vec3::new(*nx, *ny, *nz);
    let base = json!({
        "surface": serde_json::to_value(model.kind).expect("kinds serialize"),
        "plane": { "normal": vec_json(&n), "offset": d },
    });
    let mut results = base;
    match planar_section(&model, &n, *d) {
        Ok(Section::Ellipse(e)) => {
            let c = e.origin + e.e1 * e.center[0] + e.e2 * e.center[1];
            results["section"] = json!({
                "kind": "ellipse",
                "plane_origin": vec_json(&e.origin),
                "e1": vec_json(&e.e1),
                "e2": vec_json(&e.e2),
                "center_plane": e.center,
                "center_world": vec_json(&c),
                "support": serde_json::to_value(e.support.h()).expect("polys serialize"),
                "centered_support_sq": serde_json::to_value(&e.centered_support_sq).expect("polys serialize"),
                "symmetry": {
                    "symmetric": e.symmetry.symmetric,
                    "asymmetry": e.symmetry.asymmetry,
                    "v_odd": serde_json::to_value(e.symmetry.v_odd.clone().trimmed()).expect("polys serialize"),
                },
            });
        }
        Ok(Section::Empty) => results["section"] = json!({ "kind": "empty" }),
        Err(QuadricError::TangentPlane) => results["section"] = json!({ "kind": "tangent_plane" }),
        Err(e) => return Err(input_err(e)),
    }
    Ok(Outcome {
        results,
        exit: EXIT_OK,
    })
}

pub fn run(cli: &QuadricCli, argv: Vec<String>) -> Result<Emission, CliError> {
    let cfg = RunConfig::resolve(&cli.common, PrimaryTol::Quadrature)?;
    let (report, exit) = match &cli.command {
        QuadricCommand::Demo {
            surface,
            loop_path,
            check,
            samples,
        } => run_timed(argv, &cfg, || demo(surface, loop_path, *check, *samples, &cfg))?,
        QuadricCommand::Section { surface, plane } => run_timed(argv, &cfg, || section(surface, plane, &cfg))?,
    };
    Ok(Emission {
        report,
        exit,
        report_path: cfg.out.clone(),
        stdout_payload: None,
    })
}
