//! The `skew` subcommands: oval analysis, construction, verification, export.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use skewloop_core::bounds::{inf_enclosure, sup_enclosure, Stop, DEFAULT_MAX_GRID};
use skewloop_core::construct::{ConstructError, ConstructOptions};
use skewloop_core::io::{self, Document};
use skewloop_core::oval::{make_support_oval, SupportFunction};
use skewloop_core::verify::{perturbation_stability, VerifyError};
use skewloop_core::{build_cylinder_loop, construct_height, verify_skew, SkewStatus, SpaceCurve, TrigPoly};

use crate::config::{CommonArgs, Format, PrimaryTol, RunConfig};
use crate::export;
use crate::report::{read_text, write_text};
use crate::{run_timed, CliError, Outcome, Report, EXIT_INCONCLUSIVE, EXIT_OK};

#[derive(Parser, Debug)]
#[command(name = "skew", version, about = "Construct and verify skew loops")]
pub struct SkewCli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: SkewCommand,
}

#[derive(Subcommand, Debug)]
pub enum SkewCommand {
    /// Build a skew loop on the cylinder over an asymmetric oval.
    Construct {
        /// Support function of the base oval (trigpoly JSON).
        #[arg(long)]
        support: PathBuf,
        /// Where to write the report (default: stdout).
        #[arg(long)]
        margin_report: Option<PathBuf>,
        /// Largest projection degree tried for the height correction.
        #[arg(long, env = "SKEWLOOP_DEGREE_CAP")]
        degree_cap: Option<usize>,
    },
    /// Certify or refute skewness of a closed curve.
    Verify {
        /// Curve file (curve3 or sampled_c1 JSON).
        path: PathBuf,
        /// Defect below which a polished pair refutes skewness.
        #[arg(long, env = "SKEWLOOP_REFUTE_TOL")]
        refute_tol: Option<f64>,
        /// Where to write the certificate report (default: --out or stdout).
        #[arg(long)]
        report: Option<PathBuf>,
        /// Also measure how many random perturbations stay certified skew.
        #[arg(long, env = "SKEWLOOP_STABILITY_TRIALS")]
        stability_trials: Option<usize>,
        /// C² size of the perturbations (default: margin / (100 Lip)).
        #[arg(long, env = "SKEWLOOP_EPSILON")]
        epsilon: Option<f64>,
    },
    /// Inspect a planar oval given by its support function.
    Oval {
        #[command(subcommand)]
        action: OvalCommand,
    },
    /// Write sampled tables (CSV) or plots (SVG) of a curve or oval.
    Export {
        /// Curve or support-function file.
        path: PathBuf,
        /// Number of samples.
        #[arg(long, default_value_t = 512, env = "SKEWLOOP_SAMPLES")]
        samples: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum OvalCommand {
    /// Convexity certificate, curvature extremes and symmetry analysis.
    Analyze {
        path: PathBuf,
        /// Odd coefficients of v at or below this count as zero.
        #[arg(long, env = "SKEWLOOP_SYMMETRY_TOL")]
        symmetry_tol: Option<f64>,
    },
}

/// What the binary has to write once a command finishes.
pub struct Emission {
    pub report: Report,
    pub exit: u8,
    /// Where the report goes; `None` means stdout.
    pub report_path: Option<PathBuf>,
    /// Extra payload printed to stdout instead of the report (export without `--out`).
    pub stdout_payload: Option<String>,
}

pub fn load_document(path: &Path) -> Result<Document, CliError> {
    let text = read_text(path)?;
    io::parse_document(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_support(path: &Path) -> Result<SupportFunction, CliError> {
    let h = load_document(path)?
        .to_trigpoly()
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    make_support_oval(h).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn load_curve(path: &Path) -> Result<SpaceCurve, CliError> {
    load_document(path)?
        .to_curve()
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("results serialize")
}

pub fn run(cli: &SkewCli, argv: Vec<String>) -> Result<Emission, CliError> {
    match &cli.command {
        SkewCommand::Construct {
            support,
            margin_report,
            degree_cap,
        } => {
            let mut cfg = RunConfig::resolve(&cli.common, PrimaryTol::Refute)?;
            if let Some(cap) = degree_cap {
                cfg.projection_degree_cap = *cap;
            }
            let (report, exit) = run_timed(argv, &cfg, || construct(support, &cfg))?;
            Ok(Emission {
                report,
                exit,
                report_path: margin_report.clone(),
                stdout_payload: None,
            })
        }
        SkewCommand::Verify {
            path,
            refute_tol,
            report,
            stability_trials,
            epsilon,
        } => {
            let mut cfg = RunConfig::resolve(&cli.common, PrimaryTol::Refute)?;
            if let Some(t) = refute_tol {
                cfg.refute_tol = *t;
            }
            cfg.validate()?;
            let (rep, exit) = run_timed(argv, &cfg, || verify(path, &cfg, *stability_trials, *epsilon))?;
            Ok(Emission {
                report: rep,
                exit,
                report_path: report.clone().or_else(|| cfg.out.clone()),
                stdout_payload: None,
            })
        }
        SkewCommand::Oval {
            action: OvalCommand::Analyze { path, symmetry_tol },
        } => {
            let mut cfg = RunConfig::resolve(&cli.common, PrimaryTol::Symmetry)?;
            if let Some(t) = symmetry_tol {
                cfg.symmetry_tol = *t;
            }
            cfg.validate()?;
            let (report, exit) = run_timed(argv, &cfg, || oval_analyze(path, &cfg))?;
            Ok(Emission {
                report,
                exit,
                report_path: cfg.out.clone(),
                stdout_payload: None,
            })
        }
        SkewCommand::Export { path, samples } => {
            let cfg = RunConfig::resolve(&cli.common, PrimaryTol::Refute)?;
            let format = match cli.common.format {
                Some(Format::Json) => {
                    return Err(CliError::Input("export supports --format csv or svg".into()))
                }
                Some(f) => f,
                None => Format::Csv,
            };
            if *samples < 8 {
                return Err(CliError::Input("export needs at least 8 samples".into()));
            }
            let mut payload = None;
            let (report, exit) = run_timed(argv, &cfg, || {
                let doc = load_document(path)?;
                let text = export::render(&doc, format, *samples)?;
                let results = json!({
                    "input_kind": doc.kind(),
                    "format": format,
                    "samples": samples,
                    "bytes": text.len(),
                    "written": cfg.out,
                });
                match &cfg.out {
                    Some(p) => write_text(p, &text)?,
                    None => payload = Some(text),
                }
                Ok(Outcome { results, exit: EXIT_OK })
            })?;
            Ok(Emission {
                report,
                exit,
                report_path: None,
                stdout_payload: payload,
            })
        }
    }
}

/// Enclosures of `min v` and `max v`, and the curvature range they imply.
fn curvature_extremes(v: &TrigPoly) -> Value {
    let tol = 1e-10 * v.abs_bound().max(1.0);
    let (lo, lo_ok) = inf_enclosure(v, Stop::Width(tol), DEFAULT_MAX_GRID);
    let (hi, hi_ok) = sup_enclosure(v, Stop::Width(tol), DEFAULT_MAX_GRID);
    json!({
        "radius_min": lo,
        "radius_max": hi,
        "curvature_max": [1.0 / lo.upper, 1.0 / lo.lower],
        "curvature_min": [1.0 / hi.upper, 1.0 / hi.lower],
        "converged": lo_ok && hi_ok,
    })
}

/// Enclosed area `½∫(h² − h'²)`, exact in the coefficients.
fn enclosed_area(h: &TrigPoly) -> f64 {
    let harmonics: f64 = (1..=h.degree())
        .map(|k| {
            let (a, b) = h.coeff(k);
            (1.0 - (k * k) as f64) * (a * a + b * b)
        })
        .sum();
    PI * h.a0() * h.a0() + 0.5 * PI * harmonics
}

pub fn oval_analyze(path: &Path, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let s = load_support(path)?;
    let sym = s.symmetry(cfg.symmetry_tol);
    let results = json!({
        "h": to_value(s.h()),
        "v": to_value(s.v()),
        "strictly_convex": true,
        "convexity": s.convexity(),
        "curvature": curvature_extremes(s.v()),
        "perimeter": 2.0 * PI * s.h().a0(),
        "area": enclosed_area(s.h()),
        "symmetry": to_value(&sym),
        "admits_skew_cylinder_loop": !sym.symmetric,
    });
    Ok(Outcome { results, exit: EXIT_OK })
}

pub fn construct(support: &Path, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let s = load_support(support)?;
    let opts = ConstructOptions {
        degree_cap: cfg.projection_degree_cap,
        ..Default::default()
    };
    let hf = match construct_height(s.v(), &opts) {
        Ok(hf) => hf,
        Err(e @ ConstructError::ProjectionFailure { .. }) => {
            return Ok(Outcome {
                results: json!({ "constructed": false, "reason": e.to_string() }),
                exit: EXIT_INCONCLUSIVE,
            })
        }
        Err(e) => return Err(CliError::Input(format!("{}: {e}", support.display()))),
    };
    let curve = match build_cylinder_loop(&s, &hf.z) {
        Ok(c) => c,
        Err(e) => {
            return Ok(Outcome {
                results: json!({ "constructed": false, "reason": e.to_string(), "height": to_value(&hf) }),
                exit: EXIT_INCONCLUSIVE,
            })
        }
    };
    let cert = verify_skew(&curve, &cfg.verify_options()).map_err(|e| CliError::Input(e.to_string()))?;
    if let Some(p) = &cfg.out {
        write_text(p, &io::curve_to_json(&curve))?;
    }
    let exit = if cert.status == SkewStatus::CertifiedSkew {
        EXIT_OK
    } else {
        EXIT_INCONCLUSIVE
    };
    let results = json!({
        "constructed": true,
        "tau": hf.tau,
        "projection_degree": hf.projection_degree,
        "margin": hf.margin,
        "margin_function": to_value(&hf.margin_function),
        "mu": to_value(&hf.mu),
        "z": to_value(&hf.z),
        "loop": serde_json::to_value(Document::from_curve(&curve)).expect("documents serialize"),
        "loop_written": cfg.out,
        "certificate": to_value(&cert),
    });
    Ok(Outcome { results, exit })
}

pub fn verify(
    path: &Path,
    cfg: &RunConfig,
    stability_trials: Option<usize>,
    epsilon: Option<f64>,
) -> Result<Outcome, CliError> {
    let curve = load_curve(path)?;
    let opts = cfg.verify_options();
    let cert = match verify_skew(&curve, &opts) {
        Ok(c) => c,
        Err(e @ (VerifyError::NotImmersed(_) | VerifyError::ZeroVelocity { .. })) => {
            return Err(CliError::Input(format!("{}: {e}", path.display())))
        }
        Err(e) => {
            return Ok(Outcome {
                results: json!({ "error": e.to_string() }),
                exit: EXIT_INCONCLUSIVE,
            })
        }
    };
    let mut exit = match cert.status {
        SkewStatus::Inconclusive => EXIT_INCONCLUSIVE,
        _ => EXIT_OK,
    };
    let mut results = json!({ "certificate": to_value(&cert) });
    if let Some(trials) = stability_trials {
        let eps = match (epsilon, cert.margin, cert.constants) {
            (Some(e), _, _) => e,
            (None, Some(m), Some(k)) if k.lip > 0.0 => m / (100.0 * k.lip),
            _ => {
                return Err(CliError::Input(
                    "stability needs --epsilon or a certified margin to derive it from".into(),
                ))
            }
        };
        match perturbation_stability(&curve, eps, trials, cfg.seed, &opts) {
            Ok(r) => results["stability"] = to_value(&r),
            Err(e) => {
                results["stability"] = json!({ "error": e.to_string() });
                exit = exit.max(EXIT_INCONCLUSIVE);
            }
        }
    }
    Ok(Outcome { results, exit })
}
