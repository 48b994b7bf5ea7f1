//! Flags shared by both binaries and the resolved run configuration.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Svg,
}

/// Flags accepted by every subcommand. Each can also be set through the
/// matching `SKEWLOOP_*` environment variable.
#[derive(Args, Debug, Clone, Default)]
pub struct CommonArgs {
    /// Primary tolerance of the command: refutation threshold for
    /// verification, quadrature tolerance for quadric checks, symmetry
    /// tolerance for oval analysis.
    #[arg(long, global = true, env = "SKEWLOOP_TOL")]
    pub tol: Option<f64>,
    /// Box budget for branch and bound.
    #[arg(long, global = true, env = "SKEWLOOP_BUDGET")]
    pub budget: Option<u64>,
    /// Seed for randomized checks.
    #[arg(long, global = true, env = "SKEWLOOP_SEED")]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "SKEWLOOP_WORKERS")]
    pub workers: Option<usize>,
    /// Output path (the loop for `construct`, the file for `export`, the
    /// report otherwise).
    #[arg(long, global = true, env = "SKEWLOOP_OUT")]
    pub out: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, value_enum, env = "SKEWLOOP_FORMAT")]
    pub format: Option<Format>,
}

/// Everything a run depends on, echoed into its report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub refute_tol: f64,
    pub polish_tol: f64,
    pub quadrature_tol: f64,
    pub symmetry_tol: f64,
    pub box_budget: u64,
    pub projection_degree_cap: usize,
    pub workers: Option<usize>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            refute_tol: 1e-10,
            polish_tol: 1e-12,
            quadrature_tol: 1e-10,
            symmetry_tol: 1e-12,
            box_budget: 1_000_000,
            projection_degree_cap: 512,
            workers: None,
            seed: 0,
            out: None,
            format: Format::Json,
        }
    }
}

/// Which tolerance `--tol` stands for in a given command.
#[derive(Debug, Clone, Copy)]
pub enum PrimaryTol {
    Refute,
    Quadrature,
    Symmetry,
}

impl RunConfig {
    pub fn resolve(args: &CommonArgs, primary: PrimaryTol) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(t) = args.tol {
            match primary {
                PrimaryTol::Refute => cfg.refute_tol = t,
                PrimaryTol::Quadrature => cfg.quadrature_tol = t,
                PrimaryTol::Symmetry => cfg.symmetry_tol = t,
            }
        }
        if let Some(b) = args.budget {
            cfg.box_budget = b;
        }
        cfg.seed = args.seed.unwrap_or(0);
        cfg.workers = args.workers;
        cfg.out = args.out.clone();
        if let Some(f) = args.format {
            cfg.format = f;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        for (name, v) in [
            ("refute tolerance", self.refute_tol),
            ("polish tolerance", self.polish_tol),
            ("quadrature tolerance", self.quadrature_tol),
            ("symmetry tolerance", self.symmetry_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Input(format!("{name} must be positive, got {v}")));
            }
        }
        if self.box_budget == 0 {
            return Err(CliError::Input("budget must be positive".into()));
        }
        if self.workers == Some(0) {
            return Err(CliError::Input("worker count must be positive".into()));
        }
        Ok(())
    }

    pub fn verify_options(&self) -> skewloop_core::VerifyOptions {
        skewloop_core::VerifyOptions {
            refute_tol: self.refute_tol,
            polish_tol: self.polish_tol.min(self.refute_tol),
            budget: self.box_budget,
            workers: self.workers,
            ..Default::default()
        }
    }
}
