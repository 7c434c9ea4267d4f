//! `covfit` command line: simulate, fit and beampattern.
//!
//! Exit codes: 0 success, 2 bad input, 3 numerical failure (matrix not
//! positive definite, no convergence), 4 rank too large for the sensor count.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::beamform::{beampattern, SteeringVector};
use crate::error::Error;
use crate::estimator::{fit, order_scan, Criterion};
use crate::io::{
    beampattern_csv, parse_steering_family, read_json, read_matrix, snapshots_csv, to_json,
    FitResultFile, MatrixFile, SceneFile, SteeringEntry,
};
use crate::linalg::{HermitianMatrix, LinalgError};
use crate::simulate::{generate, ula_steering};

pub const SEED_ENV: &str = "COVFIT_SEED";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::RankTooLarge { .. } | Error::EmptyTail => 4,
            Error::Linalg(LinalgError::NotPositiveDefinite { .. })
            | Error::Linalg(LinalgError::NoConvergence { .. })
            | Error::NonPositiveEigenvalue { .. }
            | Error::SingularSampleCovariance { .. }
            | Error::OrderCurveNotMonotone { .. } => 3,
            _ => 2,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "covfit",
    version,
    about = "Structured covariance fitting by minimum cross-entropy"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw snapshots from a scene and write the sample covariance.
    Simulate(SimulateArgs),
    /// Fit a structured covariance model to a covariance file.
    Fit(FitArgs),
    /// Sweep steering vectors over the observed and fitted covariances.
    Beampattern(BeampatternArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    scene: PathBuf,
    #[arg(long)]
    snapshots: usize,
    /// Overrides the scene seed; COVFIT_SEED overrides both.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_cov: PathBuf,
    #[arg(long)]
    out_snapshots: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long)]
    cov: PathBuf,
    /// Noise covariance shape; identity when omitted.
    #[arg(long)]
    noise: Option<PathBuf>,
    #[arg(long)]
    rank: usize,
    #[arg(long, value_parser = parse_criterion)]
    criterion: Criterion,
    #[arg(long)]
    order_scan: bool,
    /// Highest rank in the order scan; N - 1 when omitted.
    #[arg(long)]
    max_rank: Option<usize>,
    /// Snapshot count for the penalized order selection.
    #[arg(long)]
    snapshots_count: Option<usize>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BeampatternArgs {
    #[arg(long)]
    cov: PathBuf,
    /// Fit result written by `covfit fit`.
    #[arg(long)]
    model: PathBuf,
    /// JSON list of {"label", "w0"} steering vectors.
    #[arg(long, conflicts_with = "ula_spacing")]
    steering: Option<PathBuf>,
    /// Uniform line array spacing in wavelengths.
    #[arg(long, requires = "angle_count")]
    ula_spacing: Option<f64>,
    #[arg(long, default_value_t = -90.0, allow_negative_numbers = true)]
    angle_start_deg: f64,
    #[arg(long, default_value_t = 90.0, allow_negative_numbers = true)]
    angle_stop_deg: f64,
    #[arg(long)]
    angle_count: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_criterion(s: &str) -> Result<Criterion, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if !e.use_stderr() {
                print!("{e}");
                return Ok(());
            }
            return Err(CliError::input(e.render().to_string()));
        }
    };
    match cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Beampattern(a) => cmd_beampattern(a),
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| CliError::input(format!("{}: {e}", p.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    if args.snapshots == 0 {
        return Err(CliError::input("snapshots must be ≥ 1"));
    }
    let scene_file: SceneFile = read_json(&args.scene)?;
    let mut scene = scene_file.to_scene()?;
    if let Some(seed) = args.seed {
        scene = scene.with_seed(seed);
    }
    if let Ok(value) = std::env::var(SEED_ENV) {
        let seed = value
            .trim()
            .parse::<u64>()
            .map_err(|_| CliError::input(format!("{SEED_ENV} must be an unsigned integer")))?;
        scene = scene.with_seed(seed);
    }
    let set = generate(&scene, args.snapshots)?;
    write_output(
        Some(&args.out_cov),
        &to_json(&MatrixFile::from_hermitian(set.sample_cov())),
    )?;
    if let Some(path) = &args.out_snapshots {
        write_output(Some(path), &snapshots_csv(&set))?;
    }
    Ok(())
}

fn load_noise(path: Option<&Path>, n: usize) -> Result<HermitianMatrix, CliError> {
    match path {
        Some(p) => {
            let w = read_matrix(p)?;
            if w.dim() != n {
                return Err(CliError::input(format!(
                    "noise covariance is {}x{}, covariance is {n}x{n}",
                    w.dim(),
                    w.dim()
                )));
            }
            Ok(w)
        }
        None => Ok(HermitianMatrix::identity(n, true)),
    }
}

fn cmd_fit(args: FitArgs) -> Result<(), CliError> {
    let r = read_matrix(&args.cov)?;
    let w = load_noise(args.noise.as_deref(), r.dim())?;
    let mut report = fit(&r, &w, args.rank, args.criterion)?;
    if args.order_scan {
        let max_rank = args.max_rank.unwrap_or(r.dim() - 1);
        report.order_curve = Some(order_scan(
            &r,
            &w,
            args.criterion,
            max_rank,
            args.snapshots_count,
        )?);
    }
    write_output(
        args.out.as_deref(),
        &to_json(&FitResultFile::from_report(&report)),
    )
}

fn cmd_beampattern(args: BeampatternArgs) -> Result<(), CliError> {
    let r = read_matrix(&args.cov)?;
    let fit_file: FitResultFile = read_json(&args.model)?;
    let model = fit_file.to_model()?;
    if model.dim() != r.dim() {
        return Err(CliError::input(format!(
            "model has {} sensors, covariance has {}",
            model.dim(),
            r.dim()
        )));
    }
    let family: Vec<SteeringVector> = match (&args.steering, args.ula_spacing) {
        (Some(path), None) => parse_steering_family(&read_json::<Vec<SteeringEntry>>(path)?)?,
        (None, Some(spacing)) => {
            let count = args.angle_count.unwrap_or(0);
            if count == 0 {
                return Err(CliError::input("angle count must be ≥ 1"));
            }
            let span = args.angle_stop_deg - args.angle_start_deg;
            let last = count.saturating_sub(1).max(1) as f64;
            (0..count)
                .map(|i| {
                    let deg = args.angle_start_deg + span * i as f64 / last;
                    let w0 = ula_steering(r.dim(), spacing, deg.to_radians())
                        .w0()
                        .to_vec();
                    SteeringVector::new(w0, format!("{deg}"))
                })
                .collect()
        }
        _ => {
            return Err(CliError::input(
                "give either --steering or --ula-spacing with --angle-count",
            ))
        }
    };
    let observed = beampattern(&r, &family)?;
    let structured = beampattern(model.r_theta(), &family)?;
    write_output(
        args.out.as_deref(),
        &beampattern_csv(&observed, &structured),
    )
}
