//! `pencil`: command-line front end.
//!
//! Exit codes: 0 success, 1 invalid input, 2 numerical failure, 3 I/O.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pencil_core::formats::{self, GridSpec};
use pencil_core::inverse::{self, FitOptions, ParameterFamily};
use pencil_core::spectral::{self, SpectralOptions};
use pencil_core::weyl;
use pencil_core::{PencilError, PencilProblem, Result, StepControl};

mod selfcheck;

#[derive(Parser)]
#[command(name = "pencil", version, about = "Spectral solver for Sturm–Liouville pencils with jump conditions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ProblemArgs {
    /// Problem JSON file.
    #[arg(long)]
    problem: PathBuf,
    /// Accept identity jumps and α = 1 or β = 1.
    #[arg(long)]
    allow_identity: bool,
}

impl ProblemArgs {
    fn load(&self) -> Result<PencilProblem> {
        formats::read_problem_file(&self.problem, self.allow_identity)
    }
}

#[derive(Args)]
struct OutArgs {
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn positive(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("`{s}` is not a positive number")),
    }
}

fn grid(s: &str) -> std::result::Result<GridSpec, String> {
    formats::parse_grid(s).map_err(|e| e.to_string())
}

#[derive(Subcommand)]
enum Command {
    /// Check a problem file and report every violated constraint.
    Validate {
        #[command(flatten)]
        problem: ProblemArgs,
    },
    /// Tabulate Δ and its leading-order model on a λ grid.
    DetScan {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        out: OutArgs,
        /// `re0:re1:n[,im]`
        #[arg(long, value_parser = grid)]
        grid: GridSpec,
        #[arg(long, value_parser = positive, default_value = "1e-11")]
        tol: f64,
    },
    /// Eigenvalues with real part in [0, lambda-max] and their normalizing data.
    Eig {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        out: OutArgs,
        #[arg(long, value_parser = positive)]
        lambda_max: f64,
        #[arg(long, value_parser = positive, default_value = "1e-11")]
        tol: f64,
    },
    /// Table of λₙ against the leading-order roots for n = 0..=N.
    Asymptotics {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        out: OutArgs,
        /// Highest index, at least 5.
        n: usize,
        #[arg(long, value_parser = positive, default_value = "1e-11")]
        tol: f64,
    },
    /// Sample the Weyl function on a grid, skipping points near eigenvalues.
    WeylSample {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        out: OutArgs,
        #[arg(long, value_parser = grid, default_value = "0.5:8:16,0.2")]
        grid: GridSpec,
        /// Exclusion radius around eigenvalues.
        #[arg(long, value_parser = positive, default_value_t = weyl::DEFAULT_EXCLUSION_RADIUS)]
        radius: f64,
        #[arg(long, value_parser = positive, default_value = "1e-11")]
        tol: f64,
    },
    /// Fit a parameter family to Weyl samples. The problem file is the base.
    Invert {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        out: OutArgs,
        /// Family JSON: `{"names": [...], "bounds": [[lo, hi], ...]}`.
        #[arg(long)]
        family: PathBuf,
        /// Target samples in weyl-sample CSV format.
        #[arg(long)]
        target: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_parser = positive, default_value = "1e-11")]
        tol: f64,
    },
    /// Run the built-in consistency suite and print a PASS/FAIL table.
    Selfcheck,
}

fn emit(out: &OutArgs, bytes: &[u8]) -> Result<()> {
    match &out.out {
        Some(path) => fs::write(path, bytes)?,
        None => std::io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn read(path: &Path) -> Result<String> {
    Ok(fs::read_to_string(path)?)
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Validate { problem } => {
            problem.load()?;
            println!("valid");
            Ok(ExitCode::SUCCESS)
        }
        Command::DetScan { problem, out, grid, tol } => {
            let p = problem.load()?;
            let rows = spectral::det_scan(&p, &grid.points(), &StepControl::with_tolerance(tol))?;
            let mut buf = Vec::new();
            formats::write_det_scan(&mut buf, &rows)?;
            emit(&out, &buf)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Eig {
            problem,
            out,
            lambda_max,
            tol,
        } => {
            let p = problem.load()?;
            let s = spectral::find_eigenvalues(&p, lambda_max, &SpectralOptions::with_tolerance(tol))?;
            for w in &s.warnings {
                eprintln!("warning: {w}");
            }
            let mut buf = Vec::new();
            formats::write_eigen_records(&mut buf, &s.records)?;
            emit(&out, &buf)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Asymptotics { problem, out, n, tol } => {
            let p = problem.load()?;
            let rows = spectral::asymptotic_table(&p, n, &SpectralOptions::with_tolerance(tol))?;
            let mut buf = Vec::new();
            formats::write_asymptotics(&mut buf, &rows)?;
            emit(&out, &buf)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::WeylSample {
            problem,
            out,
            grid,
            radius,
            tol,
        } => {
            let p = problem.load()?;
            let points = grid.points();
            let reach = points.iter().map(|l| l.re.abs()).fold(0.0, f64::max) + 2.0 * radius + 1.0;
            let eig = spectral::find_eigenvalues(&p, reach, &SpectralOptions::with_tolerance(tol))?;
            let samples = weyl::sample_weyl_grid(&p, &points, &eig.lambdas(), radius, &StepControl::with_tolerance(tol))?;
            let mut buf = Vec::new();
            formats::write_weyl_samples(&mut buf, &samples)?;
            emit(&out, &buf)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Invert {
            problem,
            out,
            family,
            target,
            seed,
            tol,
        } => {
            let base = problem.load()?;
            let spec = formats::parse_family(&read(&family)?)?;
            let family = ParameterFamily::new(spec.names, spec.bounds, base)?;
            let targets = formats::read_weyl_samples(fs::File::open(&target)?)?;
            let opts = FitOptions {
                seed,
                control: StepControl::with_tolerance(tol),
                ..FitOptions::default()
            };
            match inverse::fit(&family, &targets, &opts) {
                Ok(r) => {
                    emit(&out, (formats::fit_result_json(&r) + "\n").as_bytes())?;
                    Ok(ExitCode::SUCCESS)
                }
                Err(PencilError::NoConvergence { best }) => {
                    emit(&out, (formats::fit_result_json(&best) + "\n").as_bytes())?;
                    Err(PencilError::NoConvergence { best })
                }
                Err(e) => Err(e),
            }
        }
        Command::Selfcheck => Ok(if selfcheck::run() {
            ExitCode::SUCCESS
        } else {
            ExitCode::from(2)
        }),
    }
}

fn exit_code(e: &PencilError) -> u8 {
    match e {
        PencilError::Io(_) => 3,
        e if e.is_numerical() => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    if let Some(n) = std::env::var("PENCIL_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // ignore the error if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
