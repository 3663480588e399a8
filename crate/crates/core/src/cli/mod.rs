//! Command-line front end.
//!
//! Exit codes: 0 success, 1 verification failed, 2 invalid input,
//! 3 numerical failure during construction, 4 unreadable or malformed files.

pub mod config;
pub mod demo;
pub mod mtx;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::constructor::{construct_problem, ConstructedProblem};
use crate::linalg::CVector;
use crate::verify::{verify_system, SystemUnderTest, VerificationReport};
use config::{ConfigError, JobConfig, ProblemFile, ProblemFiles, ScaffoldMeta, PROBLEM_FORMAT};
use mtx::MtxError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{0}")]
    Input(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Input(_) => 4,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<MtxError> for CliError {
    fn from(e: MtxError) -> Self {
        CliError::Input(e.to_string())
    }
}

fn construction_error(e: crate::Error) -> CliError {
    if e.is_validation() {
        CliError::Validation(e.to_string())
    } else {
        CliError::Numerical(e.to_string())
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

#[derive(Debug, Parser)]
#[command(
    name = "anycurve",
    version,
    about = "Linear systems with prescribed restarted GMRES convergence"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a problem from a JSON job configuration.
    Construct {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides `output_dir` in the config).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        quiet: bool,
    },
    /// Run restarted GMRES on a constructed problem and check every certificate.
    Verify {
        /// Directory written by `construct`.
        dir: PathBuf,
        #[arg(long)]
        tol_curve: Option<f64>,
        #[arg(long)]
        quiet: bool,
    },
    /// Construct and verify one of the canned examples.
    Demo {
        /// superlinear, stagnation, nonconvergent, variable-restart or zerotail
        preset: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        quiet: bool,
    },
}

/// Parses arguments, runs the command, and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = match cli.command {
        Command::Construct {
            config,
            out,
            seed,
            quiet,
        } => cmd_construct(&config, out.as_deref(), seed).map(|(dir, problem)| {
            if !quiet {
                println!(
                    "wrote n = {} problem ({} cycles) to {}",
                    problem.spec.n(),
                    problem.spec.curve.q(),
                    dir.display()
                );
            }
            0
        }),
        Command::Verify {
            dir,
            tol_curve,
            quiet,
        } => cmd_verify(&dir, tol_curve).map(|report| {
            if !quiet {
                print!("{}", summary_table(&report));
            }
            if report.pass {
                0
            } else {
                1
            }
        }),
        Command::Demo {
            preset,
            out,
            seed,
            quiet,
        } => demo::cmd_demo(&preset, out.as_deref(), seed).map(|report| {
            if !quiet {
                println!("preset `{preset}`");
                print!("{}", summary_table(&report));
            }
            if report.pass {
                0
            } else {
                1
            }
        }),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn load_config(path: &Path) -> Result<JobConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    JobConfig::from_json(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

/// Reads a configuration, builds the problem and writes all artifacts.
pub fn cmd_construct(
    config_path: &Path,
    out: Option<&Path>,
    seed: Option<u64>,
) -> Result<(PathBuf, ConstructedProblem), CliError> {
    let mut config = load_config(config_path)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("anycurve-out"));
    let problem = construct_and_write(&config, &dir)?;
    Ok((dir, problem))
}

/// Builds the problem described by `config` and writes it into `dir`.
pub fn construct_and_write(config: &JobConfig, dir: &Path) -> Result<ConstructedProblem, CliError> {
    let spec = config.to_problem_spec()?;
    let problem = construct_problem(&spec).map_err(construction_error)?;
    write_problem(dir, config, &problem)?;
    Ok(problem)
}

pub fn write_problem(
    dir: &Path,
    config: &JobConfig,
    problem: &ConstructedProblem,
) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let files = ProblemFiles::default();
    mtx::write_matrix(&dir.join(&files.matrix), &problem.a)?;
    mtx::write_vector(&dir.join(&files.rhs), &problem.b)?;
    mtx::write_matrix(&dir.join(&files.basis), &problem.assembly.basis)?;
    mtx::write_matrix(
        &dir.join(&files.operator_in_basis),
        &problem.assembly.op_in_basis,
    )?;

    let mut echo = config.clone();
    echo.output_dir = None;
    let meta = ProblemFile {
        format: PROBLEM_FORMAT.into(),
        version: 1,
        config: echo,
        scaffold: ScaffoldMeta::from_problem(problem),
        files,
    };
    write_json(&dir.join("problem.json"), &meta)
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_error(path, e))
}

/// Verifies the problem stored in `dir` and writes `report.json` and
/// `convergence.csv` next to it.
pub fn cmd_verify(dir: &Path, tol_curve: Option<f64>) -> Result<VerificationReport, CliError> {
    let meta_path = dir.join("problem.json");
    let text = fs::read_to_string(&meta_path).map_err(|e| io_error(&meta_path, e))?;
    let meta: ProblemFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("{}: {e}", meta_path.display())))?;
    if meta.format != PROBLEM_FORMAT {
        return Err(CliError::Input(format!(
            "{}: unknown format `{}`",
            meta_path.display(),
            meta.format
        )));
    }
    let spec = meta
        .config
        .to_problem_spec()
        .map_err(|e| CliError::Input(format!("{}: {e}", meta_path.display())))?;
    let n = spec.n();

    let a = mtx::read_matrix(&dir.join(&meta.files.matrix))?;
    let b = mtx::read_vector(&dir.join(&meta.files.rhs))?;
    let basis = mtx::read_matrix(&dir.join(&meta.files.basis))?;
    let op = mtx::read_matrix(&dir.join(&meta.files.operator_in_basis))?;
    for (name, rows, cols) in [
        (&meta.files.matrix, a.rows(), a.cols()),
        (&meta.files.rhs, b.len(), 1),
        (&meta.files.basis, basis.rows(), basis.cols()),
        (&meta.files.operator_in_basis, op.rows(), op.cols()),
    ] {
        let want_cols = if name == &meta.files.rhs { 1 } else { n };
        if rows != n || cols != want_cols {
            return Err(CliError::Input(format!(
                "{name}: size {rows}x{cols} does not match order {n}"
            )));
        }
    }

    let mut tol = meta.config.tolerances();
    if let Some(t) = tol_curve {
        tol.curve = t;
    }
    let x0 = CVector::zeros(n);
    let sys = SystemUnderTest {
        a: &a,
        b: &b,
        x0: &x0,
        basis: &basis,
        op_in_basis: &op,
        curve: &spec.curve,
        schedule: &spec.schedule,
        spectrum: &spec.spectrum,
        variant: &spec.variant,
    };
    let report = verify_system(&sys, &tol);
    write_report(dir, &report)?;
    Ok(report)
}

pub fn write_report(dir: &Path, report: &VerificationReport) -> Result<(), CliError> {
    write_json(&dir.join("report.json"), report)?;
    let csv_path = dir.join("convergence.csv");
    fs::write(&csv_path, convergence_csv(report)).map_err(|e| io_error(&csv_path, e))
}

/// One row per inner step. The last row of each cycle carries the
/// explicitly recomputed residual norm rather than the recurrence value.
pub fn convergence_csv(report: &VerificationReport) -> String {
    let mut out = String::from("cycle,inner_step,residual_norm,prescribed_f,abs_error\n");
    let f = &report.prescribed;
    for c in &report.cycles {
        let steps = c.inner_norms.len();
        for j in 1..=steps {
            let value = if j == steps {
                c.end_norm
            } else {
                c.inner_norms[j - 1]
            };
            let target = if c.cycle <= report.q {
                Some(if j == steps {
                    f[c.cycle]
                } else {
                    f[c.cycle - 1]
                })
            } else {
                None
            };
            match target {
                Some(t) => {
                    let _ = writeln!(
                        out,
                        "{},{},{:e},{:e},{:e}",
                        c.cycle,
                        j,
                        value,
                        t,
                        (value - t).abs()
                    );
                }
                None => {
                    let _ = writeln!(out, "{},{},{:e},,", c.cycle, j, value);
                }
            }
        }
    }
    out
}

/// Human-readable cycle table.
pub fn summary_table(report: &VerificationReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>5} {:>4} {:>14} {:>14} {:>11} {:>9}",
        "cycle", "m", "prescribed", "observed", "abs_error", "ratio"
    );
    let mut prev = report.prescribed[0];
    let _ = writeln!(
        out,
        "{:>5} {:>4} {:>14.6e} {:>14} {:>11} {:>9}",
        0, "-", prev, "-", "-", "-"
    );
    for (k, (&obs, &err)) in report.observed.iter().zip(&report.curve_errors).enumerate() {
        let m = report
            .cycles
            .get(k)
            .map_or("-".to_string(), |c| c.restart.to_string());
        let ratio = if prev > 0.0 {
            format!("{:.4}", obs / prev)
        } else {
            "-".into()
        };
        let _ = writeln!(
            out,
            "{:>5} {:>4} {:>14.6e} {:>14.6e} {:>11.2e} {:>9}",
            k + 1,
            m,
            report.prescribed[k + 1],
            obs,
            err,
            ratio
        );
        prev = obs;
    }
    let t = &report.termination;
    match t.observed {
        Some(r) => {
            let _ = writeln!(
                out,
                "probe cycle {} (m = {}): ||r|| = {:.6e}{}",
                report.q + 1,
                t.probe_restart,
                r,
                if t.expected_exact {
                    " (exact termination expected)"
                } else {
                    ""
                }
            );
        }
        None => {
            let _ = writeln!(out, "probe cycle {}: not run", report.q + 1);
        }
    }
    let _ = writeln!(
        out,
        "similarity residual {:.2e}, max spectrum residual {:.2e}, structure {}, cond(S) {}",
        report.similarity_residual,
        report.max_spectrum_residual(),
        if report.structure_ok { "ok" } else { "BROKEN" },
        report
            .cond_estimate
            .map_or("n/a".to_string(), |c| format!("{c:.3e}"))
    );
    let _ = writeln!(out, "{}", if report.pass { "PASS" } else { "FAIL" });
    out
}
