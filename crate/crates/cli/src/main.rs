use std::path::PathBuf;
use std::process::ExitCode;

use barnorm::relaxation::AveragingRule;
use barnorm_cli::csv::emit_csv;
use barnorm_cli::svg::{emit_svg, figure};
use barnorm_cli::{dispatch, load_problem, Algorithm, CliError, Report};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "barnorm", version, about = "Joint spectral radius, Barabanov norms and invariant bodies of 2x2 matrix sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Gamma {
    Arith,
    Geom,
    Harm,
}

impl From<Gamma> for AveragingRule {
    fn from(g: Gamma) -> Self {
        match g {
            Gamma::Arith => AveragingRule::Arithmetic,
            Gamma::Geom => AveragingRule::Geometric,
            Gamma::Harm => AveragingRule::Harmonic,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run an algorithm on a problem file.
    Compute {
        /// Problem file (JSON).
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        algorithm: Option<Algorithm>,
        /// Averaging rule for the relaxation steps.
        #[arg(long, value_enum)]
        gamma: Option<Gamma>,
        /// Relative bracket width at which iterations stop.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
        /// Product length for the brute-force and extremal-norm modes.
        #[arg(long)]
        order: Option<usize>,
        /// Known spectral radius for the seeded modes.
        #[arg(long)]
        rho: Option<f64>,
        /// Write the bound trace as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Write a drawing of the computed bodies.
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Write the full report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

fn compute(cmd: Command) -> Result<Report, CliError> {
    let Command::Compute { input, algorithm, gamma, tol, max_iter, order, rho, csv, svg, json } = cmd;
    let mut p = load_problem(&input)?;
    if let Some(a) = algorithm {
        p.algorithm = a;
    }
    if let Some(g) = gamma {
        p.gamma = g.into();
    }
    if let Some(t) = tol {
        p.tol = t;
    }
    if let Some(m) = max_iter {
        p.max_iter = m;
    }
    if let Some(n) = order {
        p.n = n;
    }
    if rho.is_some() {
        p.rho = rho;
    }
    let report = dispatch(&p)?;
    if let Some(path) = json {
        std::fs::write(&path, report.to_json() + "\n").map_err(|source| CliError::Output { path, source })?;
    }
    if let Some(path) = csv {
        match &report.trace {
            Some(t) => emit_csv(t, &path)?,
            None => eprintln!("note: algorithm {} produces no bound trace; {} not written", report.algorithm, path.display()),
        }
    }
    if let Some(path) = svg {
        if report.body.is_some() {
            emit_svg(&figure(&report, &p.set()?)?, &path)?;
        } else {
            eprintln!("note: algorithm {} produces no body; {} not written", report.algorithm, path.display());
        }
    }
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match compute(cli.command) {
        Ok(report) => {
            println!("{}", report.summary());
            ExitCode::from(report.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
