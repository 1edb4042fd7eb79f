use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};

use hodge_rsm::hodge::DecompositionMode;
use hodge_rsm_cli::{
    cmd_cover, cmd_decompose, cmd_generate, cmd_report, cmd_solve, cmd_verify, configure_threads, exit_code_for,
    MeshSource, Overrides, RunConfig,
};

#[derive(Parser)]
#[command(name = "hodge-rsm", version, about = "L^r Hodge decompositions on triangulated closed manifolds")]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    #[arg(long, global = true)]
    r: Option<f64>,
    /// Degree to process (repeatable).
    #[arg(long = "degree", global = true)]
    degrees: Vec<usize>,
    #[arg(long, global = true, value_enum)]
    mode: Option<Mode>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true)]
    harmonic_tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Laplacian,
    DDstar,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated test manifold as OFF.
    Generate {
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        resolution: Option<usize>,
        #[arg(long)]
        distortion: Option<f64>,
        /// Output file (default: <output>/<kind>_<resolution>.off).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the admissible covering and partition of unity.
    Cover,
    /// Weighted Poisson and dual Poisson solves on random forms.
    Solve,
    /// Strong and weak Hodge decompositions.
    Decompose,
    /// Inequality checks with measured constants.
    Verify,
    /// Summarize the reports in the output directory.
    Report,
}

fn run(cli: Cli) -> Result<i32> {
    configure_threads()?;
    let overrides = Overrides {
        epsilon: cli.epsilon,
        r: cli.r,
        degrees: cli.degrees,
        mode: cli.mode.map(|m| match m {
            Mode::Laplacian => DecompositionMode::Laplacian,
            Mode::DDstar => DecompositionMode::DDstar,
        }),
        seed: cli.seed,
        output: cli.output,
        harmonic_tol: cli.harmonic_tol,
    };
    let mut cfg = RunConfig::resolve(cli.config.as_deref(), &overrides)?;
    let report = match cli.command {
        Command::Generate { kind, resolution, distortion, out } => {
            if let MeshSource::Generator { kind: k, resolution: n, distortion: d } = &mut cfg.mesh {
                if let Some(x) = kind {
                    *k = x;
                }
                if let Some(x) = resolution {
                    *n = x;
                }
                if let Some(x) = distortion {
                    *d = x;
                }
            }
            let path = cmd_generate(&cfg, out.as_deref())?;
            println!("{}", path.display());
            return Ok(0);
        }
        Command::Report => return cmd_report(&cfg),
        Command::Cover => cmd_cover(&cfg)?,
        Command::Solve => cmd_solve(&cfg)?,
        Command::Decompose => cmd_decompose(&cfg)?,
        Command::Verify => cmd_verify(&cfg)?,
    };
    let path = report.write(&cfg.output)?;
    println!("{} -> {}", report.summary(), path.display());
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e) as u8)
        }
    }
}
