//! `finsler`: validation, curvature and identity reports for homogeneous
//! Finsler spaces.

mod commands;

use std::io::{IsTerminal, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::{CliError, Output};

#[derive(Parser, Debug)]
#[command(name = "finsler", version, about = "S-curvature and mean Berwald curvature of homogeneous Finsler spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format.
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,

    /// Write the main report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormArg {
    Bh,
    Ht,
    Both,
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// Model file (JSON).
    #[arg(long)]
    pub model: PathBuf,
    /// Metric family name, or `@path` to a JSON phi file. Defaults to the
    /// model file's `phi`.
    #[arg(long)]
    pub phi: Option<String>,
    /// Dimension `n` in the curvature formulas; defaults to `dim k`.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the algebraic hypotheses of a model and the validity of its metric.
    Validate {
        #[command(flatten)]
        model: ModelArgs,
        /// Grid size for the positivity scan on `|s| <= b`.
        #[arg(long, default_value_t = 1001)]
        grid: usize,
    },
    /// Evaluate S(H, y) on sampled or given directions and classify isotropy.
    Scurv {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 512)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Relative vanishing tolerance.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Direction as comma-separated coordinates; repeatable. Replaces sampling.
        #[arg(long = "y", allow_hyphen_values = true)]
        ys: Vec<String>,
    },
    /// Mean Berwald curvature E_ij at the origin, closed form and numeric.
    Eij {
        #[command(flatten)]
        model: ModelArgs,
        /// Direction in model coordinates; repeatable.
        #[arg(long = "y", required = true, allow_hyphen_values = true)]
        ys: Vec<String>,
        /// Finite-difference step; defaults to 1e-4 |y|.
        #[arg(long)]
        h: Option<f64>,
    },
    /// Q, Q', Q'', Delta, psi and Phi at one (n, b, s).
    Phiquant {
        #[arg(long)]
        phi: String,
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
        #[arg(long, allow_hyphen_values = true)]
        s: f64,
    },
    /// Exact verdicts for the simplified closed-form expressions.
    IdentityCheck,
    /// Volume factor f(b) in dV = f(b) dV_alpha.
    Volume {
        #[arg(long)]
        phi: String,
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = FormArg::Both)]
        form: FormArg,
        /// Initial Gauss-Legendre node count.
        #[arg(long, default_value_t = 64)]
        quad: usize,
    },
}

fn use_color() -> bool {
    std::env::var_os("FINSLER_NO_COLOR").is_none() && std::io::stdout().is_terminal()
}

fn run(cli: Cli) -> Result<Output, CliError> {
    let format = cli.format;
    let color = use_color() && cli.out.is_none();
    match cli.command {
        Command::Validate { model, grid } => commands::validate(&model, grid, format.unwrap_or(Format::Json)),
        Command::Scurv { model, samples, seed, tol, ys } => {
            commands::scurv(&model, samples, seed, tol, &ys, format.unwrap_or(Format::Json))
        }
        Command::Eij { model, ys, h } => commands::eij(&model, &ys, h, format.unwrap_or(Format::Json)),
        Command::Phiquant { phi, n, b, s } => commands::phiquant(&phi, n, b, s, format.unwrap_or(Format::Json)),
        Command::IdentityCheck => commands::identity_check(format, color),
        Command::Volume { phi, b, n, form, quad } => {
            commands::volume(&phi, b, n, form, quad, format.unwrap_or(Format::Json))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out_path = cli.out.clone();
    match run(cli) {
        Ok(output) => {
            if let Some(side) = &output.side {
                eprintln!("{side}");
            }
            let written = match &out_path {
                Some(path) => std::fs::write(path, &output.main),
                None => std::io::stdout().write_all(output.main.as_bytes()),
            };
            if let Err(e) = written {
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(2);
            }
            ExitCode::from(output.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
