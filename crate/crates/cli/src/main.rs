//! `wulff`: anisotropic surface geometry reports from JSON specs.
//!
//! Exit codes: 0 success, 1 a check failed, 2 bad input.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod input;
mod output;

#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    pub fn check(message: impl Into<String>) -> Self {
        CliError {
            code: 1,
            message: message.into(),
        }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        Self::check(message)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResArg(pub usize, pub Option<usize>);

fn parse_res(text: &str) -> Result<ResArg, String> {
    input::parse_resolution(text).map(|(n, m)| ResArg(n, m))
}

#[derive(Args, Clone, Debug)]
pub struct Common {
    /// Body specification (JSON).
    #[arg(long)]
    pub body: PathBuf,
    /// Resolution `N` or `N,M` (each in [8, 1024]).
    #[arg(long, value_parser = parse_res)]
    pub res: Option<ResArg>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Seed for pseudorandom test fields.
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Multiplier applied to every default tolerance.
    #[arg(long, default_value_t = 1.0)]
    pub tol_scale: f64,
}

#[derive(Args, Clone, Debug)]
pub struct WithSurface {
    #[command(flatten)]
    pub common: Common,
    /// Surface specification (JSON).
    #[arg(long)]
    pub surface: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a body and export its Wulff shape as a point cloud.
    BodyInfo(Common),
    /// Frame statistics, functionals and a per-node frame dump.
    SurfaceReport(WithSurface),
    /// Areas, volumes, mixed volume and the isoperimetric ratio.
    Functionals(WithSurface),
    /// Compare analytic variations against finite differences.
    VariationCheck {
        #[command(flatten)]
        args: WithSurface,
        /// Variation experiment (JSON).
        #[arg(long)]
        variation: PathBuf,
    },
    /// Run every identity check on a body/surface pair.
    IdentitySuite(WithSurface),
    /// Spectrum of the second variation on mean-zero fields.
    Stability {
        #[command(flatten)]
        args: WithSurface,
        /// Number of basis functions.
        #[arg(long, default_value_t = 25)]
        basis: usize,
    },
}

#[derive(Parser, Debug)]
#[command(name = "wulff", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::BodyInfo(c) => commands::body_info(&c),
        Command::SurfaceReport(a) => commands::surface_report(&a),
        Command::Functionals(a) => commands::functionals(&a),
        Command::VariationCheck { args, variation } => commands::variation_check(&args, &variation),
        Command::IdentitySuite(a) => commands::identity_suite(&a),
        Command::Stability { args, basis } => commands::stability(&args, basis),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
