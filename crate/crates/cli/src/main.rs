//! `polydyn`: runs degree, Siu-coefficient, classification, Green-function
//! and escape-region experiments on JSON map and divisor files.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use output::{Format, GridSpec};

#[derive(Parser)]
#[command(name = "polydyn", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a quadratic automorphism of C^3 and re-verify the claims.
    Classify(ClassifyArgs),
    /// Degree sequence of the iterates and the dynamical degree estimate.
    Degrees(DegreesArgs),
    /// Siu coefficients c_n of a divisor.
    Siu(SiuArgs),
    /// Compare λ^-n log|h_S∘f^n| with deg S·(1 − c_S)·G⁺ on a grid.
    Converge(ConvergeArgs),
    /// Green function G⁺ on a grid.
    GreenGrid(GreenGridArgs),
    /// Sample the escape regions V_R, W_R and test both inclusions.
    VerifyRegions(RegionArgs),
    /// Degree sequences of f and of a random affine conjugate.
    ConjugacyCheck(ConjugacyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DirectionArg {
    Forward,
    Inverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DegreeMethodArg {
    /// Full symbolic iterates.
    Symbolic,
    /// Exact restriction to a seeded generic line.
    Line,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RouteArg {
    /// Pull back the residual one step at a time.
    Iterated,
    /// Compose with the symbolic iterate.
    Direct,
    /// Both, with an agreement column.
    Both,
}

#[derive(Args, Serialize)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub map: PathBuf,
    /// Depth of the degree sequences used to re-verify the claims.
    #[arg(long, default_value_t = 6)]
    pub depth: u32,
}

#[derive(Args, Serialize)]
pub struct DegreesArgs {
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long, value_enum, default_value_t = DirectionArg::Forward)]
    pub direction: DirectionArg,
    #[arg(long = "N", default_value_t = 6)]
    pub n: u32,
    #[arg(long, value_enum, default_value_t = DegreeMethodArg::Symbolic)]
    pub method: DegreeMethodArg,
    /// Seed of the generic line for `--method line`.
    #[arg(long, default_value_t = 0x7e57)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args, Serialize)]
pub struct SiuArgs {
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long)]
    pub divisor: PathBuf,
    #[arg(long = "N", default_value_t = 6)]
    pub n: u32,
    #[arg(long, value_enum, default_value_t = RouteArg::Iterated)]
    pub route: RouteArg,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args, Serialize)]
pub struct GreenOpts {
    #[arg(long, default_value_t = 1e8)]
    pub escape_radius: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iter: u32,
    #[arg(long, default_value_t = 40)]
    pub refine_steps: u32,
}

#[derive(Args, Serialize)]
pub struct ConvergeArgs {
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long)]
    pub divisor: PathBuf,
    /// Last iterate compared.
    #[arg(long, default_value_t = 25)]
    pub n: u32,
    /// Real grid `lo:hi:count` on every coordinate.
    #[arg(long, default_value = "-3:3:5")]
    pub grid: GridSpec,
    /// Imaginary part shared by all grid coordinates.
    #[arg(long, default_value_t = 0.25)]
    pub imag: f64,
    /// `c_S` as `num/den`; computed exactly when omitted.
    #[arg(long)]
    pub c_s: Option<String>,
    /// Horizon for the exact `c_S`.
    #[arg(long, default_value_t = 8)]
    pub c_horizon: u32,
    /// Fraction of worst points dropped from the summary maximum.
    #[arg(long, default_value_t = 0.05)]
    pub trim: f64,
    /// Exit with status 2 when the trimmed maximum at `n` exceeds this.
    #[arg(long)]
    pub tol: Option<f64>,
    #[command(flatten)]
    pub green: GreenOpts,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args, Serialize)]
pub struct GreenGridArgs {
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long, default_value = "-3:3:5")]
    pub grid: GridSpec,
    #[arg(long, default_value_t = 0.0)]
    pub imag: f64,
    #[command(flatten)]
    pub green: GreenOpts,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args, Serialize)]
pub struct RegionArgs {
    /// Coefficients of g = (x² − xz + c + y, a z, b x + c'), given as
    /// Gaussian rationals such as `1/2` or `1+2i`.
    #[arg(long, allow_hyphen_values = true)]
    pub a: String,
    #[arg(long, allow_hyphen_values = true)]
    pub b: String,
    #[arg(long, allow_hyphen_values = true, default_value = "0")]
    pub c: String,
    #[arg(long, allow_hyphen_values = true, default_value = "0")]
    pub cprime: String,
    #[arg(long = "R", default_value_t = 1e4)]
    pub r: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// ε in `W_{(1+ε)R}`; defaults to 0.9·ε_max.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Negative control: replace `2R` by `FACTOR·R` on the right-hand sides.
    #[arg(long)]
    pub widen: Option<u32>,
}

#[derive(Args, Serialize)]
pub struct ConjugacyArgs {
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long = "N", default_value_t = 5)]
    pub n: u32,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Use this automorphism file as the change of coordinates instead of a
    /// random affine one.
    #[arg(long)]
    pub change: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = DegreeMethodArg::Line)]
    pub method: DegreeMethodArg,
}

fn init_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("POLYDYN_THREADS") {
        let n: usize = v.trim().parse().map_err(|e| anyhow::anyhow!("POLYDYN_THREADS='{v}': {e}"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: &Cli) -> anyhow::Result<output::Artifact> {
    init_threads()?;
    match &cli.command {
        Command::Classify(a) => commands::classify(a),
        Command::Degrees(a) => commands::degrees(a),
        Command::Siu(a) => commands::siu(a),
        Command::Converge(a) => commands::converge(a),
        Command::GreenGrid(a) => commands::green_grid(a),
        Command::VerifyRegions(a) => commands::verify_regions(a),
        Command::ConjugacyCheck(a) => commands::conjugacy_check(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let artifact = match run(&cli) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    let written = match &cli.out {
        Some(path) => std::fs::write(path, &artifact.text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{}", artifact.text);
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    if artifact.failed {
        eprintln!("verification failed");
        return ExitCode::from(2);
    }
    ExitCode::SUCCESS
}
