//! `dilatekit`: validate scenarios, run dilation constructions and generate examples.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 on input errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dilatekit::generate::{gen_example, GenKind, GenParams};
use dilatekit::linalg::Norm;
use dilatekit::pipeline::{run_pipeline, Command, Overrides};
use dilatekit::scenario::{load_scenario, to_json, NormSpec};

#[derive(Parser)]
#[command(name = "dilatekit", version, about = "Dilations of operator-valued measures and framings")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the group, multiplier, representation, action and covariance axioms.
    Validate(RunArgs),
    /// Build and verify the minimal Banach-space dilation.
    DilateBanach(RunArgs),
    /// Build and verify the Hilbert-space dilation of a positive OVM.
    DilateHilbert(RunArgs),
    /// Build and verify the dilated basis of a framing.
    DilateFraming(RunArgs),
    /// Run every applicable construction.
    All(RunArgs),
    /// Generate an example scenario.
    Gen(GenArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario JSON file.
    file: PathBuf,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Residual tolerance (overrides the scenario).
    #[arg(long)]
    eps: Option<f64>,
    /// Random samples per sampled check (overrides the scenario).
    #[arg(long)]
    samples: Option<usize>,
    /// Largest atom count for exhaustive subset enumeration (overrides the scenario).
    #[arg(long)]
    cap: Option<usize>,
    /// Record wall-clock time in the report.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: GenKind,
    /// Group order.
    #[arg(long)]
    n: usize,
    /// Dimension of X.
    #[arg(long)]
    dim: Option<usize>,
    /// Number of windows (p-frame-cyclic).
    #[arg(long, default_value_t = 1)]
    r: usize,
    /// Norm: l1, l2, linf or an exponent p ≥ 1 (1, 2 and inf select the named norms).
    #[arg(long, default_value = "l2", value_parser = parse_norm)]
    p: Norm,
    /// Number of atoms (spectral-random).
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (stdout when omitted).
    #[arg(short, long)]
    out: Option<PathBuf>,
}

fn parse_norm(s: &str) -> Result<Norm, String> {
    let spec = match s.parse::<f64>() {
        Ok(p) if p == f64::INFINITY => NormSpec::Named("linf".into()),
        Ok(p) if p == 1.0 || p == 2.0 => NormSpec::Named(format!("l{p}")),
        Ok(p) => NormSpec::Lp { lp: p },
        Err(_) => NormSpec::Named(s.to_ascii_lowercase()),
    };
    spec.to_norm().map_err(|e| e.to_string())
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(command: Command, args: RunArgs) -> Result<bool, String> {
    if let Some(eps) = args.eps {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(format!("--eps must be a positive number, got {eps}"));
        }
    }
    let scenario = load_scenario(&args.file).map_err(|e| e.to_string())?;
    let overrides = Overrides { eps: args.eps, samples: args.samples, cap: args.cap, timing: args.timing };
    let report = run_pipeline(&scenario, command, &overrides);
    let text = match args.format {
        Format::Json => report.to_json() + "\n",
        Format::Text => report.to_text(),
    };
    write_output(args.out.as_deref(), &text)?;
    Ok(report.pass)
}

fn generate(args: GenArgs) -> Result<bool, String> {
    let params = GenParams { n: args.n, dim: args.dim, r: args.r, p: args.p, m: args.m };
    let file = gen_example(args.kind, &params, args.seed).map_err(|e| e.to_string())?;
    write_output(args.out.as_deref(), &(to_json(&file) + "\n"))?;
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Cmd::Validate(a) => run(Command::Validate, a),
        Cmd::DilateBanach(a) => run(Command::DilateBanach, a),
        Cmd::DilateHilbert(a) => run(Command::DilateHilbert, a),
        Cmd::DilateFraming(a) => run(Command::DilateFraming, a),
        Cmd::All(a) => run(Command::All, a),
        Cmd::Gen(a) => generate(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
