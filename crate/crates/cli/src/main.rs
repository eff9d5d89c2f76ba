//! `rhtool`: JSON in, JSON out.
//!
//! Exit status: 0 on success, 2 when the input fails validation or the
//! computation is refused, 1 on usage errors and malformed input.

mod commands;
mod gen;
mod input;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "rhtool", version, about = "Finite-dimensional Riemann-Hilbert data")]
pub struct Cli {
    /// Relative tolerance for residual checks and rank decisions.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    /// Seed for randomized searches and generators.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = ModeArg::Numeric)]
    pub mode: ModeArg,
    /// Left end of the branch strip `anchor <= Re z < anchor + 1`.
    #[arg(long, global = true, default_value_t = 0.0, allow_negative_numbers = true)]
    pub section: f64,
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Numeric,
    Exact,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check the relations of a model, RH data, finite description or Fuchsian system.
    Validate { input: String },
    /// Local model to RH data.
    Rh { input: String },
    /// RH data to a local model, using the branch strip from --section.
    InvRh { input: String },
    /// Shear a local model.
    Shear {
        input: String,
        #[arg(long, value_enum, default_value_t = Target::Good)]
        target: Target,
        /// Eigenvalue to move, `re,im` (for --target down|up).
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<String>,
    },
    /// Jordan-Hölder factors of a finite description.
    Jh { input: String },
    /// S-equivalence of two finite descriptions, RH data or models.
    SEquiv { a: String, b: String },
    /// Jump graphs, compatibility, weights and slope checks for a filtered model.
    StabilityCheck { input: String },
    /// Monodromy of a Fuchsian system along the standard loop basket.
    Monodromy { input: String },
    /// Glue local models to Fuchsian monodromy.
    Assemble { input: String },
    /// Random instances.
    Gen {
        #[arg(value_enum)]
        kind: GenKind,
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Dimension of F; defaults to n.
        #[arg(long)]
        m: Option<usize>,
        /// Number of punctures.
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        genus: usize,
        /// Fuchsian systems: let the residues have a nonzero sum.
        #[arg(long)]
        open: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Good,
    Down,
    Up,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenKind {
    Model,
    ResonantModel,
    BrokenModel,
    RhData,
    Fd,
    Fuchsian,
    AssembleInput,
    StabilityInput,
}

/// Resolved settings, echoed in every output.
#[derive(Debug, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub tol: f64,
    pub seed: u64,
    pub mode: ModeArg,
    pub section: f64,
    pub inputs: Vec<String>,
    pub out: Option<String>,
}

impl RunConfig {
    fn from_cli(cli: &Cli) -> Self {
        let (command, inputs) = match &cli.command {
            Command::Validate { input } => ("validate", vec![input.clone()]),
            Command::Rh { input } => ("rh", vec![input.clone()]),
            Command::InvRh { input } => ("inv-rh", vec![input.clone()]),
            Command::Shear { input, .. } => ("shear", vec![input.clone()]),
            Command::Jh { input } => ("jh", vec![input.clone()]),
            Command::SEquiv { a, b } => ("s-equiv", vec![a.clone(), b.clone()]),
            Command::StabilityCheck { input } => ("stability-check", vec![input.clone()]),
            Command::Monodromy { input } => ("monodromy", vec![input.clone()]),
            Command::Assemble { input } => ("assemble", vec![input.clone()]),
            Command::Gen { .. } => ("gen", vec![]),
        };
        RunConfig {
            command,
            tol: cli.tol,
            seed: cli.seed,
            mode: cli.mode,
            section: cli.section,
            inputs,
            out: cli.out.as_ref().map(|p| p.display().to_string()),
        }
    }
}

/// How a command ended short of success.
#[derive(Debug)]
pub enum Failure {
    /// Exit 1.
    Usage(String),
    /// Exit 2 with a result document (residuals, status).
    Rejected(Value),
    /// Exit 2 with an error message.
    Domain(String),
}

impl From<rh_core::Error> for Failure {
    fn from(e: rh_core::Error) -> Self {
        use rh_core::Error as E;
        match e {
            E::Shape(_) | E::NonFinite(_) => Failure::Usage(e.to_string()),
            _ => Failure::Domain(e.to_string()),
        }
    }
}

pub type Outcome = Result<Value, Failure>;

fn emit(doc: &Value, out: Option<&PathBuf>) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(doc).expect("serializable");
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let config = RunConfig::from_cli(&cli);
    let outcome = if !(cli.tol > 0.0 && cli.tol.is_finite()) {
        Err(Failure::Usage(format!("--tol must be positive, got {}", cli.tol)))
    } else if !cli.section.is_finite() {
        Err(Failure::Usage("--section must be finite".into()))
    } else {
        commands::run(&cli)
    };
    let (doc, code, to_stdout) = match outcome {
        Ok(result) => (json!({ "config": config, "result": result }), 0, true),
        Err(Failure::Rejected(result)) => (json!({ "config": config, "result": result }), 2, true),
        Err(Failure::Domain(msg)) => (json!({ "config": config, "error": { "kind": "domain", "message": msg } }), 2, false),
        Err(Failure::Usage(msg)) => (json!({ "config": config, "error": { "kind": "usage", "message": msg } }), 1, false),
    };
    if to_stdout {
        if let Err(e) = emit(&doc, cli.out.as_ref()) {
            eprintln!("{}", json!({ "error": { "kind": "io", "message": e.to_string() } }));
            return ExitCode::from(1);
        }
    } else {
        eprintln!("{}", serde_json::to_string_pretty(&doc).expect("serializable"));
    }
    ExitCode::from(code)
}
