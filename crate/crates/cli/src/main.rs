//! `ccfq`: quantify common cause failures of redundant digital I&C
//! components from a sectioned model file.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ccfq::commands::{self, CliError, DiffArgs, SolveFormat, TreeArgs, TreeMode};
use ccfq::document::Strictness;

#[derive(Parser)]
#[command(name = "ccfq", version, about = "Common cause failure quantification")]
struct Cli {
    /// Downgrade unknown model-file keys from errors to warnings.
    #[arg(long, global = true)]
    lenient: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Derive common cause component groups from coupling attributes.
    Derive { model: PathBuf },
    /// Print per-group beta factors with grades and exact rationals.
    Beta { model: PathBuf },
    /// Solve the failure breakdown table (INDIVIDUAL/.../Total).
    Solve {
        model: PathBuf,
        /// Output format.
        #[arg(long, value_enum, default_value_t = FormatArg::Text)]
        format: FormatArg,
        /// Normalization override: `proportional` or `weights:<file>`.
        #[arg(long)]
        normalize: Option<String>,
    },
    /// Evaluate the model's fault tree.
    Tree {
        model: PathBuf,
        /// Evaluator: exact enumeration, rare-event cut sets, Monte Carlo.
        #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
        mode: ModeArg,
        /// Monte Carlo seed (defaults to the model's options).
        #[arg(long)]
        seed: Option<u64>,
        /// Monte Carlo replications (defaults to the model's options).
        #[arg(long)]
        reps: Option<u64>,
        /// Write minimal cut sets to this file (rare mode).
        #[arg(long)]
        cutsets: Option<PathBuf>,
        /// Normalization override: `proportional` or `weights:<file>`.
        #[arg(long)]
        normalize: Option<String>,
    },
    /// Compare betas and breakdowns of two models.
    Diff {
        model_a: PathBuf,
        model_b: PathBuf,
        /// Relative change that flags a row (fraction, default 5%).
        #[arg(long, default_value_t = 0.05)]
        threshold: f64,
        /// Compare the component-id intersection instead of requiring
        /// identical sets.
        #[arg(long)]
        loose: bool,
    },
    /// Dump the embedded scoring tables for audit.
    Tables,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Rare,
    Mc,
}

fn strictness(lenient: bool) -> Strictness {
    if lenient {
        Strictness::Lenient
    } else {
        Strictness::Strict
    }
}

fn load(path: &PathBuf, lenient: bool) -> Result<ccfq_core::model::SystemModel, CliError> {
    let loaded = commands::load_model(path, strictness(lenient))?;
    for warning in &loaded.warnings {
        eprintln!("warning: {}: line {}: {}", path.display(), warning.line, warning.message);
    }
    Ok(loaded.model)
}

fn load_validated(path: &PathBuf, lenient: bool) -> Result<ccfq_core::model::SystemModel, CliError> {
    let model = load(path, lenient)?;
    for warning in commands::validate(&model)? {
        eprintln!("warning: {warning}");
    }
    Ok(model)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Derive { model } => {
            let loaded = commands::load_model(&model, strictness(cli.lenient))?;
            for warning in &loaded.warnings {
                eprintln!("warning: {}: line {}: {}", model.display(), warning.line, warning.message);
            }
            // A file with explicit groups echoes them; otherwise groups
            // were derived during resolution.
            let text = std::fs::read_to_string(&model)
                .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", model.display())))?;
            let user_specified = text.lines().any(|l| {
                let l = l.split('#').next().unwrap_or("").trim();
                l.starts_with("[cccg ")
            });
            print!("{}", commands::cmd_derive(&loaded.model, user_specified)?);
        }
        Command::Beta { model } => {
            let model = load_validated(&model, cli.lenient)?;
            print!("{}", commands::cmd_beta(&model)?);
        }
        Command::Solve { model, format, normalize } => {
            let mut model = load(&model, cli.lenient)?;
            commands::apply_normalize_flag(&mut model, normalize.as_deref())?;
            for warning in commands::validate(&model)? {
                eprintln!("warning: {warning}");
            }
            let format = match format {
                FormatArg::Text => SolveFormat::Text,
                FormatArg::Csv => SolveFormat::Csv,
            };
            print!("{}", commands::cmd_solve(&model, format)?);
        }
        Command::Tree { model, mode, seed, reps, cutsets, normalize } => {
            let mut model = load(&model, cli.lenient)?;
            commands::apply_normalize_flag(&mut model, normalize.as_deref())?;
            for warning in commands::validate(&model)? {
                eprintln!("warning: {warning}");
            }
            let args = TreeArgs {
                mode: match mode {
                    ModeArg::Exact => TreeMode::Exact,
                    ModeArg::Rare => TreeMode::Rare,
                    ModeArg::Mc => TreeMode::Mc,
                },
                seed,
                replications: reps,
                cutsets,
            };
            print!("{}", commands::cmd_tree(&model, &args)?);
        }
        Command::Diff { model_a, model_b, threshold, loose } => {
            let a = load_validated(&model_a, cli.lenient)?;
            let b = load_validated(&model_b, cli.lenient)?;
            let args = DiffArgs { threshold, loose };
            print!("{}", commands::cmd_diff(&a, &b, &args)?);
        }
        Command::Tables => {
            print!("{}", commands::cmd_tables());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
