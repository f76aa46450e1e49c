use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qh_cli::{eval_policy, qlearn, solve_exact, CliError, ExperimentConfig};

#[derive(Parser)]
#[command(name = "qhrl", version, about = "Quasi-hyperbolic discounting experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact two-stage solve and reference-table comparison.
    SolveExact(CommonArgs),
    /// QH Q-learning over the configured seeds.
    Qlearn(CommonArgs),
    /// Off-policy evaluation of a scenario preset or explicit policies.
    EvalPolicy(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to `output.dir` from the config, then `out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run a single seed instead of the configured list.
    #[arg(long)]
    seed_override: Option<u64>,
}

fn run(cli: Cli) -> Result<String, CliError> {
    let args = match &cli.command {
        Command::SolveExact(a) | Command::Qlearn(a) | Command::EvalPolicy(a) => a,
    };
    let cfg = ExperimentConfig::load(&args.config)?;
    let out = args
        .out
        .clone()
        .or_else(|| cfg.output.dir.as_ref().map(|d| cfg.base_dir.join(d)))
        .unwrap_or_else(|| PathBuf::from("out"));
    Ok(match &cli.command {
        Command::SolveExact(_) => solve_exact(&cfg, &out)?.render(),
        Command::Qlearn(_) => qlearn(&cfg, &out, args.seed_override)?.render(),
        Command::EvalPolicy(_) => eval_policy(&cfg, &out, args.seed_override)?.render(),
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(report) => {
            print!("{report}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let line = serde_json::json!({ "error": e.category(), "message": e.to_string() });
            eprintln!("{line}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
