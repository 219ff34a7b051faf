//! `ranloop`: run, validate, replay and sweep closed-loop scenarios.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ranloop_core::AgentKind;

#[derive(Parser)]
#[command(name = "ranloop", version, about = "Closed-loop RAN control on a deterministic digital twin")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one episode and export its records.
    Run(RunArgs),
    /// Parse and validate a scenario without running it.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Re-run an episode and compare against an existing export byte for byte.
    Replay(ReplayArgs),
    /// Run several seeds for several agents in parallel.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct EpisodeArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    seed: u64,
    /// Overrides the scenario's agent.
    #[arg(long)]
    agent: Option<AgentKind>,
    /// Overrides the scenario's run length.
    #[arg(long)]
    ttis: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    episode: EpisodeArgs,
    #[arg(long)]
    export: PathBuf,
    /// Write the final episode state here for later resumption.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Continue from a saved episode state instead of starting fresh.
    #[arg(long)]
    resume: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    #[command(flatten)]
    episode: EpisodeArgs,
    #[arg(long)]
    export: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    seeds: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Directory for per-seed exports and `summary.json`.
    #[arg(long)]
    out: PathBuf,
    /// Agents to compare; defaults to `static` plus the scenario's agent.
    #[arg(long, value_delimiter = ',')]
    agents: Vec<AgentKind>,
    #[arg(long, default_value_t = 1)]
    seed_base: u64,
    #[arg(long)]
    ttis: Option<u64>,
}

fn init_logging() {
    let level = std::env::var("RANLOOP_LOG_LEVEL").unwrap_or_else(|_| "error".into());
    let filter = match level.as_str() {
        "error" | "info" | "debug" => level.as_str(),
        other => {
            eprintln!("ignoring RANLOOP_LOG_LEVEL={other}; expected error, info or debug");
            "error"
        }
    };
    env_logger::Builder::new().parse_filters(filter).format_timestamp(None).init();
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    init_logging();
    let result = match cli.command {
        Command::Run(a) => commands::run(&a.episode.into(), &a.export, a.checkpoint.as_deref(), a.resume.as_deref()),
        Command::Validate { scenario } => commands::validate(&scenario),
        Command::Replay(a) => commands::replay(&a.episode.into(), &a.export),
        Command::Sweep(a) => commands::sweep(&commands::SweepPlan {
            scenario: a.scenario,
            seeds: a.seeds,
            workers: a.workers,
            out: a.out,
            agents: a.agents,
            seed_base: a.seed_base,
            ttis: a.ttis,
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

impl From<EpisodeArgs> for commands::EpisodeSpec {
    fn from(a: EpisodeArgs) -> Self {
        Self { scenario: a.scenario, seed: a.seed, agent: a.agent, ttis: a.ttis }
    }
}
