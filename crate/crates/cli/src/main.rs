use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;

use config::{FileConfig, Settings, WindowOverrides};

/// Referee for the chaotic-system forecasting benchmark.
#[derive(Debug, Parser)]
#[command(name = "ctf", version)]
struct Cli {
    /// Print machine-readable JSON instead of tables
    #[arg(long, global = true)]
    json: bool,

    /// TOML file with data_root, store, seed and [windows]
    #[arg(long, global = true, env = "CTF_CONFIG")]
    config: Option<PathBuf>,

    /// Base directory for relative pack, submission and output paths
    #[arg(long, global = true, env = "CTF_DATA_ROOT")]
    data_root: Option<PathBuf>,

    /// Leaderboard store file
    #[arg(long, global = true, env = "CTF_STORE")]
    store: Option<PathBuf>,

    /// More log output (repeatable)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(flatten)]
    windows: WindowOverrides,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate a system and write its train/test pack
    Generate(commands::GenerateArgs),
    /// Write a zeros or average baseline submission for a pack
    Baseline(commands::BaselineArgs),
    /// Score one or more submission runs against a pack
    Score(commands::ScoreArgs),
    /// Add scorecards to, or show, the leaderboard
    Leaderboard {
        #[command(subcommand)]
        action: commands::LeaderboardAction,
    },
    /// Render charts and tables from the leaderboard
    Report(commands::ReportArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    let settings = FileConfig::load(cli.config.as_deref())
        .and_then(|file| Settings::resolve(file, cli.data_root, cli.store, cli.windows));
    let settings = match settings {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let ctx = commands::Context { settings, json: cli.json };
    let outcome = match cli.command {
        Command::Generate(a) => commands::generate(&ctx, a),
        Command::Baseline(a) => commands::baseline(&ctx, a),
        Command::Score(a) => commands::score(&ctx, a),
        Command::Leaderboard { action } => commands::leaderboard(&ctx, action),
        Command::Report(a) => commands::report(&ctx, a),
    };
    match outcome {
        Ok(commands::Status::Clean) => ExitCode::SUCCESS,
        Ok(commands::Status::Violations) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
