mod cmds;
mod config;
mod output;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "weylkit",
    version,
    about = "Weyl metrics, almost-period scans, and almost periodic selections on sampled paths"
)]
struct Cli {
    /// Worker threads; falls back to WEYLKIT_JOBS, then all cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a sampled path or mask from a JSON spec.
    Gen {
        /// JSON generator spec (schema 1).
        #[arg(long)]
        spec: PathBuf,
        /// Output CSV.
        #[arg(long)]
        out: PathBuf,
    },
    /// Metric and diagnostic reports for sampled paths.
    Analyze(cmds::AnalyzeArgs),
    /// Scan almost periods, intersecting across inputs.
    Periods(cmds::PeriodsArgs),
    /// Build a single-valued selection out of a set or measure path.
    Select(cmds::SelectArgs),
    /// Run a selection and verify it inherits the inputs' almost periods.
    Verify(cmds::VerifyArgs),
    /// Randomized agreement checks against brute-force oracles.
    Oracle(cmds::OracleArgs),
}

fn run(cmd: Command) -> weylkit::Result<bool> {
    match cmd {
        Command::Gen { spec, out } => cmds::gen(&spec, &out).map(|()| true),
        Command::Analyze(args) => cmds::analyze(args).map(|()| true),
        Command::Periods(args) => cmds::periods(args).map(|()| true),
        Command::Select(args) => cmds::select(args).map(|()| true),
        Command::Verify(args) => cmds::verify(args),
        Command::Oracle(args) => cmds::oracle(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let jobs = cli
        .jobs
        .or_else(|| std::env::var("WEYLKIT_JOBS").ok()?.parse().ok());
    if let Some(n) = jobs {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let kind = match &e {
                weylkit::Error::Input(_) => "input",
                weylkit::Error::Capacity(_) => "capacity",
                weylkit::Error::Io(_) => "io",
                weylkit::Error::Format(_) => "format",
            };
            eprintln!(
                "{}",
                serde_json::json!({ "error": { "kind": kind, "message": e.to_string() } })
            );
            ExitCode::from(2)
        }
    }
}
