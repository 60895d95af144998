mod commands;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "amplifier", version, about = "Conjoint thresholds and threshold contagion with artificial agents")]
struct Cli {
    /// Seed for every random step (overrides config files).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// More log output (repeat for debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a balanced-overlap choice design.
    Design(commands::DesignArgs),
    /// Put a design to a chat-completion backend.
    Survey(commands::SurveyArgs),
    /// Simulate choices from a synthetic population.
    SimulateChoices(commands::SimulateArgs),
    /// Fit the hierarchical Bayes model and write point estimates.
    Estimate(commands::EstimateArgs),
    /// Adoption thresholds for every product.
    Thresholds(commands::ThresholdArgs),
    /// Relative attribute importance per respondent.
    Importance(commands::ImportanceArgs),
    /// Pick products spread over the range of mean thresholds.
    SampleProducts(commands::SampleProductsArgs),
    /// Pick networks stratified by size and transitivity.
    NetworkSample(commands::NetworkSampleArgs),
    /// Run the diffusion sweep.
    Sweep(commands::SweepArgs),
    /// Aggregate sweep rows with 95% intervals.
    Summarize(commands::SummarizeArgs),
    /// Write summary and plot-ready CSVs.
    Report(commands::ReportArgs),
}

/// Study given as a preset id (PS, AA) or a JSON file.
#[derive(Args, Clone)]
pub struct StudyArg {
    #[arg(long)]
    pub study: String,
}

pub fn output_parent(path: &std::path::Path) -> anyhow::Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    Ok(())
}

pub fn default_path(p: Option<PathBuf>, name: &str) -> PathBuf {
    p.unwrap_or_else(|| PathBuf::from(name))
}

fn main() {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "info",
        1 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let seed = cli.seed;
    let result = match cli.command {
        Command::Design(a) => commands::design(a, seed),
        Command::Survey(a) => commands::survey(a, seed),
        Command::SimulateChoices(a) => commands::simulate(a, seed),
        Command::Estimate(a) => commands::estimate(a, seed),
        Command::Thresholds(a) => commands::thresholds(a),
        Command::Importance(a) => commands::importance(a),
        Command::SampleProducts(a) => commands::sample_products(a, seed),
        Command::NetworkSample(a) => commands::network_sample(a, seed),
        Command::Sweep(a) => commands::sweep(a, seed),
        Command::Summarize(a) => commands::summarize(a),
        Command::Report(a) => commands::report(a),
    };
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
