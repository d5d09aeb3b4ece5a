use std::fs;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::Context;
use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use entrec_cli::commands::{self, EvaluateArgs, IngestArgs, SynthArgs, TrainArgs};
use entrec_cli::serve::{self, AppState};
use entrec_core::kb::KnowledgeBase;

/// Entropy-based collaborative web recommender: turn access logs into a
/// page-view matrix, select trustworthy recommenders over two entropy
/// levels, and serve top-N page recommendations.
#[derive(Parser, Debug)]
#[command(name = "entrec", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a web access log into a pruned page-view matrix
    Ingest(IngestArgs),
    /// Generate a seeded synthetic page-view matrix with a ground-truth sidecar
    Synth(SynthArgs),
    /// Build the recommendation knowledge base from a matrix
    Train(TrainArgs),
    /// Run the offline top-N evaluation, optionally against the baseline
    Evaluate(EvaluateArgs),
    /// Serve online recommendations from a knowledge base
    Serve(ServeArgs),
}

#[derive(clap::Args, Debug)]
struct ServeArgs {
    /// Knowledge-base file (ENTROPY-REC-KB v1)
    #[arg(env = "ENTREC_KB")]
    kb: PathBuf,
    #[arg(long, default_value_t = 8080, env = "ENTREC_PORT")]
    port: u16,
    #[arg(long, default_value = "127.0.0.1", env = "ENTREC_BIND")]
    bind: String,
    /// Similarity threshold for click-stream matching
    #[arg(long, default_value_t = 0.5)]
    match_beta: f64,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(2);
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Ingest(args) => commands::ingest(&args),
        Command::Synth(args) => commands::synth(&args),
        Command::Train(args) => commands::train(&args),
        Command::Evaluate(args) => commands::evaluate(&args),
        Command::Serve(args) => {
            let text = fs::read_to_string(&args.kb)
                .with_context(|| format!("reading {}", args.kb.display()))?;
            let kb = KnowledgeBase::from_tsv(&text)
                .with_context(|| format!("loading knowledge base {}", args.kb.display()))?;
            let state = Arc::new(AppState { kb, match_beta: args.match_beta });
            tokio::runtime::Builder::new_multi_thread()
                .enable_all()
                .build()?
                .block_on(serve::run(state, &args.bind, args.port))
        }
    }
}
