//! `factir`: the factuality/objectivity reranking pipeline.

mod commands;
mod config;
mod error;
mod workspace;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::Loaded;
use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "factir", version, about = "Factuality and objectivity signals for ad hoc retrieval")]
struct Cli {
    /// Pipeline configuration file.
    #[arg(short, long, global = true, default_value = "factir.toml")]
    config: PathBuf,

    /// Override a config value, e.g. `--set retrieval.mu=1000`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Upper bound on worker threads.
    #[arg(short, long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Parse the TREC-text corpus into the document store.
    Ingest,
    /// Train the part-of-speech tagger on the gold corpus.
    TrainTagger,
    /// Extract relational facts and factual density for every document.
    ExtractFacts,
    /// Train the factuality classifier on the labeled documents.
    TrainFactuality,
    /// Bootstrap subjective nouns from the seed list.
    Bootstrap,
    /// Merge annotated bootstrap candidates into the lexicon.
    AnnotateMerge,
    /// Learn extraction patterns and train the objectivity classifier.
    TrainObjectivity,
    /// Compute p(factuality) and p(objectivity) for every document.
    Score,
    /// Build the inverted index.
    Index,
    /// Retrieve the baseline run with Dirichlet-smoothed query likelihood.
    Search,
    /// Keep the top documents of the baseline run.
    Truncate,
    /// Rerank the baseline with fixed parameters.
    Rerank,
    /// Evaluate the baseline and every reranked run.
    Evaluate,
    /// Cross-validated parameter sweep of the reranking methods.
    Sweep,
    /// Binned signal, relevance and spam analysis.
    Analyze,
}

fn dispatch(command: Command, ctx: &Loaded) -> Result<()> {
    commands::check_paths(ctx)?;
    match command {
        Command::Ingest => commands::ingest(ctx),
        Command::TrainTagger => commands::train_tagger_cmd(ctx),
        Command::ExtractFacts => commands::extract_facts(ctx),
        Command::TrainFactuality => commands::train_factuality(ctx),
        Command::Bootstrap => commands::bootstrap_cmd(ctx),
        Command::AnnotateMerge => commands::annotate_merge(ctx),
        Command::TrainObjectivity => commands::train_objectivity(ctx),
        Command::Score => commands::score(ctx),
        Command::Index => commands::index(ctx),
        Command::Search => commands::search_cmd(ctx),
        Command::Truncate => commands::truncate(ctx),
        Command::Rerank => commands::rerank_cmd(ctx),
        Command::Evaluate => commands::evaluate(ctx),
        Command::Sweep => commands::sweep(ctx),
        Command::Analyze => commands::analyze_cmd(ctx),
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot size the thread pool: {e}")))?;
    }
    let ctx = Loaded::load(&cli.config, &cli.set)?;
    dispatch(cli.command, &ctx)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
