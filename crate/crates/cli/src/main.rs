mod commands;
mod failure;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lingbias::retrieval::Similarity;

use failure::Failure;
use settings::Settings;

#[derive(Parser)]
#[command(name = "lingbias", version, about = "Language and cultural bias evaluation for multilingual retrieval")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
pub struct GlobalArgs {
    /// TOML job config; flags override its values
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Cutoff depth
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Additive smoothing for observed language shares
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    /// cosine, dot or maxsim
    #[arg(long, global = true, value_parser = parse_similarity)]
    pub scorer: Option<Similarity>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
}

fn parse_similarity(s: &str) -> Result<Similarity, String> {
    s.parse()
}

#[derive(Subcommand)]
enum Command {
    /// Check embedding files, metadata sidecars and the catalog
    Validate(commands::ValidateArgs),
    /// Exact top-k retrieval into a TREC run file
    Retrieve(commands::RetrieveArgs),
    /// Image-to-text evaluation: accuracy, NDCG, LBKL/DLBKL, tier histograms
    EvalI2t(commands::EvalI2tArgs),
    /// Text-to-image forced-choice evaluation (SP score)
    EvalT2i(commands::EvalT2iArgs),
    /// Assemble a triplet manifest from a tagged pool
    Triplets(commands::TripletsArgs),
    /// Generate synthetic inputs
    Synth {
        #[command(subcommand)]
        kind: SynthKind,
    },
    /// Silhouette per label, optionally correlated with per-group SP
    Analyze(commands::AnalyzeArgs),
    /// Collect the CSV reports in a directory into one markdown file
    Report(commands::ReportArgs),
}

#[derive(Subcommand)]
enum SynthKind {
    /// Ranked lists with prescribed language placement
    Lists(commands::SynthListsArgs),
    /// Gaussian embedding world with queries, images and a manifest
    World(commands::SynthWorldArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum LabelKeyArg {
    Language,
    Country,
}

fn run(cli: Cli) -> Result<(), Failure> {
    let settings = Settings::resolve(&cli.global)?;
    if let Some(n) = settings.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Domain(format!("cannot start {n} worker threads: {e}")))?;
    }
    match cli.command {
        Command::Validate(a) => commands::validate(&settings, a),
        Command::Retrieve(a) => commands::retrieve(&settings, a),
        Command::EvalI2t(a) => commands::eval_i2t(&settings, a),
        Command::EvalT2i(a) => commands::eval_t2i(&settings, a),
        Command::Triplets(a) => commands::triplets(&settings, a),
        Command::Synth { kind: SynthKind::Lists(a) } => commands::synth_lists(&settings, a),
        Command::Synth { kind: SynthKind::World(a) } => commands::synth_world(&settings, a),
        Command::Analyze(a) => commands::analyze(&settings, a),
        Command::Report(a) => commands::report(&settings, a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
