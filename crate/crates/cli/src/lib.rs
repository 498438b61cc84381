//! Batch front end for `medsumm-core`: each subcommand reads input files,
//! runs one kernel and writes a text table plus a JSON report carrying a run
//! manifest.

pub mod commands;
pub mod manifest;
pub mod report;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use medsumm_core::{AmbiguityPolicy, RequireIn};
use serde::Deserialize;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CHECK: i32 = 3;
pub const THREADS_ENV: &str = "MEDSUMM_KIT_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Unreadable, malformed or inconsistent input.
    #[error("input error: {0}")]
    Input(String),
    /// The run completed but a built-in check did not pass.
    #[error("check failed: {0}")]
    Check(String),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Check(_) => EXIT_CHECK,
        }
    }
}

impl From<medsumm_core::Error> for CliError {
    fn from(e: medsumm_core::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "medsumm-kit", version, about = "Curation, evaluation and fusion-model tools for code-mixed medical query summarization")]
pub struct Cli {
    /// Seed for every random choice (split shuffles, model initialization).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// JSON file supplying defaults for options not given on the command line.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for report files.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Render scores as percentages with two decimals.
    #[arg(long, global = true)]
    pub percent: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Deduplicate a corpus, keep records mentioning a taxonomy symptom, optionally add the visual cue.
    Curate(CurateArgs),
    /// Seeded train/validation/test split.
    Split(SplitArgs),
    /// Lexical and embedding metrics of candidate summaries against references.
    EvalAuto(EvalAutoArgs),
    /// Fact-based scores from human annotations, grouped by model.
    EvalFacts(EvalFactsArgs),
    /// Code-mixing index of a corpus's queries.
    Cmi(CmiArgs),
    /// Cohen's kappa between annotators.
    Kappa(KappaArgs),
    /// Train the toy fusion model and verify its gradients.
    FusionDemo(FusionDemoArgs),
}

#[derive(Debug, Args)]
pub struct CurateArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Taxonomy JSON; the bundled default is used when omitted.
    #[arg(long)]
    pub taxonomy: Option<PathBuf>,
    /// query, summary, either or both.
    #[arg(long)]
    pub require_in: Option<RequireIn>,
    /// Append the visual cue sentence to records that have an image and a disorder phrase.
    #[arg(long)]
    pub inject_cue: bool,
    /// Cue template; `{region}` and `{disorder}` are substituted.
    #[arg(long)]
    pub cue_template: Option<String>,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Train, validation and test fractions.
    #[arg(long, value_delimiter = ',')]
    pub ratios: Option<Vec<f64>>,
    /// Split each category separately.
    #[arg(long)]
    pub stratify: bool,
}

#[derive(Debug, Args)]
pub struct EvalAutoArgs {
    /// Line-delimited `{id, text}` candidates.
    #[arg(long)]
    pub candidates: PathBuf,
    /// Corpus whose golden summaries are the references.
    #[arg(long)]
    pub references: PathBuf,
    /// Token embeddings of the candidates, for the BERTScore column.
    #[arg(long, requires = "reference_embeddings")]
    pub candidate_embeddings: Option<PathBuf>,
    #[arg(long, requires = "candidate_embeddings")]
    pub reference_embeddings: Option<PathBuf>,
    /// Score the raw candidate text without sentence deduplication.
    #[arg(long)]
    pub no_postprocess: bool,
}

#[derive(Debug, Args)]
pub struct EvalFactsArgs {
    #[arg(long)]
    pub annotations: PathBuf,
}

#[derive(Debug, Args)]
pub struct CmiArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub lexicon_lang1: Option<PathBuf>,
    #[arg(long)]
    pub lexicon_lang2: Option<PathBuf>,
    /// prefer-lang1, prefer-lang2 or independent.
    #[arg(long)]
    pub ambiguity_policy: Option<AmbiguityPolicy>,
}

#[derive(Debug, Args)]
pub struct KappaArgs {
    /// JSON array of label lists, one per annotator.
    #[arg(long)]
    pub labels: PathBuf,
}

#[derive(Debug, Args)]
pub struct FusionDemoArgs {
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// Toy task fixture (`{vision, prompt, answer}` per line); generated from the seed when omitted.
    #[arg(long)]
    pub fixture: Option<PathBuf>,
    /// Where to save the trained model.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
}

/// Contents of a `--config` file. Command-line values win.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub percent: Option<bool>,
    pub taxonomy: Option<PathBuf>,
    pub require_in: Option<RequireIn>,
    pub cue_template: Option<String>,
    pub ratios: Option<[f64; 3]>,
    pub stratify: Option<bool>,
    pub lexicon_lang1: Option<PathBuf>,
    pub lexicon_lang2: Option<PathBuf>,
    pub ambiguity_policy: Option<AmbiguityPolicy>,
    pub steps: Option<usize>,
    pub learning_rate: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
    }
}

pub const DEFAULT_SEED: u64 = 0;

/// Caps the worker pool at `MEDSUMM_KIT_THREADS` when set.
pub fn init_thread_pool() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::input(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    // a pool may already exist when called twice in one process; the first setting stands
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Runs one parsed invocation, writes its reports under `--out` and returns them.
pub fn run(cli: Cli) -> Result<commands::Outcome, CliError> {
    init_thread_pool()?;
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let ctx = commands::Context {
        seed: cli.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        percent: cli.percent || file.percent.unwrap_or(false),
        out: cli.out.clone(),
        file,
    };
    let outcome = match &cli.command {
        Command::Curate(a) => commands::curate(&ctx, a)?,
        Command::Split(a) => commands::split(&ctx, a)?,
        Command::EvalAuto(a) => commands::eval_auto(&ctx, a)?,
        Command::EvalFacts(a) => commands::eval_facts(&ctx, a)?,
        Command::Cmi(a) => commands::cmi(&ctx, a)?,
        Command::Kappa(a) => commands::kappa(&ctx, a)?,
        Command::FusionDemo(a) => commands::fusion_demo(&ctx, a)?,
    };
    for r in &outcome.reports {
        r.write(&ctx.out).map_err(|e| CliError::input(format!("cannot write reports to {}: {e}", ctx.out.display())))?;
    }
    Ok(outcome)
}
