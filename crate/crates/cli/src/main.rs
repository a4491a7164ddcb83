mod commands;
mod config;
mod error;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use argseq_core::corpus::Split;
use argseq_core::{LinearizeMode, StructureMode};
use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};

use crate::config::{AnalysisKind, CorpusFormat, RunConfig};
use crate::error::CliError;

#[derive(Parser)]
#[command(
    name = "argseq",
    version,
    about = "Argument mining as constrained action generation"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run seed; also seeds the model.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// TOML run config; written back, fully resolved, into the output directory.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, default_value = "argseq-out")]
    out_dir: PathBuf,
    /// Override any config key, e.g. `--set model.ffn_hidden=150`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded synthetic corpus.
    GenSynthetic(GenArgs),
    /// Convert an annotated corpus directory to the canonical format.
    Convert(ConvertArgs),
    /// Write the action sequence of every structure.
    Linearize(LinearizeArgs),
    /// Rebuild structures from action traces.
    Delinearize(DelinearizeArgs),
    /// Train the neural scorer.
    Train(TrainArgs),
    /// Decode a corpus with a trained model.
    Predict(PredictArgs),
    /// Score predictions against gold.
    Eval(EvalArgs),
    /// Structural analyses of predictions against gold.
    Analyze(AnalyzeArgs),
    /// Compare analytic and numeric gradients.
    Gradcheck(GradCheckArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum StructureArg {
    Tree,
    Graph,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    MultiLink,
    SingleLink,
}

impl From<ModeArg> for LinearizeMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::MultiLink => LinearizeMode::MultiLink,
            ModeArg::SingleLink => LinearizeMode::SingleLink,
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    paragraphs: Option<usize>,
    #[arg(long, value_enum)]
    structure: Option<StructureArg>,
    /// Components per token.
    #[arg(long)]
    density: Option<f64>,
    #[arg(long)]
    tokens_min: Option<usize>,
    #[arg(long)]
    tokens_max: Option<usize>,
    #[arg(long)]
    relation_prob: Option<f64>,
    #[arg(long)]
    dev_fraction: Option<f64>,
    #[arg(long)]
    test_fraction: Option<f64>,
}

#[derive(Args)]
struct ConvertArgs {
    #[arg(long, value_enum)]
    format: Option<CorpusFormat>,
    /// Corpus directory.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Share of essays moved to dev (essay corpus only).
    #[arg(long)]
    dev_fraction: Option<f64>,
}

#[derive(Args)]
struct LinearizeArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Also write an inline-marker rendering.
    #[arg(long)]
    render: bool,
}

#[derive(Args)]
struct DelinearizeArgs {
    /// Trace file written by `linearize`.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Canonical corpus holding the paragraphs, in trace order.
    #[arg(long)]
    corpus: Option<PathBuf>,
}

#[derive(Args)]
struct ModelFlags {
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    embed_dim: Option<usize>,
    #[arg(long)]
    context_dim: Option<usize>,
    #[arg(long)]
    ffn1_hidden: Option<usize>,
    #[arg(long)]
    ffn_hidden: Option<usize>,
    #[arg(long)]
    weight_decay: Option<f64>,
    /// 0 disables clipping.
    #[arg(long)]
    clip_norm: Option<f64>,
    #[arg(long)]
    eval_every: Option<usize>,
    #[arg(long)]
    max_open: Option<usize>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    train: Option<PathBuf>,
    #[arg(long)]
    dev: Option<PathBuf>,
    /// Evaluate on the training paragraphs.
    #[arg(long)]
    dev_on_train: bool,
    #[command(flatten)]
    model: ModelFlags,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    split: Option<Split>,
    #[arg(long)]
    max_steps: Option<usize>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    gold: Option<PathBuf>,
    #[arg(long)]
    pred: Option<PathBuf>,
    #[arg(long)]
    split: Option<Split>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long, value_enum)]
    kind: Option<AnalysisKind>,
    #[arg(long)]
    gold: Option<PathBuf>,
    #[arg(long)]
    pred: Option<PathBuf>,
    #[arg(long)]
    split: Option<Split>,
    /// Chains must also match relation types.
    #[arg(long)]
    require_types: bool,
}

#[derive(Args)]
struct GradCheckArgs {
    /// Canonical corpus to draw examples from; synthetic data otherwise.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    examples: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    threshold: Option<f64>,
    #[command(flatten)]
    model: ModelFlags,
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn set_path(slot: &mut Option<PathBuf>, v: Option<PathBuf>) {
    if v.is_some() {
        *slot = v;
    }
}

impl ModelFlags {
    fn apply(self, cfg: &mut RunConfig) {
        let m = &mut cfg.model;
        set(&mut m.epochs, self.epochs);
        set(&mut m.learning_rate, self.lr);
        set(&mut m.batch_size, self.batch_size);
        set(&mut m.embed_dim, self.embed_dim);
        set(&mut m.context_dim, self.context_dim);
        set(&mut m.ffn1_hidden, self.ffn1_hidden);
        set(&mut m.ffn_hidden, self.ffn_hidden);
        set(&mut m.weight_decay, self.weight_decay);
        set(&mut m.clip_norm, self.clip_norm);
        set(&mut m.eval_every, self.eval_every);
        set(&mut m.max_open, self.max_open);
        set(&mut m.mode, self.mode.map(Into::into));
    }
}

impl Command {
    /// Folds the explicit flags into the config.
    fn apply(self, cfg: &mut RunConfig) -> &'static str {
        match self {
            Command::GenSynthetic(a) => {
                let s = &mut cfg.synthetic;
                set(&mut s.paragraphs, a.paragraphs);
                set(
                    &mut s.structure,
                    a.structure.map(|m| match m {
                        StructureArg::Tree => StructureMode::Tree,
                        StructureArg::Graph => StructureMode::Graph,
                    }),
                );
                set(&mut s.ac_density, a.density);
                set(&mut s.tokens_min, a.tokens_min);
                set(&mut s.tokens_max, a.tokens_max);
                set(&mut s.relation_prob, a.relation_prob);
                set(&mut s.dev_fraction, a.dev_fraction);
                set(&mut s.test_fraction, a.test_fraction);
                "gen-synthetic"
            }
            Command::Convert(a) => {
                set_path(&mut cfg.paths.input, a.input);
                if a.format.is_some() {
                    cfg.convert.format = a.format;
                }
                set(&mut cfg.aae.dev_fraction, a.dev_fraction);
                "convert"
            }
            Command::Linearize(a) => {
                set_path(&mut cfg.paths.input, a.input);
                set(&mut cfg.model.mode, a.mode.map(Into::into));
                cfg.linearize.render |= a.render;
                "linearize"
            }
            Command::Delinearize(a) => {
                set_path(&mut cfg.paths.input, a.input);
                set_path(&mut cfg.paths.corpus, a.corpus);
                "delinearize"
            }
            Command::Train(a) => {
                set_path(&mut cfg.paths.train, a.train);
                set_path(&mut cfg.paths.dev, a.dev);
                cfg.train.dev_on_train |= a.dev_on_train;
                a.model.apply(cfg);
                "train"
            }
            Command::Predict(a) => {
                set_path(&mut cfg.paths.model, a.model);
                set_path(&mut cfg.paths.input, a.input);
                if a.split.is_some() {
                    cfg.data.split = a.split;
                }
                if a.max_steps.is_some() {
                    cfg.decode.max_steps = a.max_steps;
                }
                "predict"
            }
            Command::Eval(a) => {
                set_path(&mut cfg.paths.gold, a.gold);
                set_path(&mut cfg.paths.pred, a.pred);
                if a.split.is_some() {
                    cfg.data.split = a.split;
                }
                "eval"
            }
            Command::Analyze(a) => {
                set_path(&mut cfg.paths.gold, a.gold);
                set_path(&mut cfg.paths.pred, a.pred);
                if a.split.is_some() {
                    cfg.data.split = a.split;
                }
                if a.kind.is_some() {
                    cfg.analysis.kind = a.kind;
                }
                cfg.analysis.require_types |= a.require_types;
                "analyze"
            }
            Command::Gradcheck(a) => {
                set_path(&mut cfg.paths.input, a.input);
                set(&mut cfg.gradcheck.examples, a.examples);
                set(&mut cfg.gradcheck.samples, a.samples);
                set(&mut cfg.gradcheck.threshold, a.threshold);
                a.model.apply(cfg);
                "gradcheck"
            }
        }
    }
}

fn real_main(cli: Cli) -> Result<(), CliError> {
    let mut cfg = config::load(cli.common.config.as_deref(), &cli.common.set)?;
    if let Some(s) = cli.common.seed {
        cfg.set_seed(s);
    }
    let name = cli.command.apply(&mut cfg);
    cfg.validate()?;
    let mut run = run::RunDir::create(&cli.common.out_dir, name)?;
    if let Some(p) = &cli.common.config {
        run.input(p)?;
    }
    // A failed check still leaves its report and manifest behind.
    let failure = commands::dispatch(name, &cfg, &mut run)?;
    run.finish(&cfg)?;
    failure.map_or(Ok(()), Err)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.common.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match real_main(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
