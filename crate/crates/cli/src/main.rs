use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use irony_cli::commands::{self, BaselineArgs, BaselineKind, TrainArgs};
use irony_cli::config::Config;
use irony_cli::dataset::Task;
use irony_core::baselines::TfidfOptions;
use irony_core::ensemble::EnsembleMode;
use irony_core::model::Level;

#[derive(Parser)]
#[command(name = "irony", version, about = "Irony detection in tweets")]
struct Cli {
    /// a: ironic vs. not; b: four irony classes.
    #[arg(long, global = true, default_value = "a")]
    task: Task,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// key = value file overriding defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Word statistics for segmentation and spelling; bundled ones if absent.
    #[arg(long, global = true)]
    stats: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count unigrams and bigrams of a raw text corpus.
    StatsBuild {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Normalize the texts of a dataset.
    Preprocess {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Train skip-gram embeddings on one sentence per line.
    EmbedTrain {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Run the tweet preprocessor over each line first.
        #[arg(long)]
        preprocess: bool,
    },
    /// Train a word- or character-level classifier.
    Train {
        #[arg(long)]
        level: Level,
        #[arg(long)]
        input: PathBuf,
        /// Validation set; otherwise a stratified split of the input.
        #[arg(long)]
        dev: Option<PathBuf>,
        #[arg(long)]
        embeddings: Option<PathBuf>,
        /// Checkpoint prefix.
        #[arg(long)]
        output: PathBuf,
    },
    /// Write class posteriors of a trained model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Combine posterior files into class predictions.
    Ensemble {
        #[arg(long)]
        mode: EnsembleMode,
        #[arg(long)]
        output: PathBuf,
        #[arg(required = true)]
        posteriors: Vec<PathBuf>,
    },
    /// Score predictions against a labeled dataset.
    Evaluate {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long, default_value = "model")]
        name: String,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Render attention weights as an HTML heat map.
    AttentionHtml {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 50)]
        limit: usize,
    },
    /// TF-IDF or embedding-centroid features with a linear SVM.
    Baseline {
        #[arg(long)]
        kind: BaselineKind,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(long)]
        embeddings: Option<PathBuf>,
        #[arg(long)]
        binary_tf: bool,
        #[arg(long)]
        normalize: bool,
        #[arg(long)]
        output: PathBuf,
    },
    /// Print every configuration key with its default.
    ConfigDefaults,
}

fn run(cli: Cli) -> irony_core::Result<()> {
    let cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let stats = || commands::load_stats(cli.stats.as_deref());
    match cli.command {
        Command::StatsBuild { input, output } => {
            let s = commands::stats_build(&input, &output)?;
            eprintln!("{} words, {} types", s.total_unigrams(), s.vocab_size());
        }
        Command::Preprocess { input, output } => commands::preprocess(&input, cli.task, &stats()?, &cfg, &output)?,
        Command::EmbedTrain {
            input,
            output,
            preprocess,
        } => {
            let sg = irony_core::embeddings::SkipgramConfig {
                seed: cli.seed,
                ..cfg.skipgram.clone()
            };
            let s = if preprocess { Some(stats()?) } else { None };
            let t = commands::embed_train(&input, &output, s.as_ref().map(|s| (s, &cfg)), &sg)?;
            eprintln!("{} vectors of dimension {}", t.len(), t.dim());
        }
        Command::Train {
            level,
            input,
            dev,
            embeddings,
            output,
        } => {
            let args = TrainArgs {
                level,
                task: cli.task,
                train: &input,
                dev: dev.as_deref(),
                embeddings: embeddings.as_deref(),
                output: &output,
                seed: cli.seed,
            };
            let out = commands::train_model(&args, &stats()?, &cfg)?;
            eprintln!("best epoch {} (val macro-F1 {:.4})", out.best_epoch, out.best_val_f1);
        }
        Command::Predict { model, input, output } => {
            commands::predict(&model, &input, cli.task, &stats()?, &cfg, &output)?;
        }
        Command::Ensemble {
            mode,
            output,
            posteriors,
        } => {
            commands::ensemble(&posteriors, mode, &output)?;
        }
        Command::Evaluate {
            gold,
            predictions,
            name,
            output,
        } => {
            let table = commands::evaluate(&gold, &predictions, cli.task, &name)?;
            match output {
                Some(p) => std::fs::write(&p, &table).map_err(|e| irony_core::Error::Io {
                    path: p.clone(),
                    line: 0,
                    source: e,
                })?,
                None => print!("{table}"),
            }
        }
        Command::AttentionHtml {
            model,
            input,
            output,
            limit,
        } => commands::attention_html(&model, &input, cli.task, &stats()?, &cfg, limit, &output)?,
        Command::Baseline {
            kind,
            input,
            test,
            embeddings,
            binary_tf,
            normalize,
            output,
        } => {
            let args = BaselineArgs {
                kind,
                task: cli.task,
                train: &input,
                test: &test,
                embeddings: embeddings.as_deref(),
                tfidf: TfidfOptions { binary_tf, normalize },
                output: &output,
                seed: cli.seed,
            };
            commands::baseline(&args, &stats()?, &cfg)?;
        }
        Command::ConfigDefaults => print!("{}", Config::default().to_text()),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
