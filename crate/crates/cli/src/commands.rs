//! One function per subcommand. Stages talk to each other only through
//! files, so each can be run and tested on its own.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use irony_core::baselines::{BowClassifier, NbowClassifier, TfidfOptions};
use irony_core::embeddings::{train_skipgram, EmbeddingTable, SkipgramConfig};
use irony_core::ensemble::{ensemble_files, EnsembleMode, PosteriorFile};
use irony_core::eval::{confusion, metrics, report};
use irony_core::model::{load_checkpoint, save_checkpoint, CheckpointMeta, Classifier, Level, Vocab};
use irony_core::textproc::{build_corpus_stats, normalize_with, render, tokenize, CorpusStats, TokenSeq};
use irony_core::trainer::{stratified_split, train, Example, TrainOutcome};
use irony_core::{seeded_rng, Error, Result};

use crate::config::Config;
use crate::dataset::{load_dataset, Dataset, Task};
use crate::html::{attention_page, HeatRow};

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        line: 0,
        source: e,
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn with_ext(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

/// Bundled statistics unless a file is given.
pub fn load_stats(path: Option<&Path>) -> Result<CorpusStats> {
    match path {
        Some(p) => CorpusStats::load(p),
        None => Ok(CorpusStats::fixture()),
    }
}

pub fn process(text: &str, stats: &CorpusStats, cfg: &Config) -> TokenSeq {
    normalize_with(&tokenize(text), stats, &cfg.normalize)
}

pub fn stats_build(input: &Path, output: &Path) -> Result<CorpusStats> {
    let file = File::open(input).map_err(|e| io_err(input, e))?;
    let stats = build_corpus_stats(BufReader::new(file), input)?;
    stats.save(output)?;
    Ok(stats)
}

/// Writes `id<TAB>label<TAB>processed text` (label empty when unknown).
pub fn preprocess(input: &Path, task: Task, stats: &CorpusStats, cfg: &Config, output: &Path) -> Result<()> {
    let data = load_dataset(input, task)?;
    let mut out = String::new();
    for r in &data.records {
        let label = r.label.map(|l| l.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{}\t{}\t{}", r.id, label, render(&process(&r.text, stats, cfg)));
    }
    write_file(output, &out)
}

/// Reads one sentence per line (the last TAB-separated field when there
/// are several), optionally preprocessing it, and trains skip-gram vectors.
pub fn embed_train(input: &Path, output: &Path, preprocess_with: Option<(&CorpusStats, &Config)>, cfg: &SkipgramConfig) -> Result<EmbeddingTable> {
    let text = fs::read_to_string(input).map_err(|e| io_err(input, e))?;
    let corpus: Vec<Vec<String>> = text
        .lines()
        .map(|l| l.rsplit('\t').next().unwrap_or(""))
        .map(|l| match preprocess_with {
            Some((stats, c)) => process(l, stats, c).iter().map(|t| t.surface().to_string()).collect(),
            None => l.split_whitespace().map(str::to_string).collect(),
        })
        .collect();
    let table = train_skipgram(&corpus, cfg)?;
    table.save(output)?;
    Ok(table)
}

/// What a classifier sees for one text, plus the matching display units.
pub struct Prepared {
    pub units: Vec<String>,
    pub ids: Vec<usize>,
}

fn model_text(text: &str, level: Level, raw: bool, stats: &CorpusStats, cfg: &Config) -> Vec<String> {
    match level {
        Level::Word => process(text, stats, cfg).iter().map(|t| t.surface().to_string()).collect(),
        Level::Char => {
            let s = if raw { text.to_string() } else { render(&process(text, stats, cfg)) };
            s.chars().map(String::from).collect()
        }
    }
}

pub fn prepare(model: &Classifier<f32>, text: &str, raw: bool, stats: &CorpusStats, cfg: &Config) -> Prepared {
    let mut units = model_text(text, model.config().level, raw, stats, cfg);
    units.truncate(model.config().max_len);
    let ids = model.vocab().encode(&units, usize::MAX);
    Prepared { units, ids }
}

fn labeled(data: &Dataset, path: &Path) -> Result<Vec<usize>> {
    data.labels().ok_or_else(|| Error::Config(format!("{} has unlabeled lines", path.display())))
}

pub struct TrainArgs<'a> {
    pub level: Level,
    pub task: Task,
    pub train: &'a Path,
    pub dev: Option<&'a Path>,
    pub embeddings: Option<&'a Path>,
    pub output: &'a Path,
    pub seed: u64,
}

/// Trains one model and writes its checkpoint plus `<output>.log`.
pub fn train_model(args: &TrainArgs<'_>, stats: &CorpusStats, cfg: &Config) -> Result<TrainOutcome> {
    let data = load_dataset(args.train, args.task)?;
    let labels = labeled(&data, args.train)?;
    let mc = cfg.model(args.level, args.task.num_classes());
    let raw = cfg.char_raw_text;
    let texts: Vec<Vec<String>> = data
        .records
        .iter()
        .map(|r| model_text(&r.text, args.level, raw, stats, cfg))
        .collect();

    let mut rng = seeded_rng(args.seed);
    let mut model: Classifier<f32> = match args.level {
        Level::Word => {
            let path = args
                .embeddings
                .ok_or_else(|| Error::Config("the word model needs --embeddings".into()))?;
            let table = EmbeddingTable::load(path)?;
            Classifier::new_word(mc, &table, &mut rng)?
        }
        Level::Char => {
            let joined: Vec<String> = texts.iter().map(|t| t.concat()).collect();
            Classifier::new_random(mc, Vocab::for_chars(&joined), &mut rng)?
        }
    };

    let encode = |units: &[String]| {
        let n = units.len().min(model.config().max_len);
        model.vocab().encode(&units[..n], usize::MAX)
    };
    let (train_set, val_set): (Vec<Example>, Vec<Example>) = match args.dev {
        Some(dev) => {
            let d = load_dataset(dev, args.task)?;
            let dl = labeled(&d, dev)?;
            let tr = texts.iter().zip(&labels).map(|(t, &label)| Example { ids: encode(t), label });
            let va = d.records.iter().zip(dl).map(|(r, label)| Example {
                ids: encode(&model_text(&r.text, args.level, raw, stats, cfg)),
                label,
            });
            (tr.collect(), va.collect())
        }
        None => {
            let (tr, va) = stratified_split(&labels, args.task.num_classes(), cfg.train.val_fraction, args.seed);
            let ex = |i: &usize| Example {
                ids: encode(&texts[*i]),
                label: labels[*i],
            };
            (tr.iter().map(ex).collect(), va.iter().map(ex).collect())
        }
    };
    let keep = |e: &Example| !e.ids.is_empty();
    let train_set: Vec<Example> = train_set.into_iter().filter(keep).collect();
    let val_set: Vec<Example> = val_set.into_iter().filter(keep).collect();

    let tc = irony_core::trainer::TrainConfig {
        seed: args.seed,
        ..cfg.train.clone()
    };
    let mut log = String::new();
    let outcome = train(&mut model, &train_set, &val_set, &tc, |e| {
        eprintln!("{e}");
        let _ = writeln!(log, "{e}");
    })?;
    let meta = CheckpointMeta {
        seed: args.seed,
        epoch: outcome.best_epoch,
        val_f1: outcome.best_val_f1,
        raw_text: raw,
    };
    save_checkpoint(&model, &meta, args.output)?;
    write_file(&with_ext(args.output, "log"), &log)?;
    Ok(outcome)
}

/// Posterior file for every record, in input order. Empty inputs get the
/// uniform distribution.
pub fn predict(model_prefix: &Path, input: &Path, task: Task, stats: &CorpusStats, cfg: &Config, output: &Path) -> Result<PosteriorFile> {
    let (model, meta) = load_checkpoint(model_prefix)?;
    let c = model.config().num_classes;
    if c != task.num_classes() {
        return Err(Error::Config(format!(
            "checkpoint has {c} classes but task expects {}",
            task.num_classes()
        )));
    }
    let data = load_dataset(input, task)?;
    let mut post = PosteriorFile {
        ids: Vec::new(),
        probs: Vec::new(),
    };
    for r in &data.records {
        let p = prepare(&model, &r.text, meta.raw_text, stats, cfg);
        let probs = if p.ids.is_empty() {
            vec![1.0 / c as f64; c]
        } else {
            model.predict(&p.ids)?.probs.iter().map(|&x| x as f64).collect()
        };
        post.ids.push(r.id.clone());
        post.probs.push(probs);
    }
    post.save(output)?;
    Ok(post)
}

fn write_predictions(preds: &[(String, usize)], output: &Path) -> Result<()> {
    let text: String = preds.iter().map(|(id, c)| format!("{id}\t{c}\n")).collect();
    write_file(output, &text)
}

/// Writes `id<TAB>class` lines.
pub fn ensemble(inputs: &[PathBuf], mode: EnsembleMode, output: &Path) -> Result<Vec<(String, usize)>> {
    let files = inputs.iter().map(|p| PosteriorFile::load(p)).collect::<Result<Vec<_>>>()?;
    let preds = ensemble_files(&files, mode)?;
    write_predictions(&preds, output)?;
    Ok(preds)
}

fn load_predictions(path: &Path) -> Result<HashMap<String, usize>> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut out = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let parsed = line.split_once('\t').and_then(|(id, c)| Some((id, c.trim().parse::<usize>().ok()?)));
        let (id, c) = parsed.ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            msg: format!("expected id<TAB>class, got {line:?}"),
        })?;
        out.insert(id.to_string(), c);
    }
    Ok(out)
}

/// Metrics table for predictions against a labeled dataset.
pub fn evaluate(gold: &Path, predictions: &Path, task: Task, name: &str) -> Result<String> {
    let data = load_dataset(gold, task)?;
    let labels = labeled(&data, gold)?;
    let preds = load_predictions(predictions)?;
    let mut y_pred = Vec::with_capacity(labels.len());
    for r in &data.records {
        let p = preds
            .get(&r.id)
            .ok_or_else(|| Error::Config(format!("no prediction for id {:?}", r.id)))?;
        y_pred.push(*p);
    }
    let m = metrics(&confusion(&labels, &y_pred, task.num_classes())?);
    Ok(report(name, &m))
}

pub fn attention_html(
    model_prefix: &Path,
    input: &Path,
    task: Task,
    stats: &CorpusStats,
    cfg: &Config,
    limit: usize,
    output: &Path,
) -> Result<()> {
    let (model, meta) = load_checkpoint(model_prefix)?;
    let data = load_dataset(input, task)?;
    let separator = match model.config().level {
        Level::Word => " ",
        Level::Char => "",
    };
    let mut rows = Vec::new();
    for r in data.records.iter().take(limit) {
        let p = prepare(&model, &r.text, meta.raw_text, stats, cfg);
        if p.ids.is_empty() {
            continue;
        }
        let pred = model.predict(&p.ids)?;
        let gold = r.label.map(|l| format!(" gold={l}")).unwrap_or_default();
        rows.push(HeatRow {
            caption: format!("{} pred={}{gold}", r.id, pred.class()),
            tokens: p.units,
            weights: pred.attention.iter().map(|&a| a as f64).collect(),
            separator: separator.into(),
        });
    }
    write_file(output, &attention_page(&format!("attention ({})", model.config().level), &rows)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaselineKind {
    Bow,
    Nbow,
}

impl std::str::FromStr for BaselineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bow" => Ok(BaselineKind::Bow),
            "nbow" => Ok(BaselineKind::Nbow),
            other => Err(Error::Config(format!("unknown baseline {other:?} (expected bow|nbow)"))),
        }
    }
}

pub struct BaselineArgs<'a> {
    pub kind: BaselineKind,
    pub task: Task,
    pub train: &'a Path,
    pub test: &'a Path,
    pub embeddings: Option<&'a Path>,
    pub tfidf: TfidfOptions,
    pub output: &'a Path,
    pub seed: u64,
}

/// Trains a baseline on one file and writes `id<TAB>class` for another.
pub fn baseline(args: &BaselineArgs<'_>, stats: &CorpusStats, cfg: &Config) -> Result<Vec<(String, usize)>> {
    let tr = load_dataset(args.train, args.task)?;
    let labels = labeled(&tr, args.train)?;
    let te = load_dataset(args.test, args.task)?;
    let tokens = |d: &Dataset| -> Vec<Vec<String>> {
        d.records
            .iter()
            .map(|r| process(&r.text, stats, cfg).iter().map(|t| t.surface().to_string()).collect())
            .collect()
    };
    let (xtr, xte) = (tokens(&tr), tokens(&te));
    let svm = irony_core::baselines::SvmConfig {
        seed: args.seed,
        ..cfg.svm
    };
    let c = args.task.num_classes();
    let preds: Vec<usize> = match args.kind {
        BaselineKind::Bow => {
            let m = BowClassifier::train(&xtr, &labels, c, args.tfidf, &svm)?;
            xte.iter().map(|d| m.predict(d)).collect()
        }
        BaselineKind::Nbow => {
            let path = args
                .embeddings
                .ok_or_else(|| Error::Config("the nbow baseline needs --embeddings".into()))?;
            let table = EmbeddingTable::load(path)?;
            let m = NbowClassifier::train(&xtr, &labels, c, &table, &svm)?;
            xte.iter().map(|d| m.predict(d, &table)).collect()
        }
    };
    let out: Vec<(String, usize)> = te.records.iter().map(|r| r.id.clone()).zip(preds).collect();
    write_predictions(&out, args.output)?;
    Ok(out)
}
