//! `key = value` configuration. Every key has a default; a file only needs
//! the keys it changes. `#` starts a comment.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use irony_core::embeddings::SkipgramConfig;
use irony_core::model::{Level, ModelConfig};
use irony_core::textproc::{NormalizeOptions, SegmentOptions};
use irony_core::trainer::TrainConfig;
use irony_core::{baselines::SvmConfig, Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub word: ModelConfig,
    pub char: ModelConfig,
    /// Feed the character model raw tweet text instead of preprocessed text.
    pub char_raw_text: bool,
    pub train: TrainConfig,
    pub svm: SvmConfig,
    pub skipgram: SkipgramConfig,
    pub normalize: NormalizeOptions,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            word: ModelConfig::word(2),
            char: ModelConfig::char(2),
            char_raw_text: false,
            train: TrainConfig::default(),
            svm: SvmConfig::default(),
            skipgram: SkipgramConfig::default(),
            normalize: NormalizeOptions::default(),
        }
    }
}

fn parse<T: FromStr>(path: &Path, line: usize, key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: format!("bad value {value:?} for {key}"),
    })
}

impl Config {
    pub fn model(&self, level: Level, num_classes: usize) -> ModelConfig {
        let base = match level {
            Level::Word => &self.word,
            Level::Char => &self.char,
        };
        ModelConfig {
            num_classes,
            ..base.clone()
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            line: 0,
            source: e,
        })?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut cfg = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                msg: format!("expected key = value, got {line:?}"),
            })?;
            cfg.set(key.trim(), value.trim(), path, i + 1)?;
        }
        cfg.word.validate()?;
        cfg.char.validate()?;
        cfg.train.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, v: &str, path: &Path, line: usize) -> Result<()> {
        macro_rules! p {
            () => {
                parse(path, line, key, v)?
            };
        }
        let (section, name) = key.split_once('.').unwrap_or(("", key));
        match (section, name) {
            ("word" | "char", _) => {
                let m = if section == "word" { &mut self.word } else { &mut self.char };
                match name {
                    "embed_dim" => m.embed_dim = p!(),
                    "emb_dropout" => m.emb_dropout = p!(),
                    "emb_noise" => m.noise_sigma = p!(),
                    "lstm_size" => m.hidden = p!(),
                    "lstm_dropout" => m.lstm_dropout = p!(),
                    "max_len" => m.max_len = p!(),
                    "freeze_embeddings" => m.freeze_embeddings = p!(),
                    "raw_text" if section == "char" => self.char_raw_text = p!(),
                    _ => return Err(unknown(path, line, key)),
                }
            }
            ("train", "batch_size") => self.train.batch_size = p!(),
            ("train", "clip_norm") => self.train.clip_norm = p!(),
            ("train", "lr") => self.train.adam.lr = p!(),
            ("train", "beta1") => self.train.adam.beta1 = p!(),
            ("train", "beta2") => self.train.adam.beta2 = p!(),
            ("train", "eps") => self.train.adam.eps = p!(),
            ("train", "max_epochs") => self.train.max_epochs = p!(),
            ("train", "patience") => self.train.patience = p!(),
            ("train", "val_fraction") => self.train.val_fraction = p!(),
            ("svm", "c") => self.svm.c_reg = p!(),
            ("svm", "epochs") => self.svm.epochs = p!(),
            ("skipgram", "dim") => self.skipgram.dim = p!(),
            ("skipgram", "negative") => self.skipgram.negative_samples = p!(),
            ("skipgram", "min_count") => self.skipgram.min_count = p!(),
            ("skipgram", "window") => self.skipgram.window = p!(),
            ("skipgram", "epochs") => self.skipgram.epochs = p!(),
            ("skipgram", "lr") => self.skipgram.learning_rate = p!(),
            ("preprocess", "bigram_segmentation") => self.normalize.segment = SegmentOptions { bigrams: p!() },
            ("preprocess", "spell_context") => self.normalize.spell_context = p!(),
            ("preprocess", "correct_hashtags") => self.normalize.correct_hashtags = p!(),
            _ => return Err(unknown(path, line, key)),
        }
        Ok(())
    }

    /// Every key with its current value, in the accepted syntax.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (section, m) in [("word", &self.word), ("char", &self.char)] {
            let _ = writeln!(out, "{section}.embed_dim = {}", m.embed_dim);
            let _ = writeln!(out, "{section}.emb_dropout = {}", m.emb_dropout);
            let _ = writeln!(out, "{section}.emb_noise = {}", m.noise_sigma);
            let _ = writeln!(out, "{section}.lstm_size = {}", m.hidden);
            let _ = writeln!(out, "{section}.lstm_dropout = {}", m.lstm_dropout);
            let _ = writeln!(out, "{section}.max_len = {}", m.max_len);
            let _ = writeln!(out, "{section}.freeze_embeddings = {}", m.freeze_embeddings);
        }
        let _ = writeln!(out, "char.raw_text = {}", self.char_raw_text);
        let t = &self.train;
        let _ = writeln!(out, "train.batch_size = {}", t.batch_size);
        let _ = writeln!(out, "train.clip_norm = {}", t.clip_norm);
        let _ = writeln!(out, "train.lr = {}", t.adam.lr);
        let _ = writeln!(out, "train.beta1 = {}", t.adam.beta1);
        let _ = writeln!(out, "train.beta2 = {}", t.adam.beta2);
        let _ = writeln!(out, "train.eps = {}", t.adam.eps);
        let _ = writeln!(out, "train.max_epochs = {}", t.max_epochs);
        let _ = writeln!(out, "train.patience = {}", t.patience);
        let _ = writeln!(out, "train.val_fraction = {}", t.val_fraction);
        let _ = writeln!(out, "svm.c = {}", self.svm.c_reg);
        let _ = writeln!(out, "svm.epochs = {}", self.svm.epochs);
        let s = &self.skipgram;
        let _ = writeln!(out, "skipgram.dim = {}", s.dim);
        let _ = writeln!(out, "skipgram.negative = {}", s.negative_samples);
        let _ = writeln!(out, "skipgram.min_count = {}", s.min_count);
        let _ = writeln!(out, "skipgram.window = {}", s.window);
        let _ = writeln!(out, "skipgram.epochs = {}", s.epochs);
        let _ = writeln!(out, "skipgram.lr = {}", s.learning_rate);
        let n = &self.normalize;
        let _ = writeln!(out, "preprocess.bigram_segmentation = {}", n.segment.bigrams);
        let _ = writeln!(out, "preprocess.spell_context = {}", n.spell_context);
        let _ = writeln!(out, "preprocess.correct_hashtags = {}", n.correct_hashtags);
        out
    }
}

fn unknown(path: &Path, line: usize, key: &str) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: format!("unknown key {key:?}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_hyper_parameters() {
        let c = Config::default();
        assert_eq!((c.word.embed_dim, c.char.embed_dim), (300, 25));
        assert_eq!((c.word.emb_dropout, c.char.emb_dropout), (0.1, 0.0));
        assert_eq!((c.word.noise_sigma, c.char.noise_sigma), (0.05, 0.0));
        assert_eq!((c.word.hidden, c.char.hidden), (150, 150));
        assert_eq!((c.word.lstm_dropout, c.char.lstm_dropout), (0.2, 0.2));
        assert_eq!((c.train.batch_size, c.train.clip_norm, c.svm.c_reg), (32, 1.0, 0.6));
    }

    #[test]
    fn text_round_trip() {
        let mut c = Config::default();
        c.word.hidden = 7;
        c.train.patience = 2;
        c.normalize.spell_context = true;
        c.char_raw_text = true;
        assert_eq!(Config::parse(&c.to_text(), Path::new("c")).unwrap(), c);
    }

    #[test]
    fn comments_and_errors() {
        let c = Config::parse("# hi\nword.lstm_size = 10 # small\n\n", Path::new("c")).unwrap();
        assert_eq!(c.word.hidden, 10);
        let e = Config::parse("\nword.colour = red\n", Path::new("c")).unwrap_err().to_string();
        assert!(e.starts_with("c:2:") && e.contains("word.colour"), "{e}");
        assert!(Config::parse("train.batch_size = many\n", Path::new("c")).is_err());
        assert!(Config::parse("train.batch_size = 0\n", Path::new("c")).is_err());
        assert!(Config::parse("word.raw_text = true\n", Path::new("c")).is_err());
    }
}
