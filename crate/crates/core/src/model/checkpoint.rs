//! Checkpoints are three files sharing a prefix: `<prefix>.manifest`
//! (`key=value` lines), `<prefix>.bin` (every parameter as little-endian
//! f32 in store order) and `<prefix>.vocab` (one token per line).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{Classifier, Level, ModelConfig, Vocab, UNK_CHAR, UNK_WORD};
use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Extra facts recorded alongside the weights.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CheckpointMeta {
    pub seed: u64,
    pub epoch: usize,
    pub val_f1: f64,
    /// Character model reads raw text rather than preprocessed text.
    pub raw_text: bool,
}

fn with_ext(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn escape(tok: &str) -> String {
    tok.replace('\\', "\\\\").replace('\n', "\\n").replace('\r', "\\r")
}

fn unescape(line: &str) -> String {
    let mut out = String::with_capacity(line.len());
    let mut chars = line.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some(other) => out.push(other),
            None => out.push('\\'),
        }
    }
    out
}

pub fn save_checkpoint(model: &Classifier<f32>, meta: &CheckpointMeta, prefix: &Path) -> Result<()> {
    let cfg = model.config();
    let mut m = String::new();
    let _ = writeln!(m, "format=1");
    let _ = writeln!(m, "level={}", cfg.level);
    let _ = writeln!(m, "embed_dim={}", cfg.embed_dim);
    let _ = writeln!(m, "hidden={}", cfg.hidden);
    let _ = writeln!(m, "num_classes={}", cfg.num_classes);
    let _ = writeln!(m, "noise_sigma={}", cfg.noise_sigma);
    let _ = writeln!(m, "emb_dropout={}", cfg.emb_dropout);
    let _ = writeln!(m, "lstm_dropout={}", cfg.lstm_dropout);
    let _ = writeln!(m, "freeze_embeddings={}", cfg.freeze_embeddings);
    let _ = writeln!(m, "max_len={}", cfg.max_len);
    let _ = writeln!(m, "vocab_size={}", model.vocab().len());
    let _ = writeln!(m, "vocab_hash={}", model.vocab().hash());
    let _ = writeln!(m, "seed={}", meta.seed);
    let _ = writeln!(m, "epoch={}", meta.epoch);
    let _ = writeln!(m, "val_f1={}", meta.val_f1);
    let _ = writeln!(m, "raw_text={}", meta.raw_text);
    let mut blob = Vec::with_capacity(model.params().num_elements() * 4);
    for (_, p) in model.params().iter() {
        let shape: Vec<String> = p.value.shape().iter().map(usize::to_string).collect();
        let _ = writeln!(m, "param={} {}", p.name, shape.join("x"));
        for v in p.value.data() {
            blob.extend_from_slice(&v.to_le_bytes());
        }
    }
    let vocab: String = model.vocab().tokens().iter().map(|t| escape(t) + "\n").collect();

    let write = |ext: &str, bytes: &[u8]| {
        let path = with_ext(prefix, ext);
        fs::write(&path, bytes).map_err(|e| Error::io(path, 0, e))
    };
    write("manifest", m.as_bytes())?;
    write("bin", &blob)?;
    write("vocab", vocab.as_bytes())
}

struct Manifest {
    path: PathBuf,
    entries: Vec<(usize, String, String)>,
}

impl Manifest {
    fn get(&self, key: &str) -> Result<(usize, &str)> {
        self.entries
            .iter()
            .find(|(_, k, _)| k == key)
            .map(|(l, _, v)| (*l, v.as_str()))
            .ok_or_else(|| Error::parse(&self.path, 0, format!("missing key {key:?}")))
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let (line, v) = self.get(key)?;
        v.parse()
            .map_err(|_| Error::parse(&self.path, line, format!("bad value for {key}: {v:?}")))
    }
}

/// Loads a checkpoint, verifying that the vocabulary file matches the hash
/// recorded in the manifest and that the blob has exactly the declared size.
pub fn load_checkpoint(prefix: &Path) -> Result<(Classifier<f32>, CheckpointMeta)> {
    let mpath = with_ext(prefix, "manifest");
    let text = fs::read_to_string(&mpath).map_err(|e| Error::io(&mpath, 0, e))?;
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(&mpath, i + 1, format!("expected key=value, got {line:?}")))?;
        entries.push((i + 1, k.trim().to_string(), v.trim().to_string()));
    }
    let man = Manifest { path: mpath.clone(), entries };

    let level: Level = man.parse("level")?;
    let config = ModelConfig {
        level,
        embed_dim: man.parse("embed_dim")?,
        hidden: man.parse("hidden")?,
        num_classes: man.parse("num_classes")?,
        noise_sigma: man.parse("noise_sigma")?,
        emb_dropout: man.parse("emb_dropout")?,
        lstm_dropout: man.parse("lstm_dropout")?,
        freeze_embeddings: man.parse("freeze_embeddings")?,
        max_len: man.parse("max_len")?,
    };
    let meta = CheckpointMeta {
        seed: man.parse("seed")?,
        epoch: man.parse("epoch")?,
        val_f1: man.parse("val_f1")?,
        raw_text: man.parse("raw_text")?,
    };

    let vpath = with_ext(prefix, "vocab");
    let vtext = fs::read_to_string(&vpath).map_err(|e| Error::io(&vpath, 0, e))?;
    let tokens: Vec<String> = vtext.split('\n').filter(|l| !l.is_empty()).map(unescape).collect();
    let unk = match level {
        Level::Word => UNK_WORD,
        Level::Char => UNK_CHAR,
    };
    let vocab = Vocab::from_tokens(tokens, unk)
        .ok_or_else(|| Error::parse(&vpath, 0, format!("vocabulary lacks {unk} or has duplicates")))?;
    let expected_hash = man.get("vocab_hash")?.1.to_string();
    if vocab.hash() != expected_hash {
        return Err(Error::VocabHash {
            checkpoint: expected_hash,
            supplied: vocab.hash(),
        });
    }

    let emb = Tensor::zeros(&[vocab.len(), config.embed_dim]);
    let mut model = Classifier::build(config, vocab, emb, &mut |shape| Tensor::zeros(shape))?;

    let declared: Vec<(usize, &str)> = man
        .entries
        .iter()
        .filter(|(_, k, _)| k == "param")
        .map(|(l, _, v)| (*l, v.as_str()))
        .collect();
    if declared.len() != model.params().len() {
        return Err(Error::parse(
            &mpath,
            0,
            format!("expected {} params, manifest lists {}", model.params().len(), declared.len()),
        ));
    }
    for ((line, decl), (_, p)) in declared.iter().zip(model.params().iter()) {
        let shape: Vec<String> = p.value.shape().iter().map(usize::to_string).collect();
        let want = format!("{} {}", p.name, shape.join("x"));
        if *decl != want {
            return Err(Error::parse(&mpath, *line, format!("expected param {want:?}, found {decl:?}")));
        }
    }

    let bpath = with_ext(prefix, "bin");
    let blob = fs::read(&bpath).map_err(|e| Error::io(&bpath, 0, e))?;
    let need = model.params().num_elements() * 4;
    if blob.len() != need {
        return Err(Error::parse(&bpath, 0, format!("expected {need} bytes, found {}", blob.len())));
    }
    let mut chunks = blob.chunks_exact(4);
    for (_, p) in model.params_mut().iter_mut() {
        for v in p.value.data_mut() {
            let c = chunks.next().expect("length checked");
            *v = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
        }
    }
    Ok((model, meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeded_rng;

    fn model() -> Classifier<f32> {
        let cfg = ModelConfig {
            embed_dim: 3,
            hidden: 2,
            ..ModelConfig::char(4)
        };
        Classifier::new_random(cfg, Vocab::for_chars(&["ab\\c\n"]), &mut seeded_rng(4)).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let prefix = dir.path().join("m");
        let m = model();
        let meta = CheckpointMeta {
            seed: 9,
            epoch: 3,
            val_f1: 0.5,
            raw_text: true,
        };
        save_checkpoint(&m, &meta, &prefix).unwrap();
        let (back, meta2) = load_checkpoint(&prefix).unwrap();
        assert_eq!(meta2, meta);
        assert_eq!(back.config(), m.config());
        assert_eq!(back.vocab(), m.vocab());
        for ((_, a), (_, b)) in back.params().iter().zip(m.params().iter()) {
            assert_eq!(a.value, b.value);
            assert_eq!(a.frozen, b.frozen);
        }
        let ids = m.encode_text("abca");
        assert_eq!(back.predict(&ids).unwrap(), m.predict(&ids).unwrap());
    }

    #[test]
    fn tampered_vocab_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let prefix = dir.path().join("m");
        save_checkpoint(&model(), &CheckpointMeta::default(), &prefix).unwrap();
        let vpath = with_ext(&prefix, "vocab");
        let text = fs::read_to_string(&vpath).unwrap();
        fs::write(&vpath, text.replacen('a', "z", 1)).unwrap();
        assert!(matches!(load_checkpoint(&prefix), Err(Error::VocabHash { .. })));
    }

    #[test]
    fn truncated_blob_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let prefix = dir.path().join("m");
        save_checkpoint(&model(), &CheckpointMeta::default(), &prefix).unwrap();
        let bpath = with_ext(&prefix, "bin");
        let blob = fs::read(&bpath).unwrap();
        fs::write(&bpath, &blob[..blob.len() - 4]).unwrap();
        assert!(load_checkpoint(&prefix).is_err());
    }

    #[test]
    fn escaping_round_trips() {
        for s in ["a", "\\", "\n", "\\n", "x\r"] {
            assert_eq!(unescape(&escape(s)), s);
        }
    }
}
