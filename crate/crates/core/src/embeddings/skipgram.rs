use std::collections::HashMap;

use rand::Rng;

use super::EmbeddingTable;
use crate::error::{Error, Result};
use crate::seeded_rng;
use crate::tensor::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct SkipgramConfig {
    pub dim: usize,
    pub negative_samples: usize,
    pub min_count: usize,
    pub window: usize,
    pub epochs: usize,
    /// Starting rate; decays linearly towards `1e-4` of itself.
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for SkipgramConfig {
    fn default() -> Self {
        SkipgramConfig {
            dim: 300,
            negative_samples: 5,
            min_count: 20,
            window: 5,
            epochs: 5,
            learning_rate: 0.025,
            seed: 1,
        }
    }
}

impl SkipgramConfig {
    fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.negative_samples == 0 || self.min_count == 0 || self.window == 0 {
            return Err(Error::Config(format!(
                "skip-gram needs dim, negative_samples, min_count and window ≥ 1: {self:?}"
            )));
        }
        Ok(())
    }
}

#[inline]
fn sigmoid<F: Real>(x: F) -> F {
    F::one() / (F::one() + (-x).exp())
}

/// `-log σ(u_pos·v) - Σ_k log σ(-u_k·v)` for one (center, context) pair.
pub fn negative_sampling_loss<F: Real>(center: &[F], positive: &[F], negatives: &[&[F]]) -> F {
    let dot = |a: &[F], b: &[F]| a.iter().zip(b).map(|(&x, &y)| x * y).sum::<F>();
    let mut loss = -sigmoid(dot(positive, center)).ln();
    for u in negatives {
        loss -= sigmoid(-dot(u, center)).ln();
    }
    loss
}

/// One SGD step on [`negative_sampling_loss`] with step size `lr`.
///
/// `outputs` is the flat `V × dim` output matrix; `targets[0]` is the
/// context word and the rest are negatives. All output-row updates use the
/// pre-step center vector, and the center moves last, so the applied change
/// is exactly `-lr · ∇loss` at the starting point.
pub fn pair_step<F: Real>(center: &mut [F], outputs: &mut [F], targets: &[usize], lr: F, scratch: &mut [F]) {
    let dim = center.len();
    scratch.iter_mut().for_each(|s| *s = F::zero());
    for (k, &t) in targets.iter().enumerate() {
        let label = if k == 0 { F::one() } else { F::zero() };
        let row = &mut outputs[t * dim..(t + 1) * dim];
        let dot: F = row.iter().zip(center.iter()).map(|(&a, &b)| a * b).sum();
        let g = (label - sigmoid(dot)) * lr;
        for ((s, r), &c) in scratch.iter_mut().zip(row.iter_mut()).zip(center.iter()) {
            *s += g * *r;
            *r += g * c;
        }
    }
    for (c, &s) in center.iter_mut().zip(scratch.iter()) {
        *c += s;
    }
}

/// Cumulative unigram^0.75 table for negative sampling.
struct NoiseDistribution {
    cumulative: Vec<f64>,
}

impl NoiseDistribution {
    fn new(counts: &[u64]) -> Self {
        let mut acc = 0.0;
        let cumulative = counts
            .iter()
            .map(|&c| {
                acc += (c as f64).powf(0.75);
                acc
            })
            .collect();
        NoiseDistribution { cumulative }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().expect("non-empty vocabulary");
        let x = rng.random::<f64>() * total;
        self.cumulative.partition_point(|&c| c <= x).min(self.cumulative.len() - 1)
    }
}

/// Trains skip-gram vectors with negative sampling.
///
/// The vocabulary is every word with count ≥ `min_count`, ordered by
/// descending count then lexicographically. Pairs whose context is the same
/// word as the center are skipped. Single-threaded and bit-reproducible for
/// a fixed seed.
pub fn train_skipgram<S: AsRef<str>>(corpus: &[Vec<S>], cfg: &SkipgramConfig) -> Result<EmbeddingTable> {
    cfg.validate()?;
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for sent in corpus {
        for w in sent {
            *counts.entry(w.as_ref()).or_insert(0) += 1;
        }
    }
    let mut vocab: Vec<(&str, u64)> = counts
        .into_iter()
        .filter(|&(_, c)| c >= cfg.min_count as u64)
        .collect();
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary {
            min_count: cfg.min_count,
        });
    }
    vocab.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    let index: HashMap<&str, usize> = vocab.iter().enumerate().map(|(i, (w, _))| (*w, i)).collect();
    let sentences: Vec<Vec<usize>> = corpus
        .iter()
        .map(|s| s.iter().filter_map(|w| index.get(w.as_ref()).copied()).collect())
        .collect();

    let dim = cfg.dim;
    let v = vocab.len();
    let mut rng = seeded_rng(cfg.seed);
    let half = 0.5 / dim as f64;
    let mut input: Vec<f32> = (0..v * dim).map(|_| rng.random_range(-half..half) as f32).collect();
    let mut output = vec![0.0f32; v * dim];
    let noise = NoiseDistribution::new(&vocab.iter().map(|&(_, c)| c).collect::<Vec<_>>());

    let total_words: usize = sentences.iter().map(Vec::len).sum::<usize>() * cfg.epochs;
    let mut processed = 0usize;
    let mut scratch = vec![0.0f32; dim];
    let mut targets = Vec::with_capacity(cfg.negative_samples + 1);

    for _ in 0..cfg.epochs {
        for sent in &sentences {
            for (pos, &center) in sent.iter().enumerate() {
                let progress = processed as f64 / (total_words + 1) as f64;
                let lr = (cfg.learning_rate * (1.0 - progress)).max(cfg.learning_rate * 1e-4) as f32;
                processed += 1;
                let reach = cfg.window - rng.random_range(0..cfg.window);
                let lo = pos.saturating_sub(reach);
                let hi = (pos + reach).min(sent.len() - 1);
                for (cpos, &context) in sent.iter().enumerate().take(hi + 1).skip(lo) {
                    if cpos == pos || context == center {
                        continue;
                    }
                    targets.clear();
                    targets.push(context);
                    for _ in 0..cfg.negative_samples {
                        let neg = noise.sample(&mut rng);
                        if neg != context {
                            targets.push(neg);
                        }
                    }
                    let row = &mut input[center * dim..(center + 1) * dim];
                    pair_step(row, &mut output, &targets, lr, &mut scratch);
                }
            }
        }
    }

    let words = vocab.into_iter().map(|(w, _)| w.to_string()).collect();
    EmbeddingTable::new(words, dim, input)
}
