//! Embedding → 2-layer BiLSTM → attention → softmax classifier, at word or
//! character level.

mod checkpoint;
mod layers;
mod vocab;

pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointMeta};
pub use layers::{attention, bilstm_layer, bilstm_stack, lstm_cell, lstm_sequence, lstm_step, output_layer, LstmParams};
pub use vocab::{Vocab, UNK_CHAR, UNK_WORD};

use std::fmt;
use std::str::FromStr;

use crate::embeddings::EmbeddingTable;
use crate::error::{Error, Result};
use crate::tensor::{dropout_mask, gaussian_noise, ParamId, ParamStore, Real, Tape, Tensor, Var};
use crate::textproc::{render, AnnotatedToken};
use crate::SeededRng;

const INIT_RANGE: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Level {
    Word,
    Char,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Word => "word",
            Level::Char => "char",
        })
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "word" => Ok(Level::Word),
            "char" => Ok(Level::Char),
            other => Err(Error::Config(format!("unknown level {other:?} (expected word|char)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    pub level: Level,
    pub embed_dim: usize,
    /// LSTM size per direction; annotations are `2 × hidden` wide.
    pub hidden: usize,
    pub num_classes: usize,
    /// Standard deviation of the additive embedding noise.
    pub noise_sigma: f64,
    pub emb_dropout: f64,
    /// Dropout on the first BiLSTM layer's output.
    pub lstm_dropout: f64,
    pub freeze_embeddings: bool,
    /// Inputs are truncated to this many tokens (or characters).
    pub max_len: usize,
}

impl ModelConfig {
    /// Word model: 300-d frozen pre-trained embeddings, noise 0.05,
    /// embedding dropout 0.1, LSTM 150 ×2, LSTM dropout 0.2.
    pub fn word(num_classes: usize) -> Self {
        ModelConfig {
            level: Level::Word,
            embed_dim: 300,
            hidden: 150,
            num_classes,
            noise_sigma: 0.05,
            emb_dropout: 0.1,
            lstm_dropout: 0.2,
            freeze_embeddings: true,
            max_len: 50,
        }
    }

    /// Character model: 25-d learned embeddings, no noise, no embedding
    /// dropout, LSTM 150 ×2, LSTM dropout 0.2.
    pub fn char(num_classes: usize) -> Self {
        ModelConfig {
            level: Level::Char,
            embed_dim: 25,
            hidden: 150,
            num_classes,
            noise_sigma: 0.0,
            emb_dropout: 0.0,
            lstm_dropout: 0.2,
            freeze_embeddings: false,
            max_len: 280,
        }
    }

    pub fn for_level(level: Level, num_classes: usize) -> Self {
        match level {
            Level::Word => Self::word(num_classes),
            Level::Char => Self::char(num_classes),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let rate_ok = |p: f64| (0.0..1.0).contains(&p);
        if self.embed_dim == 0 || self.hidden == 0 || self.num_classes < 2 || self.max_len == 0 {
            return Err(Error::Config(format!("model sizes must be positive and classes ≥ 2: {self:?}")));
        }
        if !rate_ok(self.emb_dropout) || !rate_ok(self.lstm_dropout) || self.noise_sigma < 0.0 {
            return Err(Error::Config(format!("bad regularization rates: {self:?}")));
        }
        Ok(())
    }
}

/// Parameter handles of a classifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModelIds {
    pub embedding: ParamId,
    /// `layers[layer][direction]`, direction 0 forward, 1 backward.
    pub layers: [[LstmParams; 2]; 2],
    /// `[2H × 1]`
    pub att_w: ParamId,
    /// `[1 × 1]`
    pub att_b: ParamId,
    /// `[2H × C]`; the transpose of the usual `W` in `W·r + b`.
    pub out_w: ParamId,
    /// `[1 × C]`
    pub out_b: ParamId,
}

/// Whether regularizers are active. Training owns the random stream.
pub enum Mode<'r> {
    Eval,
    Train(&'r mut SeededRng),
}

/// Handles to the outputs of one forward pass.
#[derive(Clone, Copy, Debug)]
pub struct Forward {
    /// Class probabilities, `[1 × C]`.
    pub probs: Var,
    /// Attention weights, `[T × 1]`.
    pub attention: Var,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction<F> {
    pub probs: Vec<F>,
    pub attention: Vec<F>,
}

impl<F: Real> Prediction<F> {
    /// Most probable class; ties go to the lowest id.
    pub fn class(&self) -> usize {
        let mut best = 0;
        for (c, &p) in self.probs.iter().enumerate() {
            if p > self.probs[best] {
                best = c;
            }
        }
        best
    }
}

#[derive(Clone, Debug)]
pub struct Classifier<F> {
    config: ModelConfig,
    vocab: Vocab,
    params: ParamStore<F>,
    ids: ModelIds,
}

impl<F: Real> Classifier<F> {
    /// Word-level model initialized from pre-trained vectors. Words missing
    /// from the table map to a zero `<unk>` row.
    pub fn new_word(config: ModelConfig, table: &EmbeddingTable, rng: &mut SeededRng) -> Result<Self> {
        if table.dim() != config.embed_dim {
            return Err(Error::EmbeddingDim {
                found: table.dim(),
                expected: config.embed_dim,
            });
        }
        let vocab = Vocab::for_words(table);
        let mut data: Vec<F> = table.vectors().iter().map(|&v| F::from_f64_lossy(v as f64)).collect();
        data.resize(vocab.len() * config.embed_dim, F::zero());
        let emb = Tensor::matrix(vocab.len(), config.embed_dim, data)?;
        Self::build(config, vocab, emb, &mut |shape| Tensor::uniform(shape, -INIT_RANGE, INIT_RANGE, rng))
    }

    /// Model whose embeddings start uniform in ±0.05 and are learned.
    pub fn new_random(config: ModelConfig, vocab: Vocab, rng: &mut SeededRng) -> Result<Self> {
        let emb = Tensor::uniform(&[vocab.len(), config.embed_dim], -INIT_RANGE, INIT_RANGE, rng);
        Self::build(config, vocab, emb, &mut |shape| Tensor::uniform(shape, -INIT_RANGE, INIT_RANGE, rng))
    }

    /// Allocates parameters in a fixed order; `init` fills weight matrices,
    /// biases start at zero.
    fn build(
        config: ModelConfig,
        vocab: Vocab,
        embedding: Tensor<F>,
        init: &mut dyn FnMut(&[usize]) -> Tensor<F>,
    ) -> Result<Self> {
        config.validate()?;
        let (d, h, c) = (config.embed_dim, config.hidden, config.num_classes);
        let mut params = ParamStore::new();
        let embedding = params.add("embedding", embedding, config.freeze_embeddings);
        let mut cell = |params: &mut ParamStore<F>, name: &str, input: usize| LstmParams {
            w_x: params.add(format!("{name}.w_x"), init(&[input, 4 * h]), false),
            w_h: params.add(format!("{name}.w_h"), init(&[h, 4 * h]), false),
            b: params.add(format!("{name}.b"), Tensor::zeros(&[1, 4 * h]), false),
            hidden: h,
        };
        let layers = [
            [cell(&mut params, "lstm1.fwd", d), cell(&mut params, "lstm1.bwd", d)],
            [cell(&mut params, "lstm2.fwd", 2 * h), cell(&mut params, "lstm2.bwd", 2 * h)],
        ];
        let att_w = params.add("attention.w", init(&[2 * h, 1]), false);
        let att_b = params.add("attention.b", Tensor::zeros(&[1, 1]), false);
        let out_w = params.add("output.w", init(&[2 * h, c]), false);
        let out_b = params.add("output.b", Tensor::zeros(&[1, c]), false);
        Ok(Classifier {
            config,
            vocab,
            params,
            ids: ModelIds {
                embedding,
                layers,
                att_w,
                att_b,
                out_w,
                out_b,
            },
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn params(&self) -> &ParamStore<F> {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamStore<F> {
        &mut self.params
    }

    pub fn ids(&self) -> &ModelIds {
        &self.ids
    }

    pub fn embedding(&self) -> &Tensor<F> {
        &self.params.get(self.ids.embedding).value
    }

    /// Input ids for a preprocessed tweet: tokens for the word model, the
    /// characters of the space-joined text for the character model.
    pub fn encode(&self, seq: &[AnnotatedToken]) -> Vec<usize> {
        match self.config.level {
            Level::Word => {
                let surfaces: Vec<&str> = seq.iter().map(|t| t.surface()).collect();
                self.vocab.encode(&surfaces, self.config.max_len)
            }
            Level::Char => self.vocab.encode_chars(&render(seq), self.config.max_len),
        }
    }

    /// Input ids for already-joined text (tokens split on spaces for the
    /// word model).
    pub fn encode_text(&self, text: &str) -> Vec<usize> {
        match self.config.level {
            Level::Word => {
                let toks: Vec<&str> = text.split_whitespace().collect();
                self.vocab.encode(&toks, self.config.max_len)
            }
            Level::Char => self.vocab.encode_chars(text, self.config.max_len),
        }
    }

    /// Records the full network on `tape`.
    ///
    /// In training mode Gaussian noise and then dropout are applied to the
    /// embeddings, and dropout to the first BiLSTM layer's output.
    pub fn forward(&self, tape: &mut Tape<'_, F>, ids: &[usize], mode: Mode<'_>) -> Result<Forward> {
        if ids.is_empty() {
            return Err(Error::EmptySequence);
        }
        let cfg = &self.config;
        let table = tape.param(self.ids.embedding);
        let mut x = tape.gather(table, ids)?;
        let t_len = ids.len();
        let mut between = None;
        if let Mode::Train(rng) = mode {
            if cfg.noise_sigma > 0.0 {
                let noise = tape.constant(gaussian_noise(&[t_len, cfg.embed_dim], cfg.noise_sigma, rng));
                x = tape.add(x, noise)?;
            }
            if cfg.emb_dropout > 0.0 {
                let mask = tape.constant(dropout_mask(&[t_len, cfg.embed_dim], cfg.emb_dropout, rng));
                x = tape.mul(x, mask)?;
            }
            if cfg.lstm_dropout > 0.0 {
                between = Some(tape.constant(dropout_mask(&[t_len, 2 * cfg.hidden], cfg.lstm_dropout, rng)));
            }
        }
        let h = bilstm_stack(tape, x, &self.ids.layers, between)?;
        let (att_w, att_b) = (tape.param(self.ids.att_w), tape.param(self.ids.att_b));
        let (a, r) = attention(tape, h, att_w, att_b)?;
        let (out_w, out_b) = (tape.param(self.ids.out_w), tape.param(self.ids.out_b));
        let probs = output_layer(tape, r, out_w, out_b)?;
        Ok(Forward { probs, attention: a })
    }

    /// `-weight · ln p_label` for one example.
    pub fn loss(&self, tape: &mut Tape<'_, F>, ids: &[usize], label: usize, weight: F, mode: Mode<'_>) -> Result<Var> {
        if label >= self.config.num_classes {
            return Err(Error::LabelOutOfRange {
                label,
                num_classes: self.config.num_classes,
            });
        }
        let out = self.forward(tape, ids, mode)?;
        tape.neg_log_pick(out.probs, label, weight)
    }

    /// Deterministic evaluation-mode forward pass.
    pub fn predict(&self, ids: &[usize]) -> Result<Prediction<F>> {
        let mut tape = Tape::new(&self.params);
        let out = self.forward(&mut tape, ids, Mode::Eval)?;
        Ok(Prediction {
            probs: tape.value(out.probs).data().to_vec(),
            attention: tape.value(out.attention).data().to_vec(),
        })
    }

    pub fn cast<G: Real>(&self) -> Classifier<G> {
        Classifier {
            config: self.config.clone(),
            vocab: self.vocab.clone(),
            params: self.params.cast(),
            ids: self.ids,
        }
    }

    /// Replaces all parameter values (shapes must match).
    pub fn set_params(&mut self, params: ParamStore<F>) -> Result<()> {
        if params.len() != self.params.len() {
            return Err(Error::LengthMismatch {
                what: "parameter count",
                left: self.params.len(),
                right: params.len(),
            });
        }
        for ((_, a), (_, b)) in self.params.iter().zip(params.iter()) {
            if a.value.shape() != b.value.shape() {
                return Err(Error::ShapeMismatch {
                    op: "set_params",
                    left: a.value.shape().to_vec(),
                    right: b.value.shape().to_vec(),
                });
            }
        }
        self.params = params;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeded_rng;
    use crate::tensor::grad_check;

    fn tiny(level: Level) -> Classifier<f64> {
        let mut rng = seeded_rng(7);
        let cfg = ModelConfig {
            embed_dim: 4,
            hidden: 3,
            num_classes: 4,
            ..ModelConfig::for_level(level, 4)
        };
        match level {
            Level::Word => {
                let words: Vec<String> = (0..6).map(|i| format!("w{i}")).collect();
                let vals = (0..24).map(|i| ((i * 37 % 11) as f32 - 5.0) / 10.0).collect();
                let table = EmbeddingTable::new(words, 4, vals).unwrap();
                Classifier::new_word(cfg, &table, &mut rng).unwrap()
            }
            Level::Char => Classifier::new_random(cfg, Vocab::for_chars(&["abcde"]), &mut rng).unwrap(),
        }
    }

    #[test]
    fn preset_hyper_parameters() {
        let w = ModelConfig::word(2);
        assert_eq!((w.embed_dim, w.hidden, w.noise_sigma, w.emb_dropout, w.lstm_dropout), (300, 150, 0.05, 0.1, 0.2));
        assert!(w.freeze_embeddings);
        let c = ModelConfig::char(4);
        assert_eq!((c.embed_dim, c.hidden, c.noise_sigma, c.emb_dropout, c.lstm_dropout), (25, 150, 0.0, 0.0, 0.2));
        assert!(!c.freeze_embeddings);
    }

    #[test]
    fn dimension_mismatch_names_both() {
        let table = EmbeddingTable::new(vec!["a".into()], 3, vec![0.0; 3]).unwrap();
        let err = Classifier::<f32>::new_word(ModelConfig::word(2), &table, &mut seeded_rng(1)).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains('3') && msg.contains("300"), "{msg}");
    }

    #[test]
    fn unk_row_is_zero() {
        let m = tiny(Level::Word);
        let unk = m.vocab().unk();
        assert_eq!(m.embedding().row(unk), &[0.0; 4]);
    }

    #[test]
    fn shapes_of_annotations() {
        let mut rng = seeded_rng(2);
        let mut store = ParamStore::<f32>::new();
        let mk = |store: &mut ParamStore<f32>, rng: &mut SeededRng, input: usize| LstmParams {
            w_x: store.add("w_x", Tensor::uniform(&[input, 600], -0.05, 0.05, rng), false),
            w_h: store.add("w_h", Tensor::uniform(&[150, 600], -0.05, 0.05, rng), false),
            b: store.add("b", Tensor::zeros(&[1, 600]), false),
            hidden: 150,
        };
        let layers = [
            [mk(&mut store, &mut rng, 8), mk(&mut store, &mut rng, 8)],
            [mk(&mut store, &mut rng, 300), mk(&mut store, &mut rng, 300)],
        ];
        let mut tape = Tape::new(&store);
        let x = tape.constant(Tensor::uniform(&[7, 8], -1.0, 1.0, &mut rng));
        let h = bilstm_stack(&mut tape, x, &layers, None).unwrap();
        assert_eq!(tape.value(h).shape(), &[7, 300]);
    }

    #[test]
    fn single_step_sequence() {
        let m = tiny(Level::Word);
        let p = m.predict(&[2]).unwrap();
        assert_eq!(p.attention, vec![1.0]);
        assert!((p.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reversal_symmetry_with_swapped_directions() {
        // Reversing the input and swapping forward/backward cells reverses
        // the rows of H and swaps its halves.
        let m = tiny(Level::Char);
        let layer = m.ids().layers[0];
        let mut rng = seeded_rng(5);
        let x = Tensor::<f64>::uniform(&[5, 4], -1.0, 1.0, &mut rng);
        let mut rev_rows = Vec::new();
        for t in (0..5).rev() {
            rev_rows.extend_from_slice(x.row(t));
        }
        let xr = Tensor::matrix(5, 4, rev_rows).unwrap();

        let mut tape = Tape::new(m.params());
        let xv = tape.constant(x);
        let h = bilstm_layer(&mut tape, xv, &layer[0], &layer[1]).unwrap();
        let xrv = tape.constant(xr);
        let hr = bilstm_layer(&mut tape, xrv, &layer[1], &layer[0]).unwrap();
        let (h, hr) = (tape.value(h), tape.value(hr));
        for t in 0..5 {
            let row = h.row(t);
            let mirrored = hr.row(4 - t);
            assert_eq!(&row[..3], &mirrored[3..]);
            assert_eq!(&row[3..], &mirrored[..3]);
        }
    }

    #[test]
    fn eval_is_deterministic_and_train_without_regularizers_matches() {
        let m = tiny(Level::Char);
        let ids = [0, 3, 1, 4, 4, 2];
        let a = m.predict(&ids).unwrap();
        let b = m.predict(&ids).unwrap();
        assert_eq!(a, b);

        let mut quiet = m.clone();
        quiet.config.lstm_dropout = 0.0;
        let mut rng = seeded_rng(3);
        let mut tape = Tape::new(quiet.params());
        let out = quiet.forward(&mut tape, &ids, Mode::Train(&mut rng)).unwrap();
        assert_eq!(tape.value(out.probs).data(), a.probs.as_slice());
    }

    #[test]
    fn empty_input_rejected() {
        assert!(matches!(tiny(Level::Word).predict(&[]), Err(Error::EmptySequence)));
    }

    #[test]
    fn lstm_gradient_through_three_steps() {
        let mut store = ParamStore::<f64>::new();
        let mut rng = seeded_rng(21);
        let cell = LstmParams {
            w_x: store.add("w_x", Tensor::uniform(&[2, 12], -0.5, 0.5, &mut rng), false),
            w_h: store.add("w_h", Tensor::uniform(&[3, 12], -0.5, 0.5, &mut rng), false),
            b: store.add("b", Tensor::uniform(&[1, 12], -0.5, 0.5, &mut rng), false),
            hidden: 3,
        };
        let x = store.add("x", Tensor::uniform(&[3, 2], -1.0, 1.0, &mut rng), false);
        let err = grad_check(&mut store, 1e-5, 1000, |tape| {
            let xv = tape.param(x);
            let hs = lstm_sequence(tape, xv, &cell, false)?;
            let last = *hs.last().unwrap();
            let sq = tape.mul(last, last)?;
            Ok(tape.sum(sq))
        })
        .unwrap();
        assert!(err < 1e-4, "{err}");
    }

    #[test]
    fn full_model_gradient_check() {
        for level in [Level::Word, Level::Char] {
            let mut m = tiny(level);
            // Rescale away from the ±0.05 init so gradients sit well above
            // finite-difference round-off.
            let mut rng = seeded_rng(1);
            for (_, p) in m.params.iter_mut() {
                let shape = p.value.shape().to_vec();
                p.value = Tensor::uniform(&shape, -1.0, 1.0, &mut rng);
            }
            let ids = [1, 0, 4, 2, 3];
            let model = m.clone();
            let err = grad_check(&mut m.params, 1e-5, usize::MAX, |tape| model.loss(tape, &ids, 2, 1.3, Mode::Eval)).unwrap();
            assert!(err < 1e-4, "{level}: {err}");
        }
    }
}
