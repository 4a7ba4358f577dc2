//! Class-weighted cross-entropy training with Adam, global-norm clipping,
//! mini-batches and early stopping on validation macro-F1.

use std::fmt;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::eval::{confusion, metrics};
use crate::model::{Classifier, Mode};
use crate::tensor::{ParamStore, Real, Tape, Tensor};
use crate::{seeded_rng, SeededRng};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub clip_norm: f64,
    pub adam: AdamConfig,
    pub max_epochs: usize,
    /// Epochs without a validation macro-F1 improvement before stopping.
    pub patience: usize,
    pub seed: u64,
    pub val_fraction: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 32,
            clip_norm: 1.0,
            adam: AdamConfig::default(),
            max_epochs: 50,
            patience: 5,
            seed: 1,
            val_fraction: 0.1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.clip_norm <= 0.0 || !(self.val_fraction > 0.0 && self.val_fraction < 1.0) {
            return Err(Error::Config(format!(
                "need batch_size ≥ 1, clip_norm > 0 and 0 < val_fraction < 1: {self:?}"
            )));
        }
        Ok(())
    }
}

/// `w_c = N / (C · count_c)`.
pub fn class_weights(labels: &[usize], classes: usize) -> Result<Vec<f64>> {
    let mut counts = vec![0usize; classes];
    for &y in labels {
        if y >= classes {
            return Err(Error::LabelOutOfRange {
                label: y,
                num_classes: classes,
            });
        }
        counts[y] += 1;
    }
    if let Some(class) = counts.iter().position(|&c| c == 0) {
        return Err(Error::AbsentClass { class });
    }
    let n = labels.len() as f64;
    Ok(counts.iter().map(|&c| n / (classes as f64 * c as f64)).collect())
}

/// `-w_y · ln max(p_y, 1e-12)`.
pub fn weighted_ce_loss(p: &[f64], y: usize, w: &[f64]) -> f64 {
    -w[y] * p[y].max(1e-12).ln()
}

/// Mean of [`weighted_ce_loss`] over a batch.
pub fn batch_loss(probs: &[Vec<f64>], labels: &[usize], w: &[f64]) -> f64 {
    let total: f64 = probs.iter().zip(labels).map(|(p, &y)| weighted_ce_loss(p, y, w)).sum();
    total / probs.len().max(1) as f64
}

pub fn global_norm<F: Real>(grads: &[Option<Tensor<F>>]) -> F {
    grads
        .iter()
        .flatten()
        .map(|g| g.sum_of_squares())
        .fold(F::zero(), |a, b| a + b)
        .sqrt()
}

/// Rescales all gradients together so their joint L2 norm is at most
/// `max_norm`. Returns the norm before clipping.
pub fn clip_global_norm<F: Real>(grads: &mut [Option<Tensor<F>>], max_norm: f64) -> F {
    let norm = global_norm(grads);
    let max = F::from_f64_lossy(max_norm);
    if norm > max {
        let k = max / norm;
        for g in grads.iter_mut().flatten() {
            g.scale_in_place(k);
        }
    }
    norm
}

/// Adam with bias correction. Frozen parameters are never touched.
#[derive(Clone, Debug)]
pub struct Adam<F> {
    cfg: AdamConfig,
    t: u64,
    m: Vec<Tensor<F>>,
    v: Vec<Tensor<F>>,
}

impl<F: Real> Adam<F> {
    pub fn new(params: &ParamStore<F>, cfg: AdamConfig) -> Self {
        let zeros = || params.iter().map(|(_, p)| Tensor::zeros(p.value.shape())).collect();
        Adam {
            cfg,
            t: 0,
            m: zeros(),
            v: zeros(),
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    /// One update; a missing gradient counts as zero.
    pub fn step(&mut self, params: &mut ParamStore<F>, grads: &[Option<Tensor<F>>]) {
        self.t += 1;
        let c = &self.cfg;
        let (b1, b2) = (F::from_f64_lossy(c.beta1), F::from_f64_lossy(c.beta2));
        let lr = F::from_f64_lossy(c.lr);
        let eps = F::from_f64_lossy(c.eps);
        let t = self.t as i32;
        let corr1 = F::one() - F::from_f64_lossy(c.beta1.powi(t));
        let corr2 = F::one() - F::from_f64_lossy(c.beta2.powi(t));
        for (id, p) in params.iter_mut() {
            if p.frozen {
                continue;
            }
            let g = grads.get(id.0).and_then(Option::as_ref);
            let m = self.m[id.0].data_mut();
            let v = self.v[id.0].data_mut();
            let theta = p.value.data_mut();
            for i in 0..theta.len() {
                let gi = g.map_or(F::zero(), |g| g.data()[i]);
                m[i] = b1 * m[i] + (F::one() - b1) * gi;
                v[i] = b2 * v[i] + (F::one() - b2) * gi * gi;
                let m_hat = m[i] / corr1;
                let v_hat = v[i] / corr2;
                theta[i] -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
    }
}

/// Indices of a stratified split: about `fraction` of every class goes to
/// validation. Returns `(train, validation)`, each sorted.
pub fn stratified_split(labels: &[usize], classes: usize, fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = seeded_rng(seed);
    let mut train = Vec::new();
    let mut val = Vec::new();
    for c in 0..classes {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        idx.shuffle(&mut rng);
        let mut k = (idx.len() as f64 * fraction).round() as usize;
        if idx.len() >= 2 {
            k = k.clamp(1, idx.len() - 1);
        } else {
            k = 0;
        }
        val.extend_from_slice(&idx[..k]);
        train.extend_from_slice(&idx[k..]);
    }
    train.sort_unstable();
    val.sort_unstable();
    (train, val)
}

/// An encoded training example.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Example {
    pub ids: Vec<usize>,
    pub label: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_acc: f64,
    pub val_f1: f64,
}

impl fmt::Display for EpochLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{:.6}\t{:.6}\t{:.6}", self.epoch, self.train_loss, self.val_acc, self.val_f1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainOutcome {
    pub log: Vec<EpochLog>,
    pub best_epoch: usize,
    pub best_val_f1: f64,
    pub best_val_acc: f64,
}

/// Validation accuracy and macro-F1 in evaluation mode.
pub fn evaluate<F: Real>(model: &Classifier<F>, data: &[Example]) -> Result<(f64, f64)> {
    let mut truth = Vec::with_capacity(data.len());
    let mut pred = Vec::with_capacity(data.len());
    for ex in data {
        truth.push(ex.label);
        pred.push(model.predict(&ex.ids)?.class());
    }
    let m = metrics(&confusion(&truth, &pred, model.config().num_classes)?);
    Ok((m.accuracy, m.macro_f1))
}

/// Gradient of the mean weighted loss over `batch`, plus that mean.
pub fn batch_gradient<F: Real>(
    model: &Classifier<F>,
    batch: &[&Example],
    weights: &[f64],
    rng: &mut SeededRng,
) -> Result<(Vec<Option<Tensor<F>>>, f64)> {
    let scale = 1.0 / batch.len() as f64;
    let mut total: Vec<Option<Tensor<F>>> = vec![None; model.params().len()];
    let mut loss_sum = 0.0;
    for ex in batch {
        let mut tape = Tape::new(model.params());
        let w = F::from_f64_lossy(weights[ex.label] * scale);
        let loss = model.loss(&mut tape, &ex.ids, ex.label, w, Mode::Train(rng))?;
        loss_sum += tape.value(loss).data()[0].to_f64().unwrap_or(f64::NAN);
        let grads = tape.backward(loss)?.into_params();
        for (slot, g) in total.iter_mut().zip(grads) {
            match (slot.as_mut(), g) {
                (Some(acc), Some(g)) => acc.add_assign(&g)?,
                (None, Some(g)) => *slot = Some(g),
                _ => {}
            }
        }
    }
    Ok((total, loss_sum))
}

/// Trains `model` in place and leaves it at its best validation epoch.
///
/// Examples are put in a canonical order first, so the result depends on
/// the seed and the multiset of examples but not on their input order.
/// Training stops once `epoch - best_epoch > patience` or after
/// `max_epochs`. `on_epoch` sees each log line as it is produced.
pub fn train<F: Real>(
    model: &mut Classifier<F>,
    train_set: &[Example],
    val_set: &[Example],
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochLog),
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if train_set.is_empty() || val_set.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let classes = model.config().num_classes;
    let mut data: Vec<&Example> = train_set.iter().collect();
    data.sort();
    let labels: Vec<usize> = data.iter().map(|e| e.label).collect();
    let weights = class_weights(&labels, classes)?;

    let mut rng = seeded_rng(cfg.seed);
    let mut adam = Adam::new(model.params(), cfg.adam);
    let mut best: Option<(usize, f64, f64, ParamStore<F>)> = None;
    let mut log = Vec::new();

    for epoch in 1..=cfg.max_epochs {
        data.shuffle(&mut rng);
        let mut loss_total = 0.0;
        for batch in data.chunks(cfg.batch_size) {
            let (mut grads, loss) = batch_gradient(model, batch, &weights, &mut rng)?;
            loss_total += loss * batch.len() as f64;
            clip_global_norm(&mut grads, cfg.clip_norm);
            adam.step(model.params_mut(), &grads);
        }
        let (val_acc, val_f1) = evaluate(model, val_set)?;
        let entry = EpochLog {
            epoch,
            train_loss: loss_total / data.len() as f64,
            val_acc,
            val_f1,
        };
        on_epoch(&entry);
        log.push(entry);

        if best.as_ref().is_none_or(|b| val_f1 > b.1) {
            best = Some((epoch, val_f1, val_acc, model.params().clone()));
        }
        let best_epoch = best.as_ref().map_or(epoch, |b| b.0);
        if epoch - best_epoch > cfg.patience {
            break;
        }
    }

    let (best_epoch, best_val_f1, best_val_acc, params) = best.ok_or(Error::EmptyDataset)?;
    model.set_params(params)?;
    Ok(TrainOutcome {
        log,
        best_epoch,
        best_val_f1,
        best_val_acc,
    })
}
