//! Bag-of-words TF-IDF and N-BOW features with a one-vs-rest linear SVM.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use rand::seq::SliceRandom;

use crate::embeddings::{nbow_centroid, EmbeddingTable};
use crate::error::{Error, Result};
use crate::seeded_rng;

/// `(index, value)` pairs with strictly increasing indices.
pub type SparseVec = Vec<(usize, f64)>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TfidfOptions {
    /// Use presence (1) instead of raw counts.
    pub binary_tf: bool,
    /// Scale each document vector to unit L2 length.
    pub normalize: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TfidfModel {
    vocab: HashMap<String, usize>,
    idf: Vec<f64>,
    doc_count: usize,
    options: TfidfOptions,
}

impl TfidfModel {
    /// Vocabulary indices follow lexicographic term order.
    /// `idf = ln((1 + N) / (1 + df)) + 1`.
    pub fn fit<S: AsRef<str>>(corpus: &[Vec<S>], options: TfidfOptions) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut df: BTreeMap<&str, usize> = BTreeMap::new();
        for doc in corpus {
            let terms: BTreeSet<&str> = doc.iter().map(AsRef::as_ref).collect();
            for t in terms {
                *df.entry(t).or_insert(0) += 1;
            }
        }
        let n = corpus.len() as f64;
        let mut vocab = HashMap::with_capacity(df.len());
        let mut idf = Vec::with_capacity(df.len());
        for (i, (term, d)) in df.into_iter().enumerate() {
            vocab.insert(term.to_string(), i);
            idf.push(((1.0 + n) / (1.0 + d as f64)).ln() + 1.0);
        }
        Ok(TfidfModel {
            vocab,
            idf,
            doc_count: corpus.len(),
            options,
        })
    }

    pub fn dim(&self) -> usize {
        self.idf.len()
    }

    pub fn doc_count(&self) -> usize {
        self.doc_count
    }

    pub fn idf(&self) -> &[f64] {
        &self.idf
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.vocab.get(term).copied()
    }

    /// Unknown terms are ignored; an empty document maps to the zero vector.
    pub fn transform<S: AsRef<str>>(&self, doc: &[S]) -> SparseVec {
        let mut tf: BTreeMap<usize, f64> = BTreeMap::new();
        for t in doc {
            if let Some(&i) = self.vocab.get(t.as_ref()) {
                *tf.entry(i).or_insert(0.0) += 1.0;
            }
        }
        let mut v: SparseVec = tf
            .into_iter()
            .map(|(i, c)| {
                let c = if self.options.binary_tf { 1.0 } else { c };
                (i, c * self.idf[i])
            })
            .collect();
        if self.options.normalize {
            let norm = v.iter().map(|(_, x)| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                v.iter_mut().for_each(|(_, x)| *x /= norm);
            }
        }
        v
    }
}

pub fn dense_to_sparse(v: &[f32]) -> SparseVec {
    v.iter()
        .enumerate()
        .filter(|(_, &x)| x != 0.0)
        .map(|(i, &x)| (i, x as f64))
        .collect()
}

fn sparse_dot(w: &[f64], x: &SparseVec) -> f64 {
    x.iter().map(|&(i, v)| w.get(i).copied().unwrap_or(0.0) * v).sum()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SvmConfig {
    pub c_reg: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            c_reg: 0.6,
            epochs: 100,
            seed: 1,
        }
    }
}

/// Primal objective `½(‖w‖² + b²) + C · Σ max(0, 1 − yᵢ(w·xᵢ + b))` of one
/// binary problem with `yᵢ ∈ {−1, +1}`.
pub fn svm_objective(w: &[f64], b: f64, xs: &[SparseVec], ys: &[f64], c_reg: f64) -> f64 {
    let reg = 0.5 * (w.iter().map(|x| x * x).sum::<f64>() + b * b);
    let hinge: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, &y)| (1.0 - y * (sparse_dot(w, x) + b)).max(0.0))
        .sum();
    reg + c_reg * hinge
}

/// A subgradient of [`svm_objective`]; the gradient away from margin 1.
pub fn svm_subgradient(w: &[f64], b: f64, xs: &[SparseVec], ys: &[f64], c_reg: f64) -> (Vec<f64>, f64) {
    let mut gw = w.to_vec();
    let mut gb = b;
    for (x, &y) in xs.iter().zip(ys) {
        if y * (sparse_dot(w, x) + b) < 1.0 {
            for &(i, v) in x {
                gw[i] -= c_reg * y * v;
            }
            gb -= c_reg * y;
        }
    }
    (gw, gb)
}

/// One-vs-rest linear SVM: row `c` scores class `c` against the rest.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearSvm {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub c_reg: f64,
}

/// Pegasos on one binary problem, with the bias as an extra regularized
/// coordinate. Minimizes [`svm_objective`] scaled by `1 / (C·n)`.
fn pegasos(xs: &[SparseVec], ys: &[f64], dim: usize, cfg: &SvmConfig, seed: u64) -> (Vec<f64>, f64) {
    let n = xs.len();
    let lambda = 1.0 / (cfg.c_reg * n as f64);
    // w = scale · v keeps the shrink step O(1) for sparse inputs.
    let mut v = vec![0.0; dim];
    let mut vb = 0.0;
    let mut scale = 1.0;
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = seeded_rng(seed);
    let mut t = 0u64;
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let margin = ys[i] * scale * (sparse_dot(&v, &xs[i]) + vb);
            let shrink = 1.0 - eta * lambda;
            if shrink == 0.0 {
                v.iter_mut().for_each(|x| *x = 0.0);
                vb = 0.0;
                scale = 1.0;
            } else {
                scale *= shrink;
            }
            if margin < 1.0 {
                let step = eta * ys[i] / scale;
                for &(j, x) in &xs[i] {
                    v[j] += step * x;
                }
                vb += step;
            }
            if scale < 1e-9 {
                v.iter_mut().for_each(|x| *x *= scale);
                vb *= scale;
                scale = 1.0;
            }
        }
    }
    (v.iter().map(|x| x * scale).collect(), vb * scale)
}

impl LinearSvm {
    pub fn train(xs: &[SparseVec], labels: &[usize], classes: usize, cfg: &SvmConfig) -> Result<Self> {
        if xs.len() != labels.len() {
            return Err(Error::LengthMismatch {
                what: "features and labels",
                left: xs.len(),
                right: labels.len(),
            });
        }
        if xs.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if let Some(&bad) = labels.iter().find(|&&y| y >= classes) {
            return Err(Error::LabelOutOfRange {
                label: bad,
                num_classes: classes,
            });
        }
        let present: BTreeSet<usize> = labels.iter().copied().collect();
        if present.len() < 2 {
            return Err(Error::SingleClass(labels[0]));
        }
        let dim = xs.iter().flat_map(|x| x.iter().map(|&(i, _)| i + 1)).max().unwrap_or(0);
        let mut weights = Vec::with_capacity(classes);
        let mut bias = Vec::with_capacity(classes);
        for c in 0..classes {
            let ys: Vec<f64> = labels.iter().map(|&y| if y == c { 1.0 } else { -1.0 }).collect();
            let (w, b) = pegasos(xs, &ys, dim, cfg, cfg.seed.wrapping_add(c as u64));
            weights.push(w);
            bias.push(b);
        }
        Ok(LinearSvm {
            weights,
            bias,
            c_reg: cfg.c_reg,
        })
    }

    pub fn scores(&self, x: &SparseVec) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(w, b)| sparse_dot(w, x) + b)
            .collect()
    }

    /// Highest-scoring class; ties go to the lowest id.
    pub fn predict(&self, x: &SparseVec) -> usize {
        crate::ensemble::argmax(&self.scores(x))
    }
}

/// TF-IDF features plus a linear SVM.
#[derive(Clone, Debug)]
pub struct BowClassifier {
    pub tfidf: TfidfModel,
    pub svm: LinearSvm,
}

impl BowClassifier {
    pub fn train<S: AsRef<str>>(
        docs: &[Vec<S>],
        labels: &[usize],
        classes: usize,
        options: TfidfOptions,
        cfg: &SvmConfig,
    ) -> Result<Self> {
        let tfidf = TfidfModel::fit(docs, options)?;
        let xs: Vec<SparseVec> = docs.iter().map(|d| tfidf.transform(d)).collect();
        let svm = LinearSvm::train(&xs, labels, classes, cfg)?;
        Ok(BowClassifier { tfidf, svm })
    }

    pub fn predict<S: AsRef<str>>(&self, doc: &[S]) -> usize {
        self.svm.predict(&self.tfidf.transform(doc))
    }
}

/// Embedding centroids plus a linear SVM.
#[derive(Clone, Debug)]
pub struct NbowClassifier {
    pub svm: LinearSvm,
}

impl NbowClassifier {
    pub fn features<S: AsRef<str>>(doc: &[S], table: &EmbeddingTable) -> SparseVec {
        dense_to_sparse(&nbow_centroid(doc, table))
    }

    pub fn train<S: AsRef<str>>(
        docs: &[Vec<S>],
        labels: &[usize],
        classes: usize,
        table: &EmbeddingTable,
        cfg: &SvmConfig,
    ) -> Result<Self> {
        let xs: Vec<SparseVec> = docs.iter().map(|d| Self::features(d, table)).collect();
        Ok(NbowClassifier {
            svm: LinearSvm::train(&xs, labels, classes, cfg)?,
        })
    }

    pub fn predict<S: AsRef<str>>(&self, doc: &[S], table: &EmbeddingTable) -> usize {
        self.svm.predict(&Self::features(doc, table))
    }
}

/// One line per row: the optional label, then `index:value` pairs.
pub fn dump_features(xs: &[SparseVec], labels: Option<&[usize]>) -> String {
    let mut out = String::new();
    for (r, x) in xs.iter().enumerate() {
        let mut fields: Vec<String> = Vec::with_capacity(x.len() + 1);
        if let Some(l) = labels {
            fields.push(l[r].to_string());
        }
        fields.extend(x.iter().map(|(i, v)| format!("{i}:{v}")));
        let _ = writeln!(out, "{}", fields.join(" "));
    }
    out
}
