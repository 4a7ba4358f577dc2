//! Confusion matrices, accuracy and precision/recall/F1.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// `m[true][pred]` counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfusionMatrix {
    classes: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(classes: usize) -> Self {
        ConfusionMatrix {
            classes,
            counts: vec![0; classes * classes],
        }
    }

    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self> {
        let c = rows.len();
        if rows.iter().any(|r| r.len() != c) {
            return Err(Error::Config("confusion matrix must be square".into()));
        }
        Ok(ConfusionMatrix {
            classes: c,
            counts: rows.concat(),
        })
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn get(&self, truth: usize, pred: usize) -> u64 {
        self.counts[truth * self.classes + pred]
    }

    pub fn add(&mut self, truth: usize, pred: usize) {
        self.counts[truth * self.classes + pred] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.classes).map(|c| self.get(c, c)).sum()
    }

    pub fn row_sum(&self, truth: usize) -> u64 {
        (0..self.classes).map(|p| self.get(truth, p)).sum()
    }

    pub fn col_sum(&self, pred: usize) -> u64 {
        (0..self.classes).map(|t| self.get(t, pred)).sum()
    }
}

pub fn confusion(y_true: &[usize], y_pred: &[usize], classes: usize) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch {
            what: "true and predicted labels",
            left: y_true.len(),
            right: y_pred.len(),
        });
    }
    let mut cm = ConfusionMatrix::new(classes);
    for (&t, &p) in y_true.iter().zip(y_pred) {
        for label in [t, p] {
            if label >= classes {
                return Err(Error::LabelOutOfRange {
                    label,
                    num_classes: classes,
                });
            }
        }
        cm.add(t, p);
    }
    Ok(cm)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub f1: Vec<f64>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
}

impl Metrics {
    /// F1 of class 1, the usual single score for a binary task.
    pub fn positive_f1(&self) -> f64 {
        self.f1.get(1).copied().unwrap_or(0.0)
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Per-class and macro scores; any zero denominator yields 0.
pub fn metrics(cm: &ConfusionMatrix) -> Metrics {
    let c = cm.classes();
    let mut precision = Vec::with_capacity(c);
    let mut recall = Vec::with_capacity(c);
    let mut f1 = Vec::with_capacity(c);
    for k in 0..c {
        let tp = cm.get(k, k);
        let p = ratio(tp, cm.col_sum(k));
        let r = ratio(tp, cm.row_sum(k));
        // 2·tp / (row + col) is the harmonic mean of p and r without the
        // rounding of dividing twice.
        let f = ratio(2 * tp, cm.row_sum(k) + cm.col_sum(k));
        precision.push(p);
        recall.push(r);
        f1.push(f);
    }
    let mean = |v: &[f64]| if v.is_empty() { 0.0 } else { v.iter().sum::<f64>() / v.len() as f64 };
    Metrics {
        accuracy: ratio(cm.trace(), cm.total()),
        macro_precision: mean(&precision),
        macro_recall: mean(&recall),
        macro_f1: mean(&f1),
        precision,
        recall,
        f1,
    }
}

/// Text table with columns Acc, Prec, Rec, F1: one row for macro averages
/// and, for two classes, one for the positive class.
pub fn report(name: &str, m: &Metrics) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<24} {:>7} {:>7} {:>7} {:>7}", "model", "Acc", "Prec", "Rec", "F1");
    let _ = writeln!(
        out,
        "{:<24} {:>7.4} {:>7.4} {:>7.4} {:>7.4}",
        format!("{name} (macro)"),
        m.accuracy,
        m.macro_precision,
        m.macro_recall,
        m.macro_f1
    );
    if m.f1.len() == 2 {
        let _ = writeln!(
            out,
            "{:<24} {:>7.4} {:>7.4} {:>7.4} {:>7.4}",
            format!("{name} (positive)"),
            m.accuracy,
            m.precision[1],
            m.recall[1],
            m.f1[1]
        );
    }
    out
}
