//! Combining posteriors of several models: unweighted averaging (UA) and
//! majority voting (MV).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

fn check_lengths(posteriors: &[&[f64]]) -> Result<usize> {
    let c = posteriors.first().ok_or(Error::EmptyDataset)?.len();
    for p in posteriors {
        if p.len() != c {
            return Err(Error::LengthMismatch {
                what: "posterior classes",
                left: c,
                right: p.len(),
            });
        }
    }
    Ok(c)
}

/// Scores closer than this count as tied, so averaging round-off cannot
/// break a tie that is exact in real arithmetic.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// First index of the maximum.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] + TIE_TOLERANCE {
            best = i;
        }
    }
    best
}

/// Elementwise mean of the posteriors and its argmax (lowest class on ties).
pub fn unweighted_average(posteriors: &[&[f64]]) -> Result<(usize, Vec<f64>)> {
    let c = check_lengths(posteriors)?;
    let mut mean = vec![0.0; c];
    for p in posteriors {
        for (m, &x) in mean.iter_mut().zip(p.iter()) {
            *m += x;
        }
    }
    let m = posteriors.len() as f64;
    mean.iter_mut().for_each(|x| *x /= m);
    Ok((argmax(&mean), mean))
}

/// The class with most votes among each model's argmax. Ties go to the tied
/// class with the highest averaged posterior, then to the lowest id.
pub fn majority_vote(posteriors: &[&[f64]]) -> Result<usize> {
    let c = check_lengths(posteriors)?;
    let mut votes = vec![0usize; c];
    for p in posteriors {
        votes[argmax(p)] += 1;
    }
    let top = *votes.iter().max().expect("c ≥ 1");
    let tied: Vec<usize> = (0..c).filter(|&k| votes[k] == top).collect();
    if tied.len() == 1 {
        return Ok(tied[0]);
    }
    let (_, mean) = unweighted_average(posteriors)?;
    let mut best = tied[0];
    for &k in &tied[1..] {
        if mean[k] > mean[best] + TIE_TOLERANCE {
            best = k;
        }
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnsembleMode {
    Ua,
    Mv,
}

impl std::str::FromStr for EnsembleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ua" => Ok(EnsembleMode::Ua),
            "mv" => Ok(EnsembleMode::Mv),
            other => Err(Error::Config(format!("unknown ensemble mode {other:?} (expected ua|mv)"))),
        }
    }
}

/// Posteriors of one model over a dataset, in file order.
#[derive(Clone, Debug, PartialEq)]
pub struct PosteriorFile {
    pub ids: Vec<String>,
    pub probs: Vec<Vec<f64>>,
}

impl PosteriorFile {
    /// One line per example: `id<TAB>p_0 p_1 … p_{C-1}`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (id, p) in self.ids.iter().zip(&self.probs) {
            let row: Vec<String> = p.iter().map(|x| format!("{x}")).collect();
            let _ = writeln!(out, "{id}\t{}", row.join(" "));
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, 0, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, 0, e))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut ids = Vec::new();
        let mut probs: Vec<Vec<f64>> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.strip_suffix('\r').unwrap_or(line);
            if line.trim().is_empty() {
                continue;
            }
            let (id, rest) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(path, i + 1, "expected id<TAB>probabilities"))?;
            let p: Vec<f64> = rest
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::parse(path, i + 1, format!("bad probability: {e}")))?;
            if p.is_empty() || probs.first().is_some_and(|q| q.len() != p.len()) {
                return Err(Error::parse(path, i + 1, "inconsistent number of classes"));
            }
            ids.push(id.to_string());
            probs.push(p);
        }
        Ok(PosteriorFile { ids, probs })
    }
}

/// Per-example ensemble decisions over aligned posterior files.
pub fn ensemble_files(files: &[PosteriorFile], mode: EnsembleMode) -> Result<Vec<(String, usize)>> {
    let first = files.first().ok_or(Error::EmptyDataset)?;
    for f in &files[1..] {
        if f.ids != first.ids {
            return Err(Error::Config("posterior files list different example ids".into()));
        }
    }
    (0..first.ids.len())
        .map(|i| {
            let rows: Vec<&[f64]> = files.iter().map(|f| f.probs[i].as_slice()).collect();
            let class = match mode {
                EnsembleMode::Ua => unweighted_average(&rows)?.0,
                EnsembleMode::Mv => majority_vote(&rows)?,
            };
            Ok((first.ids[i].clone(), class))
        })
        .collect()
}
