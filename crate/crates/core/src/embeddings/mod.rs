//! Word vectors: skip-gram training, word2vec text I/O and N-BOW centroids.
//!
//! Vectors are never length-normalized anywhere in this crate; length
//! carries information the classifiers use.

mod skipgram;

pub use skipgram::{negative_sampling_loss, pair_step, train_skipgram, SkipgramConfig};

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Vocabulary plus a dense `V × D` matrix, row `i` belonging to word `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTable {
    words: Vec<String>,
    index: HashMap<String, usize>,
    dim: usize,
    vectors: Vec<f32>,
}

impl EmbeddingTable {
    pub fn new(words: Vec<String>, dim: usize, vectors: Vec<f32>) -> Result<Self> {
        if dim == 0 || vectors.len() != words.len() * dim {
            return Err(Error::ShapeMismatch {
                op: "embedding table",
                left: vec![words.len(), dim],
                right: vec![vectors.len()],
            });
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::Config(format!("duplicate word {w:?} in embedding table")));
            }
        }
        Ok(EmbeddingTable {
            words,
            index,
            dim,
            vectors,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn vector(&self, i: usize) -> &[f32] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    pub fn get(&self, word: &str) -> Option<&[f32]> {
        self.index_of(word).map(|i| self.vector(i))
    }

    pub fn vectors(&self) -> &[f32] {
        &self.vectors
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.len(), self.dim);
        for (i, w) in self.words.iter().enumerate() {
            out.push_str(w);
            for v in self.vector(i) {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
        out
    }

    /// Writes the word2vec text format: a `V D` header, then one line per
    /// word with `D` space-separated decimals.
    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, 0, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, 0, e))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut lines = text.lines().map(|l| l.strip_suffix('\r').unwrap_or(l));
        let header = lines.next().ok_or_else(|| Error::parse(path, 1, "missing header"))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::parse(path, 1, format!("bad header {header:?}")))?;
        let [v, d] = dims[..] else {
            return Err(Error::parse(path, 1, format!("header needs `V D`, got {header:?}")));
        };
        let mut words = Vec::with_capacity(v);
        let mut vectors = Vec::with_capacity(v * d);
        for row in 0..v {
            let line_no = row + 2;
            let line = lines
                .next()
                .ok_or_else(|| Error::parse(path, line_no, format!("expected {v} rows, found {row}")))?;
            let mut fields = line.split(' ').filter(|f| !f.is_empty());
            let word = fields
                .next()
                .ok_or_else(|| Error::parse(path, line_no, "empty row"))?;
            let vals: Vec<f32> = fields
                .map(|f| f.parse::<f32>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::parse(path, line_no, format!("bad number: {e}")))?;
            if vals.len() != d {
                return Err(Error::parse(path, line_no, format!("expected {d} values, found {}", vals.len())));
            }
            if vals.iter().all(|x| x.is_nan()) {
                return Err(Error::parse(path, line_no, "row is all NaN"));
            }
            words.push(word.to_string());
            vectors.extend(vals);
        }
        if let Some((i, _)) = lines.enumerate().find(|(_, l)| !l.trim().is_empty()) {
            return Err(Error::parse(path, v + 2 + i, "more rows than the header declares"));
        }
        Self::new(words, d, vectors).map_err(|e| Error::parse(path, 1, e.to_string()))
    }
}

/// Arithmetic mean of the vectors of in-vocabulary tokens; the zero vector
/// when none is known.
pub fn nbow_centroid<S: AsRef<str>>(tokens: &[S], table: &EmbeddingTable) -> Vec<f32> {
    let mut sum = vec![0.0f64; table.dim()];
    let mut n = 0usize;
    for t in tokens {
        if let Some(v) = table.get(t.as_ref()) {
            for (s, &x) in sum.iter_mut().zip(v) {
                *s += x as f64;
            }
            n += 1;
        }
    }
    if n == 0 {
        return vec![0.0; table.dim()];
    }
    sum.into_iter().map(|s| (s / n as f64) as f32).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table(words: &[&str], dim: usize, vals: &[f32]) -> EmbeddingTable {
        EmbeddingTable::new(words.iter().map(|s| s.to_string()).collect(), dim, vals.to_vec()).unwrap()
    }

    #[test]
    fn text_format() {
        let t = table(&["a", "b"], 3, &[1.0, 2.0, 3.0, -0.5, 0.25, 0.0]);
        assert_eq!(t.to_text(), "2 3\na 1 2 3\nb -0.5 0.25 0\n");
    }

    #[test]
    fn missing_row_reports_line() {
        let err = EmbeddingTable::parse("2 3\na 1 2 3\n", Path::new("e.txt")).unwrap_err();
        assert!(err.to_string().starts_with("e.txt:3:"), "{err}");
    }

    #[test]
    fn malformed_inputs() {
        let p = Path::new("e");
        assert!(EmbeddingTable::parse("", p).is_err());
        assert!(EmbeddingTable::parse("2\n", p).is_err());
        assert!(EmbeddingTable::parse("1 2\na 1\n", p).is_err());
        assert!(EmbeddingTable::parse("1 2\na 1 x\n", p).is_err());
        assert!(EmbeddingTable::parse("1 1\na 1\nb 2\n", p).is_err());
        assert!(EmbeddingTable::parse("2 1\na 1\na 2\n", p).is_err());
        assert!(EmbeddingTable::parse("1 2\na NaN NaN\n", p).is_err());
    }

    #[test]
    fn centroid_of_one_word_is_its_vector() {
        let t = table(&["x", "y"], 2, &[0.3, -0.7, 1.0, 1.0]);
        assert_eq!(nbow_centroid(&["x"], &t), vec![0.3, -0.7]);
    }

    #[test]
    fn centroid_is_arithmetic_mean() {
        let t = table(&["a", "b"], 2, &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(nbow_centroid(&["a", "b"], &t), vec![0.5, 0.5]);
    }

    #[test]
    fn centroid_skips_oov() {
        let t = table(&["a", "b", "c"], 2, &[1.0, 2.0, 3.0, 4.0, -1.0, 6.0]);
        // a + c over 2, "zzz" and "q" ignored: ((1-1)/2, (2+6)/2)
        assert_eq!(nbow_centroid(&["a", "zzz", "c", "q"], &t), vec![0.0, 4.0]);
        assert_eq!(nbow_centroid(&["zzz"], &t), vec![0.0, 0.0]);
        assert_eq!(nbow_centroid::<&str>(&[], &t), vec![0.0, 0.0]);
    }

    proptest! {
        #[test]
        fn save_load_round_trip(
            rows in prop::collection::vec(prop::collection::vec(-1e6f32..1e6f32, 4), 1..8)
        ) {
            let words: Vec<String> = (0..rows.len()).map(|i| format!("w{i}")).collect();
            let t = EmbeddingTable::new(words, 4, rows.concat()).unwrap();
            let back = EmbeddingTable::parse(&t.to_text(), Path::new("mem")).unwrap();
            prop_assert_eq!(back, t);
        }
    }
}
