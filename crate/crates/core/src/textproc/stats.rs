use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::io::BufRead;
use std::path::Path;

use super::tokenize;
use crate::error::{Error, Result};

const FIXTURE: &str = include_str!("../../data/fixture_stats.tsv");

/// Unigram and bigram counts over a tokenized, lowercased corpus.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CorpusStats {
    unigram: HashMap<String, u64>,
    bigram: HashMap<(String, String), u64>,
    total_unigrams: u64,
}

impl CorpusStats {
    pub fn new() -> Self {
        Self::default()
    }

    /// Small bundled statistics, enough to drive the example pipeline.
    pub fn fixture() -> Self {
        Self::parse(FIXTURE, Path::new("<fixture>")).expect("bundled fixture parses")
    }

    /// Counts the tokens of one line. Tokens containing whitespace (dates
    /// such as `may 21, 2017`) are skipped and break bigram adjacency.
    pub fn add_line(&mut self, line: &str) {
        let mut prev: Option<String> = None;
        for tok in tokenize(line) {
            if tok.chars().any(char::is_whitespace) {
                prev = None;
                continue;
            }
            let tok = tok.to_lowercase();
            *self.unigram.entry(tok.clone()).or_insert(0) += 1;
            self.total_unigrams += 1;
            if let Some(p) = prev.take() {
                *self.bigram.entry((p, tok.clone())).or_insert(0) += 1;
            }
            prev = Some(tok);
        }
    }

    pub fn count(&self, word: &str) -> u64 {
        self.unigram.get(word).copied().unwrap_or(0)
    }

    pub fn bigram_count(&self, first: &str, second: &str) -> u64 {
        self.bigram
            .get(&(first.to_string(), second.to_string()))
            .copied()
            .unwrap_or(0)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.unigram.contains_key(word)
    }

    pub fn total_unigrams(&self) -> u64 {
        self.total_unigrams
    }

    pub fn vocab_size(&self) -> usize {
        self.unigram.len()
    }

    pub fn unigrams(&self) -> impl Iterator<Item = (&str, u64)> {
        self.unigram.iter().map(|(w, &c)| (w.as_str(), c))
    }

    pub fn bigrams(&self) -> impl Iterator<Item = ((&str, &str), u64)> {
        self.bigram.iter().map(|((a, b), &c)| ((a.as_str(), b.as_str()), c))
    }

    /// `word<TAB>count` lines, a blank line, then `w1 w2<TAB>count` lines.
    /// Both sections are sorted so output is byte-stable.
    pub fn to_text(&self) -> String {
        let mut uni: Vec<_> = self.unigram.iter().collect();
        uni.sort();
        let mut bi: Vec<_> = self.bigram.iter().collect();
        bi.sort();
        let mut out = String::new();
        for (w, c) in uni {
            let _ = writeln!(out, "{w}\t{c}");
        }
        out.push('\n');
        for ((a, b), c) in bi {
            let _ = writeln!(out, "{a} {b}\t{c}");
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
        let mut stats = CorpusStats::new();
        let mut in_bigrams = false;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            if line.is_empty() {
                if in_bigrams {
                    return Err(Error::parse(path, line_no, "unexpected blank line in bigram section"));
                }
                in_bigrams = true;
                continue;
            }
            let (key, count) = line
                .rsplit_once('\t')
                .ok_or_else(|| Error::parse(path, line_no, "expected <key>\\t<count>"))?;
            let count: u64 = count
                .parse()
                .map_err(|_| Error::parse(path, line_no, format!("bad count {count:?}")))?;
            if in_bigrams {
                let (a, b) = key
                    .split_once(' ')
                    .ok_or_else(|| Error::parse(path, line_no, "bigram key needs two words"))?;
                if !stats.unigram.contains_key(a) || !stats.unigram.contains_key(b) {
                    return Err(Error::parse(path, line_no, "bigram word missing from unigram section"));
                }
                stats.bigram.insert((a.to_string(), b.to_string()), count);
            } else {
                if key.is_empty() || key.contains(' ') {
                    return Err(Error::parse(path, line_no, format!("bad unigram key {key:?}")));
                }
                stats.total_unigrams += count;
                stats.unigram.insert(key.to_string(), count);
            }
        }
        Ok(stats)
    }
}

/// Counts unigrams and within-line bigrams over a stream of raw lines.
///
/// I/O failures report the 1-based line at which reading stopped.
pub fn build_corpus_stats<R: BufRead>(reader: R, origin: &Path) -> Result<CorpusStats> {
    let mut stats = CorpusStats::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(origin, i + 1, e))?;
        stats.add_line(&line);
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn build(lines: &[&str]) -> CorpusStats {
        build_corpus_stats(Cursor::new(lines.join("\n")), Path::new("mem")).unwrap()
    }

    #[test]
    fn direct_count() {
        let s = build(&["a b a"]);
        assert_eq!(s.count("a"), 2);
        assert_eq!(s.count("b"), 1);
        assert_eq!(s.bigram_count("a", "b"), 1);
        assert_eq!(s.bigram_count("b", "a"), 1);
        assert_eq!(s.bigrams().count(), 2);
        assert_eq!(s.total_unigrams(), 3);
    }

    #[test]
    fn empty_corpus() {
        let s = build(&[]);
        assert_eq!(s.total_unigrams(), 0);
        assert_eq!(s.vocab_size(), 0);
    }

    #[test]
    fn bigrams_do_not_cross_lines() {
        let s = build(&["x y", "z"]);
        assert_eq!(s.bigram_count("y", "z"), 0);
    }

    #[test]
    fn text_round_trip() {
        let s = build(&["The cat sat", "the CAT ran !!!"]);
        let back = CorpusStats::parse(&s.to_text(), Path::new("mem")).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = CorpusStats::parse("a\t1\nb\tx\n", Path::new("f")).unwrap_err();
        assert!(err.to_string().contains("f:2"), "{err}");
        let err = CorpusStats::parse("a\t1\n\na c\t1\n", Path::new("f")).unwrap_err();
        assert!(err.to_string().contains("f:3"), "{err}");
    }

    #[test]
    fn fixture_invariants() {
        let s = CorpusStats::fixture();
        assert_eq!(s.total_unigrams(), s.unigrams().map(|(_, c)| c).sum::<u64>());
        for ((a, b), _) in s.bigrams() {
            assert!(s.contains(a) && s.contains(b));
        }
    }
}

#[cfg(test)]
mod fixture_tests {
    use super::*;
    use std::io::Cursor;

    const CORPUS: &str = include_str!("../../data/fixture_corpus.txt");

    /// The bundled stats file is exactly what the bundled corpus produces.
    /// Set `REGENERATE_FIXTURE=1` to rewrite it after editing the corpus.
    #[test]
    fn fixture_matches_corpus() {
        let built = build_corpus_stats(Cursor::new(CORPUS), Path::new("fixture_corpus.txt")).unwrap();
        if std::env::var_os("REGENERATE_FIXTURE").is_some() {
            let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/fixture_stats.tsv");
            built.save(&path).unwrap();
            return;
        }
        assert_eq!(built, CorpusStats::fixture());
    }
}
