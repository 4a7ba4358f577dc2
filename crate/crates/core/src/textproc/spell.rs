//! Noisy-channel spell correction over edit distance ≤ 2.

use std::collections::HashSet;

use super::CorpusStats;

const MAX_DISTANCE: usize = 2;
const ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyz";

fn is_lower_alpha(w: &str) -> bool {
    !w.is_empty() && w.bytes().all(|b| b.is_ascii_lowercase())
}

/// Unrestricted Damerau–Levenshtein distance (insert, delete, substitute,
/// adjacent transposition).
pub fn damerau_levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let (n, m) = (a.len(), b.len());
    let inf = n + m;
    // (n+2) × (m+2) table with a sentinel row/column.
    let mut d = vec![vec![0usize; m + 2]; n + 2];
    d[0][0] = inf;
    for i in 0..=n {
        d[i + 1][0] = inf;
        d[i + 1][1] = i;
    }
    for j in 0..=m {
        d[0][j + 1] = inf;
        d[1][j + 1] = j;
    }
    let mut last_row: std::collections::HashMap<char, usize> = std::collections::HashMap::new();
    for i in 1..=n {
        let mut last_match_col = 0;
        for j in 1..=m {
            let i1 = *last_row.get(&b[j - 1]).unwrap_or(&0);
            let j1 = last_match_col;
            let cost = if a[i - 1] == b[j - 1] {
                last_match_col = j;
                0
            } else {
                1
            };
            d[i + 1][j + 1] = (d[i][j] + cost)
                .min(d[i + 1][j] + 1)
                .min(d[i][j + 1] + 1)
                .min(d[i1][j1] + (i - i1 - 1) + 1 + (j - j1 - 1));
        }
        last_row.insert(a[i - 1], i);
    }
    d[n + 1][m + 1]
}

fn edits1(word: &str) -> Vec<String> {
    let w = word.as_bytes();
    let n = w.len();
    let mut out = Vec::with_capacity(54 * n + 25);
    for i in 0..n {
        let mut s = w.to_vec();
        s.remove(i);
        out.push(s);
    }
    for i in 0..n.saturating_sub(1) {
        let mut s = w.to_vec();
        s.swap(i, i + 1);
        out.push(s);
    }
    for i in 0..n {
        for &c in ALPHABET {
            if c != w[i] {
                let mut s = w.to_vec();
                s[i] = c;
                out.push(s);
            }
        }
    }
    for i in 0..=n {
        for &c in ALPHABET {
            let mut s = w.to_vec();
            s.insert(i, c);
            out.push(s);
        }
    }
    out.into_iter()
        .map(|s| String::from_utf8(s).expect("ascii edits"))
        .collect()
}

/// Known lowercase-alphabetic words within distance ≤ 2 of `word`.
fn candidates(word: &str, stats: &CorpusStats) -> Vec<String> {
    let n = word.len();
    // Generating edits costs roughly (54n)^2 lookups; scanning the
    // vocabulary costs one bounded distance per entry. Both yield the same set.
    let generate_cost = (54 * n + 25).pow(2);
    if generate_cost < stats.vocab_size() {
        let mut seen = HashSet::new();
        let first = edits1(word);
        for e1 in &first {
            for e2 in edits1(e1) {
                if stats.contains(&e2) {
                    seen.insert(e2);
                }
            }
            if stats.contains(e1) {
                seen.insert(e1.clone());
            }
        }
        seen.into_iter().collect()
    } else {
        stats
            .unigrams()
            .filter(|(w, _)| is_lower_alpha(w) && w.len().abs_diff(n) <= MAX_DISTANCE)
            .filter(|(w, _)| damerau_levenshtein(word, w) <= MAX_DISTANCE)
            .map(|(w, _)| w.to_string())
            .collect()
    }
}

fn pick<'a>(cands: impl Iterator<Item = (&'a String, f64)>) -> Option<&'a String> {
    let mut best: Option<(&String, f64)> = None;
    for (w, score) in cands {
        best = match best {
            None => Some((w, score)),
            Some((bw, bs)) if score > bs || (score == bs && w < bw) => Some((w, score)),
            keep => keep,
        };
    }
    best.map(|(w, _)| w)
}

/// Returns `word` itself when known, otherwise the most frequent known word
/// within edit distance 2 (ties to the lexicographically smaller word). With
/// no candidate the input comes back unchanged. Inputs that are not
/// lowercase ASCII letters are passed through.
pub fn spell_correct(word: &str, stats: &CorpusStats) -> String {
    if !is_lower_alpha(word) || stats.contains(word) {
        return word.to_string();
    }
    let cands = candidates(word, stats);
    pick(cands.iter().map(|w| (w, stats.count(w) as f64)))
        .cloned()
        .unwrap_or_else(|| word.to_string())
}

/// Like [`spell_correct`] but ranks candidates by an interpolated bigram
/// probability given the preceding word.
pub fn spell_correct_in_context(word: &str, prev: Option<&str>, stats: &CorpusStats) -> String {
    let prev = match prev {
        Some(p) if stats.count(p) > 0 => p,
        _ => return spell_correct(word, stats),
    };
    if !is_lower_alpha(word) || stats.contains(word) {
        return word.to_string();
    }
    let total = stats.total_unigrams().max(1) as f64;
    let prev_count = stats.count(prev) as f64;
    let cands = candidates(word, stats);
    pick(cands.iter().map(|w| {
        let uni = stats.count(w) as f64 / total;
        let bi = stats.bigram_count(prev, w) as f64 / prev_count;
        (w, 0.5 * bi + 0.5 * uni)
    }))
    .cloned()
    .unwrap_or_else(|| word.to_string())
}
