//! Viterbi segmentation of concatenated words (hashtag bodies).

use super::CorpusStats;

/// Mass given to an unseen chunk before the length penalty.
const UNKNOWN_MASS: f64 = 1.0;
/// Interpolation weight of the bigram estimate when bigrams are enabled.
const BIGRAM_LAMBDA: f64 = 0.5;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SegmentOptions {
    /// Score each word by an interpolated bigram estimate given the
    /// previous word instead of its unigram probability alone.
    pub bigrams: bool,
}

fn total(stats: &CorpusStats) -> f64 {
    stats.total_unigrams().max(1) as f64
}

/// `ln(ε / (N · 10^len))` for a chunk never seen in the corpus.
pub fn unknown_word_logprob(word: &str, stats: &CorpusStats) -> f64 {
    let len = word.chars().count() as f64;
    UNKNOWN_MASS.ln() - total(stats).ln() - len * std::f64::consts::LN_10
}

/// Unigram log-probability, falling back to the unknown-word penalty.
pub fn word_logprob(word: &str, stats: &CorpusStats) -> f64 {
    match stats.count(word) {
        0 => unknown_word_logprob(word, stats),
        c => (c as f64).ln() - total(stats).ln(),
    }
}

fn conditional_logprob(word: &str, prev: Option<&str>, stats: &CorpusStats) -> f64 {
    let uni = word_logprob(word, stats).exp();
    let prev = match prev {
        Some(p) if stats.count(p) > 0 => p,
        _ => return uni.ln(),
    };
    let bi = stats.bigram_count(prev, word) as f64 / stats.count(prev) as f64;
    (BIGRAM_LAMBDA * bi + (1.0 - BIGRAM_LAMBDA) * uni).ln()
}

/// Log-probability of a segmentation under the unigram model.
pub fn segmentation_score(words: &[&str], stats: &CorpusStats) -> f64 {
    words.iter().map(|w| word_logprob(w, stats)).sum()
}

/// Unigram segmentation; see [`segment_word_with`].
pub fn segment_word(compound: &str, stats: &CorpusStats) -> Vec<String> {
    segment_word_with(compound, stats, SegmentOptions::default())
}

/// Splits `compound` into the word sequence maximizing the summed
/// log-probability over all split positions.
///
/// The result always concatenates back to the input. Among equal scores the
/// split found first (shortest leading word) wins.
pub fn segment_word_with(compound: &str, stats: &CorpusStats, opts: SegmentOptions) -> Vec<String> {
    // Byte offsets of every char boundary, including the end.
    let bounds: Vec<usize> = compound
        .char_indices()
        .map(|(i, _)| i)
        .chain(std::iter::once(compound.len()))
        .collect();
    let n = bounds.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    if opts.bigrams {
        segment_bigram(compound, &bounds, stats)
    } else {
        segment_unigram(compound, &bounds, stats)
    }
}

fn segment_unigram(s: &str, bounds: &[usize], stats: &CorpusStats) -> Vec<String> {
    let n = bounds.len() - 1;
    let mut best = vec![f64::NEG_INFINITY; n + 1];
    let mut back = vec![0usize; n + 1];
    best[0] = 0.0;
    for j in 1..=n {
        for i in 0..j {
            let cand = best[i] + word_logprob(&s[bounds[i]..bounds[j]], stats);
            if cand > best[j] {
                best[j] = cand;
                back[j] = i;
            }
        }
    }
    let mut words = Vec::new();
    let mut j = n;
    while j > 0 {
        let i = back[j];
        words.push(s[bounds[i]..bounds[j]].to_string());
        j = i;
    }
    words.reverse();
    words
}

/// Lattice over (start of last word, end): the bigram score of a word
/// depends on the word before it.
fn segment_bigram(s: &str, bounds: &[usize], stats: &CorpusStats) -> Vec<String> {
    let n = bounds.len() - 1;
    // best[i][j]: best score of s[..j] whose last word is s[i..j].
    let mut best = vec![vec![f64::NEG_INFINITY; n + 1]; n + 1];
    let mut back = vec![vec![usize::MAX; n + 1]; n + 1];
    for j in 1..=n {
        best[0][j] = conditional_logprob(&s[..bounds[j]], None, stats);
        for i in 1..j {
            let word = &s[bounds[i]..bounds[j]];
            for k in 0..i {
                if best[k][i] == f64::NEG_INFINITY {
                    continue;
                }
                let prev = &s[bounds[k]..bounds[i]];
                let cand = best[k][i] + conditional_logprob(word, Some(prev), stats);
                if cand > best[i][j] {
                    best[i][j] = cand;
                    back[i][j] = k;
                }
            }
        }
    }
    let mut start = 0;
    for i in 1..n {
        if best[i][n] > best[start][n] {
            start = i;
        }
    }
    let mut words = Vec::new();
    let (mut i, mut j) = (start, n);
    loop {
        words.push(s[bounds[i]..bounds[j]].to_string());
        if i == 0 {
            break;
        }
        let k = back[i][j];
        j = i;
        i = k;
    }
    words.reverse();
    words
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Every segmentation of `s`, by enumerating the 2^(n-1) split masks.
    fn all_segmentations(s: &str) -> Vec<Vec<String>> {
        let chars: Vec<char> = s.chars().collect();
        let n = chars.len();
        let mut out = Vec::new();
        for mask in 0u32..(1 << (n - 1)) {
            let mut words = vec![String::new()];
            for (i, c) in chars.iter().enumerate() {
                words.last_mut().unwrap().push(*c);
                if i + 1 < n && mask & (1 << i) != 0 {
                    words.push(String::new());
                }
            }
            out.push(words);
        }
        out
    }

    fn brute_force_best(s: &str, stats: &CorpusStats) -> f64 {
        all_segmentations(s)
            .iter()
            .map(|ws| ws.iter().map(|w| word_logprob(w, stats)).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn seg(s: &str) -> Vec<String> {
        segment_word(s, &CorpusStats::fixture())
    }

    #[test]
    fn twin_peaks_hashtags() {
        assert_eq!(seg("twinpeaks"), ["twin", "peaks"]);
        assert_eq!(seg("davidlynch"), ["david", "lynch"]);
        assert_eq!(seg("tvseries"), ["tv", "series"]);
        assert_eq!(seg("hello"), ["hello"]);
    }

    #[test]
    fn viterbi_matches_enumeration_on_sample_hashtags() {
        let stats = CorpusStats::fixture();
        for w in ["tvseries", "twinpeaks", "davidlynch", "hello", "loveit"] {
            let got = seg(w);
            let refs: Vec<&str> = got.iter().map(String::as_str).collect();
            let score = segmentation_score(&refs, &stats);
            assert!((score - brute_force_best(w, &stats)).abs() < 1e-9, "{w}");
        }
        // The enumeration's own argmax is the expected split.
        let best = all_segmentations("tvseries")
            .into_iter()
            .max_by(|a, b| {
                let sa: f64 = a.iter().map(|w| word_logprob(w, &stats)).sum();
                let sb: f64 = b.iter().map(|w| word_logprob(w, &stats)).sum();
                sa.partial_cmp(&sb).unwrap()
            })
            .unwrap();
        assert_eq!(best, ["tv", "series"]);
    }

    #[test]
    fn unknown_penalty_grows_with_length() {
        let stats = CorpusStats::fixture();
        assert!(unknown_word_logprob("ab", &stats) > unknown_word_logprob("abc", &stats));
        let expected = (1.0 / (stats.total_unigrams() as f64 * 1e3)).ln();
        assert!((unknown_word_logprob("xyz", &stats) - expected).abs() < 1e-9);
    }

    #[test]
    fn bigram_mode_reproduces_known_hashtags() {
        let stats = CorpusStats::fixture();
        let opts = SegmentOptions { bigrams: true };
        for (w, want) in [("twinpeaks", vec!["twin", "peaks"]), ("tvseries", vec!["tv", "series"]), ("hello", vec!["hello"])] {
            assert_eq!(segment_word_with(w, &stats, opts), want);
        }
    }

    #[test]
    fn empty_stats_still_segment() {
        let stats = CorpusStats::new();
        assert_eq!(segment_word("abc", &stats), ["abc"]);
    }

    proptest! {
        #[test]
        fn concatenates_back(s in "[a-z0-9]{1,20}") {
            let stats = CorpusStats::fixture();
            prop_assert_eq!(segment_word(&s, &stats).concat(), s.clone());
            prop_assert_eq!(segment_word_with(&s, &stats, SegmentOptions { bigrams: true }).concat(), s);
        }

        #[test]
        fn optimal_against_enumeration(s in "(twin|peaks|tv|series|david|lynch|so|the|x|q){1,4}") {
            prop_assume!(s.chars().count() <= 12);
            let stats = CorpusStats::fixture();
            let got = segment_word(&s, &stats);
            let refs: Vec<&str> = got.iter().map(String::as_str).collect();
            prop_assert!((segmentation_score(&refs, &stats) - brute_force_best(&s, &stats)).abs() < 1e-9);
        }
    }
}
