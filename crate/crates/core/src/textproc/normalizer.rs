use super::{
    emoticon_tag, segment_word_with, spell_correct, spell_correct_in_context, AnnotatedToken, CorpusStats, RawKind,
    SegmentOptions, Tag, TokenSeq,
};

/// Knobs for [`normalize_with`]. The default reproduces the reference
/// behaviour: unigram segmentation, per-word unigram spelling, no spelling
/// inside hashtags.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct NormalizeOptions {
    pub segment: SegmentOptions,
    /// Rank spelling candidates by bigram context with the previous word.
    pub spell_context: bool,
    /// Also spell-correct the segmented parts of hashtags.
    pub correct_hashtags: bool,
}

pub fn normalize(tokens: &[String], stats: &CorpusStats) -> TokenSeq {
    normalize_with(tokens, stats, &NormalizeOptions::default())
}

/// Maps raw tokens to annotated tokens.
///
/// * dates, times, URLs, mentions, emails, money and numbers are replaced by
///   a standalone tag;
/// * emphasized, all-caps, elongated and censored words and repeated
///   punctuation are reduced to a plain form followed by their tag(s);
/// * hashtags lose the `#`, are segmented, and are wrapped in
///   `<hashtag> … </hashtag>`;
/// * emoticons become sentiment tags;
/// * remaining words are lowercased and spell-corrected.
pub fn normalize_with(tokens: &[String], stats: &CorpusStats, opts: &NormalizeOptions) -> TokenSeq {
    let mut out = TokenSeq::new();
    for tok in tokens {
        let prev = out
            .iter()
            .rev()
            .find(|t| t.kind() == super::TokenKind::Word)
            .map(|t| t.surface().to_string());
        match super::classify(tok) {
            RawKind::Url => out.push(AnnotatedToken::tag(Tag::Url)),
            RawKind::Email => out.push(AnnotatedToken::tag(Tag::Email)),
            RawKind::User => out.push(AnnotatedToken::tag(Tag::User)),
            RawKind::Date => out.push(AnnotatedToken::tag(Tag::Date)),
            RawKind::Time => out.push(AnnotatedToken::tag(Tag::Time)),
            RawKind::Money => out.push(AnnotatedToken::tag(Tag::Money)),
            RawKind::Number => out.push(AnnotatedToken::tag(Tag::Number)),
            RawKind::Emoticon => match emoticon_tag(tok) {
                Some(t) => out.push(AnnotatedToken::tag(t)),
                None => out.push(AnnotatedToken::word(tok.to_lowercase())),
            },
            RawKind::Hashtag => hashtag(tok, stats, opts, &mut out),
            RawKind::Emphasis => {
                let inner = tok.trim_matches('*');
                word(inner, prev.as_deref(), stats, opts, &mut out);
                out.push(AnnotatedToken::tag(Tag::Emphasis));
            }
            RawKind::Censored => {
                out.push(AnnotatedToken::word(tok.to_lowercase()));
                out.push(AnnotatedToken::tag(Tag::Censored));
            }
            RawKind::RepeatedPunct => {
                let first = tok.chars().next().expect("non-empty token");
                out.push(AnnotatedToken::word(first.to_string()));
                out.push(AnnotatedToken::tag(Tag::Repeated));
            }
            RawKind::Word => word(tok, prev.as_deref(), stats, opts, &mut out),
            RawKind::Other => out.push(AnnotatedToken::word(tok.to_lowercase())),
        }
    }
    out
}

fn hashtag(tok: &str, stats: &CorpusStats, opts: &NormalizeOptions, out: &mut TokenSeq) {
    let body = tok.trim_start_matches('#').to_lowercase();
    out.push(AnnotatedToken::open(Tag::Hashtag));
    let mut prev: Option<String> = None;
    for part in body.split('_').filter(|p| !p.is_empty()) {
        for w in segment_word_with(part, stats, opts.segment) {
            let w = if opts.correct_hashtags { correct(&w, prev.as_deref(), stats, opts) } else { w };
            prev = Some(w.clone());
            out.push(AnnotatedToken::word(w));
        }
    }
    out.push(AnnotatedToken::close(Tag::Hashtag));
}

fn correct(w: &str, prev: Option<&str>, stats: &CorpusStats, opts: &NormalizeOptions) -> String {
    if opts.spell_context {
        spell_correct_in_context(w, prev, stats)
    } else {
        spell_correct(w, stats)
    }
}

fn is_allcaps(w: &str) -> bool {
    let letters: Vec<char> = w.chars().filter(|c| c.is_alphabetic()).collect();
    letters.len() >= 2 && letters.iter().all(|c| c.is_uppercase())
}

/// Runs of three or more identical characters.
fn has_elongation(w: &str) -> bool {
    let chars: Vec<char> = w.chars().collect();
    chars.windows(3).any(|t| t[0] == t[1] && t[1] == t[2])
}

/// Shrinks every run of 3+ identical characters to 2, then picks the most
/// frequent known variant with each such run at length 1 or 2. Falls back
/// to spelling correction of the length-2 form.
fn unelongate(w: &str, stats: &CorpusStats) -> String {
    let mut runs: Vec<(char, usize)> = Vec::new();
    for c in w.chars() {
        match runs.last_mut() {
            Some((p, n)) if *p == c => *n += 1,
            _ => runs.push((c, 1)),
        }
    }
    let long: Vec<usize> = runs.iter().enumerate().filter(|(_, r)| r.1 >= 3).map(|(i, _)| i).collect();
    let k = long.len().min(10);
    let mut best: Option<(u64, String)> = None;
    for mask in 0u32..(1 << k) {
        let mut s = String::new();
        for (i, &(c, n)) in runs.iter().enumerate() {
            let len = match long.iter().position(|&l| l == i) {
                Some(pos) if pos < k => {
                    if mask & (1 << pos) != 0 {
                        1
                    } else {
                        2
                    }
                }
                Some(_) => 2,
                None => n,
            };
            s.extend(std::iter::repeat_n(c, len));
        }
        let count = stats.count(&s);
        if count > 0 && best.as_ref().is_none_or(|(bc, bs)| count > *bc || (count == *bc && s < *bs)) {
            best = Some((count, s));
        }
    }
    if let Some((_, s)) = best {
        return s;
    }
    let collapsed: String = runs
        .iter()
        .flat_map(|&(c, n)| std::iter::repeat_n(c, n.min(2)))
        .collect();
    spell_correct(&collapsed, stats)
}

fn word(tok: &str, prev: Option<&str>, stats: &CorpusStats, opts: &NormalizeOptions, out: &mut TokenSeq) {
    let allcaps = is_allcaps(tok);
    let lower = tok.to_lowercase();
    let elongated = has_elongation(&lower);
    let surface = if elongated {
        unelongate(&lower, stats)
    } else {
        correct(&lower, prev, stats, opts)
    };
    out.push(AnnotatedToken::word(surface));
    if allcaps {
        out.push(AnnotatedToken::tag(Tag::Allcaps));
    }
    if elongated {
        out.push(AnnotatedToken::tag(Tag::Elongated));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textproc::{render, tokenize};
    use std::collections::HashSet;

    fn run(s: &str) -> String {
        render(&normalize(&tokenize(s), &CorpusStats::fixture()))
    }

    #[test]
    fn twin_peaks_tweet_processed() {
        let tokens: Vec<String> = [
            "The", "*new*", "season", "of", "#TwinPeaks", "is", "coming", "on", "May 21, 2017", ".", "CANT", "WAIT", "\\o/",
            "!!!", "#tvseries", "#davidlynch", ":D",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        let got = render(&normalize(&tokens, &CorpusStats::fixture()));
        assert_eq!(
            got,
            "the new <emphasis> season of <hashtag> twin peaks </hashtag> is coming on <date> . cant <allcaps> wait <allcaps> <happy> ! <repeated> <hashtag> tv series </hashtag> <hashtag> david lynch </hashtag> <laugh>"
        );
    }

    #[test]
    fn plain_word_untouched() {
        let seq = normalize(&["hello".to_string()], &CorpusStats::fixture());
        assert_eq!(seq, vec![AnnotatedToken::word("hello")]);
    }

    #[test]
    fn elongated_word() {
        let seq = normalize(&["soooo".to_string()], &CorpusStats::fixture());
        assert_eq!(seq, vec![AnnotatedToken::word("so"), AnnotatedToken::tag(Tag::Elongated)]);
    }

    #[test]
    fn replacements() {
        assert_eq!(run("@bob http://x.co/a a@b.com 4:30pm $10 42"), "<user> <url> <email> <time> <money> <number>");
        assert_eq!(run("what s**t"), "what s**t <censored>");
        assert_eq!(run("so :( ;)"), "so <sad> <wink>");
    }

    #[test]
    fn hashtag_spelling_is_opt_in() {
        let stats = CorpusStats::fixture();
        let toks = vec!["#helo".to_string()];
        assert_eq!(render(&normalize(&toks, &stats)), "<hashtag> helo </hashtag>");
        let opts = NormalizeOptions {
            correct_hashtags: true,
            ..Default::default()
        };
        assert_eq!(render(&normalize_with(&toks, &stats, &opts)), "<hashtag> hello </hashtag>");
    }

    #[test]
    fn deterministic() {
        let s = "OMG this is sooo #notfunny at all!!! :/";
        assert_eq!(run(s), run(s));
    }

    #[test]
    fn vocabulary_does_not_grow_beyond_tags() {
        // Holds whenever hashtags do not split into unseen parts.
        let corpus = [
            "I LOVE mondays sooo much!!! #blessed",
            "helo world :) see you on 07/11/2011",
            "wow *great* job @boss http://x.co",
            "CANT WAIT for the new season :D",
        ];
        let stats = CorpusStats::fixture();
        let mut raw = HashSet::new();
        let mut normalized = HashSet::new();
        for line in corpus {
            let toks = tokenize(line);
            raw.extend(toks.iter().map(|t| t.to_lowercase()));
            normalized.extend(normalize(&toks, &stats).into_iter().map(|t| t.surface().to_string()));
        }
        let tag_forms = Tag::ALL.len() + 1; // `</hashtag>` as well
        assert!(normalized.len() <= raw.len() + tag_forms);
    }
}
