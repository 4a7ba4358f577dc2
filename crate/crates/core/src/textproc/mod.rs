//! Twitter-aware tokenization, normalization, hashtag segmentation and
//! spell correction.
//!
//! ```
//! use irony_core::textproc::{preprocess, render, CorpusStats};
//!
//! let stats = CorpusStats::fixture();
//! let out = render(&preprocess("SOOOO happy #davidlynch", &stats));
//! assert_eq!(out, "so <allcaps> <elongated> happy <hashtag> david lynch </hashtag>");
//! ```

mod lexicon;
mod normalizer;
mod segment;
mod spell;
mod stats;
mod tokenizer;

pub use lexicon::emoticon_tag;
pub use normalizer::{normalize, normalize_with, NormalizeOptions};
pub use segment::{segment_word, segment_word_with, segmentation_score, unknown_word_logprob, word_logprob, SegmentOptions};
pub use spell::{damerau_levenshtein, spell_correct, spell_correct_in_context};
pub use stats::{build_corpus_stats, CorpusStats};
pub use tokenizer::{classify, tokenize, RawKind};

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tag {
    Hashtag,
    Allcaps,
    Emphasis,
    Repeated,
    Elongated,
    Date,
    Time,
    Url,
    User,
    Email,
    Money,
    Number,
    Censored,
    Happy,
    Sad,
    Laugh,
    Wink,
    Tong,
    Annoyed,
    Surprise,
    Heart,
    Kiss,
}

impl Tag {
    pub const ALL: [Tag; 22] = [
        Tag::Hashtag,
        Tag::Allcaps,
        Tag::Emphasis,
        Tag::Repeated,
        Tag::Elongated,
        Tag::Date,
        Tag::Time,
        Tag::Url,
        Tag::User,
        Tag::Email,
        Tag::Money,
        Tag::Number,
        Tag::Censored,
        Tag::Happy,
        Tag::Sad,
        Tag::Laugh,
        Tag::Wink,
        Tag::Tong,
        Tag::Annoyed,
        Tag::Surprise,
        Tag::Heart,
        Tag::Kiss,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Tag::Hashtag => "hashtag",
            Tag::Allcaps => "allcaps",
            Tag::Emphasis => "emphasis",
            Tag::Repeated => "repeated",
            Tag::Elongated => "elongated",
            Tag::Date => "date",
            Tag::Time => "time",
            Tag::Url => "url",
            Tag::User => "user",
            Tag::Email => "email",
            Tag::Money => "money",
            Tag::Number => "number",
            Tag::Censored => "censored",
            Tag::Happy => "happy",
            Tag::Sad => "sad",
            Tag::Laugh => "laugh",
            Tag::Wink => "wink",
            Tag::Tong => "tong",
            Tag::Annoyed => "annoyed",
            Tag::Surprise => "surprise",
            Tag::Heart => "heart",
            Tag::Kiss => "kiss",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Word,
    TagOpen,
    TagClose,
    TagStandalone,
}

/// One unit of preprocessed text.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AnnotatedToken {
    kind: TokenKind,
    surface: String,
    tag: Option<Tag>,
}

impl AnnotatedToken {
    /// A plain word. Panics on an empty surface.
    pub fn word(surface: impl Into<String>) -> Self {
        let surface = surface.into();
        assert!(!surface.is_empty(), "word tokens must be non-empty");
        AnnotatedToken {
            kind: TokenKind::Word,
            surface,
            tag: None,
        }
    }

    pub fn tag(tag: Tag) -> Self {
        Self::tagged(TokenKind::TagStandalone, tag)
    }

    pub fn open(tag: Tag) -> Self {
        Self::tagged(TokenKind::TagOpen, tag)
    }

    pub fn close(tag: Tag) -> Self {
        Self::tagged(TokenKind::TagClose, tag)
    }

    fn tagged(kind: TokenKind, tag: Tag) -> Self {
        let surface = match kind {
            TokenKind::TagClose => format!("</{}>", tag.name()),
            _ => format!("<{}>", tag.name()),
        };
        AnnotatedToken {
            kind,
            surface,
            tag: Some(tag),
        }
    }

    pub fn kind(&self) -> TokenKind {
        self.kind
    }

    pub fn surface(&self) -> &str {
        &self.surface
    }

    pub fn tag_value(&self) -> Option<Tag> {
        self.tag
    }
}

impl fmt::Display for AnnotatedToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.surface)
    }
}

pub type TokenSeq = Vec<AnnotatedToken>;

/// Space-joined surface forms.
pub fn render(seq: &[AnnotatedToken]) -> String {
    seq.iter().map(|t| t.surface()).collect::<Vec<_>>().join(" ")
}

/// `normalize(tokenize(text))` with default options.
pub fn preprocess(text: &str, stats: &CorpusStats) -> TokenSeq {
    normalize(&tokenize(text), stats)
}
