use std::sync::LazyLock;

use regex::Regex;

use super::lexicon::EMOTICONS;

/// Lexical class of a raw token, in matching priority order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RawKind {
    Url,
    Email,
    User,
    Hashtag,
    Date,
    Time,
    Money,
    Emoticon,
    Emphasis,
    Censored,
    Number,
    Word,
    RepeatedPunct,
    Other,
}

const MONTH: &str = r"(?i:jan(?:uary)?|feb(?:ruary)?|mar(?:ch)?|apr(?:il)?|may|june?|july?|aug(?:ust)?|sep(?:t(?:ember)?)?|oct(?:ober)?|nov(?:ember)?|dec(?:ember)?)";

fn emoticon_pattern() -> String {
    let mut emos: Vec<&str> = EMOTICONS.iter().map(|(e, _)| *e).collect();
    emos.sort_by_key(|e| std::cmp::Reverse(e.len()));
    emos.iter()
        .map(|e| {
            let mut p = regex::escape(e);
            if e.chars().last().is_some_and(|c| c.is_alphanumeric()) {
                p.push_str(r"\b");
            }
            p
        })
        .collect::<Vec<_>>()
        .join("|")
}

fn patterns() -> Vec<(RawKind, String)> {
    vec![
        (RawKind::Url, r"(?:https?://|www\.)\S+".into()),
        (RawKind::Email, r"[\w.%+\-]+@[\w\-]+(?:\.[\w\-]+)*\.[A-Za-z]{2,}".into()),
        (RawKind::User, r"@\w+".into()),
        (RawKind::Hashtag, r"#\w+".into()),
        (
            RawKind::Date,
            format!(
                r"\d{{1,2}}[/.\-]\d{{1,2}}[/.\-]\d{{2,4}}\b|\d{{4}}[/\-]\d{{1,2}}[/\-]\d{{1,2}}\b|\b{MONTH}\.?\s\d{{1,2}}(?:st|nd|rd|th)?(?:,?\s\d{{4}})?\b|\d{{1,2}}(?:st|nd|rd|th)?\s(?:of\s)?{MONTH}(?:,?\s\d{{4}})?\b"
            ),
        ),
        (
            RawKind::Time,
            r"\d{1,2}:\d{2}(?::\d{2})?(?:\s?(?:(?i:am|pm)\b|(?i:a\.m\.|p\.m\.)))?|\d{1,2}\s?(?i:am|pm)\b".into(),
        ),
        (
            RawKind::Money,
            r"[$€£¥]\s?\d+(?:[.,]\d+)*(?:\s?(?i:k|m|bn|mil|million|billion)\b)?|\d+(?:[.,]\d+)*\s?(?:[$€£¥]|(?i:mil|million|billion|bn|usd|eur|euros?|dollars?|bucks)\b)".into(),
        ),
        (RawKind::Emoticon, emoticon_pattern()),
        (RawKind::Emphasis, r"\*\w+\*".into()),
        (RawKind::Censored, r"\w+\*+\w+".into()),
        (RawKind::Number, r"\d+(?:[.,]\d+)*(?:%|\b)".into()),
        (RawKind::Word, r"\w+(?:['’\-]\w+)*".into()),
        (RawKind::RepeatedPunct, r"[!?.]{2,}".into()),
        (RawKind::Other, r"\S".into()),
    ]
}

struct Compiled {
    combined: Regex,
    anchored: Vec<(RawKind, Regex)>,
}

static TOKENIZER: LazyLock<Compiled> = LazyLock::new(|| {
    let pats = patterns();
    let combined = pats
        .iter()
        .map(|(_, p)| format!("(?:{p})"))
        .collect::<Vec<_>>()
        .join("|");
    Compiled {
        combined: Regex::new(&combined).expect("tokenizer pattern"),
        anchored: pats
            .iter()
            .map(|(k, p)| (*k, Regex::new(&format!("^(?:{p})$")).expect("anchored pattern")))
            .collect(),
    }
});

/// Splits raw tweet text into tokens.
///
/// Emoticons, hashtags, mentions, URLs, emails, dates, times, currency
/// amounts, censored and emphasized words each come out as one token, as
/// do runs of `!`/`?`/`.`. Anything else that is not whitespace becomes a
/// word or a single-character token.
pub fn tokenize(text: &str) -> Vec<String> {
    TOKENIZER
        .combined
        .find_iter(text)
        .map(|m| m.as_str().to_string())
        .collect()
}

/// Class of a single token as produced by [`tokenize`].
pub fn classify(token: &str) -> RawKind {
    TOKENIZER
        .anchored
        .iter()
        .find(|(_, re)| re.is_match(token))
        .map_or(RawKind::Other, |(k, _)| *k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        tokenize(s)
    }

    #[test]
    fn twin_peaks_tweet() {
        let got = toks("The *new* season of #TwinPeaks is coming on May 21, 2017. CANT WAIT \\o/ !!! #tvseries #davidlynch :D");
        let want = [
            "The", "*new*", "season", "of", "#TwinPeaks", "is", "coming", "on", "May 21, 2017", ".", "CANT", "WAIT", "\\o/",
            "!!!", "#tvseries", "#davidlynch", ":D",
        ];
        assert_eq!(got, want);
    }

    #[test]
    fn empty_and_plain() {
        assert!(toks("").is_empty());
        assert!(toks("   \n\t").is_empty());
        assert_eq!(toks("hello world"), ["hello", "world"]);
    }

    #[test]
    fn markup_survives_whole() {
        assert_eq!(toks("@jack see https://t.co/x?a=1 now"), ["@jack", "see", "https://t.co/x?a=1", "now"]);
        assert_eq!(toks("mail me@example.com"), ["mail", "me@example.com"]);
        assert_eq!(toks("on 07/11/2011 at 4:30pm"), ["on", "07/11/2011", "at", "4:30pm"]);
        assert_eq!(toks("April 23rd or 11:00 am"), ["April 23rd", "or", "11:00 am"]);
        assert_eq!(toks("only $10 or 50€ or 25mil"), ["only", "$10", "or", "50€", "or", "25mil"]);
        assert_eq!(toks("what s**t"), ["what", "s**t"]);
        assert_eq!(toks("*very* good"), ["*very*", "good"]);
    }

    #[test]
    fn punctuation_is_split_off() {
        assert_eq!(toks("wow, great."), ["wow", ",", "great", "."]);
        assert_eq!(toks("really?!?"), ["really", "?!?"]);
        assert_eq!(toks("can't stop"), ["can't", "stop"]);
    }

    #[test]
    fn emoticons_need_a_boundary() {
        assert_eq!(toks("xDrive"), ["xDrive"]);
        assert_eq!(toks("lol xD"), ["lol", "xD"]);
        assert_eq!(toks("sad :( <3"), ["sad", ":(", "<3"]);
    }

    #[test]
    fn classification() {
        assert_eq!(classify("May 21, 2017"), RawKind::Date);
        assert_eq!(classify("#tvseries"), RawKind::Hashtag);
        assert_eq!(classify(":D"), RawKind::Emoticon);
        assert_eq!(classify("*new*"), RawKind::Emphasis);
        assert_eq!(classify("!!!"), RawKind::RepeatedPunct);
        assert_eq!(classify("CANT"), RawKind::Word);
        assert_eq!(classify("4:30pm"), RawKind::Time);
        assert_eq!(classify("$10"), RawKind::Money);
        assert_eq!(classify("42"), RawKind::Number);
        assert_eq!(classify("."), RawKind::Other);
    }
}
