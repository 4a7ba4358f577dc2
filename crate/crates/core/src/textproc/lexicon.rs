use super::Tag;

/// Emoticon → sentiment tag.
pub(crate) const EMOTICONS: &[(&str, Tag)] = &[
    (":)", Tag::Happy),
    (":-)", Tag::Happy),
    (":]", Tag::Happy),
    ("=)", Tag::Happy),
    ("(:", Tag::Happy),
    (":o)", Tag::Happy),
    ("\\o/", Tag::Happy),
    ("^_^", Tag::Happy),
    ("^^", Tag::Happy),
    (":D", Tag::Laugh),
    (":-D", Tag::Laugh),
    ("=D", Tag::Laugh),
    ("xD", Tag::Laugh),
    ("XD", Tag::Laugh),
    (":'D", Tag::Laugh),
    (":(", Tag::Sad),
    (":-(", Tag::Sad),
    (":[", Tag::Sad),
    ("=(", Tag::Sad),
    ("):", Tag::Sad),
    (":'(", Tag::Sad),
    (";(", Tag::Sad),
    (";)", Tag::Wink),
    (";-)", Tag::Wink),
    (";D", Tag::Wink),
    (":P", Tag::Tong),
    (":-P", Tag::Tong),
    (":p", Tag::Tong),
    (":-p", Tag::Tong),
    ("xP", Tag::Tong),
    (";P", Tag::Tong),
    (":/", Tag::Annoyed),
    (":-/", Tag::Annoyed),
    ("-_-", Tag::Annoyed),
    (":|", Tag::Annoyed),
    (":-|", Tag::Annoyed),
    (":\\", Tag::Annoyed),
    (":O", Tag::Surprise),
    (":-O", Tag::Surprise),
    (":o", Tag::Surprise),
    ("o_O", Tag::Surprise),
    ("O_o", Tag::Surprise),
    ("<3", Tag::Heart),
    (":*", Tag::Kiss),
    (":-*", Tag::Kiss),
];

pub fn emoticon_tag(token: &str) -> Option<Tag> {
    EMOTICONS.iter().find(|(e, _)| *e == token).map(|&(_, t)| t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn sample_tweet_emoticons() {
        assert_eq!(emoticon_tag("\\o/"), Some(Tag::Happy));
        assert_eq!(emoticon_tag(":D"), Some(Tag::Laugh));
        assert_eq!(emoticon_tag("hello"), None);
    }

    #[test]
    fn no_duplicates() {
        let set: HashSet<_> = EMOTICONS.iter().map(|(e, _)| *e).collect();
        assert_eq!(set.len(), EMOTICONS.len());
    }
}
