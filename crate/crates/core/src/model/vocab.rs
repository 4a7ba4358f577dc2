use std::collections::{BTreeSet, HashMap};

use sha2::{Digest, Sha256};

use crate::embeddings::EmbeddingTable;

pub const UNK_WORD: &str = "<unk>";
pub const UNK_CHAR: &str = "<unk-char>";

/// Token ↔ row mapping for a classifier's embedding layer. Every vocabulary
/// has an unknown entry that absorbs out-of-vocabulary inputs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocab {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    unk: usize,
}

impl Vocab {
    /// Rebuilds a vocabulary from its token list; `unk` must be present.
    pub fn from_tokens(tokens: Vec<String>, unk: &str) -> Option<Self> {
        let index: HashMap<String, usize> = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        let unk = *index.get(unk)?;
        (index.len() == tokens.len()).then_some(Vocab { tokens, index, unk })
    }

    /// The embedding table's words, plus `<unk>` appended when absent.
    pub fn for_words(table: &EmbeddingTable) -> Self {
        let mut tokens = table.words().to_vec();
        if table.index_of(UNK_WORD).is_none() {
            tokens.push(UNK_WORD.to_string());
        }
        Self::from_tokens(tokens, UNK_WORD).expect("unique words with unk")
    }

    /// Every character seen in `texts`, sorted, plus `<unk-char>`.
    pub fn for_chars<S: AsRef<str>>(texts: &[S]) -> Self {
        let chars: BTreeSet<char> = texts.iter().flat_map(|t| t.as_ref().chars()).collect();
        let mut tokens: Vec<String> = chars.into_iter().map(String::from).collect();
        tokens.push(UNK_CHAR.to_string());
        Self::from_tokens(tokens, UNK_CHAR).expect("unique chars with unk")
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn unk(&self) -> usize {
        self.unk
    }

    pub fn id(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(self.unk)
    }

    pub fn encode<S: AsRef<str>>(&self, tokens: &[S], max_len: usize) -> Vec<usize> {
        tokens.iter().take(max_len).map(|t| self.id(t.as_ref())).collect()
    }

    /// Character ids of `text`.
    pub fn encode_chars(&self, text: &str, max_len: usize) -> Vec<usize> {
        let mut buf = [0u8; 4];
        text.chars().take(max_len).map(|c| self.id(c.encode_utf8(&mut buf))).collect()
    }

    /// Hex SHA-256 prefix identifying the token list and its order.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for t in &self.tokens {
            h.update(t.as_bytes());
            h.update([0u8]);
        }
        h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_vocab_appends_unk() {
        let t = EmbeddingTable::new(vec!["a".into(), "b".into()], 2, vec![0.0; 4]).unwrap();
        let v = Vocab::for_words(&t);
        assert_eq!(v.len(), 3);
        assert_eq!(v.id("b"), 1);
        assert_eq!(v.id("zzz"), 2);
        assert_eq!(v.encode(&["a", "q", "b"], 2), vec![0, 2]);
    }

    #[test]
    fn char_vocab() {
        let v = Vocab::for_chars(&["ba", "c"]);
        assert_eq!(v.tokens(), &["a", "b", "c", UNK_CHAR]);
        assert_eq!(v.encode_chars("cab!", 10), vec![2, 0, 1, 3]);
    }

    #[test]
    fn hash_depends_on_order() {
        let a = Vocab::from_tokens(vec!["x".into(), "y".into(), UNK_WORD.into()], UNK_WORD).unwrap();
        let b = Vocab::from_tokens(vec!["y".into(), "x".into(), UNK_WORD.into()], UNK_WORD).unwrap();
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash(), a.clone().hash());
        assert_eq!(a.hash().len(), 16);
    }

    #[test]
    fn duplicates_rejected() {
        assert!(Vocab::from_tokens(vec!["x".into(), "x".into(), UNK_WORD.into()], UNK_WORD).is_none());
        assert!(Vocab::from_tokens(vec!["x".into()], UNK_WORD).is_none());
    }
}
