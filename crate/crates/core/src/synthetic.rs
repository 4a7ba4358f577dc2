//! Seeded toy data for tests and demos.

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::embeddings::EmbeddingTable;
use crate::seeded_rng;

pub const NEGATIONS: &[&str] = &["not", "never", "hardly", "no"];
pub const POSITIVES: &[&str] = &["good", "great", "happy", "love", "nice", "fun", "awesome", "perfect"];
const FILLERS: &[&str] = &[
    "the", "a", "day", "is", "was", "my", "this", "that", "monday", "traffic", "coffee", "work", "so", "really",
    "today", "again", "morning", "weather", "train", "phone", "just", "it", "and", "we", "they", "team", "game",
    "movie", "meeting", "lunch", "rain", "week", "party", "weekend", "exam", "bus", "internet", "music", "food",
    "sleep",
];

/// One generated sentence. `contrast` is the position of the negation in
/// the negation–positive bigram when the label is 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContrastExample {
    pub tokens: Vec<String>,
    pub label: usize,
    pub contrast: Option<usize>,
}

/// Binary dataset, half of each class: label 1 iff some negation is
/// immediately followed by a positive word. Negatives still contain
/// negations and positive words, just never adjacent in that order.
pub fn contrast_dataset(n: usize, seed: u64) -> Vec<ContrastExample> {
    let mut rng = seeded_rng(seed);
    (0..n)
        .map(|i| {
            let label = i % 2;
            let len = rng.random_range(6..=12);
            let mut tokens: Vec<&str> = (0..len).map(|_| *FILLERS.choose(&mut rng).unwrap()).collect();
            let mut contrast = None;
            if label == 1 {
                let at = rng.random_range(0..len - 1);
                tokens[at] = NEGATIONS.choose(&mut rng).unwrap();
                tokens[at + 1] = POSITIVES.choose(&mut rng).unwrap();
                contrast = Some(at);
            } else {
                // Distractors: a positive word before a negation, or apart.
                let a = rng.random_range(0..len);
                let mut b = rng.random_range(0..len);
                while b == a || b + 1 == a {
                    b = rng.random_range(0..len);
                }
                if rng.random_bool(0.7) {
                    tokens[a] = POSITIVES.choose(&mut rng).unwrap();
                }
                if rng.random_bool(0.7) {
                    tokens[b] = NEGATIONS.choose(&mut rng).unwrap();
                }
            }
            ContrastExample {
                tokens: tokens.into_iter().map(str::to_string).collect(),
                label,
                contrast,
            }
        })
        .collect()
}

/// Random Gaussian vectors for every word the contrast dataset can emit,
/// standing in for pre-trained embeddings.
pub fn contrast_embeddings(dim: usize, seed: u64) -> EmbeddingTable {
    let mut rng = seeded_rng(seed);
    let words: Vec<String> = NEGATIONS
        .iter()
        .chain(POSITIVES)
        .chain(FILLERS)
        .map(|w| w.to_string())
        .collect();
    let normal = rand_distr::Normal::new(0.0f32, 1.0 / (dim as f32).sqrt()).expect("valid sigma");
    let vectors = (0..words.len() * dim).map(|_| rng.sample(normal)).collect();
    EmbeddingTable::new(words, dim, vectors).expect("consistent sizes")
}

/// Sentences drawn from one of two disjoint vocabularies. Returns the
/// corpus and the two word lists.
pub fn two_cluster_corpus(sentences: usize, words_per_cluster: usize, seed: u64) -> (Vec<Vec<String>>, [Vec<String>; 2]) {
    let mut rng = seeded_rng(seed);
    let clusters = [
        (0..words_per_cluster).map(|i| format!("alpha{i}")).collect::<Vec<_>>(),
        (0..words_per_cluster).map(|i| format!("beta{i}")).collect::<Vec<_>>(),
    ];
    let corpus = (0..sentences)
        .map(|s| {
            let words = &clusters[s % 2];
            let len = rng.random_range(8..=15);
            (0..len).map(|_| words.choose(&mut rng).unwrap().clone()).collect()
        })
        .collect();
    (corpus, clusters)
}

/// Tweet-like TSV lines `id<TAB>label<TAB>text` with hashtags, mentions,
/// emoticons, elongations and URLs. Label 1 marks the ironic template.
pub fn fixture_tweets(n: usize, seed: u64) -> Vec<String> {
    let mut rng = seeded_rng(seed);
    let ironic = [
        "I just LOVE being stuck in traffic {tag} {emo}",
        "Sooooo great, my phone died again {tag}",
        "Wow, {user} another Monday meeting, what fun {emo}",
        "Nothing better than rain on the weekend {tag} {url}",
        "yay, the internet is down AGAIN {emo} {tag}",
        "Perfect, I missed the bus by 2 minutes {tag}",
        "Love waking up at 5am for work {emo}",
    ];
    let plain = [
        "Had a nice lunch with {user} today {emo}",
        "The game tonight was awesome {tag}",
        "Coffee and music this morning {url}",
        "Happy birthday {user} have a great day {emo}",
        "Reading a good book this weekend {tag}",
        "so tired after the exam, going to sleep",
        "New movie trailer is out {url} {tag}",
    ];
    let tags = ["#mondays", "#notmyday", "#blessed", "#fun", "#traffic", "#happydays", "#coffee"];
    let emos = [":)", ":(", ":D", ";)", ":/", "<3"];
    let users = ["@alice", "@bob_99", "@carol"];
    let urls = ["http://t.co/abc123", "https://example.com/x"];
    (0..n)
        .map(|i| {
            let label = usize::from(rng.random_bool(0.5));
            let pool: &[&str] = if label == 1 { &ironic } else { &plain };
            let text = pool
                .choose(&mut rng)
                .unwrap()
                .replace("{tag}", tags.choose(&mut rng).unwrap())
                .replace("{emo}", emos.choose(&mut rng).unwrap())
                .replace("{user}", users.choose(&mut rng).unwrap())
                .replace("{url}", urls.choose(&mut rng).unwrap());
            format!("t{i:03}\t{label}\t{text}")
        })
        .collect()
}
