//! Irony detection in tweets: preprocessing, skip-gram embeddings, word- and
//! character-level BiLSTM classifiers with self-attention, ensembling,
//! classical baselines and evaluation.

pub mod baselines;
pub mod embeddings;
pub mod ensemble;
pub mod error;
pub mod eval;
pub mod model;
pub mod synthetic;
pub mod tensor;
pub mod textproc;
pub mod trainer;

pub use error::{Error, Result};

use rand::SeedableRng;

/// The one random generator used throughout; always seeded explicitly.
pub type SeededRng = rand_chacha::ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    SeededRng::seed_from_u64(seed)
}
