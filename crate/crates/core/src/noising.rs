//! Seeded word-level noise for synthetic translation outputs: word dropout,
//! whole-word masking and bounded local permutation.
//!
//! Every sentence gets its own RNG stream derived from (seed, ordinal), so
//! parallel noising is order-independent yet byte-reproducible across runs
//! and platforms. ChaCha8 is pinned as the generator; its output is stable
//! regardless of architecture.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NoiseError {
    #[error("cannot noise an empty sentence")]
    EmptyInput,
    #[error("invalid noise config: {0}")]
    InvalidConfig(String),
}

/// Order-sensitive list of the three noise operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseOp {
    Drop,
    Mask,
    Permute,
}

pub const DEFAULT_NOISE_OPS: [NoiseOp; 3] = [NoiseOp::Drop, NoiseOp::Mask, NoiseOp::Permute];

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseConfig {
    /// Permutation window: no word moves more than this many positions.
    pub permute_window: u32,
    pub p_mask: f64,
    pub p_drop: f64,
    pub mask_token: String,
    pub seed: u64,
    pub ops: Vec<NoiseOp>,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            permute_window: 3,
            p_mask: 0.1,
            p_drop: 0.1,
            mask_token: "<mask>".to_string(),
            seed: 0,
            ops: DEFAULT_NOISE_OPS.to_vec(),
        }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<(), NoiseError> {
        if self.permute_window < 1 {
            return Err(NoiseError::InvalidConfig(
                "permute_window must be >= 1".to_string(),
            ));
        }
        for (name, p) in [("p_mask", self.p_mask), ("p_drop", self.p_drop)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(NoiseError::InvalidConfig(format!(
                    "{name} must be in [0,1], got {p}"
                )));
            }
        }
        if self.mask_token.is_empty() || self.mask_token.contains(char::is_whitespace) {
            return Err(NoiseError::InvalidConfig(
                "mask_token must be non-empty without whitespace".to_string(),
            ));
        }
        Ok(())
    }
}

/// RNG stream for one sentence, split off the corpus seed by ordinal.
pub fn sentence_rng(seed: u64, ordinal: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(ordinal);
    rng
}

/// Reorders words by stably sorting scores `i + u_i` with `u_i` uniform in
/// `[0, k)`. No word moves more than `k` positions; `k = 1` is the identity
/// because fractional jitter cannot reorder integer-spaced scores.
pub fn permute_within_k<T>(words: Vec<T>, k: u32, rng: &mut impl Rng) -> Vec<T> {
    if words.len() < 2 {
        return words;
    }
    let scores: Vec<f64> = (0..words.len())
        .map(|i| i as f64 + rng.gen_range(0.0..k as f64))
        .collect();
    let mut order: Vec<usize> = (0..words.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).expect("scores are finite"));
    let mut slots: Vec<Option<T>> = words.into_iter().map(Some).collect();
    order
        .into_iter()
        .map(|i| slots[i].take().expect("each slot is taken once"))
        .collect()
}

/// Replaces each word independently by `mask` with probability `p`.
pub fn mask_words<'a>(
    words: Vec<&'a str>,
    p: f64,
    mask: &'a str,
    rng: &mut impl Rng,
) -> Vec<&'a str> {
    words
        .into_iter()
        .map(|w| if rng.gen_bool(p) { mask } else { w })
        .collect()
}

/// Deletes each word independently with probability `p`, preserving order.
/// If every word would drop, one uniformly chosen word is retained instead
/// so the output is never empty.
pub fn drop_words<T>(words: Vec<T>, p: f64, rng: &mut impl Rng) -> Vec<T> {
    let n = words.len();
    let keep: Vec<bool> = (0..n).map(|_| !rng.gen_bool(p)).collect();
    let forced = if n > 0 && keep.iter().all(|&k| !k) {
        Some(rng.gen_range(0..n))
    } else {
        None
    };
    words
        .into_iter()
        .enumerate()
        .filter(|(i, _)| keep[*i] || forced == Some(*i))
        .map(|(_, w)| w)
        .collect()
}

/// Splits on whitespace, applies the configured noise ops in order and
/// rejoins with single spaces. Output is fully determined by
/// (text, config, ordinal).
pub fn noise_sentence(text: &str, cfg: &NoiseConfig, ordinal: u64) -> Result<String, NoiseError> {
    let mut words: Vec<&str> = text.split_whitespace().collect();
    if words.is_empty() {
        return Err(NoiseError::EmptyInput);
    }
    let mut rng = sentence_rng(cfg.seed, ordinal);
    for op in &cfg.ops {
        words = match op {
            NoiseOp::Drop => drop_words(words, cfg.p_drop, &mut rng),
            NoiseOp::Mask => mask_words(words, cfg.p_mask, &cfg.mask_token, &mut rng),
            NoiseOp::Permute => permute_within_k(words, cfg.permute_window, &mut rng),
        };
    }
    Ok(words.join(" "))
}
