//! Training-corpus construction: tagging synthetic pairs and mixing
//! authentic with synthetic data at a target ratio.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus_io::{Origin, SentencePair};

#[derive(Debug, Error)]
pub enum AugmentError {
    #[error("pair at line {line} is already tagged with `{tag}`")]
    AlreadyTagged { line: u64, tag: String },
    #[error("pair at line {line} is not synthetic")]
    OriginMismatch { line: u64 },
    #[error("tag token `{tag}` occurs in natural text at line {line}")]
    TagInText { line: u64, tag: String },
    #[error("both corpora are empty, nothing to mix")]
    EmptyBothInputs,
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
}

/// The token prefixed to synthetic source sentences.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagSpec {
    pub token: String,
}

impl Default for TagSpec {
    fn default() -> Self {
        TagSpec {
            token: "<bt>".to_string(),
        }
    }
}

impl TagSpec {
    pub fn validate(&self) -> Result<(), AugmentError> {
        if self.token.is_empty() || self.token.contains(char::is_whitespace) {
            return Err(AugmentError::InvalidSpec(
                "tag token must be non-empty without whitespace".to_string(),
            ));
        }
        Ok(())
    }
}

/// How the authentic:synthetic ratio is reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixMode {
    /// Repeat authentic pairs until the ratio holds (the default).
    #[default]
    UpsampleAuthentic,
    /// Sample synthetic pairs down instead.
    DownsampleSynthetic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixSpec {
    pub ratio_authentic: u32,
    pub ratio_synthetic: u32,
    pub mode: MixMode,
    pub shuffle_seed: u64,
}

impl Default for MixSpec {
    fn default() -> Self {
        MixSpec {
            ratio_authentic: 1,
            ratio_synthetic: 2,
            mode: MixMode::UpsampleAuthentic,
            shuffle_seed: 0,
        }
    }
}

impl MixSpec {
    pub fn validate(&self) -> Result<(), AugmentError> {
        if self.ratio_authentic == 0 || self.ratio_synthetic == 0 {
            return Err(AugmentError::InvalidSpec(format!(
                "ratio parts must be >= 1, got {}:{}",
                self.ratio_authentic, self.ratio_synthetic
            )));
        }
        Ok(())
    }
}

/// Prefixes the tag token to the source side of a synthetic pair and
/// records it in the tag list. The target side is untouched.
pub fn tag_synthetic(mut pair: SentencePair, tag: &TagSpec) -> Result<SentencePair, AugmentError> {
    if pair.origin != Origin::Synthetic {
        return Err(AugmentError::OriginMismatch { line: pair.line_no });
    }
    if pair.tags.iter().any(|t| t == &tag.token) {
        return Err(AugmentError::AlreadyTagged {
            line: pair.line_no,
            tag: tag.token.clone(),
        });
    }
    if pair.source.split_whitespace().any(|w| w == tag.token) {
        return Err(AugmentError::TagInText {
            line: pair.line_no,
            tag: tag.token.clone(),
        });
    }
    pair.source = format!("{} {}", tag.token, pair.source);
    pair.tags.push(tag.token.clone());
    Ok(pair)
}

/// Removes a leading tag token, inverting [`tag_synthetic`].
pub fn untag(mut pair: SentencePair, tag: &TagSpec) -> SentencePair {
    let prefix = format!("{} ", tag.token);
    if let Some(rest) = pair.source.strip_prefix(&prefix) {
        pair.source = rest.to_string();
        pair.tags.retain(|t| t != &tag.token);
    }
    pair
}

/// Combines authentic and synthetic pairs at the requested ratio and
/// shuffles deterministically by the spec seed.
///
/// In upsample mode each authentic pair is repeated `floor(r)` or `ceil(r)`
/// times, where `r` is the exact per-pair repetition rate; the pairs that
/// get the extra copy are chosen by seeded sampling. The achieved total
/// never deviates from the exact target by more than one pair. Synthetic
/// pairs are never duplicated. If either input is empty the other is
/// emitted as-is (shuffled).
pub fn mix_corpora(
    authentic: Vec<SentencePair>,
    synthetic: Vec<SentencePair>,
    spec: &MixSpec,
) -> Result<Vec<SentencePair>, AugmentError> {
    spec.validate()?;
    if authentic.is_empty() && synthetic.is_empty() {
        return Err(AugmentError::EmptyBothInputs);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.shuffle_seed);

    let (authentic_slots, synthetic_keep): (Vec<u32>, Vec<u32>) = match spec.mode {
        MixMode::UpsampleAuthentic => {
            let target = ratio_target(
                synthetic.len(),
                spec.ratio_authentic,
                spec.ratio_synthetic,
            );
            let slots = if authentic.is_empty() {
                Vec::new()
            } else if synthetic.is_empty() {
                (0..authentic.len() as u32).collect()
            } else {
                upsample_slots(authentic.len(), target, &mut rng)
            };
            (slots, (0..synthetic.len() as u32).collect())
        }
        MixMode::DownsampleSynthetic => {
            let target = ratio_target(
                authentic.len(),
                spec.ratio_synthetic,
                spec.ratio_authentic,
            );
            let keep = if synthetic.is_empty() || authentic.is_empty() || target >= synthetic.len()
            {
                (0..synthetic.len() as u32).collect()
            } else {
                let mut picked =
                    rand::seq::index::sample(&mut rng, synthetic.len(), target).into_vec();
                picked.sort_unstable();
                picked.into_iter().map(|i| i as u32).collect()
            };
            ((0..authentic.len() as u32).collect(), keep)
        }
    };

    let total = authentic_slots.len() + synthetic_keep.len();
    let mut order: Vec<u32> = (0..total as u32).collect();
    order.shuffle(&mut rng);

    let boundary = authentic_slots.len() as u32;
    Ok(order
        .into_iter()
        .map(|i| {
            if i < boundary {
                authentic[authentic_slots[i as usize] as usize].clone()
            } else {
                synthetic[synthetic_keep[(i - boundary) as usize] as usize].clone()
            }
        })
        .collect())
}

/// Exact ratio target `count * a / b`, rounded half-up.
fn ratio_target(count: usize, a: u32, b: u32) -> usize {
    ((count as u64 * a as u64 * 2 + b as u64) / (b as u64 * 2)) as usize
}

/// Slot map of length `target`: slot i names the authentic pair emitted in
/// that position. Base repetitions are uniform; the remainder goes to a
/// seeded sample of pairs.
fn upsample_slots(n_authentic: usize, target: usize, rng: &mut ChaCha8Rng) -> Vec<u32> {
    let base = target / n_authentic;
    let remainder = target % n_authentic;
    let mut extra = vec![false; n_authentic];
    if remainder > 0 {
        for idx in rand::seq::index::sample(rng, n_authentic, remainder) {
            extra[idx] = true;
        }
    }
    let mut slots = Vec::with_capacity(target);
    for (idx, gets_extra) in extra.iter().enumerate() {
        let copies = base + usize::from(*gets_extra);
        for _ in 0..copies {
            slots.push(idx as u32);
        }
    }
    slots
}
