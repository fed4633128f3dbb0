//! Corpus BLEU with mteval-13a tokenization, exponential smoothing for
//! zero-match n-gram orders, a single reference per hypothesis and mixed
//! case, matching the sacreBLEU scorer configured the same way.

use std::collections::HashMap;
use std::sync::LazyLock;

use regex::Regex;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BleuError {
    #[error("hypothesis and reference counts differ: {hypotheses} vs {references}")]
    LengthMismatch {
        hypotheses: usize,
        references: usize,
    },
    #[error("cannot score an empty corpus")]
    EmptyCorpus,
}

const MAX_ORDER: usize = 4;

/// Corpus-level score with its components. Precisions are fractions in
/// [0, 1]; the score is on the usual 0-100 scale.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct BleuScore {
    pub score: f64,
    pub precisions: [f64; MAX_ORDER],
    pub brevity_penalty: f64,
    pub hyp_length: u64,
    pub ref_length: u64,
}

/// Signature string describing exactly what this scorer computes.
pub fn signature() -> &'static str {
    "BLEU+case.mixed+numrefs.1+smooth.exp+tok.13a"
}

// The four substitution passes of the mteval-v13a tokenizer, applied in
// order to the line padded with one space on each side:
//  1. pad most punctuation/symbol characters with spaces
//  2. pad period/comma unless preceded by a digit
//  3. pad period/comma unless followed by a digit
//  4. pad a dash preceded by a digit
static T13A_PASSES: LazyLock<[(Regex, &'static str); 4]> = LazyLock::new(|| {
    [
        (
            Regex::new(r"([\{-\~\[-` -\&\(-\+\:-\@/])").unwrap(),
            " ${1} ",
        ),
        (Regex::new(r"([^0-9])([\.,])").unwrap(), "${1} ${2} "),
        (Regex::new(r"([\.,])([^0-9])").unwrap(), " ${1} ${2}"),
        (Regex::new(r"([0-9])(\-)").unwrap(), "${1} ${2} "),
    ]
});

/// mteval-v13a tokenization: entity unescaping plus selective punctuation
/// padding. Case is preserved.
pub fn tokenize_13a(text: &str) -> Vec<String> {
    let mut line = text.replace("<skipped>", "");
    line = line.replace("-\n", "");
    line = line.replace('\n', " ");
    if line.contains('&') {
        line = line.replace("&quot;", "\"");
        line = line.replace("&amp;", "&");
        line = line.replace("&lt;", "<");
        line = line.replace("&gt;", ">");
    }
    let mut padded = format!(" {line} ");
    for (regex, replacement) in T13A_PASSES.iter() {
        padded = regex.replace_all(&padded, *replacement).into_owned();
    }
    padded.split_whitespace().map(str::to_string).collect()
}

fn count_ngrams(tokens: &[String]) -> HashMap<(usize, String), u32> {
    let mut counts = HashMap::new();
    for n in 1..=MAX_ORDER.min(tokens.len()) {
        for window in tokens.windows(n) {
            // Tokens come from whitespace splitting, so a space join is
            // unambiguous.
            let key = window.join(" ");
            *counts.entry((n, key)).or_insert(0) += 1;
        }
    }
    counts
}

/// Corpus BLEU over paired hypothesis/reference lines.
///
/// Modified n-gram precisions up to order 4 with clipped counts; orders with
/// matches score `correct/total`, orders without matches fall back to
/// `1/(2^z * total)` where `z` counts the zero-match orders seen so far.
/// Brevity penalty is `exp(1 - ref/hyp)` when the hypothesis side is
/// shorter.
pub fn bleu<H: AsRef<str>, R: AsRef<str>>(
    hypotheses: &[H],
    references: &[R],
) -> Result<BleuScore, BleuError> {
    if hypotheses.len() != references.len() {
        return Err(BleuError::LengthMismatch {
            hypotheses: hypotheses.len(),
            references: references.len(),
        });
    }
    if hypotheses.is_empty() {
        return Err(BleuError::EmptyCorpus);
    }

    let mut correct = [0u64; MAX_ORDER];
    let mut total = [0u64; MAX_ORDER];
    let mut hyp_len = 0u64;
    let mut ref_len = 0u64;

    for (hyp, reference) in hypotheses.iter().zip(references) {
        let hyp_tokens = tokenize_13a(hyp.as_ref().trim_end());
        let ref_tokens = tokenize_13a(reference.as_ref().trim_end());
        hyp_len += hyp_tokens.len() as u64;
        ref_len += ref_tokens.len() as u64;
        let ref_ngrams = count_ngrams(&ref_tokens);
        for (key, count) in count_ngrams(&hyp_tokens) {
            let n = key.0;
            let clipped = count.min(ref_ngrams.get(&key).copied().unwrap_or(0));
            correct[n - 1] += clipped as u64;
            total[n - 1] += count as u64;
        }
    }

    // Percent-scale precisions, exactly as the reference scorer computes
    // them; converted to fractions only in the returned struct.
    let mut precisions_pct = [0.0f64; MAX_ORDER];
    let mut smooth = 1.0f64;
    for n in 0..MAX_ORDER {
        if total[n] == 0 {
            break;
        }
        if correct[n] == 0 {
            smooth *= 2.0;
            precisions_pct[n] = 100.0 / (smooth * total[n] as f64);
        } else {
            precisions_pct[n] = 100.0 * correct[n] as f64 / total[n] as f64;
        }
    }

    let brevity_penalty = if hyp_len < ref_len {
        if hyp_len > 0 {
            (1.0 - ref_len as f64 / hyp_len as f64).exp()
        } else {
            0.0
        }
    } else {
        1.0
    };

    // Geometric mean of all four orders. When every order has the same
    // precision (e.g. a perfect hypothesis) the mean is that value exactly,
    // so take it directly instead of round-tripping through exp(log).
    let positive: Vec<f64> = precisions_pct.iter().copied().filter(|&p| p > 0.0).collect();
    let geo_mean = if positive.len() == MAX_ORDER
        && positive.windows(2).all(|w| w[0] == w[1])
    {
        positive[0]
    } else {
        (positive.iter().map(|p| p.ln()).sum::<f64>() / MAX_ORDER as f64).exp()
    };
    let score = brevity_penalty * geo_mean;

    Ok(BleuScore {
        score,
        precisions: precisions_pct.map(|p| p / 100.0),
        brevity_penalty,
        hyp_length: hyp_len,
        ref_length: ref_len,
    })
}
