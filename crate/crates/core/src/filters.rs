//! Heuristic bitext filters: per-pair keep/drop/fix verdicts from an
//! ordered, configurable chain.
//!
//! Fixes (encoding repair, punctuation normalization) run before judgment
//! filters so later checks see the repaired text. Both sides of a pair are
//! always kept or dropped together.

use std::collections::HashSet;

use regex::Regex;
use thiserror::Error;

use crate::corpus_io::SentencePair;

#[derive(Debug, Error)]
pub enum FilterError {
    #[error("unknown filter id `{0}`")]
    UnknownFilterId(String),
    #[error("invalid filter config: {0}")]
    InvalidConfig(String),
}

/// Identifies one filter in the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FilterId {
    FixEncoding,
    NormalizePunctuation,
    Empty,
    Length,
    Charset,
    CaseSymbol,
    EditDistance,
}

impl FilterId {
    pub fn name(self) -> &'static str {
        match self {
            FilterId::FixEncoding => "fix_encoding",
            FilterId::NormalizePunctuation => "normalize_punctuation",
            FilterId::Empty => "empty",
            FilterId::Length => "length",
            FilterId::Charset => "charset",
            FilterId::CaseSymbol => "case_symbol",
            FilterId::EditDistance => "edit_distance",
        }
    }

    pub fn parse(name: &str) -> Result<Self, FilterError> {
        match name {
            "fix_encoding" => Ok(FilterId::FixEncoding),
            "normalize_punctuation" => Ok(FilterId::NormalizePunctuation),
            "empty" => Ok(FilterId::Empty),
            "length" => Ok(FilterId::Length),
            "charset" => Ok(FilterId::Charset),
            "case_symbol" => Ok(FilterId::CaseSymbol),
            "edit_distance" => Ok(FilterId::EditDistance),
            other => Err(FilterError::UnknownFilterId(other.to_string())),
        }
    }
}

/// Runs fixes before judgments, cheap checks before expensive ones.
pub const DEFAULT_CHAIN: [FilterId; 7] = [
    FilterId::FixEncoding,
    FilterId::NormalizePunctuation,
    FilterId::Empty,
    FilterId::Length,
    FilterId::Charset,
    FilterId::CaseSymbol,
    FilterId::EditDistance,
];

/// Machine-readable reason a pair was dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropReason {
    EmptySource,
    EmptyTarget,
    TooShort,
    TooLong,
    TooManyTokens,
    LengthRatio,
    CharsetSource,
    CharsetTarget,
    DigitMismatch,
    SymbolMismatch,
    CaseMismatch,
    NearCopy,
    EncodingUnresolved,
}

impl DropReason {
    pub fn code(self) -> &'static str {
        match self {
            DropReason::EmptySource => "empty_source",
            DropReason::EmptyTarget => "empty_target",
            DropReason::TooShort => "too_short",
            DropReason::TooLong => "too_long",
            DropReason::TooManyTokens => "too_many_tokens",
            DropReason::LengthRatio => "length_ratio",
            DropReason::CharsetSource => "charset_source",
            DropReason::CharsetTarget => "charset_target",
            DropReason::DigitMismatch => "digit_mismatch",
            DropReason::SymbolMismatch => "symbol_mismatch",
            DropReason::CaseMismatch => "case_mismatch",
            DropReason::NearCopy => "near_copy",
            DropReason::EncodingUnresolved => "encoding_unresolved",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FilterAction {
    Keep,
    Drop(DropReason),
    Fix { source: String, target: String },
}

/// One filter's outcome for one pair.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterVerdict {
    pub filter: FilterId,
    pub action: FilterAction,
}

impl FilterVerdict {
    fn keep(filter: FilterId) -> Self {
        FilterVerdict {
            filter,
            action: FilterAction::Keep,
        }
    }

    fn drop(filter: FilterId, reason: DropReason) -> Self {
        FilterVerdict {
            filter,
            action: FilterAction::Drop(reason),
        }
    }

    pub fn is_keep(&self) -> bool {
        matches!(self.action, FilterAction::Keep)
    }
}

/// Codepoint whitelist with a fast path for ASCII.
#[derive(Debug, Clone)]
pub struct CharSet {
    ascii: [bool; 128],
    other: HashSet<char>,
}

impl CharSet {
    pub fn from_chars<I: IntoIterator<Item = char>>(chars: I) -> Self {
        let mut set = CharSet {
            ascii: [false; 128],
            other: HashSet::new(),
        };
        for c in chars {
            set.insert(c);
        }
        set
    }

    pub fn insert(&mut self, c: char) {
        if (c as u32) < 128 {
            self.ascii[c as usize] = true;
        } else {
            self.other.insert(c);
        }
    }

    pub fn contains(&self, c: char) -> bool {
        if (c as u32) < 128 {
            self.ascii[c as usize]
        } else {
            self.other.contains(&c)
        }
    }

    /// Printable ASCII: letters, digits, space and punctuation.
    pub fn english() -> Self {
        CharSet::from_chars((0x20u8..0x7F).map(char::from))
    }

    /// Printable ASCII plus the accented and special Icelandic letters.
    pub fn icelandic() -> Self {
        let mut set = CharSet::english();
        for c in "áéíóúýþæöðÁÉÍÓÚÝÞÆÖÐ".chars() {
            set.insert(c);
        }
        set
    }
}

/// Ordered literal replacements applied by [`fix_encoding`].
pub type MojibakeTable = Vec<(String, String)>;

/// UTF-8-read-as-Latin-1 corruptions of the Icelandic letters, each mapped
/// back to the original letter.
pub fn default_mojibake_table() -> MojibakeTable {
    "áéíóúýþæöðÁÉÍÓÚÝÞÆÖÐ"
        .chars()
        .map(|c| {
            let mut buf = [0u8; 4];
            let pattern: String = c
                .encode_utf8(&mut buf)
                .bytes()
                .map(char::from)
                .collect();
            (pattern, c.to_string())
        })
        .collect()
}

/// Thresholds and tables for the whole chain. All fields are configurable;
/// the defaults are standard bitext-cleaning practice.
#[derive(Debug, Clone)]
pub struct FilterConfig {
    pub min_chars: usize,
    pub max_chars: usize,
    pub max_tokens: usize,
    /// Maximum allowed token-length ratio max(|s|,|t|)/min(|s|,|t|).
    pub length_ratio_max: f64,
    pub charset_source: CharSet,
    pub charset_target: CharSet,
    /// Fraction of non-whitelisted codepoints tolerated per side.
    pub charset_tolerance: f64,
    /// Allowed difference in sentence-final/bracket/quote symbol counts.
    pub symbol_slack: usize,
    /// Pairs with normalized edit distance below this are near-copies.
    pub edit_distance_min_normalized: f64,
    pub mojibake_table: MojibakeTable,
    pub regex_fixes: Vec<(Regex, String)>,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            min_chars: 1,
            max_chars: 1000,
            max_tokens: 250,
            length_ratio_max: 9.0,
            charset_source: CharSet::english(),
            charset_target: CharSet::icelandic(),
            charset_tolerance: 0.0,
            symbol_slack: 2,
            edit_distance_min_normalized: 0.3,
            mojibake_table: default_mojibake_table(),
            regex_fixes: Vec::new(),
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<(), FilterError> {
        if self.min_chars > self.max_chars {
            return Err(FilterError::InvalidConfig(format!(
                "min_chars {} exceeds max_chars {}",
                self.min_chars, self.max_chars
            )));
        }
        if self.length_ratio_max < 1.0 {
            return Err(FilterError::InvalidConfig(format!(
                "length_ratio_max must be >= 1, got {}",
                self.length_ratio_max
            )));
        }
        if !(0.0..=1.0).contains(&self.edit_distance_min_normalized) {
            return Err(FilterError::InvalidConfig(format!(
                "edit_distance_min_normalized must be in [0,1], got {}",
                self.edit_distance_min_normalized
            )));
        }
        if !(0.0..=1.0).contains(&self.charset_tolerance) {
            return Err(FilterError::InvalidConfig(format!(
                "charset_tolerance must be in [0,1], got {}",
                self.charset_tolerance
            )));
        }
        Ok(())
    }
}

/// Drops pairs where either side is empty or whitespace-only.
pub fn filter_empty(pair: &SentencePair) -> FilterVerdict {
    if pair.source.trim().is_empty() {
        FilterVerdict::drop(FilterId::Empty, DropReason::EmptySource)
    } else if pair.target.trim().is_empty() {
        FilterVerdict::drop(FilterId::Empty, DropReason::EmptyTarget)
    } else {
        FilterVerdict::keep(FilterId::Empty)
    }
}

/// Enforces character/token length cut-offs and the token-length ratio.
pub fn filter_length(pair: &SentencePair, cfg: &FilterConfig) -> FilterVerdict {
    let src_chars = pair.source.chars().count();
    let tgt_chars = pair.target.chars().count();
    if src_chars < cfg.min_chars || tgt_chars < cfg.min_chars {
        return FilterVerdict::drop(FilterId::Length, DropReason::TooShort);
    }
    if src_chars > cfg.max_chars || tgt_chars > cfg.max_chars {
        return FilterVerdict::drop(FilterId::Length, DropReason::TooLong);
    }
    let src_tokens = pair.source.split_whitespace().count();
    let tgt_tokens = pair.target.split_whitespace().count();
    if src_tokens > cfg.max_tokens || tgt_tokens > cfg.max_tokens {
        return FilterVerdict::drop(FilterId::Length, DropReason::TooManyTokens);
    }
    let (hi, lo) = if src_tokens >= tgt_tokens {
        (src_tokens, tgt_tokens)
    } else {
        (tgt_tokens, src_tokens)
    };
    let ratio = if lo == 0 {
        f64::INFINITY
    } else {
        hi as f64 / lo as f64
    };
    if ratio > cfg.length_ratio_max {
        return FilterVerdict::drop(FilterId::Length, DropReason::LengthRatio);
    }
    FilterVerdict::keep(FilterId::Length)
}

fn disallowed_fraction(text: &str, set: &CharSet) -> f64 {
    let mut total = 0usize;
    let mut bad = 0usize;
    for c in text.chars() {
        total += 1;
        if !set.contains(c) {
            bad += 1;
        }
    }
    if total == 0 {
        0.0
    } else {
        bad as f64 / total as f64
    }
}

/// Drops pairs whose share of non-whitelisted codepoints exceeds the
/// tolerance on either side.
pub fn filter_charset(pair: &SentencePair, cfg: &FilterConfig) -> FilterVerdict {
    if disallowed_fraction(&pair.source, &cfg.charset_source) > cfg.charset_tolerance {
        return FilterVerdict::drop(FilterId::Charset, DropReason::CharsetSource);
    }
    if disallowed_fraction(&pair.target, &cfg.charset_target) > cfg.charset_tolerance {
        return FilterVerdict::drop(FilterId::Charset, DropReason::CharsetTarget);
    }
    FilterVerdict::keep(FilterId::Charset)
}

fn digit_counts(text: &str) -> [u32; 10] {
    let mut counts = [0u32; 10];
    for c in text.chars() {
        if let Some(d) = c.to_digit(10) {
            counts[d as usize] += 1;
        }
    }
    counts
}

const PAIRED_SYMBOLS: &str = ".!?…()[]{}\"'«»“”‘’‚„‹›";

fn symbol_count(text: &str) -> usize {
    text.chars().filter(|c| PAIRED_SYMBOLS.contains(*c)).count()
}

fn is_all_uppercase(text: &str) -> bool {
    let mut has_alpha = false;
    for c in text.chars() {
        if c.is_alphabetic() {
            has_alpha = true;
            if c.is_lowercase() {
                return false;
            }
        }
    }
    has_alpha
}

/// Drops pairs with differing digit multisets, badly mismatched
/// sentence-final/bracket/quote counts, or one-sided all-caps shouting.
pub fn filter_case_symbol_mismatch(pair: &SentencePair, cfg: &FilterConfig) -> FilterVerdict {
    if digit_counts(&pair.source) != digit_counts(&pair.target) {
        return FilterVerdict::drop(FilterId::CaseSymbol, DropReason::DigitMismatch);
    }
    let diff = symbol_count(&pair.source).abs_diff(symbol_count(&pair.target));
    if diff > cfg.symbol_slack {
        return FilterVerdict::drop(FilterId::CaseSymbol, DropReason::SymbolMismatch);
    }
    if is_all_uppercase(&pair.source) != is_all_uppercase(&pair.target) {
        return FilterVerdict::drop(FilterId::CaseSymbol, DropReason::CaseMismatch);
    }
    FilterVerdict::keep(FilterId::CaseSymbol)
}

/// Exact unit-cost edit distance over codepoints, two-row dynamic program.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a_chars: Vec<char> = a.chars().collect();
    let b_chars: Vec<char> = b.chars().collect();
    levenshtein_chars(&a_chars, &b_chars)
}

fn levenshtein_chars(a: &[char], b: &[char]) -> usize {
    // Keep the shorter string in the inner loop.
    let (a, b) = if a.len() < b.len() { (b, a) } else { (a, b) };
    if b.is_empty() {
        return a.len();
    }
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, &ca) in a.iter().enumerate() {
        let mut prev_diag = row[0];
        row[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let cost = usize::from(ca != cb);
            let val = (row[j + 1] + 1).min(row[j] + 1).min(prev_diag + cost);
            prev_diag = row[j + 1];
            row[j + 1] = val;
        }
    }
    row[b.len()]
}

/// Like [`levenshtein`] but gives up once the distance provably exceeds
/// `bound`, returning `None`. Used by the chain to skip full DP on pairs
/// that are clearly not near-copies.
fn levenshtein_within(a: &[char], b: &[char], bound: usize) -> Option<usize> {
    if a.len().abs_diff(b.len()) > bound {
        return None;
    }
    let (a, b) = if a.len() < b.len() { (b, a) } else { (a, b) };
    if b.is_empty() {
        return (a.len() <= bound).then_some(a.len());
    }
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, &ca) in a.iter().enumerate() {
        let mut prev_diag = row[0];
        row[0] = i + 1;
        let mut row_min = row[0];
        for (j, &cb) in b.iter().enumerate() {
            let cost = usize::from(ca != cb);
            let val = (row[j + 1] + 1).min(row[j] + 1).min(prev_diag + cost);
            prev_diag = row[j + 1];
            row[j + 1] = val;
            row_min = row_min.min(val);
        }
        if row_min > bound {
            return None;
        }
    }
    (row[b.len()] <= bound).then_some(row[b.len()])
}

/// Drops near-copies: pairs whose normalized edit distance
/// `levenshtein(s,t) / max(|s|,|t|)` falls below the configured minimum
/// (untranslated or boilerplate content). Pairs with both sides empty are
/// left alone; the empty filter owns those.
pub fn filter_edit_distance(pair: &SentencePair, cfg: &FilterConfig) -> FilterVerdict {
    let src: Vec<char> = pair.source.chars().collect();
    let tgt: Vec<char> = pair.target.chars().collect();
    let max_len = src.len().max(tgt.len());
    if max_len == 0 {
        return FilterVerdict::keep(FilterId::EditDistance);
    }
    let bound = (cfg.edit_distance_min_normalized * max_len as f64).ceil() as usize;
    match levenshtein_within(&src, &tgt, bound) {
        Some(distance)
            if (distance as f64) < cfg.edit_distance_min_normalized * max_len as f64 =>
        {
            FilterVerdict::drop(FilterId::EditDistance, DropReason::NearCopy)
        }
        _ => FilterVerdict::keep(FilterId::EditDistance),
    }
}

/// Maps typographic punctuation variants to canonical ASCII forms, turns
/// exotic spaces into plain spaces, deletes zero-width characters and
/// collapses whitespace runs. Idempotent.
pub fn normalize_punctuation(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for c in text.chars() {
        let mapped: &str = match c {
            '\u{2018}' | '\u{2019}' | '\u{201A}' | '\u{201B}' | '\u{2032}' | '´' | '`'
            | '\u{2039}' | '\u{203A}' => "'",
            '\u{201C}' | '\u{201D}' | '\u{201E}' | '\u{201F}' | '\u{2033}' | '«' | '»' => "\"",
            '\u{2010}' | '\u{2011}' | '\u{2012}' | '\u{2013}' | '\u{2014}' | '\u{2015}'
            | '\u{2212}' => "-",
            '…' => "...",
            '\u{200B}' | '\u{200C}' | '\u{200D}' | '\u{FEFF}' | '\u{00AD}' => continue,
            c if c.is_whitespace() => {
                pending_space = true;
                continue;
            }
            _ => {
                if pending_space {
                    if !out.is_empty() {
                        out.push(' ');
                    }
                    pending_space = false;
                }
                out.push(c);
                continue;
            }
        };
        if pending_space {
            if !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
        }
        out.push_str(mapped);
    }
    out
}

/// Result of encoding repair on one side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EncodingFix {
    Unchanged,
    Fixed(String),
    /// Replacement characters remain after all table entries ran.
    Unresolved,
}

/// Applies the ordered mojibake replacements; drops text that still carries
/// U+FFFD afterwards.
pub fn fix_encoding(text: &str, table: &MojibakeTable) -> EncodingFix {
    let mut current = std::borrow::Cow::Borrowed(text);
    for (pattern, replacement) in table {
        if current.contains(pattern.as_str()) {
            current = std::borrow::Cow::Owned(current.replace(pattern, replacement));
        }
    }
    if current.contains('\u{FFFD}') {
        return EncodingFix::Unresolved;
    }
    match current {
        std::borrow::Cow::Borrowed(_) => EncodingFix::Unchanged,
        std::borrow::Cow::Owned(fixed) => EncodingFix::Fixed(fixed),
    }
}

fn apply_regex_fixes(text: &str, fixes: &[(Regex, String)]) -> Option<String> {
    let mut current = std::borrow::Cow::Borrowed(text);
    for (regex, replacement) in fixes {
        if regex.is_match(&current) {
            let replaced = regex.replace_all(&current, replacement.as_str()).into_owned();
            current = std::borrow::Cow::Owned(replaced);
        }
    }
    match current {
        std::borrow::Cow::Borrowed(_) => None,
        std::borrow::Cow::Owned(fixed) => Some(fixed),
    }
}

fn evaluate(filter: FilterId, pair: &SentencePair, cfg: &FilterConfig) -> FilterVerdict {
    match filter {
        FilterId::FixEncoding => {
            let mut src = match fix_encoding(&pair.source, &cfg.mojibake_table) {
                EncodingFix::Unresolved => {
                    return FilterVerdict::drop(filter, DropReason::EncodingUnresolved)
                }
                EncodingFix::Fixed(s) => Some(s),
                EncodingFix::Unchanged => None,
            };
            let mut tgt = match fix_encoding(&pair.target, &cfg.mojibake_table) {
                EncodingFix::Unresolved => {
                    return FilterVerdict::drop(filter, DropReason::EncodingUnresolved)
                }
                EncodingFix::Fixed(s) => Some(s),
                EncodingFix::Unchanged => None,
            };
            if !cfg.regex_fixes.is_empty() {
                if let Some(s) = apply_regex_fixes(src.as_deref().unwrap_or(&pair.source), &cfg.regex_fixes) {
                    src = Some(s);
                }
                if let Some(t) = apply_regex_fixes(tgt.as_deref().unwrap_or(&pair.target), &cfg.regex_fixes) {
                    tgt = Some(t);
                }
            }
            if src.is_none() && tgt.is_none() {
                FilterVerdict::keep(filter)
            } else {
                FilterVerdict {
                    filter,
                    action: FilterAction::Fix {
                        source: src.unwrap_or_else(|| pair.source.clone()),
                        target: tgt.unwrap_or_else(|| pair.target.clone()),
                    },
                }
            }
        }
        FilterId::NormalizePunctuation => {
            let src = normalize_punctuation(&pair.source);
            let tgt = normalize_punctuation(&pair.target);
            if src == pair.source && tgt == pair.target {
                FilterVerdict::keep(filter)
            } else {
                FilterVerdict {
                    filter,
                    action: FilterAction::Fix {
                        source: src,
                        target: tgt,
                    },
                }
            }
        }
        FilterId::Empty => filter_empty(pair),
        FilterId::Length => filter_length(pair, cfg),
        FilterId::Charset => filter_charset(pair, cfg),
        FilterId::CaseSymbol => filter_case_symbol_mismatch(pair, cfg),
        FilterId::EditDistance => filter_edit_distance(pair, cfg),
    }
}

/// Final outcome of a chain run.
#[derive(Debug, Clone, PartialEq)]
pub enum ChainOutcome {
    /// The pair survived, with all fixes applied.
    Kept(SentencePair),
    Dropped { filter: FilterId, reason: DropReason },
}

impl ChainOutcome {
    pub fn kept(&self) -> Option<&SentencePair> {
        match self {
            ChainOutcome::Kept(pair) => Some(pair),
            ChainOutcome::Dropped { .. } => None,
        }
    }
}

/// Runs the filters in order; fixes rewrite the pair for subsequent filters
/// and the first drop short-circuits. Returns the outcome plus the full
/// audit trail.
pub fn apply_filter_chain(
    mut pair: SentencePair,
    chain: &[FilterId],
    cfg: &FilterConfig,
) -> (ChainOutcome, Vec<FilterVerdict>) {
    let mut trail = Vec::with_capacity(chain.len());
    for &filter in chain {
        let verdict = evaluate(filter, &pair, cfg);
        match &verdict.action {
            FilterAction::Keep => {}
            FilterAction::Fix { source, target } => {
                pair.source = source.clone();
                pair.target = target.clone();
            }
            FilterAction::Drop(reason) => {
                let reason = *reason;
                trail.push(verdict);
                return (ChainOutcome::Dropped { filter, reason }, trail);
            }
        }
        trail.push(verdict);
    }
    (ChainOutcome::Kept(pair), trail)
}

/// Parses filter names into a chain, rejecting unknown ids.
pub fn parse_chain(names: &[String]) -> Result<Vec<FilterId>, FilterError> {
    names.iter().map(|n| FilterId::parse(n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pair(s: &str, t: &str) -> SentencePair {
        SentencePair::authentic(s, t, 1)
    }

    fn cfg() -> FilterConfig {
        FilterConfig::default()
    }

    #[test]
    fn empty_source_drops() {
        assert_eq!(
            filter_empty(&pair("", "x")).action,
            FilterAction::Drop(DropReason::EmptySource)
        );
        assert_eq!(
            filter_empty(&pair("  \t ", "x")).action,
            FilterAction::Drop(DropReason::EmptySource)
        );
        assert!(filter_empty(&pair("a", "b")).is_keep());
    }

    #[test]
    fn empty_target_drops() {
        assert_eq!(
            filter_empty(&pair("x", " ")).action,
            FilterAction::Drop(DropReason::EmptyTarget)
        );
    }

    #[test]
    fn length_ratio_drops() {
        let mut c = cfg();
        c.length_ratio_max = 2.0;
        assert_eq!(
            filter_length(&pair("one two three four", "einn"), &c).action,
            FilterAction::Drop(DropReason::LengthRatio)
        );
        c.length_ratio_max = 1.0;
        assert!(filter_length(&pair("a b", "c d"), &c).is_keep());
    }

    #[test]
    fn length_cutoffs_drop() {
        let mut c = cfg();
        c.min_chars = 3;
        assert_eq!(
            filter_length(&pair("ab", "abcdef"), &c).action,
            FilterAction::Drop(DropReason::TooShort)
        );
        c = cfg();
        c.max_chars = 4;
        assert_eq!(
            filter_length(&pair("abcde", "ab"), &c).action,
            FilterAction::Drop(DropReason::TooLong)
        );
        c = cfg();
        c.max_tokens = 2;
        assert_eq!(
            filter_length(&pair("a b c", "x y"), &c).action,
            FilterAction::Drop(DropReason::TooManyTokens)
        );
    }

    #[test]
    fn charset_keeps_icelandic_and_drops_cjk() {
        let c = cfg();
        assert!(filter_charset(&pair("This is a test", "Þetta er próf"), &c).is_keep());
        assert_eq!(
            filter_charset(&pair("ok", "inniheldur 漢字 hér"), &c).action,
            FilterAction::Drop(DropReason::CharsetTarget)
        );
        assert_eq!(
            filter_charset(&pair("漢字", "allt í lagi"), &c).action,
            FilterAction::Drop(DropReason::CharsetSource)
        );
    }

    #[test]
    fn charset_tolerance_allows_small_fraction() {
        let mut c = cfg();
        c.charset_tolerance = 0.2;
        // 1 bad codepoint out of 10 = 0.1 <= 0.2.
        assert!(filter_charset(&pair("abcdefghi×", "jklmnopqr"), &c).is_keep());
    }

    #[test]
    fn digit_mismatch_drops() {
        let c = cfg();
        assert!(filter_case_symbol_mismatch(&pair("Room 101", "Herbergi 101"), &c).is_keep());
        assert_eq!(
            filter_case_symbol_mismatch(&pair("Room 101", "Herbergi 11"), &c).action,
            FilterAction::Drop(DropReason::DigitMismatch)
        );
    }

    #[test]
    fn one_sided_all_caps_drops() {
        let c = cfg();
        assert_eq!(
            filter_case_symbol_mismatch(&pair("HELLO THERE", "halló þar"), &c).action,
            FilterAction::Drop(DropReason::CaseMismatch)
        );
        assert!(filter_case_symbol_mismatch(&pair("ALL CAPS", "LÍKA HROP"), &c).is_keep());
    }

    #[test]
    fn symbol_count_mismatch_drops() {
        let c = cfg();
        assert_eq!(
            filter_case_symbol_mismatch(&pair("a (b) [c] \"d\"! end?", "a b c d"), &c).action,
            FilterAction::Drop(DropReason::SymbolMismatch)
        );
        // Within slack of 2.
        assert!(filter_case_symbol_mismatch(&pair("a (b)", "a b"), &c).is_keep());
    }

    #[test]
    fn levenshtein_known_values() {
        assert_eq!(levenshtein("", "abc"), 3);
        assert_eq!(levenshtein("abc", ""), 3);
        assert_eq!(levenshtein("same", "same"), 0);
        assert_eq!(levenshtein("kitten", "sitting"), 3);
        assert_eq!(levenshtein("á", "a"), 1);
    }

    #[test]
    fn edit_distance_drops_near_copies() {
        let c = cfg();
        assert_eq!(
            filter_edit_distance(&pair("www.example.com", "www.example.com"), &c).action,
            FilterAction::Drop(DropReason::NearCopy)
        );
        assert!(filter_edit_distance(&pair("Hello world", "Halló heimur"), &c).is_keep());
        let long = "the quick brown fox jumps over the lazy dog";
        let almost = format!("{long}!");
        assert_eq!(
            filter_edit_distance(&pair(long, &almost), &c).action,
            FilterAction::Drop(DropReason::NearCopy)
        );
    }

    #[test]
    fn spec_distance_example_is_kept() {
        // levenshtein("Hello world", "Halló heimur") = 8, 8/12 > 0.3.
        assert_eq!(levenshtein("Hello world", "Halló heimur"), 8);
    }

    #[test]
    fn normalize_punctuation_examples() {
        assert_eq!(normalize_punctuation("\u{201C}Hi\u{201D}"), "\"Hi\"");
        assert_eq!(normalize_punctuation("a\u{00A0}b"), "a b");
        assert_eq!(normalize_punctuation("a — b"), "a - b");
        assert_eq!(normalize_punctuation("so…"), "so...");
        assert_eq!(normalize_punctuation("a\u{200B}b"), "ab");
        assert_eq!(normalize_punctuation("  a   b  "), "a b");
    }

    #[test]
    fn fix_encoding_repairs_mojibake() {
        let table = default_mojibake_table();
        assert_eq!(
            fix_encoding("Ã¡", &table),
            EncodingFix::Fixed("á".to_string())
        );
        assert_eq!(fix_encoding("hreint", &table), EncodingFix::Unchanged);
        assert_eq!(fix_encoding("br\u{FFFD}k", &table), EncodingFix::Unresolved);
    }

    #[test]
    fn fix_encoding_recovers_latin1_misdecodes() {
        let table = default_mojibake_table();
        // Corruption oracle: re-read each UTF-8 byte as a Latin-1 codepoint.
        let corrupt = |text: &str| -> String {
            text.bytes().map(char::from).collect()
        };
        for original in ["þjóðin", "Árbók", "sæll og blessaður", "ÝMIR", "Ðe"] {
            let damaged = corrupt(original);
            assert_ne!(damaged, original);
            assert_eq!(
                fix_encoding(&damaged, &table),
                EncodingFix::Fixed(original.to_string()),
                "failed to recover {original:?} from {damaged:?}"
            );
        }
    }

    #[test]
    fn chain_short_circuits_on_empty() {
        let (outcome, trail) = apply_filter_chain(pair("", "x"), &DEFAULT_CHAIN, &cfg());
        assert!(matches!(
            outcome,
            ChainOutcome::Dropped {
                filter: FilterId::Empty,
                reason: DropReason::EmptySource
            }
        ));
        // fix_encoding keep, normalize keep, empty drop.
        assert_eq!(trail.len(), 3);
    }

    #[test]
    fn chain_keeps_clean_pair_with_keep_trail() {
        let (outcome, trail) = apply_filter_chain(
            pair("The weather is nice today", "Veðrið er gott í dag"),
            &DEFAULT_CHAIN,
            &cfg(),
        );
        assert!(outcome.kept().is_some());
        assert_eq!(trail.len(), DEFAULT_CHAIN.len());
        assert!(trail.iter().all(|v| v.is_keep()));
    }

    #[test]
    fn chain_fixes_rewrite_pair_for_later_filters() {
        // Mojibake repaired first, then the repaired text passes charset.
        let (outcome, trail) = apply_filter_chain(
            pair("The nation responded", "Ã¾jÃ³Ã°in svaraÃ°i"),
            &DEFAULT_CHAIN,
            &cfg(),
        );
        let kept = outcome.kept().expect("pair should survive");
        assert_eq!(kept.target, "þjóðin svaraði");
        assert!(trail
            .iter()
            .any(|v| matches!(v.action, FilterAction::Fix { .. })));
    }

    #[test]
    fn chain_regex_fixes_apply() {
        let mut c = cfg();
        c.regex_fixes = vec![(Regex::new(r"\bteh\b").unwrap(), "the".to_string())];
        let (outcome, _) = apply_filter_chain(
            pair("teh big question", "stóra spurningin"),
            &DEFAULT_CHAIN,
            &c,
        );
        assert_eq!(outcome.kept().unwrap().source, "the big question");
    }

    #[test]
    fn unknown_filter_id_is_rejected() {
        let err = parse_chain(&["empty".to_string(), "bogus".to_string()]).unwrap_err();
        assert!(matches!(err, FilterError::UnknownFilterId(name) if name == "bogus"));
    }

    // Brute-force reference: full DP matrix, no optimizations.
    fn lev_oracle(a: &str, b: &str) -> usize {
        let a: Vec<char> = a.chars().collect();
        let b: Vec<char> = b.chars().collect();
        let mut m = vec![vec![0usize; b.len() + 1]; a.len() + 1];
        for (i, row) in m.iter_mut().enumerate() {
            row[0] = i;
        }
        for (j, cell) in m[0].iter_mut().enumerate() {
            *cell = j;
        }
        for i in 1..=a.len() {
            for j in 1..=b.len() {
                let cost = usize::from(a[i - 1] != b[j - 1]);
                m[i][j] = (m[i - 1][j] + 1)
                    .min(m[i][j - 1] + 1)
                    .min(m[i - 1][j - 1] + cost);
            }
        }
        m[a.len()][b.len()]
    }

    proptest! {
        #[test]
        fn levenshtein_matches_oracle(a in "[aábc]{0,12}", b in "[aábc]{0,12}") {
            prop_assert_eq!(levenshtein(&a, &b), lev_oracle(&a, &b));
        }

        #[test]
        fn levenshtein_symmetry_and_bounds(a in "[ab]{0,12}", b in "[ab]{0,12}") {
            let d = levenshtein(&a, &b);
            prop_assert_eq!(d, levenshtein(&b, &a));
            let (la, lb) = (a.chars().count(), b.chars().count());
            prop_assert!(d <= la.max(lb));
            prop_assert!(d >= la.abs_diff(lb));
        }

        #[test]
        fn levenshtein_triangle_inequality(
            a in "[ab]{0,8}", b in "[ab]{0,8}", c in "[ab]{0,8}"
        ) {
            prop_assert!(levenshtein(&a, &c) <= levenshtein(&a, &b) + levenshtein(&b, &c));
        }

        #[test]
        fn bounded_agrees_with_exact(a in "[aáb]{0,15}", b in "[aáb]{0,15}", bound in 0usize..16) {
            let exact = levenshtein(&a, &b);
            let ac: Vec<char> = a.chars().collect();
            let bc: Vec<char> = b.chars().collect();
            match levenshtein_within(&ac, &bc, bound) {
                Some(d) => prop_assert_eq!(d, exact),
                None => prop_assert!(exact > bound),
            }
        }

        #[test]
        fn normalize_punctuation_is_idempotent(s in "\\PC{0,40}") {
            let once = normalize_punctuation(&s);
            prop_assert_eq!(normalize_punctuation(&once), once.clone());
        }

        #[test]
        fn fix_encoding_is_idempotent(s in "(\\PC|Ã¡|Ã¾){0,20}") {
            let table = default_mojibake_table();
            if let EncodingFix::Fixed(once) = fix_encoding(&s, &table) {
                prop_assert_eq!(fix_encoding(&once, &table), EncodingFix::Unchanged);
            }
        }

        #[test]
        fn drop_only_chain_output_is_subset(s in "[a-z á]{0,30}", t in "[a-z á]{0,30}") {
            let chain = [FilterId::Empty, FilterId::Length, FilterId::Charset,
                         FilterId::CaseSymbol, FilterId::EditDistance];
            let p = pair(&s, &t);
            let (outcome, _) = apply_filter_chain(p.clone(), &chain, &cfg());
            if let ChainOutcome::Kept(kept) = outcome {
                prop_assert_eq!(kept, p);
            }
        }
    }
}
