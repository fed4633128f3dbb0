//! Streaming readers, writers, deduplication and bookkeeping for
//! sentence-level corpora.
//!
//! Corpora live on disk either as paired files (`name.src` / `name.tgt`, one
//! sentence per line) or as two-column TSV. All readers stream line by line;
//! nothing here buffers a whole corpus.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: invalid UTF-8")]
    Utf8 { path: PathBuf, line: u64 },
    #[error("line counts differ: {shorter} ended at line {lines} while {longer} continues")]
    LineCountMismatch {
        shorter: PathBuf,
        longer: PathBuf,
        lines: u64,
    },
    #[error("{path}:{line}: expected 2 tab-separated columns, found {found}")]
    TsvArity {
        path: PathBuf,
        line: u64,
        found: usize,
    },
    #[error("pair at line {line}: text contains a tab, cannot be written as TSV")]
    TabInCell { line: u64 },
}

impl CorpusError {
    fn io(path: &Path, source: io::Error) -> Self {
        CorpusError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Where a sentence pair came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Authentic,
    Synthetic,
}

/// One aligned source/target sentence pair.
///
/// Neither side contains LF or CR; readers strip line endings and map any
/// interior CR to a space. Authentic pairs never carry tags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentencePair {
    pub source: String,
    pub target: String,
    pub origin: Origin,
    pub tags: Vec<String>,
    pub line_no: u64,
}

impl SentencePair {
    pub fn authentic(source: impl Into<String>, target: impl Into<String>, line_no: u64) -> Self {
        SentencePair {
            source: source.into(),
            target: target.into(),
            origin: Origin::Authentic,
            tags: Vec::new(),
            line_no,
        }
    }

    pub fn synthetic(source: impl Into<String>, target: impl Into<String>, line_no: u64) -> Self {
        SentencePair {
            source: source.into(),
            target: target.into(),
            origin: Origin::Synthetic,
            tags: Vec::new(),
            line_no,
        }
    }
}

/// One monolingual sentence with its 1-based position in the source file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonoSentence {
    pub text: String,
    pub line_no: u64,
}

/// How to handle invalid UTF-8 on input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReadMode {
    /// Replace invalid byte sequences with U+FFFD and count them.
    #[default]
    Replace,
    /// Fail on the first invalid byte sequence.
    Strict,
}

/// Per-corpus bookkeeping: pair and token counts plus per-filter outcomes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub pair_count: u64,
    pub source_tokens: u64,
    pub target_tokens: u64,
    #[serde(default)]
    pub per_filter_drops: BTreeMap<String, u64>,
    #[serde(default)]
    pub per_filter_fixes: BTreeMap<String, u64>,
    #[serde(default)]
    pub duplicate_count: u64,
}

impl CorpusStats {
    pub fn observe(&mut self, pair: &SentencePair) {
        self.pair_count += 1;
        self.source_tokens += pair.source.split_whitespace().count() as u64;
        self.target_tokens += pair.target.split_whitespace().count() as u64;
    }

    pub fn record_drop(&mut self, filter: &str) {
        *self.per_filter_drops.entry(filter.to_string()).or_insert(0) += 1;
    }

    pub fn record_fix(&mut self, filter: &str) {
        *self.per_filter_fixes.entry(filter.to_string()).or_insert(0) += 1;
    }

    pub fn total_drops(&self) -> u64 {
        self.per_filter_drops.values().sum()
    }
}

/// Line-by-line reader over raw bytes, decoding per [`ReadMode`].
///
/// Strips `\n` / `\r\n` endings; interior bare CR becomes a space so the
/// no-linebreak invariant holds. A leading BOM is kept as text (the
/// punctuation normalization filter deletes zero-width characters), which
/// keeps write-then-read an exact identity.
pub struct LineReader<R: Read> {
    inner: BufReader<R>,
    path: PathBuf,
    mode: ReadMode,
    line_no: u64,
    replacements: u64,
    buf: Vec<u8>,
}

impl LineReader<File> {
    pub fn open(path: &Path, mode: ReadMode) -> Result<Self, CorpusError> {
        let file = File::open(path).map_err(|e| CorpusError::io(path, e))?;
        Ok(LineReader::new(file, path, mode))
    }
}

impl<R: Read> LineReader<R> {
    pub fn new(reader: R, path: &Path, mode: ReadMode) -> Self {
        LineReader {
            inner: BufReader::new(reader),
            path: path.to_path_buf(),
            mode,
            line_no: 0,
            replacements: 0,
            buf: Vec::with_capacity(256),
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn line_no(&self) -> u64 {
        self.line_no
    }

    /// Count of U+FFFD substitutions made so far in replace mode.
    pub fn replacements(&self) -> u64 {
        self.replacements
    }

    pub fn next_line(&mut self) -> Option<Result<String, CorpusError>> {
        self.buf.clear();
        match self.inner.read_until(b'\n', &mut self.buf) {
            Ok(0) => None,
            Ok(_) => {
                self.line_no += 1;
                if self.buf.last() == Some(&b'\n') {
                    self.buf.pop();
                }
                if self.buf.last() == Some(&b'\r') {
                    self.buf.pop();
                }
                let mut text = match self.mode {
                    ReadMode::Strict => match std::str::from_utf8(&self.buf) {
                        Ok(s) => s.to_string(),
                        Err(_) => {
                            return Some(Err(CorpusError::Utf8 {
                                path: self.path.clone(),
                                line: self.line_no,
                            }))
                        }
                    },
                    ReadMode::Replace => {
                        let decoded = String::from_utf8_lossy(&self.buf);
                        self.replacements +=
                            decoded.chars().filter(|&c| c == '\u{FFFD}').count() as u64
                                - self.buf
                                    .windows(3)
                                    .filter(|w| *w == [0xEF, 0xBF, 0xBD])
                                    .count() as u64;
                        decoded.into_owned()
                    }
                };
                if text.contains('\r') {
                    text = text.replace('\r', " ");
                }
                Some(Ok(text))
            }
            Err(e) => Some(Err(CorpusError::io(&self.path, e))),
        }
    }
}

/// Streams pairs from two aligned one-sentence-per-line files.
pub struct PairedReader {
    source: LineReader<File>,
    target: LineReader<File>,
    done: bool,
}

impl PairedReader {
    pub fn open(source: &Path, target: &Path, mode: ReadMode) -> Result<Self, CorpusError> {
        Ok(PairedReader {
            source: LineReader::open(source, mode)?,
            target: LineReader::open(target, mode)?,
            done: false,
        })
    }

    pub fn utf8_replacements(&self) -> u64 {
        self.source.replacements() + self.target.replacements()
    }
}

impl Iterator for PairedReader {
    type Item = Result<SentencePair, CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match (self.source.next_line(), self.target.next_line()) {
            (None, None) => None,
            (Some(Ok(src)), Some(Ok(tgt))) => {
                Some(Ok(SentencePair::authentic(src, tgt, self.source.line_no())))
            }
            (Some(Err(e)), _) | (_, Some(Err(e))) => {
                self.done = true;
                Some(Err(e))
            }
            (Some(Ok(_)), None) => {
                self.done = true;
                Some(Err(CorpusError::LineCountMismatch {
                    shorter: self.target.path().to_path_buf(),
                    longer: self.source.path().to_path_buf(),
                    lines: self.target.line_no(),
                }))
            }
            (None, Some(Ok(_))) => {
                self.done = true;
                Some(Err(CorpusError::LineCountMismatch {
                    shorter: self.source.path().to_path_buf(),
                    longer: self.target.path().to_path_buf(),
                    lines: self.source.line_no(),
                }))
            }
        }
    }
}

/// Streams pairs from a two-column TSV, one pair per line.
pub struct TsvReader<R: Read> {
    inner: LineReader<R>,
    done: bool,
}

impl TsvReader<File> {
    pub fn open(path: &Path, mode: ReadMode) -> Result<Self, CorpusError> {
        Ok(TsvReader {
            inner: LineReader::open(path, mode)?,
            done: false,
        })
    }
}

impl<R: Read> TsvReader<R> {
    pub fn new(reader: R, path: &Path, mode: ReadMode) -> Self {
        TsvReader {
            inner: LineReader::new(reader, path, mode),
            done: false,
        }
    }

    pub fn utf8_replacements(&self) -> u64 {
        self.inner.replacements()
    }
}

impl<R: Read> Iterator for TsvReader<R> {
    type Item = Result<SentencePair, CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let line = match self.inner.next_line()? {
            Ok(line) => line,
            Err(e) => {
                self.done = true;
                return Some(Err(e));
            }
        };
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 2 {
            self.done = true;
            return Some(Err(CorpusError::TsvArity {
                path: self.inner.path().to_path_buf(),
                line: self.inner.line_no(),
                found: cols.len(),
            }));
        }
        Some(Ok(SentencePair::authentic(
            cols[0],
            cols[1],
            self.inner.line_no(),
        )))
    }
}

/// Streams monolingual sentences, one per line.
pub struct MonoReader {
    inner: LineReader<File>,
}

impl MonoReader {
    pub fn open(path: &Path, mode: ReadMode) -> Result<Self, CorpusError> {
        Ok(MonoReader {
            inner: LineReader::open(path, mode)?,
        })
    }
}

impl Iterator for MonoReader {
    type Item = Result<MonoSentence, CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        match self.inner.next_line()? {
            Ok(text) => Some(Ok(MonoSentence {
                text,
                line_no: self.inner.line_no(),
            })),
            Err(e) => Some(Err(e)),
        }
    }
}

/// How deduplication keys a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeyMode {
    /// Byte-exact (source, target).
    #[default]
    ExactPair,
    /// Lowercased with whitespace runs collapsed before keying.
    NormalizedPair,
}

/// First-occurrence-wins duplicate detector over 128-bit keys.
///
/// Memory grows with the number of distinct keys only, never with corpus
/// length.
pub struct Deduplicator {
    mode: KeyMode,
    seen: HashSet<u128>,
    duplicates: u64,
    scratch: Vec<u8>,
}

impl Deduplicator {
    pub fn new(mode: KeyMode) -> Self {
        Deduplicator {
            mode,
            seen: HashSet::new(),
            duplicates: 0,
            scratch: Vec::with_capacity(256),
        }
    }

    /// True when this pair's key has not been seen before.
    pub fn is_first(&mut self, pair: &SentencePair) -> bool {
        let key = self.key(pair);
        if self.seen.insert(key) {
            true
        } else {
            self.duplicates += 1;
            false
        }
    }

    pub fn duplicate_count(&self) -> u64 {
        self.duplicates
    }

    pub fn distinct_keys(&self) -> usize {
        self.seen.len()
    }

    fn key(&mut self, pair: &SentencePair) -> u128 {
        self.scratch.clear();
        match self.mode {
            KeyMode::ExactPair => {
                // Length-prefix the source so (a|bc) and (ab|c) cannot collide.
                self.scratch
                    .extend_from_slice(&(pair.source.len() as u64).to_le_bytes());
                self.scratch.extend_from_slice(pair.source.as_bytes());
                self.scratch.extend_from_slice(pair.target.as_bytes());
            }
            KeyMode::NormalizedPair => {
                let src = normalize_for_key(&pair.source);
                let tgt = normalize_for_key(&pair.target);
                self.scratch
                    .extend_from_slice(&(src.len() as u64).to_le_bytes());
                self.scratch.extend_from_slice(src.as_bytes());
                self.scratch.extend_from_slice(tgt.as_bytes());
            }
        }
        twox_hash::XxHash3_128::oneshot(&self.scratch)
    }
}

fn normalize_for_key(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for word in text.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        for c in word.chars() {
            out.extend(c.to_lowercase());
        }
    }
    out
}

/// Drops repeated pairs from a stream, keeping first occurrences in order.
pub fn deduplicate<I>(
    iter: I,
    mode: KeyMode,
) -> impl Iterator<Item = Result<SentencePair, CorpusError>>
where
    I: Iterator<Item = Result<SentencePair, CorpusError>>,
{
    let mut dedup = Deduplicator::new(mode);
    iter.filter(move |item| match item {
        Ok(pair) => dedup.is_first(pair),
        Err(_) => true,
    })
}

/// Destination format for pair corpora.
pub enum PairSink {
    Paired {
        source: BufWriter<File>,
        target: BufWriter<File>,
    },
    Tsv(Box<dyn Write>),
}

/// Writes pairs as LF-terminated UTF-8 lines without a BOM, accumulating
/// stats of everything written.
pub struct CorpusWriter {
    sink: PairSink,
    stats: CorpusStats,
    source_path: PathBuf,
}

impl CorpusWriter {
    pub fn paired(source: &Path, target: &Path) -> Result<Self, CorpusError> {
        let src = File::create(source).map_err(|e| CorpusError::io(source, e))?;
        let tgt = File::create(target).map_err(|e| CorpusError::io(target, e))?;
        Ok(CorpusWriter {
            sink: PairSink::Paired {
                source: BufWriter::new(src),
                target: BufWriter::new(tgt),
            },
            stats: CorpusStats::default(),
            source_path: source.to_path_buf(),
        })
    }

    pub fn tsv(path: &Path) -> Result<Self, CorpusError> {
        let file = File::create(path).map_err(|e| CorpusError::io(path, e))?;
        Ok(CorpusWriter {
            sink: PairSink::Tsv(Box::new(BufWriter::new(file))),
            stats: CorpusStats::default(),
            source_path: path.to_path_buf(),
        })
    }

    pub fn tsv_stream(writer: Box<dyn Write>) -> Self {
        CorpusWriter {
            sink: PairSink::Tsv(writer),
            stats: CorpusStats::default(),
            source_path: PathBuf::from("-"),
        }
    }

    pub fn write(&mut self, pair: &SentencePair) -> Result<(), CorpusError> {
        match &mut self.sink {
            PairSink::Paired { source, target } => {
                writeln!(source, "{}", pair.source)
                    .and_then(|_| writeln!(target, "{}", pair.target))
                    .map_err(|e| CorpusError::io(&self.source_path, e))?;
            }
            PairSink::Tsv(out) => {
                if pair.source.contains('\t') || pair.target.contains('\t') {
                    return Err(CorpusError::TabInCell { line: pair.line_no });
                }
                writeln!(out, "{}\t{}", pair.source, pair.target)
                    .map_err(|e| CorpusError::io(&self.source_path, e))?;
            }
        }
        self.stats.observe(pair);
        Ok(())
    }

    pub fn stats_mut(&mut self) -> &mut CorpusStats {
        &mut self.stats
    }

    pub fn finish(mut self) -> Result<CorpusStats, CorpusError> {
        match &mut self.sink {
            PairSink::Paired { source, target } => {
                source
                    .flush()
                    .and_then(|_| target.flush())
                    .map_err(|e| CorpusError::io(&self.source_path, e))?;
            }
            PairSink::Tsv(out) => out
                .flush()
                .map_err(|e| CorpusError::io(&self.source_path, e))?,
        }
        Ok(self.stats)
    }
}

/// Drains a stream into a paired-file corpus, returning stats of what was
/// written.
pub fn write_corpus<I>(iter: I, source: &Path, target: &Path) -> Result<CorpusStats, CorpusError>
where
    I: Iterator<Item = Result<SentencePair, CorpusError>>,
{
    let mut writer = CorpusWriter::paired(source, target)?;
    for pair in iter {
        writer.write(&pair?)?;
    }
    writer.finish()
}

/// Single-pass pair and token counting.
pub fn compute_stats<I>(iter: I) -> Result<CorpusStats, CorpusError>
where
    I: Iterator<Item = Result<SentencePair, CorpusError>>,
{
    let mut stats = CorpusStats::default();
    for pair in iter {
        stats.observe(&pair?);
    }
    Ok(stats)
}

/// Writes monolingual sentences, one per line.
pub fn write_mono<'a, I>(iter: I, path: &Path) -> Result<u64, CorpusError>
where
    I: Iterator<Item = &'a str>,
{
    let file = File::create(path).map_err(|e| CorpusError::io(path, e))?;
    let mut out = BufWriter::new(file);
    let mut count = 0;
    for line in iter {
        writeln!(out, "{line}").map_err(|e| CorpusError::io(path, e))?;
        count += 1;
    }
    out.flush().map_err(|e| CorpusError::io(path, e))?;
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn pair(s: &str, t: &str) -> SentencePair {
        SentencePair::authentic(s, t, 1)
    }

    fn tsv_from(data: &str) -> TsvReader<Cursor<Vec<u8>>> {
        TsvReader::new(
            Cursor::new(data.as_bytes().to_vec()),
            Path::new("test.tsv"),
            ReadMode::Replace,
        )
    }

    #[test]
    fn paired_single_line() {
        let dir = tempfile::tempdir().unwrap();
        let src = dir.path().join("a.src");
        let tgt = dir.path().join("a.tgt");
        std::fs::write(&src, "Hello\n").unwrap();
        std::fs::write(&tgt, "Halló\n").unwrap();
        let pairs: Vec<_> = PairedReader::open(&src, &tgt, ReadMode::Strict)
            .unwrap()
            .map(|p| p.unwrap())
            .collect();
        assert_eq!(pairs, vec![SentencePair::authentic("Hello", "Halló", 1)]);
    }

    #[test]
    fn paired_line_count_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let src = dir.path().join("a.src");
        let tgt = dir.path().join("a.tgt");
        std::fs::write(&src, "a\nb\nc\n").unwrap();
        std::fs::write(&tgt, "x\ny\n").unwrap();
        let results: Vec<_> = PairedReader::open(&src, &tgt, ReadMode::Strict)
            .unwrap()
            .collect();
        assert_eq!(results.len(), 3);
        assert!(matches!(
            results[2],
            Err(CorpusError::LineCountMismatch { .. })
        ));
    }

    #[test]
    fn tsv_in_order_matches_line_split() {
        let data = "a\tb\nc\td\n";
        let pairs: Vec<_> = tsv_from(data).map(|p| p.unwrap()).collect();
        // Oracle: split the raw text by lines and tabs independently.
        let expected: Vec<(String, String)> = data
            .lines()
            .map(|l| {
                let (s, t) = l.split_once('\t').unwrap();
                (s.to_string(), t.to_string())
            })
            .collect();
        assert_eq!(pairs.len(), expected.len());
        for (got, want) in pairs.iter().zip(&expected) {
            assert_eq!((got.source.clone(), got.target.clone()), *want);
        }
    }

    #[test]
    fn tsv_arity_error() {
        let results: Vec<_> = tsv_from("a\tb\tc\n").collect();
        assert!(matches!(
            results[0],
            Err(CorpusError::TsvArity { found: 3, .. })
        ));
    }

    #[test]
    fn strict_mode_rejects_invalid_utf8() {
        let mut reader = LineReader::new(
            Cursor::new(vec![b'a', 0xFF, b'b', b'\n']),
            Path::new("bad.txt"),
            ReadMode::Strict,
        );
        assert!(matches!(
            reader.next_line(),
            Some(Err(CorpusError::Utf8 { line: 1, .. }))
        ));
    }

    #[test]
    fn replace_mode_counts_substitutions() {
        let mut reader = LineReader::new(
            Cursor::new(vec![b'a', 0xFF, b'b', b'\n']),
            Path::new("bad.txt"),
            ReadMode::Replace,
        );
        let line = reader.next_line().unwrap().unwrap();
        assert_eq!(line, "a\u{FFFD}b");
        assert_eq!(reader.replacements(), 1);
    }

    #[test]
    fn replace_mode_keeps_existing_replacement_chars_uncounted() {
        let mut reader = LineReader::new(
            Cursor::new("pre\u{FFFD}existing\n".as_bytes().to_vec()),
            Path::new("x.txt"),
            ReadMode::Replace,
        );
        let line = reader.next_line().unwrap().unwrap();
        assert_eq!(line, "pre\u{FFFD}existing");
        assert_eq!(reader.replacements(), 0);
    }

    #[test]
    fn crlf_is_stripped_and_bom_kept_as_text() {
        let mut reader = LineReader::new(
            Cursor::new(b"\xEF\xBB\xBFfirst\r\nsecond\n".to_vec()),
            Path::new("x.txt"),
            ReadMode::Strict,
        );
        // The BOM codepoint stays; the normalize filter removes it later.
        assert_eq!(reader.next_line().unwrap().unwrap(), "\u{FEFF}first");
        assert_eq!(reader.next_line().unwrap().unwrap(), "second");
        assert!(reader.next_line().is_none());
    }

    #[test]
    fn dedup_exact_duplicate() {
        let input = vec![pair("a", "b"), pair("a", "b"), pair("c", "d")];
        let out: Vec<_> = deduplicate(input.into_iter().map(Ok), KeyMode::ExactPair)
            .map(|p| p.unwrap())
            .collect();
        assert_eq!(out, vec![pair("a", "b"), pair("c", "d")]);
    }

    #[test]
    fn dedup_normalized_folds_case_and_whitespace() {
        let input = vec![pair("a", "b"), pair("A", " b "), pair("a  x", "b")];
        let out: Vec<_> = deduplicate(input.into_iter().map(Ok), KeyMode::NormalizedPair)
            .map(|p| p.unwrap())
            .collect();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0], pair("a", "b"));
    }

    #[test]
    fn dedup_planted_duplicates_against_set_oracle() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut pairs: Vec<SentencePair> = (0..9000)
            .map(|i| {
                pair(
                    &format!("src sentence {i} {}", rng.gen::<u32>()),
                    &format!("tgt sentence {i} {}", rng.gen::<u32>()),
                )
            })
            .collect();
        // Plant 1000 duplicates of existing lines at random positions.
        for _ in 0..1000 {
            let victim = pairs[rng.gen_range(0..9000)].clone();
            let at = rng.gen_range(0..pairs.len());
            pairs.insert(at, victim);
        }
        let mut oracle: HashSet<(String, String)> = HashSet::new();
        let expected: Vec<SentencePair> = pairs
            .iter()
            .filter(|p| oracle.insert((p.source.clone(), p.target.clone())))
            .cloned()
            .collect();
        assert_eq!(expected.len(), 9000);

        let mut dedup = Deduplicator::new(KeyMode::ExactPair);
        let survivors: Vec<SentencePair> = pairs
            .iter()
            .filter(|p| dedup.is_first(p))
            .cloned()
            .collect();
        assert_eq!(survivors, expected);
        assert_eq!(dedup.duplicate_count(), 1000);
        assert_eq!(dedup.distinct_keys(), 9000);
    }

    #[test]
    fn dedup_is_idempotent() {
        let input = vec![pair("a", "b"), pair("a", "b"), pair("c", "d")];
        let once: Vec<_> = deduplicate(input.into_iter().map(Ok), KeyMode::ExactPair)
            .map(|p| p.unwrap())
            .collect();
        let twice: Vec<_> = deduplicate(once.clone().into_iter().map(Ok), KeyMode::ExactPair)
            .map(|p| p.unwrap())
            .collect();
        assert_eq!(once, twice);
    }

    #[test]
    fn write_then_read_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let src = dir.path().join("out.src");
        let tgt = dir.path().join("out.tgt");
        let pairs = vec![pair("Hello world", "Halló heimur"), pair("x", "y")];
        let stats = write_corpus(pairs.clone().into_iter().map(Ok), &src, &tgt).unwrap();
        assert_eq!(stats.pair_count, 2);
        let back: Vec<_> = PairedReader::open(&src, &tgt, ReadMode::Strict)
            .unwrap()
            .map(|p| p.unwrap())
            .collect();
        assert_eq!(
            back.iter()
                .map(|p| (p.source.as_str(), p.target.as_str()))
                .collect::<Vec<_>>(),
            pairs
                .iter()
                .map(|p| (p.source.as_str(), p.target.as_str()))
                .collect::<Vec<_>>()
        );
    }

    #[test]
    fn empty_stream_writes_empty_files() {
        let dir = tempfile::tempdir().unwrap();
        let src = dir.path().join("out.src");
        let tgt = dir.path().join("out.tgt");
        let stats = write_corpus(std::iter::empty(), &src, &tgt).unwrap();
        assert_eq!(stats.pair_count, 0);
        assert_eq!(std::fs::read(&src).unwrap().len(), 0);
        assert_eq!(std::fs::read(&tgt).unwrap().len(), 0);
    }

    #[test]
    fn tsv_writer_rejects_tabs() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.tsv");
        let mut writer = CorpusWriter::tsv(&path).unwrap();
        let err = writer.write(&pair("a\tb", "c")).unwrap_err();
        assert!(matches!(err, CorpusError::TabInCell { .. }));
    }

    #[test]
    fn stats_counts_tokens() {
        let stats = compute_stats(vec![Ok(pair("a b", "c"))].into_iter()).unwrap();
        assert_eq!(stats.pair_count, 1);
        assert_eq!(stats.source_tokens, 2);
        assert_eq!(stats.target_tokens, 1);
    }

    #[test]
    fn stats_empty_stream_is_all_zeros() {
        let stats = compute_stats(std::iter::empty()).unwrap();
        assert_eq!(stats, CorpusStats::default());
    }
}
