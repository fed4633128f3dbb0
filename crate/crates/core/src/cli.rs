//! Subcommand wiring: every pipeline stage behind one binary.
//!
//! Exit codes: 0 success, 1 data errors, 2 usage/config errors. Paths given
//! as `-` read stdin / write stdout (TSV for pair corpora).

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::augment::{mix_corpora, tag_synthetic, MixSpec, TagSpec};
use crate::bleu::{bleu, signature};
use crate::bt_loop::run_loop;
use crate::config::{load_or_default, ConfigError, PipelineConfig};
use crate::corpus_io::{
    CorpusError, CorpusStats, CorpusWriter, Deduplicator, KeyMode, PairedReader, ReadMode,
    SentencePair, TsvReader,
};
use crate::filters::{apply_filter_chain, ChainOutcome, FilterAction};
use crate::noising::noise_sentence;
use crate::report::{FileHash, RunReport, StageReport};

/// Errors mapped to exit codes: usage/config problems exit 2, data problems
/// exit 1.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Data(_) => 1,
        }
    }
}

macro_rules! data_err {
    ($from:ty) => {
        impl From<$from> for CliError {
            fn from(e: $from) -> Self {
                CliError::Data(e.to_string())
            }
        }
    };
}

data_err!(CorpusError);
data_err!(crate::filters::FilterError);
data_err!(crate::noising::NoiseError);
data_err!(crate::augment::AugmentError);
data_err!(crate::bt_loop::BtError);
data_err!(crate::bleu::BleuError);
data_err!(io::Error);

#[derive(Parser)]
#[command(
    name = "mtpipe",
    version,
    about = "Streaming bitext pipeline: filtering, dedup, noising, mixing, \
             backtranslation orchestration and BLEU"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct PairInput {
    /// Source-side file of a paired corpus.
    #[arg(long)]
    src: Option<PathBuf>,
    /// Target-side file of a paired corpus.
    #[arg(long)]
    tgt: Option<PathBuf>,
    /// Two-column TSV corpus; `-` reads stdin.
    #[arg(long)]
    tsv: Option<PathBuf>,
    /// Fail on invalid UTF-8 instead of substituting U+FFFD.
    #[arg(long)]
    strict: bool,
}

enum PairStream {
    Paired(PairedReader),
    Tsv(TsvReader<File>),
    TsvStdin(TsvReader<io::Stdin>),
}

impl PairStream {
    fn utf8_replacements(&self) -> u64 {
        match self {
            PairStream::Paired(r) => r.utf8_replacements(),
            PairStream::Tsv(r) => r.utf8_replacements(),
            PairStream::TsvStdin(r) => r.utf8_replacements(),
        }
    }
}

impl Iterator for PairStream {
    type Item = Result<SentencePair, CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        match self {
            PairStream::Paired(r) => r.next(),
            PairStream::Tsv(r) => r.next(),
            PairStream::TsvStdin(r) => r.next(),
        }
    }
}

impl PairInput {
    fn mode(&self) -> ReadMode {
        if self.strict {
            ReadMode::Strict
        } else {
            ReadMode::Replace
        }
    }

    fn open(&self) -> Result<(PairStream, Vec<PathBuf>), CliError> {
        match (&self.src, &self.tgt, &self.tsv) {
            (Some(src), Some(tgt), None) => Ok((
                PairStream::Paired(PairedReader::open(src, tgt, self.mode())?),
                vec![src.clone(), tgt.clone()],
            )),
            (None, None, Some(tsv)) if tsv == Path::new("-") => Ok((
                PairStream::TsvStdin(TsvReader::new(io::stdin(), Path::new("-"), self.mode())),
                Vec::new(),
            )),
            (None, None, Some(tsv)) => Ok((
                PairStream::Tsv(TsvReader::open(tsv, self.mode())?),
                vec![tsv.clone()],
            )),
            _ => Err(CliError::Usage(
                "give either --src and --tgt, or --tsv".to_string(),
            )),
        }
    }
}

#[derive(Args)]
struct PairOutput {
    /// Source-side output file.
    #[arg(long)]
    out_src: Option<PathBuf>,
    /// Target-side output file.
    #[arg(long)]
    out_tgt: Option<PathBuf>,
    /// TSV output file; `-` writes stdout.
    #[arg(long)]
    out_tsv: Option<PathBuf>,
}

impl PairOutput {
    fn open(&self) -> Result<(CorpusWriter, Vec<PathBuf>), CliError> {
        match (&self.out_src, &self.out_tgt, &self.out_tsv) {
            (Some(src), Some(tgt), None) => Ok((
                CorpusWriter::paired(src, tgt)?,
                vec![src.clone(), tgt.clone()],
            )),
            (None, None, Some(tsv)) if tsv == Path::new("-") => Ok((
                CorpusWriter::tsv_stream(Box::new(BufWriter::new(io::stdout()))),
                Vec::new(),
            )),
            (None, None, Some(tsv)) => Ok((CorpusWriter::tsv(tsv)?, vec![tsv.clone()])),
            _ => Err(CliError::Usage(
                "give either --out-src and --out-tgt, or --out-tsv".to_string(),
            )),
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the heuristic filter chain over a pair corpus.
    Filter {
        /// Pipeline config file (defaults apply when omitted).
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        input: PairInput,
        #[command(flatten)]
        output: PairOutput,
        /// Write the machine-readable report here (`-` for stdout).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Remove duplicate pairs, keeping first occurrences in order.
    Dedup {
        /// Keying: exact_pair or normalized_pair.
        #[arg(long, default_value = "exact_pair")]
        key: String,
        #[command(flatten)]
        input: PairInput,
        #[command(flatten)]
        output: PairOutput,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Noise monolingual lines (stdin to stdout by default).
    Noise {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Input lines; `-` reads stdin.
        #[arg(long, default_value = "-")]
        input: PathBuf,
        /// Output lines; `-` writes stdout.
        #[arg(long, default_value = "-")]
        output: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Prefix the tag token to the source side of every pair.
    Tag {
        /// Tag token.
        #[arg(long, default_value = "<bt>")]
        token: String,
        #[command(flatten)]
        input: PairInput,
        #[command(flatten)]
        output: PairOutput,
    },
    /// Mix an authentic corpus with a synthetic one at a target ratio.
    Mix {
        #[arg(long)]
        authentic_src: PathBuf,
        #[arg(long)]
        authentic_tgt: PathBuf,
        #[arg(long)]
        synthetic_src: PathBuf,
        #[arg(long)]
        synthetic_tgt: PathBuf,
        /// authentic:synthetic, e.g. 1:2.
        #[arg(long, default_value = "1:2")]
        ratio: String,
        /// Tag synthetic sources with this token before mixing.
        #[arg(long)]
        tag: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: PairOutput,
    },
    /// Run the iterative backtranslation loop from a config file.
    BtRun {
        #[arg(long)]
        config: PathBuf,
        /// Continue from completed iterations in the work dir.
        #[arg(long)]
        resume: bool,
    },
    /// Corpus BLEU of hypothesis lines against reference lines.
    Bleu {
        #[arg(long)]
        hyp: PathBuf,
        #[arg(long = "ref")]
        reference: PathBuf,
        /// Emit the full JSON record instead of the one-line summary.
        #[arg(long)]
        json: bool,
    },
    /// Count pairs and tokens.
    Stats {
        #[command(flatten)]
        input: PairInput,
        /// Emit JSON instead of the human table.
        #[arg(long)]
        json: bool,
    },
    /// Parse and validate a pipeline config file.
    ValidateConfig { path: PathBuf },
}

/// Parses argv and runs the chosen subcommand.
pub fn run() -> Result<(), CliError> {
    let cli = Cli::parse();
    match cli.command {
        Cmd::Filter {
            config,
            input,
            output,
            report,
        } => cmd_filter(config.as_deref(), input, output, report.as_deref()),
        Cmd::Dedup {
            key,
            input,
            output,
            report,
        } => cmd_dedup(&key, input, output, report.as_deref()),
        Cmd::Noise {
            config,
            input,
            output,
            seed,
        } => cmd_noise(config.as_deref(), &input, &output, seed),
        Cmd::Tag {
            token,
            input,
            output,
        } => cmd_tag(&token, input, output),
        Cmd::Mix {
            authentic_src,
            authentic_tgt,
            synthetic_src,
            synthetic_tgt,
            ratio,
            tag,
            seed,
            output,
        } => cmd_mix(
            &authentic_src,
            &authentic_tgt,
            &synthetic_src,
            &synthetic_tgt,
            &ratio,
            tag.as_deref(),
            seed,
            output,
        ),
        Cmd::BtRun { config, resume } => cmd_bt_run(&config, resume),
        Cmd::Bleu {
            hyp,
            reference,
            json,
        } => cmd_bleu(&hyp, &reference, json),
        Cmd::Stats { input, json } => cmd_stats(input, json),
        Cmd::ValidateConfig { path } => {
            PipelineConfig::load(&path)?;
            eprintln!("{}: ok", path.display());
            Ok(())
        }
    }
}

fn emit_report(report: &RunReport, path: Option<&Path>) -> Result<(), CliError> {
    report.write_human(&mut io::stderr())?;
    match path {
        None => {}
        Some(p) if p == Path::new("-") => {
            let mut out = io::stdout();
            out.write_all(report.to_json().as_bytes())?;
            out.write_all(b"\n")?;
        }
        Some(p) => std::fs::write(p, report.to_json() + "\n").map_err(CliError::from)?,
    }
    Ok(())
}

fn hash_all(paths: &[PathBuf]) -> Result<Vec<FileHash>, CliError> {
    paths
        .iter()
        .map(|p| FileHash::of(p).map_err(CliError::from))
        .collect()
}

fn cmd_filter(
    config: Option<&Path>,
    input: PairInput,
    output: PairOutput,
    report_path: Option<&Path>,
) -> Result<(), CliError> {
    let config = load_or_default(config)?;
    let (chain, fcfg) = config.resolve_filter()?;
    let (stream, input_paths) = input.open()?;
    let (mut writer, output_paths) = output.open()?;
    let started = Instant::now();
    let mut pairs_in = 0u64;
    let mut drops: CorpusStats = CorpusStats::default();
    let mut stream = stream;
    for pair in stream.by_ref() {
        let pair = pair?;
        pairs_in += 1;
        let (outcome, trail) = apply_filter_chain(pair, &chain, &fcfg);
        for verdict in &trail {
            if matches!(verdict.action, FilterAction::Fix { .. }) {
                writer.stats_mut().record_fix(verdict.filter.name());
            }
        }
        match outcome {
            ChainOutcome::Kept(kept) => writer.write(&kept)?,
            ChainOutcome::Dropped { filter, .. } => drops.record_drop(filter.name()),
        }
    }
    let replacements = stream.utf8_replacements();
    let mut stats = writer.finish()?;
    stats.per_filter_drops = drops.per_filter_drops;
    if replacements > 0 {
        stats
            .per_filter_fixes
            .insert("utf8_replace".to_string(), replacements);
    }
    let mut report = RunReport::new(config.seed(), None);
    report.stages.push(StageReport {
        stage: "filter".to_string(),
        pairs_in,
        stats,
        wall_clock_ms: started.elapsed().as_millis() as u64,
        inputs: hash_all(&input_paths)?,
        outputs: hash_all(&output_paths)?,
    });
    emit_report(&report, report_path)
}

fn cmd_dedup(
    key: &str,
    input: PairInput,
    output: PairOutput,
    report_path: Option<&Path>,
) -> Result<(), CliError> {
    let mode = match key {
        "exact_pair" => KeyMode::ExactPair,
        "normalized_pair" => KeyMode::NormalizedPair,
        other => {
            return Err(CliError::Usage(format!(
                "unknown key mode `{other}` (expected exact_pair or normalized_pair)"
            )))
        }
    };
    let (mut stream, input_paths) = input.open()?;
    let (mut writer, output_paths) = output.open()?;
    let started = Instant::now();
    let mut dedup = Deduplicator::new(mode);
    let mut pairs_in = 0u64;
    for pair in stream.by_ref() {
        let pair = pair?;
        pairs_in += 1;
        if dedup.is_first(&pair) {
            writer.write(&pair)?;
        }
    }
    let mut stats = writer.finish()?;
    stats.duplicate_count = dedup.duplicate_count();
    let mut report = RunReport::new(0, None);
    report.stages.push(StageReport {
        stage: "dedup".to_string(),
        pairs_in,
        stats,
        wall_clock_ms: started.elapsed().as_millis() as u64,
        inputs: hash_all(&input_paths)?,
        outputs: hash_all(&output_paths)?,
    });
    emit_report(&report, report_path)
}

fn cmd_noise(
    config: Option<&Path>,
    input: &Path,
    output: &Path,
    seed: Option<u64>,
) -> Result<(), CliError> {
    let config = load_or_default(config)?;
    let mut noise = config.resolve_noise()?;
    if let Some(seed) = seed {
        noise.seed = seed;
    }
    let reader: Box<dyn BufRead> = if input == Path::new("-") {
        Box::new(BufReader::new(io::stdin()))
    } else {
        Box::new(BufReader::new(File::open(input)?))
    };
    let mut writer: Box<dyn Write> = if output == Path::new("-") {
        Box::new(BufWriter::new(io::stdout()))
    } else {
        Box::new(BufWriter::new(File::create(output)?))
    };
    for (ordinal, line) in reader.lines().enumerate() {
        let line = line?;
        let noised = noise_sentence(&line, &noise, ordinal as u64)
            .map_err(|e| CliError::Data(format!("line {}: {e}", ordinal + 1)))?;
        writeln!(writer, "{noised}")?;
    }
    writer.flush()?;
    Ok(())
}

fn cmd_tag(token: &str, input: PairInput, output: PairOutput) -> Result<(), CliError> {
    let tag = TagSpec {
        token: token.to_string(),
    };
    tag.validate()?;
    let (stream, _) = input.open()?;
    let (mut writer, _) = output.open()?;
    for pair in stream {
        let mut pair = pair?;
        pair.origin = crate::corpus_io::Origin::Synthetic;
        let tagged = tag_synthetic(pair, &tag)?;
        writer.write(&tagged)?;
    }
    writer.finish()?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_mix(
    authentic_src: &Path,
    authentic_tgt: &Path,
    synthetic_src: &Path,
    synthetic_tgt: &Path,
    ratio: &str,
    tag: Option<&str>,
    seed: u64,
    output: PairOutput,
) -> Result<(), CliError> {
    let (a, s) = ratio
        .split_once(':')
        .and_then(|(a, s)| Some((a.trim().parse::<u32>().ok()?, s.trim().parse::<u32>().ok()?)))
        .filter(|(a, s)| *a >= 1 && *s >= 1)
        .ok_or_else(|| CliError::Usage(format!("bad --ratio `{ratio}`, expected a:s")))?;
    let mut authentic = Vec::new();
    for pair in PairedReader::open(authentic_src, authentic_tgt, ReadMode::Replace)? {
        authentic.push(pair?);
    }
    let mut synthetic = Vec::new();
    for pair in PairedReader::open(synthetic_src, synthetic_tgt, ReadMode::Replace)? {
        let mut pair = pair?;
        pair.origin = crate::corpus_io::Origin::Synthetic;
        if let Some(token) = tag {
            let spec = TagSpec {
                token: token.to_string(),
            };
            spec.validate()?;
            pair = tag_synthetic(pair, &spec)?;
        }
        synthetic.push(pair);
    }
    let spec = MixSpec {
        ratio_authentic: a,
        ratio_synthetic: s,
        shuffle_seed: seed,
        ..MixSpec::default()
    };
    let mixed = mix_corpora(authentic, synthetic, &spec)?;
    let (mut writer, _) = output.open()?;
    for pair in &mixed {
        writer.write(pair)?;
    }
    writer.finish()?;
    Ok(())
}

fn cmd_bt_run(config: &Path, resume: bool) -> Result<(), CliError> {
    let config = PipelineConfig::load(config)?;
    let (ctx, mut opts) = config.resolve_bt()?;
    if resume {
        opts.resume = true;
    }
    let summary = run_loop(&ctx, &opts)?;
    for state in &summary.states {
        eprintln!(
            "{}: {} iterations complete",
            state.direction, state.completed
        );
        for artifact in &state.artifacts {
            eprintln!("  iter {:03}: {}", artifact.iteration, artifact.dir.display());
        }
    }
    Ok(())
}

fn read_lines(path: &Path) -> Result<Vec<String>, CliError> {
    let reader: Box<dyn BufRead> = if path == Path::new("-") {
        Box::new(BufReader::new(io::stdin()))
    } else {
        Box::new(BufReader::new(File::open(path)?))
    };
    reader
        .lines()
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::from)
}

fn cmd_bleu(hyp: &Path, reference: &Path, json: bool) -> Result<(), CliError> {
    let hyps = read_lines(hyp)?;
    let refs = read_lines(reference)?;
    let score = bleu(&hyps, &refs)?;
    if json {
        #[derive(serde::Serialize)]
        struct Record<'a> {
            signature: &'a str,
            #[serde(flatten)]
            score: &'a crate::bleu::BleuScore,
        }
        println!(
            "{}",
            serde_json::to_string_pretty(&Record {
                signature: signature(),
                score: &score,
            })
            .expect("score serialization cannot fail")
        );
    } else {
        println!(
            "BLEU = {:.1} ({}) bp={:.3} hyp_len={} ref_len={}",
            score.score,
            signature(),
            score.brevity_penalty,
            score.hyp_length,
            score.ref_length
        );
    }
    Ok(())
}

fn cmd_stats(input: PairInput, json: bool) -> Result<(), CliError> {
    let (stream, _) = input.open()?;
    let stats = crate::corpus_io::compute_stats(stream)?;
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&stats).expect("stats serialization cannot fail")
        );
    } else {
        println!(
            "pairs={} src_tokens={} tgt_tokens={}",
            stats.pair_count, stats.source_tokens, stats.target_tokens
        );
    }
    Ok(())
}
