//! Iterative backtranslation orchestration: drive an external translator
//! over monolingual text, build tagged/noised synthetic corpora, mix with
//! authentic data, call an external trainer, and stop once each direction
//! has trained on synthetic data whose generator had itself seen synthetic
//! data.
//!
//! Translators and trainers are external commands speaking newline-delimited
//! UTF-8 on stdin/stdout, so the loop runs against anything from a mock
//! word-reverser to a GPU cluster wrapper.

use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::augment::{mix_corpora, tag_synthetic, MixMode, MixSpec, TagSpec};
use crate::corpus_io::{
    CorpusWriter, MonoReader, Origin, PairedReader, ReadMode, SentencePair,
};
use crate::noising::{noise_sentence, NoiseConfig};
use crate::util::{derive_seed, sha256_file};

#[derive(Debug, Error)]
pub enum BtError {
    #[error("failed to spawn `{program}`: {source}")]
    Spawn {
        program: String,
        #[source]
        source: std::io::Error,
    },
    #[error("translator exited with {status}: {stderr}")]
    NonZeroExit { status: String, stderr: String },
    #[error("translator timed out after {secs}s")]
    Timeout { secs: u64 },
    #[error("translator emitted {actual} lines for {expected} inputs")]
    LineCountMismatch { expected: usize, actual: usize },
    #[error("trainer exited with {status}: {stderr}")]
    TrainerFailed { status: String, stderr: String },
    #[error("iteration {iteration} for {direction} already exists at {path}")]
    IterationExists {
        iteration: u32,
        direction: Direction,
        path: PathBuf,
    },
    #[error(transparent)]
    Corpus(#[from] crate::corpus_io::CorpusError),
    #[error(transparent)]
    Augment(#[from] crate::augment::AugmentError),
    #[error(transparent)]
    Noise(#[from] crate::noising::NoiseError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
}

fn io_err(path: &Path, source: std::io::Error) -> BtError {
    BtError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Translation direction being trained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    EnIs,
    IsEn,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::EnIs => "en-is",
            Direction::IsEn => "is-en",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "en-is" => Some(Direction::EnIs),
            "is-en" => Some(Direction::IsEn),
            _ => None,
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            Direction::EnIs => Direction::IsEn,
            Direction::IsEn => Direction::EnIs,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecodeStrategy {
    #[default]
    Beam,
    Sampling,
}

impl DecodeStrategy {
    pub fn as_str(self) -> &'static str {
        match self {
            DecodeStrategy::Beam => "beam",
            DecodeStrategy::Sampling => "sampling",
        }
    }
}

/// How the external translator decodes.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeParams {
    pub strategy: DecodeStrategy,
    pub beam_width: u32,
    pub sampling_temperature: f64,
}

impl Default for DecodeParams {
    fn default() -> Self {
        DecodeParams {
            strategy: DecodeStrategy::Beam,
            beam_width: 4,
            sampling_temperature: 1.0,
        }
    }
}

impl DecodeParams {
    pub fn validate(&self) -> Result<(), BtError> {
        if self.strategy == DecodeStrategy::Beam && self.beam_width < 1 {
            return Err(BtError::InvalidSpec(
                "beam width must be >= 1".to_string(),
            ));
        }
        if self.sampling_temperature <= 0.0 {
            return Err(BtError::InvalidSpec(
                "sampling temperature must be positive".to_string(),
            ));
        }
        Ok(())
    }
}

/// External translator invocation: an argv template with placeholders
/// `{direction}`, `{strategy}`, `{beam_width}` and `{temperature}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslatorSpec {
    pub command: Vec<String>,
    pub batch_size: usize,
    /// Seconds per batch; 0 disables the timeout.
    pub timeout_secs: u64,
}

impl TranslatorSpec {
    pub fn validate(&self) -> Result<(), BtError> {
        if self.command.is_empty() {
            return Err(BtError::InvalidSpec("translator command is empty".into()));
        }
        if self.batch_size == 0 {
            return Err(BtError::InvalidSpec("batch_size must be >= 1".into()));
        }
        if !self.command.iter().any(|a| a.contains("{direction}")) {
            return Err(BtError::InvalidSpec(
                "translator command must contain a {direction} placeholder".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(unix)]
fn kill_process_group(child: &mut std::process::Child) {
    unsafe {
        libc::killpg(child.id() as i32, libc::SIGKILL);
    }
}

#[cfg(not(unix))]
fn kill_process_group(child: &mut std::process::Child) {
    let _ = child.kill();
}

fn render_command(
    template: &[String],
    direction: Direction,
    params: &DecodeParams,
) -> Vec<String> {
    template
        .iter()
        .map(|arg| {
            arg.replace("{direction}", direction.as_str())
                .replace("{strategy}", params.strategy.as_str())
                .replace("{beam_width}", &params.beam_width.to_string())
                .replace("{temperature}", &params.sampling_temperature.to_string())
        })
        .collect()
}

/// Sends exactly N lines to the translator's stdin and reads exactly N
/// lines back; output i is the translation of input i.
pub fn translate_batch(
    spec: &TranslatorSpec,
    direction: Direction,
    params: &DecodeParams,
    sentences: &[&str],
) -> Result<Vec<String>, BtError> {
    let argv = render_command(&spec.command, direction, params);
    let mut command = Command::new(&argv[0]);
    command
        .args(&argv[1..])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    // Run the translator in its own process group so a timeout can take
    // down shell wrappers together with their children.
    #[cfg(unix)]
    std::os::unix::process::CommandExt::process_group(&mut command, 0);
    let mut child = command.spawn().map_err(|e| BtError::Spawn {
        program: argv[0].clone(),
        source: e,
    })?;

    let mut stdin = child.stdin.take().expect("stdin piped");
    let stdout = child.stdout.take().expect("stdout piped");
    let mut stderr = child.stderr.take().expect("stderr piped");

    let mut input = String::new();
    for s in sentences {
        input.push_str(s);
        input.push('\n');
    }
    // Writer and readers run on their own threads so a full pipe can never
    // deadlock against an unread one.
    let writer = std::thread::spawn(move || {
        let _ = stdin.write_all(input.as_bytes());
    });
    let reader = std::thread::spawn(move || {
        BufReader::new(stdout)
            .lines()
            .map_while(Result::ok)
            .collect::<Vec<String>>()
    });
    let err_reader = std::thread::spawn(move || {
        let mut buf = String::new();
        let _ = stderr.read_to_string(&mut buf);
        buf
    });

    let deadline = (spec.timeout_secs > 0)
        .then(|| Instant::now() + Duration::from_secs(spec.timeout_secs));
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break status,
            Ok(None) => {
                if deadline.is_some_and(|d| Instant::now() > d) {
                    kill_process_group(&mut child);
                    let _ = child.wait();
                    let _ = writer.join();
                    let _ = reader.join();
                    let _ = err_reader.join();
                    return Err(BtError::Timeout {
                        secs: spec.timeout_secs,
                    });
                }
                std::thread::sleep(Duration::from_millis(2));
            }
            Err(e) => {
                return Err(BtError::Spawn {
                    program: argv[0].clone(),
                    source: e,
                })
            }
        }
    };

    let _ = writer.join();
    let lines = reader.join().expect("reader thread");
    let stderr_text = err_reader.join().expect("stderr thread");

    if !status.success() {
        return Err(BtError::NonZeroExit {
            status: status.to_string(),
            stderr: stderr_text.trim().to_string(),
        });
    }
    if lines.len() != sentences.len() {
        return Err(BtError::LineCountMismatch {
            expected: sentences.len(),
            actual: lines.len(),
        });
    }
    Ok(lines)
}

/// Translates a whole corpus in batches, preserving input order. A batch
/// whose line count comes back wrong is retried once before failing.
pub fn translate_corpus(
    spec: &TranslatorSpec,
    direction: Direction,
    params: &DecodeParams,
    sentences: &[String],
) -> Result<Vec<String>, BtError> {
    let mut out = Vec::with_capacity(sentences.len());
    for batch in sentences.chunks(spec.batch_size) {
        let refs: Vec<&str> = batch.iter().map(String::as_str).collect();
        let lines = match translate_batch(spec, direction, params, &refs) {
            Err(BtError::LineCountMismatch { .. }) => {
                translate_batch(spec, direction, params, &refs)?
            }
            other => other?,
        };
        out.extend(lines);
    }
    Ok(out)
}

/// Monolingual and authentic inputs for one training direction. The
/// authentic paths are oriented source-side/target-side for that direction;
/// the mono corpus is target-language text to be backtranslated.
#[derive(Debug, Clone)]
pub struct DirectionIo {
    pub mono: PathBuf,
    pub authentic_source: PathBuf,
    pub authentic_target: PathBuf,
}

/// Everything one iteration needs besides the per-direction state.
#[derive(Debug, Clone)]
pub struct BtContext {
    pub work_dir: PathBuf,
    pub seed: u64,
    pub translator: TranslatorSpec,
    /// Trainer argv template with `{corpus_source}`, `{corpus_target}` and
    /// `{iteration}` placeholders; `None` skips the training hook.
    pub trainer: Option<Vec<String>>,
    pub decode: DecodeParams,
    /// Noise applied to beam outputs; ignored for sampling decodes.
    pub noise: Option<NoiseConfig>,
    pub tag: TagSpec,
    pub ratio_authentic: u32,
    pub ratio_synthetic: u32,
    pub mix_mode: MixMode,
    /// Where staging directories are created before the publish rename;
    /// defaults to `work_dir` and must share a filesystem with it.
    pub staging_dir: Option<PathBuf>,
    pub en_is: Option<DirectionIo>,
    pub is_en: Option<DirectionIo>,
}

impl BtContext {
    pub fn io(&self, direction: Direction) -> Option<&DirectionIo> {
        match direction {
            Direction::EnIs => self.en_is.as_ref(),
            Direction::IsEn => self.is_en.as_ref(),
        }
    }

    pub fn directions(&self) -> Vec<Direction> {
        let mut dirs = Vec::new();
        if self.en_is.is_some() {
            dirs.push(Direction::EnIs);
        }
        if self.is_en.is_some() {
            dirs.push(Direction::IsEn);
        }
        dirs
    }
}

/// Paths of one completed iteration's artifacts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationArtifacts {
    pub iteration: u32,
    pub dir: PathBuf,
    pub synthetic_source: PathBuf,
    pub synthetic_target: PathBuf,
    pub mixed_source: PathBuf,
    pub mixed_target: PathBuf,
    pub report: PathBuf,
    pub manifest: PathBuf,
}

/// Lineage tracker for one direction. `completed` counts finished
/// iterations, so the next iteration index equals it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationState {
    pub direction: Direction,
    pub completed: u32,
    /// Whether the generator of the last completed iteration's synthetic
    /// data had itself been trained on synthetic data.
    pub generator_saw_bt: bool,
    pub artifacts: Vec<IterationArtifacts>,
}

impl IterationState {
    pub fn new(direction: Direction) -> Self {
        IterationState {
            direction,
            completed: 0,
            generator_saw_bt: false,
            artifacts: Vec::new(),
        }
    }

    /// Lineage flag for a given iteration index: only the iteration-0
    /// generator was trained on parallel data alone.
    pub fn generator_saw_bt_at(iteration: u32) -> bool {
        iteration >= 1
    }
}

/// True once the model just trained consumed synthetic data produced by a
/// generator that had itself seen synthetic data, i.e. after the second
/// iteration of a direction.
pub fn should_stop(state: &IterationState) -> bool {
    state.completed >= 1 && IterationState::generator_saw_bt_at(state.completed - 1)
}

/// Counts written into each iteration's report.json.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct IterationReport {
    pub iteration: u32,
    pub direction: String,
    pub mono_lines: u64,
    pub skipped_empty_mono: u64,
    pub empty_translations: u64,
    pub synthetic_pairs: u64,
    pub tagged_synthetic: u64,
    pub authentic_pairs: u64,
    pub mixed_pairs: u64,
    pub mixed_authentic: u64,
    pub mixed_synthetic: u64,
}

fn iteration_dir_name(iteration: u32, direction: Direction) -> String {
    format!("iter{iteration:03}.{direction}")
}

/// Runs one full iteration for `state.direction`:
/// translate the mono corpus, form noised/tagged synthetic pairs, mix with
/// the authentic corpus, write the training corpus plus report and
/// manifest, call the trainer, then publish the iteration directory with a
/// single rename so an aborted run never leaves partial artifacts visible.
pub fn run_iteration(state: &IterationState, ctx: &BtContext) -> Result<IterationState, BtError> {
    let direction = state.direction;
    let iteration = state.completed;
    let io = ctx.io(direction).ok_or_else(|| {
        BtError::InvalidSpec(format!("no inputs configured for direction {direction}"))
    })?;
    ctx.translator.validate()?;
    ctx.decode.validate()?;

    let final_dir = ctx.work_dir.join(iteration_dir_name(iteration, direction));
    if final_dir.exists() {
        return Err(BtError::IterationExists {
            iteration,
            direction,
            path: final_dir,
        });
    }
    let staging_base = ctx.staging_dir.as_deref().unwrap_or(&ctx.work_dir);
    let tmp_dir = staging_base.join(format!(".tmp.{}", iteration_dir_name(iteration, direction)));
    if tmp_dir.exists() {
        fs::remove_dir_all(&tmp_dir).map_err(|e| io_err(&tmp_dir, e))?;
    }
    fs::create_dir_all(&tmp_dir).map_err(|e| io_err(&tmp_dir, e))?;

    let mut report = IterationReport {
        iteration,
        direction: direction.to_string(),
        ..IterationReport::default()
    };

    // 1. Read the target-language mono corpus; the protocol forbids empty
    // lines, so they are dropped and counted rather than sent.
    let mut mono = Vec::new();
    for sentence in MonoReader::open(&io.mono, ReadMode::Replace)? {
        let sentence = sentence?;
        if sentence.text.trim().is_empty() {
            report.skipped_empty_mono += 1;
        } else {
            mono.push(sentence.text);
        }
    }
    report.mono_lines = mono.len() as u64;

    // 2. Backtranslate: the mono text is target-language, so the translator
    // runs in the reverse direction to produce source-language text.
    let translations =
        translate_corpus(&ctx.translator, direction.reversed(), &ctx.decode, &mono)?;

    // 3. Synthetic pairs (translation becomes the source side), noised when
    // beam decoding is configured with noise, then tagged.
    let noise_cfg = ctx.noise.as_ref().and_then(|n| {
        (ctx.decode.strategy == DecodeStrategy::Beam).then(|| NoiseConfig {
            seed: derive_seed(ctx.seed, &format!("noise/{iteration}/{direction}")),
            ..n.clone()
        })
    });
    let mut synthetic = Vec::with_capacity(mono.len());
    for (idx, (translation, original)) in translations.iter().zip(&mono).enumerate() {
        let mut source = translation.clone();
        if source.trim().is_empty() {
            report.empty_translations += 1;
        } else if let Some(noise) = &noise_cfg {
            source = noise_sentence(&source, noise, idx as u64)?;
        }
        let pair = SentencePair::synthetic(source, original.clone(), idx as u64 + 1);
        let tagged = tag_synthetic(pair, &ctx.tag)?;
        report.tagged_synthetic += 1;
        synthetic.push(tagged);
    }
    report.synthetic_pairs = synthetic.len() as u64;

    let synthetic_src = tmp_dir.join("synthetic.src");
    let synthetic_tgt = tmp_dir.join("synthetic.tgt");
    let mut writer = CorpusWriter::paired(&synthetic_src, &synthetic_tgt)?;
    for pair in &synthetic {
        writer.write(pair)?;
    }
    writer.finish()?;

    // 4. Mix with the (already filtered) authentic corpus.
    let mut authentic = Vec::new();
    for pair in PairedReader::open(&io.authentic_source, &io.authentic_target, ReadMode::Replace)?
    {
        authentic.push(pair?);
    }
    report.authentic_pairs = authentic.len() as u64;
    let mix = MixSpec {
        ratio_authentic: ctx.ratio_authentic,
        ratio_synthetic: ctx.ratio_synthetic,
        mode: ctx.mix_mode,
        shuffle_seed: derive_seed(ctx.seed, &format!("mix/{iteration}/{direction}")),
    };
    let mixed = mix_corpora(authentic, synthetic, &mix)?;
    report.mixed_pairs = mixed.len() as u64;
    report.mixed_authentic = mixed
        .iter()
        .filter(|p| p.origin == Origin::Authentic)
        .count() as u64;
    report.mixed_synthetic = report.mixed_pairs - report.mixed_authentic;

    // 5. Training corpus, report, manifest.
    let mixed_src = tmp_dir.join("mixed.src");
    let mixed_tgt = tmp_dir.join("mixed.tgt");
    let mut writer = CorpusWriter::paired(&mixed_src, &mixed_tgt)?;
    for pair in &mixed {
        writer.write(pair)?;
    }
    writer.finish()?;

    let report_path = tmp_dir.join("report.json");
    let report_json =
        serde_json::to_string_pretty(&report).expect("report serialization cannot fail");
    fs::write(&report_path, report_json).map_err(|e| io_err(&report_path, e))?;

    // 6. Trainer hook, still inside the temp dir: a failed training run
    // must not publish the iteration.
    if let Some(template) = &ctx.trainer {
        run_trainer(template, &mixed_src, &mixed_tgt, iteration)?;
    }

    let manifest_path = tmp_dir.join("manifest.txt");
    write_manifest(&manifest_path, &tmp_dir, state, ctx, io, &report)?;

    // 7. Publish atomically and advance lineage.
    fs::rename(&tmp_dir, &final_dir).map_err(|e| io_err(&final_dir, e))?;

    let mut next = state.clone();
    next.completed = iteration + 1;
    next.generator_saw_bt = IterationState::generator_saw_bt_at(iteration);
    next.artifacts.push(IterationArtifacts {
        iteration,
        dir: final_dir.clone(),
        synthetic_source: final_dir.join("synthetic.src"),
        synthetic_target: final_dir.join("synthetic.tgt"),
        mixed_source: final_dir.join("mixed.src"),
        mixed_target: final_dir.join("mixed.tgt"),
        report: final_dir.join("report.json"),
        manifest: final_dir.join("manifest.txt"),
    });
    Ok(next)
}

fn write_manifest(
    path: &Path,
    tmp_dir: &Path,
    state: &IterationState,
    ctx: &BtContext,
    io: &DirectionIo,
    report: &IterationReport,
) -> Result<(), BtError> {
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(&v);
        out.push('\n');
    };
    kv("iteration", state.completed.to_string());
    kv("direction", state.direction.to_string());
    kv(
        "generator_saw_bt",
        IterationState::generator_saw_bt_at(state.completed).to_string(),
    );
    kv("seed", ctx.seed.to_string());
    kv("mono", io.mono.display().to_string());
    kv("authentic_source", io.authentic_source.display().to_string());
    kv("authentic_target", io.authentic_target.display().to_string());
    kv("mono_lines", report.mono_lines.to_string());
    kv("synthetic_pairs", report.synthetic_pairs.to_string());
    kv("mixed_pairs", report.mixed_pairs.to_string());
    for name in ["synthetic.src", "synthetic.tgt", "mixed.src", "mixed.tgt"] {
        let file = tmp_dir.join(name);
        let hash = sha256_file(&file).map_err(|e| io_err(&file, e))?;
        kv(&format!("sha256_{}", name.replace('.', "_")), hash);
    }
    fs::write(path, out).map_err(|e| io_err(path, e))
}

fn run_trainer(
    template: &[String],
    corpus_source: &Path,
    corpus_target: &Path,
    iteration: u32,
) -> Result<(), BtError> {
    let argv: Vec<String> = template
        .iter()
        .map(|arg| {
            arg.replace("{corpus_source}", &corpus_source.display().to_string())
                .replace("{corpus_target}", &corpus_target.display().to_string())
                .replace("{iteration}", &iteration.to_string())
        })
        .collect();
    if argv.is_empty() {
        return Err(BtError::InvalidSpec("trainer command is empty".into()));
    }
    let output = Command::new(&argv[0])
        .args(&argv[1..])
        .stdin(Stdio::null())
        .output()
        .map_err(|e| BtError::Spawn {
            program: argv[0].clone(),
            source: e,
        })?;
    if !output.status.success() {
        return Err(BtError::TrainerFailed {
            status: output.status.to_string(),
            stderr: String::from_utf8_lossy(&output.stderr).trim().to_string(),
        });
    }
    Ok(())
}

/// Rebuilds a direction's state from the completed iteration directories in
/// `work_dir` (a directory counts once its manifest exists).
pub fn load_state(work_dir: &Path, direction: Direction) -> IterationState {
    let mut state = IterationState::new(direction);
    loop {
        let dir = work_dir.join(iteration_dir_name(state.completed, direction));
        if !dir.join("manifest.txt").is_file() {
            break;
        }
        state.artifacts.push(IterationArtifacts {
            iteration: state.completed,
            synthetic_source: dir.join("synthetic.src"),
            synthetic_target: dir.join("synthetic.tgt"),
            mixed_source: dir.join("mixed.src"),
            mixed_target: dir.join("mixed.tgt"),
            report: dir.join("report.json"),
            manifest: dir.join("manifest.txt"),
            dir,
        });
        state.generator_saw_bt = IterationState::generator_saw_bt_at(state.completed);
        state.completed += 1;
    }
    state
}

/// Removes stale `.tmp.*` staging directories left by interrupted runs.
pub fn clean_stale_tmp(work_dir: &Path) -> Result<(), BtError> {
    if !work_dir.is_dir() {
        return Ok(());
    }
    for entry in fs::read_dir(work_dir).map_err(|e| io_err(work_dir, e))? {
        let entry = entry.map_err(|e| io_err(work_dir, e))?;
        if entry.file_name().to_string_lossy().starts_with(".tmp.") {
            fs::remove_dir_all(entry.path()).map_err(|e| io_err(&entry.path(), e))?;
        }
    }
    Ok(())
}

/// When the loop ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    /// Stop per lineage: two iterations per direction.
    #[default]
    Lineage,
    /// Run exactly `max_iterations` regardless of lineage.
    Force,
}

#[derive(Debug, Clone)]
pub struct LoopOptions {
    pub stop_rule: StopRule,
    /// Hard cap on iterations per direction.
    pub max_iterations: u32,
    /// Directions alternate each round either way; ping-pong is the
    /// semantic default where each direction consumes the other's latest
    /// model output.
    pub resume: bool,
}

impl Default for LoopOptions {
    fn default() -> Self {
        LoopOptions {
            stop_rule: StopRule::Lineage,
            max_iterations: 8,
            resume: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LoopSummary {
    pub states: Vec<IterationState>,
}

fn direction_finished(state: &IterationState, opts: &LoopOptions) -> bool {
    match opts.stop_rule {
        StopRule::Lineage => should_stop(state) || state.completed >= opts.max_iterations,
        StopRule::Force => state.completed >= opts.max_iterations,
    }
}

/// Runs iterations round-robin over the configured directions until every
/// direction satisfies the stop rule.
pub fn run_loop(ctx: &BtContext, opts: &LoopOptions) -> Result<LoopSummary, BtError> {
    fs::create_dir_all(&ctx.work_dir).map_err(|e| io_err(&ctx.work_dir, e))?;
    clean_stale_tmp(&ctx.work_dir)?;
    if let Some(staging) = &ctx.staging_dir {
        fs::create_dir_all(staging).map_err(|e| io_err(staging, e))?;
        clean_stale_tmp(staging)?;
    }
    let mut states: Vec<IterationState> = ctx
        .directions()
        .into_iter()
        .map(|d| {
            if opts.resume {
                load_state(&ctx.work_dir, d)
            } else {
                IterationState::new(d)
            }
        })
        .collect();
    if states.is_empty() {
        return Err(BtError::InvalidSpec(
            "no directions configured for the loop".into(),
        ));
    }
    loop {
        let mut progressed = false;
        for state in states.iter_mut() {
            if !direction_finished(state, opts) {
                *state = run_iteration(state, ctx)?;
                progressed = true;
            }
        }
        if !progressed {
            break;
        }
    }
    Ok(LoopSummary { states })
}
