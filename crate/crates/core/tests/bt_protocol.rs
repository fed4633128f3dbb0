//! Translator protocol and iteration mechanics at integration level:
//! ordering across batches, atomic publication, resumability.

use std::path::Path;

use mtpipe::bt_loop::{
    load_state, run_iteration, should_stop, translate_corpus, BtContext, DecodeParams,
    Direction, DirectionIo, IterationState, TranslatorSpec,
};
use mtpipe::noising::NoiseConfig;
use mtpipe::{MixMode, TagSpec};

fn rev_words_spec(batch_size: usize) -> TranslatorSpec {
    TranslatorSpec {
        command: vec![
            env!("CARGO_BIN_EXE_rev-words").to_string(),
            "{direction}".to_string(),
        ],
        batch_size,
        timeout_secs: 60,
    }
}

#[test]
fn ten_thousand_lines_keep_order_across_batches() {
    let sentences: Vec<String> = (0..10_000).map(|i| format!("line {i} payload")).collect();
    let spec = rev_words_spec(256);
    let out = translate_corpus(
        &spec,
        Direction::IsEn,
        &DecodeParams::default(),
        &sentences,
    )
    .unwrap();
    assert_eq!(out.len(), 10_000);
    for (i, line) in out.iter().enumerate() {
        assert_eq!(line, &format!("payload {i} line"));
    }
}

#[test]
fn mock_translator_reverses_words() {
    let spec = rev_words_spec(4);
    let out = translate_corpus(
        &spec,
        Direction::EnIs,
        &DecodeParams::default(),
        &["a b c".to_string()],
    )
    .unwrap();
    assert_eq!(out, vec!["c b a"]);
}

fn write_lines(path: &Path, lines: &[String]) {
    std::fs::write(path, lines.join("\n") + "\n").unwrap();
}

fn context(dir: &Path) -> BtContext {
    let inputs = dir.join("inputs");
    std::fs::create_dir_all(&inputs).unwrap();
    write_lines(
        &inputs.join("mono.is"),
        &(0..20).map(|i| format!("setning {i} hér núna")).collect::<Vec<_>>(),
    );
    write_lines(
        &inputs.join("auth.en"),
        &(0..10).map(|i| format!("line {i} goes here")).collect::<Vec<_>>(),
    );
    write_lines(
        &inputs.join("auth.is"),
        &(0..10).map(|i| format!("lína {i} er hér")).collect::<Vec<_>>(),
    );
    BtContext {
        work_dir: dir.join("work"),
        seed: 3,
        translator: rev_words_spec(8),
        trainer: None,
        decode: DecodeParams::default(),
        noise: Some(NoiseConfig::default()),
        tag: TagSpec::default(),
        ratio_authentic: 1,
        ratio_synthetic: 2,
        mix_mode: MixMode::UpsampleAuthentic,
        staging_dir: None,
        en_is: Some(DirectionIo {
            mono: inputs.join("mono.is"),
            authentic_source: inputs.join("auth.en"),
            authentic_target: inputs.join("auth.is"),
        }),
        is_en: None,
    }
}

#[test]
fn failed_iteration_leaves_no_visible_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let mut ctx = context(dir.path());
    std::fs::create_dir_all(&ctx.work_dir).unwrap();
    // A trainer that always fails aborts step 6, before publication.
    ctx.trainer = Some(vec!["false".to_string()]);
    let state = IterationState::new(Direction::EnIs);
    let err = run_iteration(&state, &ctx).unwrap_err();
    assert!(err.to_string().contains("trainer"), "{err}");
    let visible: Vec<_> = std::fs::read_dir(&ctx.work_dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|name| !name.starts_with(".tmp."))
        .collect();
    assert!(visible.is_empty(), "leaked artifacts: {visible:?}");
}

#[test]
fn iteration_lineage_and_manifest_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let ctx = context(dir.path());
    std::fs::create_dir_all(&ctx.work_dir).unwrap();
    let state = IterationState::new(Direction::EnIs);
    let state = run_iteration(&state, &ctx).unwrap();
    assert_eq!(state.completed, 1);
    assert!(!state.generator_saw_bt);
    assert!(!should_stop(&state));

    let state = run_iteration(&state, &ctx).unwrap();
    assert_eq!(state.completed, 2);
    assert!(state.generator_saw_bt);
    assert!(should_stop(&state));

    let manifest =
        std::fs::read_to_string(ctx.work_dir.join("iter001.en-is/manifest.txt")).unwrap();
    assert!(manifest.contains("iteration = 1"));
    assert!(manifest.contains("generator_saw_bt = true"));
    assert!(manifest.contains("sha256_mixed_src = "));

    // Reloading from disk matches the in-memory lineage.
    let loaded = load_state(&ctx.work_dir, Direction::EnIs);
    assert_eq!(loaded.completed, 2);
    assert!(loaded.generator_saw_bt);
    assert_eq!(loaded.artifacts.len(), 2);
    assert_eq!(loaded.artifacts[1].mixed_source, state.artifacts[1].mixed_source);
}

#[test]
fn empty_mono_lines_are_skipped_not_sent() {
    let dir = tempfile::tempdir().unwrap();
    let ctx = context(dir.path());
    std::fs::create_dir_all(&ctx.work_dir).unwrap();
    // Rewrite the mono corpus with blank lines mixed in.
    let mono = ctx.en_is.as_ref().unwrap().mono.clone();
    std::fs::write(&mono, "fyrsta setningin\n\n  \nönnur setningin hér\n").unwrap();
    let state = run_iteration(&IterationState::new(Direction::EnIs), &ctx).unwrap();
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(&state.artifacts[0].report).unwrap(),
    )
    .unwrap();
    assert_eq!(report["mono_lines"], 2);
    assert_eq!(report["skipped_empty_mono"], 2);
    assert_eq!(report["synthetic_pairs"], 2);
    let synthetic = std::fs::read_to_string(&state.artifacts[0].synthetic_source).unwrap();
    assert_eq!(synthetic.lines().count(), 2);
}

#[test]
fn staging_dir_override_keeps_publication_atomic() {
    let dir = tempfile::tempdir().unwrap();
    let mut ctx = context(dir.path());
    std::fs::create_dir_all(&ctx.work_dir).unwrap();
    let staging = dir.path().join("staging");
    std::fs::create_dir_all(&staging).unwrap();
    ctx.staging_dir = Some(staging.clone());
    let state = run_iteration(&IterationState::new(Direction::EnIs), &ctx).unwrap();
    assert!(state.artifacts[0].manifest.is_file());
    // Nothing left behind in the staging area after the publish rename.
    assert_eq!(std::fs::read_dir(&staging).unwrap().count(), 0);
}

#[test]
fn sampling_strategy_skips_noise() {
    let dir = tempfile::tempdir().unwrap();
    let mut ctx = context(dir.path());
    std::fs::create_dir_all(&ctx.work_dir).unwrap();
    ctx.decode.strategy = mtpipe::bt_loop::DecodeStrategy::Sampling;
    let state = run_iteration(&IterationState::new(Direction::EnIs), &ctx).unwrap();
    let synthetic =
        std::fs::read_to_string(&state.artifacts[0].synthetic_source).unwrap();
    // Without noise every synthetic source is exactly "<bt> " + reversed mono.
    for (i, line) in synthetic.lines().enumerate() {
        let mono_line = format!("setning {i} hér núna");
        let mut reversed: Vec<&str> = mono_line.split_whitespace().collect();
        reversed.reverse();
        assert_eq!(line, format!("<bt> {}", reversed.join(" ")));
    }
}
