//! Streaming toolkit for building machine-translation training data:
//! heuristic bitext filtering, deduplication, noise injection for synthetic
//! text, tagged backtranslation corpus mixing, an iterative backtranslation
//! orchestrator driving external translator/trainer processes, and a
//! sacreBLEU-compatible corpus BLEU scorer.

pub mod augment;
pub mod bleu;
pub mod bt_loop;
pub mod cli;
pub mod config;
pub mod corpus_io;
pub mod filters;
pub mod noising;
pub mod report;
pub mod util;

pub use augment::{mix_corpora, tag_synthetic, MixMode, MixSpec, TagSpec};
pub use bleu::{bleu, tokenize_13a, BleuScore};
pub use bt_loop::{
    run_iteration, run_loop, should_stop, translate_batch, BtContext, DecodeParams, Direction,
    IterationState, TranslatorSpec,
};
pub use corpus_io::{
    compute_stats, deduplicate, write_corpus, CorpusStats, Deduplicator, KeyMode, MonoSentence,
    Origin, SentencePair,
};
pub use filters::{
    apply_filter_chain, filter_case_symbol_mismatch, filter_charset, filter_edit_distance,
    filter_empty, filter_length, fix_encoding, levenshtein, normalize_punctuation, ChainOutcome,
    FilterConfig, FilterId, FilterVerdict,
};
pub use noising::{drop_words, mask_words, noise_sentence, permute_within_k, NoiseConfig};
