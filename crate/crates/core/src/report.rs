//! Run reports: per-stage stats, timings and content hashes, emitted both
//! as a human-readable table and as JSON.

use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

use crate::corpus_io::CorpusStats;
use crate::util::sha256_file;

#[derive(Debug, Clone, Serialize)]
pub struct FileHash {
    pub path: String,
    pub sha256: String,
}

impl FileHash {
    pub fn of(path: &Path) -> io::Result<Self> {
        Ok(FileHash {
            path: path.display().to_string(),
            sha256: sha256_file(path)?,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StageReport {
    pub stage: String,
    pub pairs_in: u64,
    pub stats: CorpusStats,
    pub wall_clock_ms: u64,
    pub inputs: Vec<FileHash>,
    pub outputs: Vec<FileHash>,
}

impl StageReport {
    /// Pairs in must equal pairs out plus drops plus duplicates.
    pub fn reconciles(&self) -> bool {
        self.pairs_in
            == self.stats.pair_count + self.stats.total_drops() + self.stats.duplicate_count
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub seed: u64,
    pub stages: Vec<StageReport>,
    /// The resolved config file contents, when one was given.
    pub config_snapshot: Option<String>,
}

impl RunReport {
    pub fn new(seed: u64, config_snapshot: Option<String>) -> Self {
        RunReport {
            seed,
            stages: Vec::new(),
            config_snapshot,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// Table in the style of a corpus bookkeeping sheet: one row per stage
    /// plus per-filter breakdowns.
    pub fn write_human(&self, out: &mut dyn Write) -> io::Result<()> {
        writeln!(
            out,
            "{:<12} {:>10} {:>10} {:>8} {:>8} {:>8} {:>12} {:>12} {:>8}",
            "stage", "pairs_in", "kept", "drops", "fixes", "dups", "src_tokens", "tgt_tokens", "ms"
        )?;
        for stage in &self.stages {
            let s = &stage.stats;
            writeln!(
                out,
                "{:<12} {:>10} {:>10} {:>8} {:>8} {:>8} {:>12} {:>12} {:>8}",
                stage.stage,
                stage.pairs_in,
                s.pair_count,
                s.total_drops(),
                s.per_filter_fixes.values().sum::<u64>(),
                s.duplicate_count,
                s.source_tokens,
                s.target_tokens,
                stage.wall_clock_ms
            )?;
            for (filter, count) in &s.per_filter_drops {
                writeln!(out, "{:<12}   drop {filter} = {count}", "")?;
            }
            for (filter, count) in &s.per_filter_fixes {
                writeln!(out, "{:<12}   fix  {filter} = {count}", "")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reconciliation_balances() {
        let mut stats = CorpusStats {
            pair_count: 90,
            duplicate_count: 8,
            ..CorpusStats::default()
        };
        stats.record_drop("empty");
        stats.record_drop("empty");
        let stage = StageReport {
            stage: "filter".into(),
            pairs_in: 100,
            stats,
            wall_clock_ms: 1,
            inputs: vec![],
            outputs: vec![],
        };
        assert!(stage.reconciles());
    }

    #[test]
    fn human_table_mentions_filters() {
        let mut stats = CorpusStats {
            pair_count: 1,
            ..CorpusStats::default()
        };
        stats.record_drop("length");
        let report = RunReport {
            seed: 0,
            stages: vec![StageReport {
                stage: "filter".into(),
                pairs_in: 2,
                stats,
                wall_clock_ms: 3,
                inputs: vec![],
                outputs: vec![],
            }],
            config_snapshot: None,
        };
        let mut buf = Vec::new();
        report.write_human(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("drop length = 1"));
    }
}
