//! Pipeline configuration: one TOML file with a section per stage.
//! Unknown keys are hard errors so a typoed threshold name can never
//! silently fall back to a default.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use regex::Regex;
use serde::Deserialize;
use thiserror::Error;

use crate::augment::{MixMode, MixSpec, TagSpec};
use crate::bt_loop::{
    BtContext, DecodeParams, DecodeStrategy, DirectionIo, LoopOptions, StopRule, TranslatorSpec,
};
use crate::filters::{CharSet, FilterConfig, FilterId, MojibakeTable, DEFAULT_CHAIN};
use crate::noising::{NoiseConfig, NoiseOp, DEFAULT_NOISE_OPS};
use crate::util::derive_seed;

/// Environment variable overriding the config seed.
pub const ENV_SEED: &str = "MTPIPE_SEED";
/// Environment variable overriding the staging/temp directory.
pub const ENV_TMPDIR: &str = "MTPIPE_TMPDIR";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid value for `{field}`: {message}")]
    Validation { field: String, message: String },
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Validation {
        field: field.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilterSection {
    pub min_chars: Option<usize>,
    pub max_chars: Option<usize>,
    pub max_tokens: Option<usize>,
    pub length_ratio_max: Option<f64>,
    /// `english`, `icelandic`, or `chars:<literal allowed characters>`.
    pub charset_source: Option<String>,
    pub charset_target: Option<String>,
    pub charset_tolerance: Option<f64>,
    pub symbol_slack: Option<usize>,
    pub edit_distance_min_normalized: Option<f64>,
    /// Path to a `pattern<TAB>replacement` table; omitted = built-in table.
    pub mojibake_table: Option<PathBuf>,
    /// Path to a `regex<TAB>replacement` table.
    pub regex_fixes: Option<PathBuf>,
    /// Filter ids in execution order; omitted = the default chain.
    pub chain: Option<Vec<String>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSection {
    pub k: Option<u32>,
    pub p_mask: Option<f64>,
    pub p_drop: Option<f64>,
    pub mask_token: Option<String>,
    /// Operation order, e.g. ["drop", "mask", "permute"].
    pub ops: Option<Vec<String>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TagSection {
    pub token: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MixSection {
    /// "authentic:synthetic", e.g. "1:2".
    pub ratio: Option<String>,
    pub mode: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranslatorSection {
    pub command: Vec<String>,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
}

fn default_batch_size() -> usize {
    256
}

fn default_timeout() -> u64 {
    300
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecodeSection {
    pub strategy: Option<String>,
    pub beam_width: Option<u32>,
    pub temperature: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectionSection {
    pub mono: PathBuf,
    pub authentic_source: PathBuf,
    pub authentic_target: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BtSection {
    pub work_dir: PathBuf,
    #[serde(default)]
    pub stop_rule: Option<String>,
    #[serde(default)]
    pub max_iterations: Option<u32>,
    #[serde(default)]
    pub resume: Option<bool>,
    /// Trainer argv template; omitted = no training hook.
    #[serde(default)]
    pub trainer: Option<Vec<String>>,
    /// Noise beam outputs before tagging (default true).
    #[serde(default)]
    pub noise_beam_outputs: Option<bool>,
    #[serde(default)]
    pub en_is: Option<DirectionSection>,
    #[serde(default)]
    pub is_en: Option<DirectionSection>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BleuSection {
    pub hypotheses: Option<PathBuf>,
    pub references: Option<PathBuf>,
}

/// The whole pipeline file. Every section is optional; subcommands demand
/// the sections they need.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub seed: Option<u64>,
    pub filter: FilterSection,
    pub noise: NoiseSection,
    pub tag: TagSection,
    pub mix: MixSection,
    pub translator: Option<TranslatorSection>,
    pub decode: DecodeSection,
    pub bt: Option<BtSection>,
    pub bleu: BleuSection,
}

impl PipelineConfig {
    /// Parses, applies environment overrides, and validates every section
    /// that is present.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.to_path_buf(),
            source: e,
        })?;
        let mut config: PipelineConfig =
            toml::from_str(&text).map_err(|e| ConfigError::Parse {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?;
        if let Ok(seed) = std::env::var(ENV_SEED) {
            let seed = seed
                .parse::<u64>()
                .map_err(|_| invalid(ENV_SEED, format!("not a u64: {seed}")))?;
            config.seed = Some(seed);
        }
        config.validate()?;
        Ok(config)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    /// Resolves and validates everything present; used by `validate-config`.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.resolve_filter()?;
        self.resolve_noise()?;
        self.resolve_tag()?;
        self.resolve_mix()?;
        self.resolve_decode()?;
        if let Some(section) = &self.translator {
            self.resolve_translator(section)?;
        }
        if self.bt.is_some() {
            self.resolve_bt()?;
        }
        Ok(())
    }

    pub fn resolve_filter(&self) -> Result<(Vec<FilterId>, FilterConfig), ConfigError> {
        let section = &self.filter;
        let defaults = FilterConfig::default();
        let config = FilterConfig {
            min_chars: section.min_chars.unwrap_or(defaults.min_chars),
            max_chars: section.max_chars.unwrap_or(defaults.max_chars),
            max_tokens: section.max_tokens.unwrap_or(defaults.max_tokens),
            length_ratio_max: section
                .length_ratio_max
                .unwrap_or(defaults.length_ratio_max),
            charset_source: resolve_charset(
                section.charset_source.as_deref(),
                "filter.charset_source",
                CharSet::english,
            )?,
            charset_target: resolve_charset(
                section.charset_target.as_deref(),
                "filter.charset_target",
                CharSet::icelandic,
            )?,
            charset_tolerance: section
                .charset_tolerance
                .unwrap_or(defaults.charset_tolerance),
            symbol_slack: section.symbol_slack.unwrap_or(defaults.symbol_slack),
            edit_distance_min_normalized: section
                .edit_distance_min_normalized
                .unwrap_or(defaults.edit_distance_min_normalized),
            mojibake_table: match &section.mojibake_table {
                Some(path) => load_replacement_table(path, "filter.mojibake_table")?,
                None => defaults.mojibake_table,
            },
            regex_fixes: match &section.regex_fixes {
                Some(path) => load_regex_table(path, "filter.regex_fixes")?,
                None => Vec::new(),
            },
        };
        config
            .validate()
            .map_err(|e| invalid("filter", e.to_string()))?;
        let chain = match &section.chain {
            Some(names) => crate::filters::parse_chain(names)
                .map_err(|e| invalid("filter.chain", e.to_string()))?,
            None => DEFAULT_CHAIN.to_vec(),
        };
        if chain.is_empty() {
            return Err(invalid("filter.chain", "chain must not be empty"));
        }
        Ok((chain, config))
    }

    pub fn resolve_noise(&self) -> Result<NoiseConfig, ConfigError> {
        let section = &self.noise;
        let defaults = NoiseConfig::default();
        let ops = match &section.ops {
            None => DEFAULT_NOISE_OPS.to_vec(),
            Some(names) => names
                .iter()
                .map(|n| match n.as_str() {
                    "drop" => Ok(NoiseOp::Drop),
                    "mask" => Ok(NoiseOp::Mask),
                    "permute" => Ok(NoiseOp::Permute),
                    other => Err(invalid("noise.ops", format!("unknown op `{other}`"))),
                })
                .collect::<Result<Vec<_>, _>>()?,
        };
        let config = NoiseConfig {
            permute_window: section.k.unwrap_or(defaults.permute_window),
            p_mask: section.p_mask.unwrap_or(defaults.p_mask),
            p_drop: section.p_drop.unwrap_or(defaults.p_drop),
            mask_token: section
                .mask_token
                .clone()
                .unwrap_or(defaults.mask_token),
            seed: self.seed(),
            ops,
        };
        config.validate().map_err(|e| invalid("noise", e.to_string()))?;
        Ok(config)
    }

    pub fn resolve_tag(&self) -> Result<TagSpec, ConfigError> {
        let tag = TagSpec {
            token: self
                .tag
                .token
                .clone()
                .unwrap_or_else(|| TagSpec::default().token),
        };
        tag.validate().map_err(|e| invalid("tag.token", e.to_string()))?;
        Ok(tag)
    }

    pub fn resolve_mix(&self) -> Result<MixSpec, ConfigError> {
        let (ratio_authentic, ratio_synthetic) = match &self.mix.ratio {
            None => (1, 2),
            Some(text) => parse_ratio(text).ok_or_else(|| {
                invalid("mix.ratio", format!("expected `a:s` with both >= 1, got `{text}`"))
            })?,
        };
        let mode = match self.mix.mode.as_deref() {
            None | Some("upsample_authentic") => MixMode::UpsampleAuthentic,
            Some("downsample_synthetic") => MixMode::DownsampleSynthetic,
            Some(other) => {
                return Err(invalid("mix.mode", format!("unknown mode `{other}`")))
            }
        };
        let spec = MixSpec {
            ratio_authentic,
            ratio_synthetic,
            mode,
            shuffle_seed: derive_seed(self.seed(), "mix"),
        };
        spec.validate().map_err(|e| invalid("mix", e.to_string()))?;
        Ok(spec)
    }

    pub fn resolve_decode(&self) -> Result<DecodeParams, ConfigError> {
        let strategy = match self.decode.strategy.as_deref() {
            None | Some("beam") => DecodeStrategy::Beam,
            Some("sampling") => DecodeStrategy::Sampling,
            Some(other) => {
                return Err(invalid(
                    "decode.strategy",
                    format!("unknown strategy `{other}`"),
                ))
            }
        };
        let params = DecodeParams {
            strategy,
            beam_width: self.decode.beam_width.unwrap_or(4),
            sampling_temperature: self.decode.temperature.unwrap_or(1.0),
        };
        params
            .validate()
            .map_err(|e| invalid("decode", e.to_string()))?;
        Ok(params)
    }

    fn resolve_translator(
        &self,
        section: &TranslatorSection,
    ) -> Result<TranslatorSpec, ConfigError> {
        let spec = TranslatorSpec {
            command: section.command.clone(),
            batch_size: section.batch_size,
            timeout_secs: section.timeout_secs,
        };
        spec.validate()
            .map_err(|e| invalid("translator", e.to_string()))?;
        Ok(spec)
    }

    /// Builds the full loop context; requires the `translator` and `bt`
    /// sections.
    pub fn resolve_bt(&self) -> Result<(BtContext, LoopOptions), ConfigError> {
        let bt = self
            .bt
            .as_ref()
            .ok_or_else(|| invalid("bt", "section is required for bt-run"))?;
        let translator_section = self
            .translator
            .as_ref()
            .ok_or_else(|| invalid("translator", "section is required for bt-run"))?;
        let translator = self.resolve_translator(translator_section)?;
        let decode = self.resolve_decode()?;
        let tag = self.resolve_tag()?;
        let mix = self.resolve_mix()?;
        let noise = if bt.noise_beam_outputs.unwrap_or(true) {
            Some(self.resolve_noise()?)
        } else {
            None
        };
        let stop_rule = match bt.stop_rule.as_deref() {
            None | Some("lineage") => StopRule::Lineage,
            Some("force") => StopRule::Force,
            Some(other) => {
                return Err(invalid("bt.stop_rule", format!("unknown rule `{other}`")))
            }
        };
        if bt.en_is.is_none() && bt.is_en.is_none() {
            return Err(invalid(
                "bt",
                "at least one of bt.en_is / bt.is_en must be configured",
            ));
        }
        let to_io = |section: &DirectionSection, field: &str| -> Result<DirectionIo, ConfigError> {
            for (name, path) in [
                ("mono", &section.mono),
                ("authentic_source", &section.authentic_source),
                ("authentic_target", &section.authentic_target),
            ] {
                if !path.is_file() {
                    return Err(invalid(
                        &format!("{field}.{name}"),
                        format!("file not found: {}", path.display()),
                    ));
                }
            }
            Ok(DirectionIo {
                mono: section.mono.clone(),
                authentic_source: section.authentic_source.clone(),
                authentic_target: section.authentic_target.clone(),
            })
        };
        let staging_dir = std::env::var_os(ENV_TMPDIR).map(PathBuf::from);
        let ctx = BtContext {
            work_dir: bt.work_dir.clone(),
            seed: self.seed(),
            translator,
            trainer: bt.trainer.clone(),
            decode,
            noise,
            tag,
            ratio_authentic: mix.ratio_authentic,
            ratio_synthetic: mix.ratio_synthetic,
            mix_mode: mix.mode,
            staging_dir,
            en_is: bt.en_is.as_ref().map(|s| to_io(s, "bt.en_is")).transpose()?,
            is_en: bt.is_en.as_ref().map(|s| to_io(s, "bt.is_en")).transpose()?,
        };
        let opts = LoopOptions {
            stop_rule,
            max_iterations: bt.max_iterations.unwrap_or(8),
            resume: bt.resume.unwrap_or(false),
        };
        if opts.max_iterations == 0 {
            return Err(invalid("bt.max_iterations", "must be >= 1"));
        }
        Ok((ctx, opts))
    }
}

fn parse_ratio(text: &str) -> Option<(u32, u32)> {
    let (a, s) = text.split_once(':')?;
    let a = a.trim().parse::<u32>().ok()?;
    let s = s.trim().parse::<u32>().ok()?;
    (a >= 1 && s >= 1).then_some((a, s))
}

fn resolve_charset(
    value: Option<&str>,
    field: &str,
    default: fn() -> CharSet,
) -> Result<CharSet, ConfigError> {
    match value {
        None => Ok(default()),
        Some("english") => Ok(CharSet::english()),
        Some("icelandic") => Ok(CharSet::icelandic()),
        Some(other) => match other.strip_prefix("chars:") {
            Some(chars) => Ok(CharSet::from_chars(chars.chars())),
            None => Err(invalid(
                field,
                format!("expected `english`, `icelandic` or `chars:<set>`, got `{other}`"),
            )),
        },
    }
}

/// Loads a `pattern<TAB>replacement` file; blank lines and `#` comments are
/// skipped.
fn load_replacement_table(path: &Path, field: &str) -> Result<MojibakeTable, ConfigError> {
    let text = fs::read_to_string(path).map_err(|e| ConfigError::Read {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut table = Vec::new();
    for (no, line) in text.lines().enumerate() {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (pattern, replacement) = line.split_once('\t').ok_or_else(|| {
            invalid(field, format!("{}:{}: missing tab", path.display(), no + 1))
        })?;
        table.push((pattern.to_string(), replacement.to_string()));
    }
    Ok(table)
}

fn load_regex_table(path: &Path, field: &str) -> Result<Vec<(Regex, String)>, ConfigError> {
    let raw = load_replacement_table(path, field)?;
    raw.into_iter()
        .map(|(pattern, replacement)| {
            Regex::new(&pattern)
                .map(|re| (re, replacement))
                .map_err(|e| invalid(field, format!("bad regex `{pattern}`: {e}")))
        })
        .collect()
}

/// Convenience for subcommands that accept an optional config path.
pub fn load_or_default(path: Option<&Path>) -> Result<PipelineConfig, ConfigError> {
    match path {
        Some(p) => PipelineConfig::load(p),
        None => {
            let mut config = PipelineConfig::default();
            if let Ok(seed) = std::env::var(ENV_SEED) {
                let seed = seed
                    .parse::<u64>()
                    .map_err(|_| invalid(ENV_SEED, format!("not a u64: {seed}")))?;
                config.seed = Some(seed);
            }
            config.validate()?;
            Ok(config)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_config(text: &str) -> (tempfile::TempDir, PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pipeline.toml");
        fs::write(&path, text).unwrap();
        (dir, path)
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let (_dir, path) = write_config("seed = 7\n");
        let config = PipelineConfig::load(&path).unwrap();
        assert_eq!(config.seed(), 7);
        let (chain, fcfg) = config.resolve_filter().unwrap();
        assert_eq!(chain, DEFAULT_CHAIN.to_vec());
        assert_eq!(fcfg.min_chars, 1);
        assert_eq!(fcfg.max_chars, 1000);
        assert_eq!(fcfg.max_tokens, 250);
        assert_eq!(fcfg.length_ratio_max, 9.0);
        assert_eq!(fcfg.edit_distance_min_normalized, 0.3);
        assert_eq!(fcfg.symbol_slack, 2);
        let noise = config.resolve_noise().unwrap();
        assert_eq!(noise.permute_window, 3);
        assert_eq!(noise.p_mask, 0.1);
        assert_eq!(noise.p_drop, 0.1);
        assert_eq!(noise.mask_token, "<mask>");
        let mix = config.resolve_mix().unwrap();
        assert_eq!((mix.ratio_authentic, mix.ratio_synthetic), (1, 2));
        let decode = config.resolve_decode().unwrap();
        assert_eq!(decode.beam_width, 4);
        assert_eq!(config.resolve_tag().unwrap().token, "<bt>");
    }

    #[test]
    fn ratio_parses_and_validates() {
        let (_dir, path) = write_config("[mix]\nratio = \"1:2\"\n");
        let config = PipelineConfig::load(&path).unwrap();
        let mix = config.resolve_mix().unwrap();
        assert_eq!((mix.ratio_authentic, mix.ratio_synthetic), (1, 2));

        let (_dir, path) = write_config("[mix]\nratio = \"0:2\"\n");
        let err = PipelineConfig::load(&path).unwrap_err();
        assert!(matches!(err, ConfigError::Validation { field, .. } if field == "mix.ratio"));
    }

    #[test]
    fn unknown_keys_are_rejected_with_position() {
        let (_dir, path) = write_config("[filter]\nmin_charz = 2\n");
        let err = PipelineConfig::load(&path).unwrap_err();
        match err {
            ConfigError::Parse { message, .. } => {
                assert!(message.contains("min_charz"), "{message}");
                assert!(message.contains("line"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_filter_in_chain_is_rejected() {
        let (_dir, path) = write_config("[filter]\nchain = [\"empty\", \"nope\"]\n");
        let err = PipelineConfig::load(&path).unwrap_err();
        assert!(matches!(err, ConfigError::Validation { field, .. } if field == "filter.chain"));
    }

    #[test]
    fn charset_literal_form() {
        let (_dir, path) = write_config("[filter]\ncharset_target = \"chars:abcþ \"\n");
        let config = PipelineConfig::load(&path).unwrap();
        let (_, fcfg) = config.resolve_filter().unwrap();
        assert!(fcfg.charset_target.contains('þ'));
        assert!(!fcfg.charset_target.contains('x'));
    }

    #[test]
    fn env_seed_overrides_config() {
        let (_dir, path) = write_config("seed = 7\n");
        std::env::set_var(ENV_SEED, "99");
        let config = PipelineConfig::load(&path).unwrap();
        std::env::remove_var(ENV_SEED);
        assert_eq!(config.seed(), 99);
    }

    #[test]
    fn mojibake_table_loads_from_file() {
        let dir = tempfile::tempdir().unwrap();
        let table = dir.path().join("moji.tsv");
        fs::write(&table, "Ã¡\tá\n# comment\nÃ©\té\n").unwrap();
        let path = dir.path().join("pipeline.toml");
        fs::write(
            &path,
            format!("[filter]\nmojibake_table = {:?}\n", table.display()),
        )
        .unwrap();
        let config = PipelineConfig::load(&path).unwrap();
        let (_, fcfg) = config.resolve_filter().unwrap();
        assert_eq!(fcfg.mojibake_table.len(), 2);
        assert_eq!(fcfg.mojibake_table[0], ("Ã¡".to_string(), "á".to_string()));
    }

    #[test]
    fn bt_requires_translator_section() {
        let (_dir, path) = write_config(
            "[bt]\nwork_dir = \"w\"\n[bt.en_is]\nmono = \"m\"\nauthentic_source = \"a\"\nauthentic_target = \"b\"\n",
        );
        let err = PipelineConfig::load(&path).unwrap_err();
        assert!(matches!(err, ConfigError::Validation { field, .. } if field == "translator"));
    }

    #[test]
    fn noise_ops_order_is_configurable() {
        let (_dir, path) = write_config("[noise]\nops = [\"permute\", \"drop\"]\n");
        let config = PipelineConfig::load(&path).unwrap();
        let noise = config.resolve_noise().unwrap();
        assert_eq!(noise.ops, vec![NoiseOp::Permute, NoiseOp::Drop]);
    }
}
