//! Plain-text run configuration: `key = value` lines with `#` comments.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

use crate::eval::ParserFamily;
use crate::features::{parse_sizes, EncoderConfig, EncoderKind, PosMode};
use crate::graph_parser::GraphConfig;
use crate::neural::TrainSchedule;
use crate::tagger::TaggerConfig;
use crate::transition::{SystemKind, TransitionConfig};

/// Environment variable consulted for the seed when neither the config
/// file nor a flag sets one.
pub const SEED_ENV: &str = "DEPPARSE_SEED";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("bad value {value:?} for {key}: {reason}")]
    Value { key: String, value: String, reason: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub treebank: String,
    pub train: Option<PathBuf>,
    pub dev: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub parser: ParserFamily,
    pub pos_mode: PosMode,
    pub augment: bool,
    pub encoder: EncoderKind,
    pub word_dim: usize,
    pub pos_dim: usize,
    pub supertoken_dim: usize,
    pub filter_sizes: Vec<usize>,
    pub hidden_dim: usize,
    pub arc_dim: usize,
    pub label_dim: usize,
    pub min_word_count: usize,
    pub epochs: usize,
    pub tagger_epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub warmup_ratio: f64,
    pub dropout: f64,
    pub seed: u64,
    /// Tagger used for `pos_mode = auto`; trained on `train` when unset.
    pub tagger: Option<PathBuf>,
    pub grid_parsers: Vec<ParserFamily>,
    pub grid_augment: Vec<bool>,
    pub grid_pos_modes: Vec<PosMode>,
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let encoder = EncoderConfig::default();
        let schedule = TrainSchedule::default();
        RunConfig {
            treebank: "treebank".into(),
            train: None,
            dev: None,
            test: None,
            output_dir: PathBuf::from("runs"),
            parser: ParserFamily::TransitionStandard,
            pos_mode: PosMode::Gold,
            augment: false,
            encoder: encoder.encoder,
            word_dim: encoder.word_dim,
            pos_dim: encoder.pos_dim,
            supertoken_dim: encoder.supertoken_dim,
            filter_sizes: encoder.supertoken_filter_sizes,
            hidden_dim: TransitionConfig::default().hidden_dim,
            arc_dim: GraphConfig::default().arc_dim,
            label_dim: GraphConfig::default().label_dim,
            min_word_count: 1,
            epochs: schedule.epochs,
            tagger_epochs: 20,
            batch_size: schedule.batch_size,
            learning_rate: schedule.peak_lr,
            warmup_ratio: schedule.warmup_ratio,
            dropout: schedule.dropout_p,
            seed: 0,
            tagger: None,
            grid_parsers: ParserFamily::ALL.to_vec(),
            grid_augment: vec![false, true],
            grid_pos_modes: vec![PosMode::Gold, PosMode::None],
            workers: 1,
        }
    }
}

fn value_err(key: &str, value: &str, reason: impl ToString) -> ConfigError {
    ConfigError::Value {
        key: key.into(),
        value: value.into(),
        reason: reason.to_string(),
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: ToString,
{
    value.parse().map_err(|e: T::Err| value_err(key, value, e))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, ConfigError>
where
    T::Err: ToString,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

fn optional_path(value: &str) -> Option<PathBuf> {
    (!value.is_empty()).then(|| PathBuf::from(value))
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn show_path(p: &Option<PathBuf>) -> String {
    p.as_ref().map(|p| p.display().to_string()).unwrap_or_default()
}

impl RunConfig {
    pub const KEYS: [&'static str; 30] = [
        "treebank",
        "train",
        "dev",
        "test",
        "output_dir",
        "parser",
        "pos_mode",
        "augment",
        "encoder",
        "word_dim",
        "pos_dim",
        "supertoken_dim",
        "filter_sizes",
        "hidden_dim",
        "arc_dim",
        "label_dim",
        "min_word_count",
        "epochs",
        "tagger_epochs",
        "batch_size",
        "learning_rate",
        "warmup_ratio",
        "dropout",
        "seed",
        "tagger",
        "grid_parsers",
        "grid_augment",
        "grid_pos_modes",
        "workers",
        "lr",
    ];

    /// Parses config text on top of the defaults. The seed falls back to
    /// `DEPPARSE_SEED` when the text does not set it.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let env_seed = std::env::var(SEED_ENV).ok();
        Self::parse_with_env_seed(text, env_seed.as_deref())
    }

    pub fn parse_with_env_seed(text: &str, env_seed: Option<&str>) -> Result<Self, ConfigError> {
        let mut config = RunConfig::default();
        let mut seed_set = false;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
            let (key, value) = (key.trim(), value.trim());
            if !Self::KEYS.contains(&key) {
                return Err(ConfigError::UnknownKey {
                    line: i + 1,
                    key: key.into(),
                });
            }
            seed_set |= key == "seed";
            config.set(key, value)?;
        }
        if !seed_set {
            if let Some(seed) = env_seed {
                config.seed = parse(SEED_ENV, seed)?;
            }
        }
        config.validate()?;
        Ok(config)
    }

    /// Sets one key from its text form; used for config lines and flag overrides.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "treebank" => self.treebank = value.into(),
            "train" => self.train = optional_path(value),
            "dev" => self.dev = optional_path(value),
            "test" => self.test = optional_path(value),
            "output_dir" => self.output_dir = PathBuf::from(value),
            "parser" => self.parser = parse(key, value)?,
            "pos_mode" => self.pos_mode = parse(key, value)?,
            "augment" => self.augment = parse(key, value)?,
            "encoder" => self.encoder = parse(key, value)?,
            "word_dim" => self.word_dim = parse(key, value)?,
            "pos_dim" => self.pos_dim = parse(key, value)?,
            "supertoken_dim" => self.supertoken_dim = parse(key, value)?,
            "filter_sizes" => self.filter_sizes = parse_sizes(value).map_err(|e| value_err(key, value, e))?,
            "hidden_dim" => self.hidden_dim = parse(key, value)?,
            "arc_dim" => self.arc_dim = parse(key, value)?,
            "label_dim" => self.label_dim = parse(key, value)?,
            "min_word_count" => self.min_word_count = parse(key, value)?,
            "epochs" => self.epochs = parse(key, value)?,
            "tagger_epochs" => self.tagger_epochs = parse(key, value)?,
            "batch_size" => self.batch_size = parse(key, value)?,
            "learning_rate" | "lr" => self.learning_rate = parse(key, value)?,
            "warmup_ratio" => self.warmup_ratio = parse(key, value)?,
            "dropout" => self.dropout = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "tagger" => self.tagger = optional_path(value),
            "grid_parsers" => self.grid_parsers = parse_list(key, value)?,
            "grid_augment" => self.grid_augment = parse_list(key, value)?,
            "grid_pos_modes" => self.grid_pos_modes = parse_list(key, value)?,
            "workers" => self.workers = parse(key, value)?,
            _ => {
                return Err(ConfigError::UnknownKey {
                    line: 0,
                    key: key.into(),
                })
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("word_dim", self.word_dim),
            ("hidden_dim", self.hidden_dim),
            ("arc_dim", self.arc_dim),
            ("label_dim", self.label_dim),
            ("epochs", self.epochs),
            ("tagger_epochs", self.tagger_epochs),
            ("batch_size", self.batch_size),
            ("workers", self.workers),
        ];
        for (key, v) in positive {
            if v == 0 {
                return Err(ConfigError::Invalid(format!("{key} must be positive")));
            }
        }
        if !(0.0..=1.0).contains(&self.warmup_ratio) {
            return Err(ConfigError::Invalid("warmup_ratio must lie in [0, 1]".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(ConfigError::Invalid("dropout must lie in [0, 1)".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(ConfigError::Invalid("learning_rate must be positive".into()));
        }
        if self.grid_parsers.is_empty() || self.grid_augment.is_empty() || self.grid_pos_modes.is_empty() {
            return Err(ConfigError::Invalid("grid lists must not be empty".into()));
        }
        self.encoder_config(self.pos_mode, self.augment)
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// Every key with its current value, in `parse`-compatible form.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        line("treebank", self.treebank.clone());
        line("train", show_path(&self.train));
        line("dev", show_path(&self.dev));
        line("test", show_path(&self.test));
        line("output_dir", self.output_dir.display().to_string());
        line("parser", self.parser.to_string());
        line("pos_mode", self.pos_mode.to_string());
        line("augment", self.augment.to_string());
        line("encoder", self.encoder.to_string());
        line("word_dim", self.word_dim.to_string());
        line("pos_dim", self.pos_dim.to_string());
        line("supertoken_dim", self.supertoken_dim.to_string());
        line("filter_sizes", join(&self.filter_sizes));
        line("hidden_dim", self.hidden_dim.to_string());
        line("arc_dim", self.arc_dim.to_string());
        line("label_dim", self.label_dim.to_string());
        line("min_word_count", self.min_word_count.to_string());
        line("epochs", self.epochs.to_string());
        line("tagger_epochs", self.tagger_epochs.to_string());
        line("batch_size", self.batch_size.to_string());
        line("learning_rate", self.learning_rate.to_string());
        line("warmup_ratio", self.warmup_ratio.to_string());
        line("dropout", self.dropout.to_string());
        line("seed", self.seed.to_string());
        line("tagger", show_path(&self.tagger));
        line("grid_parsers", join(&self.grid_parsers));
        line("grid_augment", join(&self.grid_augment));
        line("grid_pos_modes", join(&self.grid_pos_modes));
        line("workers", self.workers.to_string());
        out
    }

    pub fn encoder_config(&self, pos_mode: PosMode, augment: bool) -> EncoderConfig {
        EncoderConfig {
            encoder: self.encoder,
            word_dim: self.word_dim,
            pos_mode,
            pos_dim: self.pos_dim,
            augment,
            supertoken_filter_sizes: self.filter_sizes.clone(),
            supertoken_dim: self.supertoken_dim,
        }
    }

    pub fn schedule(&self) -> TrainSchedule {
        TrainSchedule {
            peak_lr: self.learning_rate,
            warmup_ratio: self.warmup_ratio,
            total_steps: 1,
            batch_size: self.batch_size,
            epochs: self.epochs,
            dropout_p: self.dropout,
            seed: self.seed,
        }
    }

    pub fn tagger_schedule(&self) -> TrainSchedule {
        TrainSchedule {
            epochs: self.tagger_epochs,
            ..self.schedule()
        }
    }

    pub fn transition_config(&self, system: SystemKind, pos_mode: PosMode, augment: bool) -> TransitionConfig {
        TransitionConfig {
            system,
            encoder: self.encoder_config(pos_mode, augment),
            hidden_dim: self.hidden_dim,
            min_word_count: self.min_word_count,
        }
    }

    pub fn graph_config(&self, pos_mode: PosMode, augment: bool) -> GraphConfig {
        GraphConfig {
            encoder: self.encoder_config(pos_mode, augment),
            arc_dim: self.arc_dim,
            label_dim: self.label_dim,
            min_word_count: self.min_word_count,
        }
    }

    pub fn tagger_config(&self) -> TaggerConfig {
        TaggerConfig {
            encoder: self.encoder_config(PosMode::None, false),
            min_word_count: self.min_word_count,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        assert_eq!(RunConfig::parse_with_env_seed("", None).unwrap(), RunConfig::default());
        assert_eq!(RunConfig::parse_with_env_seed("# only a comment\n\n", None).unwrap(), RunConfig::default());
    }

    #[test]
    fn every_key_round_trips() {
        let mut config = RunConfig::default();
        config.train = Some("a/train.conllu".into());
        config.parser = ParserFamily::Graph;
        config.grid_pos_modes = PosMode::ALL.to_vec();
        config.filter_sizes = vec![2, 3];
        config.learning_rate = 2.5e-3;
        config.seed = 7;
        let back = RunConfig::parse_with_env_seed(&config.to_text(), None).unwrap();
        assert_eq!(back, config);
        let text = config.to_text();
        let listed: Vec<&str> = text.lines().map(|l| l.split(" = ").next().unwrap()).collect();
        assert!(listed.iter().all(|k| RunConfig::KEYS.contains(k)));
        assert_eq!(listed.len(), RunConfig::KEYS.len() - 1);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        assert_eq!(
            RunConfig::parse_with_env_seed("epochs = 3\nfoo = 1\n", None),
            Err(ConfigError::UnknownKey { line: 2, key: "foo".into() })
        );
        assert!(matches!(RunConfig::parse_with_env_seed("epochs = many", None), Err(ConfigError::Value { .. })));
        assert!(matches!(RunConfig::parse_with_env_seed("epochs 3", None), Err(ConfigError::Syntax { line: 1 })));
        assert!(matches!(RunConfig::parse_with_env_seed("epochs = 0", None), Err(ConfigError::Invalid(_))));
        let err = RunConfig::parse_with_env_seed("encoder = bert", None).unwrap_err();
        assert!(err.to_string().contains("no encoder plugin"), "{err}");
    }

    #[test]
    fn gold_pos_needs_no_tagger() {
        let config = RunConfig::parse_with_env_seed("pos_mode = gold\nparser = transition-eager # inline\n", None).unwrap();
        assert_eq!(config.tagger, None);
        assert_eq!(config.parser, ParserFamily::TransitionEager);
    }

    #[test]
    fn seed_precedence() {
        assert_eq!(RunConfig::parse_with_env_seed("", Some("11")).unwrap().seed, 11);
        assert_eq!(RunConfig::parse_with_env_seed("seed = 3", Some("11")).unwrap().seed, 3);
        assert!(RunConfig::parse_with_env_seed("", Some("x")).is_err());
    }
}
