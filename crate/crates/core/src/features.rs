//! Per-token input representations.
//!
//! Every token is represented by the concatenation of
//!
//! * a word embedding,
//! * a POS embedding (unless POS information is disabled),
//! * a sentence embedding shared by all tokens (when augmented),
//! * super-token embeddings from 1-D convolutions over the word
//!   embeddings, one block per filter width (when augmented).
//!
//! Row 0 of the output is the artificial ROOT token, which uses dedicated
//! learned vectors for every slice.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

use crate::conllu::{Tree, Treebank, Upos};
use crate::neural::{Graph, NeuralError, ParameterStore, Tensor, Var};

pub const UNK: usize = 0;
pub const ROOT: usize = 1;
const UNK_TOKEN: &str = "<unk>";
const ROOT_TOKEN: &str = "<root>";
/// POS embedding row reserved for ROOT.
const ROOT_POS: usize = Upos::COUNT;

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("POS mode {0} needs POS tags for every token")]
    MissingPos(PosMode),
    #[error("expected {expected} POS tags, got {found}")]
    PosLength { expected: usize, found: usize },
    #[error("cannot encode an empty sentence")]
    EmptySentence,
    #[error("invalid encoder configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Neural(#[from] NeuralError),
}

/// Source of POS features.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PosMode {
    Gold,
    Auto,
    None,
}

impl PosMode {
    pub const ALL: [PosMode; 3] = [PosMode::Gold, PosMode::Auto, PosMode::None];

    pub fn as_str(self) -> &'static str {
        match self {
            PosMode::Gold => "gold",
            PosMode::Auto => "auto",
            PosMode::None => "none",
        }
    }

    pub fn uses_pos(self) -> bool {
        self != PosMode::None
    }
}

impl fmt::Display for PosMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PosMode {
    type Err = FeatureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gold" => Ok(PosMode::Gold),
            "auto" => Ok(PosMode::Auto),
            "none" | "agnostic" => Ok(PosMode::None),
            other => Err(FeatureError::Config(format!("unknown POS mode {other:?}"))),
        }
    }
}

/// Word-embedding back-end. Only the trainable lookup table exists; the
/// slot is kept so model grids can name other encoders.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EncoderKind {
    Lookup,
}

impl EncoderKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EncoderKind::Lookup => "lookup",
        }
    }
}

impl fmt::Display for EncoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EncoderKind {
    type Err = FeatureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lookup" => Ok(EncoderKind::Lookup),
            other => Err(FeatureError::Config(format!("no encoder plugin named {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EncoderConfig {
    pub encoder: EncoderKind,
    pub word_dim: usize,
    pub pos_mode: PosMode,
    pub pos_dim: usize,
    /// Add sentence and super-token embeddings.
    pub augment: bool,
    pub supertoken_filter_sizes: Vec<usize>,
    /// Output channels per filter size.
    pub supertoken_dim: usize,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            encoder: EncoderKind::Lookup,
            word_dim: 128,
            pos_mode: PosMode::Gold,
            pos_dim: 32,
            augment: false,
            supertoken_filter_sizes: vec![2, 3, 4, 5],
            supertoken_dim: 192,
        }
    }
}

impl EncoderConfig {
    pub fn validate(&self) -> Result<(), FeatureError> {
        if self.word_dim == 0 || self.pos_dim == 0 || self.supertoken_dim == 0 {
            return Err(FeatureError::Config("dimensions must be at least 1".into()));
        }
        if self.augment && self.supertoken_filter_sizes.is_empty() {
            return Err(FeatureError::Config("augmentation needs at least one filter size".into()));
        }
        if let Some(k) = self.supertoken_filter_sizes.iter().find(|&&k| k < 2) {
            return Err(FeatureError::Config(format!("filter size {k} is below 2")));
        }
        Ok(())
    }

    /// Width of the concatenated per-token representation.
    pub fn feature_dim(&self) -> usize {
        let mut dim = self.word_dim;
        if self.pos_mode.uses_pos() {
            dim += self.pos_dim;
        }
        if self.augment {
            dim += self.word_dim + self.supertoken_filter_sizes.len() * self.supertoken_dim;
        }
        dim
    }

    /// `key = value` pairs for model files.
    pub fn to_entries(&self) -> Vec<(String, String)> {
        let sizes: Vec<String> = self.supertoken_filter_sizes.iter().map(usize::to_string).collect();
        vec![
            ("encoder".into(), self.encoder.to_string()),
            ("word_dim".into(), self.word_dim.to_string()),
            ("pos_mode".into(), self.pos_mode.to_string()),
            ("pos_dim".into(), self.pos_dim.to_string()),
            ("augment".into(), self.augment.to_string()),
            ("supertoken_filter_sizes".into(), sizes.join(",")),
            ("supertoken_dim".into(), self.supertoken_dim.to_string()),
        ]
    }

    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> Result<Self, FeatureError> {
        fn parse<T: FromStr>(key: &str, value: Option<String>) -> Result<T, FeatureError> {
            let value = value.ok_or_else(|| FeatureError::Config(format!("missing {key}")))?;
            value
                .parse()
                .map_err(|_| FeatureError::Config(format!("bad {key} {value:?}")))
        }
        let sizes = get("supertoken_filter_sizes")
            .ok_or_else(|| FeatureError::Config("missing supertoken_filter_sizes".into()))?;
        let cfg = EncoderConfig {
            encoder: get("encoder").unwrap_or_else(|| "lookup".into()).parse()?,
            word_dim: parse("word_dim", get("word_dim"))?,
            pos_mode: get("pos_mode").unwrap_or_default().parse()?,
            pos_dim: parse("pos_dim", get("pos_dim"))?,
            augment: parse("augment", get("augment"))?,
            supertoken_filter_sizes: parse_sizes(&sizes)?,
            supertoken_dim: parse("supertoken_dim", get("supertoken_dim"))?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses a comma-separated list of filter widths.
pub fn parse_sizes(text: &str) -> Result<Vec<usize>, FeatureError> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| FeatureError::Config(format!("bad filter size {s:?}")))
        })
        .collect()
}

/// Token-to-index map; index 0 is the unknown token and 1 is ROOT.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocab {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocab {
    /// Vocabulary from a token list whose first two entries are reserved.
    pub fn from_tokens(tokens: Vec<String>) -> Result<Self, FeatureError> {
        if tokens.len() < 2 {
            return Err(FeatureError::Config("vocabulary needs the two reserved entries".into()));
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, token) in tokens.iter().enumerate().skip(2) {
            if index.insert(token.clone(), i).is_some() {
                return Err(FeatureError::Config(format!("duplicate vocabulary entry {token:?}")));
            }
        }
        Ok(Vocab { tokens, index })
    }

    /// Forms seen at least `min_count` times, in first-occurrence order.
    pub fn build(treebank: &Treebank, min_count: usize) -> Self {
        let mut counts: HashMap<&str, usize> = HashMap::new();
        let mut order = Vec::new();
        for token in treebank.trees.iter().flat_map(|t| &t.tokens) {
            let count = counts.entry(token.form.as_str()).or_insert(0);
            if *count == 0 {
                order.push(token.form.as_str());
            }
            *count += 1;
        }
        let mut tokens = vec![UNK_TOKEN.to_owned(), ROOT_TOKEN.to_owned()];
        tokens.extend(
            order
                .into_iter()
                .filter(|form| counts[form] >= min_count)
                .map(str::to_owned),
        );
        Vocab::from_tokens(tokens).expect("forms are distinct")
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, form: &str) -> usize {
        self.index.get(form).copied().unwrap_or(UNK)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// One token per line; the line number (from 0) is the index.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for token in &self.tokens {
            out.push_str(token);
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, FeatureError> {
        Vocab::from_tokens(text.lines().map(str::to_owned).collect())
    }
}

/// Encoded features of one sentence, ROOT row included.
#[derive(Clone, Debug, PartialEq)]
pub struct TokenFeatures {
    /// (n + 1) × feature_dim.
    pub matrix: Tensor,
    pub feature_dim: usize,
}

/// Feature extractor: configuration, vocabulary and parameter names.
#[derive(Clone, Debug, PartialEq)]
pub struct Encoder {
    pub config: EncoderConfig,
    pub vocab: Vocab,
    prefix: String,
}

impl Encoder {
    pub fn new(config: EncoderConfig, vocab: Vocab, prefix: &str) -> Result<Self, FeatureError> {
        config.validate()?;
        Ok(Encoder {
            config,
            vocab,
            prefix: prefix.to_owned(),
        })
    }

    fn name(&self, suffix: &str) -> String {
        format!("{}/{suffix}", self.prefix)
    }

    pub fn feature_dim(&self) -> usize {
        self.config.feature_dim()
    }

    /// Creates the encoder's parameters in `store`.
    pub fn register<R: Rng>(&self, store: &mut ParameterStore, rng: &mut R) -> Result<(), FeatureError> {
        let cfg = &self.config;
        store.add_normal(&self.name("word"), &[self.vocab.len(), cfg.word_dim], 0.01, rng)?;
        if cfg.pos_mode.uses_pos() {
            store.add_normal(&self.name("pos"), &[Upos::COUNT + 1, cfg.pos_dim], 0.01, rng)?;
        }
        if cfg.augment {
            store.add_normal(&self.name("sentence_root"), &[1, cfg.word_dim], 0.01, rng)?;
            let total = cfg.supertoken_filter_sizes.len() * cfg.supertoken_dim;
            store.add_normal(&self.name("supertoken_root"), &[1, total], 0.01, rng)?;
            for &width in &cfg.supertoken_filter_sizes {
                store.add_glorot(
                    &self.name(&format!("conv{width}/w")),
                    width * cfg.word_dim,
                    cfg.supertoken_dim,
                    rng,
                )?;
                store.add_zeros(&self.name(&format!("conv{width}/b")), &[1, cfg.supertoken_dim])?;
            }
        }
        Ok(())
    }

    /// Builds the (n + 1) × feature_dim representation inside `graph`.
    pub fn encode(&self, graph: &mut Graph<'_>, forms: &[&str], pos: Option<&[Upos]>) -> Result<Var, FeatureError> {
        let cfg = &self.config;
        if forms.is_empty() {
            return Err(FeatureError::EmptySentence);
        }
        let pos = if cfg.pos_mode.uses_pos() {
            let tags = pos.ok_or(FeatureError::MissingPos(cfg.pos_mode))?;
            if tags.len() != forms.len() {
                return Err(FeatureError::PosLength {
                    expected: forms.len(),
                    found: tags.len(),
                });
            }
            Some(tags)
        } else {
            None
        };

        let table = graph.param(&self.name("word"))?;
        let ids: Vec<usize> = forms.iter().map(|f| self.vocab.get(f)).collect();
        let words = graph.gather_rows(table, &ids)?;
        let root_word = graph.gather_rows(table, &[ROOT])?;
        let mut slices = vec![graph.concat_rows(&[root_word, words])?];

        if let Some(tags) = pos {
            let table = graph.param(&self.name("pos"))?;
            let index: Vec<usize> = std::iter::once(ROOT_POS)
                .chain(tags.iter().map(|t| t.index()))
                .collect();
            slices.push(graph.gather_rows(table, &index)?);
        }

        if cfg.augment {
            let sentence = sentence_embedding(graph, words)?;
            let ones = graph.constant(Tensor::filled(&[forms.len(), 1], 1.0));
            let shared = graph.matmul(ones, sentence)?;
            let root = graph.param(&self.name("sentence_root"))?;
            slices.push(graph.concat_rows(&[root, shared])?);

            let filters = cfg
                .supertoken_filter_sizes
                .iter()
                .map(|&width| {
                    Ok(ConvFilter {
                        width,
                        weight: graph.param(&self.name(&format!("conv{width}/w")))?,
                        bias: graph.param(&self.name(&format!("conv{width}/b")))?,
                    })
                })
                .collect::<Result<Vec<_>, NeuralError>>()?;
            let supertokens = super_token_embeddings(graph, words, &filters)?;
            let root = graph.param(&self.name("supertoken_root"))?;
            slices.push(graph.concat_rows(&[root, supertokens])?);
        }

        Ok(graph.concat_cols(&slices)?)
    }
}

/// Encodes a sentence outside of training.
pub fn encode_sentence(
    tree: &Tree,
    pos_tags: Option<&[Upos]>,
    encoder: &Encoder,
    params: &ParameterStore,
) -> Result<TokenFeatures, FeatureError> {
    let mut graph = Graph::eval(params);
    let features = encoder.encode(&mut graph, &tree.forms(), pos_tags)?;
    Ok(TokenFeatures {
        matrix: graph.value(features).clone(),
        feature_dim: encoder.feature_dim(),
    })
}

/// Mean of the token rows, as a 1×d row.
pub fn sentence_embedding(graph: &mut Graph<'_>, word_embs: Var) -> Result<Var, NeuralError> {
    let n = graph.value(word_embs).rows();
    let weights = graph.constant(Tensor::filled(&[1, n], 1.0 / n as f64));
    graph.matmul(weights, word_embs)
}

/// One convolution over the token axis.
#[derive(Clone, Copy, Debug)]
pub struct ConvFilter {
    pub width: usize,
    /// (width·d) × channels.
    pub weight: Var,
    /// 1 × channels.
    pub bias: Var,
}

/// Per-position convolution outputs for every filter, concatenated.
///
/// Output row i covers tokens i..i+width (zero padded past the end).
pub fn super_token_embeddings(graph: &mut Graph<'_>, word_embs: Var, filters: &[ConvFilter]) -> Result<Var, NeuralError> {
    let blocks = filters
        .iter()
        .map(|f| graph.conv1d(word_embs, f.weight, f.bias, f.width))
        .collect::<Result<Vec<_>, _>>()?;
    graph.concat_cols(&blocks)
}
