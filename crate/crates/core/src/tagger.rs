//! Linear POS tagger over the lookup encoder.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::conllu::{parse_conllu, serialize_conllu, ConlluError, Tree, Treebank, Upos};
use crate::features::{Encoder, EncoderConfig, FeatureError, PosMode, Vocab};
use crate::neural::{Graph, ModelFile, NeuralError, ParameterStore, TrainSchedule, Var};
use crate::parser::{config_entry, read_encoder, write_encoder, ParserError};
use crate::training::{fit, DevMetrics, TrainLog};

pub const FAMILY: &str = "tagger";
const ENCODER_PREFIX: &str = "enc";
pub const SOURCE_COMMENT: &str = "upos_source";

#[derive(Debug, Error)]
pub enum TaggerError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("sentence {0} lacks gold UPOS tags")]
    MissingGold(usize),
    #[error("sentence has no tokens")]
    EmptySentence,
    #[error("malformed tagger file: {0}")]
    Model(String),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error(transparent)]
    Conllu(#[from] ConlluError),
    #[error("cache I/O: {0}")]
    Io(#[from] std::io::Error),
}

impl From<ParserError> for TaggerError {
    fn from(e: ParserError) -> Self {
        TaggerError::Model(e.to_string())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TaggerConfig {
    /// POS input is always disabled for the tagger itself.
    pub encoder: EncoderConfig,
    pub min_word_count: usize,
}

impl Default for TaggerConfig {
    fn default() -> Self {
        TaggerConfig {
            encoder: EncoderConfig {
                pos_mode: PosMode::None,
                ..EncoderConfig::default()
            },
            min_word_count: 1,
        }
    }
}

/// Encoder plus one linear layer onto the 17 UPOS classes.
#[derive(Clone, Debug)]
pub struct TaggerModel {
    pub encoder: Encoder,
    pub params: ParameterStore,
}

impl TaggerModel {
    pub fn new(config: &TaggerConfig, vocab: Vocab, seed: u64) -> Result<Self, TaggerError> {
        let encoder_config = EncoderConfig {
            pos_mode: PosMode::None,
            ..config.encoder.clone()
        };
        let encoder = Encoder::new(encoder_config, vocab, ENCODER_PREFIX)?;
        let mut params = ParameterStore::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        encoder.register(&mut params, &mut rng)?;
        params.add_glorot("tagger/w", encoder.feature_dim(), Upos::COUNT, &mut rng)?;
        params.add_zeros("tagger/b", &[1, Upos::COUNT])?;
        Ok(TaggerModel { encoder, params })
    }

    /// n × 17 logits.
    pub fn logits(&self, g: &mut Graph<'_>, tree: &Tree, dropout: f64) -> Result<Var, TaggerError> {
        if tree.is_empty() {
            return Err(TaggerError::EmptySentence);
        }
        let features = self.encoder.encode(g, &tree.forms(), None)?;
        let rows: Vec<usize> = (1..=tree.len()).collect();
        let tokens = g.gather_rows(features, &rows)?;
        let tokens = g.dropout(tokens, dropout)?;
        let w = g.param("tagger/w")?;
        let b = g.param("tagger/b")?;
        let out = g.matmul(tokens, w)?;
        Ok(g.add(out, b)?)
    }

    /// Mean token cross-entropy against the gold tags of `tree`.
    pub fn loss(&self, g: &mut Graph<'_>, tree: &Tree, dropout: f64) -> Result<Var, TaggerError> {
        let gold: Vec<usize> = tree
            .upos()
            .ok_or(TaggerError::MissingGold(1))?
            .iter()
            .map(|u| u.index())
            .collect();
        let logits = self.logits(g, tree, dropout)?;
        Ok(g.cross_entropy(logits, &gold, None)?)
    }

    /// Argmax tag per token; ties go to the earliest tag in canonical order.
    pub fn tag_sentence(&self, tree: &Tree) -> Result<Vec<Upos>, TaggerError> {
        let mut g = Graph::eval(&self.params);
        let logits = self.logits(&mut g, tree, 0.0)?;
        let logits = g.value(logits);
        Ok((0..tree.len()).map(|i| Upos::from_index(argmax(logits.row(i))).expect("17 classes")).collect())
    }

    /// Copy of `treebank` with predicted UPOS and a provenance comment.
    pub fn tag_treebank(&self, treebank: &Treebank) -> Result<Treebank, TaggerError> {
        let trees = treebank
            .trees
            .iter()
            .map(|tree| {
                let tags = self.tag_sentence(tree)?;
                let mut out = tree.clone();
                for (token, tag) in out.tokens.iter_mut().zip(tags) {
                    token.upos = Some(tag);
                }
                out.set_comment(SOURCE_COMMENT, "auto");
                Ok(out)
            })
            .collect::<Result<Vec<_>, TaggerError>>()?;
        Ok(Treebank::new(treebank.name.clone(), trees))
    }

    /// Percentage of tokens whose predicted tag equals the gold one.
    pub fn accuracy(&self, treebank: &Treebank) -> Result<f64, TaggerError> {
        let (mut right, mut total) = (0, 0);
        for (i, tree) in treebank.trees.iter().enumerate() {
            let gold = tree.upos().ok_or(TaggerError::MissingGold(i + 1))?;
            let predicted = self.tag_sentence(tree)?;
            right += gold.iter().zip(&predicted).filter(|(a, b)| a == b).count();
            total += gold.len();
        }
        Ok(if total == 0 { 0.0 } else { 100.0 * right as f64 / total as f64 })
    }

    /// Trains on gold tags; keeps the parameters with the best dev accuracy.
    pub fn train(
        train: &Treebank,
        dev: &Treebank,
        config: &TaggerConfig,
        schedule: &TrainSchedule,
    ) -> Result<(Self, TrainLog), TaggerError> {
        if train.is_empty() {
            return Err(TaggerError::EmptyTrainingSet);
        }
        for (i, tree) in train.trees.iter().chain(&dev.trees).enumerate() {
            if tree.upos().is_none() {
                return Err(TaggerError::MissingGold(i + 1));
            }
        }
        let vocab = Vocab::build(train, config.min_word_count);
        let mut model = TaggerModel::new(config, vocab, schedule.seed)?;
        let mut params = std::mem::take(&mut model.params);
        let log = fit::<TaggerError, _, _>(
            &mut params,
            schedule,
            train.len(),
            |store, batch, seed| {
                let mut g = Graph::train(store, seed);
                let losses = batch
                    .iter()
                    .map(|&i| model.loss(&mut g, &train.trees[i], schedule.dropout_p))
                    .collect::<Result<Vec<_>, _>>()?;
                let stacked = g.concat_cols(&losses)?;
                let total = g.sum(stacked);
                let mean = g.scale(total, 1.0 / batch.len() as f64);
                Ok((g.value(mean).item(), g.backward(mean)?))
            },
            |store| {
                if dev.is_empty() {
                    return Ok(None);
                }
                let snapshot = TaggerModel {
                    encoder: model.encoder.clone(),
                    params: store.clone(),
                };
                Ok(Some(DevMetrics::Accuracy(snapshot.accuracy(dev)?)))
            },
        )?;
        model.params = params;
        Ok((model, log))
    }

    pub fn to_model_file(&self) -> ModelFile {
        let mut file = ModelFile {
            config: vec![("family".into(), FAMILY.into())],
            lists: Vec::new(),
            params: self.params.clone(),
        };
        write_encoder(&self.encoder, &mut file);
        file
    }

    pub fn from_model_file(file: ModelFile) -> Result<Self, TaggerError> {
        if config_entry(&file, "family")? != FAMILY {
            return Err(TaggerError::Model("not a tagger model".into()));
        }
        let encoder = read_encoder(&file, ENCODER_PREFIX)?;
        let config = TaggerConfig {
            encoder: encoder.config.clone(),
            min_word_count: 1,
        };
        let mut fresh = TaggerModel::new(&config, encoder.vocab.clone(), 0)?.params;
        if fresh.len() != file.params.len() {
            return Err(TaggerError::Model("parameter set does not match the configuration".into()));
        }
        fresh.copy_values_from(&file.params)?;
        Ok(TaggerModel {
            encoder,
            params: file.params,
        })
    }

    pub fn save<W: Write>(&self, out: W) -> Result<(), TaggerError> {
        Ok(self.to_model_file().write(out)?)
    }

    pub fn load<R: Read>(input: R) -> Result<Self, TaggerError> {
        TaggerModel::from_model_file(ModelFile::read(input)?)
    }
}

fn argmax(row: &[f64]) -> usize {
    (0..row.len()).fold(0, |best, k| if row[k] > row[best] { k } else { best })
}

/// Hex SHA-256 of the serialized treebank.
pub fn treebank_hash(treebank: &Treebank) -> String {
    let digest = Sha256::digest(serialize_conllu(treebank).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Auto-tagged treebanks stored once per input treebank.
#[derive(Clone, Debug)]
pub struct AutoPosCache {
    dir: PathBuf,
}

impl AutoPosCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        AutoPosCache { dir: dir.into() }
    }

    pub fn path_for(&self, treebank: &Treebank) -> PathBuf {
        self.dir.join(format!("{}.auto.conllu", treebank_hash(treebank)))
    }

    /// The cached auto-tagged copy of `treebank`, created with `tag` on a miss.
    pub fn get_or_tag<F>(&self, treebank: &Treebank, tag: F) -> Result<Treebank, TaggerError>
    where
        F: FnOnce(&Treebank) -> Result<Treebank, TaggerError>,
    {
        let path = self.path_for(treebank);
        if path.exists() {
            let mut cached = parse_conllu(&fs::read_to_string(&path)?)?;
            cached.name = treebank.name.clone();
            return Ok(cached);
        }
        let tagged = tag(treebank)?;
        fs::create_dir_all(&self.dir)?;
        write_atomically(&path, serialize_conllu(&tagged).as_bytes())?;
        Ok(tagged)
    }
}

fn write_atomically(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(tmp, path)
}
