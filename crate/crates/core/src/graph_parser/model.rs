use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::mst::{decode_single_root_mst, ScoreMatrix};
use crate::conllu::{validate_tree, Tree, Treebank};
use crate::eval::attachment_scores;
use crate::features::{Encoder, EncoderConfig, Vocab};
use crate::neural::{Graph, ModelFile, NeuralError, ParameterStore, Tensor, TrainSchedule, Var};
use crate::parser::{
    config_entry, label_set, list_entry, parse_entry, pos_input, read_encoder, write_encoder, ParserError,
};
use crate::training::{fit, DevMetrics, TrainLog};

pub const FAMILY: &str = "graph-biaffine";
const ENCODER_PREFIX: &str = "enc";

#[derive(Clone, Debug, PartialEq)]
pub struct GraphConfig {
    pub encoder: EncoderConfig,
    /// Output width of the arc MLPs.
    pub arc_dim: usize,
    /// Output width of the label MLPs.
    pub label_dim: usize,
    pub min_word_count: usize,
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig {
            encoder: EncoderConfig::default(),
            arc_dim: 256,
            label_dim: 64,
            min_word_count: 1,
        }
    }
}

/// Deep biaffine arc and label scorer.
#[derive(Clone, Debug)]
pub struct BiaffineParser {
    pub encoder: Encoder,
    pub labels: Vec<String>,
    pub arc_dim: usize,
    pub label_dim: usize,
    pub params: ParameterStore,
}

/// Graph nodes of one forward pass.
struct Forward {
    /// n × (n + 1): row d-1 holds the scores of every head for dependent d.
    arc_logits: Var,
    label_heads: Var,
    /// n × (label_dim + 1).
    label_deps: Var,
}

fn mlp(g: &mut Graph<'_>, x: Var, name: &str, dropout: f64) -> Result<Var, NeuralError> {
    let w = g.param(&format!("{name}/w"))?;
    let b = g.param(&format!("{name}/b"))?;
    let h = g.matmul(x, w)?;
    let h = g.add(h, b)?;
    let h = g.relu(h);
    g.dropout(h, dropout)
}

fn with_bias_column(g: &mut Graph<'_>, x: Var) -> Result<Var, NeuralError> {
    let rows = g.value(x).rows();
    let ones = g.constant(Tensor::filled(&[rows, 1], 1.0));
    g.concat_cols(&[x, ones])
}

impl BiaffineParser {
    pub fn new(config: &GraphConfig, vocab: Vocab, labels: Vec<String>, seed: u64) -> Result<Self, ParserError> {
        let encoder = Encoder::new(config.encoder.clone(), vocab, ENCODER_PREFIX)?;
        let mut params = ParameterStore::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        encoder.register(&mut params, &mut rng)?;
        let d = encoder.feature_dim();
        let (a, l, k) = (config.arc_dim, config.label_dim, labels.len().max(1));
        for (name, width) in [("arc/head", a), ("arc/dep", a), ("label/head", l), ("label/dep", l)] {
            params.add_glorot(&format!("{name}/w"), d, width, &mut rng)?;
            params.add_zeros(&format!("{name}/b"), &[1, width])?;
        }
        params.add_glorot("arc/u", a + 1, a, &mut rng)?;
        params.add_glorot("label/u", l + 1, k * (l + 1), &mut rng)?;
        Ok(BiaffineParser {
            encoder,
            labels,
            arc_dim: a,
            label_dim: l,
            params,
        })
    }

    fn forward(&self, g: &mut Graph<'_>, tree: &Tree, dropout: f64) -> Result<Forward, ParserError> {
        let n = tree.len();
        let pos = pos_input(&self.encoder, tree)?;
        let features = self.encoder.encode(g, &tree.forms(), pos.as_deref())?;
        let features = g.dropout(features, dropout)?;
        let token_rows: Vec<usize> = (1..=n).collect();
        let tokens = g.gather_rows(features, &token_rows)?;

        let arc_heads = mlp(g, features, "arc/head", dropout)?;
        let arc_deps = mlp(g, tokens, "arc/dep", dropout)?;
        let arc_heads = with_bias_column(g, arc_heads)?;
        let u = g.param("arc/u")?;
        let projected = g.matmul(arc_heads, u)?;
        let arc_logits = g.matmul_nt(arc_deps, projected)?;

        let label_heads = mlp(g, features, "label/head", dropout)?;
        let label_deps = mlp(g, tokens, "label/dep", dropout)?;
        let label_deps = with_bias_column(g, label_deps)?;
        Ok(Forward {
            arc_logits,
            label_heads,
            label_deps,
        })
    }

    /// n × L label scores of every token given its head.
    fn label_logits(&self, g: &mut Graph<'_>, fwd: &Forward, heads: &[usize]) -> Result<Var, NeuralError> {
        let chosen = g.gather_rows(fwd.label_heads, heads)?;
        let chosen = with_bias_column(g, chosen)?;
        let u = g.param("label/u")?;
        let projected = g.matmul(chosen, u)?;
        g.grouped_row_dot(projected, fwd.label_deps)
    }

    /// Arc scores with self-arcs masked.
    pub fn score_arcs(&self, tree: &Tree) -> Result<ScoreMatrix, ParserError> {
        if tree.is_empty() {
            return Err(ParserError::EmptySentence);
        }
        let mut g = Graph::eval(&self.params);
        let fwd = self.forward(&mut g, tree, 0.0)?;
        let logits = g.value(fwd.arc_logits);
        Ok(ScoreMatrix::from_fn(tree.len(), |h, d| logits.at(d - 1, h)))
    }

    /// n × L label scores for the given heads (`heads[d - 1]` heads `d`).
    pub fn score_labels(&self, tree: &Tree, heads: &[usize]) -> Result<Tensor, ParserError> {
        let mut g = Graph::eval(&self.params);
        let fwd = self.forward(&mut g, tree, 0.0)?;
        let logits = self.label_logits(&mut g, &fwd, heads)?;
        Ok(g.value(logits).clone())
    }

    /// Single-root MST decoding, then the best label for each chosen arc.
    pub fn parse(&self, tree: &Tree) -> Result<Tree, ParserError> {
        if tree.is_empty() {
            return Err(ParserError::EmptySentence);
        }
        let mut g = Graph::eval(&self.params);
        let fwd = self.forward(&mut g, tree, 0.0)?;
        let logits = g.value(fwd.arc_logits);
        let scores = ScoreMatrix::from_fn(tree.len(), |h, d| logits.at(d - 1, h));
        let heads = decode_single_root_mst(&scores).map_err(|e| ParserError::Model(e.to_string()))?;
        let label_logits = self.label_logits(&mut g, &fwd, &heads)?;
        let label_logits = g.value(label_logits);
        let mut out = tree.clone();
        for (i, token) in out.tokens.iter_mut().enumerate() {
            let row = label_logits.row(i);
            let best = (0..row.len()).fold(0, |b, k| if row[k] > row[b] { k } else { b });
            token.head = Some(heads[i]);
            token.deprel = Some(self.labels.get(best).cloned().unwrap_or_else(|| "dep".into()));
        }
        Ok(out)
    }

    pub fn parse_treebank(&self, treebank: &Treebank) -> Result<Treebank, ParserError> {
        let trees = treebank
            .trees
            .iter()
            .map(|t| self.parse(t))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Treebank::new(treebank.name.clone(), trees))
    }

    fn gold(&self, tree: &Tree) -> Result<(Vec<usize>, Vec<usize>), ParserError> {
        let mut heads = Vec::with_capacity(tree.len());
        let mut labels = Vec::with_capacity(tree.len());
        for token in &tree.tokens {
            heads.push(token.head.ok_or_else(|| ParserError::Model("training token without head".into()))?);
            let rel = token.deprel.as_deref().unwrap_or_default();
            let index = self
                .labels
                .binary_search_by(|l| l.as_str().cmp(rel))
                .map_err(|_| ParserError::Model(format!("label {rel:?} outside the label set")))?;
            labels.push(index);
        }
        Ok((heads, labels))
    }

    /// Head cross-entropy plus label cross-entropy, each a mean over tokens.
    pub fn loss(&self, g: &mut Graph<'_>, tree: &Tree, dropout: f64) -> Result<Var, ParserError> {
        let n = tree.len();
        let (heads, labels) = self.gold(tree)?;
        let fwd = self.forward(g, tree, dropout)?;
        let allowed: Vec<bool> = (1..=n).flat_map(|d| (0..=n).map(move |h| h != d)).collect();
        let arc = g.cross_entropy(fwd.arc_logits, &heads, Some(&allowed))?;
        let label_logits = self.label_logits(g, &fwd, &heads)?;
        let label = g.cross_entropy(label_logits, &labels, None)?;
        Ok(g.add(arc, label)?)
    }

    /// Mean head cross-entropy per dependent over `trees`, without dropout.
    pub fn head_loss(&self, trees: &Treebank) -> Result<f64, ParserError> {
        let mut total = 0.0;
        let mut count = 0;
        for tree in &trees.trees {
            let n = tree.len();
            let (heads, _) = self.gold(tree)?;
            let mut g = Graph::eval(&self.params);
            let fwd = self.forward(&mut g, tree, 0.0)?;
            let allowed: Vec<bool> = (1..=n).flat_map(|d| (0..=n).map(move |h| h != d)).collect();
            let arc = g.cross_entropy(fwd.arc_logits, &heads, Some(&allowed))?;
            total += g.value(arc).item() * n as f64;
            count += n;
        }
        Ok(total / count.max(1) as f64)
    }

    pub fn train(
        train: &Treebank,
        dev: &Treebank,
        config: &GraphConfig,
        schedule: &TrainSchedule,
    ) -> Result<(Self, TrainLog), ParserError> {
        if train.is_empty() {
            return Err(ParserError::EmptyTrainingSet);
        }
        for (index, tree) in train.trees.iter().enumerate() {
            let report = validate_tree(tree);
            if !report.is_valid() {
                let rules: Vec<&str> = report.rules().iter().map(|r| r.id()).collect();
                return Err(ParserError::InvalidTrainingTree {
                    index: index + 1,
                    rules: rules.join(","),
                });
            }
        }
        let vocab = Vocab::build(train, config.min_word_count);
        let mut parser = BiaffineParser::new(config, vocab, label_set(train), schedule.seed)?;
        let mut params = std::mem::take(&mut parser.params);
        let log = fit::<ParserError, _, _>(
            &mut params,
            schedule,
            train.len(),
            |store, batch, seed| {
                let mut g = Graph::train(store, seed);
                let losses = batch
                    .iter()
                    .map(|&i| parser.loss(&mut g, &train.trees[i], schedule.dropout_p))
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
                let snapshot = BiaffineParser {
                    params: store.clone(),
                    ..parser.clone_without_params()
                };
                let predicted = snapshot.parse_treebank(dev)?;
                Ok(Some(DevMetrics::Attachment(attachment_scores(dev, &predicted)?)))
            },
        )?;
        parser.params = params;
        Ok((parser, log))
    }

    fn clone_without_params(&self) -> Self {
        BiaffineParser {
            encoder: self.encoder.clone(),
            labels: self.labels.clone(),
            arc_dim: self.arc_dim,
            label_dim: self.label_dim,
            params: ParameterStore::default(),
        }
    }

    pub fn to_model_file(&self) -> ModelFile {
        let mut file = ModelFile {
            config: vec![
                ("family".into(), FAMILY.into()),
                ("arc_dim".into(), self.arc_dim.to_string()),
                ("label_dim".into(), self.label_dim.to_string()),
            ],
            lists: vec![("labels".into(), self.labels.clone())],
            params: self.params.clone(),
        };
        write_encoder(&self.encoder, &mut file);
        file
    }

    pub fn from_model_file(file: ModelFile) -> Result<Self, ParserError> {
        if config_entry(&file, "family")? != FAMILY {
            return Err(ParserError::Model("not a graph-based model".into()));
        }
        let parser = BiaffineParser {
            encoder: read_encoder(&file, ENCODER_PREFIX)?,
            labels: list_entry(&file, "labels")?.to_vec(),
            arc_dim: parse_entry(&file, "arc_dim")?,
            label_dim: parse_entry(&file, "label_dim")?,
            params: file.params,
        };
        let config = GraphConfig {
            encoder: parser.encoder.config.clone(),
            arc_dim: parser.arc_dim,
            label_dim: parser.label_dim,
            min_word_count: 1,
        };
        let mut fresh = BiaffineParser::new(&config, parser.encoder.vocab.clone(), parser.labels.clone(), 0)?.params;
        if fresh.len() != parser.params.len() {
            return Err(ParserError::Model("parameter set does not match the configuration".into()));
        }
        fresh.copy_values_from(&parser.params)?;
        Ok(parser)
    }

    pub fn save<W: Write>(&self, out: W) -> Result<(), ParserError> {
        Ok(self.to_model_file().write(out)?)
    }

    pub fn load<R: Read>(input: R) -> Result<Self, ParserError> {
        BiaffineParser::from_model_file(ModelFile::read(input)?)
    }
}
