use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::system::{
    apply_in_place, feature_token_indices, is_finished, legal_transitions, static_oracle, ParserState, SystemKind,
    Transition, TransitionError, TransitionKind,
};
use crate::conllu::{validate_tree, Tree, Treebank};
use crate::eval::attachment_scores;
use crate::features::{Encoder, EncoderConfig, Vocab};
use crate::neural::{matmul, Graph, ModelFile, NeuralError, ParameterStore, TrainSchedule, Var};
use crate::parser::{
    config_entry, finish_tree, label_set, list_entry, parse_entry, pos_input, read_encoder, write_encoder,
    ParserError,
};
use crate::training::{fit, DevMetrics, TrainLog};

pub const FAMILY: &str = "transition";
const ENCODER_PREFIX: &str = "enc";

/// Joint transition and label output space in canonical order:
/// SHIFT, LEFT_ARC per label, RIGHT_ARC per label, then REDUCE (arc-eager).
#[derive(Clone, Debug, PartialEq)]
pub struct OutputSpace {
    pub system: SystemKind,
    pub labels: Vec<String>,
}

impl OutputSpace {
    pub fn len(&self) -> usize {
        1 + 2 * self.labels.len() + usize::from(self.system == SystemKind::ArcEager)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index_of(&self, t: &Transition) -> Option<usize> {
        let label = || {
            t.label
                .as_deref()
                .and_then(|l| self.labels.binary_search_by(|x| x.as_str().cmp(l)).ok())
        };
        let l = self.labels.len();
        match t.kind {
            TransitionKind::Shift => Some(0),
            TransitionKind::LeftArc => label().map(|i| 1 + i),
            TransitionKind::RightArc => label().map(|i| 1 + l + i),
            TransitionKind::Reduce => (self.system == SystemKind::ArcEager).then_some(1 + 2 * l),
        }
    }

    pub fn transition(&self, index: usize) -> Transition {
        let l = self.labels.len();
        match index {
            0 => Transition::shift(),
            i if i <= l => Transition::left(&self.labels[i - 1]),
            i if i <= 2 * l => Transition::right(&self.labels[i - 1 - l]),
            _ => Transition::reduce(),
        }
    }

    /// Which outputs are legal in `state`.
    pub fn legal_mask(&self, state: &ParserState) -> Vec<bool> {
        let legal = legal_transitions(state, self.system);
        let l = self.labels.len();
        (0..self.len())
            .map(|i| {
                let kind = match i {
                    0 => TransitionKind::Shift,
                    i if i <= l => TransitionKind::LeftArc,
                    i if i <= 2 * l => TransitionKind::RightArc,
                    _ => TransitionKind::Reduce,
                };
                legal.contains(&kind)
            })
            .collect()
    }
}

/// Greedy decoding with an arbitrary scorer over the output space.
///
/// The highest-scoring legal output wins, ties going to the lowest index.
/// Decoding stops when nothing legal is left or the scorer offers only
/// non-finite scores; the result is then repaired by [`finish_tree`].
pub fn parse_with_scorer<F>(tree: &Tree, space: &OutputSpace, mut scorer: F) -> Tree
where
    F: FnMut(&ParserState) -> Vec<f64>,
{
    let mut state = ParserState::initial(tree.len());
    while !is_finished(&state, space.system) {
        let scores = scorer(&state);
        let mask = space.legal_mask(&state);
        let mut best: Option<(usize, f64)> = None;
        for (i, (&s, &ok)) in scores.iter().zip(&mask).enumerate() {
            if ok && !s.is_nan() && s > f64::NEG_INFINITY && best.is_none_or(|(_, b)| s > b) {
                best = Some((i, s));
            }
        }
        let Some((index, _)) = best else { break };
        apply_in_place(&mut state, &space.transition(index), space.system).expect("masked to legal transitions");
    }
    let heads: Vec<Option<usize>> = (1..=tree.len()).map(|d| state.head(d)).collect();
    let labels: Vec<Option<String>> = (1..=tree.len()).map(|d| state.label(d).map(str::to_owned)).collect();
    finish_tree(tree, &heads, &labels)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransitionConfig {
    pub system: SystemKind,
    pub encoder: EncoderConfig,
    pub hidden_dim: usize,
    /// Forms rarer than this map to the unknown word.
    pub min_word_count: usize,
}

impl Default for TransitionConfig {
    fn default() -> Self {
        TransitionConfig {
            system: SystemKind::ArcStandard,
            encoder: EncoderConfig::default(),
            hidden_dim: 256,
            min_word_count: 1,
        }
    }
}

/// Feed-forward oracle over the features of three tokens.
#[derive(Clone, Debug)]
pub struct TransitionParser {
    pub space: OutputSpace,
    pub encoder: Encoder,
    pub hidden_dim: usize,
    pub params: ParameterStore,
}

/// Oracle states of one tree: feature rows (n + 1 marks an empty slot) and targets.
struct Supervision {
    tree: usize,
    rows: [Vec<usize>; 3],
    targets: Vec<usize>,
}

impl TransitionParser {
    /// Freshly initialized parser.
    pub fn new(config: &TransitionConfig, vocab: Vocab, labels: Vec<String>, seed: u64) -> Result<Self, ParserError> {
        let encoder = Encoder::new(config.encoder.clone(), vocab, ENCODER_PREFIX)?;
        let space = OutputSpace {
            system: config.system,
            labels,
        };
        let mut params = ParameterStore::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        encoder.register(&mut params, &mut rng)?;
        let d = encoder.feature_dim();
        params.add_normal("oracle/null", &[1, d], 0.01, &mut rng)?;
        params.add_glorot("oracle/hidden/w", 3 * d, config.hidden_dim, &mut rng)?;
        params.add_zeros("oracle/hidden/b", &[1, config.hidden_dim])?;
        params.add_glorot("oracle/out/w", config.hidden_dim, space.len(), &mut rng)?;
        params.add_zeros("oracle/out/b", &[1, space.len()])?;
        Ok(TransitionParser {
            space,
            encoder,
            hidden_dim: config.hidden_dim,
            params,
        })
    }

    pub fn system(&self) -> SystemKind {
        self.space.system
    }

    /// Logits for a batch of states given as feature-row triples.
    fn logits(&self, g: &mut Graph<'_>, features: Var, rows: &[Vec<usize>; 3], dropout: f64) -> Result<Var, NeuralError> {
        let null = g.param("oracle/null")?;
        let table = g.concat_rows(&[features, null])?;
        let parts = rows
            .iter()
            .map(|r| g.gather_rows(table, r))
            .collect::<Result<Vec<_>, _>>()?;
        let input = g.concat_cols(&parts)?;
        self.head(g, input, dropout)
    }

    fn head(&self, g: &mut Graph<'_>, input: Var, dropout: f64) -> Result<Var, NeuralError> {
        let w1 = g.param("oracle/hidden/w")?;
        let b1 = g.param("oracle/hidden/b")?;
        let w2 = g.param("oracle/out/w")?;
        let b2 = g.param("oracle/out/b")?;
        let h = g.matmul(input, w1)?;
        let h = g.add(h, b1)?;
        let h = g.relu(h);
        let h = g.dropout(h, dropout)?;
        let out = g.matmul(h, w2)?;
        g.add(out, b2)
    }

    /// Scores for every state of a sentence, computed from precomputed
    /// per-slot hidden-layer contributions.
    fn sentence_scorer(&self, tree: &Tree) -> Result<impl FnMut(&ParserState) -> Vec<f64> + '_, ParserError> {
        let pos = pos_input(&self.encoder, tree)?;
        let mut g = Graph::eval(&self.params);
        let features = self.encoder.encode(&mut g, &tree.forms(), pos.as_deref())?;
        let null = g.param("oracle/null")?;
        let table = g.concat_rows(&[features, null])?;
        let table = g.value(table).clone();
        let (rows, d, h) = (table.rows(), table.cols(), self.hidden_dim);
        let w1 = self.params.get("oracle/hidden/w").expect("registered").data();
        let contributions: Vec<Vec<f64>> = (0..3)
            .map(|slot| matmul(table.data(), &w1[slot * d * h..(slot + 1) * d * h], rows, d, h))
            .collect();
        let b1 = self.params.get("oracle/hidden/b").expect("registered").data();
        let w2 = self.params.get("oracle/out/w").expect("registered").data();
        let b2 = self.params.get("oracle/out/b").expect("registered").data();
        let k = self.space.len();
        let system = self.system();
        let null_row = rows - 1;
        let mut hidden = vec![0.0; h];
        Ok(move |state: &ParserState| {
            let slots = feature_token_indices(state, system);
            hidden.copy_from_slice(b1);
            for (slot, token) in slots.iter().enumerate() {
                let row = token.unwrap_or(null_row);
                let c = &contributions[slot][row * h..(row + 1) * h];
                hidden.iter_mut().zip(c).for_each(|(x, y)| *x += y);
            }
            let mut scores = b2.to_vec();
            for (j, &x) in hidden.iter().enumerate() {
                if x > 0.0 {
                    let w = &w2[j * k..(j + 1) * k];
                    scores.iter_mut().zip(w).for_each(|(s, w)| *s += x * w);
                }
            }
            scores
        })
    }

    /// Greedy parse; existing heads and labels of `tree` are ignored.
    pub fn parse(&self, tree: &Tree) -> Result<Tree, ParserError> {
        if tree.is_empty() {
            return Err(ParserError::EmptySentence);
        }
        let scorer = self.sentence_scorer(tree)?;
        Ok(parse_with_scorer(tree, &self.space, scorer))
    }

    pub fn parse_treebank(&self, treebank: &Treebank) -> Result<Treebank, ParserError> {
        let trees = treebank
            .trees
            .iter()
            .map(|t| self.parse(t))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Treebank::new(treebank.name.clone(), trees))
    }

    fn supervision(&self, index: usize, tree: &Tree) -> Result<Option<Supervision>, ParserError> {
        let oracle = match static_oracle(tree, self.system()) {
            Ok(seq) => seq,
            Err(TransitionError::NonProjective) => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let none = tree.len() + 1;
        let mut rows: [Vec<usize>; 3] = Default::default();
        let mut targets = Vec::with_capacity(oracle.len());
        let mut state = ParserState::initial(tree.len());
        for t in &oracle {
            for (slot, token) in feature_token_indices(&state, self.system()).iter().enumerate() {
                rows[slot].push(token.unwrap_or(none));
            }
            let target = self
                .space
                .index_of(t)
                .ok_or_else(|| ParserError::Model(format!("transition {t} outside the output space")))?;
            targets.push(target);
            apply_in_place(&mut state, t, self.system())?;
        }
        Ok(Some(Supervision {
            tree: index,
            rows,
            targets,
        }))
    }

    /// Mean cross-entropy of the gold transitions over the oracle states of `trees`.
    fn batch_loss(
        &self,
        g: &mut Graph<'_>,
        train: &Treebank,
        batch: &[&Supervision],
        dropout: f64,
    ) -> Result<Var, ParserError> {
        let mut logits = Vec::with_capacity(batch.len());
        let mut targets = Vec::new();
        for sup in batch {
            let tree = &train.trees[sup.tree];
            let pos = pos_input(&self.encoder, tree)?;
            let features = self.encoder.encode(g, &tree.forms(), pos.as_deref())?;
            let features = g.dropout(features, dropout)?;
            logits.push(self.logits(g, features, &sup.rows, dropout)?);
            targets.extend_from_slice(&sup.targets);
        }
        let all = g.concat_rows(&logits)?;
        Ok(g.cross_entropy(all, &targets, None)?)
    }

    /// Trains a new parser and returns it with the best-dev-LAS parameters.
    pub fn train(
        train: &Treebank,
        dev: &Treebank,
        config: &TransitionConfig,
        schedule: &TrainSchedule,
    ) -> Result<(Self, TrainLog), ParserError> {
        if train.is_empty() {
            return Err(ParserError::EmptyTrainingSet);
        }
        for (index, tree) in train.trees.iter().enumerate() {
            let report = validate_tree(tree);
            if !report.is_valid() {
                let rules: Vec<String> = report.rules().iter().map(|r| r.id().to_owned()).collect();
                return Err(ParserError::InvalidTrainingTree {
                    index: index + 1,
                    rules: rules.join(","),
                });
            }
        }
        let vocab = Vocab::build(train, config.min_word_count);
        let mut parser = TransitionParser::new(config, vocab, label_set(train), schedule.seed)?;
        let mut supervision = Vec::new();
        let mut excluded = 0;
        for (i, tree) in train.trees.iter().enumerate() {
            match parser.supervision(i, tree)? {
                Some(s) => supervision.push(s),
                None => excluded += 1,
            }
        }
        if supervision.is_empty() {
            return Err(ParserError::NoUsableTrees(excluded));
        }
        let mut params = std::mem::take(&mut parser.params);
        let mut log = fit::<ParserError, _, _>(
            &mut params,
            schedule,
            supervision.len(),
            |store, batch, seed| {
                let mut g = Graph::train(store, seed);
                let items: Vec<&Supervision> = batch.iter().map(|&i| &supervision[i]).collect();
                let loss = parser.batch_loss(&mut g, train, &items, schedule.dropout_p)?;
                Ok((g.value(loss).item(), g.backward(loss)?))
            },
            |store| {
                if dev.is_empty() {
                    return Ok(None);
                }
                let snapshot = TransitionParser {
                    params: store.clone(),
                    ..parser.clone_without_params()
                };
                let predicted = snapshot.parse_treebank(dev)?;
                Ok(Some(DevMetrics::Attachment(attachment_scores(dev, &predicted)?)))
            },
        )?;
        log.excluded = excluded;
        parser.params = params;
        Ok((parser, log))
    }

    fn clone_without_params(&self) -> Self {
        TransitionParser {
            space: self.space.clone(),
            encoder: self.encoder.clone(),
            hidden_dim: self.hidden_dim,
            params: ParameterStore::default(),
        }
    }

    /// Mean cross-entropy of the oracle transitions of the projective trees in `trees`.
    pub fn loss(&self, g: &mut Graph<'_>, trees: &Treebank, dropout: f64) -> Result<Var, ParserError> {
        let sups: Vec<Supervision> = trees
            .trees
            .iter()
            .enumerate()
            .filter_map(|(i, t)| self.supervision(i, t).transpose())
            .collect::<Result<_, _>>()?;
        if sups.is_empty() {
            return Err(ParserError::NoUsableTrees(trees.len()));
        }
        let refs: Vec<&Supervision> = sups.iter().collect();
        self.batch_loss(g, trees, &refs, dropout)
    }

    /// [`TransitionParser::loss`] without dropout, as a number.
    pub fn oracle_loss(&self, trees: &Treebank) -> Result<f64, ParserError> {
        let mut g = Graph::eval(&self.params);
        let loss = self.loss(&mut g, trees, 0.0)?;
        Ok(g.value(loss).item())
    }

    /// Number of oracle states (training instances) for `tree`, or `None`
    /// when it is excluded as non-projective.
    pub fn instance_count(&self, tree: &Tree) -> Result<Option<usize>, ParserError> {
        Ok(self.supervision(0, tree)?.map(|s| s.targets.len()))
    }

    pub fn to_model_file(&self) -> ModelFile {
        let mut file = ModelFile {
            config: vec![
                ("family".into(), FAMILY.into()),
                ("system".into(), self.system().to_string()),
                ("hidden_dim".into(), self.hidden_dim.to_string()),
            ],
            lists: vec![("labels".into(), self.space.labels.clone())],
            params: self.params.clone(),
        };
        write_encoder(&self.encoder, &mut file);
        file
    }

    pub fn from_model_file(file: ModelFile) -> Result<Self, ParserError> {
        if config_entry(&file, "family")? != FAMILY {
            return Err(ParserError::Model("not a transition-based model".into()));
        }
        let system: SystemKind = config_entry(&file, "system")?.parse()?;
        let encoder = read_encoder(&file, ENCODER_PREFIX)?;
        let labels = list_entry(&file, "labels")?.to_vec();
        let parser = TransitionParser {
            space: OutputSpace { system, labels },
            encoder,
            hidden_dim: parse_entry(&file, "hidden_dim")?,
            params: file.params,
        };
        // Shapes must agree with a fresh layout.
        let fresh = TransitionParser::new(
            &TransitionConfig {
                system,
                encoder: parser.encoder.config.clone(),
                hidden_dim: parser.hidden_dim,
                min_word_count: 1,
            },
            parser.encoder.vocab.clone(),
            parser.space.labels.clone(),
            0,
        )?;
        let mut check = fresh.params;
        if check.len() != parser.params.len() {
            return Err(ParserError::Model("parameter set does not match the configuration".into()));
        }
        check.copy_values_from(&parser.params)?;
        Ok(parser)
    }

    pub fn save<W: Write>(&self, out: W) -> Result<(), ParserError> {
        Ok(self.to_model_file().write(out)?)
    }

    pub fn load<R: Read>(input: R) -> Result<Self, ParserError> {
        TransitionParser::from_model_file(ModelFile::read(input)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conllu::{Token, Upos};
    use crate::features::PosMode;
    use proptest::prelude::*;

    fn sentence(forms: &[&str], upos: &[Upos], heads: &[usize], rels: &[&str]) -> Tree {
        Tree::new(
            forms
                .iter()
                .enumerate()
                .map(|(i, f)| Token::new(i + 1, *f).with_upos(upos[i]).with_head(heads[i], rels[i]))
                .collect(),
        )
    }

    fn eat_rice() -> Tree {
        sentence(
            &["I", "eat", "rice"],
            &[Upos::Pron, Upos::Verb, Upos::Noun],
            &[2, 0, 2],
            &["nsubj", "root", "obj"],
        )
    }

    fn longer() -> Tree {
        sentence(
            &["the", "cat", "sat", "on", "the", "mat", "today", "."],
            &[Upos::Det, Upos::Noun, Upos::Verb, Upos::Adp, Upos::Det, Upos::Noun, Upos::Noun, Upos::Punct],
            &[2, 3, 0, 6, 6, 3, 3, 3],
            &["det", "nsubj", "root", "case", "det", "obl", "obl:tmod", "punct"],
        )
    }

    fn small_config(system: SystemKind) -> TransitionConfig {
        TransitionConfig {
            system,
            encoder: EncoderConfig {
                word_dim: 16,
                pos_dim: 8,
                pos_mode: PosMode::Gold,
                ..EncoderConfig::default()
            },
            hidden_dim: 32,
            min_word_count: 1,
        }
    }

    fn one_tree(tree: Tree) -> Treebank {
        Treebank::new("one", vec![tree])
    }

    #[test]
    fn output_space_order() {
        let space = OutputSpace {
            system: SystemKind::ArcEager,
            labels: vec!["a".into(), "b".into()],
        };
        assert_eq!(space.len(), 6);
        for i in 0..space.len() {
            assert_eq!(space.index_of(&space.transition(i)), Some(i));
        }
        assert_eq!(space.transition(5), Transition::reduce());
        let standard = OutputSpace {
            system: SystemKind::ArcStandard,
            ..space
        };
        assert_eq!(standard.len(), 5);
        assert_eq!(standard.index_of(&Transition::reduce()), None);
    }

    #[test]
    fn eat_rice_gives_six_instances() {
        let bank = one_tree(eat_rice());
        let parser = TransitionParser::new(
            &small_config(SystemKind::ArcStandard),
            Vocab::build(&bank, 1),
            label_set(&bank),
            0,
        )
        .unwrap();
        assert_eq!(parser.instance_count(&eat_rice()).unwrap(), Some(6));
        let nonprojective = sentence(
            &["a", "b", "c", "d"],
            &[Upos::X; 4],
            &[3, 4, 0, 3],
            &["x", "y", "root", "z"],
        );
        assert_eq!(parser.instance_count(&nonprojective).unwrap(), None);
    }

    #[test]
    fn initial_loss_is_near_uniform() {
        let bank = one_tree(longer());
        let labels = label_set(&bank);
        let parser =
            TransitionParser::new(&small_config(SystemKind::ArcEager), Vocab::build(&bank, 1), labels, 3).unwrap();
        let loss = parser.oracle_loss(&bank).unwrap();
        let uniform = (parser.space.len() as f64).ln();
        assert!((loss - uniform).abs() < 0.2 * uniform, "{loss} vs {uniform}");
    }

    #[test]
    fn stub_scorer_forcing_early_stop_still_yields_valid_tree() {
        let space = OutputSpace {
            system: SystemKind::ArcStandard,
            labels: vec!["dep".into(), "root".into()],
        };
        let tree = longer().without_heads();
        let mut calls = 0;
        // Two shifts, then nothing is acceptable.
        let out = parse_with_scorer(&tree, &space, |_| {
            calls += 1;
            let mut s = vec![f64::NEG_INFINITY; space.len()];
            if calls <= 2 {
                s[0] = 1.0;
            }
            s
        });
        assert!(validate_tree(&out).is_valid());
        assert_eq!(out.heads(), vec![Some(0), Some(1), Some(1), Some(1), Some(1), Some(1), Some(1), Some(1)]);
        assert!(out.tokens[1..].iter().all(|t| t.deprel.as_deref() == Some("dep")));
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let space = OutputSpace {
            system: SystemKind::ArcEager,
            labels: vec!["a".into(), "root".into()],
        };
        let tree = eat_rice().without_heads();
        // All-equal scores: SHIFT always wins while legal, the rest is repaired.
        let out = parse_with_scorer(&tree, &space, |_| vec![0.0; space.len()]);
        assert!(validate_tree(&out).is_valid());
    }

    proptest! {
        #[test]
        fn random_scores_never_pick_illegal_and_give_valid_trees(
            seed in any::<u64>(), n in 1usize..9, eager in any::<bool>()
        ) {
            use rand::Rng;
            let system = if eager { SystemKind::ArcEager } else { SystemKind::ArcStandard };
            let space = OutputSpace { system, labels: vec!["a".into(), "b".into(), "root".into()] };
            let tree = Tree::from_heads(&vec![0; n], &vec!["x"; n]).without_heads();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            // parse_with_scorer panics if an illegal transition is chosen.
            let out = parse_with_scorer(&tree, &space, |_| {
                (0..space.len()).map(|_| rng.random_range(-5.0..5.0)).collect()
            });
            let rules = validate_tree(&out).rules();
            prop_assert!(rules.iter().all(|r| !matches!(r.id(), "R2" | "R3" | "R4" | "R5")), "{:?}", rules);
        }
    }

    fn overfit(system: SystemKind) {
        let bank = Treebank::new("one", vec![longer(), eat_rice()]);
        let schedule = TrainSchedule {
            epochs: 60,
            batch_size: 2,
            peak_lr: 1e-2,
            dropout_p: 0.0,
            ..TrainSchedule::default()
        };
        let (parser, log) = TransitionParser::train(&bank, &bank, &small_config(system), &schedule).unwrap();
        assert_eq!(log.excluded, 0);
        let parsed = parser.parse_treebank(&bank).unwrap();
        let scores = attachment_scores(&bank, &parsed).unwrap();
        assert_eq!((scores.uas, scores.las), (100.0, 100.0), "{}", log.summary());
    }

    #[test]
    fn overfits_arc_standard() {
        overfit(SystemKind::ArcStandard);
    }

    #[test]
    fn overfits_arc_eager() {
        overfit(SystemKind::ArcEager);
    }

    #[test]
    fn training_is_deterministic_and_round_trips() {
        let bank = Treebank::new("two", vec![longer(), eat_rice()]);
        let schedule = TrainSchedule {
            epochs: 3,
            batch_size: 1,
            ..TrainSchedule::default()
        };
        let cfg = small_config(SystemKind::ArcEager);
        let (a, log_a) = TransitionParser::train(&bank, &bank, &cfg, &schedule).unwrap();
        let (_, log_b) = TransitionParser::train(&bank, &bank, &cfg, &schedule).unwrap();
        assert_eq!(log_a, log_b);

        let mut bytes = Vec::new();
        a.save(&mut bytes).unwrap();
        let b = TransitionParser::load(bytes.as_slice()).unwrap();
        let mut again = Vec::new();
        b.save(&mut again).unwrap();
        assert_eq!(bytes, again);
        assert_eq!(a.parse_treebank(&bank).unwrap(), b.parse_treebank(&bank).unwrap());
    }

    #[test]
    fn oracle_network_gradients_match_finite_differences() {
        use crate::neural::{grad_check, GradCheck};
        let bank = Treebank::new("one", vec![longer()]);
        let mut cfg = small_config(SystemKind::ArcEager);
        cfg.encoder.word_dim = 6;
        cfg.encoder.pos_dim = 3;
        cfg.hidden_dim = 8;
        let mut parser = TransitionParser::new(&cfg, Vocab::build(&bank, 1), label_set(&bank), 0).unwrap();
        parser.params.fill_uniform(-1.0, 1.0, &mut ChaCha8Rng::seed_from_u64(8));
        let report = grad_check(
            &parser.params,
            |g| {
                parser
                    .loss(g, &bank, 0.0)
                    .map_err(|e| NeuralError::InvalidArgument(e.to_string()))
            },
            &GradCheck::default(),
        )
        .unwrap();
        assert!(report.passed(), "{:?}", report.per_parameter);
    }

    #[test]
    fn empty_training_set_is_an_error() {
        let empty = Treebank::new("e", vec![]);
        let err = TransitionParser::train(&empty, &empty, &TransitionConfig::default(), &TrainSchedule::default());
        assert!(matches!(err, Err(ParserError::EmptyTrainingSet)));
    }
}
