//! Pieces shared by the parser families.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::conllu::{Tree, Treebank, Upos};
use crate::eval::AlignmentError;
use crate::features::{Encoder, EncoderConfig, FeatureError, Vocab};
use crate::neural::{ModelFile, NeuralError};
use crate::transition::TransitionError;

/// Relation used for tokens the decoder left without a head.
pub const FALLBACK_LABEL: &str = "dep";
pub const ROOT_LABEL: &str = "root";

#[derive(Debug, Error)]
pub enum ParserError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("training set has no usable trees ({0} excluded)")]
    NoUsableTrees(usize),
    #[error("sentence has no tokens")]
    EmptySentence,
    #[error("training tree {index} is not a valid labeled tree: {rules}")]
    InvalidTrainingTree { index: usize, rules: String },
    #[error("malformed model file: {0}")]
    Model(String),
    #[error(transparent)]
    Transition(#[from] TransitionError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error(transparent)]
    Alignment(#[from] AlignmentError),
}

/// Sorted relation labels of a treebank.
pub fn label_set(treebank: &Treebank) -> Vec<String> {
    let labels: BTreeSet<&str> = treebank
        .trees
        .iter()
        .flat_map(|t| &t.tokens)
        .filter_map(|t| t.deprel.as_deref())
        .collect();
    labels.into_iter().map(str::to_owned).collect()
}

/// POS tags the encoder needs for `tree`, taken from its UPOS column.
pub fn pos_input(encoder: &Encoder, tree: &Tree) -> Result<Option<Vec<Upos>>, FeatureError> {
    if !encoder.config.pos_mode.uses_pos() {
        return Ok(None);
    }
    tree.upos()
        .map(Some)
        .ok_or(FeatureError::MissingPos(encoder.config.pos_mode))
}

/// Copies `heads`/`labels` onto `tree`, repairing partial analyses.
///
/// The first head-0 token is the root; later head-0 tokens and tokens
/// without a head are attached to it with [`FALLBACK_LABEL`]. Without any
/// root, token 1 becomes the root.
pub fn finish_tree(tree: &Tree, heads: &[Option<usize>], labels: &[Option<String>]) -> Tree {
    let n = tree.len();
    let mut heads: Vec<Option<usize>> = heads.to_vec();
    let mut labels: Vec<Option<String>> = labels.to_vec();
    let root = match (0..n).find(|&i| heads[i] == Some(0)) {
        Some(i) => i + 1,
        None => {
            heads[0] = Some(0);
            labels[0] = Some(ROOT_LABEL.to_owned());
            1
        }
    };
    let mut out = tree.clone();
    for (i, token) in out.tokens.iter_mut().enumerate() {
        let repaired = match heads[i] {
            Some(0) if i + 1 != root => None,
            other => other,
        };
        match repaired {
            Some(h) => {
                token.head = Some(h);
                token.deprel = Some(labels[i].clone().unwrap_or_else(|| FALLBACK_LABEL.to_owned()));
            }
            None => {
                token.head = Some(root);
                token.deprel = Some(FALLBACK_LABEL.to_owned());
            }
        }
    }
    out
}

pub(crate) fn config_entry<'a>(file: &'a ModelFile, key: &str) -> Result<&'a str, ParserError> {
    file.config_value(key)
        .ok_or_else(|| ParserError::Model(format!("missing config entry {key:?}")))
}

pub(crate) fn parse_entry<T: std::str::FromStr>(file: &ModelFile, key: &str) -> Result<T, ParserError> {
    let value = config_entry(file, key)?;
    value
        .parse()
        .map_err(|_| ParserError::Model(format!("bad value {value:?} for {key:?}")))
}

pub(crate) fn list_entry<'a>(file: &'a ModelFile, name: &str) -> Result<&'a [String], ParserError> {
    file.list(name)
        .ok_or_else(|| ParserError::Model(format!("missing list {name:?}")))
}

/// Stores encoder configuration and vocabulary in a model file.
pub(crate) fn write_encoder(encoder: &Encoder, file: &mut ModelFile) {
    file.config.extend(encoder.config.to_entries());
    file.lists.push(("vocab".into(), encoder.vocab.tokens().to_vec()));
}

pub(crate) fn read_encoder(file: &ModelFile, prefix: &str) -> Result<Encoder, ParserError> {
    let config = EncoderConfig::from_lookup(|k| file.config_value(k).map(str::to_owned))?;
    let vocab = Vocab::from_tokens(list_entry(file, "vocab")?.to_vec())?;
    Ok(Encoder::new(config, vocab, prefix)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conllu::validate_tree;

    #[test]
    fn fallback_attaches_leftovers_to_root() {
        let tree = Tree::from_heads(&[2, 0, 2, 2], &["a", "root", "b", "c"]).without_heads();
        let heads = [Some(2), Some(0), None, Some(0)];
        let labels = [Some("a".into()), Some("root".into()), None, Some("root".into())];
        let out = finish_tree(&tree, &heads, &labels);
        assert_eq!(out.heads(), vec![Some(2), Some(0), Some(2), Some(2)]);
        assert_eq!(out.tokens[2].deprel.as_deref(), Some("dep"));
        assert_eq!(out.tokens[3].deprel.as_deref(), Some("dep"));
        assert!(validate_tree(&out).is_valid());
    }

    #[test]
    fn no_root_promotes_first_token() {
        let tree = Tree::from_heads(&[2, 0, 2], &["a", "root", "b"]).without_heads();
        let out = finish_tree(&tree, &[None, Some(1), None], &[None, Some("x".into()), None]);
        assert_eq!(out.heads(), vec![Some(0), Some(1), Some(1)]);
        assert!(validate_tree(&out).is_valid());
    }
}
