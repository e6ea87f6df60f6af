use thiserror::Error;

use crate::conllu::Treebank;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum AlignmentError {
    #[error("gold has {gold} sentences, prediction has {pred}")]
    SentenceCount { gold: usize, pred: usize },
    #[error("sentence {sentence}: gold has {gold} tokens, prediction has {pred}")]
    TokenCount { sentence: usize, gold: usize, pred: usize },
    #[error("sentence {sentence}, token {token}: form {gold:?} vs {pred:?}")]
    Form {
        sentence: usize,
        token: usize,
        gold: String,
        pred: String,
    },
}

/// Attachment scores as percentages over all tokens (punctuation included).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AttachmentScores {
    pub uas: f64,
    pub las: f64,
    pub token_count: usize,
}

impl AttachmentScores {
    /// Both scores are 0 for an empty corpus.
    pub fn from_counts(unlabeled: usize, labeled: usize, tokens: usize) -> Self {
        let pct = |c: usize| if tokens == 0 { 0.0 } else { 100.0 * c as f64 / tokens as f64 };
        AttachmentScores {
            uas: pct(unlabeled),
            las: pct(labeled),
            token_count: tokens,
        }
    }
}

/// UAS and LAS of `pred` against `gold`. Sentences are numbered from 1 in errors.
pub fn attachment_scores(gold: &Treebank, pred: &Treebank) -> Result<AttachmentScores, AlignmentError> {
    if gold.len() != pred.len() {
        return Err(AlignmentError::SentenceCount {
            gold: gold.len(),
            pred: pred.len(),
        });
    }
    let (mut unlabeled, mut labeled, mut tokens) = (0, 0, 0);
    for (idx, (g, p)) in gold.trees.iter().zip(&pred.trees).enumerate() {
        let sentence = idx + 1;
        if g.len() != p.len() {
            return Err(AlignmentError::TokenCount {
                sentence,
                gold: g.len(),
                pred: p.len(),
            });
        }
        for (gt, pt) in g.tokens.iter().zip(&p.tokens) {
            if gt.form != pt.form {
                return Err(AlignmentError::Form {
                    sentence,
                    token: gt.id,
                    gold: gt.form.clone(),
                    pred: pt.form.clone(),
                });
            }
            tokens += 1;
            if gt.head.is_some() && gt.head == pt.head {
                unlabeled += 1;
                if gt.deprel == pt.deprel {
                    labeled += 1;
                }
            }
        }
    }
    Ok(AttachmentScores::from_counts(unlabeled, labeled, tokens))
}
