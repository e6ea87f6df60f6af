use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::conllu::{Tree, Treebank};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum AgreementError {
    #[error("annotation lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("cannot compute agreement over zero items")]
    Empty,
    #[error("sentence {sentence}, token {token}: forms differ ({left:?} vs {right:?})")]
    FormMismatch {
        sentence: usize,
        token: usize,
        left: String,
        right: String,
    },
}

/// Cohen's kappa between two annotations of the same items.
///
/// Returns 1 when both annotators use a single, identical label (chance
/// agreement is then 1 as well).
pub fn cohen_kappa<T: Ord>(a: &[T], b: &[T]) -> Result<f64, AgreementError> {
    if a.len() != b.len() {
        return Err(AgreementError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(AgreementError::Empty);
    }
    let n = a.len() as f64;
    let observed = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64 / n;

    let mut marginals: BTreeMap<&T, (usize, usize)> = BTreeMap::new();
    for x in a {
        marginals.entry(x).or_default().0 += 1;
    }
    for y in b {
        marginals.entry(y).or_default().1 += 1;
    }
    let chance: f64 = marginals
        .values()
        .map(|&(ca, cb)| (ca as f64 / n) * (cb as f64 / n))
        .sum();

    if chance >= 1.0 {
        return Ok(1.0);
    }
    Ok((observed - chance) / (1.0 - chance))
}

/// Arc agreement between two annotations of one sentence or corpus.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AttachmentAgreement {
    /// Fraction of tokens with the same head.
    pub unlabeled: f64,
    /// Fraction of tokens with the same head and relation.
    pub labeled: f64,
    pub token_count: usize,
}

fn check_alignment(sentence: usize, a: &Tree, b: &Tree) -> Result<(), AgreementError> {
    if a.len() != b.len() {
        return Err(AgreementError::LengthMismatch(a.len(), b.len()));
    }
    for (x, y) in a.tokens.iter().zip(&b.tokens) {
        if x.form != y.form {
            return Err(AgreementError::FormMismatch {
                sentence,
                token: x.id,
                left: x.form.clone(),
                right: y.form.clone(),
            });
        }
    }
    Ok(())
}

fn count_matches(a: &Tree, b: &Tree) -> (usize, usize) {
    a.tokens.iter().zip(&b.tokens).fold((0, 0), |(u, l), (x, y)| {
        let head = x.head == y.head;
        (u + head as usize, l + (head && x.deprel == y.deprel) as usize)
    })
}

pub fn attachment_agreement(a: &Tree, b: &Tree) -> Result<AttachmentAgreement, AgreementError> {
    check_alignment(1, a, b)?;
    if a.is_empty() {
        return Err(AgreementError::Empty);
    }
    let (u, l) = count_matches(a, b);
    let n = a.len();
    Ok(AttachmentAgreement {
        unlabeled: u as f64 / n as f64,
        labeled: l as f64 / n as f64,
        token_count: n,
    })
}

/// Agreement statistics between two annotations of the same corpus.
#[derive(Clone, Debug, PartialEq)]
pub struct AgreementResult {
    pub kappa_upos: f64,
    pub kappa_deprel: f64,
    pub unlabeled_agreement: f64,
    pub labeled_agreement: f64,
    pub token_count: usize,
}

impl AgreementResult {
    /// Human-readable table.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# agreement over all tokens (punctuation included)");
        let _ = writeln!(out, "{:<22} {:>8}", "statistic", "value");
        for (name, value) in self.rows() {
            let _ = writeln!(out, "{name:<22} {value:>8.4}");
        }
        let _ = writeln!(out, "{:<22} {:>8}", "tokens", self.token_count);
        out
    }

    /// One `key=value` line per statistic.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        for (name, value) in self.rows() {
            let _ = writeln!(out, "{name}={value:.6}");
        }
        let _ = writeln!(out, "token_count={}", self.token_count);
        out
    }

    fn rows(&self) -> [(&'static str, f64); 4] {
        [
            ("kappa_upos", self.kappa_upos),
            ("kappa_deprel", self.kappa_deprel),
            ("unlabeled_agreement", self.unlabeled_agreement),
            ("labeled_agreement", self.labeled_agreement),
        ]
    }
}

/// Pools UPOS/relation kappa and arc agreement over every aligned token.
pub fn agreement(a: &Treebank, b: &Treebank) -> Result<AgreementResult, AgreementError> {
    if a.len() != b.len() {
        return Err(AgreementError::LengthMismatch(a.len(), b.len()));
    }
    let mut upos = (Vec::new(), Vec::new());
    let mut rels = (Vec::new(), Vec::new());
    let (mut unlabeled, mut labeled) = (0, 0);
    for (idx, (x, y)) in a.trees.iter().zip(&b.trees).enumerate() {
        check_alignment(idx + 1, x, y)?;
        let (u, l) = count_matches(x, y);
        unlabeled += u;
        labeled += l;
        for (tx, ty) in x.tokens.iter().zip(&y.tokens) {
            upos.0.push(tx.upos.map(|u| u.as_str()).unwrap_or("_"));
            upos.1.push(ty.upos.map(|u| u.as_str()).unwrap_or("_"));
            rels.0.push(tx.deprel.as_deref().unwrap_or("_"));
            rels.1.push(ty.deprel.as_deref().unwrap_or("_"));
        }
    }
    let n = upos.0.len();
    if n == 0 {
        return Err(AgreementError::Empty);
    }
    Ok(AgreementResult {
        kappa_upos: cohen_kappa(&upos.0, &upos.1)?,
        kappa_deprel: cohen_kappa(&rels.0, &rels.1)?,
        unlabeled_agreement: unlabeled as f64 / n as f64,
        labeled_agreement: labeled as f64 / n as f64,
        token_count: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn kappa_hand_cases() {
        assert_eq!(cohen_kappa(&["N", "V", "N"], &["N", "V", "N"]).unwrap(), 1.0);
        let k = cohen_kappa(&["N", "V", "N", "N"], &["N", "V", "V", "N"]).unwrap();
        assert!((k - 0.5).abs() < 1e-9);
        assert_eq!(cohen_kappa(&["N", "N"], &["V", "V"]).unwrap(), 0.0);
    }

    #[test]
    fn kappa_degenerate_and_errors() {
        assert_eq!(cohen_kappa(&["N", "N"], &["N", "N"]).unwrap(), 1.0);
        assert_eq!(
            cohen_kappa(&["N"], &["N", "V"]),
            Err(AgreementError::LengthMismatch(1, 2))
        );
        assert_eq!(cohen_kappa::<&str>(&[], &[]), Err(AgreementError::Empty));
    }

    #[test]
    fn attachment_hand_cases() {
        let gold = Tree::from_heads(&[2, 0, 2, 3], &["nsubj", "root", "obj", "amod"]);
        let same = attachment_agreement(&gold, &gold).unwrap();
        assert_eq!((same.unlabeled, same.labeled), (1.0, 1.0));

        let relabeled = Tree::from_heads(&[2, 0, 2, 3], &["nsubj", "root", "iobj", "amod"]);
        let r = attachment_agreement(&gold, &relabeled).unwrap();
        assert_eq!((r.unlabeled, r.labeled), (1.0, 0.75));

        let moved = Tree::from_heads(&[2, 0, 2, 2], &["nsubj", "root", "obj", "amod"]);
        let m = attachment_agreement(&gold, &moved).unwrap();
        assert_eq!((m.unlabeled, m.labeled), (0.75, 0.75));
    }

    #[test]
    fn form_mismatch_is_reported() {
        let a = Tree::from_heads(&[0, 1], &["root", "dep"]);
        let mut b = a.clone();
        b.tokens[1].form = "other".into();
        assert!(matches!(
            attachment_agreement(&a, &b),
            Err(AgreementError::FormMismatch { token: 2, .. })
        ));
    }

    #[test]
    fn corpus_report_formats() {
        let a = Treebank::new("a", vec![Tree::from_heads(&[2, 0], &["nsubj", "root"])]);
        let result = agreement(&a, &a).unwrap();
        assert_eq!(result.token_count, 2);
        assert!(result.to_key_values().contains("labeled_agreement=1.000000"));
        assert!(result.to_table().starts_with("# agreement over all tokens"));
    }

    proptest! {
        #[test]
        fn kappa_invariant_under_relabeling(
            pairs in prop::collection::vec((0u8..4, 0u8..4), 1..40),
            perm in Just([2u8, 0, 3, 1]),
        ) {
            let (a, b): (Vec<u8>, Vec<u8>) = pairs.iter().copied().unzip();
            let pa: Vec<u8> = a.iter().map(|&x| perm[x as usize]).collect();
            let pb: Vec<u8> = b.iter().map(|&x| perm[x as usize]).collect();
            let k1 = cohen_kappa(&a, &b).unwrap();
            let k2 = cohen_kappa(&pa, &pb).unwrap();
            prop_assert!((k1 - k2).abs() < 1e-12);
            prop_assert!((-1.0..=1.0).contains(&k1));
        }
    }
}
