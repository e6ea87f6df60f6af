use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::conllu::{Tree, Treebank};

const MAX_SWAPS: usize = 10_000;

/// Parameters of [`stratified_split`].
#[derive(Clone, Debug, PartialEq)]
pub struct SplitSpec {
    /// Train, dev and test proportions.
    pub ratios: [f64; 3],
    pub seed: u64,
    /// Labels found in at least this many trees must occur in every split.
    pub min_label_count: usize,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            ratios: [0.8, 0.1, 0.1],
            seed: 0,
            min_label_count: 3,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<(), SplitError> {
        let sum: f64 = self.ratios.iter().sum();
        if self.ratios.iter().any(|r| *r < 0.0 || !r.is_finite()) || (sum - 1.0).abs() > 1e-9 {
            return Err(SplitError::Ratios(self.ratios));
        }
        if self.min_label_count == 0 {
            return Err(SplitError::MinLabelCount);
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum SplitError {
    #[error("split ratios {0:?} must be non-negative and sum to 1")]
    Ratios([f64; 3]),
    #[error("min_label_count must be at least 1")]
    MinLabelCount,
    #[error("need at least 10 trees to split, got {0}")]
    TooFewTrees(usize),
}

/// Result of [`stratified_split`].
#[derive(Clone, Debug, PartialEq)]
pub struct Split {
    pub train: Treebank,
    pub dev: Treebank,
    pub test: Treebank,
    pub swaps: usize,
    /// Required labels that could not be placed in every split.
    pub warnings: Vec<String>,
}

/// Labels of a tree, namespaced so UPOS and relation names cannot collide.
fn tree_labels(tree: &Tree) -> Vec<String> {
    let mut labels: Vec<String> = tree
        .tokens
        .iter()
        .flat_map(|t| {
            let upos = t.upos.map(|u| format!("upos:{u}"));
            let rel = t.deprel.as_ref().map(|r| format!("deprel:{r}"));
            upos.into_iter().chain(rel)
        })
        .collect();
    labels.sort();
    labels.dedup();
    labels
}

/// Random split followed by greedy swaps that restore label coverage.
///
/// Split sizes are fixed by the initial assignment, so swapping never changes
/// them. A swap is taken only if it strictly reduces the number of
/// (label, split) pairs where a required label is missing.
pub fn stratified_split(treebank: &Treebank, spec: &SplitSpec) -> Result<Split, SplitError> {
    spec.validate()?;
    let n = treebank.len();
    if n < 10 {
        return Err(SplitError::TooFewTrees(n));
    }

    // Label ids in sorted order so iteration is deterministic.
    let mut label_ids: BTreeMap<String, usize> = BTreeMap::new();
    let tree_label_ids: Vec<Vec<usize>> = treebank
        .trees
        .iter()
        .map(|tree| {
            tree_labels(tree)
                .into_iter()
                .map(|label| {
                    let next = label_ids.len();
                    *label_ids.entry(label).or_insert(next)
                })
                .collect()
        })
        .collect();
    let label_count = label_ids.len();
    let mut label_names = vec![String::new(); label_count];
    for (name, &id) in &label_ids {
        label_names[id] = name.clone();
    }

    let mut frequency = vec![0usize; label_count];
    for labels in &tree_label_ids {
        for &l in labels {
            frequency[l] += 1;
        }
    }
    let mut required: Vec<usize> = (0..label_count)
        .filter(|&l| frequency[l] >= spec.min_label_count)
        .collect();
    required.sort_by(|&a, &b| label_names[a].cmp(&label_names[b]));
    let mut is_required = vec![false; label_count];
    for &l in &required {
        is_required[l] = true;
    }

    let mut warnings = Vec::new();
    for &l in &required {
        if frequency[l] < 3 {
            warnings.push(format!(
                "label {} occurs in only {} tree(s); it cannot appear in all three splits",
                label_names[l], frequency[l]
            ));
        }
    }

    let train_size = (spec.ratios[0] * n as f64).round() as usize;
    let dev_size = ((spec.ratios[1] * n as f64).round() as usize).min(n - train_size);

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));
    let mut assignment = vec![0usize; n];
    for (pos, &tree) in order.iter().enumerate() {
        assignment[tree] = if pos < train_size {
            0
        } else if pos < train_size + dev_size {
            1
        } else {
            2
        };
    }

    // counts[split][label] = trees in split containing label
    let mut counts = vec![vec![0usize; label_count]; 3];
    for (tree, labels) in tree_label_ids.iter().enumerate() {
        for &l in labels {
            counts[assignment[tree]][l] += 1;
        }
    }

    let split_sizes = [train_size, dev_size, n - train_size - dev_size];
    let mut swaps = 0;
    while swaps < MAX_SWAPS {
        let Some((a, b)) = best_swap(
            &required,
            &is_required,
            &split_sizes,
            &assignment,
            &tree_label_ids,
            &counts,
        ) else {
            break;
        };
        let (sa, sb) = (assignment[a], assignment[b]);
        for &l in &tree_label_ids[a] {
            counts[sa][l] -= 1;
            counts[sb][l] += 1;
        }
        for &l in &tree_label_ids[b] {
            counts[sb][l] -= 1;
            counts[sa][l] += 1;
        }
        assignment.swap(a, b);
        swaps += 1;
    }

    for &l in &required {
        if frequency[l] < 3 {
            continue;
        }
        for (split, name) in ["train", "dev", "test"].iter().enumerate() {
            if split_sizes[split] > 0 && counts[split][l] == 0 {
                warnings.push(format!("label {} missing from {name} split", label_names[l]));
            }
        }
    }

    let mut parts: [Vec<Tree>; 3] = Default::default();
    for (tree, &split) in treebank.trees.iter().zip(&assignment) {
        parts[split].push(tree.clone());
    }
    let [train, dev, test] = parts;
    let name = &treebank.name;
    Ok(Split {
        train: Treebank::new(format!("{name}-train"), train),
        dev: Treebank::new(format!("{name}-dev"), dev),
        test: Treebank::new(format!("{name}-test"), test),
        swaps,
        warnings,
    })
}

/// Finds a swap that reduces coverage deficit, addressing missing
/// (label, split) pairs in label order. Returns `(moved_in, moved_out)`.
fn best_swap(
    required: &[usize],
    is_required: &[bool],
    split_sizes: &[usize; 3],
    assignment: &[usize],
    tree_labels: &[Vec<usize>],
    counts: &[Vec<usize>],
) -> Option<(usize, usize)> {
    for &label in required {
        for target in 0..3 {
            if split_sizes[target] == 0 || counts[target][label] > 0 {
                continue;
            }
            let mut best: Option<(isize, usize, usize)> = None;
            for (incoming, labels) in tree_labels.iter().enumerate() {
                let source = assignment[incoming];
                if source == target || !labels.contains(&label) {
                    continue;
                }
                for (outgoing, &split) in assignment.iter().enumerate() {
                    if split != target {
                        continue;
                    }
                    let delta = deficit_delta(
                        is_required,
                        counts,
                        source,
                        target,
                        &tree_labels[incoming],
                        &tree_labels[outgoing],
                    );
                    if delta < 0 && best.is_none_or(|(d, _, _)| delta < d) {
                        best = Some((delta, incoming, outgoing));
                    }
                }
            }
            if let Some((_, incoming, outgoing)) = best {
                return Some((incoming, outgoing));
            }
        }
    }
    None
}

/// Change in missing (label, split) pairs when `incoming` moves from
/// `source` to `target` and `outgoing` moves the other way.
fn deficit_delta(
    is_required: &[bool],
    counts: &[Vec<usize>],
    source: usize,
    target: usize,
    incoming: &[usize],
    outgoing: &[usize],
) -> isize {
    let mut delta = 0isize;
    let mut touched: Vec<usize> = incoming.iter().chain(outgoing).copied().collect();
    touched.sort_unstable();
    touched.dedup();
    for l in touched {
        if !is_required[l] {
            continue;
        }
        let moves_in = incoming.contains(&l) as isize;
        let moves_out = outgoing.contains(&l) as isize;
        let before_src = counts[source][l] as isize;
        let before_tgt = counts[target][l] as isize;
        let after_src = before_src - moves_in + moves_out;
        let after_tgt = before_tgt + moves_in - moves_out;
        let missing = |c: isize| (c == 0) as isize;
        delta += missing(after_src) + missing(after_tgt) - missing(before_src) - missing(before_tgt);
    }
    delta
}
