use crate::conllu::{validate_tree, Rule, Tree};

/// Splits an annotated paragraph into one tree per connected component of
/// its head graph.
///
/// Tokens keep their surface order and are renumbered from 1. The token of
/// each component without an in-component head (unset, root or out of range)
/// is attached to the artificial root; a cyclic component is cut at its
/// smallest token. `text` comments are dropped because
/// they no longer describe the fragment; a `sent_id` gets a `-k` suffix.
pub fn extract_trees(paragraph: &Tree) -> Vec<Tree> {
    let n = paragraph.len();
    let link = |i: usize| -> Option<usize> {
        paragraph.tokens[i]
            .head
            .filter(|&h| h >= 1 && h <= n)
            .map(|h| h - 1)
    };

    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..n {
        if let Some(h) = link(i) {
            let (a, b) = (find(&mut parent, i), find(&mut parent, h));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }

    // Components ordered by their first token.
    let mut component_of = vec![usize::MAX; n];
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut seen_roots: Vec<usize> = Vec::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        let idx = match seen_roots.iter().position(|&r| r == root) {
            Some(idx) => idx,
            None => {
                seen_roots.push(root);
                members.push(Vec::new());
                seen_roots.len() - 1
            }
        };
        component_of[i] = idx;
        members[idx].push(i);
    }

    let sent_id = paragraph.comment_value("sent_id").map(str::to_owned);
    members
        .iter()
        .enumerate()
        .map(|(k, tokens)| {
            let mut new_id = vec![0; n];
            for (pos, &old) in tokens.iter().enumerate() {
                new_id[old] = pos + 1;
            }
            let tokens = tokens
                .iter()
                .map(|&old| {
                    let mut token = paragraph.tokens[old].clone();
                    token.id = new_id[old];
                    token.head = Some(match link(old) {
                        Some(h) if component_of[h] == k => new_id[h],
                        _ => 0,
                    });
                    token
                })
                .collect();
            let mut tree = Tree::new(tokens);
            break_cycle(&mut tree);
            tree.comments = paragraph
                .comments
                .iter()
                .filter(|line| {
                    !line
                        .trim_start_matches('#')
                        .split_once('=')
                        .is_some_and(|(key, _)| key.trim() == "text")
                })
                .cloned()
                .collect();
            if let Some(id) = &sent_id {
                tree.set_comment("sent_id", &format!("{id}-{}", k + 1));
            }
            tree
        })
        .collect()
}

/// A component without a root token is a single cycle; cut it at its
/// smallest token id.
fn break_cycle(tree: &mut Tree) {
    if tree.tokens.iter().any(|t| t.head == Some(0)) {
        return;
    }
    let mut visited = vec![false; tree.len() + 1];
    let mut node = 1;
    while !visited[node] {
        visited[node] = true;
        node = tree.tokens[node - 1].head.expect("component heads are set");
    }
    let mut cycle = vec![node];
    let mut next = tree.tokens[node - 1].head.expect("component heads are set");
    while next != node {
        cycle.push(next);
        next = tree.tokens[next - 1].head.expect("component heads are set");
    }
    let cut = *cycle.iter().min().expect("cycle is non-empty");
    tree.tokens[cut - 1].head = Some(0);
}

/// A tree rejected by [`filter_trees`] and the rules it violates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Discarded {
    pub tree: Tree,
    pub rules: Vec<Rule>,
}

/// Keeps exactly the trees that pass validation.
pub fn filter_trees(trees: Vec<Tree>) -> (Vec<Tree>, Vec<Discarded>) {
    let mut kept = Vec::new();
    let mut discarded = Vec::new();
    for tree in trees {
        let report = validate_tree(&tree);
        if report.is_valid() {
            kept.push(tree);
        } else {
            discarded.push(Discarded {
                rules: report.rules(),
                tree,
            });
        }
    }
    (kept, discarded)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conllu::{Token, Upos};
    use proptest::prelude::*;

    fn paragraph(heads: &[Option<usize>]) -> Tree {
        let tokens = heads
            .iter()
            .enumerate()
            .map(|(i, head)| {
                let mut t = Token::new(i + 1, format!("t{}", i + 1)).with_upos(Upos::Noun);
                if let Some(h) = head {
                    t = t.with_head(*h, if *h == 0 { "root" } else { "dep" });
                }
                t
            })
            .collect();
        Tree::new(tokens)
    }

    #[test]
    fn splits_into_components() {
        let p = paragraph(&[Some(2), Some(0), Some(0), Some(5), Some(0)]);
        let trees = extract_trees(&p);
        let sizes: Vec<usize> = trees.iter().map(Tree::len).collect();
        assert_eq!(sizes, vec![2, 1, 2]);
        assert_eq!(trees[2].forms(), vec!["t4", "t5"]);
        assert_eq!(trees[2].heads(), vec![Some(2), Some(0)]);
    }

    #[test]
    fn connected_tree_is_kept_whole() {
        let p = paragraph(&[Some(2), Some(0), Some(2), Some(3)]);
        let trees = extract_trees(&p);
        assert_eq!(trees.len(), 1);
        assert_eq!(trees[0].tokens, p.tokens);
    }

    #[test]
    fn unset_heads_give_singletons() {
        let trees = extract_trees(&paragraph(&[None, None, None]));
        assert_eq!(trees.len(), 3);
        assert!(trees.iter().all(|t| t.len() == 1 && t.tokens[0].head == Some(0)));
    }

    #[test]
    fn cyclic_component_is_cut() {
        let trees = extract_trees(&paragraph(&[Some(3), Some(1), Some(2)]));
        assert_eq!(trees.len(), 1);
        assert_eq!(trees[0].heads(), vec![Some(0), Some(1), Some(2)]);
    }

    #[test]
    fn sent_id_is_suffixed_and_text_dropped() {
        let mut p = paragraph(&[Some(0), Some(0)]);
        p.comments = vec!["# sent_id = p7".into(), "# text = t1 t2".into()];
        let trees = extract_trees(&p);
        assert_eq!(trees[1].comments, vec!["# sent_id = p7-2".to_owned()]);
    }

    #[test]
    fn filter_reports_rules() {
        let valid = Tree::from_heads(&[2, 0], &["nsubj", "root"]);
        let single = Tree::from_heads(&[0], &["root"]);
        let mut unlabeled = Tree::from_heads(&[2, 0], &["nsubj", "root"]);
        unlabeled.tokens[0].deprel = None;

        let (kept, discarded) = filter_trees(vec![valid.clone(), single]);
        assert_eq!(kept, vec![valid.clone()]);
        assert_eq!(discarded[0].rules, vec![Rule::MultipleTokens]);

        let (kept, discarded) = filter_trees(vec![valid.clone(), valid.clone()]);
        assert_eq!(kept.len(), 2);
        assert!(discarded.is_empty());

        let (_, discarded) = filter_trees(vec![unlabeled]);
        assert_eq!(discarded[0].rules, vec![Rule::FullyLabeled]);
    }

    proptest! {
        #[test]
        fn extraction_partitions_tokens(heads in prop::collection::vec(prop::option::of(0usize..12), 1..12)) {
            let p = paragraph(&heads.iter().enumerate()
                .map(|(i, h)| h.filter(|&h| h != i + 1))
                .collect::<Vec<_>>());
            let trees = extract_trees(&p);
            prop_assert_eq!(trees.iter().map(Tree::len).sum::<usize>(), p.len());
            for tree in &trees {
                let report = validate_tree(tree);
                prop_assert!(!report.violates(Rule::HeadInRange));
                prop_assert!(!report.violates(Rule::Acyclic));
                prop_assert!(!report.violates(Rule::SingleRoot));
            }
        }
    }
}
