//! Synthetic corpora for tests, benchmarks and sanity runs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::conllu::{Token, Tree, Treebank, Upos};

/// Longest sentence the toy grammar emits.
pub const MAX_LEN: usize = 12;

/// Closed word lists of the toy grammar (under 200 forms in total).
struct Lexicon;

impl Lexicon {
    fn word(prefix: &str, count: usize, rng: &mut impl Rng) -> String {
        format!("{prefix}{}", rng.random_range(0..count))
    }
}

struct Builder {
    /// (form, upos, head node or None for ROOT, relation)
    nodes: Vec<(String, Upos, Option<usize>, &'static str)>,
}

impl Builder {
    fn push(&mut self, form: String, upos: Upos, head: Option<usize>, rel: &'static str) -> usize {
        self.nodes.push((form, upos, head, rel));
        self.nodes.len() - 1
    }

    /// Determiner and adjective are pushed before the noun, so their heads
    /// are patched once the noun's position is known.
    fn noun_phrase(&mut self, head: Option<usize>, rel: &'static str, rng: &mut impl Rng) -> usize {
        let det = rng.random_bool(0.6).then(|| self.push(Lexicon::word("the", 5, rng), Upos::Det, None, "det"));
        let adj = rng.random_bool(0.3).then(|| self.push(Lexicon::word("big", 30, rng), Upos::Adj, None, "amod"));
        let noun = self.push(Lexicon::word("dog", 60, rng), Upos::Noun, head, rel);
        for dependent in det.into_iter().chain(adj) {
            self.nodes[dependent].2 = Some(noun);
        }
        noun
    }

    fn into_tree(self) -> Tree {
        let tokens = self
            .nodes
            .into_iter()
            .enumerate()
            .map(|(i, (form, upos, head, rel))| {
                Token::new(i + 1, form)
                    .with_upos(upos)
                    .with_head(head.map_or(0, |h| h + 1), rel)
            })
            .collect();
        Tree::new(tokens)
    }
}

/// One sentence of the toy grammar.
///
/// Besides plain subject-verb-object clauses, the grammar has words
/// (`up0`..`up4`) that are ADP or PART with equal probability in the same
/// surface context `VERB up NP`. As ADP the word attaches to the noun
/// (`case`) and the noun to the verb (`obl`); as PART the word attaches to
/// the verb (`compound:prt`) and the noun is the object. Only the POS tag
/// tells the readings apart.
pub fn toy_sentence<R: Rng>(rng: &mut R) -> Tree {
    loop {
        let mut b = Builder { nodes: Vec::new() };
        let subject = if rng.random_bool(0.3) {
            Some(b.push(Lexicon::word("she", 8, rng), Upos::Pron, None, "nsubj"))
        } else {
            Some(b.noun_phrase(None, "nsubj", rng))
        };
        let aux = rng.random_bool(0.2).then(|| b.push(Lexicon::word("will", 4, rng), Upos::Aux, None, "aux"));
        let verb = b.push(Lexicon::word("runs", 40, rng), Upos::Verb, None, "root");
        for dependent in subject.into_iter().chain(aux) {
            b.nodes[dependent].2 = Some(verb);
        }
        let roll: f64 = rng.random();
        if roll < 0.4 {
            let ambiguous = b.push(Lexicon::word("up", 5, rng), Upos::Adp, None, "case");
            if rng.random_bool(0.5) {
                let noun = b.noun_phrase(Some(verb), "obl", rng);
                b.nodes[ambiguous].2 = Some(noun);
            } else {
                b.nodes[ambiguous].1 = Upos::Part;
                b.nodes[ambiguous].2 = Some(verb);
                b.nodes[ambiguous].3 = "compound:prt";
                b.noun_phrase(Some(verb), "obj", rng);
            }
        } else if roll < 0.75 {
            b.noun_phrase(Some(verb), "obj", rng);
        }
        if rng.random_bool(0.3) {
            let adp = b.push(Lexicon::word("in", 10, rng), Upos::Adp, None, "case");
            let noun = b.noun_phrase(Some(verb), "obl", rng);
            b.nodes[adp].2 = Some(noun);
        }
        if rng.random_bool(0.25) {
            b.push(Lexicon::word("fast", 15, rng), Upos::Adv, Some(verb), "advmod");
        }
        if rng.random_bool(0.8) {
            b.push(".".into(), Upos::Punct, Some(verb), "punct");
        }
        if b.nodes.len() <= MAX_LEN {
            return b.into_tree();
        }
    }
}

/// `count` toy sentences with `sent_id` comments, drawn with `seed`.
pub fn toy_treebank(name: &str, count: usize, seed: u64) -> Treebank {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let trees = (0..count)
        .map(|i| {
            let mut tree = toy_sentence(&mut rng);
            tree.set_comment("sent_id", &format!("{name}-{}", i + 1));
            tree
        })
        .collect();
    Treebank::new(name, trees)
}

/// Random projective trees with arbitrary forms and labels, for property tests.
pub fn random_projective_treebank(count: usize, max_len: usize, labels: &[&str], seed: u64) -> Treebank {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let trees = (0..count)
        .map(|_| {
            let n = rng.random_range(1..=max_len);
            let heads = random_projective_heads(n, &mut rng);
            let tokens = heads
                .iter()
                .enumerate()
                .map(|(i, &h)| {
                    let rel = if h == 0 { "root" } else { labels[rng.random_range(0..labels.len())] };
                    let upos = Upos::from_index(rng.random_range(0..Upos::COUNT)).expect("in range");
                    Token::new(i + 1, format!("w{}", rng.random_range(0..50)))
                        .with_upos(upos)
                        .with_head(h, rel)
                })
                .collect();
            Tree::new(tokens)
        })
        .collect();
    Treebank::new("random", trees)
}

/// Random single-rooted projective tree over `n` tokens. Every such tree
/// has nonzero probability, though not a uniform one. Heads are 1-based,
/// 0 = ROOT.
pub fn random_projective_heads<R: Rng>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut heads = vec![0; n];
    if n > 0 {
        let root = rng.random_range(1..=n);
        attach_span(1, root - 1, root, rng, &mut heads);
        attach_span(root + 1, n, root, rng, &mut heads);
    }
    heads
}

/// Splits `lo..=hi` into consecutive segments, each a subtree hanging off `head`.
fn attach_span<R: Rng>(mut lo: usize, hi: usize, head: usize, rng: &mut R, heads: &mut [usize]) {
    while lo <= hi && hi > 0 {
        let len = rng.random_range(1..=hi - lo + 1);
        let end = lo + len - 1;
        let root = rng.random_range(lo..=end);
        heads[root - 1] = head;
        attach_span(lo, root - 1, root, rng, heads);
        attach_span(root + 1, end, root, rng, heads);
        lo = end + 1;
    }
}
