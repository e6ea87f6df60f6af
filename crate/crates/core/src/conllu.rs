//! Reading, writing and validating dependency trees in CoNLL-U format.
//!
//! Only basic dependencies are modelled. Multiword-token ranges (`1-2`) and
//! empty nodes (`3.1`) are skipped while reading; every skipped line is
//! reported as a [`Warning`].

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// The 17 Universal POS tags, in canonical (alphabetical) order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Upos {
    Adj,
    Adp,
    Adv,
    Aux,
    Cconj,
    Det,
    Intj,
    Noun,
    Num,
    Part,
    Pron,
    Propn,
    Punct,
    Sconj,
    Sym,
    Verb,
    X,
}

impl Upos {
    pub const COUNT: usize = 17;

    pub const ALL: [Upos; Upos::COUNT] = [
        Upos::Adj,
        Upos::Adp,
        Upos::Adv,
        Upos::Aux,
        Upos::Cconj,
        Upos::Det,
        Upos::Intj,
        Upos::Noun,
        Upos::Num,
        Upos::Part,
        Upos::Pron,
        Upos::Propn,
        Upos::Punct,
        Upos::Sconj,
        Upos::Sym,
        Upos::Verb,
        Upos::X,
    ];

    /// Position in the canonical ordering.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Upos> {
        Upos::ALL.get(index).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Upos::Adj => "ADJ",
            Upos::Adp => "ADP",
            Upos::Adv => "ADV",
            Upos::Aux => "AUX",
            Upos::Cconj => "CCONJ",
            Upos::Det => "DET",
            Upos::Intj => "INTJ",
            Upos::Noun => "NOUN",
            Upos::Num => "NUM",
            Upos::Part => "PART",
            Upos::Pron => "PRON",
            Upos::Propn => "PROPN",
            Upos::Punct => "PUNCT",
            Upos::Sconj => "SCONJ",
            Upos::Sym => "SYM",
            Upos::Verb => "VERB",
            Upos::X => "X",
        }
    }
}

impl fmt::Display for Upos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("unknown UPOS tag {0:?}")]
pub struct UnknownUpos(pub String);

impl FromStr for Upos {
    type Err = UnknownUpos;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Upos::ALL
            .iter()
            .copied()
            .find(|tag| tag.as_str() == s)
            .ok_or_else(|| UnknownUpos(s.to_owned()))
    }
}

/// A single (syntactic) word of a sentence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    /// 1-based position in the sentence.
    pub id: usize,
    pub form: String,
    pub lemma: Option<String>,
    pub upos: Option<Upos>,
    pub xpos: Option<String>,
    pub feats: Option<String>,
    /// Head token id, `0` is the artificial root.
    pub head: Option<usize>,
    pub deprel: Option<String>,
    pub deps: Option<String>,
    pub misc: Option<String>,
}

impl Token {
    pub fn new(id: usize, form: impl Into<String>) -> Self {
        Token {
            id,
            form: form.into(),
            lemma: None,
            upos: None,
            xpos: None,
            feats: None,
            head: None,
            deprel: None,
            deps: None,
            misc: None,
        }
    }

    pub fn with_upos(mut self, upos: Upos) -> Self {
        self.upos = Some(upos);
        self
    }

    pub fn with_head(mut self, head: usize, deprel: impl Into<String>) -> Self {
        self.head = Some(head);
        self.deprel = Some(deprel.into());
        self
    }
}

/// A sentence: ordered tokens plus the comment lines preceding them.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Tree {
    pub tokens: Vec<Token>,
    /// Comment lines, verbatim and including the leading `#`.
    pub comments: Vec<String>,
}

impl Tree {
    pub fn new(tokens: Vec<Token>) -> Self {
        Tree {
            tokens,
            comments: Vec::new(),
        }
    }

    /// Builds a fully labelled tree from 1-based head indices.
    ///
    /// Forms are `w1..wn` and every token is tagged `X`; meant for tests and
    /// synthetic data where only the structure matters.
    pub fn from_heads(heads: &[usize], deprels: &[&str]) -> Self {
        assert_eq!(heads.len(), deprels.len(), "heads and deprels differ in length");
        let tokens = heads
            .iter()
            .zip(deprels)
            .enumerate()
            .map(|(i, (&head, &rel))| {
                Token::new(i + 1, format!("w{}", i + 1))
                    .with_upos(Upos::X)
                    .with_head(head, rel)
            })
            .collect();
        Tree::new(tokens)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn forms(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.form.as_str()).collect()
    }

    pub fn heads(&self) -> Vec<Option<usize>> {
        self.tokens.iter().map(|t| t.head).collect()
    }

    /// UPOS tags, or `None` if any token is untagged.
    pub fn upos(&self) -> Option<Vec<Upos>> {
        self.tokens.iter().map(|t| t.upos).collect()
    }

    /// Copy of the tree with heads and relations removed.
    pub fn without_heads(&self) -> Tree {
        let mut tree = self.clone();
        for token in &mut tree.tokens {
            token.head = None;
            token.deprel = None;
        }
        tree
    }

    /// Value of a `# key = value` comment, if present.
    pub fn comment_value(&self, key: &str) -> Option<&str> {
        self.comments.iter().find_map(|line| {
            let (k, v) = line.trim_start_matches('#').split_once('=')?;
            (k.trim() == key).then(|| v.trim())
        })
    }

    /// Sets (or replaces) a `# key = value` comment.
    pub fn set_comment(&mut self, key: &str, value: &str) {
        let line = format!("# {key} = {value}");
        match self.comments.iter().position(|l| {
            l.trim_start_matches('#')
                .split_once('=')
                .is_some_and(|(k, _)| k.trim() == key)
        }) {
            Some(pos) => self.comments[pos] = line,
            None => self.comments.push(line),
        }
    }
}

/// A named, ordered collection of trees.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Treebank {
    pub name: String,
    pub trees: Vec<Tree>,
}

impl Treebank {
    pub fn new(name: impl Into<String>, trees: Vec<Tree>) -> Self {
        Treebank {
            name: name.into(),
            trees,
        }
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    pub fn token_count(&self) -> usize {
        self.trees.iter().map(Tree::len).sum()
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ConlluError {
    #[error("line {line}: expected 10 tab-separated fields, found {found}")]
    FieldCount { line: usize, found: usize },
    #[error("line {line}: invalid {field} {value:?}")]
    InvalidField {
        line: usize,
        field: &'static str,
        value: String,
    },
    #[error("line {line}: expected token id {expected}, found {found}")]
    IdSequence {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: token {id} is its own head")]
    SelfLoop { line: usize, id: usize },
    #[error("line {line}: relation given without a head")]
    RelationWithoutHead { line: usize },
}

/// A line that was read but not represented in the output.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Warning {
    pub line: usize,
    pub message: String,
}

/// Parses CoNLL-U text, discarding warnings.
pub fn parse_conllu(text: &str) -> Result<Treebank, ConlluError> {
    parse_conllu_with_warnings(text).map(|(treebank, _)| treebank)
}

/// Parses CoNLL-U text and returns the warnings for skipped lines.
pub fn parse_conllu_with_warnings(text: &str) -> Result<(Treebank, Vec<Warning>), ConlluError> {
    let mut trees = Vec::new();
    let mut warnings = Vec::new();
    let mut current = Tree::default();
    let mut block_start = 1;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);

        if line.trim().is_empty() {
            finish_block(&mut current, &mut trees, &mut warnings, block_start);
            block_start = line_no + 1;
            continue;
        }

        if line.starts_with('#') {
            current.comments.push(line.to_owned());
            continue;
        }

        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 10 {
            return Err(ConlluError::FieldCount {
                line: line_no,
                found: fields.len(),
            });
        }

        if fields[0].contains('-') || fields[0].contains('.') {
            warnings.push(Warning {
                line: line_no,
                message: format!("skipped multiword token or empty node {:?}", fields[0]),
            });
            continue;
        }

        let token = parse_token(&fields, line_no)?;
        let expected = current.tokens.len() + 1;
        if token.id != expected {
            return Err(ConlluError::IdSequence {
                line: line_no,
                expected,
                found: token.id,
            });
        }
        current.tokens.push(token);
    }
    finish_block(&mut current, &mut trees, &mut warnings, block_start);

    Ok((Treebank::new("", trees), warnings))
}

fn finish_block(current: &mut Tree, trees: &mut Vec<Tree>, warnings: &mut Vec<Warning>, start: usize) {
    let block = std::mem::take(current);
    if !block.tokens.is_empty() {
        trees.push(block);
    } else if !block.comments.is_empty() {
        warnings.push(Warning {
            line: start,
            message: "dropped comment block without tokens".to_owned(),
        });
    }
}

fn optional(field: &str) -> Option<String> {
    (field != "_").then(|| field.to_owned())
}

fn parse_token(fields: &[&str], line: usize) -> Result<Token, ConlluError> {
    let invalid = |field: &'static str, value: &str| ConlluError::InvalidField {
        line,
        field,
        value: value.to_owned(),
    };

    let id: usize = fields[0].parse().map_err(|_| invalid("id", fields[0]))?;
    if id == 0 {
        return Err(invalid("id", fields[0]));
    }

    let upos = match fields[3] {
        "_" => None,
        tag => Some(tag.parse::<Upos>().map_err(|_| invalid("upos", tag))?),
    };

    let head = match fields[6] {
        "_" => None,
        h => Some(h.parse::<usize>().map_err(|_| invalid("head", h))?),
    };
    if head == Some(id) {
        return Err(ConlluError::SelfLoop { line, id });
    }

    let deprel = optional(fields[7]);
    if deprel.is_some() && head.is_none() {
        return Err(ConlluError::RelationWithoutHead { line });
    }

    Ok(Token {
        id,
        form: fields[1].to_owned(),
        lemma: optional(fields[2]),
        upos,
        xpos: optional(fields[4]),
        feats: optional(fields[5]),
        head,
        deprel,
        deps: optional(fields[8]),
        misc: optional(fields[9]),
    })
}

/// Writes a treebank as CoNLL-U. Inverse of [`parse_conllu`].
pub fn serialize_conllu(treebank: &Treebank) -> String {
    let mut out = String::new();
    for tree in &treebank.trees {
        write_tree(&mut out, tree);
    }
    out
}

fn write_tree(out: &mut String, tree: &Tree) {
    fn field(value: &Option<String>) -> &str {
        value.as_deref().unwrap_or("_")
    }

    for comment in &tree.comments {
        out.push_str(comment);
        out.push('\n');
    }
    for token in &tree.tokens {
        let head = token.head.map(|h| h.to_string());
        let upos = token.upos.map(Upos::as_str).unwrap_or("_");
        let columns = [
            token.id.to_string().as_str(),
            token.form.as_str(),
            field(&token.lemma),
            upos,
            field(&token.xpos),
            field(&token.feats),
            head.as_deref().unwrap_or("_"),
            field(&token.deprel),
            field(&token.deps),
            field(&token.misc),
        ]
        .join("\t");
        out.push_str(&columns);
        out.push('\n');
    }
    out.push('\n');
}

/// Tree well-formedness rules, checked in this order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    /// More than one token.
    MultipleTokens,
    /// Every token carries a UPOS tag, head and relation.
    FullyLabeled,
    /// Exactly one token is attached to the root.
    SingleRoot,
    /// Heads point inside the sentence.
    HeadInRange,
    /// Following heads from any token reaches the root.
    Acyclic,
}

impl Rule {
    pub fn id(self) -> &'static str {
        match self {
            Rule::MultipleTokens => "R1",
            Rule::FullyLabeled => "R2",
            Rule::SingleRoot => "R3",
            Rule::HeadInRange => "R4",
            Rule::Acyclic => "R5",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub rule: Rule,
    pub token: Option<usize>,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violates(&self, rule: Rule) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }

    /// Distinct violated rules, in rule order.
    pub fn rules(&self) -> Vec<Rule> {
        let mut rules: Vec<Rule> = self.violations.iter().map(|v| v.rule).collect();
        rules.sort();
        rules.dedup();
        rules
    }
}

/// Checks every rule and reports all violations.
pub fn validate_tree(tree: &Tree) -> ValidationReport {
    let mut violations = Vec::new();
    let n = tree.len();
    let mut push = |rule, token, message: String| violations.push(Violation { rule, token, message });

    if n <= 1 {
        push(Rule::MultipleTokens, None, format!("tree has {n} token(s)"));
    }

    for token in &tree.tokens {
        let missing: Vec<&str> = [
            ("upos", token.upos.is_none()),
            ("head", token.head.is_none()),
            ("deprel", token.deprel.is_none()),
        ]
        .into_iter()
        .filter_map(|(name, absent)| absent.then_some(name))
        .collect();
        if !missing.is_empty() {
            push(
                Rule::FullyLabeled,
                Some(token.id),
                format!("missing {}", missing.join(", ")),
            );
        }
    }

    let roots = tree.tokens.iter().filter(|t| t.head == Some(0)).count();
    if roots != 1 {
        push(Rule::SingleRoot, None, format!("{roots} tokens attached to the root"));
    }

    for token in &tree.tokens {
        if let Some(head) = token.head {
            if head > n {
                push(
                    Rule::HeadInRange,
                    Some(token.id),
                    format!("head {head} outside 0..={n}"),
                );
            }
        }
    }

    for cycle in find_cycles(tree) {
        let members: Vec<String> = cycle.iter().map(usize::to_string).collect();
        push(
            Rule::Acyclic,
            cycle.first().copied(),
            format!("cycle through tokens {}", members.join(" ")),
        );
    }

    ValidationReport { violations }
}

/// Every cycle in the head graph, each as its sorted token ids.
fn find_cycles(tree: &Tree) -> Vec<Vec<usize>> {
    let n = tree.len();
    let head_of = |id: usize| tree.tokens[id - 1].head.filter(|&h| (1..=n).contains(&h));

    // 0 = unvisited, 1 = on current path, 2 = done
    let mut state = vec![0u8; n + 1];
    let mut cycles = Vec::new();
    for start in 1..=n {
        let mut path = Vec::new();
        let mut current = Some(start);
        while let Some(id) = current {
            match state[id] {
                2 => break,
                1 => {
                    let pos = path.iter().position(|&p| p == id).expect("id on path");
                    let mut cycle = path[pos..].to_vec();
                    cycle.sort_unstable();
                    cycles.push(cycle);
                    break;
                }
                _ => {
                    state[id] = 1;
                    path.push(id);
                    current = head_of(id);
                }
            }
        }
        for id in path {
            state[id] = 2;
        }
    }
    cycles
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("tree is not a valid dependency tree (violates {rules})")]
pub struct InvalidTree {
    pub rules: String,
}

/// Whether no two arcs cross, with the root arc anchored at position 0.
pub fn is_projective(tree: &Tree) -> Result<bool, InvalidTree> {
    // Only the structural rules matter here; missing tags or labels do not.
    let mut broken: Vec<Rule> = validate_tree(tree)
        .rules()
        .into_iter()
        .filter(|r| matches!(r, Rule::SingleRoot | Rule::HeadInRange | Rule::Acyclic))
        .collect();
    if tree.tokens.iter().any(|t| t.head.is_none()) {
        broken.insert(0, Rule::FullyLabeled);
    }
    if !broken.is_empty() {
        let rules: Vec<&str> = broken.iter().map(|r| r.id()).collect();
        return Err(InvalidTree {
            rules: rules.join(", "),
        });
    }
    let heads: Vec<usize> = tree.tokens.iter().map(|t| t.head.unwrap_or(0)).collect();
    Ok(heads_are_projective(&heads))
}

/// Projectivity of a well-formed head vector (`heads[i]` is the head of token i+1).
pub fn heads_are_projective(heads: &[usize]) -> bool {
    let n = heads.len();
    let dominated = |ancestor: usize, mut node: usize| -> bool {
        let mut steps = 0;
        while node != 0 && steps <= n {
            node = heads[node - 1];
            if node == ancestor {
                return true;
            }
            steps += 1;
        }
        ancestor == 0
    };
    heads.iter().enumerate().all(|(i, &head)| {
        let dep = i + 1;
        let (lo, hi) = if head < dep { (head, dep) } else { (dep, head) };
        (lo + 1..hi).all(|between| dominated(head, between))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_tokens() -> &'static str {
        "# sent_id = 1\n# text = I eat rice\n\
         1\tI\t_\tPRON\t_\t_\t2\tnsubj\t_\t_\n\
         2\teat\t_\tVERB\t_\t_\t0\troot\t_\t_\n\
         3\trice\t_\tNOUN\t_\t_\t2\tobj\t_\t_\n\n"
    }

    #[test]
    fn minimal_sentence() {
        let tb = parse_conllu("1\tกิน\t_\tVERB\t_\t_\t0\troot\t_\t_\n\n").unwrap();
        assert_eq!(tb.len(), 1);
        let tok = &tb.trees[0].tokens[0];
        assert_eq!(tb.trees[0].len(), 1);
        assert_eq!(tok.form, "กิน");
        assert_eq!(tok.head, Some(0));
        assert_eq!(tok.deprel.as_deref(), Some("root"));
    }

    #[test]
    fn empty_input() {
        assert!(parse_conllu("").unwrap().is_empty());
        assert!(parse_conllu("\n\n").unwrap().is_empty());
    }

    #[test]
    fn three_token_round_trip_is_byte_identical() {
        let text = three_tokens();
        let tb = parse_conllu(text).unwrap();
        assert_eq!(serialize_conllu(&tb), text);
        assert_eq!(tb.trees[0].comment_value("text"), Some("I eat rice"));
    }

    #[test]
    fn missing_trailing_blank_line_still_closes_sentence() {
        let tb = parse_conllu("1\ta\t_\t_\t_\t_\t0\troot\t_\t_").unwrap();
        assert_eq!(tb.len(), 1);
    }

    #[test]
    fn skips_multiword_and_empty_nodes_with_warnings() {
        let text = "1-2\tdel\t_\t_\t_\t_\t_\t_\t_\t_\n\
                    1\tde\t_\tADP\t_\t_\t2\tcase\t_\t_\n\
                    2\tel\t_\tDET\t_\t_\t0\troot\t_\t_\n\
                    2.1\tx\t_\t_\t_\t_\t_\t_\t_\t_\n\n";
        let (tb, warnings) = parse_conllu_with_warnings(text).unwrap();
        assert_eq!(tb.trees[0].len(), 2);
        assert_eq!(warnings.len(), 2);
        assert_eq!(warnings[0].line, 1);
        assert_eq!(warnings[1].line, 4);
    }

    #[test]
    fn wrong_field_count_names_line() {
        let err = parse_conllu("1\ta\t_\n").unwrap_err();
        assert_eq!(err, ConlluError::FieldCount { line: 1, found: 3 });
    }

    #[test]
    fn non_numeric_head_is_rejected() {
        let err = parse_conllu("1\ta\t_\t_\t_\t_\tx\t_\t_\t_\n").unwrap_err();
        assert!(matches!(err, ConlluError::InvalidField { line: 1, field: "head", .. }));
    }

    #[test]
    fn duplicate_and_gapped_ids_are_rejected() {
        let dup = "1\ta\t_\t_\t_\t_\t0\troot\t_\t_\n1\tb\t_\t_\t_\t_\t0\tdep\t_\t_\n";
        assert!(matches!(
            parse_conllu(dup).unwrap_err(),
            ConlluError::IdSequence { line: 2, expected: 2, found: 1 }
        ));
        let gap = "1\ta\t_\t_\t_\t_\t0\troot\t_\t_\n3\tb\t_\t_\t_\t_\t1\tdep\t_\t_\n";
        assert!(matches!(
            parse_conllu(gap).unwrap_err(),
            ConlluError::IdSequence { line: 2, expected: 2, found: 3 }
        ));
    }

    #[test]
    fn unknown_upos_is_rejected() {
        let err = parse_conllu("1\ta\t_\tNN\t_\t_\t0\troot\t_\t_\n").unwrap_err();
        assert!(matches!(err, ConlluError::InvalidField { field: "upos", .. }));
    }

    #[test]
    fn serialize_empty_and_single_token() {
        assert_eq!(serialize_conllu(&Treebank::default()), "");
        let tree = Tree::new(vec![Token::new(1, "a")]);
        let out = serialize_conllu(&Treebank::new("t", vec![tree]));
        assert_eq!(out, "1\ta\t_\t_\t_\t_\t_\t_\t_\t_\n\n");
    }

    #[test]
    fn single_token_violates_r1() {
        let tree = Tree::from_heads(&[0], &["root"]);
        let report = validate_tree(&tree);
        assert!(!report.is_valid());
        assert_eq!(report.rules(), vec![Rule::MultipleTokens]);
    }

    #[test]
    fn chain_tree_is_valid() {
        let tree = Tree::from_heads(&[2, 0, 2], &["nsubj", "root", "obj"]);
        assert!(validate_tree(&tree).is_valid());
    }

    #[test]
    fn two_cycle_violates_r3_and_r5() {
        let tree = Tree::from_heads(&[2, 1], &["dep", "dep"]);
        let report = validate_tree(&tree);
        assert_eq!(report.rules(), vec![Rule::SingleRoot, Rule::Acyclic]);
    }

    #[test]
    fn accumulates_unlabeled_and_out_of_range() {
        let mut tree = Tree::from_heads(&[0, 7, 1], &["root", "dep", "dep"]);
        tree.tokens[2].upos = None;
        let report = validate_tree(&tree);
        assert_eq!(report.rules(), vec![Rule::FullyLabeled, Rule::HeadInRange]);
        let r4 = report.violations.iter().find(|v| v.rule == Rule::HeadInRange).unwrap();
        assert_eq!(r4.token, Some(2));
    }

    #[test]
    fn projectivity_examples() {
        let proj = |heads: &[usize]| {
            let rels = vec!["dep"; heads.len()];
            is_projective(&Tree::from_heads(heads, &rels)).unwrap()
        };
        assert!(proj(&[2, 0, 2]));
        assert!(!proj(&[3, 4, 0, 3]));
        assert!(proj(&[0, 1, 2, 3]));
    }

    #[test]
    fn projectivity_requires_valid_tree() {
        let tree = Tree::from_heads(&[2, 1], &["dep", "dep"]);
        assert!(is_projective(&tree).is_err());
    }

    #[test]
    fn set_comment_replaces_existing() {
        let mut tree = Tree::default();
        tree.set_comment("upos_source", "gold");
        tree.set_comment("upos_source", "auto");
        assert_eq!(tree.comments, vec!["# upos_source = auto".to_owned()]);
    }
}
