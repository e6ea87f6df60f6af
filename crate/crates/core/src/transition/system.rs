use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::conllu::{is_projective, InvalidTree, Tree};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SystemKind {
    ArcStandard,
    ArcEager,
}

impl SystemKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SystemKind::ArcStandard => "arc-standard",
            SystemKind::ArcEager => "arc-eager",
        }
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SystemKind {
    type Err = TransitionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "arc-standard" | "standard" => Ok(SystemKind::ArcStandard),
            "arc-eager" | "eager" => Ok(SystemKind::ArcEager),
            other => Err(TransitionError::UnknownSystem(other.to_owned())),
        }
    }
}

/// Canonical order; also the tie-breaking order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TransitionKind {
    Shift,
    LeftArc,
    RightArc,
    Reduce,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Transition {
    pub kind: TransitionKind,
    /// Present exactly for arc transitions.
    pub label: Option<String>,
}

impl Transition {
    pub fn shift() -> Self {
        Transition {
            kind: TransitionKind::Shift,
            label: None,
        }
    }

    pub fn reduce() -> Self {
        Transition {
            kind: TransitionKind::Reduce,
            label: None,
        }
    }

    pub fn left(label: &str) -> Self {
        Transition {
            kind: TransitionKind::LeftArc,
            label: Some(label.to_owned()),
        }
    }

    pub fn right(label: &str) -> Self {
        Transition {
            kind: TransitionKind::RightArc,
            label: Some(label.to_owned()),
        }
    }
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.kind {
            TransitionKind::Shift => "SHIFT",
            TransitionKind::LeftArc => "LEFT_ARC",
            TransitionKind::RightArc => "RIGHT_ARC",
            TransitionKind::Reduce => "REDUCE",
        };
        match &self.label {
            Some(label) => write!(f, "{name}({label})"),
            None => f.write_str(name),
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum TransitionError {
    #[error("{transition} is not legal for {system} in this state")]
    Illegal { transition: String, system: SystemKind },
    #[error("tree is not projective")]
    NonProjective,
    #[error(transparent)]
    InvalidTree(#[from] InvalidTree),
    #[error("unknown transition system {0:?}")]
    UnknownSystem(String),
}

/// Stack/buffer configuration. Token 0 is ROOT.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParserState {
    stack: Vec<usize>,
    /// The buffer is always the suffix `next..=n` of the sentence.
    next: usize,
    n: usize,
    heads: Vec<Option<usize>>,
    labels: Vec<Option<String>>,
    history: Vec<Transition>,
}

impl ParserState {
    pub fn initial(n: usize) -> Self {
        ParserState {
            stack: vec![0],
            next: 1,
            n,
            heads: vec![None; n + 1],
            labels: vec![None; n + 1],
            history: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Bottom to top.
    pub fn stack(&self) -> &[usize] {
        &self.stack
    }

    pub fn buffer(&self) -> std::ops::RangeInclusive<usize> {
        self.next..=self.n
    }

    pub fn buffer_front(&self) -> Option<usize> {
        (self.next <= self.n).then_some(self.next)
    }

    fn buffer_at(&self, offset: usize) -> Option<usize> {
        let id = self.next + offset;
        (id <= self.n).then_some(id)
    }

    fn stack_at(&self, depth: usize) -> Option<usize> {
        self.stack.len().checked_sub(depth + 1).map(|i| self.stack[i])
    }

    pub fn head(&self, dependent: usize) -> Option<usize> {
        self.heads.get(dependent).copied().flatten()
    }

    pub fn label(&self, dependent: usize) -> Option<&str> {
        self.labels.get(dependent).and_then(|l| l.as_deref())
    }

    pub fn is_attached(&self, token: usize) -> bool {
        self.head(token).is_some()
    }

    /// (head, dependent, label) in dependent order.
    pub fn arcs(&self) -> Vec<(usize, usize, &str)> {
        (1..=self.n)
            .filter_map(|d| Some((self.heads[d]?, d, self.labels[d].as_deref()?)))
            .collect()
    }

    pub fn history(&self) -> &[Transition] {
        &self.history
    }

    fn attach(&mut self, head: usize, dependent: usize, label: &str) {
        self.heads[dependent] = Some(head);
        self.labels[dependent] = Some(label.to_owned());
    }
}

/// Transition kinds allowed in `state`; empty when the state is terminal.
pub fn legal_transitions(state: &ParserState, sys: SystemKind) -> Vec<TransitionKind> {
    let mut legal = Vec::with_capacity(4);
    let buffer = state.buffer_front().is_some();
    let top = state.stack_at(0);
    let second = state.stack_at(1);
    if buffer {
        legal.push(TransitionKind::Shift);
    }
    match sys {
        SystemKind::ArcStandard => {
            if let Some(second) = second {
                if second != 0 {
                    legal.push(TransitionKind::LeftArc);
                }
                legal.push(TransitionKind::RightArc);
            }
        }
        SystemKind::ArcEager => {
            let top = top.expect("arc-eager never empties the stack");
            if top != 0 && !state.is_attached(top) && buffer {
                legal.push(TransitionKind::LeftArc);
            }
            if buffer {
                legal.push(TransitionKind::RightArc);
            }
            if top != 0 && state.is_attached(top) {
                legal.push(TransitionKind::Reduce);
            }
        }
    }
    legal
}

pub fn apply_transition(state: &ParserState, t: &Transition, sys: SystemKind) -> Result<ParserState, TransitionError> {
    let mut next = state.clone();
    apply_in_place(&mut next, t, sys)?;
    Ok(next)
}

pub(crate) fn apply_in_place(state: &mut ParserState, t: &Transition, sys: SystemKind) -> Result<(), TransitionError> {
    let arc_label_ok = matches!(t.kind, TransitionKind::LeftArc | TransitionKind::RightArc) == t.label.is_some();
    if !arc_label_ok || !legal_transitions(state, sys).contains(&t.kind) {
        return Err(TransitionError::Illegal {
            transition: t.to_string(),
            system: sys,
        });
    }
    let label = t.label.as_deref().unwrap_or_default();
    match (sys, t.kind) {
        (_, TransitionKind::Shift) => {
            state.stack.push(state.next);
            state.next += 1;
        }
        (SystemKind::ArcStandard, TransitionKind::LeftArc) => {
            let top = state.stack.pop().expect("legal");
            let second = state.stack.pop().expect("legal");
            state.attach(top, second, label);
            state.stack.push(top);
        }
        (SystemKind::ArcStandard, TransitionKind::RightArc) => {
            let top = state.stack.pop().expect("legal");
            let second = *state.stack.last().expect("legal");
            state.attach(second, top, label);
        }
        (SystemKind::ArcEager, TransitionKind::LeftArc) => {
            let top = state.stack.pop().expect("legal");
            state.attach(state.next, top, label);
        }
        (SystemKind::ArcEager, TransitionKind::RightArc) => {
            let top = *state.stack.last().expect("legal");
            state.attach(top, state.next, label);
            state.stack.push(state.next);
            state.next += 1;
        }
        (SystemKind::ArcEager, TransitionKind::Reduce) => {
            state.stack.pop();
        }
        (SystemKind::ArcStandard, TransitionKind::Reduce) => unreachable!("never legal"),
    }
    state.history.push(t.clone());
    Ok(())
}

/// True once no further transition can add an arc.
///
/// An arc-eager state with an empty buffer only admits REDUCE, which never
/// changes the arc set, so it counts as finished.
pub fn is_finished(state: &ParserState, sys: SystemKind) -> bool {
    match sys {
        SystemKind::ArcStandard => legal_transitions(state, sys).is_empty(),
        SystemKind::ArcEager => state.buffer_front().is_none(),
    }
}

/// Tokens whose features the oracle network sees; `None` marks an empty slot.
pub fn feature_token_indices(state: &ParserState, sys: SystemKind) -> [Option<usize>; 3] {
    match sys {
        SystemKind::ArcStandard => [state.stack_at(1), state.stack_at(0), state.buffer_at(0)],
        SystemKind::ArcEager => [state.stack_at(0), state.buffer_at(0), state.buffer_at(1)],
    }
}

/// Canonical transition sequence that rebuilds `gold`.
pub fn static_oracle(gold: &Tree, sys: SystemKind) -> Result<Vec<Transition>, TransitionError> {
    if !is_projective(gold)? {
        return Err(TransitionError::NonProjective);
    }
    let n = gold.len();
    let mut heads = vec![0usize; n + 1];
    let mut labels = vec![""; n + 1];
    for token in &gold.tokens {
        heads[token.id] = token.head.expect("validated");
        labels[token.id] = token.deprel.as_deref().unwrap_or("_");
    }
    let mut pending = vec![0usize; n + 1];
    for &h in &heads[1..] {
        pending[h] += 1;
    }

    let mut state = ParserState::initial(n);
    while !is_finished(&state, sys) {
        let t = next_oracle_transition(&state, sys, &heads, &labels, &pending)
            .ok_or(TransitionError::NonProjective)?;
        if let Some(d) = match (sys, t.kind) {
            (SystemKind::ArcStandard, TransitionKind::LeftArc) => state.stack_at(1),
            (SystemKind::ArcStandard, TransitionKind::RightArc) => state.stack_at(0),
            (SystemKind::ArcEager, TransitionKind::LeftArc) => state.stack_at(0),
            (SystemKind::ArcEager, TransitionKind::RightArc) => state.buffer_front(),
            _ => None,
        } {
            pending[heads[d]] -= 1;
        }
        apply_in_place(&mut state, &t, sys)?;
    }
    if (1..=n).any(|d| state.head(d) != Some(heads[d])) {
        return Err(TransitionError::NonProjective);
    }
    Ok(state.history)
}

fn next_oracle_transition(
    state: &ParserState,
    sys: SystemKind,
    heads: &[usize],
    labels: &[&str],
    pending: &[usize],
) -> Option<Transition> {
    let top = state.stack_at(0);
    let second = state.stack_at(1);
    let front = state.buffer_front();
    match sys {
        SystemKind::ArcStandard => {
            if let (Some(s0), Some(s1)) = (top, second) {
                if s1 != 0 && heads[s1] == s0 {
                    return Some(Transition::left(labels[s1]));
                }
                if heads[s0] == s1 && pending[s0] == 0 {
                    return Some(Transition::right(labels[s0]));
                }
            }
        }
        SystemKind::ArcEager => {
            let s0 = top?;
            if let Some(b) = front {
                if s0 != 0 && heads[s0] == b {
                    return Some(Transition::left(labels[s0]));
                }
                if heads[b] == s0 {
                    return Some(Transition::right(labels[b]));
                }
            }
            let waiting = state.buffer().any(|b| heads[b] == s0);
            if s0 != 0 && state.is_attached(s0) && !waiting && pending[s0] == 0 {
                return Some(Transition::reduce());
            }
        }
    }
    front.map(|_| Transition::shift())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conllu::heads_are_projective;
    use crate::synthetic::random_projective_heads;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn replay(n: usize, seq: &[Transition], sys: SystemKind) -> ParserState {
        let mut state = ParserState::initial(n);
        for t in seq {
            state = apply_transition(&state, t, sys).unwrap();
        }
        state
    }

    fn eat_rice() -> Tree {
        Tree::from_heads(&[2, 0, 2], &["nsubj", "root", "obj"])
    }

    #[test]
    fn initial_state_only_shifts() {
        let s = ParserState::initial(3);
        assert_eq!(legal_transitions(&s, SystemKind::ArcStandard), vec![TransitionKind::Shift]);
    }

    #[test]
    fn arc_eager_legality_table() {
        let seq = [Transition::shift(), Transition::left("a"), Transition::right("root")];
        let s = replay(3, &seq, SystemKind::ArcEager);
        assert_eq!(s.stack(), &[0, 2]);
        assert_eq!(s.buffer(), 3..=3);
        assert_eq!(
            legal_transitions(&s, SystemKind::ArcEager),
            vec![TransitionKind::Shift, TransitionKind::RightArc, TransitionKind::Reduce]
        );
    }

    #[test]
    fn terminal_state_has_no_transitions() {
        let s = ParserState::initial(0);
        assert!(legal_transitions(&s, SystemKind::ArcStandard).is_empty());
        assert!(legal_transitions(&s, SystemKind::ArcEager).is_empty());
    }

    #[test]
    fn hand_simulated_arc_standard() {
        let seq = [
            Transition::shift(),
            Transition::shift(),
            Transition::left("nsubj"),
            Transition::shift(),
            Transition::right("obj"),
            Transition::right("root"),
        ];
        let s = replay(3, &seq, SystemKind::ArcStandard);
        assert_eq!(s.arcs(), vec![(2, 1, "nsubj"), (0, 2, "root"), (2, 3, "obj")]);
        assert_eq!(static_oracle(&eat_rice(), SystemKind::ArcStandard).unwrap(), seq);
    }

    #[test]
    fn shift_moves_last_buffer_token() {
        let mut s = ParserState::initial(5);
        s.next = 5;
        let s = apply_transition(&s, &Transition::shift(), SystemKind::ArcStandard).unwrap();
        assert_eq!(s.buffer_front(), None);
        assert_eq!(s.stack().last(), Some(&5));
    }

    #[test]
    fn arc_eager_right_arc_from_root() {
        let s = ParserState::initial(2);
        let s = apply_transition(&s, &Transition::right("root"), SystemKind::ArcEager).unwrap();
        assert_eq!(s.arcs(), vec![(0, 1, "root")]);
        assert_eq!(s.stack(), &[0, 1]);
    }

    #[test]
    fn illegal_transitions_are_errors() {
        let s = ParserState::initial(2);
        for sys in [SystemKind::ArcStandard, SystemKind::ArcEager] {
            assert!(apply_transition(&s, &Transition::left("x"), sys).is_err());
            assert!(apply_transition(&s, &Transition::reduce(), sys).is_err());
        }
        let unlabeled = Transition {
            kind: TransitionKind::RightArc,
            label: None,
        };
        assert!(apply_transition(&s, &unlabeled, SystemKind::ArcEager).is_err());
    }

    #[test]
    fn chain_oracle_arc_standard() {
        let chain = Tree::from_heads(&[0, 1, 2], &["root", "a", "b"]);
        let kinds: Vec<TransitionKind> = static_oracle(&chain, SystemKind::ArcStandard)
            .unwrap()
            .iter()
            .map(|t| t.kind)
            .collect();
        use TransitionKind::*;
        assert_eq!(kinds, vec![Shift, Shift, Shift, RightArc, RightArc, RightArc]);
    }

    #[test]
    fn eat_rice_oracle_arc_eager() {
        let seq = static_oracle(&eat_rice(), SystemKind::ArcEager).unwrap();
        assert_eq!(
            seq,
            vec![
                Transition::shift(),
                Transition::left("nsubj"),
                Transition::right("root"),
                Transition::right("obj"),
            ]
        );
    }

    #[test]
    fn non_projective_gold_is_rejected() {
        let tree = Tree::from_heads(&[3, 4, 0, 3], &["a", "b", "root", "c"]);
        for sys in [SystemKind::ArcStandard, SystemKind::ArcEager] {
            assert_eq!(static_oracle(&tree, sys), Err(TransitionError::NonProjective));
        }
    }

    #[test]
    fn feature_positions() {
        let s = ParserState::initial(3);
        assert_eq!(feature_token_indices(&s, SystemKind::ArcStandard), [None, Some(0), Some(1)]);
        let seq = [
            Transition::shift(),
            Transition::left("a"),
            Transition::right("root"),
        ];
        let s = replay(4, &seq, SystemKind::ArcEager);
        assert_eq!(feature_token_indices(&s, SystemKind::ArcEager), [Some(2), Some(3), Some(4)]);
        let done = replay(1, &[Transition::right("root")], SystemKind::ArcEager);
        assert_eq!(feature_token_indices(&done, SystemKind::ArcEager), [Some(1), None, None]);
    }

    proptest! {
        #[test]
        fn oracle_round_trip(n in 1usize..=10, seed in any::<u64>()) {
            let heads = random_projective_heads(n, &mut ChaCha8Rng::seed_from_u64(seed));
            prop_assert!(heads_are_projective(&heads));
            let labels: Vec<String> = (1..=n).map(|d| format!("l{}", d % 3)).collect();
            let label_refs: Vec<&str> = labels.iter().map(String::as_str).collect();
            let tree = Tree::from_heads(&heads, &label_refs);
            for sys in [SystemKind::ArcStandard, SystemKind::ArcEager] {
                let seq = static_oracle(&tree, sys).unwrap();
                let state = replay(n, &seq, sys);
                for tok in &tree.tokens {
                    prop_assert_eq!(state.head(tok.id), tok.head);
                    prop_assert_eq!(state.label(tok.id), tok.deprel.as_deref());
                }
                match sys {
                    SystemKind::ArcStandard => prop_assert_eq!(seq.len(), 2 * n),
                    SystemKind::ArcEager => prop_assert!(seq.len() <= 2 * n),
                }
            }
        }
    }
}
