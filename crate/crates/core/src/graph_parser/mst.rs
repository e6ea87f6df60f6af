use thiserror::Error;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum DecodeError {
    #[error("cannot decode an empty sentence")]
    Empty,
    #[error("brute force is limited to 7 tokens, got {0}")]
    TooLarge(usize),
    #[error("no single-rooted tree has a finite score")]
    NoTree,
}

/// Arc scores for a sentence of `n` tokens: `get(h, d)` scores head `h`
/// (0 = ROOT) for dependent `d` in `1..=n`. Self-arcs are always `-inf`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreMatrix {
    n: usize,
    /// (n + 1) × n, row = head.
    scores: Vec<f64>,
}

impl ScoreMatrix {
    /// All-zero scores apart from the masked self-arcs.
    pub fn zeros(n: usize) -> Self {
        Self::from_fn(n, |_, _| 0.0)
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut scores = Vec::with_capacity((n + 1) * n);
        for h in 0..=n {
            for d in 1..=n {
                scores.push(if h == d { f64::NEG_INFINITY } else { f(h, d) });
            }
        }
        ScoreMatrix { n, scores }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, head: usize, dependent: usize) -> f64 {
        self.scores[head * self.n + dependent - 1]
    }

    /// Setting a self-arc has no effect.
    pub fn set(&mut self, head: usize, dependent: usize, score: f64) {
        if head != dependent {
            self.scores[head * self.n + dependent - 1] = score;
        }
    }

    /// Total score of a head assignment (`heads[d - 1]` is the head of `d`).
    pub fn total(&self, heads: &[usize]) -> f64 {
        heads.iter().enumerate().map(|(i, &h)| self.get(h, i + 1)).sum()
    }
}

/// Maximum spanning arborescence rooted at node 0 over the dense matrix
/// `w[h][d]`. Returns `heads[d]` for every node (entry 0 unused), or
/// `None` when some node has no finite incoming arc.
fn chu_liu_edmonds(w: &[Vec<f64>]) -> Option<Vec<usize>> {
    let size = w.len();
    let mut best = vec![0usize; size];
    for d in 1..size {
        let mut top = f64::NEG_INFINITY;
        let mut arg = None;
        for (h, row) in w.iter().enumerate() {
            if h != d && row[d] > top {
                top = row[d];
                arg = Some(h);
            }
        }
        best[d] = arg?;
    }

    let Some(cycle) = find_cycle(&best) else {
        return Some(best);
    };
    let in_cycle: Vec<bool> = (0..size).map(|v| cycle.contains(&v)).collect();

    // Contracted graph: surviving nodes keep their order, the cycle is last.
    let mut map = vec![usize::MAX; size];
    let mut kept = Vec::new();
    for v in 0..size {
        if !in_cycle[v] {
            map[v] = kept.len();
            kept.push(v);
        }
    }
    let c = kept.len();
    let mut sub = vec![vec![f64::NEG_INFINITY; c + 1]; c + 1];
    // For arcs entering the cycle, the cycle node they enter.
    let mut enter = vec![0usize; c + 1];
    // For arcs leaving the cycle, the cycle node they leave from.
    let mut leave = vec![0usize; c + 1];
    for (i, &u) in kept.iter().enumerate() {
        for (j, &v) in kept.iter().enumerate() {
            if i != j {
                sub[i][j] = w[u][v];
            }
        }
        let mut top = f64::NEG_INFINITY;
        for &v in &cycle {
            let s = w[u][v] - w[best[v]][v];
            if s > top {
                top = s;
                enter[i] = v;
            }
        }
        sub[i][c] = top;
    }
    for (j, &v) in kept.iter().enumerate() {
        let mut top = f64::NEG_INFINITY;
        for &u in &cycle {
            if w[u][v] > top {
                top = w[u][v];
                leave[j] = u;
            }
        }
        sub[c][j] = top;
    }

    let sub_heads = chu_liu_edmonds(&sub)?;
    let mut heads = best.clone();
    for (j, &v) in kept.iter().enumerate().skip(1) {
        let h = sub_heads[j];
        heads[v] = if h == c { leave[j] } else { kept[h] };
    }
    let from = sub_heads[c];
    let entry = enter[from];
    heads[entry] = kept[from];
    Some(heads)
}

/// Some cycle of the head graph, if any.
fn find_cycle(heads: &[usize]) -> Option<Vec<usize>> {
    let size = heads.len();
    // 0 = unvisited, 1 = on the current path, 2 = done
    let mut state = vec![0u8; size];
    state[0] = 2;
    for start in 1..size {
        let mut path = Vec::new();
        let mut v = start;
        while state[v] == 0 {
            state[v] = 1;
            path.push(v);
            v = heads[v];
        }
        if state[v] == 1 {
            let at = path.iter().position(|&p| p == v).expect("on path");
            return Some(path[at..].to_vec());
        }
        for p in path {
            state[p] = 2;
        }
    }
    None
}

/// Highest-scoring tree in which exactly one token attaches to ROOT.
///
/// Every candidate root is tried with all other ROOT arcs removed; the
/// first candidate reaching the best total wins.
pub fn decode_single_root_mst(scores: &ScoreMatrix) -> Result<Vec<usize>, DecodeError> {
    let n = scores.len();
    if n == 0 {
        return Err(DecodeError::Empty);
    }
    let mut w = vec![vec![f64::NEG_INFINITY; n + 1]; n + 1];
    for (h, row) in w.iter_mut().enumerate() {
        for (d, cell) in row.iter_mut().enumerate().skip(1) {
            *cell = scores.get(h, d);
        }
    }
    let root_row = w[0].clone();
    let mut best: Option<(f64, Vec<usize>)> = None;
    for r in 1..=n {
        if !root_row[r].is_finite() {
            continue;
        }
        for d in 1..=n {
            w[0][d] = if d == r { root_row[d] } else { f64::NEG_INFINITY };
        }
        let Some(heads) = chu_liu_edmonds(&w) else { continue };
        let heads = heads[1..].to_vec();
        let total = scores.total(&heads);
        if total.is_finite() && best.as_ref().is_none_or(|(b, _)| total > *b) {
            best = Some((total, heads));
        }
    }
    best.map(|(_, heads)| heads).ok_or(DecodeError::NoTree)
}

/// Exhaustive search over all head assignments (n ≤ 7). Ties go to the
/// lexicographically smallest head sequence.
pub fn brute_force_arborescence(scores: &ScoreMatrix) -> Result<Vec<usize>, DecodeError> {
    let n = scores.len();
    if n == 0 {
        return Err(DecodeError::Empty);
    }
    if n > 7 {
        return Err(DecodeError::TooLarge(n));
    }
    let mut heads = vec![0usize; n];
    let mut best: Option<(f64, Vec<usize>)> = None;
    loop {
        if is_single_rooted_tree(&heads) {
            let total = scores.total(&heads);
            if total.is_finite() && best.as_ref().is_none_or(|(b, _)| total > *b) {
                best = Some((total, heads.clone()));
            }
        }
        // Next assignment in lexicographic order.
        let mut i = n;
        loop {
            if i == 0 {
                return best.map(|(_, h)| h).ok_or(DecodeError::NoTree);
            }
            i -= 1;
            if heads[i] < n {
                heads[i] += 1;
                break;
            }
            heads[i] = 0;
        }
    }
}

/// One head-0 token, no self-loops, no cycles.
pub fn is_single_rooted_tree(heads: &[usize]) -> bool {
    let n = heads.len();
    if heads.iter().filter(|&&h| h == 0).count() != 1 {
        return false;
    }
    if heads.iter().enumerate().any(|(i, &h)| h == i + 1 || h > n) {
        return false;
    }
    (1..=n).all(|start| {
        let mut v = start;
        for _ in 0..n {
            if v == 0 {
                return true;
            }
            v = heads[v - 1];
        }
        v == 0
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, rng: &mut ChaCha8Rng) -> ScoreMatrix {
        ScoreMatrix::from_fn(n, |_, _| rng.random_range(-10.0..10.0))
    }

    #[test]
    fn single_token_is_forced() {
        let s = ScoreMatrix::zeros(1);
        assert_eq!(decode_single_root_mst(&s).unwrap(), vec![0]);
        assert_eq!(brute_force_arborescence(&s).unwrap(), vec![0]);
        assert_eq!(s.get(1, 1), f64::NEG_INFINITY);
        assert_eq!(s.get(0, 1), 0.0);
    }

    #[test]
    fn two_token_hand_case() {
        let mut s = ScoreMatrix::zeros(2);
        s.set(0, 1, 5.0);
        s.set(0, 2, 1.0);
        s.set(1, 2, 4.0);
        s.set(2, 1, 3.0);
        let heads = decode_single_root_mst(&s).unwrap();
        assert_eq!(heads, vec![0, 1]);
        assert_eq!(s.total(&heads), 9.0);
        assert_eq!(brute_force_arborescence(&s).unwrap(), heads);
    }

    #[test]
    fn greedy_cycle_is_broken() {
        let mut s = ScoreMatrix::from_fn(2, |_, _| 1.0);
        s.set(1, 2, 10.0);
        s.set(2, 1, 10.0);
        let heads = decode_single_root_mst(&s).unwrap();
        assert!(is_single_rooted_tree(&heads));
        assert_eq!(heads, brute_force_arborescence(&s).unwrap());
    }

    #[test]
    fn single_root_constraint_binds() {
        // Unconstrained, every token would attach to ROOT.
        let mut s = ScoreMatrix::from_fn(3, |h, _| if h == 0 { 10.0 } else { 0.0 });
        s.set(2, 1, 1.0);
        let heads = decode_single_root_mst(&s).unwrap();
        assert_eq!(heads.iter().filter(|&&h| h == 0).count(), 1);
        assert_eq!(heads, brute_force_arborescence(&s).unwrap());
    }

    #[test]
    fn equal_scores_give_smallest_sequence() {
        let s = ScoreMatrix::zeros(3);
        assert_eq!(brute_force_arborescence(&s).unwrap(), vec![0, 1, 1]);
    }

    #[test]
    fn errors() {
        assert_eq!(decode_single_root_mst(&ScoreMatrix::zeros(0)), Err(DecodeError::Empty));
        assert_eq!(brute_force_arborescence(&ScoreMatrix::zeros(8)), Err(DecodeError::TooLarge(8)));
    }

    #[test]
    fn matches_brute_force_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=5 {
            for _ in 0..200 {
                let s = random(n, &mut rng);
                assert_eq!(decode_single_root_mst(&s).unwrap(), brute_force_arborescence(&s).unwrap());
            }
        }
    }

    #[test]
    fn larger_sentences_decode_to_trees() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in [10, 25, 40] {
            let heads = decode_single_root_mst(&random(n, &mut rng)).unwrap();
            assert!(is_single_rooted_tree(&heads));
        }
    }

    proptest! {
        #[test]
        fn shift_invariance(seed in any::<u64>(), n in 1usize..7, c in -50.0f64..50.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = random(n, &mut rng);
            let shifted = ScoreMatrix::from_fn(n, |h, d| s.get(h, d) + c);
            let heads = decode_single_root_mst(&s).unwrap();
            prop_assert!(is_single_rooted_tree(&heads));
            prop_assert_eq!(decode_single_root_mst(&shifted).unwrap(), heads);
        }
    }
}
