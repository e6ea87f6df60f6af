//! Tape-based reverse-mode differentiation.
//!
//! A [`Graph`] records every operation in creation order, so reverse
//! creation order is a valid topological order for the backward pass.
//! Parameter values are read from a borrowed [`ParameterStore`]; their
//! gradients are returned in [`Gradients`] and accumulated by the caller.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::params::{ParamId, ParameterStore};
use super::tensor::{dot, matmul, matmul_nt, matmul_tn, Tensor};
use super::NeuralError;

/// Handle to a node of a [`Graph`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Debug)]
enum Op {
    Constant,
    Input,
    Param(ParamId),
    MatMul(Var, Var),
    MatMulNt(Var, Var),
    Add { a: Var, b: Var, broadcast: bool },
    Scale(Var, f64),
    Sum(Var),
    ConcatCols(Vec<Var>),
    ConcatRows(Vec<Var>),
    GatherRows { src: Var, index: Vec<usize> },
    Relu(Var),
    Tanh(Var),
    Dropout { x: Var, mask: Vec<f64> },
    Softmax(Var),
    CrossEntropy { logits: Var, targets: Vec<usize>, probs: Vec<f64> },
    Conv1d { x: Var, weight: Var, bias: Var, width: usize },
    MaxPool { x: Var, argmax: Vec<usize> },
    GroupedRowDot { p: Var, q: Var },
}

struct Node {
    /// `None` for parameters, whose value lives in the store.
    value: Option<Tensor>,
    op: Op,
    needs_grad: bool,
}

/// Whether stochastic operations are active.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

pub struct Graph<'p> {
    store: &'p ParameterStore,
    nodes: Vec<Node>,
    param_vars: Vec<Option<Var>>,
    mode: Mode,
    rng: ChaCha8Rng,
    stochastic: bool,
}

impl<'p> Graph<'p> {
    /// Inference graph: dropout is the identity.
    pub fn eval(store: &'p ParameterStore) -> Self {
        Graph::with_mode(store, Mode::Eval, 0)
    }

    /// Training graph; `seed` drives the dropout masks.
    pub fn train(store: &'p ParameterStore, seed: u64) -> Self {
        Graph::with_mode(store, Mode::Train, seed)
    }

    pub fn with_mode(store: &'p ParameterStore, mode: Mode, seed: u64) -> Self {
        Graph {
            store,
            nodes: Vec::new(),
            param_vars: vec![None; store.len()],
            mode,
            rng: ChaCha8Rng::seed_from_u64(seed),
            stochastic: false,
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn store(&self) -> &'p ParameterStore {
        self.store
    }

    /// True once a dropout with non-zero rate ran in training mode.
    pub fn is_stochastic(&self) -> bool {
        self.stochastic
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, var: Var) -> &Tensor {
        let node = &self.nodes[var.0];
        match (&node.value, &node.op) {
            (Some(value), _) => value,
            (None, Op::Param(id)) => self.store.value(*id),
            (None, op) => unreachable!("node without value: {op:?}"),
        }
    }

    fn push(&mut self, value: Tensor, op: Op, needs_grad: bool) -> Var {
        self.nodes.push(Node {
            value: Some(value),
            op,
            needs_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn needs(&self, var: Var) -> bool {
        self.nodes[var.0].needs_grad
    }

    fn dims(&self, var: Var) -> (usize, usize) {
        let v = self.value(var);
        (v.rows(), v.cols())
    }

    /// A value that receives no gradient.
    pub fn constant(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Constant, false)
    }

    /// A leaf whose gradient is reported by [`Graph::backward`].
    pub fn input(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Input, true)
    }

    /// A trainable parameter. Repeated lookups return the same node.
    pub fn param(&mut self, name: &str) -> Result<Var, NeuralError> {
        let id = self
            .store
            .id(name)
            .ok_or_else(|| NeuralError::UnknownParameter(name.to_owned()))?;
        Ok(self.param_by_id(id))
    }

    pub fn param_by_id(&mut self, id: ParamId) -> Var {
        if let Some(var) = self.param_vars[id.index()] {
            return var;
        }
        self.nodes.push(Node {
            value: None,
            op: Op::Param(id),
            needs_grad: true,
        });
        let var = Var(self.nodes.len() - 1);
        self.param_vars[id.index()] = Some(var);
        var
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var, NeuralError> {
        let ((m, k), (k2, n)) = (self.dims(a), self.dims(b));
        if k != k2 {
            return Err(NeuralError::shape("matmul", format!("{m}x{k} · {k2}x{n}")));
        }
        let out = matmul(self.value(a).data(), self.value(b).data(), m, k, n);
        let needs = self.needs(a) || self.needs(b);
        Ok(self.push(Tensor::from_parts(vec![m, n], out), Op::MatMul(a, b), needs))
    }

    /// `a · bᵀ`.
    pub fn matmul_nt(&mut self, a: Var, b: Var) -> Result<Var, NeuralError> {
        let ((m, k), (n, k2)) = (self.dims(a), self.dims(b));
        if k != k2 {
            return Err(NeuralError::shape("matmul_nt", format!("{m}x{k} · ({n}x{k2})ᵀ")));
        }
        let out = matmul_nt(self.value(a).data(), self.value(b).data(), m, k, n);
        let needs = self.needs(a) || self.needs(b);
        Ok(self.push(Tensor::from_parts(vec![m, n], out), Op::MatMulNt(a, b), needs))
    }

    /// Elementwise sum; `b` may also be a single row added to every row of `a`.
    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, NeuralError> {
        let ((m, n), (bm, bn)) = (self.dims(a), self.dims(b));
        let broadcast = match (bm, bn) {
            (r, c) if r == m && c == n => false,
            (1, c) if c == n => true,
            _ => return Err(NeuralError::shape("add", format!("{m}x{n} + {bm}x{bn}"))),
        };
        let bv = self.value(b).data();
        let mut out = self.value(a).data().to_vec();
        for (i, o) in out.iter_mut().enumerate() {
            *o += if broadcast { bv[i % n] } else { bv[i] };
        }
        let shape = self.value(a).shape().to_vec();
        let needs = self.needs(a) || self.needs(b);
        Ok(self.push(Tensor::from_parts(shape, out), Op::Add { a, b, broadcast }, needs))
    }

    pub fn scale(&mut self, a: Var, factor: f64) -> Var {
        let value = self.value(a);
        let out = value.data().iter().map(|x| x * factor).collect();
        let shape = value.shape().to_vec();
        let needs = self.needs(a);
        self.push(Tensor::from_parts(shape, out), Op::Scale(a, factor), needs)
    }

    /// Sum of all elements, as a 1-element tensor.
    pub fn sum(&mut self, a: Var) -> Var {
        let total = self.value(a).data().iter().sum();
        let needs = self.needs(a);
        self.push(Tensor::scalar(total), Op::Sum(a), needs)
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var, NeuralError> {
        let rows = parts
            .first()
            .map(|&p| self.dims(p).0)
            .ok_or_else(|| NeuralError::shape("concat_cols", "no inputs".to_owned()))?;
        if parts.iter().any(|&p| self.dims(p).0 != rows) {
            let dims: Vec<_> = parts.iter().map(|&p| self.dims(p)).collect();
            return Err(NeuralError::shape("concat_cols", format!("{dims:?}")));
        }
        let total: usize = parts.iter().map(|&p| self.dims(p).1).sum();
        let mut out = Vec::with_capacity(rows * total);
        for r in 0..rows {
            for &p in parts {
                out.extend_from_slice(self.value(p).row(r));
            }
        }
        let needs = parts.iter().any(|&p| self.needs(p));
        Ok(self.push(
            Tensor::from_parts(vec![rows, total], out),
            Op::ConcatCols(parts.to_vec()),
            needs,
        ))
    }

    pub fn concat_rows(&mut self, parts: &[Var]) -> Result<Var, NeuralError> {
        let cols = parts
            .first()
            .map(|&p| self.dims(p).1)
            .ok_or_else(|| NeuralError::shape("concat_rows", "no inputs".to_owned()))?;
        if parts.iter().any(|&p| self.dims(p).1 != cols) {
            let dims: Vec<_> = parts.iter().map(|&p| self.dims(p)).collect();
            return Err(NeuralError::shape("concat_rows", format!("{dims:?}")));
        }
        let mut out = Vec::new();
        for &p in parts {
            out.extend_from_slice(self.value(p).data());
        }
        let rows = out.len() / cols;
        let needs = parts.iter().any(|&p| self.needs(p));
        Ok(self.push(
            Tensor::from_parts(vec![rows, cols], out),
            Op::ConcatRows(parts.to_vec()),
            needs,
        ))
    }

    /// Row lookup (embedding lookup when `src` is a table).
    pub fn gather_rows(&mut self, src: Var, index: &[usize]) -> Result<Var, NeuralError> {
        let (rows, cols) = self.dims(src);
        if index.is_empty() {
            return Err(NeuralError::shape("gather_rows", "empty index".to_owned()));
        }
        if let Some(&bad) = index.iter().find(|&&i| i >= rows) {
            return Err(NeuralError::IndexOutOfRange { index: bad, rows });
        }
        let value = self.value(src);
        let mut out = Vec::with_capacity(index.len() * cols);
        for &i in index {
            out.extend_from_slice(value.row(i));
        }
        let needs = self.needs(src);
        Ok(self.push(
            Tensor::from_parts(vec![index.len(), cols], out),
            Op::GatherRows {
                src,
                index: index.to_vec(),
            },
            needs,
        ))
    }

    pub fn relu(&mut self, a: Var) -> Var {
        self.map(a, |x| x.max(0.0), Op::Relu(a))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        self.map(a, f64::tanh, Op::Tanh(a))
    }

    fn map(&mut self, a: Var, f: impl Fn(f64) -> f64, op: Op) -> Var {
        let value = self.value(a);
        let out = value.data().iter().map(|&x| f(x)).collect();
        let shape = value.shape().to_vec();
        let needs = self.needs(a);
        self.push(Tensor::from_parts(shape, out), op, needs)
    }

    /// Inverted dropout: kept units are scaled by `1 / (1 - p)`.
    ///
    /// The identity in eval mode or when `p == 0`.
    pub fn dropout(&mut self, x: Var, p: f64) -> Result<Var, NeuralError> {
        if !(0.0..1.0).contains(&p) {
            return Err(NeuralError::InvalidArgument(format!("dropout rate {p}")));
        }
        if self.mode == Mode::Eval || p == 0.0 {
            return Ok(x);
        }
        self.stochastic = true;
        let keep = 1.0 / (1.0 - p);
        let len = self.value(x).len();
        let mask: Vec<f64> = (0..len)
            .map(|_| if self.rng.random::<f64>() < p { 0.0 } else { keep })
            .collect();
        let value = self.value(x);
        let out = value.data().iter().zip(&mask).map(|(v, m)| v * m).collect();
        let shape = value.shape().to_vec();
        let needs = self.needs(x);
        Ok(self.push(Tensor::from_parts(shape, out), Op::Dropout { x, mask }, needs))
    }

    /// Row-wise softmax.
    pub fn softmax(&mut self, a: Var) -> Var {
        let (rows, cols) = self.dims(a);
        let value = self.value(a);
        let mut out = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            out.extend(softmax_row(value.row(r), None));
        }
        let shape = value.shape().to_vec();
        let needs = self.needs(a);
        self.push(Tensor::from_parts(shape, out), Op::Softmax(a), needs)
    }

    /// Mean negative log-likelihood of `targets` under row-wise softmax.
    ///
    /// Entries where `allowed` is false are excluded from the softmax.
    pub fn cross_entropy(
        &mut self,
        logits: Var,
        targets: &[usize],
        allowed: Option<&[bool]>,
    ) -> Result<Var, NeuralError> {
        let (rows, cols) = self.dims(logits);
        if targets.len() != rows {
            return Err(NeuralError::shape(
                "cross_entropy",
                format!("{rows}x{cols} logits, {} targets", targets.len()),
            ));
        }
        if let Some(mask) = allowed {
            if mask.len() != rows * cols {
                return Err(NeuralError::shape(
                    "cross_entropy",
                    format!("{rows}x{cols} logits, mask of {}", mask.len()),
                ));
            }
        }
        let value = self.value(logits);
        let mut probs = Vec::with_capacity(rows * cols);
        let mut loss = 0.0;
        for (r, &target) in targets.iter().enumerate() {
            let mask = allowed.map(|m| &m[r * cols..(r + 1) * cols]);
            if target >= cols || mask.is_some_and(|m| !m[target]) {
                return Err(NeuralError::InvalidArgument(format!(
                    "cross_entropy target {target} unavailable in row {r}"
                )));
            }
            let row = softmax_row(value.row(r), mask);
            loss -= row[target].max(f64::MIN_POSITIVE).ln();
            probs.extend(row);
        }
        let needs = self.needs(logits);
        let op = Op::CrossEntropy {
            logits,
            targets: targets.to_vec(),
            probs,
        };
        Ok(self.push(Tensor::scalar(loss / rows as f64), op, needs))
    }

    /// 1-D convolution over rows with window `width`, anchored so that
    /// output row i covers input rows `i..i + width` (zero past the end).
    ///
    /// `weight` is (width·d)×c, `bias` 1×c; output is n×c.
    pub fn conv1d(&mut self, x: Var, weight: Var, bias: Var, width: usize) -> Result<Var, NeuralError> {
        let ((n, d), (wr, c), (br, bc)) = (self.dims(x), self.dims(weight), self.dims(bias));
        if width == 0 || wr != width * d || br != 1 || bc != c {
            return Err(NeuralError::shape(
                "conv1d",
                format!("input {n}x{d}, weight {wr}x{c}, bias {br}x{bc}, width {width}"),
            ));
        }
        let (xv, wv, bv) = (self.value(x).data(), self.value(weight).data(), self.value(bias).data());
        let mut out = Vec::with_capacity(n * c);
        for i in 0..n {
            let mut row = bv.to_vec();
            for j in 0..width.min(n - i) {
                let input = &xv[(i + j) * d..(i + j + 1) * d];
                for (k, &xk) in input.iter().enumerate() {
                    let w = &wv[(j * d + k) * c..(j * d + k + 1) * c];
                    for (o, &wk) in row.iter_mut().zip(w) {
                        *o += xk * wk;
                    }
                }
            }
            out.extend(row);
        }
        let needs = self.needs(x) || self.needs(weight) || self.needs(bias);
        Ok(self.push(
            Tensor::from_parts(vec![n, c], out),
            Op::Conv1d {
                x,
                weight,
                bias,
                width,
            },
            needs,
        ))
    }

    /// Column-wise maximum over rows (max-over-time pooling), 1×c.
    pub fn max_pool(&mut self, x: Var) -> Var {
        let (rows, cols) = self.dims(x);
        let value = self.value(x);
        let mut argmax = vec![0; cols];
        let mut out = value.row(0).to_vec();
        for r in 1..rows {
            for (c, &v) in value.row(r).iter().enumerate() {
                if v > out[c] {
                    out[c] = v;
                    argmax[c] = r;
                }
            }
        }
        let needs = self.needs(x);
        self.push(Tensor::from_parts(vec![1, cols], out), Op::MaxPool { x, argmax }, needs)
    }

    /// `out[i, l] = Σ_k p[i, l·m + k] · q[i, k]` for `p` n×(L·m), `q` n×m.
    ///
    /// Evaluates one bilinear form per group of columns, row by row.
    pub fn grouped_row_dot(&mut self, p: Var, q: Var) -> Result<Var, NeuralError> {
        let ((n, pc), (qn, m)) = (self.dims(p), self.dims(q));
        if n != qn || m == 0 || pc % m != 0 {
            return Err(NeuralError::shape("grouped_row_dot", format!("{n}x{pc} with {qn}x{m}")));
        }
        let groups = pc / m;
        let (pv, qv) = (self.value(p), self.value(q));
        let mut out = Vec::with_capacity(n * groups);
        for i in 0..n {
            let (prow, qrow) = (pv.row(i), qv.row(i));
            for l in 0..groups {
                out.push(dot(&prow[l * m..(l + 1) * m], qrow));
            }
        }
        let needs = self.needs(p) || self.needs(q);
        Ok(self.push(
            Tensor::from_parts(vec![n, groups], out),
            Op::GroupedRowDot { p, q },
            needs,
        ))
    }

    /// Reverse pass from a scalar loss.
    pub fn backward(&self, loss: Var) -> Result<Gradients, NeuralError> {
        self.backward_scaled(loss, 1.0)
    }

    /// Reverse pass seeded with `d loss = seed`.
    pub fn backward_scaled(&self, loss: Var, seed: f64) -> Result<Gradients, NeuralError> {
        if self.value(loss).len() != 1 {
            return Err(NeuralError::NonScalarLoss(self.value(loss).shape().to_vec()));
        }
        let mut grads: Vec<Option<Vec<f64>>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[loss.0] = Some(vec![seed]);

        for idx in (0..=loss.0).rev() {
            let Some(grad) = grads[idx].take() else {
                continue;
            };
            if self.nodes[idx].needs_grad {
                self.propagate(idx, &grad, &mut grads);
            }
            grads[idx] = Some(grad);
        }

        let mut params = Vec::new();
        let mut inputs = Vec::new();
        for (idx, node) in self.nodes.iter().enumerate() {
            match node.op {
                Op::Param(id) => {
                    if let Some(g) = grads[idx].take() {
                        params.push((id, g));
                    }
                }
                Op::Input => {
                    if let Some(g) = grads[idx].take() {
                        inputs.push((Var(idx), g));
                    }
                }
                _ => {}
            }
        }
        Ok(Gradients { params, inputs })
    }

    fn propagate(&self, idx: usize, grad: &[f64], grads: &mut [Option<Vec<f64>>]) {
        let mut acc = |var: Var, update: &dyn Fn(&mut [f64])| {
            if !self.nodes[var.0].needs_grad {
                return;
            }
            let slot = grads[var.0].get_or_insert_with(|| vec![0.0; self.value(var).len()]);
            update(slot);
        };
        let add_into = |slot: &mut [f64], delta: &[f64]| {
            for (s, d) in slot.iter_mut().zip(delta) {
                *s += d;
            }
        };

        match &self.nodes[idx].op {
            Op::Constant | Op::Input | Op::Param(_) => {}
            Op::MatMul(a, b) => {
                let ((m, k), (_, n)) = (self.dims(*a), self.dims(*b));
                let (av, bv) = (self.value(*a).data(), self.value(*b).data());
                // dA = dC · Bᵀ, dB = Aᵀ · dC
                acc(*a, &|s| add_into(s, &matmul_nt(grad, bv, m, n, k)));
                acc(*b, &|s| add_into(s, &matmul_tn(av, grad, m, k, n)));
            }
            Op::MatMulNt(a, b) => {
                let ((m, k), (n, _)) = (self.dims(*a), self.dims(*b));
                let (av, bv) = (self.value(*a).data(), self.value(*b).data());
                // C = A·Bᵀ: dA = dC · B, dB = dCᵀ · A
                acc(*a, &|s| add_into(s, &matmul(grad, bv, m, n, k)));
                acc(*b, &|s| add_into(s, &matmul_tn(grad, av, m, n, k)));
            }
            Op::Add { a, b, broadcast } => {
                acc(*a, &|s| add_into(s, grad));
                if *broadcast {
                    let n = self.dims(*b).1;
                    acc(*b, &|s| {
                        for (i, g) in grad.iter().enumerate() {
                            s[i % n] += g;
                        }
                    });
                } else {
                    acc(*b, &|s| add_into(s, grad));
                }
            }
            Op::Scale(a, factor) => acc(*a, &|s| {
                for (x, g) in s.iter_mut().zip(grad) {
                    *x += g * factor;
                }
            }),
            Op::Sum(a) => acc(*a, &|s| s.iter_mut().for_each(|x| *x += grad[0])),
            Op::ConcatCols(parts) => {
                let rows = self.dims(parts[0]).0;
                let total: usize = grad.len() / rows;
                let mut offset = 0;
                for &p in parts {
                    let cols = self.dims(p).1;
                    acc(p, &|s| {
                        for r in 0..rows {
                            add_into(
                                &mut s[r * cols..(r + 1) * cols],
                                &grad[r * total + offset..r * total + offset + cols],
                            );
                        }
                    });
                    offset += cols;
                }
            }
            Op::ConcatRows(parts) => {
                let mut offset = 0;
                for &p in parts {
                    let len = self.value(p).len();
                    acc(p, &|s| add_into(s, &grad[offset..offset + len]));
                    offset += len;
                }
            }
            Op::GatherRows { src, index } => {
                let cols = self.dims(*src).1;
                acc(*src, &|s| {
                    for (r, &i) in index.iter().enumerate() {
                        add_into(&mut s[i * cols..(i + 1) * cols], &grad[r * cols..(r + 1) * cols]);
                    }
                });
            }
            Op::Relu(a) => {
                let x = self.value(*a).data();
                acc(*a, &|s| {
                    for ((si, g), xi) in s.iter_mut().zip(grad).zip(x) {
                        if *xi > 0.0 {
                            *si += g;
                        }
                    }
                });
            }
            Op::Tanh(a) => {
                let y = self.nodes[idx].value.as_ref().expect("tanh output").data();
                acc(*a, &|s| {
                    for ((si, g), yi) in s.iter_mut().zip(grad).zip(y) {
                        *si += g * (1.0 - yi * yi);
                    }
                });
            }
            Op::Dropout { x, mask } => acc(*x, &|s| {
                for ((si, g), m) in s.iter_mut().zip(grad).zip(mask) {
                    *si += g * m;
                }
            }),
            Op::Softmax(a) => {
                let y = self.nodes[idx].value.as_ref().expect("softmax output");
                let cols = y.cols();
                acc(*a, &|s| {
                    for r in 0..y.rows() {
                        let yr = y.row(r);
                        let gr = &grad[r * cols..(r + 1) * cols];
                        let inner = dot(yr, gr);
                        for c in 0..cols {
                            s[r * cols + c] += yr[c] * (gr[c] - inner);
                        }
                    }
                });
            }
            Op::CrossEntropy {
                logits,
                targets,
                probs,
            } => {
                let (rows, cols) = self.dims(*logits);
                let scale = grad[0] / rows as f64;
                acc(*logits, &|s| {
                    for (r, &t) in targets.iter().enumerate() {
                        for c in 0..cols {
                            let onehot = if c == t { 1.0 } else { 0.0 };
                            s[r * cols + c] += scale * (probs[r * cols + c] - onehot);
                        }
                    }
                });
            }
            Op::Conv1d {
                x,
                weight,
                bias,
                width,
            } => {
                let ((n, d), c) = (self.dims(*x), self.dims(*weight).1);
                let (xv, wv) = (self.value(*x).data(), self.value(*weight).data());
                let width = *width;
                acc(*bias, &|s| {
                    for i in 0..n {
                        add_into(s, &grad[i * c..(i + 1) * c]);
                    }
                });
                acc(*weight, &|s| {
                    for i in 0..n {
                        let g = &grad[i * c..(i + 1) * c];
                        for j in 0..width.min(n - i) {
                            for k in 0..d {
                                let xk = xv[(i + j) * d + k];
                                let row = &mut s[(j * d + k) * c..(j * d + k + 1) * c];
                                for (w, gv) in row.iter_mut().zip(g) {
                                    *w += xk * gv;
                                }
                            }
                        }
                    }
                });
                acc(*x, &|s| {
                    for i in 0..n {
                        let g = &grad[i * c..(i + 1) * c];
                        for j in 0..width.min(n - i) {
                            for k in 0..d {
                                s[(i + j) * d + k] += dot(&wv[(j * d + k) * c..(j * d + k + 1) * c], g);
                            }
                        }
                    }
                });
            }
            Op::MaxPool { x, argmax } => {
                let cols = argmax.len();
                acc(*x, &|s| {
                    for (c, &r) in argmax.iter().enumerate() {
                        s[r * cols + c] += grad[c];
                    }
                });
            }
            Op::GroupedRowDot { p, q } => {
                let ((n, pc), m) = (self.dims(*p), self.dims(*q).1);
                let groups = pc / m;
                let (pv, qv) = (self.value(*p).data(), self.value(*q).data());
                acc(*p, &|s| {
                    for i in 0..n {
                        for l in 0..groups {
                            let g = grad[i * groups + l];
                            for k in 0..m {
                                s[i * pc + l * m + k] += g * qv[i * m + k];
                            }
                        }
                    }
                });
                acc(*q, &|s| {
                    for i in 0..n {
                        for l in 0..groups {
                            let g = grad[i * groups + l];
                            for k in 0..m {
                                s[i * m + k] += g * pv[i * pc + l * m + k];
                            }
                        }
                    }
                });
            }
        }
    }
}

/// Numerically stable softmax of one row; masked entries get probability 0.
pub(crate) fn softmax_row(row: &[f64], allowed: Option<&[bool]>) -> Vec<f64> {
    let ok = |c: usize| allowed.is_none_or(|m| m[c]);
    let max = row
        .iter()
        .enumerate()
        .filter(|(c, _)| ok(*c))
        .map(|(_, &v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = row
        .iter()
        .enumerate()
        .map(|(c, &v)| if ok(c) { (v - max).exp() } else { 0.0 })
        .collect();
    let total: f64 = out.iter().sum();
    out.iter_mut().for_each(|p| *p /= total);
    out
}

/// Gradients produced by one backward pass.
#[derive(Debug, Default)]
pub struct Gradients {
    params: Vec<(ParamId, Vec<f64>)>,
    inputs: Vec<(Var, Vec<f64>)>,
}

impl Gradients {
    pub fn params(&self) -> impl Iterator<Item = (ParamId, &[f64])> {
        self.params.iter().map(|(id, g)| (*id, g.as_slice()))
    }

    pub fn param(&self, id: ParamId) -> Option<&[f64]> {
        self.params.iter().find(|(p, _)| *p == id).map(|(_, g)| g.as_slice())
    }

    /// Gradient of an [`Graph::input`] leaf.
    pub fn input(&self, var: Var) -> Option<&[f64]> {
        self.inputs.iter().find(|(v, _)| *v == var).map(|(_, g)| g.as_slice())
    }
}
