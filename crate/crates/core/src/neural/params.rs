use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::graph::Gradients;
use super::schedule::TrainSchedule;
use super::tensor::Tensor;
use super::NeuralError;

/// Index of a parameter inside its [`ParameterStore`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParamId(usize);

impl ParamId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Adam hyperparameters with decoupled weight decay.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 0.01,
        }
    }
}

#[derive(Clone, Debug)]
struct Entry {
    name: String,
    value: Tensor,
    grad: Option<Vec<f64>>,
    m: Vec<f64>,
    v: Vec<f64>,
}

/// Named trainable tensors plus their optimizer state.
///
/// Stored values are always representable as `f32`, so writing a model
/// file and reading it back reproduces them exactly. Arithmetic happens
/// in `f64`.
#[derive(Clone, Debug, Default)]
pub struct ParameterStore {
    entries: Vec<Entry>,
    index: BTreeMap<String, ParamId>,
    step: u64,
    pub adam: AdamConfig,
}

fn snap(data: &mut [f64]) {
    for x in data {
        *x = *x as f32 as f64;
    }
}

impl ParameterStore {
    pub fn new(adam: AdamConfig) -> Self {
        ParameterStore {
            adam,
            ..ParameterStore::default()
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of Adam updates applied so far.
    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn add(&mut self, name: &str, mut value: Tensor) -> Result<ParamId, NeuralError> {
        if self.index.contains_key(name) {
            return Err(NeuralError::DuplicateParameter(name.to_owned()));
        }
        snap(value.data_mut());
        let id = ParamId(self.entries.len());
        let len = value.len();
        self.entries.push(Entry {
            name: name.to_owned(),
            value,
            grad: None,
            m: vec![0.0; len],
            v: vec![0.0; len],
        });
        self.index.insert(name.to_owned(), id);
        Ok(id)
    }

    /// Glorot-uniform matrix.
    pub fn add_glorot<R: Rng>(&mut self, name: &str, rows: usize, cols: usize, rng: &mut R) -> Result<ParamId, NeuralError> {
        let limit = (6.0 / (rows + cols) as f64).sqrt();
        let data = (0..rows * cols).map(|_| rng.random_range(-limit..=limit)).collect();
        self.add(name, Tensor::matrix(rows, cols, data)?)
    }

    pub fn add_zeros(&mut self, name: &str, shape: &[usize]) -> Result<ParamId, NeuralError> {
        self.add(name, Tensor::new(shape.to_vec(), vec![0.0; shape.iter().product()])?)
    }

    /// Entries drawn from N(0, std²).
    pub fn add_normal<R: Rng>(&mut self, name: &str, shape: &[usize], std: f64, rng: &mut R) -> Result<ParamId, NeuralError> {
        let normal = Normal::new(0.0, std).map_err(|e| NeuralError::InvalidArgument(e.to_string()))?;
        let data = (0..shape.iter().product()).map(|_| normal.sample(rng)).collect();
        self.add(name, Tensor::new(shape.to_vec(), data)?)
    }

    pub fn id(&self, name: &str) -> Option<ParamId> {
        self.index.get(name).copied()
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.id(name).map(|id| self.value(id))
    }

    pub fn value(&self, id: ParamId) -> &Tensor {
        &self.entries[id.0].value
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.entries[id.0].name
    }

    /// Replaces a value without rounding to `f32` (used for finite differences).
    pub fn set_value_exact(&mut self, id: ParamId, value: Tensor) -> Result<(), NeuralError> {
        let entry = &mut self.entries[id.0];
        if entry.value.shape() != value.shape() {
            return Err(NeuralError::shape(
                "set_value",
                format!("{:?} vs {:?}", entry.value.shape(), value.shape()),
            ));
        }
        entry.value = value;
        Ok(())
    }

    /// Overwrites every value with draws from U(low, high). Used to move
    /// gradient checks away from the kinks of freshly initialized ReLUs.
    pub fn fill_uniform<R: Rng>(&mut self, low: f64, high: f64, rng: &mut R) {
        for entry in &mut self.entries {
            for x in entry.value.data_mut() {
                *x = rng.random_range(low..high);
            }
            snap(entry.value.data_mut());
        }
    }

    /// Shifts one element without rounding (finite differences).
    pub(crate) fn nudge(&mut self, id: ParamId, index: usize, delta: f64) {
        self.entries[id.0].value.data_mut()[index] += delta;
    }

    /// Parameter ids in registration order.
    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.entries.len()).map(ParamId)
    }

    pub fn grad(&self, id: ParamId) -> Option<&[f64]> {
        self.entries[id.0].grad.as_deref()
    }

    /// Adds the parameter gradients of one backward pass.
    pub fn accumulate(&mut self, grads: &Gradients) {
        for (id, g) in grads.params() {
            let entry = &mut self.entries[id.0];
            match &mut entry.grad {
                Some(acc) => acc.iter_mut().zip(g).for_each(|(a, b)| *a += b),
                None => entry.grad = Some(g.to_vec()),
            }
        }
    }

    pub fn zero_grad(&mut self) {
        for entry in &mut self.entries {
            entry.grad = None;
        }
    }

    /// Decoupled weight decay followed by a bias-corrected Adam update at
    /// the learning rate `schedule.lr_at(step)`. Clears the gradients.
    pub fn adam_step(&mut self, schedule: &TrainSchedule, step: usize) -> Result<(), NeuralError> {
        let lr = schedule.lr_at(step)?;
        if let Some(entry) = self.entries.iter().find(|e| e.grad.is_none()) {
            return Err(NeuralError::MissingGradient(entry.name.clone()));
        }
        self.step += 1;
        let AdamConfig {
            beta1,
            beta2,
            eps,
            weight_decay,
        } = self.adam;
        let correction1 = 1.0 - beta1.powi(self.step as i32);
        let correction2 = 1.0 - beta2.powi(self.step as i32);
        for entry in &mut self.entries {
            let grad = entry.grad.take().expect("checked above");
            let decay = 1.0 - lr * weight_decay;
            for (((p, g), m), v) in entry
                .value
                .data_mut()
                .iter_mut()
                .zip(&grad)
                .zip(&mut entry.m)
                .zip(&mut entry.v)
            {
                *p *= decay;
                *m = beta1 * *m + (1.0 - beta1) * g;
                *v = beta2 * *v + (1.0 - beta2) * g * g;
                let m_hat = *m / correction1;
                let v_hat = *v / correction2;
                *p -= lr * m_hat / (v_hat.sqrt() + eps);
            }
            snap(entry.value.data_mut());
        }
        Ok(())
    }

    /// Copies values (not optimizer state) from another store with the same layout.
    pub fn copy_values_from(&mut self, other: &ParameterStore) -> Result<(), NeuralError> {
        for (dst, src) in self.entries.iter_mut().zip(&other.entries) {
            if dst.name != src.name || dst.value.shape() != src.value.shape() {
                return Err(NeuralError::shape(
                    "copy_values_from",
                    format!("{} vs {}", dst.name, src.name),
                ));
            }
            dst.value = src.value.clone();
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::Graph;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn schedule(peak_lr: f64) -> TrainSchedule {
        TrainSchedule {
            peak_lr,
            warmup_ratio: 0.1,
            total_steps: 100,
            ..TrainSchedule::default()
        }
    }

    fn backprop_sum(store: &mut ParameterStore, name: &str, scale: f64) {
        let grads = {
            let mut g = Graph::eval(store);
            let p = g.param(name).unwrap();
            let s = g.sum(p);
            let loss = g.scale(s, scale);
            g.backward(loss).unwrap()
        };
        store.accumulate(&grads);
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut store = ParameterStore::new(AdamConfig {
            weight_decay: 0.0,
            ..AdamConfig::default()
        });
        store.add("w", Tensor::vector(vec![0.5, -1.5]).unwrap()).unwrap();
        backprop_sum(&mut store, "w", 0.0);
        store.adam_step(&schedule(0.1), 10).unwrap();
        assert_eq!(store.get("w").unwrap().data(), &[0.5, -1.5]);
    }

    #[test]
    fn first_adam_step_moves_by_learning_rate() {
        let mut store = ParameterStore::new(AdamConfig {
            weight_decay: 0.0,
            ..AdamConfig::default()
        });
        store.add("w", Tensor::scalar(0.0)).unwrap();
        backprop_sum(&mut store, "w", 1.0);
        // Warmup ends at step 10, where the rate is exactly the peak.
        store.adam_step(&schedule(0.1), 10).unwrap();
        let w = store.get("w").unwrap().item();
        assert!((w + 0.1).abs() < 1e-6, "{w}");
        assert!(store.grad(store.id("w").unwrap()).is_none());
    }

    #[test]
    fn missing_gradient_is_an_error() {
        let mut store = ParameterStore::default();
        store.add("w", Tensor::scalar(1.0)).unwrap();
        assert_eq!(
            store.adam_step(&schedule(0.1), 1),
            Err(NeuralError::MissingGradient("w".into()))
        );
    }

    #[test]
    fn values_are_f32_representable() {
        let mut store = ParameterStore::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let id = store.add_glorot("w", 4, 3, &mut rng).unwrap();
        assert!(store.value(id).data().iter().all(|&x| x as f32 as f64 == x));
    }

    #[test]
    fn repeated_runs_are_bit_identical() {
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            let mut store = ParameterStore::default();
            store.add_normal("w", &[3, 2], 0.5, &mut rng).unwrap();
            for step in 1..=10 {
                let grads = {
                    let mut g = Graph::train(&store, step as u64);
                    let w = g.param("w").unwrap();
                    let h = g.tanh(w);
                    let d = g.dropout(h, 0.1).unwrap();
                    let loss = g.sum(d);
                    g.backward(loss).unwrap()
                };
                store.accumulate(&grads);
                store.adam_step(&schedule(0.01), step).unwrap();
            }
            store.get("w").unwrap().data().iter().map(|x| x.to_bits()).collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn duplicate_names_rejected() {
        let mut store = ParameterStore::default();
        store.add_zeros("b", &[1, 2]).unwrap();
        assert!(matches!(store.add_zeros("b", &[1, 2]), Err(NeuralError::DuplicateParameter(_))));
    }
}
