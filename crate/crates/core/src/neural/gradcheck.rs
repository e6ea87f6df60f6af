use super::graph::{Graph, Mode, Var};
use super::params::ParameterStore;
use super::NeuralError;

/// Settings for [`grad_check`].
#[derive(Clone, Copy, Debug)]
pub struct GradCheck {
    pub tolerance: f64,
    /// Central-difference step.
    pub step: f64,
    pub mode: Mode,
}

impl Default for GradCheck {
    fn default() -> Self {
        GradCheck {
            tolerance: 1e-3,
            step: 1e-4,
            mode: Mode::Eval,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GradCheckReport {
    /// Relative error per parameter, in registration order.
    pub per_parameter: Vec<(String, f64)>,
    pub max_relative_error: f64,
    pub tolerance: f64,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.max_relative_error < self.tolerance
    }
}

/// Compares analytic parameter gradients with central differences.
///
/// The error of a parameter is `max|analytic - numeric|` divided by the
/// larger of the two gradients' max-norms (floored at 1e-6). Graphs that
/// apply dropout in training mode are rejected.
pub fn grad_check<F>(store: &ParameterStore, build: F, opts: &GradCheck) -> Result<GradCheckReport, NeuralError>
where
    F: Fn(&mut Graph<'_>) -> Result<Var, NeuralError>,
{
    let analytic = {
        let mut graph = Graph::with_mode(store, opts.mode, 0);
        let loss = build(&mut graph)?;
        if graph.is_stochastic() {
            return Err(NeuralError::Stochastic);
        }
        graph.backward(loss)?
    };

    let mut work = store.clone();
    let eval = |work: &ParameterStore| -> Result<f64, NeuralError> {
        let mut graph = Graph::with_mode(work, opts.mode, 0);
        let loss = build(&mut graph)?;
        Ok(graph.value(loss).item())
    };

    let mut per_parameter = Vec::new();
    let mut max_relative_error = 0.0f64;
    for id in store.ids() {
        let len = store.value(id).len();
        let zeros = vec![0.0; len];
        let exact = analytic.param(id).unwrap_or(&zeros).to_vec();
        let mut numeric = Vec::with_capacity(len);
        for i in 0..len {
            work.nudge(id, i, opts.step);
            let plus = eval(&work)?;
            work.nudge(id, i, -2.0 * opts.step);
            let minus = eval(&work)?;
            work.nudge(id, i, opts.step);
            numeric.push((plus - minus) / (2.0 * opts.step));
        }
        let diff = exact
            .iter()
            .zip(&numeric)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let scale = exact
            .iter()
            .chain(&numeric)
            .map(|x| x.abs())
            .fold(1e-6, f64::max);
        let error = diff / scale;
        max_relative_error = max_relative_error.max(error);
        per_parameter.push((store.name(id).to_owned(), error));
    }

    Ok(GradCheckReport {
        per_parameter,
        max_relative_error,
        tolerance: opts.tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::Tensor;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn linear_store() -> ParameterStore {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut store = ParameterStore::default();
        store.add_glorot("w", 5, 3, &mut rng).unwrap();
        store.add_normal("b", &[1, 3], 0.5, &mut rng).unwrap();
        store
    }

    fn linear(g: &mut Graph<'_>) -> Result<Var, NeuralError> {
        let x = g.constant(Tensor::matrix(2, 5, (0..10).map(|i| (i as f64 * 0.37).sin()).collect())?);
        let w = g.param("w")?;
        let b = g.param("b")?;
        let h = g.matmul(x, w)?;
        let y = g.add(h, b)?;
        g.cross_entropy(y, &[0, 2], None)
    }

    #[test]
    fn single_linear_layer_passes_tight_tolerance() {
        let opts = GradCheck {
            tolerance: 1e-5,
            ..GradCheck::default()
        };
        let report = grad_check(&linear_store(), linear, &opts).unwrap();
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn detects_a_wrong_gradient() {
        // `w` enters twice, once through a constant copy that hides its gradient.
        let store = linear_store();
        let broken = |g: &mut Graph<'_>| -> Result<Var, NeuralError> {
            let w = g.param("w")?;
            let frozen = g.constant(g.value(w).clone());
            let prod = g.matmul_nt(w, frozen)?;
            Ok(g.sum(prod))
        };
        let report = grad_check(&store, broken, &GradCheck::default()).unwrap();
        assert!(!report.passed());
    }

    #[test]
    fn dropout_in_train_mode_is_rejected() {
        let store = linear_store();
        let with_dropout = |g: &mut Graph<'_>| -> Result<Var, NeuralError> {
            let w = g.param("w")?;
            let d = g.dropout(w, 0.1)?;
            Ok(g.sum(d))
        };
        let opts = GradCheck {
            mode: Mode::Train,
            ..GradCheck::default()
        };
        assert!(matches!(grad_check(&store, with_dropout, &opts), Err(NeuralError::Stochastic)));
        // The same graph in eval mode is deterministic.
        assert!(grad_check(&store, with_dropout, &GradCheck::default()).unwrap().passed());
    }
}
