//! Mini-batch training loop shared by the tagger and both parser families.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::eval::AttachmentScores;
use crate::neural::{Gradients, NeuralError, ParameterStore, TrainSchedule};

/// Held-out evaluation after an epoch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DevMetrics {
    Attachment(AttachmentScores),
    /// Tagging accuracy in percent.
    Accuracy(f64),
}

impl DevMetrics {
    /// The value checkpoints are selected on: LAS or accuracy.
    pub fn selection(&self) -> f64 {
        match self {
            DevMetrics::Attachment(s) => s.las,
            DevMetrics::Accuracy(a) => *a,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochStats {
    /// 1-based.
    pub epoch: usize,
    pub mean_loss: f64,
    pub dev: Option<DevMetrics>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainLog {
    pub epochs: Vec<EpochStats>,
    /// Epoch whose parameters were kept (1-based).
    pub best_epoch: usize,
    /// Training trees left out of supervision.
    pub excluded: usize,
    pub examples: usize,
}

impl TrainLog {
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for e in &self.epochs {
            out.push_str(&format!("epoch {:>3} loss {:.4}", e.epoch, e.mean_loss));
            match e.dev {
                Some(DevMetrics::Attachment(s)) => {
                    out.push_str(&format!(" dev UAS {:.2} LAS {:.2}", s.uas, s.las))
                }
                Some(DevMetrics::Accuracy(a)) => out.push_str(&format!(" dev accuracy {a:.2}")),
                None => {}
            }
            out.push('\n');
        }
        out
    }
}

fn batch_seed(seed: u64, step: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (step as u64).wrapping_add(1)
}

/// Runs `schedule.epochs` shuffled passes over `examples` items.
///
/// `batch_loss` returns the mean loss of a batch and its gradients, given
/// a dropout seed. After every epoch `dev` is consulted and the parameters
/// with the best selection metric are restored at the end (the last epoch
/// wins when there is no dev data).
pub(crate) fn fit<E, B, D>(
    store: &mut ParameterStore,
    schedule: &TrainSchedule,
    examples: usize,
    mut batch_loss: B,
    mut dev: D,
) -> Result<TrainLog, E>
where
    E: From<NeuralError>,
    B: FnMut(&ParameterStore, &[usize], u64) -> Result<(f64, Gradients), E>,
    D: FnMut(&ParameterStore) -> Result<Option<DevMetrics>, E>,
{
    let schedule = schedule.clone().with_total_for(examples);
    let batch_size = schedule.batch_size.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(schedule.seed);
    let mut order: Vec<usize> = (0..examples).collect();
    let mut log = TrainLog {
        examples,
        ..TrainLog::default()
    };
    let mut best: Option<(f64, ParameterStore)> = None;
    let mut step = 0;
    for epoch in 1..=schedule.epochs.max(1) {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        let mut batches = 0;
        for batch in order.chunks(batch_size) {
            let (loss, grads) = batch_loss(store, batch, batch_seed(schedule.seed, step))?;
            store.accumulate(&grads);
            step += 1;
            store.adam_step(&schedule, step)?;
            total += loss;
            batches += 1;
        }
        let metrics = dev(store)?;
        if let Some(m) = metrics {
            if best.as_ref().is_none_or(|(score, _)| m.selection() > *score) {
                best = Some((m.selection(), store.clone()));
                log.best_epoch = epoch;
            }
        } else {
            log.best_epoch = epoch;
        }
        log.epochs.push(EpochStats {
            epoch,
            mean_loss: total / batches.max(1) as f64,
            dev: metrics,
        });
    }
    if let Some((_, params)) = best {
        if log.best_epoch != log.epochs.len() {
            store.copy_values_from(&params)?;
        }
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::{Graph, Tensor};

    #[test]
    fn restores_best_dev_epoch() {
        let mut store = ParameterStore::default();
        store.add("w", Tensor::vector(vec![0.0]).unwrap()).unwrap();
        let schedule = TrainSchedule {
            epochs: 4,
            batch_size: 1,
            peak_lr: 0.1,
            ..TrainSchedule::default()
        };
        let mut epoch = 0;
        let mut at_best = f64::NAN;
        let log: TrainLog = fit::<NeuralError, _, _>(
            &mut store,
            &schedule,
            2,
            |s, _, _| {
                let mut g = Graph::eval(s);
                let w = g.param("w")?;
                let loss = g.sum(w);
                Ok((g.value(loss).item(), g.backward(loss)?))
            },
            |s| {
                epoch += 1;
                // Best at epoch 2, so later updates must be rolled back.
                let score = if epoch == 2 { 99.0 } else { 1.0 };
                if epoch == 2 {
                    at_best = s.get("w").unwrap().item();
                }
                Ok(Some(DevMetrics::Accuracy(score)))
            },
        )
        .unwrap();
        assert_eq!(log.best_epoch, 2);
        assert_eq!(log.epochs.len(), 4);
        assert!(at_best < 0.0);
        assert_eq!(store.get("w").unwrap().item(), at_best);
    }
}
