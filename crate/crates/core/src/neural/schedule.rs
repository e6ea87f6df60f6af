use super::NeuralError;

/// Linear warmup / linear decay schedule and the training loop settings.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainSchedule {
    pub peak_lr: f64,
    pub warmup_ratio: f64,
    pub total_steps: usize,
    pub batch_size: usize,
    pub epochs: usize,
    pub dropout_p: f64,
    pub seed: u64,
}

impl Default for TrainSchedule {
    fn default() -> Self {
        TrainSchedule {
            peak_lr: 1e-3,
            warmup_ratio: 0.1,
            total_steps: 1,
            batch_size: 8,
            epochs: 10,
            dropout_p: 0.1,
            seed: 0,
        }
    }
}

impl TrainSchedule {
    /// Learning rate after `step` updates: linear ramp from 0 to the peak
    /// over the warmup, then linear decay to 0 at `total_steps`.
    pub fn lr_at(&self, step: usize) -> Result<f64, NeuralError> {
        if !(0.0..=1.0).contains(&self.warmup_ratio) || self.total_steps == 0 {
            return Err(NeuralError::InvalidArgument(format!(
                "schedule with warmup ratio {} over {} steps",
                self.warmup_ratio, self.total_steps
            )));
        }
        if step > self.total_steps {
            return Err(NeuralError::StepOutOfRange {
                step,
                total: self.total_steps,
            });
        }
        let total = self.total_steps as f64;
        let warmup = self.warmup_ratio * total;
        let step = step as f64;
        if step < warmup {
            Ok(self.peak_lr * step / warmup)
        } else if total > warmup {
            Ok(self.peak_lr * (total - step) / (total - warmup))
        } else {
            Ok(self.peak_lr)
        }
    }

    /// Sets `total_steps` for `epochs` passes over `examples` items.
    pub fn with_total_for(mut self, examples: usize) -> Self {
        let per_epoch = examples.div_ceil(self.batch_size.max(1)).max(1);
        self.total_steps = per_epoch * self.epochs.max(1);
        self
    }
}
