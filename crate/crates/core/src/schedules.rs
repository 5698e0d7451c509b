//! Teacher forcing, label smoothing and learning-rate schedules.

use alloc::vec;
use alloc::vec::Vec;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScheduleError {
    #[error("label {id} is outside a vocabulary of {vocab_size}")]
    IdOutOfRange { id: usize, vocab_size: usize },
    #[error("smoothing epsilon must lie in [0, 1), got {0}")]
    BadEpsilon(f64),
}

pub const TEACHER_FORCING_DECAY: f64 = 0.02;
pub const TEACHER_FORCING_FLOOR: f64 = 0.8;

/// `max(1.0 - 0.02 * epoch, 0.8)`
pub fn teacher_forcing_ratio(epoch: u32) -> f64 {
    (1.0 - TEACHER_FORCING_DECAY * f64::from(epoch)).max(TEACHER_FORCING_FLOOR)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelSmoothingSpec {
    pub epsilon: f64,
    pub vocab_size: usize,
}

impl LabelSmoothingSpec {
    pub fn new(vocab_size: usize) -> Self {
        Self { epsilon: 0.1, vocab_size }
    }
}

/// `(1 - eps) * onehot(true_id) + eps / V`
pub fn smooth_labels(true_id: usize, spec: &LabelSmoothingSpec) -> Result<Vec<f64>, ScheduleError> {
    let v = spec.vocab_size;
    if true_id >= v {
        return Err(ScheduleError::IdOutOfRange { id: true_id, vocab_size: v });
    }
    if !(0.0..1.0).contains(&spec.epsilon) {
        return Err(ScheduleError::BadEpsilon(spec.epsilon));
    }
    let off = spec.epsilon / v as f64;
    let mut out = vec![off; v];
    out[true_id] = 1.0 - spec.epsilon + off;
    Ok(out)
}

/// Linear warmup to a peak, then reduce-on-plateau driven by validation loss.
#[derive(Debug, Clone, PartialEq)]
pub struct LrScheduleState {
    pub warmup_steps: u64,
    pub peak_lr: f64,
    pub reduce_factor: f64,
    pub patience_epochs: u32,
    /// A loss must beat the best by more than this to count as improvement.
    pub threshold: f64,
    pub best_val_loss: f64,
    pub current_lr: f64,
    pub bad_epochs: u32,
    pub reductions: u32,
}

impl Default for LrScheduleState {
    fn default() -> Self {
        Self::new(400, 3e-4, 0.5, 1, 1e-4)
    }
}

impl LrScheduleState {
    pub fn new(warmup_steps: u64, peak_lr: f64, reduce_factor: f64, patience_epochs: u32, threshold: f64) -> Self {
        Self {
            warmup_steps,
            peak_lr,
            reduce_factor,
            patience_epochs,
            threshold,
            best_val_loss: f64::INFINITY,
            current_lr: peak_lr,
            bad_epochs: 0,
            reductions: 0,
        }
    }

    /// `peak * step / warmup` during warmup, the plateau-managed rate after.
    pub fn lr_on_step(&self, global_step: u64) -> f64 {
        if global_step < self.warmup_steps {
            self.peak_lr * global_step as f64 / self.warmup_steps as f64
        } else {
            self.current_lr
        }
    }

    /// Updates the plateau counter; returns true when the rate was reduced.
    pub fn lr_on_epoch_end(&mut self, val_loss: f64) -> bool {
        if val_loss < self.best_val_loss - self.threshold {
            self.best_val_loss = val_loss;
            self.bad_epochs = 0;
            return false;
        }
        self.bad_epochs += 1;
        if self.bad_epochs > self.patience_epochs {
            self.current_lr *= self.reduce_factor;
            self.bad_epochs = 0;
            self.reductions += 1;
            return true;
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn teacher_forcing_values() {
        assert_eq!(teacher_forcing_ratio(0), 1.0);
        assert_eq!(teacher_forcing_ratio(10), 0.8);
        assert_eq!(teacher_forcing_ratio(50), 0.8);
        assert_eq!(teacher_forcing_ratio(5), 1.0 - 0.02 * 5.0);
    }

    #[test]
    fn smoothing() {
        let p = smooth_labels(2, &LabelSmoothingSpec { epsilon: 0.0, vocab_size: 4 }).unwrap();
        assert_eq!(p, vec![0.0, 0.0, 1.0, 0.0]);
        let p = smooth_labels(0, &LabelSmoothingSpec::new(5)).unwrap();
        assert!((p[0] - 0.92).abs() < 1e-15);
        assert!(p[1..].iter().all(|&x| (x - 0.02).abs() < 1e-15));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(
            smooth_labels(5, &LabelSmoothingSpec::new(5)),
            Err(ScheduleError::IdOutOfRange { id: 5, vocab_size: 5 })
        );
    }

    #[test]
    fn warmup() {
        let s = LrScheduleState::default();
        assert_eq!(s.lr_on_step(0), 0.0);
        assert!((s.lr_on_step(200) - 1.5e-4).abs() < 1e-18);
        assert_eq!(s.lr_on_step(400), 3e-4);
        assert_eq!(s.lr_on_step(10_000), 3e-4);
    }

    #[test]
    fn plateau_halves_after_second_flat_epoch() {
        let mut s = LrScheduleState::default();
        assert!(!s.lr_on_epoch_end(1.0)); // first loss sets the best
        assert!(!s.lr_on_epoch_end(1.0));
        assert!(s.lr_on_epoch_end(1.0));
        assert_eq!(s.current_lr, 1.5e-4);
    }

    #[test]
    fn decreasing_losses_never_reduce() {
        let mut s = LrScheduleState::default();
        for i in 0..20 {
            assert!(!s.lr_on_epoch_end(10.0 - i as f64 * 0.1));
        }
        assert_eq!(s.current_lr, 3e-4);
    }

    #[test]
    fn tiny_improvement_is_not_improvement() {
        let mut s = LrScheduleState::default();
        s.lr_on_epoch_end(1.0);
        s.lr_on_epoch_end(1.0 - 5e-5);
        assert!(s.lr_on_epoch_end(1.0 - 9e-5));
        assert_eq!(s.best_val_loss, 1.0);
    }
}
