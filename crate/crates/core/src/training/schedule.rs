//! Plateau-driven learning-rate decay and weight reset.

use serde::{Deserialize, Serialize};

/// What the schedule asks the trainer to do after an epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ScheduleEvent {
    /// The validation loss is a new minimum; snapshot the parameters.
    pub improved: bool,
    /// The learning rate was multiplied by the decay factor.
    pub decayed: bool,
    /// Restore the best snapshot and clear optimizer moments.
    pub reset: bool,
}

/// Counts epochs since the best validation loss. Every `decay_patience`
/// such epochs the learning rate decays; at `reset_patience` the weights go
/// back to the best snapshot and the count restarts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlateauSchedule {
    lr: f64,
    factor: f64,
    decay_patience: usize,
    reset_patience: usize,
    best: Option<f64>,
    since_best: usize,
}

impl PlateauSchedule {
    pub fn new(lr: f64, factor: f64, decay_patience: usize, reset_patience: usize) -> Self {
        Self {
            lr,
            factor,
            decay_patience,
            reset_patience,
            best: None,
            since_best: 0,
        }
    }

    pub fn learning_rate(&self) -> f64 {
        self.lr
    }

    pub fn best(&self) -> Option<f64> {
        self.best
    }

    pub fn observe(&mut self, val_loss: f64) -> ScheduleEvent {
        let mut event = ScheduleEvent::default();
        if self.best.is_none_or(|b| val_loss < b) {
            self.best = Some(val_loss);
            self.since_best = 0;
            event.improved = true;
            return event;
        }
        self.since_best += 1;
        if self.since_best.is_multiple_of(self.decay_patience) {
            self.lr *= self.factor;
            event.decayed = true;
        }
        if self.since_best >= self.reset_patience {
            self.since_best = 0;
            event.reset = true;
        }
        event
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(losses: impl IntoIterator<Item = f64>) -> (Vec<usize>, Vec<usize>, Vec<f64>) {
        let mut s = PlateauSchedule::new(1.0, 0.95, 5, 20);
        let (mut decays, mut resets, mut lrs) = (vec![], vec![], vec![]);
        for (i, l) in losses.into_iter().enumerate() {
            let e = s.observe(l);
            if e.decayed {
                decays.push(i + 1);
            }
            if e.reset {
                resets.push(i + 1);
            }
            lrs.push(s.learning_rate());
        }
        (decays, resets, lrs)
    }

    #[test]
    fn decreasing_loss_never_decays() {
        let (d, r, lrs) = run((0..50).map(|i| 1.0 / (i + 1) as f64));
        assert!(d.is_empty() && r.is_empty());
        assert!(lrs.iter().all(|&l| l == 1.0));
    }

    #[test]
    fn increasing_loss_decays_at_six_and_resets_at_twenty_one() {
        let (d, r, lrs) = run((0..45).map(|i| i as f64));
        assert_eq!(d[0], 6);
        assert_eq!(r[0], 21);
        assert_eq!(&d[..4], &[6, 11, 16, 21]);
        assert_eq!(r, vec![21, 41]);
        assert!(lrs.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn ties_do_not_count_as_improvement() {
        let mut s = PlateauSchedule::new(1.0, 0.5, 2, 4);
        assert!(s.observe(1.0).improved);
        assert!(!s.observe(1.0).improved);
        assert!(s.observe(1.0).decayed);
        assert_eq!(s.learning_rate(), 0.5);
        assert!(s.observe(0.9).improved);
        assert_eq!(s.best(), Some(0.9));
    }
}
