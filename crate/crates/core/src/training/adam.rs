//! Adam with bias correction.

use crate::model::{Gradients, ModelParams, TensorId};

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

/// First and second moment estimates, shaped like the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    step: u32,
}

impl AdamState {
    pub fn new(params: &ModelParams) -> Self {
        let zeros = || {
            TensorId::ALL
                .iter()
                .map(|&t| vec![0.0; params.tensor(t).len()])
                .collect()
        };
        Self {
            m: zeros(),
            v: zeros(),
            step: 0,
        }
    }

    pub fn steps(&self) -> u32 {
        self.step
    }

    pub fn first_moment(&self, id: TensorId) -> &[f64] {
        &self.m[id as usize]
    }

    pub fn second_moment(&self, id: TensorId) -> &[f64] {
        &self.v[id as usize]
    }
}

/// One Adam update of every tensor in place.
pub fn adam_step(params: &mut ModelParams, grads: &Gradients, state: &mut AdamState, lr: f64) {
    state.step += 1;
    let c1 = 1.0 - BETA1.powi(state.step as i32);
    let c2 = 1.0 - BETA2.powi(state.step as i32);
    for (i, &id) in TensorId::ALL.iter().enumerate() {
        let g = grads.get(id);
        let (m, v) = (&mut state.m[i], &mut state.v[i]);
        for (((w, &g), m), v) in params
            .tensor_mut(id)
            .iter_mut()
            .zip(g)
            .zip(m.iter_mut())
            .zip(v.iter_mut())
        {
            *m = BETA1 * *m + (1.0 - BETA1) * g;
            *v = BETA2 * *v + (1.0 - BETA2) * g * g;
            *w -= lr * (*m / c1) / ((*v / c2).sqrt() + EPSILON);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::{toy_model, toy_tournament};
    use approx::assert_abs_diff_eq;

    fn gradients_with(params: &ModelParams, f: impl Fn(usize) -> f64) -> Gradients {
        let mut g = Gradients::zeros_like(params);
        for &id in &TensorId::ALL {
            for (j, x) in g.get_mut(id).iter_mut().enumerate() {
                *x = f(j);
            }
        }
        g
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let t = toy_tournament();
        let mut params = toy_model(&t, 1).params;
        let before = params.clone();
        let mut state = AdamState::new(&params);
        let zero = Gradients::zeros_like(&params);
        adam_step(&mut params, &zero, &mut state, 0.01);
        assert_eq!(params, before);
    }

    #[test]
    fn moments_decay_under_zero_gradient() {
        let t = toy_tournament();
        let mut params = toy_model(&t, 1).params;
        let mut state = AdamState::new(&params);
        let ones = gradients_with(&params, |_| 1.0);
        let zero = Gradients::zeros_like(&params);
        adam_step(&mut params, &ones, &mut state, 0.0);
        assert_abs_diff_eq!(state.first_moment(TensorId::OutputBias)[0], 0.1, epsilon = 1e-15);
        let frozen = params.clone();
        adam_step(&mut params, &zero, &mut state, 0.01);
        assert_abs_diff_eq!(state.first_moment(TensorId::OutputBias)[0], 0.09, epsilon = 1e-15);
        assert_abs_diff_eq!(
            state.second_moment(TensorId::OutputBias)[0],
            0.999 * 0.001,
            epsilon = 1e-15
        );
        // Momentum keeps moving the weights against the old gradient.
        for (a, b) in params.b_o.iter().zip(&frozen.b_o) {
            assert!(a < b);
        }
    }

    #[test]
    fn first_step_moves_by_learning_rate_against_gradient() {
        let t = toy_tournament();
        let mut params = toy_model(&t, 2).params;
        let before = params.clone();
        let mut state = AdamState::new(&params);
        let g = gradients_with(&params, |j| (j as f64 - 3.5) * 0.37);
        let lr = 1e-3;
        adam_step(&mut params, &g, &mut state, lr);
        for &id in &TensorId::ALL {
            for ((a, b), &gj) in params.tensor(id).iter().zip(before.tensor(id)).zip(g.get(id)) {
                // Bias-corrected moments are g and g^2, so the step is lr * g / (|g| + eps).
                let expect = -lr * gj / (gj.abs() + EPSILON);
                assert_abs_diff_eq!(a - b, expect, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn identical_runs_are_identical() {
        let t = toy_tournament();
        let run = || {
            let mut params = toy_model(&t, 3).params;
            let mut state = AdamState::new(&params);
            for k in 0..5 {
                let g = gradients_with(&params, |j| ((j + k) as f64).sin());
                adam_step(&mut params, &g, &mut state, 1e-2);
            }
            params
        };
        assert_eq!(run(), run());
    }
}
