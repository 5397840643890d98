//! Adam with bias correction over the flat parameter arena.

use super::{Gradients, Model, NnError};
use crate::math;
use alloc::vec;
use alloc::vec::Vec;

/// Optimizer state: per-parameter moment accumulators and the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    first_moment: Vec<f64>,
    second_moment: Vec<f64>,
    step: u64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(param_count: usize, learning_rate: f64) -> Self {
        AdamState {
            first_moment: vec![0.0; param_count],
            second_moment: vec![0.0; param_count],
            step: 0,
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn first_moment(&self) -> &[f64] {
        &self.first_moment
    }

    pub fn second_moment(&self) -> &[f64] {
        &self.second_moment
    }
}

/// One Adam update in place:
/// `m <- b1 m + (1-b1) g`, `v <- b2 v + (1-b2) g^2`,
/// `theta <- theta - lr * m_hat / (sqrt(v_hat) + eps)` with bias-corrected
/// moment estimates.
pub fn adam_step(
    model: &mut Model,
    grads: &Gradients,
    state: &mut AdamState,
) -> Result<(), NnError> {
    if grads.len() != model.param_count() || state.first_moment.len() != model.param_count() {
        return Err(NnError::ShapeMismatch {
            detail: alloc::format!(
                "params {} vs grads {} vs state {}",
                model.param_count(),
                grads.len(),
                state.first_moment.len()
            ),
        });
    }
    state.step += 1;
    let bc1 = 1.0 - math::powi(state.beta1, state.step as i32);
    let bc2 = 1.0 - math::powi(state.beta2, state.step as i32);
    let lr = state.learning_rate;
    for ((p, g), (m, v)) in model
        .params_mut()
        .iter_mut()
        .zip(grads.as_slice())
        .zip(state.first_moment.iter_mut().zip(&mut state.second_moment))
    {
        *m = state.beta1 * *m + (1.0 - state.beta1) * g;
        *v = state.beta2 * *v + (1.0 - state.beta2) * g * g;
        let m_hat = *m / bc1;
        let v_hat = *v / bc2;
        *p -= lr * m_hat / (math::sqrt(v_hat) + state.epsilon);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{backward, forward, init_model, ModelConfig};
    use crate::mat::Mat;

    fn tiny_model() -> Model {
        init_model(&ModelConfig::new(vec![2], 3).with_seed(5)).unwrap()
    }

    fn grads_of(model: &Model, d_pred: &[f64], x: &Mat) -> Gradients {
        let (_, cache) = forward(model, x).unwrap();
        backward(model, &cache, d_pred).unwrap()
    }

    #[test]
    fn zero_gradient_from_fresh_state_is_a_no_op() {
        let mut model = tiny_model();
        let before = model.params().to_vec();
        let x = Mat::zeros(3, 2);
        let grads = grads_of(&model, &[0.0; 3], &x);
        let mut state = AdamState::new(model.param_count(), 1e-3);
        adam_step(&mut model, &grads, &mut state).unwrap();
        assert_eq!(model.params(), before.as_slice());
        assert_eq!(state.step(), 1);
    }

    #[test]
    fn first_step_magnitude_is_learning_rate_for_large_gradients() {
        // On a fresh state, the update is lr * g / (|g| + eps) ~= lr * sign(g).
        let mut model = tiny_model();
        let lr = 1e-3;
        let mut state = AdamState::new(model.param_count(), lr);
        let x = Mat::from_vec(2, 2, vec![0.4, -0.3, 0.9, 0.2]);
        let grads = grads_of(&model, &[1.0, -0.5], &x);
        let before = model.params().to_vec();
        adam_step(&mut model, &grads, &mut state).unwrap();
        for ((p_new, p_old), g) in model.params().iter().zip(&before).zip(grads.as_slice()) {
            let step = p_new - p_old;
            if g.abs() > 1e-3 {
                let expected = -lr * g / (g.abs() + state.epsilon);
                assert!(
                    (step - expected).abs() < 1e-12,
                    "step {step} vs expected {expected}"
                );
                assert!((step.abs() - lr).abs() < lr * 1e-4);
            }
        }
    }

    #[test]
    fn identical_inputs_give_identical_trajectories() {
        let x = Mat::from_vec(4, 2, (0..8).map(|i| (i as f64).sin()).collect());
        let run = || {
            let mut model = tiny_model();
            let mut state = AdamState::new(model.param_count(), 1e-2);
            for _ in 0..10 {
                let grads = grads_of(&model, &[0.5, -0.2, 0.1, 0.9], &x);
                adam_step(&mut model, &grads, &mut state).unwrap();
            }
            model.params().to_vec()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn moments_decay_without_gradient() {
        let mut model = tiny_model();
        let mut state = AdamState::new(model.param_count(), 1e-3);
        let x = Mat::from_vec(2, 2, vec![0.4, -0.3, 0.9, 0.2]);
        let grads = grads_of(&model, &[1.0, 1.0], &x);
        adam_step(&mut model, &grads, &mut state).unwrap();
        let m_before = state.first_moment().to_vec();
        let zero = grads_of(&model, &[0.0, 0.0], &x);
        adam_step(&mut model, &zero, &mut state).unwrap();
        for (after, before) in state.first_moment().iter().zip(&m_before) {
            assert!((after - before * 0.9).abs() < 1e-15);
        }
        assert_eq!(state.step(), 2);
    }
}
