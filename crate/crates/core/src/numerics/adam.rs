//! Adam optimizer with bias correction.

use crate::numerics::store::ParameterStore;
use crate::numerics::tensor::Tensor;
use std::collections::BTreeMap;

/// Per-parameter moment accumulators plus the optimizer hyperparameters.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step: u64,
    first_moment: BTreeMap<String, Tensor>,
    second_moment: BTreeMap<String, Tensor>,
}

impl OptimizerState {
    pub fn adam(learning_rate: f64) -> Self {
        OptimizerState {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step: 0,
            first_moment: BTreeMap::new(),
            second_moment: BTreeMap::new(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }
}

/// One Adam update from the store's accumulated gradients. Gradients are
/// zeroed afterwards and the step counter advances.
pub fn adam_step(store: &mut ParameterStore, opt: &mut OptimizerState) {
    opt.step += 1;
    let t = opt.step as i32;
    let bc1 = 1.0 - opt.beta1.powi(t);
    let bc2 = 1.0 - opt.beta2.powi(t);

    for name in store.names() {
        let grad = store.grad(&name).clone();
        let m = opt
            .first_moment
            .entry(name.clone())
            .or_insert_with(|| Tensor::zeros_like(&grad));
        let v = opt
            .second_moment
            .entry(name.clone())
            .or_insert_with(|| Tensor::zeros_like(&grad));
        let param = store.get_mut(&name);
        for k in 0..grad.len() {
            let g = grad.data()[k];
            let mk = opt.beta1 * m.data()[k] + (1.0 - opt.beta1) * g;
            let vk = opt.beta2 * v.data()[k] + (1.0 - opt.beta2) * g * g;
            m.data_mut()[k] = mk;
            v.data_mut()[k] = vk;
            let m_hat = mk / bc1;
            let v_hat = vk / bc2;
            param.data_mut()[k] -= opt.learning_rate * m_hat / (v_hat.sqrt() + opt.epsilon);
        }
    }
    store.zero_grads();
}
