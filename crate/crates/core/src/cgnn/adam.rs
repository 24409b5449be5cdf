use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Added to the gradient as `weight_decay * param`.
    pub weight_decay: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 5e-4,
        }
    }
}

/// First and second moment estimates for one parameter group.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        Self {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }

    pub fn steps(&self) -> i32 {
        self.t
    }
}

/// One bias-corrected Adam update of `params` in place.
pub fn adam_step(params: &mut [f64], grads: &[f64], state: &mut AdamState, lr: f64, cfg: &AdamConfig) {
    assert_eq!(params.len(), grads.len());
    assert_eq!(params.len(), state.m.len());
    state.t += 1;
    let c1 = 1.0 - cfg.beta1.powi(state.t);
    let c2 = 1.0 - cfg.beta2.powi(state.t);
    for (i, p) in params.iter_mut().enumerate() {
        let g = grads[i] + cfg.weight_decay * *p;
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
        let m_hat = state.m[i] / c1;
        let v_hat = state.v[i] / c2;
        *p -= lr * m_hat / (v_hat.sqrt() + cfg.eps);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_only_decays() {
        let cfg = AdamConfig::default();
        let mut p = vec![2.0, -1.0];
        let mut st = AdamState::new(2);
        adam_step(&mut p, &[0.0, 0.0], &mut st, 0.01, &cfg);
        // the decay term alone is a first step of -lr * sign(param)
        assert!(p[0] < 2.0 && p[1] > -1.0);
        let no_decay = AdamConfig {
            weight_decay: 0.0,
            ..cfg
        };
        let mut q = vec![2.0, -1.0];
        adam_step(&mut q, &[0.0, 0.0], &mut AdamState::new(2), 0.01, &no_decay);
        assert_eq!(q, vec![2.0, -1.0]);
    }

    #[test]
    fn first_step_moves_by_lr_against_gradient() {
        let cfg = AdamConfig {
            weight_decay: 0.0,
            ..AdamConfig::default()
        };
        let mut p = vec![0.0, 0.0];
        adam_step(&mut p, &[3.0, -0.2], &mut AdamState::new(2), 0.01, &cfg);
        assert!((p[0] + 0.01).abs() < 1e-9);
        assert!((p[1] - 0.01).abs() < 1e-9);
    }

    #[test]
    fn minimizes_quadratic() {
        let cfg = AdamConfig {
            weight_decay: 0.0,
            ..AdamConfig::default()
        };
        // f(x) = (x - 1)^2
        let mut x = vec![0.0];
        let mut st = AdamState::new(1);
        for _ in 0..100 {
            let g = 2.0 * (x[0] - 1.0);
            adam_step(&mut x, &[g], &mut st, 0.15, &cfg);
        }
        assert_eq!(st.steps(), 100);
        assert!((x[0] - 1.0).abs() < 1e-3, "x = {}", x[0]);
    }
}
