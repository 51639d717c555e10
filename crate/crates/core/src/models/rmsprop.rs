/// One RMSProp update in place:
/// `state = decay·state + (1-decay)·g²`, `param -= lr·g / (sqrt(state) + eps)`.
pub fn rmsprop_step(params: &mut [f64], grads: &[f64], state: &mut [f64], lr: f64, decay: f64, eps: f64) {
    debug_assert_eq!(params.len(), grads.len());
    debug_assert_eq!(params.len(), state.len());
    for ((p, &g), s) in params.iter_mut().zip(grads).zip(state.iter_mut()) {
        *s = decay * *s + (1.0 - decay) * g * g;
        *p -= lr * g / (s.sqrt() + eps);
    }
}

/// RMSProp optimizer owning its running mean of squared gradients.
#[derive(Debug, Clone)]
pub struct RmsProp {
    pub lr: f64,
    pub decay: f64,
    pub eps: f64,
    state: Vec<f64>,
}

impl RmsProp {
    pub fn new(n_params: usize, lr: f64, decay: f64, eps: f64) -> Self {
        Self {
            lr,
            decay,
            eps,
            state: vec![0.0; n_params],
        }
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        rmsprop_step(params, grads, &mut self.state, self.lr, self.decay, self.eps);
    }

    pub fn state(&self) -> &[f64] {
        &self.state
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_only_decays_state() {
        let mut p = vec![1.5, -2.0];
        let mut s = vec![4.0, 0.5];
        rmsprop_step(&mut p, &[0.0, 0.0], &mut s, 0.01, 0.99, 1e-8);
        assert_eq!(p, vec![1.5, -2.0]);
        assert_eq!(s, vec![0.99 * 4.0, 0.99 * 0.5]);
    }

    #[test]
    fn first_step_by_hand() {
        let (lr, decay, eps, g) = (0.0005, 0.99, 1e-8, 0.3);
        let mut p = vec![0.0];
        let mut s = vec![0.0];
        rmsprop_step(&mut p, &[g], &mut s, lr, decay, eps);
        let expected = -lr * g / ((1.0f64 - decay).sqrt() * g.abs() + eps);
        assert!((p[0] - expected).abs() < 1e-15);
        // Fresh state makes the first step ~ lr / sqrt(1 - decay) = 10·lr.
        assert!((p[0] + 0.005).abs() < 1e-8);
    }

    #[test]
    fn opposite_gradients_move_symmetrically() {
        let mut opt = RmsProp::new(2, 0.01, 0.9, 1e-8);
        let mut p = vec![0.0, 0.0];
        for _ in 0..5 {
            opt.step(&mut p, &[0.7, -0.7]);
        }
        assert_eq!(p[0], -p[1]);
        assert!(p[0] < 0.0);
    }
}
