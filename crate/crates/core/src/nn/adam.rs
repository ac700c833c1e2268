use super::DenseLayer;
use crate::error::{Error, Result};

pub const DEFAULT_BETA1: f64 = 0.9;
pub const DEFAULT_BETA2: f64 = 0.999;
pub const DEFAULT_EPSILON: f64 = 1e-8;

/// Adam optimizer state over a flat parameter vector.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step_count: u64,
    first_moment: Vec<f64>,
    second_moment: Vec<f64>,
}

impl AdamState {
    pub fn new(learning_rate: f64, param_count: usize) -> Self {
        AdamState {
            learning_rate,
            beta1: DEFAULT_BETA1,
            beta2: DEFAULT_BETA2,
            epsilon: DEFAULT_EPSILON,
            step_count: 0,
            first_moment: vec![0.0; param_count],
            second_moment: vec![0.0; param_count],
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn param_count(&self) -> usize {
        self.first_moment.len()
    }

    /// One update on a flat parameter slice.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.param_count() || grads.len() != self.param_count() {
            return Err(Error::dims(
                format!("{} parameters and gradients", self.param_count()),
                format!("{} and {}", params.len(), grads.len()),
            ));
        }
        if grads.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite { layer: 0 });
        }
        self.step_count += 1;
        let (c1, c2) = self.corrections();
        self.update(0, params, grads, c1, c2);
        Ok(())
    }

    /// One update over every weight and bias in `layers`, in layer order.
    pub fn step_layers(&mut self, layers: &mut [DenseLayer]) -> Result<()> {
        let total: usize = layers.iter().map(DenseLayer::param_count).sum();
        if total != self.param_count() {
            return Err(Error::dims(format!("{} parameters", self.param_count()), format!("{total}")));
        }
        for (i, l) in layers.iter().enumerate() {
            let finite = [l.weights().grad(), l.bias().grad()]
                .into_iter()
                .flatten()
                .all(|g| g.iter().all(|v| v.is_finite()));
            if !finite {
                return Err(Error::NonFinite { layer: i });
            }
        }
        self.step_count += 1;
        let (c1, c2) = self.corrections();
        let mut offset = 0;
        for l in layers.iter_mut() {
            for which in 0..2 {
                let t = if which == 0 { l.weights_mut() } else { l.bias_mut() };
                let (values, grad) = t.values_and_grad_mut();
                let grad = grad.expect("trainable tensor");
                let len = values.len();
                self.update(offset, values, grad, c1, c2);
                offset += len;
            }
        }
        Ok(())
    }

    fn corrections(&self) -> (f64, f64) {
        let t = self.step_count as i32;
        (1.0 - self.beta1.powi(t), 1.0 - self.beta2.powi(t))
    }

    fn update(&mut self, offset: usize, params: &mut [f64], grads: &[f64], c1: f64, c2: f64) {
        let m = &mut self.first_moment[offset..offset + params.len()];
        let v = &mut self.second_moment[offset..offset + params.len()];
        for (((p, &g), m), v) in params.iter_mut().zip(grads).zip(m).zip(v) {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_is_noop() {
        let mut s = AdamState::new(0.001, 3);
        let mut p = vec![1.0, -2.0, 0.5];
        for _ in 0..10 {
            s.step(&mut p, &[0.0; 3]).unwrap();
        }
        assert_eq!(p, vec![1.0, -2.0, 0.5]);
        assert_eq!(s.step_count(), 10);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        // m̂ = g, v̂ = g² ⇒ Δ = lr·g/(|g| + ε)
        for g in [1e-3, 0.5, -3.0, 250.0] {
            let mut s = AdamState::new(0.001, 1);
            let mut p = [0.0];
            s.step(&mut p, &[g]).unwrap();
            let expected = -0.001 * g / (g.abs() + 1e-8);
            assert!((p[0] - expected).abs() < 1e-15, "g={g}");
            assert!((p[0].abs() - 0.001).abs() < 1e-7);
        }
    }

    #[test]
    fn nan_gradient_rejected() {
        let mut s = AdamState::new(0.001, 1);
        let mut p = [0.0];
        assert!(matches!(s.step(&mut p, &[f64::NAN]), Err(Error::NonFinite { .. })));
        assert_eq!(s.step_count(), 0);
    }

    #[test]
    fn minimizes_scalar_quadratic() {
        let mut s = AdamState::new(0.1, 1);
        let mut x = [1.0];
        for _ in 0..200 {
            let g = [2.0 * x[0]];
            s.step(&mut x, &g).unwrap();
        }
        assert!(x[0].abs() < 1e-3, "x = {}", x[0]);
    }
}
