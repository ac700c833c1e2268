use super::{DenseLayer, Tensor};
use crate::error::{Error, Result};

/// Fixed sequential stack of dense layers.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Network {
    layers: Vec<DenseLayer>,
}

impl Network {
    pub fn new(layers: Vec<DenseLayer>) -> Result<Self> {
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[0].out_dim() != pair[1].in_dim() {
                return Err(Error::dims(
                    format!("layer {} input dim {}", i + 1, pair[0].out_dim()),
                    format!("{}", pair[1].in_dim()),
                ));
            }
        }
        Ok(Network { layers })
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    pub fn in_dim(&self) -> usize {
        self.layers.first().map_or(0, DenseLayer::in_dim)
    }

    pub fn out_dim(&self) -> usize {
        self.layers.last().map_or(0, DenseLayer::out_dim)
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(DenseLayer::param_count).sum()
    }

    pub fn forward(&mut self, input: &Tensor) -> Result<Tensor> {
        let mut x = input.clone();
        for l in &mut self.layers {
            x = l.forward(&x)?;
        }
        Ok(x)
    }

    pub fn infer(&self, input: &Tensor) -> Result<Tensor> {
        let mut x = input.clone();
        for l in &self.layers {
            x = l.infer(&x)?;
        }
        Ok(x)
    }

    /// Inference that stops before the final activation.
    pub fn infer_logits(&self, input: &Tensor) -> Result<Tensor> {
        let Some((last, rest)) = self.layers.split_last() else {
            return Ok(input.clone());
        };
        let mut x = input.clone();
        for l in rest {
            x = l.infer(&x)?;
        }
        last.affine(&x)
    }

    /// Backpropagates a gradient w.r.t. the network output; returns the
    /// gradient w.r.t. the network input.
    pub fn backward(&mut self, grad_out: &Tensor) -> Result<Tensor> {
        let mut g = grad_out.clone();
        for l in self.layers.iter_mut().rev() {
            g = l.backward(&g)?;
        }
        Ok(g)
    }

    /// Backpropagates starting from the gradient w.r.t. the last layer's
    /// pre-activation.
    pub fn backward_logits(&mut self, grad_logits: &Tensor) -> Result<Tensor> {
        let Some((last, rest)) = self.layers.split_last_mut() else {
            return Err(Error::State("empty network"));
        };
        let mut g = last.backward_pre(grad_logits)?;
        for l in rest.iter_mut().rev() {
            g = l.backward(&g)?;
        }
        Ok(g)
    }

    pub fn zero_grad(&mut self) {
        self.layers.iter_mut().for_each(DenseLayer::zero_grad);
    }

    pub fn clear_cache(&mut self) {
        self.layers.iter_mut().for_each(DenseLayer::clear_cache);
    }
}
