use rand::Rng;

use super::{Activation, Tensor};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
struct ForwardCache {
    input: Tensor,
    pre: Tensor,
    out: Tensor,
}

/// Affine transform followed by an activation: `out = act(W·in + b)`.
#[derive(Debug, Clone)]
pub struct DenseLayer {
    weights: Tensor,
    bias: Tensor,
    activation: Activation,
    cache: Option<ForwardCache>,
}

/// Layers are equal when their parameters and activation are; gradients
/// and forward caches are ignored.
impl PartialEq for DenseLayer {
    fn eq(&self, other: &Self) -> bool {
        self.activation == other.activation
            && self.weights.shape() == other.weights.shape()
            && self.weights.values() == other.weights.values()
            && self.bias.values() == other.bias.values()
    }
}

impl DenseLayer {
    /// Glorot-uniform weights, zero biases.
    pub fn new<R: Rng + ?Sized>(in_dim: usize, out_dim: usize, activation: Activation, rng: &mut R) -> Self {
        let limit = (6.0 / (in_dim + out_dim) as f64).sqrt();
        let w = (0..in_dim * out_dim)
            .map(|_| rng.gen_range(-limit..=limit))
            .collect::<Vec<_>>();
        DenseLayer {
            weights: Tensor::from_vec(out_dim, in_dim, w).expect("shape").with_grad(),
            bias: Tensor::zeros(out_dim, 1).with_grad(),
            activation,
            cache: None,
        }
    }

    pub fn from_parts(weights: Tensor, bias: Tensor, activation: Activation) -> Result<Self> {
        if bias.shape() != (weights.rows(), 1) {
            return Err(Error::dims(
                format!("bias {}x1", weights.rows()),
                format!("bias {}", bias.shape_str()),
            ));
        }
        Ok(DenseLayer {
            weights: weights.with_grad(),
            bias: bias.with_grad(),
            activation,
            cache: None,
        })
    }

    pub fn in_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.rows()
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn weights(&self) -> &Tensor {
        &self.weights
    }

    pub fn bias(&self) -> &Tensor {
        &self.bias
    }

    pub fn weights_mut(&mut self) -> &mut Tensor {
        &mut self.weights
    }

    pub fn bias_mut(&mut self) -> &mut Tensor {
        &mut self.bias
    }

    pub fn param_count(&self) -> usize {
        self.weights.values().len() + self.bias.values().len()
    }

    fn check_input(&self, input: &Tensor) -> Result<()> {
        if input.rows() != self.in_dim() {
            return Err(Error::dims(
                format!("input with {} rows for layer {}", self.in_dim(), self.weights.shape_str()),
                format!("input {}", input.shape_str()),
            ));
        }
        Ok(())
    }

    /// Pre-activation `W·in + b`.
    pub fn affine(&self, input: &Tensor) -> Result<Tensor> {
        self.check_input(input)?;
        let mut pre = self.weights.matmul(input)?;
        let cols = pre.cols();
        let b = self.bias.values();
        for (i, row) in pre.values_mut().chunks_mut(cols).enumerate() {
            for v in row {
                *v += b[i];
            }
        }
        Ok(pre)
    }

    /// Forward pass without caching; safe on a shared, frozen layer.
    pub fn infer(&self, input: &Tensor) -> Result<Tensor> {
        Ok(self.activation.apply(&self.affine(input)?))
    }

    /// Forward pass that caches what `backward` needs.
    pub fn forward(&mut self, input: &Tensor) -> Result<Tensor> {
        let pre = self.affine(input)?;
        let out = self.activation.apply(&pre);
        self.cache = Some(ForwardCache {
            input: input.clone(),
            pre,
            out: out.clone(),
        });
        Ok(out)
    }

    /// Backpropagates a gradient w.r.t. this layer's output. Parameter
    /// gradients accumulate; the gradient w.r.t. the input is returned.
    pub fn backward(&mut self, grad_out: &Tensor) -> Result<Tensor> {
        let cache = self.cache.as_ref().ok_or(Error::State("backward called before forward"))?;
        if grad_out.shape() != cache.out.shape() {
            return Err(Error::dims(
                format!("output gradient {}", cache.out.shape_str()),
                grad_out.shape_str(),
            ));
        }
        let grad_pre = self.activation.backward(&cache.pre, &cache.out, grad_out);
        self.backward_pre(&grad_pre)
    }

    /// Like [`backward`](Self::backward) but starting from the gradient
    /// w.r.t. the pre-activation (used for fused softmax + cross-entropy).
    pub fn backward_pre(&mut self, grad_pre: &Tensor) -> Result<Tensor> {
        let cache = self.cache.as_ref().ok_or(Error::State("backward called before forward"))?;
        if grad_pre.shape() != cache.pre.shape() {
            return Err(Error::dims(
                format!("pre-activation gradient {}", cache.pre.shape_str()),
                grad_pre.shape_str(),
            ));
        }
        let (out_dim, in_dim, batch) = (self.out_dim(), self.in_dim(), grad_pre.cols());
        let input = &cache.input;
        {
            let gw = self.weights.grad_mut().expect("weights carry gradients");
            for i in 0..out_dim {
                let g_row = &grad_pre.values()[i * batch..(i + 1) * batch];
                for p in 0..in_dim {
                    let x_row = &input.values()[p * batch..(p + 1) * batch];
                    gw[i * in_dim + p] += g_row.iter().zip(x_row).map(|(g, x)| g * x).sum::<f64>();
                }
            }
        }
        {
            let gb = self.bias.grad_mut().expect("bias carries gradients");
            for (i, g) in gb.iter_mut().enumerate() {
                *g += grad_pre.values()[i * batch..(i + 1) * batch].iter().sum::<f64>();
            }
        }
        self.weights.t_matmul(grad_pre)
    }

    pub fn zero_grad(&mut self) {
        self.weights.zero_grad();
        self.bias.zero_grad();
    }

    pub fn clear_cache(&mut self) {
        self.cache = None;
    }
}
