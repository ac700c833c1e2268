//! Minimal dense-network engine: tensors, layers, activations, loss,
//! backpropagation and Adam.

mod activation;
mod adam;
mod layer;
mod loss;
mod network;
mod normalize;
mod tensor;

pub use activation::{softmax, Activation, ELU_ALPHA};
pub use adam::{AdamState, DEFAULT_BETA1, DEFAULT_BETA2, DEFAULT_EPSILON};
pub use layer::DenseLayer;
pub use loss::{cross_entropy_loss, softmax_cross_entropy, PROB_FLOOR};
pub use network::Network;
pub use normalize::{power_normalize, PowerNorm};
pub use tensor::Tensor;

/// Forward pass of a single layer (caching for backprop).
pub fn dense_forward(layer: &mut DenseLayer, input: &Tensor) -> crate::Result<Tensor> {
    layer.forward(input)
}
