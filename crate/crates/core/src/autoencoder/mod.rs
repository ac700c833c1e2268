//! The (n, k) autoencoder: message encoding, decoding, end-to-end training
//! and SER/BER evaluation.

mod checkpoint;
mod eval;
mod model;
mod train;

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, CHECKPOINT_MAGIC};
pub use eval::{
    evaluate_link, evaluate_receiver, evaluate_ser, simulate_errors, ErrorCounts, EvalPlan, SerPoint, CHUNK_SYMBOLS,
    MIN_SYMBOLS_PER_POINT,
};
pub use model::{argmax, bit_errors, bits_from_message, decode_with, AeModel, Codebook, Link};
pub use train::{
    adapt_receiver, batch_messages, fine_tune_on_samples, train_end_to_end, train_joint, AdaptSettings, AeConfig,
    TrainedModel,
};
pub(crate) use train::received_batch;
