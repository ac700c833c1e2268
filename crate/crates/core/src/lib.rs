//! End-to-end learned physical layer over the m-user Gaussian interference
//! channel, with online estimation of the interference exponent from
//! pilot symbols.
//!
//! Modules, bottom-up:
//! - [`nn`]: dense layers, softmax/cross-entropy, backprop, Adam.
//! - [`channel`]: AWGN and interference channel, SNR/INR conventions,
//!   GDoF regime labels.
//! - [`autoencoder`]: the (n, k) transmitter/receiver pair, training and
//!   SER/BER evaluation.
//! - [`adl`]: pilot-driven estimation of α and receiver update.
//! - [`harness`]: experiment presets, CSV/plot output, configuration.

// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod adl;
pub mod autoencoder;
pub mod channel;
mod error;
pub mod harness;
pub mod nn;
pub mod par;
pub mod rng;

pub use error::{Error, Result};
