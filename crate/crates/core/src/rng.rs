//! Seedable simulation RNG.
//!
//! Streams are ChaCha8 generators keyed by SHA-256 of `(master seed, label)`,
//! so the same pair always yields the same stream on every platform.
//! Gaussian samples use the Box–Muller transform, both outputs consumed.

use std::collections::HashSet;
use std::f64::consts::TAU;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct SimRng {
    inner: ChaCha8Rng,
    spare: Option<f64>,
}

impl SimRng {
    pub fn from_seed(seed: u64) -> Self {
        SimRng {
            inner: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Stream identified by a master seed and a label.
    pub fn stream(master_seed: u64, label: &str) -> Self {
        let mut h = Sha256::new();
        h.update(b"aeic-stream\0");
        h.update(master_seed.to_le_bytes());
        h.update(label.as_bytes());
        SimRng {
            inner: ChaCha8Rng::from_seed(h.finalize().into()),
            spare: None,
        }
    }

    /// Derives a child stream from draws of this one.
    pub fn fork(&mut self, label: &str) -> Self {
        let seed = self.inner.next_u64();
        SimRng::stream(seed, label)
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.gen::<f64>()
    }

    /// Uniform integer in `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        self.inner.gen_range(0..n)
    }

    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // u1 ∈ (0, 1] keeps the log finite
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (TAU * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }

    pub fn normal(&mut self, sigma: f64) -> f64 {
        sigma * self.standard_normal()
    }
}

impl RngCore for SimRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.inner.try_fill_bytes(dest)
    }
}

/// One independent stream per label. Labels must be distinct.
pub fn seed_streams<S: AsRef<str>>(master_seed: u64, labels: &[S]) -> Result<Vec<SimRng>> {
    let mut seen = HashSet::new();
    for l in labels {
        if !seen.insert(l.as_ref()) {
            return Err(Error::Argument(format!("duplicate stream label `{}`", l.as_ref())));
        }
    }
    Ok(labels.iter().map(|l| SimRng::stream(master_seed, l.as_ref())).collect())
}
