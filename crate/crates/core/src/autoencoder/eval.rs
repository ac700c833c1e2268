use super::model::{bit_errors, decode_with, AeModel, Link};
use super::train::received_batch;
use crate::channel::{ChannelSampler, ChannelSpec};
use crate::error::{Error, Result};
use crate::nn::Network;
use crate::par;
use crate::rng::SimRng;

/// Smallest Monte Carlo size accepted per grid point.
pub const MIN_SYMBOLS_PER_POINT: usize = 10_000;

/// Symbols per independently seeded work unit. Fixed so that results do
/// not depend on the number of workers.
pub const CHUNK_SYMBOLS: usize = 10_000;

/// One Monte Carlo point of an error-rate curve.
#[derive(Debug, Clone, PartialEq)]
pub struct SerPoint {
    pub ebn0_db: f64,
    pub ser: f64,
    pub ber: f64,
    pub n_symbols: usize,
    pub symbol_errors: usize,
    pub bit_errors: usize,
    pub seed: u64,
}

impl SerPoint {
    /// Binomial standard deviation of the SER estimate.
    pub fn ser_std(&self) -> f64 {
        (self.ser * (1.0 - self.ser) / self.n_symbols as f64).sqrt()
    }
}

/// What to simulate for an SER curve.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalPlan {
    pub m_users: usize,
    /// Received interference exponent; `None` means no interference.
    pub alpha: Option<f64>,
    pub ebn0_grid: Vec<f64>,
    pub symbols_per_point: usize,
    pub seed: u64,
}

impl EvalPlan {
    pub fn channel_at(&self, n: usize, k: usize, ebn0_db: f64) -> Result<ChannelSpec> {
        match self.alpha {
            Some(a) => ChannelSpec::new(self.m_users, a, ebn0_db, n, k, self.seed),
            None => ChannelSpec::awgn(ebn0_db, n, k, self.seed),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ErrorCounts {
    pub symbols: usize,
    pub symbol_errors: usize,
    pub bit_errors: usize,
}

impl ErrorCounts {
    pub fn add(&mut self, other: ErrorCounts) {
        self.symbols += other.symbols;
        self.symbol_errors += other.symbol_errors;
        self.bit_errors += other.bit_errors;
    }

    pub fn ser(&self) -> f64 {
        self.symbol_errors as f64 / self.symbols as f64
    }

    pub fn ber(&self, k: usize) -> f64 {
        self.bit_errors as f64 / (self.symbols * k) as f64
    }

    /// Counts decisions against the truth.
    pub fn tally(truth: &[usize], decided: &[usize]) -> ErrorCounts {
        let mut c = ErrorCounts {
            symbols: truth.len(),
            ..ErrorCounts::default()
        };
        for (&t, &d) in truth.iter().zip(decided) {
            if t != d {
                c.symbol_errors += 1;
                c.bit_errors += bit_errors(t, d) as usize;
            }
        }
        c
    }
}

/// Simulates `symbols` uniform messages for user 1 over `link` and counts
/// decision errors of `receiver`.
pub fn simulate_errors(
    link: &Link,
    receiver: &Network,
    sampler: &ChannelSampler,
    symbols: usize,
    rng: &mut SimRng,
) -> Result<ErrorCounts> {
    let truth: Vec<usize> = (0..symbols).map(|_| rng.below(link.codebook.len())).collect();
    let ys = received_batch(&link.codebook, &link.interferers, &truth, sampler, rng);
    let decided = decode_with(receiver, &ys)?;
    Ok(ErrorCounts::tally(&truth, &decided))
}

/// SER/BER curve of `model` over the plan's Eb/N0 grid, with every
/// interferer using the model's own transmitter.
pub fn evaluate_ser(model: &AeModel, plan: &EvalPlan) -> Result<Vec<SerPoint>> {
    evaluate_receiver(model, model.receiver(), plan)
}

/// Like [`evaluate_ser`] with the model's transmitter and another receiver.
pub fn evaluate_receiver(model: &AeModel, receiver: &Network, plan: &EvalPlan) -> Result<Vec<SerPoint>> {
    evaluate_link(&Link::shared(model, plan.m_users)?, model.n(), model.k(), receiver, plan)
}

/// SER/BER curve of `receiver` over `link`.
///
/// Every `(point, chunk)` pair draws from its own stream, so the curve is
/// identical whether chunks run serially or in parallel.
pub fn evaluate_link(link: &Link, n: usize, k: usize, receiver: &Network, plan: &EvalPlan) -> Result<Vec<SerPoint>> {
    if plan.symbols_per_point < MIN_SYMBOLS_PER_POINT {
        return Err(Error::Argument(format!(
            "symbols_per_point must be ≥ {MIN_SYMBOLS_PER_POINT}, got {}",
            plan.symbols_per_point
        )));
    }
    if plan.alpha.is_some() && link.users() < plan.m_users {
        return Err(Error::Argument(format!(
            "link has {} users, channel needs {}",
            link.users(),
            plan.m_users
        )));
    }
    let samplers = plan
        .ebn0_grid
        .iter()
        .map(|&e| Ok(plan.channel_at(n, k, e)?.sampler()))
        .collect::<Result<Vec<_>>>()?;
    let chunks_per_point = plan.symbols_per_point.div_ceil(CHUNK_SYMBOLS);
    let jobs = samplers.len() * chunks_per_point;
    let counts = par::try_map_indexed(jobs, |job| {
        let (point, chunk) = (job / chunks_per_point, job % chunks_per_point);
        let size = CHUNK_SYMBOLS.min(plan.symbols_per_point - chunk * CHUNK_SYMBOLS);
        let mut rng = SimRng::stream(plan.seed, &format!("ser/{point}/{chunk}"));
        simulate_errors(link, receiver, &samplers[point], size, &mut rng)
    })?;
    Ok(plan
        .ebn0_grid
        .iter()
        .enumerate()
        .map(|(point, &ebn0_db)| {
            let mut total = ErrorCounts::default();
            for c in &counts[point * chunks_per_point..(point + 1) * chunks_per_point] {
                total.add(*c);
            }
            SerPoint {
                ebn0_db,
                ser: total.ser(),
                ber: total.ber(k),
                n_symbols: total.symbols,
                symbol_errors: total.symbol_errors,
                bit_errors: total.bit_errors,
                seed: plan.seed,
            }
        })
        .collect())
}
