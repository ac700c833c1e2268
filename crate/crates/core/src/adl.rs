//! Pilot-driven estimation of the interference exponent α.
//!
//! A bank of receivers, one per candidate α, is adapted offline with the
//! transmitter frozen. Each candidate is scored on received pilots by the
//! reciprocal of its pilot BER; the scores are max-normalized and α̂ is the
//! mean of the candidates within `confidence_fraction` of the peak. The
//! receiver is then re-adapted at α̂ and decodes the payload.

use std::fmt::Write as _;

use crate::autoencoder::{
    adapt_receiver, decode_with, fine_tune_on_samples, received_batch, AdaptSettings, AeModel, ErrorCounts, Link,
};
use crate::channel::ChannelSpec;
use crate::error::{Error, Result};
use crate::nn::{Network, Tensor};
use crate::par;
use crate::rng::SimRng;

/// Estimator settings.
#[derive(Debug, Clone, PartialEq)]
pub struct AdlConfig {
    pub grid_min: f64,
    pub grid_max: f64,
    pub grid_step: f64,
    /// Candidates with normalized reward ≥ 1 − this qualify.
    pub confidence_fraction: f64,
    pub group_count: usize,
    /// Pilots / (pilots + payload) within each group.
    pub pilot_ratio: f64,
    pub symbols_per_group: usize,
    /// Offline adaptation steps per candidate (and for the final update).
    pub adapt_steps: usize,
    pub adapt_batch: usize,
    pub adapt_lr: f64,
    /// Extra fine-tuning steps on the received pilots after the update.
    pub adapt_steps_online: usize,
}

impl Default for AdlConfig {
    fn default() -> Self {
        AdlConfig {
            grid_min: 0.1,
            grid_max: 3.0,
            grid_step: 0.1,
            confidence_fraction: 0.40,
            group_count: 30,
            pilot_ratio: 0.01,
            symbols_per_group: 10_000,
            adapt_steps: 2_000,
            adapt_batch: 256,
            adapt_lr: 0.001,
            adapt_steps_online: 0,
        }
    }
}

impl AdlConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.grid_step > 0.0) || !(self.grid_min >= 0.0) || !(self.grid_max >= self.grid_min) {
            return Err(Error::Config(format!(
                "invalid α grid {}:{}:{}",
                self.grid_min, self.grid_step, self.grid_max
            )));
        }
        if !(self.confidence_fraction > 0.0 && self.confidence_fraction < 1.0) {
            return Err(Error::Config("confidence_fraction must lie in (0, 1)".into()));
        }
        if self.group_count == 0 {
            return Err(Error::Config("group_count must be ≥ 1".into()));
        }
        if !(self.pilot_ratio > 0.0 && self.pilot_ratio <= 1.0) {
            return Err(Error::Config("pilot_ratio must lie in (0, 1]".into()));
        }
        if self.pilots_per_group() == 0 {
            return Err(Error::Config(format!(
                "{} symbols per group at pilot ratio {} leaves no pilots",
                self.symbols_per_group, self.pilot_ratio
            )));
        }
        if self.adapt_batch == 0 || !(self.adapt_lr > 0.0) {
            return Err(Error::Config("adaptation batch and learning rate must be positive".into()));
        }
        Ok(())
    }

    /// Candidate α values, ascending, rounded to 1e-9 to absorb step drift.
    pub fn grid(&self) -> Vec<f64> {
        let count = ((self.grid_max - self.grid_min) / self.grid_step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| ((self.grid_min + i as f64 * self.grid_step) * 1e9).round() / 1e9)
            .collect()
    }

    pub fn pilots_per_group(&self) -> usize {
        (self.symbols_per_group as f64 * self.pilot_ratio).round() as usize
    }

    pub fn payload_per_group(&self) -> usize {
        self.symbols_per_group.saturating_sub(self.pilots_per_group())
    }

    fn adapt_settings(&self, steps: usize) -> AdaptSettings {
        AdaptSettings {
            steps,
            batch_size: self.adapt_batch,
            learning_rate: self.adapt_lr,
        }
    }
}

/// Known pilot messages of one group and what the receiver saw.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotFrame {
    pub pilot_messages: Vec<usize>,
    /// One received 2n-vector per column.
    pub received: Tensor,
    pub group_index: usize,
}

impl PilotFrame {
    pub fn new(pilot_messages: Vec<usize>, received: Tensor, group_index: usize) -> Result<Self> {
        if pilot_messages.is_empty() || pilot_messages.len() != received.cols() {
            return Err(Error::Argument(format!(
                "frame {group_index}: {} pilot messages vs {} received vectors",
                pilot_messages.len(),
                received.cols()
            )));
        }
        Ok(PilotFrame {
            pilot_messages,
            received,
            group_index,
        })
    }

    pub fn len(&self) -> usize {
        self.pilot_messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pilot_messages.is_empty()
    }
}

/// A received transmission: pilot frames plus the payload to decode.
#[derive(Debug, Clone, PartialEq)]
pub struct Stream {
    pub frames: Vec<PilotFrame>,
    pub payload_messages: Vec<usize>,
    pub payload_received: Tensor,
}

/// Sends `config.group_count` groups over `link` through `channel`. Each
/// group starts with its pilots (messages cycling through the codebook)
/// followed by uniform random payload.
pub fn transmit_stream(link: &Link, channel: &ChannelSpec, config: &AdlConfig, rng: &mut SimRng) -> Result<Stream> {
    config.validate()?;
    channel.validate()?;
    let sampler = channel.sampler();
    let m = link.codebook.len();
    let ppg = config.pilots_per_group();
    let payload_len = config.payload_per_group();
    let mut frames = Vec::with_capacity(config.group_count);
    let mut payload_messages = Vec::with_capacity(payload_len * config.group_count);
    let mut payload_columns = Vec::with_capacity(config.group_count);
    for g in 0..config.group_count {
        let pilots: Vec<usize> = (0..ppg).map(|i| (g * ppg + i) % m).collect();
        let received = received_batch(&link.codebook, &link.interferers, &pilots, &sampler, rng);
        frames.push(PilotFrame::new(pilots, received, g)?);
        let payload: Vec<usize> = (0..payload_len).map(|_| rng.below(m)).collect();
        payload_columns.push(received_batch(&link.codebook, &link.interferers, &payload, &sampler, rng));
        payload_messages.extend(payload);
    }
    let payload_received = concat_columns(&payload_columns, link.codebook.dim())?;
    Ok(Stream {
        frames,
        payload_messages,
        payload_received,
    })
}

fn concat_columns(parts: &[Tensor], rows: usize) -> Result<Tensor> {
    let cols: usize = parts.iter().map(Tensor::cols).sum();
    let mut out = Tensor::zeros(rows, cols);
    let mut offset = 0;
    for t in parts {
        for c in 0..t.cols() {
            for r in 0..rows {
                out.set(r, offset + c, t.get(r, c));
            }
        }
        offset += t.cols();
    }
    Ok(out)
}

/// Receivers adapted to each candidate α, in grid order.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderBank {
    pub grid: Vec<f64>,
    pub receivers: Vec<Network>,
}

impl DecoderBank {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Index of the candidate closest to `alpha` (lower one on ties).
    pub fn nearest(&self, alpha: f64) -> usize {
        let mut best = 0;
        for (i, &g) in self.grid.iter().enumerate() {
            if (g - alpha).abs() < (self.grid[best] - alpha).abs() {
                best = i;
            }
        }
        best
    }
}

/// Adapts the base receiver to the interference channel at every candidate
/// α at `ebn0_db`, with all `m_users − 1` interferers using the base
/// transmitter.
pub fn build_decoder_bank(
    base: &AeModel,
    config: &AdlConfig,
    ebn0_db: f64,
    m_users: usize,
    master_seed: u64,
) -> Result<DecoderBank> {
    config.validate()?;
    let grid = config.grid();
    let link = Link::shared(base, m_users)?;
    let settings = config.adapt_settings(config.adapt_steps);
    let receivers = par::try_map_indexed(grid.len(), |i| {
        let sampler = ChannelSpec::new(m_users, grid[i], ebn0_db, base.n(), base.k(), master_seed)?.sampler();
        let mut rng = SimRng::stream(master_seed, &format!("bank/{i}"));
        adapt_receiver(&link, base.receiver(), &sampler, &settings, &mut rng).map_err(|e| match e {
            Error::Divergence { epoch, context } => Error::Divergence {
                epoch,
                context: format!("{context} (candidate α = {})", grid[i]),
            },
            other => other,
        })
    })?;
    Ok(DecoderBank { grid, receivers })
}

/// Pilot decision errors of `receiver` over all `frames`.
pub fn pilot_errors(receiver: &Network, frames: &[PilotFrame]) -> Result<ErrorCounts> {
    let mut total = ErrorCounts::default();
    for f in frames {
        let decided = decode_with(receiver, &f.received)?;
        total.add(ErrorCounts::tally(&f.pilot_messages, &decided));
    }
    Ok(total)
}

/// Reciprocal of the pilot BER of `receiver` over `frames`, with the BER
/// floored at half an error.
pub fn compute_reward(receiver: &Network, frames: &[PilotFrame], k: usize) -> Result<f64> {
    if frames.is_empty() {
        return Err(Error::Argument("no pilot frames to score".into()));
    }
    let counts = pilot_errors(receiver, frames)?;
    let bits = (counts.symbols * k) as f64;
    Ok(1.0 / counts.ber(k).max(0.5 / bits))
}

/// Divides every reward by the largest one.
pub fn normalize_rewards(raw: &[f64]) -> Result<Vec<f64>> {
    if raw.is_empty() {
        return Err(Error::Argument("empty reward list".into()));
    }
    if raw.iter().any(|r| !r.is_finite() || *r < 0.0) {
        return Err(Error::Degenerate("rewards must be finite and non-negative"));
    }
    let peak = raw.iter().copied().fold(0.0, f64::max);
    if peak <= 0.0 {
        return Err(Error::Degenerate("all rewards are zero"));
    }
    Ok(raw.iter().map(|r| r / peak).collect())
}

/// Raw and normalized reward per candidate α.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardTable {
    pub grid: Vec<f64>,
    pub raw_rewards: Vec<f64>,
    pub normalized_rewards: Vec<f64>,
}

impl RewardTable {
    pub fn new(grid: Vec<f64>, raw_rewards: Vec<f64>) -> Result<Self> {
        if grid.len() != raw_rewards.len() {
            return Err(Error::dims(format!("{} rewards", grid.len()), raw_rewards.len().to_string()));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Argument("reward grid must be strictly ascending".into()));
        }
        let normalized_rewards = normalize_rewards(&raw_rewards)?;
        Ok(RewardTable {
            grid,
            raw_rewards,
            normalized_rewards,
        })
    }

    /// Candidate with the highest reward (lowest α on ties).
    pub fn argmax(&self) -> f64 {
        self.grid[crate::autoencoder::argmax(&self.normalized_rewards)]
    }

    /// Candidates with normalized reward ≥ `threshold`.
    pub fn qualifying(&self, threshold: f64) -> Vec<f64> {
        self.grid
            .iter()
            .zip(&self.normalized_rewards)
            .filter(|(_, &r)| r >= threshold)
            .map(|(&a, _)| a)
            .collect()
    }

    /// Span of the qualifying set.
    pub fn qualifying_width(&self, threshold: f64) -> f64 {
        let q = self.qualifying(threshold);
        match (q.first(), q.last()) {
            (Some(lo), Some(hi)) => hi - lo,
            _ => 0.0,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("alpha_candidate,raw_reward,normalized_reward\n");
        for ((a, r), nr) in self.grid.iter().zip(&self.raw_rewards).zip(&self.normalized_rewards) {
            let _ = writeln!(s, "{a},{r},{nr}");
        }
        s
    }
}

/// Scores every bank entry on `frames`.
pub fn score_candidates(bank: &DecoderBank, frames: &[PilotFrame], k: usize) -> Result<RewardTable> {
    let raw = par::try_map_indexed(bank.len(), |i| compute_reward(&bank.receivers[i], frames, k))?;
    RewardTable::new(bank.grid.clone(), raw)
}

/// Mean of the grid points whose normalized reward is within
/// `confidence_fraction` of the peak.
pub fn predict_alpha(table: &RewardTable, confidence_fraction: f64) -> f64 {
    let q = table.qualifying(1.0 - confidence_fraction);
    q.iter().sum::<f64>() / q.len() as f64
}

/// Everything the estimator produced for one stream.
#[derive(Debug, Clone)]
pub struct AdlOutcome {
    pub alpha_hat: f64,
    /// α̂ after each group, scored on all groups received so far.
    pub alpha_history: Vec<f64>,
    pub table: RewardTable,
    pub receiver: Network,
    pub decoded: Vec<usize>,
}

impl AdlOutcome {
    pub fn payload_errors(&self, stream: &Stream) -> ErrorCounts {
        ErrorCounts::tally(&stream.payload_messages, &self.decoded)
    }
}

/// Receiver for an assumed α: the nearest bank entry, further adapted to
/// the channel at exactly `alpha`. With the true α this is the known-α
/// reference receiver.
pub fn update_receiver(
    base: &AeModel,
    bank: &DecoderBank,
    alpha: f64,
    channel: &ChannelSpec,
    config: &AdlConfig,
    master_seed: u64,
) -> Result<Network> {
    if bank.is_empty() {
        return Err(Error::Argument("empty decoder bank".into()));
    }
    let start = &bank.receivers[bank.nearest(alpha)];
    let sampler = ChannelSpec::new(channel.m, alpha, channel.ebn0_db, base.n(), base.k(), master_seed)?.sampler();
    let link = Link::shared(base, channel.m)?;
    let mut rng = SimRng::stream(master_seed, "adl/update");
    adapt_receiver(&link, start, &sampler, &config.adapt_settings(config.adapt_steps), &mut rng)
}

/// Estimates α from the stream's pilots, re-adapts the receiver at α̂ and
/// decodes the payload. Only the SNR and user count of `channel` are used;
/// its α is what is being estimated.
pub fn run_adl(
    base: &AeModel,
    bank: &DecoderBank,
    stream: &Stream,
    channel: &ChannelSpec,
    config: &AdlConfig,
    master_seed: u64,
) -> Result<AdlOutcome> {
    config.validate()?;
    if bank.is_empty() {
        return Err(Error::Argument("empty decoder bank".into()));
    }
    if stream.frames.len() < config.group_count || stream.frames.iter().any(|f| f.len() < config.pilots_per_group()) {
        return Err(Error::Config(format!(
            "stream carries {} pilot groups, {} groups of {} pilots required",
            stream.frames.len(),
            config.group_count,
            config.pilots_per_group()
        )));
    }
    let frames = &stream.frames[..config.group_count];
    let mut alpha_history = Vec::with_capacity(frames.len());
    for i in 1..frames.len() {
        let table = score_candidates(bank, &frames[..i], base.k())?;
        alpha_history.push(predict_alpha(&table, config.confidence_fraction));
    }
    let table = score_candidates(bank, frames, base.k())?;
    let alpha_hat = predict_alpha(&table, config.confidence_fraction);
    alpha_history.push(alpha_hat);

    let mut receiver = update_receiver(base, bank, alpha_hat, channel, config, master_seed)?;
    if config.adapt_steps_online > 0 {
        let messages: Vec<usize> = frames.iter().flat_map(|f| f.pilot_messages.iter().copied()).collect();
        let received = concat_columns(
            &frames.iter().map(|f| f.received.clone()).collect::<Vec<_>>(),
            base.n() * 2,
        )?;
        receiver = fine_tune_on_samples(&receiver, &messages, &received, config.adapt_steps_online, config.adapt_lr)?;
    }
    let decoded = decode_with(&receiver, &stream.payload_received)?;
    Ok(AdlOutcome {
        alpha_hat,
        alpha_history,
        table,
        receiver,
        decoded,
    })
}
