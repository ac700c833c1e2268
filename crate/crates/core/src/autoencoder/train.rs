use rand::seq::SliceRandom;

use super::model::{AeModel, Codebook, Link};
use crate::channel::{ChannelSampler, ChannelSpec};
use crate::error::{Error, Result};
use crate::nn::{softmax_cross_entropy, AdamState, Network, PowerNorm, Tensor};
use crate::rng::SimRng;

/// Training setup for the (n, k) autoencoder.
#[derive(Debug, Clone, PartialEq)]
pub struct AeConfig {
    pub n: usize,
    pub k: usize,
    pub train_ebn0_db: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Gradient steps per epoch; total steps = `epochs × steps_per_epoch`.
    pub steps_per_epoch: usize,
    /// Interference exponent seen during training. `None` trains on plain
    /// AWGN (blind training).
    pub train_alpha: Option<f64>,
    pub m_users: usize,
}

impl Default for AeConfig {
    fn default() -> Self {
        AeConfig {
            n: 4,
            k: 4,
            train_ebn0_db: 7.0,
            learning_rate: 0.001,
            batch_size: 256,
            epochs: 100,
            steps_per_epoch: 100,
            train_alpha: None,
            m_users: 2,
        }
    }
}

impl AeConfig {
    pub fn messages(&self) -> usize {
        1 << self.k
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.k == 0 || self.k > 16 {
            return Err(Error::Config(format!("unsupported (n, k) = ({}, {})", self.n, self.k)));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        if self.batch_size == 0 || self.epochs == 0 || self.steps_per_epoch == 0 {
            return Err(Error::Config("batch size, epochs and steps per epoch must be ≥ 1".into()));
        }
        if self.m_users == 0 {
            return Err(Error::Config("m_users must be ≥ 1".into()));
        }
        self.training_channel(0)?;
        Ok(())
    }

    /// Channel used while training: the interference channel when
    /// `train_alpha` is set, AWGN otherwise.
    pub fn training_channel(&self, seed: u64) -> Result<ChannelSpec> {
        match self.train_alpha {
            Some(alpha) => ChannelSpec::new(self.m_users, alpha, self.train_ebn0_db, self.n, self.k, seed),
            None => ChannelSpec::awgn(self.train_ebn0_db, self.n, self.k, seed),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub model: AeModel,
    /// Mean cross-entropy per epoch.
    pub epoch_losses: Vec<f64>,
}

/// Messages for one batch: every message `batch/M` times, the remainder
/// drawn uniformly, then shuffled.
pub fn batch_messages(batch_size: usize, messages: usize, rng: &mut SimRng) -> Vec<usize> {
    let mut batch: Vec<usize> = (0..batch_size / messages).flat_map(|_| 0..messages).collect();
    while batch.len() < batch_size {
        batch.push(rng.below(messages));
    }
    batch.shuffle(rng);
    batch
}

/// Received vectors for user 1 of a batch. Each other user `u` sends a
/// uniform random message from `interferers[u]`.
pub(crate) fn received_batch(
    codebook: &Codebook,
    interferers: &[Codebook],
    messages: &[usize],
    sampler: &ChannelSampler,
    rng: &mut SimRng,
) -> Tensor {
    let dim = codebook.dim();
    let mut ys = Tensor::zeros(dim, messages.len());
    let mut y = vec![0.0; dim];
    let mut words: Vec<&[f64]> = Vec::with_capacity(interferers.len());
    for (b, &s) in messages.iter().enumerate() {
        words.clear();
        for cb in interferers.iter().take(sampler.m.saturating_sub(1)) {
            words.push(cb.word(rng.below(cb.len())));
        }
        sampler.receive_into(codebook.word(s), &words, rng, &mut y);
        for (i, &v) in y.iter().enumerate() {
            ys.set(i, b, v);
        }
    }
    ys
}

/// End-to-end training through the channel. Gradients flow from the
/// receiver through the channel (identity w.r.t. the desired codeword,
/// interferers held constant) into the transmitter.
pub fn train_end_to_end(config: &AeConfig, rng: &mut SimRng) -> Result<TrainedModel> {
    config.validate()?;
    let sampler = config.training_channel(0)?.sampler();
    let mut model = AeModel::new(config.n, config.k, rng)?;
    let m = config.messages();
    let (tx, rx) = model.parts_mut();
    let mut tx_opt = AdamState::new(config.learning_rate, tx.param_count());
    let mut rx_opt = AdamState::new(config.learning_rate, rx.param_count());
    let eye = Tensor::identity(m);
    let mut norm = PowerNorm::default();
    let mut epoch_losses = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        let mut total = 0.0;
        for _ in 0..config.steps_per_epoch {
            tx.zero_grad();
            rx.zero_grad();
            let z = tx.forward(&eye)?;
            let x = norm.forward(&z)?;
            let codebook = Codebook::from_tensor(&x);

            let messages = batch_messages(config.batch_size, m, rng);
            let interferers = vec![codebook.clone(); sampler.m.saturating_sub(1)];
            let ys = received_batch(&codebook, &interferers, &messages, &sampler, rng);
            let probs = rx.forward(&ys)?;
            let (loss, grad_logits) = softmax_cross_entropy(&probs, &messages)?;
            if !loss.is_finite() {
                return Err(Error::Divergence {
                    epoch,
                    context: String::new(),
                });
            }
            total += loss;
            let grad_y = rx.backward_logits(&grad_logits)?;

            // the same codeword feeds every copy of its message
            let mut grad_x = Tensor::zeros(x.rows(), m);
            for (b, &s) in messages.iter().enumerate() {
                for i in 0..x.rows() {
                    grad_x.set(i, s, grad_x.get(i, s) + grad_y.get(i, b));
                }
            }
            let grad_z = norm.backward(&grad_x)?;
            tx.backward(&grad_z)?;

            step(&mut tx_opt, tx, epoch)?;
            step(&mut rx_opt, rx, epoch)?;
        }
        let mean = total / config.steps_per_epoch as f64;
        log::debug!("epoch {epoch}: loss {mean:.6}");
        epoch_losses.push(mean);
    }
    tx.clear_cache();
    rx.clear_cache();
    Ok(TrainedModel { model, epoch_losses })
}

fn step(opt: &mut AdamState, net: &mut Network, epoch: usize) -> Result<()> {
    opt.step_layers(net.layers_mut()).map_err(|e| match e {
        Error::NonFinite { layer } => Error::Divergence {
            epoch,
            context: format!(" (non-finite gradient in layer {layer})"),
        },
        other => other,
    })
}

/// Receiver fine-tuning settings with the transmitter frozen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptSettings {
    pub steps: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
}

/// Fine-tunes a copy of `receiver` on transmissions over `link` through the
/// channel described by `sampler`; the transmitters stay frozen.
pub fn adapt_receiver(
    link: &Link,
    receiver: &Network,
    sampler: &ChannelSampler,
    settings: &AdaptSettings,
    rng: &mut SimRng,
) -> Result<Network> {
    let mut rx = receiver.clone();
    if settings.steps == 0 {
        return Ok(rx);
    }
    let mut opt = AdamState::new(settings.learning_rate, rx.param_count());
    for step_index in 0..settings.steps {
        rx.zero_grad();
        let messages = batch_messages(settings.batch_size, link.codebook.len(), rng);
        let ys = received_batch(&link.codebook, &link.interferers, &messages, sampler, rng);
        let probs = rx.forward(&ys)?;
        let (loss, grad_logits) = softmax_cross_entropy(&probs, &messages)?;
        if !loss.is_finite() {
            return Err(Error::Divergence {
                epoch: step_index,
                context: " during receiver adaptation".into(),
            });
        }
        rx.backward_logits(&grad_logits)?;
        step(&mut opt, &mut rx, step_index)?;
    }
    rx.clear_cache();
    Ok(rx)
}

/// Fine-tunes a receiver on known (message, received vector) pairs, e.g.
/// pilots.
pub fn fine_tune_on_samples(
    receiver: &Network,
    messages: &[usize],
    received: &Tensor,
    steps: usize,
    learning_rate: f64,
) -> Result<Network> {
    let mut rx = receiver.clone();
    if steps == 0 || messages.is_empty() {
        return Ok(rx);
    }
    let mut opt = AdamState::new(learning_rate, rx.param_count());
    for step_index in 0..steps {
        rx.zero_grad();
        let probs = rx.forward(received)?;
        let (_, grad_logits) = softmax_cross_entropy(&probs, messages)?;
        rx.backward_logits(&grad_logits)?;
        step(&mut opt, &mut rx, step_index)?;
    }
    rx.clear_cache();
    Ok(rx)
}

/// Joint training of `m_users` autoencoder pairs over the interference
/// channel. Each receiver sees its own transmitter plus the others'
/// codewords; gradients flow into every transmitter through both its own
/// and the other users' links.
pub fn train_joint(config: &AeConfig, rng: &mut SimRng) -> Result<Vec<TrainedModel>> {
    config.validate()?;
    let users = config.m_users;
    let sampler = config.training_channel(0)?.sampler();
    let coefficient = if users > 1 { sampler.coefficient } else { 0.0 };
    let m = config.messages();
    let mut models = (0..users)
        .map(|_| AeModel::new(config.n, config.k, rng))
        .collect::<Result<Vec<_>>>()?;
    let mut opts: Vec<(AdamState, AdamState)> = models
        .iter()
        .map(|mo| {
            (
                AdamState::new(config.learning_rate, mo.transmitter().param_count()),
                AdamState::new(config.learning_rate, mo.receiver().param_count()),
            )
        })
        .collect();
    let eye = Tensor::identity(m);
    let mut norms = vec![PowerNorm::default(); users];
    let mut losses = vec![Vec::with_capacity(config.epochs); users];
    let dim = 2 * config.n;

    for epoch in 0..config.epochs {
        let mut totals = vec![0.0; users];
        for _ in 0..config.steps_per_epoch {
            let mut codebooks = Vec::with_capacity(users);
            for (u, model) in models.iter_mut().enumerate() {
                let (tx, rx) = model.parts_mut();
                tx.zero_grad();
                rx.zero_grad();
                let z = tx.forward(&eye)?;
                codebooks.push(Codebook::from_tensor(&norms[u].forward(&z)?));
            }
            let messages: Vec<Vec<usize>> = (0..users).map(|_| batch_messages(config.batch_size, m, rng)).collect();
            let mut grad_x: Vec<Tensor> = (0..users).map(|_| Tensor::zeros(dim, m)).collect();
            for u in 0..users {
                let mut ys = Tensor::zeros(dim, config.batch_size);
                for b in 0..config.batch_size {
                    for i in 0..dim {
                        let mut v = codebooks[u].word(messages[u][b])[i];
                        for o in (0..users).filter(|&o| o != u) {
                            v += coefficient * codebooks[o].word(messages[o][b])[i];
                        }
                        ys.set(i, b, v + rng.normal(sampler.sigma));
                    }
                }
                let rx = models[u].parts_mut().1;
                let probs = rx.forward(&ys)?;
                let (loss, grad_logits) = softmax_cross_entropy(&probs, &messages[u])?;
                if !loss.is_finite() {
                    return Err(Error::Divergence {
                        epoch,
                        context: format!(" (user {u})"),
                    });
                }
                totals[u] += loss;
                let grad_y = rx.backward_logits(&grad_logits)?;
                for b in 0..config.batch_size {
                    for (o, gx) in grad_x.iter_mut().enumerate() {
                        let scale = if o == u { 1.0 } else { coefficient };
                        if scale == 0.0 {
                            continue;
                        }
                        let s = messages[o][b];
                        for i in 0..dim {
                            gx.set(i, s, gx.get(i, s) + scale * grad_y.get(i, b));
                        }
                    }
                }
            }
            for (u, model) in models.iter_mut().enumerate() {
                let grad_z = norms[u].backward(&grad_x[u])?;
                let (tx, rx) = model.parts_mut();
                tx.backward(&grad_z)?;
                step(&mut opts[u].0, tx, epoch)?;
                step(&mut opts[u].1, rx, epoch)?;
            }
        }
        for u in 0..users {
            losses[u].push(totals[u] / config.steps_per_epoch as f64);
        }
    }
    Ok(models
        .into_iter()
        .zip(losses)
        .map(|(mut model, epoch_losses)| {
            let (tx, rx) = model.parts_mut();
            tx.clear_cache();
            rx.clear_cache();
            TrainedModel { model, epoch_losses }
        })
        .collect())
}
