use crate::error::{Error, Result};
use crate::nn::{power_normalize, Activation, DenseLayer, Network, Tensor};
use crate::rng::SimRng;

/// The (n, k) autoencoder: a transmitter mapping one-hot messages to
/// power-normalized `2n`-vectors, and a receiver mapping received vectors
/// to message probabilities.
///
/// ```text
/// transmitter: M → Dense+ELU → M → Dense+Linear → 2n → normalize
/// receiver:    2n → Dense+ReLU → M → Dense+Softmax → M
/// ```
#[derive(Debug, Clone)]
pub struct AeModel {
    n: usize,
    k: usize,
    transmitter: Network,
    receiver: Network,
}

impl AeModel {
    pub fn new(n: usize, k: usize, rng: &mut SimRng) -> Result<Self> {
        if n == 0 || k == 0 || k > 16 {
            return Err(Error::Config(format!("unsupported (n, k) = ({n}, {k})")));
        }
        let m = 1usize << k;
        let transmitter = Network::new(vec![
            DenseLayer::new(m, m, Activation::Elu, rng),
            DenseLayer::new(m, 2 * n, Activation::Linear, rng),
        ])?;
        let receiver = Network::new(vec![
            DenseLayer::new(2 * n, m, Activation::Relu, rng),
            DenseLayer::new(m, m, Activation::Softmax, rng),
        ])?;
        Ok(AeModel {
            n,
            k,
            transmitter,
            receiver,
        })
    }

    /// Assembles a model, checking the layer stack against the fixed layout.
    pub fn from_parts(n: usize, k: usize, transmitter: Network, receiver: Network) -> Result<Self> {
        let m = 1usize << k;
        let layout = |net: &Network| -> Vec<(usize, usize, Activation)> {
            net.layers()
                .iter()
                .map(|l| (l.in_dim(), l.out_dim(), l.activation()))
                .collect()
        };
        let tx_expected = vec![(m, m, Activation::Elu), (m, 2 * n, Activation::Linear)];
        let rx_expected = vec![(2 * n, m, Activation::Relu), (m, m, Activation::Softmax)];
        if layout(&transmitter) != tx_expected {
            return Err(Error::dims(format!("transmitter {tx_expected:?}"), format!("{:?}", layout(&transmitter))));
        }
        if layout(&receiver) != rx_expected {
            return Err(Error::dims(format!("receiver {rx_expected:?}"), format!("{:?}", layout(&receiver))));
        }
        Ok(AeModel {
            n,
            k,
            transmitter,
            receiver,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Message count `M = 2^k`.
    pub fn messages(&self) -> usize {
        1 << self.k
    }

    pub fn transmitter(&self) -> &Network {
        &self.transmitter
    }

    pub fn receiver(&self) -> &Network {
        &self.receiver
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut Network, &mut Network) {
        (&mut self.transmitter, &mut self.receiver)
    }

    /// Same transmitter, different receiver.
    pub fn with_receiver(&self, receiver: Network) -> Result<Self> {
        AeModel::from_parts(self.n, self.k, self.transmitter.clone(), receiver)
    }

    pub fn encode_message(&self, s: usize) -> Result<Vec<f64>> {
        if s >= self.messages() {
            return Err(Error::Index {
                index: s,
                limit: self.messages(),
            });
        }
        let mut one_hot = vec![0.0; self.messages()];
        one_hot[s] = 1.0;
        let z = self.transmitter.infer(&Tensor::column(&one_hot))?;
        Ok(power_normalize(&z)?.into_values())
    }

    /// All `M` codewords as columns of a `2n × M` tensor.
    pub fn codebook(&self) -> Result<Codebook> {
        let z = self.transmitter.infer(&Tensor::identity(self.messages()))?;
        Ok(Codebook::from_tensor(&power_normalize(&z)?))
    }

    pub fn decode(&self, y: &[f64]) -> Result<(Vec<f64>, usize)> {
        if y.len() != 2 * self.n {
            return Err(Error::dims(format!("received vector of length {}", 2 * self.n), format!("{}", y.len())));
        }
        let probs = self.receiver.infer(&Tensor::column(y))?.into_values();
        let s_hat = argmax(&probs);
        Ok((probs, s_hat))
    }

    pub fn decode_batch(&self, ys: &Tensor) -> Result<Vec<usize>> {
        decode_with(&self.receiver, ys)
    }
}

/// Transmitted vectors for every message, one `Vec` per message.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    words: Vec<Vec<f64>>,
}

impl Codebook {
    pub fn from_tensor(t: &Tensor) -> Self {
        Codebook { words: t.columns() }
    }

    pub fn word(&self, s: usize) -> &[f64] {
        &self.words[s]
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.words.first().map_or(0, Vec::len)
    }
}

/// A user's codebook together with the codebooks of the users interfering
/// with it, one per interfering user.
#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub codebook: Codebook,
    pub interferers: Vec<Codebook>,
}

impl Link {
    /// Symmetric channel: all `m_users − 1` interferers use the desired
    /// user's own transmitter.
    pub fn shared(model: &AeModel, m_users: usize) -> Result<Self> {
        let codebook = model.codebook()?;
        Ok(Link {
            interferers: vec![codebook.clone(); m_users.saturating_sub(1)],
            codebook,
        })
    }

    /// Interferers use the partners' own transmitters.
    pub fn with_partners(model: &AeModel, partners: &[&AeModel]) -> Result<Self> {
        Ok(Link {
            codebook: model.codebook()?,
            interferers: partners.iter().map(|p| p.codebook()).collect::<Result<_>>()?,
        })
    }

    pub fn users(&self) -> usize {
        self.interferers.len() + 1
    }
}

/// Hard decisions of a receiver for a batch of received columns. Ties go to
/// the lowest index.
pub fn decode_with(receiver: &Network, ys: &Tensor) -> Result<Vec<usize>> {
    // argmax over logits equals argmax over softmax probabilities
    let logits = receiver.infer_logits(ys)?;
    Ok((0..logits.cols())
        .map(|j| {
            let mut best = 0;
            for i in 1..logits.rows() {
                if logits.get(i, j) > logits.get(best, j) {
                    best = i;
                }
            }
            best
        })
        .collect())
}

pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Natural binary labeling, most significant bit first.
pub fn bits_from_message(s: usize, k: usize) -> Vec<u8> {
    (0..k).rev().map(|b| ((s >> b) & 1) as u8).collect()
}

/// Hamming distance between the natural-binary labels of two messages.
pub fn bit_errors(a: usize, b: usize) -> u32 {
    (a ^ b).count_ones()
}
