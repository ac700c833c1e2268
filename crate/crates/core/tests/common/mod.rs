//! Numeric oracles shared by the integration tests.
#![allow(dead_code)]

use aeic::nn::{
    power_normalize, softmax, softmax_cross_entropy, Activation, AdamState, DenseLayer, Network, PowerNorm, Tensor,
};
use aeic::rng::SimRng;

pub const FD_STEP: f64 = 1e-5;
pub const FD_TOLERANCE: f64 = 1e-4;

/// Symmetric relative error with a small absolute floor so that gradients
/// that are zero up to rounding compare equal.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

/// How the output of a random network is turned into a scalar loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Head {
    /// Softmax output layer with cross-entropy against fixed targets.
    SoftmaxCrossEntropy,
    /// Non-softmax output, fixed linear functional of the outputs.
    Linear,
    /// Non-softmax output, power-normalized, then a fixed linear functional.
    Normalized,
}

pub struct GradientCase {
    pub net: Network,
    pub head: Head,
    pub input: Tensor,
    pub targets: Vec<usize>,
    pub weights: Tensor,
}

/// Random small network (1–3 layers, widths 2–6, batch 1–4) with a random
/// loss head.
pub fn random_case(seed: u64) -> GradientCase {
    let mut rng = SimRng::stream(seed, "gradcheck");
    let hidden = [Activation::Relu, Activation::Elu, Activation::Tanh, Activation::Linear];
    let head = [Head::SoftmaxCrossEntropy, Head::Linear, Head::Normalized][rng.below(3)];
    let depth = 1 + rng.below(3);
    let mut dims = vec![2 + rng.below(5)];
    for _ in 0..depth {
        dims.push(2 + rng.below(5));
    }
    let layers = (0..depth)
        .map(|l| {
            let act = if l + 1 == depth {
                match head {
                    Head::SoftmaxCrossEntropy => Activation::Softmax,
                    Head::Linear => hidden[rng.below(hidden.len())],
                    // a ReLU output can be all zero, which cannot be normalized
                    Head::Normalized => hidden[1 + rng.below(hidden.len() - 1)],
                }
            } else {
                hidden[rng.below(hidden.len())]
            };
            let mut layer = DenseLayer::new(dims[l], dims[l + 1], act, &mut rng);
            // nonzero biases exercise the bias path
            for b in layer.bias_mut().values_mut() {
                *b = rng.normal(0.3);
            }
            layer
        })
        .collect();
    let net = Network::new(layers).expect("consistent dims");
    let batch = 1 + rng.below(4);
    let input = Tensor::from_vec(dims[0], batch, (0..dims[0] * batch).map(|_| rng.normal(1.0)).collect()).unwrap();
    let out = dims[depth];
    let targets = (0..batch).map(|_| rng.below(out)).collect();
    let weights = Tensor::from_vec(out, batch, (0..out * batch).map(|_| rng.normal(1.0)).collect()).unwrap();
    GradientCase {
        net,
        head,
        input,
        targets,
        weights,
    }
}

impl GradientCase {
    fn loss(&self, net: &Network, input: &Tensor) -> f64 {
        let out = net.infer(input).unwrap();
        match self.head {
            Head::SoftmaxCrossEntropy => softmax_cross_entropy(&out, &self.targets).unwrap().0,
            Head::Linear => dot(&out, &self.weights),
            Head::Normalized => dot(&power_normalize(&out).unwrap(), &self.weights),
        }
    }

    /// Analytic gradients (parameters layer by layer — weights then bias —
    /// followed by the input gradient).
    fn analytic(&self) -> Vec<f64> {
        let mut net = self.net.clone();
        net.zero_grad();
        let out = net.forward(&self.input).unwrap();
        let grad_in = match self.head {
            Head::SoftmaxCrossEntropy => {
                let (_, g) = softmax_cross_entropy(&out, &self.targets).unwrap();
                net.backward_logits(&g).unwrap()
            }
            Head::Linear => net.backward(&self.weights).unwrap(),
            Head::Normalized => {
                let mut norm = PowerNorm::default();
                norm.forward(&out).unwrap();
                let g = norm.backward(&self.weights).unwrap();
                net.backward(&g).unwrap()
            }
        };
        let mut grads = Vec::new();
        for layer in net.layers() {
            grads.extend_from_slice(layer.weights().grad().unwrap());
            grads.extend_from_slice(layer.bias().grad().unwrap());
        }
        grads.extend_from_slice(grad_in.values());
        grads
    }

    /// Central differences in the same order as [`Self::analytic`].
    fn numeric(&self) -> Vec<f64> {
        let mut grads = Vec::new();
        let mut net = self.net.clone();
        for l in 0..net.layers().len() {
            for which in 0..2 {
                let len = param(&mut net, l, which).len();
                for i in 0..len {
                    let orig = param(&mut net, l, which)[i];
                    param(&mut net, l, which)[i] = orig + FD_STEP;
                    let up = self.loss(&net, &self.input);
                    param(&mut net, l, which)[i] = orig - FD_STEP;
                    let down = self.loss(&net, &self.input);
                    param(&mut net, l, which)[i] = orig;
                    grads.push((up - down) / (2.0 * FD_STEP));
                }
            }
        }
        let mut input = self.input.clone();
        for i in 0..input.values().len() {
            let orig = input.values()[i];
            input.values_mut()[i] = orig + FD_STEP;
            let up = self.loss(&net, &input);
            input.values_mut()[i] = orig - FD_STEP;
            let down = self.loss(&net, &input);
            input.values_mut()[i] = orig;
            grads.push((up - down) / (2.0 * FD_STEP));
        }
        grads
    }

    /// Largest relative error between analytic and numeric gradients.
    pub fn max_relative_error(&self) -> f64 {
        self.analytic()
            .iter()
            .zip(self.numeric())
            .map(|(&a, n)| relative_error(a, n))
            .fold(0.0, f64::max)
    }
}

fn param(net: &mut Network, layer: usize, which: usize) -> &mut [f64] {
    let l = &mut net.layers_mut()[layer];
    if which == 0 {
        l.weights_mut().values_mut()
    } else {
        l.bias_mut().values_mut()
    }
}

fn dot(a: &Tensor, b: &Tensor) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| x * y).sum()
}

/// Worst relative gradient error over `count` random networks.
pub fn gradient_check(count: u64) -> (f64, u64) {
    (0..count)
        .map(|seed| (random_case(seed).max_relative_error(), seed))
        .fold((0.0, 0), |acc, x| if x.0 > acc.0 { x } else { acc })
}

/// Steps Adam (default hyper-parameters, learning rate `lr`) needs to drive
/// x² from x = 1 below `target`, or `None` within `max_steps`.
pub fn adam_quadratic_steps(lr: f64, target: f64, max_steps: usize) -> Option<usize> {
    let mut x = [1.0];
    let mut opt = AdamState::new(lr, 1);
    for step in 1..=max_steps {
        let g = [2.0 * x[0]];
        opt.step(&mut x, &g).unwrap();
        if x[0] * x[0] < target {
            return Some(step);
        }
    }
    None
}

/// Checks softmax (finite, positive, sums to 1, shift invariant) and power
/// normalization (squared norm n, idempotent) on `count` random inputs,
/// including extreme magnitudes. Returns the first violation.
pub fn check_invariants(count: usize) -> Result<(), String> {
    let mut rng = SimRng::stream(7, "invariants");
    for i in 0..count {
        let len = 2 + rng.below(15);
        let scale = [1e-3, 1.0, 30.0, 800.0][i % 4];
        let v: Vec<f64> = (0..len).map(|_| rng.normal(scale)).collect();
        let p = softmax(&Tensor::column(&v));
        let sum: f64 = p.values().iter().sum();
        if !p.values().iter().all(|x| x.is_finite() && *x >= 0.0) || (sum - 1.0).abs() > 1e-12 {
            return Err(format!("softmax input {i}: sum {sum}"));
        }
        let shift = rng.normal(50.0);
        let shifted = softmax(&Tensor::column(&v.iter().map(|x| x + shift).collect::<Vec<_>>()));
        if p.values().iter().zip(shifted.values()).any(|(a, b)| (a - b).abs() > 1e-9) {
            return Err(format!("softmax input {i}: not shift invariant"));
        }

        let dim = 2 * (1 + rng.below(6));
        let z: Vec<f64> = (0..dim).map(|_| rng.normal(scale)).collect();
        let x = power_normalize(&Tensor::column(&z)).map_err(|e| e.to_string())?;
        let energy: f64 = x.values().iter().map(|v| v * v).sum();
        let n = dim as f64 / 2.0;
        if (energy - n).abs() > 1e-10 * n {
            return Err(format!("normalize input {i}: energy {energy}, want {n}"));
        }
        let again = power_normalize(&x).map_err(|e| e.to_string())?;
        if x.values().iter().zip(again.values()).any(|(a, b)| (a - b).abs() > 1e-12) {
            return Err(format!("normalize input {i}: not idempotent"));
        }
    }
    Ok(())
}
