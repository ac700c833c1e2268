use std::fmt;
use std::str::FromStr;

use super::Tensor;
use crate::error::Error;

/// ELU slope for negative inputs.
pub const ELU_ALPHA: f64 = 1.0;

/// Element-wise (or, for softmax, column-wise) nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    Relu,
    Elu,
    Tanh,
    Linear,
    /// Normalizes each column to a probability vector.
    Softmax,
}

impl Activation {
    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Elu => "elu",
            Activation::Tanh => "tanh",
            Activation::Linear => "linear",
            Activation::Softmax => "softmax",
        }
    }

    pub fn apply(self, pre: &Tensor) -> Tensor {
        match self {
            Activation::Relu => pre.map(|u| u.max(0.0)),
            Activation::Elu => pre.map(|u| if u > 0.0 { u } else { ELU_ALPHA * u.exp_m1() }),
            Activation::Tanh => pre.map(f64::tanh),
            Activation::Linear => pre.clone(),
            Activation::Softmax => softmax(pre),
        }
    }

    /// Gradient w.r.t. the pre-activation given the gradient w.r.t. the output.
    pub fn backward(self, pre: &Tensor, out: &Tensor, grad_out: &Tensor) -> Tensor {
        let mut g = grad_out.clone();
        match self {
            Activation::Relu => {
                for (gi, &u) in g.values_mut().iter_mut().zip(pre.values()) {
                    if u <= 0.0 {
                        *gi = 0.0;
                    }
                }
            }
            Activation::Elu => {
                for ((gi, &u), &y) in g.values_mut().iter_mut().zip(pre.values()).zip(out.values()) {
                    if u <= 0.0 {
                        // d/du α(eᵘ−1) = y + α
                        *gi *= y + ELU_ALPHA;
                    }
                }
            }
            Activation::Tanh => {
                for (gi, &y) in g.values_mut().iter_mut().zip(out.values()) {
                    *gi *= 1.0 - y * y;
                }
            }
            Activation::Linear => {}
            Activation::Softmax => {
                // dz_i = p_i (g_i − Σ_j p_j g_j), per column
                let (rows, cols) = out.shape();
                for j in 0..cols {
                    let dot: f64 = (0..rows).map(|i| out.get(i, j) * grad_out.get(i, j)).sum();
                    for i in 0..rows {
                        let p = out.get(i, j);
                        g.set(i, j, p * (grad_out.get(i, j) - dot));
                    }
                }
            }
        }
        g
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "relu" => Activation::Relu,
            "elu" => Activation::Elu,
            "tanh" => Activation::Tanh,
            "linear" => Activation::Linear,
            "softmax" => Activation::Softmax,
            other => return Err(Error::Argument(format!("unknown activation `{other}`"))),
        })
    }
}

/// Column-wise softmax with max subtraction.
pub fn softmax(input: &Tensor) -> Tensor {
    let (rows, cols) = input.shape();
    let mut out = Tensor::zeros(rows, cols);
    for j in 0..cols {
        let max = (0..rows).map(|i| input.get(i, j)).fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for i in 0..rows {
            let e = (input.get(i, j) - max).exp();
            out.set(i, j, e);
            sum += e;
        }
        for i in 0..rows {
            out.set(i, j, out.get(i, j) / sum);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn softmax_uniform_input() {
        let p = softmax(&Tensor::column(&[0.3; 16]));
        for &v in p.values() {
            assert!((v - 1.0 / 16.0).abs() < 1e-15);
        }
    }

    #[test]
    fn softmax_ln3() {
        let p = softmax(&Tensor::column(&[0.0, 3f64.ln()]));
        assert!((p.values()[0] - 0.25).abs() < 1e-15);
        assert!((p.values()[1] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn softmax_huge_inputs_stay_finite() {
        let p = softmax(&Tensor::column(&[1e308, -1e308, 700.0]));
        assert!(p.is_finite());
        assert!((p.values().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn elu_negative_branch() {
        let y = Activation::Elu.apply(&Tensor::column(&[-1.0, 2.0]));
        assert!((y.values()[0] - ((-1f64).exp() - 1.0)).abs() < 1e-15);
        assert_eq!(y.values()[1], 2.0);
    }

    #[test]
    fn parse_round_trip() {
        for a in [
            Activation::Relu,
            Activation::Elu,
            Activation::Tanh,
            Activation::Linear,
            Activation::Softmax,
        ] {
            assert_eq!(a.name().parse::<Activation>().unwrap(), a);
        }
        assert!("gelu".parse::<Activation>().is_err());
    }

    proptest! {
        #[test]
        fn softmax_sums_to_one_and_is_shift_invariant(
            xs in proptest::collection::vec(-50.0f64..50.0, 1..20),
            c in -100.0f64..100.0,
        ) {
            let p = softmax(&Tensor::column(&xs));
            let sum: f64 = p.values().iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
            prop_assert!(p.values().iter().all(|&v| v > 0.0 && v <= 1.0));
            let shifted: Vec<f64> = xs.iter().map(|x| x + c).collect();
            let q = softmax(&Tensor::column(&shifted));
            for (a, b) in p.values().iter().zip(q.values()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
