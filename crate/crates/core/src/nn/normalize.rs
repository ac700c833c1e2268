use super::Tensor;
use crate::error::{Error, Result};

/// Rescales every column (a `2n`-vector) to squared norm `n`, i.e. mean
/// power 0.5 per real component.
pub fn power_normalize(batch: &Tensor) -> Result<Tensor> {
    let (rows, cols) = batch.shape();
    if rows == 0 || cols == 0 {
        return Err(Error::Degenerate("empty codeword batch"));
    }
    let target = (rows as f64 / 2.0).sqrt();
    let mut out = batch.clone();
    for j in 0..cols {
        let norm = column_norm(batch, j);
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Degenerate("cannot normalize an all-zero codeword"));
        }
        let scale = target / norm;
        for i in 0..rows {
            out.set(i, j, batch.get(i, j) * scale);
        }
    }
    Ok(out)
}

fn column_norm(t: &Tensor, j: usize) -> f64 {
    (0..t.rows()).map(|i| t.get(i, j).powi(2)).sum::<f64>().sqrt()
}

/// Power normalization as a network stage with a cached forward pass.
#[derive(Debug, Clone, Default)]
pub struct PowerNorm {
    cache: Option<(Tensor, Vec<f64>)>,
}

impl PowerNorm {
    pub fn forward(&mut self, z: &Tensor) -> Result<Tensor> {
        let out = power_normalize(z)?;
        let norms = (0..z.cols()).map(|j| column_norm(z, j)).collect();
        self.cache = Some((out.clone(), norms));
        Ok(out)
    }

    /// `∂x/∂z = (√n/‖z‖)(I − x̂x̂ᵀ)` applied column-wise.
    pub fn backward(&self, grad_out: &Tensor) -> Result<Tensor> {
        let (out, norms) = self.cache.as_ref().ok_or(Error::State("backward called before forward"))?;
        if grad_out.shape() != out.shape() {
            return Err(Error::dims(out.shape_str(), grad_out.shape_str()));
        }
        let (rows, cols) = out.shape();
        let target = (rows as f64 / 2.0).sqrt();
        let mut g = Tensor::zeros(rows, cols);
        for j in 0..cols {
            // x̂ = x/√n
            let dot: f64 = (0..rows).map(|i| out.get(i, j) * grad_out.get(i, j)).sum::<f64>() / target;
            let scale = target / norms[j];
            for i in 0..rows {
                let xhat = out.get(i, j) / target;
                g.set(i, j, scale * (grad_out.get(i, j) - xhat * dot));
            }
        }
        Ok(g)
    }
}
