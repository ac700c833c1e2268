use super::Tensor;
use crate::error::{Error, Result};

/// Probabilities below this are clamped before taking the log.
pub const PROB_FLOOR: f64 = 1e-15;

/// Categorical cross-entropy `−ln p[target]` of one probability vector.
pub fn cross_entropy_loss(probs: &[f64], target: usize) -> Result<f64> {
    let p = *probs.get(target).ok_or(Error::Index {
        index: target,
        limit: probs.len(),
    })?;
    Ok(-p.max(PROB_FLOOR).ln())
}

/// Mean cross-entropy over a batch of softmax columns, plus the gradient
/// w.r.t. the pre-softmax logits, `(p − onehot) / batch`.
pub fn softmax_cross_entropy(probs: &Tensor, targets: &[usize]) -> Result<(f64, Tensor)> {
    let (classes, batch) = probs.shape();
    if targets.len() != batch {
        return Err(Error::dims(format!("{batch} targets"), format!("{}", targets.len())));
    }
    let mut grad = probs.clone();
    let scale = 1.0 / batch as f64;
    let mut total = 0.0;
    for (j, &t) in targets.iter().enumerate() {
        if t >= classes {
            return Err(Error::Index { index: t, limit: classes });
        }
        total += -probs.get(t, j).max(PROB_FLOOR).ln();
        grad.set(t, j, grad.get(t, j) - 1.0);
    }
    for g in grad.values_mut() {
        *g *= scale;
    }
    Ok((total * scale, grad))
}
