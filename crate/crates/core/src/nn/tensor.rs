use crate::error::{Error, Result};

/// Dense 2-D array of `f64` with optional gradient storage of the same shape.
///
/// Storage is row-major. Batches are laid out one sample per column, so a
/// `(features × batch)` tensor feeds a layer whose input dimension is
/// `features`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    grad: Option<Vec<f64>>,
}

impl Tensor {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Tensor {
            rows,
            cols,
            values: vec![0.0; rows * cols],
            grad: None,
        }
    }

    pub fn from_vec(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::dims(
                format!("{} values for {rows}x{cols}", rows * cols),
                format!("{} values", values.len()),
            ));
        }
        Ok(Tensor {
            rows,
            cols,
            values,
            grad: None,
        })
    }

    /// Single column vector.
    pub fn column(values: &[f64]) -> Self {
        Tensor {
            rows: values.len(),
            cols: 1,
            values: values.to_vec(),
            grad: None,
        }
    }

    /// Builds a `(len × count)` tensor whose columns are the given vectors.
    pub fn from_columns<V: AsRef<[f64]>>(columns: &[V]) -> Result<Self> {
        let rows = columns.first().map_or(0, |c| c.as_ref().len());
        let cols = columns.len();
        let mut t = Tensor::zeros(rows, cols);
        for (j, c) in columns.iter().enumerate() {
            let c = c.as_ref();
            if c.len() != rows {
                return Err(Error::dims(format!("column of length {rows}"), format!("length {}", c.len())));
            }
            for (i, &v) in c.iter().enumerate() {
                t.values[i * cols + j] = v;
            }
        }
        Ok(t)
    }

    pub fn identity(size: usize) -> Self {
        let mut t = Tensor::zeros(size, size);
        for i in 0..size {
            t.values[i * size + i] = 1.0;
        }
        t
    }

    pub fn with_grad(mut self) -> Self {
        self.grad = Some(vec![0.0; self.values.len()]);
        self
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn shape_str(&self) -> String {
        format!("{}x{}", self.rows, self.cols)
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn grad(&self) -> Option<&[f64]> {
        self.grad.as_deref()
    }

    pub fn grad_mut(&mut self) -> Option<&mut [f64]> {
        self.grad.as_deref_mut()
    }

    /// Values and gradient borrowed together (for optimizers).
    pub fn values_and_grad_mut(&mut self) -> (&mut [f64], Option<&mut [f64]>) {
        (&mut self.values, self.grad.as_deref_mut())
    }

    pub fn zero_grad(&mut self) {
        if let Some(g) = self.grad.as_mut() {
            g.fill(0.0);
        }
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: f64) {
        self.values[row * self.cols + col] = v;
    }

    pub fn column_vec(&self, col: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, col)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.cols).map(|j| self.column_vec(j)).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// `self · other` for a `(r×k)` and `(k×c)` pair.
    pub fn matmul(&self, other: &Tensor) -> Result<Tensor> {
        if self.cols != other.rows {
            return Err(Error::dims(
                format!("left {} to have {} columns", self.shape_str(), other.rows),
                format!("right {}", other.shape_str()),
            ));
        }
        let (r, k, c) = (self.rows, self.cols, other.cols);
        let mut out = vec![0.0; r * c];
        for i in 0..r {
            let row_out = &mut out[i * c..(i + 1) * c];
            for p in 0..k {
                let a = self.values[i * k + p];
                if a == 0.0 {
                    continue;
                }
                let row_b = &other.values[p * c..(p + 1) * c];
                for (o, &b) in row_out.iter_mut().zip(row_b) {
                    *o += a * b;
                }
            }
        }
        Tensor::from_vec(r, c, out)
    }

    /// `selfᵀ · other`.
    pub fn t_matmul(&self, other: &Tensor) -> Result<Tensor> {
        if self.rows != other.rows {
            return Err(Error::dims(
                format!("{} rows on both operands", self.rows),
                format!("{} and {}", self.shape_str(), other.shape_str()),
            ));
        }
        let (k, r, c) = (self.rows, self.cols, other.cols);
        let mut out = vec![0.0; r * c];
        for p in 0..k {
            let row_b = &other.values[p * c..(p + 1) * c];
            for i in 0..r {
                let a = self.values[p * r + i];
                if a == 0.0 {
                    continue;
                }
                let row_out = &mut out[i * c..(i + 1) * c];
                for (o, &b) in row_out.iter_mut().zip(row_b) {
                    *o += a * b;
                }
            }
        }
        Tensor::from_vec(r, c, out)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor {
        Tensor {
            rows: self.rows,
            cols: self.cols,
            values: self.values.iter().map(|&v| f(v)).collect(),
            grad: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_vec_rejects_wrong_length() {
        assert!(Tensor::from_vec(2, 3, vec![0.0; 5]).is_err());
    }

    #[test]
    fn matmul_small() {
        let a = Tensor::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let x = Tensor::column(&[1.0, 1.0]);
        assert_eq!(a.matmul(&x).unwrap().values(), &[3.0, 7.0]);
        // aᵀ x = [4, 6]
        assert_eq!(a.t_matmul(&x).unwrap().values(), &[4.0, 6.0]);
    }

    #[test]
    fn columns_round_trip() {
        let cols = vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]];
        let t = Tensor::from_columns(&cols).unwrap();
        assert_eq!(t.shape(), (3, 2));
        assert_eq!(t.columns(), cols);
    }

    #[test]
    fn grad_shape_follows_values() {
        let t = Tensor::zeros(3, 4).with_grad();
        assert_eq!(t.grad().unwrap().len(), 12);
    }
}
