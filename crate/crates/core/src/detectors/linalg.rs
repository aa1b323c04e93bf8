use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Lower-triangular factor `L` of a symmetric positive-definite matrix,
/// `A = L Lᵀ`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky<T> {
    dim: usize,
    lower: Vec<T>,
}

impl<T: Scalar> Cholesky<T> {
    /// Factors a row-major `dim x dim` matrix. Only the lower triangle is read.
    pub fn factor(a: &[T], dim: usize) -> Result<Self> {
        assert_eq!(a.len(), dim * dim, "matrix is not {dim}x{dim}");
        let mut lower = vec![T::zero(); dim * dim];
        for i in 0..dim {
            for j in 0..=i {
                let mut sum = a[i * dim + j];
                for k in 0..j {
                    sum = sum - lower[i * dim + k] * lower[j * dim + k];
                }
                if i == j {
                    if sum <= T::zero() || !sum.is_finite() {
                        return Err(Error::Numerical(format!(
                            "matrix is not positive-definite (pivot {i} = {sum})"
                        )));
                    }
                    lower[i * dim + i] = sum.sqrt();
                } else {
                    lower[i * dim + j] = sum / lower[j * dim + j];
                }
            }
        }
        Ok(Cholesky { dim, lower })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lower(&self) -> &[T] {
        &self.lower
    }

    /// Solves `L z = b` in place.
    pub fn solve_lower_in_place(&self, b: &mut [T]) {
        let n = self.dim;
        for i in 0..n {
            let row = &self.lower[i * n..i * n + i];
            let mut sum = b[i];
            for (l, z) in row.iter().zip(&b[..i]) {
                sum = sum - *l * *z;
            }
            b[i] = sum / self.lower[i * n + i];
        }
    }

    /// `(x)ᵀ A⁻¹ x`, via one triangular solve.
    pub fn quadratic_form(&self, x: &[T]) -> T {
        let mut z = x.to_vec();
        self.solve_lower_in_place(&mut z);
        z.iter().map(|&v| v * v).sum()
    }
}
