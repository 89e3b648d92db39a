use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, hermiticity_residual, C64, ONE, ZERO};

/// The two-point function `ν_pq = ⟨α⁺_p α_q⟩` in Kronecker normalization.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationMatrix(DMatrix<C64>);

impl CorrelationMatrix {
    pub fn new(nu: DMatrix<C64>) -> Result<Self> {
        if nu.nrows() != nu.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "correlation matrix must be square, got {}x{}",
                nu.nrows(),
                nu.ncols()
            )));
        }
        Ok(Self(nu))
    }

    pub fn zeros(modes: usize) -> Self {
        Self(DMatrix::from_element(modes, modes, ZERO))
    }

    pub fn identity(modes: usize) -> Self {
        Self(DMatrix::identity(modes, modes))
    }

    /// Translation-invariant state with occupations `f`.
    pub fn from_diagonal(f: &[f64]) -> Self {
        let n = f.len();
        Self(DMatrix::from_fn(
            n,
            n,
            |i, j| if i == j { C64::new(f[i], 0.0) } else { ZERO },
        ))
    }

    pub fn modes(&self) -> usize {
        self.0.nrows()
    }

    #[inline]
    pub fn get(&self, p: usize, q: usize) -> C64 {
        self.0[(p, q)]
    }

    /// `ν̃_pq = ν_pq − 1(p = q)`.
    #[inline]
    pub fn tilde(&self, p: usize, q: usize) -> C64 {
        if p == q {
            self.0[(p, q)] - ONE
        } else {
            self.0[(p, q)]
        }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    /// Real parts of the diagonal (the occupations).
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.modes()).map(|p| self.0[(p, p)].re).collect()
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        hermiticity_residual(&self.0)
    }

    /// Largest off-diagonal modulus.
    pub fn max_off_diagonal(&self) -> f64 {
        let n = self.modes();
        let mut worst = 0.0f64;
        for p in 0..n {
            for q in 0..n {
                if p != q {
                    worst = worst.max(self.0[(p, q)].norm());
                }
            }
        }
        worst
    }

    /// Spectrum of the hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = (&self.0 + self.0.adjoint()) * C64::new(0.5, 0.0);
        let mut values = hermitian_eigen(&h, f64::INFINITY)
            .expect("hermitian part is hermitian")
            .values;
        values.sort_by(f64::total_cmp);
        values
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tilde_subtracts_identity() {
        let nu = CorrelationMatrix::from_diagonal(&[0.25, 1.0]);
        assert_eq!(nu.tilde(0, 0), C64::new(-0.75, 0.0));
        assert_eq!(nu.tilde(1, 1), ZERO);
        assert_eq!(nu.tilde(0, 1), ZERO);
        assert_eq!(nu.eigenvalues(), vec![0.25, 1.0]);
    }

    #[test]
    fn rejects_rectangular() {
        assert!(CorrelationMatrix::new(DMatrix::from_element(2, 3, ZERO)).is_err());
    }
}
