//! Small dense helpers shared by the determinant formulas and propagators.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Determinant of a row-major `n×n` matrix by LU with partial pivoting.
/// The buffer is overwritten.
pub fn det_in_place(a: &mut [C64], n: usize) -> C64 {
    debug_assert_eq!(a.len(), n * n);
    let mut det = ONE;
    for col in 0..n {
        let mut pivot = col;
        let mut best = a[col * n + col].norm();
        for row in col + 1..n {
            let v = a[row * n + col].norm();
            if v > best {
                best = v;
                pivot = row;
            }
        }
        if best == 0.0 {
            return ZERO;
        }
        if pivot != col {
            for j in 0..n {
                a.swap(col * n + j, pivot * n + j);
            }
            det = -det;
        }
        let d = a[col * n + col];
        det *= d;
        for row in col + 1..n {
            let factor = a[row * n + col] / d;
            if factor == ZERO {
                continue;
            }
            for j in col + 1..n {
                let upper = a[col * n + j];
                a[row * n + j] -= factor * upper;
            }
        }
    }
    det
}

/// Determinant of the matrix `entry(i, j)`, `0 ≤ i, j < n`.
pub fn det_from_fn(n: usize, entry: impl Fn(usize, usize) -> C64) -> C64 {
    match n {
        0 => ONE,
        1 => entry(0, 0),
        _ => {
            let mut buf: Vec<C64> = (0..n * n).map(|idx| entry(idx / n, idx % n)).collect();
            det_in_place(&mut buf, n)
        }
    }
}

/// Largest entry of `|A − A†|`.
pub fn hermiticity_residual(a: &DMatrix<C64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigen-decomposition `A = U diag(E) U†` of a hermitian matrix.
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<C64>,
}

pub fn hermitian_eigen(a: &DMatrix<C64>, tolerance: f64) -> Result<HermitianEigen> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition of a {}x{} matrix",
            a.nrows(),
            a.ncols()
        )));
    }
    let residual = hermiticity_residual(a);
    if residual > tolerance {
        return Err(Error::NotHermitian { residual });
    }
    let eig = nalgebra::SymmetricEigen::new(a.clone());
    Ok(HermitianEigen {
        values: eig.eigenvalues.iter().copied().collect(),
        vectors: eig.eigenvectors,
    })
}

impl HermitianEigen {
    /// `U diag(g(E)) U†`.
    pub fn apply_function(&self, g: impl Fn(f64) -> C64) -> DMatrix<C64> {
        let n = self.values.len();
        let scaled = DMatrix::from_fn(n, n, |i, k| self.vectors[(i, k)] * g(self.values[k]));
        &scaled * self.vectors.adjoint()
    }
}

/// Uniformly scattered complex matrix entries in the unit square.
pub fn random_complex_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

/// Random hermitian matrix with entries of order `scale`.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64) -> DMatrix<C64> {
    let a = random_complex_matrix(rng, n, n);
    (&a + a.adjoint()) * C64::new(0.5 * scale, 0.0)
}

/// `n×k` matrix with orthonormal columns (Gram–Schmidt on random columns).
pub fn random_isometry<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> DMatrix<C64> {
    assert!(k <= n);
    let mut cols: Vec<DVector<C64>> = Vec::with_capacity(k);
    while cols.len() < k {
        let mut v = DVector::from_fn(n, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        for _ in 0..2 {
            for c in &cols {
                let overlap = c.dotc(&v);
                v -= c * overlap;
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            cols.push(v / C64::new(norm, 0.0));
        }
    }
    DMatrix::from_columns(&cols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn lu_determinant_matches_nalgebra() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 0..6 {
            let a = random_complex_matrix(&mut rng, n, n);
            let ours = det_from_fn(n, |i, j| a[(i, j)]);
            let theirs = if n == 0 { ONE } else { a.determinant() };
            assert!((ours - theirs).norm() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn singular_matrix_has_zero_determinant() {
        let d = det_from_fn(3, |i, _| C64::new(i as f64, 0.0));
        assert_eq!(d, ZERO);
    }

    #[test]
    fn isometry_columns_are_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_isometry(&mut rng, 6, 4);
        let gram = u.adjoint() * &u;
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j { ONE } else { ZERO };
                assert!((gram[(i, j)] - expected).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn eigen_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_hermitian(&mut rng, 5, 2.0);
        let eig = hermitian_eigen(&a, 1e-12).unwrap();
        let back = eig.apply_function(|e| C64::new(e, 0.0));
        assert!((back - a).norm() < 1e-10);
    }
}
