use nalgebra::DMatrix;

use super::correlation::CorrelationMatrix;
use crate::error::Result;
use crate::linalg::{det_from_fn, hermitian_eigen, HermitianEigen, C64, ZERO};

/// Hermiticity tolerance for a quadratic-Hamiltonian coefficient.
const Q_TOLERANCE: f64 = 1e-12;

/// The quasifree Gibbs state of `H₀ = Σ α⁺_i Q_ij α_j`.
pub struct QuasifreeSpec {
    q: DMatrix<C64>,
    eigen: HermitianEigen,
    nu: CorrelationMatrix,
}

impl QuasifreeSpec {
    pub fn new(q: DMatrix<C64>) -> Result<Self> {
        let eigen = hermitian_eigen(&q, Q_TOLERANCE)?;
        let nu = CorrelationMatrix::new(eigen.apply_function(fermi).transpose())?;
        Ok(Self { q, eigen, nu })
    }

    pub fn q(&self) -> &DMatrix<C64> {
        &self.q
    }

    /// Eigenvalues `E_k` of `Q`.
    pub fn energies(&self) -> &[f64] {
        &self.eigen.values
    }

    /// Columns are the orbitals `b⁺_k = Σ_i U_ik α⁺_i`.
    pub fn orbitals(&self) -> &DMatrix<C64> {
        &self.eigen.vectors
    }

    /// `(1 + e^{E_k})⁻¹`.
    pub fn occupations(&self) -> Vec<f64> {
        self.eigen.values.iter().map(|&e| fermi(e).re).collect()
    }

    pub fn two_point(&self) -> &CorrelationMatrix {
        &self.nu
    }
}

fn fermi(e: f64) -> C64 {
    // e^{E} overflows to ∞ for large E, giving the correct limit 0
    C64::new(1.0 / (1.0 + e.exp()), 0.0)
}

/// `ν_{ii'} = ((1 + e^Q)⁻¹)_{i'i}`.
pub fn quasifree_two_point(q: &DMatrix<C64>) -> Result<CorrelationMatrix> {
    Ok(QuasifreeSpec::new(q.clone())?.nu)
}

/// `⟨α⁺_{p₁}⋯α⁺_{p_m} α_{q₁}⋯α_{q_{m'}}⟩` in a quasifree state:
/// `δ_{mm'} (−1)^{m(m−1)/2} det ν[p_n, q_{n'}]`.
pub fn wick_expectation(nu: &CorrelationMatrix, creations: &[usize], annihilations: &[usize]) -> C64 {
    let m = creations.len();
    if m != annihilations.len() {
        return ZERO;
    }
    let det = det_from_fn(m, |i, j| nu.get(creations[i], annihilations[j]));
    if (m * m.saturating_sub(1) / 2).is_multiple_of(2) {
        det
    } else {
        -det
    }
}

/// `⟨α⁺_{k₁} α⁺_{k₂} α_{l₂} α_{l₁}⟩` as the 2×2 determinant of `ν[k_i, l_j]`.
pub fn det4_prediction(nu: &CorrelationMatrix, k: [usize; 2], l: [usize; 2]) -> C64 {
    nu.get(k[0], l[0]) * nu.get(k[1], l[1]) - nu.get(k[0], l[1]) * nu.get(k[1], l[0])
}

/// `⟨α⁺_{k₁}α⁺_{k₂}α_{l₄}α_{l₃} α⁺_{k₃}α⁺_{k₄}α_{l₂}α_{l₁}⟩` as the 4×4
/// determinant of `ν[k_i, l_j]` with `ν̃` in the block `i, j ∈ {3, 4}`.
pub fn det8_prediction(nu: &CorrelationMatrix, k: [usize; 4], l: [usize; 4]) -> C64 {
    let mut a = [ZERO; 16];
    for i in 0..4 {
        for j in 0..4 {
            a[4 * i + j] = if i >= 2 && j >= 2 {
                nu.tilde(k[i], l[j])
            } else {
                nu.get(k[i], l[j])
            };
        }
    }
    crate::linalg::det_in_place(&mut a, 4)
}
