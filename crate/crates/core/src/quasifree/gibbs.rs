//! Brute-force density matrices on the full `2^M`-dimensional Fock space.
//! This is the independent ground truth for the determinant formulas.

use std::sync::Arc;

use nalgebra::DMatrix;

use super::correlation::CorrelationMatrix;
use super::wick::QuasifreeSpec;
use crate::error::{Error, Result};
use crate::fock::{apply_ladder, FockSector, Ladder, StateVector};
use crate::linalg::{hermitian_eigen, C64, ZERO};

/// Largest mode count accepted by the full-Fock oracle.
pub const FULL_FOCK_MODE_CAP: usize = 6;

/// A number-conserving density matrix, stored as one block per particle
/// number `0..=M`.
#[derive(Clone, Debug)]
pub struct FockDensity {
    modes: usize,
    blocks: Vec<(Arc<FockSector>, DMatrix<C64>)>,
}

fn check_modes(modes: usize) -> Result<()> {
    if modes > FULL_FOCK_MODE_CAP {
        return Err(Error::SectorTooLarge {
            modes,
            cap: FULL_FOCK_MODE_CAP,
            estimate: 1u128 << modes,
        });
    }
    Ok(())
}

impl FockDensity {
    /// `ρ = Σ_S Π_{k∈S} n_k Π_{k∉S} (1 − n_k) |S⟩⟨S|`, where `|S⟩` fills the
    /// eigen-orbitals of `Q` in `S` and `n_k = (1 + e^{E_k})⁻¹`.
    pub fn gibbs_product_form(spec: &QuasifreeSpec) -> Result<Self> {
        let m = spec.energies().len();
        check_modes(m)?;
        let n_k = spec.occupations();
        let u = spec.orbitals();
        let mut blocks = empty_blocks(m)?;
        for subset in 0u64..(1 << m) {
            let cols: Vec<usize> = (0..m).filter(|&k| subset & (1 << k) != 0).collect();
            let weight: f64 = (0..m)
                .map(|k| if subset & (1 << k) != 0 { n_k[k] } else { 1.0 - n_k[k] })
                .product();
            let (sector, rho) = &mut blocks[cols.len()];
            let orbitals = DMatrix::from_fn(m, cols.len(), |i, j| u[(i, cols[j])]);
            let psi = StateVector::slater_orbitals(sector.clone(), &orbitals)?;
            let a = psi.amplitudes();
            for r in 0..a.len() {
                for c in 0..a.len() {
                    rho[(r, c)] += a[r] * a[c].conj() * weight;
                }
            }
        }
        Ok(Self { modes: m, blocks })
    }

    /// `e^{−H₀} / Z` from the spectral decomposition of `H₀ = Σ α⁺_i Q_ij α_j`
    /// on each particle-number block.
    pub fn gibbs_exponential(q: &DMatrix<C64>) -> Result<Self> {
        let m = q.nrows();
        check_modes(m)?;
        let mut blocks = empty_blocks(m)?;
        let mut z = 0.0;
        for (sector, rho) in blocks.iter_mut() {
            let dim = sector.dim();
            let mut h = DMatrix::from_element(dim, dim, ZERO);
            for col in 0..dim {
                let mask = sector.mask(col);
                for i in 0..m {
                    for j in 0..m {
                        if q[(i, j)] == ZERO {
                            continue;
                        }
                        let Some((m1, s1)) = apply_ladder(mask, Ladder::Annihilate(j)) else {
                            continue;
                        };
                        let Some((m2, s2)) = apply_ladder(m1, Ladder::Create(i)) else {
                            continue;
                        };
                        let row = sector.rank(m2).expect("number-conserving");
                        h[(row, col)] += q[(i, j)] * (s1 * s2);
                    }
                }
            }
            *rho = hermitian_eigen(&h, 1e-12)?.apply_function(|e| C64::new((-e).exp(), 0.0));
            z += rho.trace().re;
        }
        for (_, rho) in blocks.iter_mut() {
            *rho /= C64::new(z, 0.0);
        }
        Ok(Self { modes: m, blocks })
    }

    /// `|ψ⟩⟨ψ|` embedded in the full Fock space.
    pub fn pure(psi: &StateVector) -> Result<Self> {
        let m = psi.sector().modes();
        check_modes(m)?;
        let mut blocks = empty_blocks(m)?;
        let n = psi.sector().particles();
        let a = psi.amplitudes();
        blocks[n].1 = DMatrix::from_fn(a.len(), a.len(), |r, c| a[r] * a[c].conj());
        Ok(Self { modes: m, blocks })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn trace(&self) -> C64 {
        self.blocks.iter().map(|(_, rho)| rho.trace()).sum()
    }

    /// `tr(ρ A)` for the monomial `A` written left to right in `ops`.
    pub fn expectation(&self, ops: &[Ladder]) -> C64 {
        let mut total = ZERO;
        for (sector, rho) in &self.blocks {
            for col in 0..sector.dim() {
                let acted = ops.iter().rev().try_fold((sector.mask(col), 1.0), |(mask, s), &op| {
                    apply_ladder(mask, op).map(|(m2, s2)| (m2, s * s2))
                });
                let Some((out, sign)) = acted else {
                    continue;
                };
                // ⟨col|ρ A|col⟩ = sign · ρ[col, out]
                if let Some(row) = sector.rank(out) {
                    total += rho[(col, row)] * sign;
                }
            }
        }
        total
    }

    pub fn two_point(&self) -> CorrelationMatrix {
        let m = self.modes;
        let nu = DMatrix::from_fn(m, m, |p, q| {
            self.expectation(&[Ladder::Create(p), Ladder::Annihilate(q)])
        });
        CorrelationMatrix::new(nu).expect("square")
    }
}

fn empty_blocks(m: usize) -> Result<Vec<(Arc<FockSector>, DMatrix<C64>)>> {
    (0..=m)
        .map(|n| {
            let sector = Arc::new(FockSector::new(m, n)?);
            let dim = sector.dim();
            Ok((sector, DMatrix::from_element(dim, dim, ZERO)))
        })
        .collect()
}
