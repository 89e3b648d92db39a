use std::sync::Arc;

use super::operator::{ManyBodyOperator, QuarticTerms};
use super::sector::FockSector;
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::linalg::C64;

/// The interaction `Φ = L^{-d} Σ' ⟨k₁k₂|Φ|k₃k₄⟩ α⁺_{k₁}α⁺_{k₂}α_{k₃}α_{k₄}`,
/// summed over momentum-conserving quadruples.
pub fn interaction_terms(lattice: &Lattice) -> QuarticTerms {
    let m = lattice.modes();
    let mut terms = QuarticTerms::new(m);
    for k1 in 0..m {
        for k2 in 0..m {
            if k1 == k2 {
                continue;
            }
            for k3 in 0..m {
                let k4 = lattice.grid.close_quadruple(k1, k2, k3);
                if k3 == k4 {
                    continue;
                }
                terms.push([k1, k2, k3, k4], C64::new(lattice.interaction(k1, k2, k3, k4), 0.0));
            }
        }
    }
    terms
}

/// `Σ_{p ∈ mask} e(p)`.
pub fn kinetic_energy(lattice: &Lattice, mask: u64) -> f64 {
    let mut rest = mask;
    let mut total = 0.0;
    while rest != 0 {
        total += lattice.energy(rest.trailing_zeros() as usize);
        rest &= rest - 1;
    }
    total
}

/// `H = Σ_p e(p) α⁺_p α_p + λ Φ` on one sector.
pub fn build_hamiltonian(lattice: &Lattice, sector: Arc<FockSector>, lambda: f64) -> Result<ManyBodyOperator> {
    if sector.modes() != lattice.modes() {
        return Err(Error::DimensionMismatch(format!(
            "sector has {} modes but the lattice has {}",
            sector.modes(),
            lattice.modes()
        )));
    }
    let kinetic: Vec<(usize, usize, C64)> = sector
        .basis()
        .iter()
        .enumerate()
        .map(|(i, &mask)| (i, i, C64::new(kinetic_energy(lattice, mask), 0.0)))
        .collect();
    let kinetic = ManyBodyOperator::from_triplets(sector.clone(), kinetic);
    let mut h = if lambda == 0.0 {
        kinetic
    } else {
        let phi = interaction_terms(lattice).to_operator(sector)?;
        kinetic.add_scaled(&phi, C64::new(lambda, 0.0))?
    };
    h.certify_hermitian(1e-12)?;
    Ok(h)
}
