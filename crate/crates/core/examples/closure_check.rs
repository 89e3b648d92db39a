//! The quasifree closure of the second Duhamel step against the exact
//! expectation of `[Φ, G_pq(τ)]` in a Slater state.
//!
//! `cargo run --example closure_check`

use std::sync::Arc;

use qboltz::fock::{interaction_terms, two_point_matrix, FockSector, StateVector};
use qboltz::hierarchy::{closure_rhs, QuarticCoefficient};
use qboltz::linalg::{random_isometry, C64};
use qboltz::{DispersionSpec, Lattice, PotentialSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> qboltz::Result<()> {
    let lattice = Lattice::build(
        1,
        4,
        &DispersionSpec::next_nearest(),
        &PotentialSpec::Exponential {
            strength: 1.0,
            range: 1.0,
        },
    )?;
    let sector = Arc::new(FockSector::new(4, 2)?);
    // a Slater state on two random orbitals, so ν has off-diagonal entries
    let orbitals = random_isometry(&mut ChaCha8Rng::seed_from_u64(5), 4, 2);
    let psi = StateVector::slater_orbitals(sector.clone(), &orbitals)?;
    let nu = two_point_matrix(&psi);
    let phi = interaction_terms(&lattice).to_operator(sector.clone())?;

    for tau in [0.0, 0.3, 1.0] {
        let mut worst: f64 = 0.0;
        for p in 0..4 {
            for q in 0..4 {
                let g = QuarticCoefficient::duhamel(&lattice, p, q, tau)
                    .terms()
                    .to_operator(sector.clone())?;
                let amps = psi.amplitudes();
                let phi_g = phi.apply(&g.apply(amps));
                let g_phi = g.apply(&phi.apply(amps));
                // ⟨ψ|ΦG − GΦ|ψ⟩
                let exact: C64 = amps
                    .iter()
                    .zip(phi_g.iter().zip(&g_phi))
                    .map(|(a, (x, y))| a.conj() * (x - y))
                    .sum();
                worst = worst.max((closure_rhs(&lattice, p, q, tau, &nu)? - exact).norm());
            }
        }
        println!("τ = {tau}: max |closure − exact| over all (p, q) = {worst:.2e}");
    }
    Ok(())
}
