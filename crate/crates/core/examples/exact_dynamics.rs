//! Exact evolution of a Slater determinant under `H = H₀ + λΦ`, watching the
//! occupations move and the norm stay fixed.
//!
//! `cargo run --example exact_dynamics`

use std::sync::Arc;

use qboltz::fock::{build_hamiltonian, two_point_matrix, Engine, FockSector, Propagator, StateVector};
use qboltz::{DispersionSpec, Lattice, PotentialSpec};

fn main() -> qboltz::Result<()> {
    let lattice = Lattice::build(
        1,
        8,
        &DispersionSpec::next_nearest(),
        &PotentialSpec::NearestNeighbor { strength: 1.0 },
    )?;
    let sector = Arc::new(FockSector::new(lattice.modes(), 4)?);
    let psi0 = StateVector::slater(sector.clone(), &[0, 1, 2, 7])?;
    let lambda = 0.5;
    let h = build_hamiltonian(&lattice, sector.clone(), lambda)?;
    let prop = Propagator::new(&h, Engine::Auto)?;
    println!(
        "sector dimension {}, nonzeros {}, dense engine: {}",
        sector.dim(),
        h.nnz(),
        prop.is_dense()
    );

    for t in [0.0, 2.0, 4.0, 8.0] {
        let psi = prop.heisenberg_state(&psi0, t)?;
        let f = two_point_matrix(&psi).diagonal();
        let shown: Vec<String> = f.iter().map(|x| format!("{x:.3}")).collect();
        println!(
            "t = {t:<4} |ψ| - 1 = {:+.1e}  f = [{}]",
            psi.norm() - 1.0,
            shown.join(", ")
        );
    }
    Ok(())
}
