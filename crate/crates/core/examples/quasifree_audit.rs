//! How far an interacting state drifts from quasifreeness: four- and
//! eight-point residuals along an exact trajectory.
//!
//! `cargo run --example quasifree_audit`

use std::sync::Arc;

use qboltz::fock::{build_hamiltonian, Engine, FockSector, Propagator, StateVector};
use qboltz::quasifree::{quasifreeness_residual, SampleSpec};
use qboltz::{DispersionSpec, Lattice, PotentialSpec};

fn main() -> qboltz::Result<()> {
    let lattice = Lattice::build(
        1,
        6,
        &DispersionSpec::next_nearest(),
        &PotentialSpec::NearestNeighbor { strength: 1.0 },
    )?;
    let sector = Arc::new(FockSector::new(6, 3)?);
    let psi0 = StateVector::slater(sector.clone(), &[0, 1, 5])?;
    let spec = SampleSpec::default();
    for lambda in [0.2, 0.5] {
        let h = build_hamiltonian(&lattice, sector.clone(), lambda)?;
        let prop = Propagator::new(&h, Engine::Dense)?;
        for t in [0.0, 1.0, 4.0] {
            let report = quasifreeness_residual(&prop.heisenberg_state(&psi0, t)?, &spec);
            println!(
                "λ = {lambda}  t = {t:<3}  max4 = {:.2e}  max8 = {:.2e}",
                report.max4, report.max8
            );
        }
    }
    Ok(())
}
