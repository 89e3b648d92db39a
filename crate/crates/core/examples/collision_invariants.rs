//! The collision operator: zero on constants and on Fermi–Dirac profiles up
//! to the mollifier width, with mass conserved to rounding.
//!
//! `cargo run --example collision_invariants`

use qboltz::collision::{collision_invariants, KernelMode, Mollifier, MollifierKind, QuadrupleTable, Statistics};
use qboltz::kinetic::fermi_dirac_profile;
use qboltz::{DispersionSpec, Lattice, PotentialSpec};

fn main() -> qboltz::Result<()> {
    let lattice = Lattice::build(
        1,
        256,
        &DispersionSpec::NearestNeighbor,
        &PotentialSpec::Exponential {
            strength: 1.0,
            range: 1.0,
        },
    )?;
    let smooth: Vec<f64> = (0..lattice.modes())
        .map(|k| {
            let p = lattice.grid.momentum(k)[0];
            0.5 + 0.3 * p.sin() + 0.15 * (2.0 * p).cos()
        })
        .collect();
    let fd = fermi_dirac_profile(&lattice, 1.0, 2.0);
    for eta in [0.05, 0.025, 0.0125] {
        let table = QuadrupleTable::build(
            &lattice,
            Mollifier::new(MollifierKind::Gaussian, eta),
            KernelMode::Plain,
        );
        let inv = collision_invariants(&lattice, &table, &smooth, Statistics::Fermion)?;
        let at_fd = collision_invariants(&lattice, &table, fd.values(), Statistics::Fermion)?;
        println!(
            "η = {eta:<6} ∫Q = {:+.1e}  ∫eQ = {:+.3e}  entropy production = {:.3e}  ‖Q[FD]‖₁ = {:.3e}",
            inv.mass_rate, inv.energy_rate, inv.entropy_production, at_fd.q_l1
        );
    }
    Ok(())
}
