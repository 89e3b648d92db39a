//! Momentum conservation on the torus and the near-resonant quadruples kept
//! by a mollified energy delta.
//!
//! `cargo run --example lattice_quadruples`

use qboltz::collision::{KernelMode, Mollifier, MollifierKind, QuadrupleTable};
use qboltz::{DispersionSpec, Lattice, PotentialSpec};

fn main() -> qboltz::Result<()> {
    let lattice = Lattice::build(
        2,
        4,
        &DispersionSpec::next_nearest(),
        &PotentialSpec::Exponential {
            strength: 1.0,
            range: 1.0,
        },
    )?;
    let g = &lattice.grid;
    println!("{} modes, cell volume {}", lattice.modes(), g.cell_volume());

    // (3,0) + (2,0) wraps to (1,0): umklapp
    let (a, b) = (g.index_of(&[3, 0]), g.index_of(&[2, 0]));
    println!("{:?} + {:?} = {:?}", g.coords(a), g.coords(b), g.coords(g.add(a, b)));

    for eta in [0.5, 0.1, 0.02] {
        let table = QuadrupleTable::build(
            &lattice,
            Mollifier::new(MollifierKind::Gaussian, eta),
            KernelMode::Plain,
        );
        let max_mismatch = table
            .iter()
            .map(|q| lattice.delta_e(q.k[0], q.k[1], q.k[2], q.k[3]).abs())
            .fold(0.0, f64::max);
        println!(
            "eta = {eta:<5} quadruples = {:>6}  max |Δe| kept = {max_mismatch:.3}",
            table.len()
        );
    }
    Ok(())
}
