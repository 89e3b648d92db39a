//! Relaxation of a random occupation profile under the Boltzmann flow:
//! entropy grows, mass holds exactly and energy up to the mollifier width.
//!
//! `cargo run --example kinetic_relaxation`

use qboltz::collision::{KernelMode, Mollifier, QuadrupleTable, Statistics};
use qboltz::kinetic::{fermi_dirac_profile, fit_fermi_dirac, integrate, OccupationFunction, SolverConfig};
use qboltz::{DispersionSpec, Lattice, PotentialSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> qboltz::Result<()> {
    let lattice = Lattice::build(
        2,
        6,
        &DispersionSpec::next_nearest(),
        &PotentialSpec::Exponential {
            strength: 1.0,
            range: 1.0,
        },
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    // a cold profile with strong noise on top
    let cold = fermi_dirac_profile(&lattice, 1.5, 2.5);
    let noisy = cold
        .values()
        .iter()
        .map(|f| (f + rng.random_range(-0.3..0.3)).clamp(0.02, 0.98))
        .collect();
    let f0 = OccupationFunction::new(noisy, Statistics::Fermion)?;
    let table = QuadrupleTable::build(&lattice, Mollifier::default_for(&lattice), KernelMode::Plain);
    let config = SolverConfig {
        t_end: 20.0,
        cadence: 4.0,
        ..SolverConfig::default()
    };
    let (f, log) = integrate(&lattice, &f0, &table, &config)?;
    for r in &log.rows {
        println!(
            "T = {:<5} mass = {:.12}  energy = {:.12}  entropy = {:.8}  ‖Q‖∞ = {:.2e}",
            r.t, r.mass, r.energy, r.entropy, r.q_inf
        );
    }
    let first = &log.rows[0];
    let (beta, mu) = fit_fermi_dirac(&lattice, first.mass, first.energy)?;
    let fd = fermi_dirac_profile(&lattice, beta, mu);
    println!(
        "fit β = {beta:.4}, μ = {mu:.4};  sup|F(T) − F_FD| = {:.3e}",
        f.sup_distance(&fd)
    );
    Ok(())
}
