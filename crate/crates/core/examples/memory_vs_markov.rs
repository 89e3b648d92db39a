//! The memory-kernel equation next to its Markov limit: the β function is
//! even in energy and `π·β(0, p)` is the collision operator.
//!
//! `cargo run --example memory_vs_markov`

use qboltz::collision::{collision_operator, KernelMode, Mollifier, MollifierKind, QuadrupleTable, Statistics};
use qboltz::hierarchy::{beta_function, markov_limit_value, solve_memory_equation, MemoryConfig};
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
    let f: Vec<f64> = (0..lattice.modes()).map(|k| 0.2 + 0.6 * (k % 3) as f64 / 2.0).collect();
    let mollifier = Mollifier::new(MollifierKind::Gaussian, 0.3);
    let q = collision_operator(
        &QuadrupleTable::build(&lattice, mollifier, KernelMode::Plain),
        &f,
        Statistics::Fermion,
    )?;
    for p in [0, 5, 10] {
        println!(
            "p = {p:<2} β(1) = {:+.6e}  β(−1) = {:+.6e}  πβ(0) = {:+.6e}  Q = {:+.6e}",
            beta_function(&lattice, mollifier, 1.0, p, &f),
            beta_function(&lattice, mollifier, -1.0, p, &f),
            markov_limit_value(&lattice, mollifier, p, &f),
            q[p]
        );
    }

    let lambda = 0.3;
    let history = solve_memory_equation(
        &lattice,
        &f,
        &MemoryConfig {
            lambda,
            t_end: 1.0 / (lambda * lambda),
            dt: None,
        },
    )?;
    let drift: f64 = f
        .iter()
        .zip(history.last())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!(
        "memory equation, λ = {lambda}: {} steps to T = 1, sup change {drift:.3e}",
        history.times().len() - 1
    );
    Ok(())
}
