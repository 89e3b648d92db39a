use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::memory::bracket;
use crate::collision::{kernel_value, KernelMode, Mollifier};
use crate::error::Result;
use crate::lattice::Lattice;
use crate::output::{float, CsvWriter};

pub const BETA_SCHEMA: &str = "qboltz.beta.v1";

/// `β(E, p) = L^{-2d} Σ 2(δ(p,k₄) − δ(p,k₁)) K δ_η(E − Δe) b` over all
/// conserving quadruples, `b = f₁f₂f̃₃f̃₄ − f₄f₃f̃₂f̃₁`.
pub fn beta_function(lattice: &Lattice, mollifier: Mollifier, energy: f64, p: usize, f: &[f64]) -> f64 {
    let m = lattice.modes();
    let grid = &lattice.grid;
    let term = |k: [usize; 4]| {
        let [k1, k2, k3, k4] = k;
        kernel_value(lattice, k1, k2, k3, k4, KernelMode::Plain)
            * mollifier.value(energy - lattice.delta_e(k1, k2, k3, k4))
            * bracket(f, k)
    };
    let mut incoming = 0.0;
    let mut outgoing = 0.0;
    for a in 0..m {
        for b in 0..m {
            // k₄ = p with (k₁, k₂) = (a, b)
            let k = [a, b, grid.combine(&[(1, a), (1, b), (-1, p)]), p];
            if k[0] != p {
                incoming += term(k);
            }
            // k₁ = p with (k₂, k₃) = (a, b)
            let k = [p, a, b, grid.close_quadruple(p, a, b)];
            if k[3] != p {
                outgoing += term(k);
            }
        }
    }
    2.0 * lattice.grid.cell_volume().powi(2) * (incoming - outgoing)
}

/// `π β(0, p)`, the Markov limit of the memory rate in kinetic time.
pub fn markov_limit_value(lattice: &Lattice, mollifier: Mollifier, p: usize, f: &[f64]) -> f64 {
    PI * beta_function(lattice, mollifier, 0.0, p, f)
}

/// `β` on a grid of energies for every mode, as rows `(E, p, β)`.
pub fn beta_table(lattice: &Lattice, mollifier: Mollifier, energies: &[f64], f: &[f64]) -> Vec<(f64, usize, f64)> {
    let jobs: Vec<(f64, usize)> = energies
        .iter()
        .flat_map(|&e| (0..lattice.modes()).map(move |p| (e, p)))
        .collect();
    jobs.par_iter()
        .map(|&(e, p)| (e, p, beta_function(lattice, mollifier, e, p, f)))
        .collect()
}

pub fn write_beta_csv(path: impl AsRef<Path>, rows: &[(f64, usize, f64)]) -> Result<PathBuf> {
    let mut out = CsvWriter::create(path, BETA_SCHEMA, &["E", "p", "beta"])?;
    for &(e, p, beta) in rows {
        out.row(&[float(e), p.to_string(), float(beta)])?;
    }
    out.finish()
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::collision::{collision_operator, MollifierKind, QuadrupleTable, Statistics};
    use crate::lattice::{DispersionSpec, PotentialSpec};

    fn lattice(dim: usize, side: usize) -> Lattice {
        Lattice::build(
            dim,
            side,
            &DispersionSpec::next_nearest(),
            &PotentialSpec::Exponential {
                strength: 1.0,
                range: 1.0,
            },
        )
        .unwrap()
    }

    #[test]
    fn even_in_energy() {
        let lat = lattice(2, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f: Vec<f64> = (0..16).map(|_| rng.random()).collect();
        let moll = Mollifier::new(MollifierKind::Gaussian, 0.3);
        for e in [0.1, 0.7, 2.5] {
            for p in 0..16 {
                let diff = beta_function(&lat, moll, e, p, &f) - beta_function(&lat, moll, -e, p, &f);
                assert!(diff.abs() < 1e-13);
            }
        }
    }

    #[test]
    fn markov_limit_is_collision_operator() {
        let lat = lattice(2, 4);
        let moll = Mollifier::new(MollifierKind::Gaussian, 0.25);
        let table = QuadrupleTable::build(&lat, moll, KernelMode::Plain);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..3 {
            let f: Vec<f64> = (0..16).map(|_| rng.random()).collect();
            let q = collision_operator(&table, &f, Statistics::Fermion).unwrap();
            for (p, &qp) in q.iter().enumerate() {
                let markov = markov_limit_value(&lat, moll, p, &f);
                assert!(
                    (markov - qp).abs() <= 1e-10 * qp.abs().max(1e-300),
                    "p={p}: {markov} vs {qp}"
                );
            }
        }
    }

    #[test]
    fn constant_occupation_gives_zero() {
        let lat = lattice(1, 6);
        let moll = Mollifier::new(MollifierKind::Lorentzian, 0.2);
        let rows = beta_table(&lat, moll, &[-1.0, 0.0, 1.0], &[0.35; 6]);
        assert!(rows.iter().all(|r| r.2.abs() < 1e-16));
        let dir = tempfile::tempdir().unwrap();
        let path = write_beta_csv(dir.path().join("b.csv"), &rows).unwrap();
        assert_eq!(crate::output::read_rows(path).unwrap().len(), 18);
    }
}
