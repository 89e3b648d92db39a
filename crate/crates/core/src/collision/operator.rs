use std::f64::consts::PI;
use std::str::FromStr;

use rayon::prelude::*;

use super::table::QuadrupleTable;
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::linalg::C64;

/// Occupations may leave their admissible range by at most this much.
pub(crate) const RANGE_SLACK: f64 = 1e-6;

/// Smallest argument of the entropy logarithm.
const LOG_CLAMP: f64 = 1e-300;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Statistics {
    #[default]
    Fermion,
    Boson,
}

impl Statistics {
    /// `F̃ = 1 ∓ F`.
    #[inline]
    pub fn complement(self, f: f64) -> f64 {
        match self {
            Statistics::Fermion => 1.0 - f,
            Statistics::Boson => 1.0 + f,
        }
    }

    pub fn check(self, f: &[f64]) -> Result<()> {
        for (mode, &value) in f.iter().enumerate() {
            let ok = match self {
                Statistics::Fermion => (-RANGE_SLACK..=1.0 + RANGE_SLACK).contains(&value),
                Statistics::Boson => value >= -RANGE_SLACK && value.is_finite(),
            };
            if !ok {
                return Err(Error::OccupationOutOfRange { mode, value });
            }
        }
        Ok(())
    }
}

impl FromStr for Statistics {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fermion" => Ok(Self::Fermion),
            "boson" => Ok(Self::Boson),
            other => Err(format!("unknown statistics `{other}` (fermion | boson)")),
        }
    }
}

/// `Q[F](k₁) = 4π L^{-2d} Σ w·K·[F₃F₄F̃₁F̃₂ − F₁F₂F̃₃F̃₄]`.
pub fn collision_operator(table: &QuadrupleTable, f: &[f64], stats: Statistics) -> Result<Vec<f64>> {
    let m = table.modes();
    if f.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "occupation of length {} for a {m}-mode table",
            f.len()
        )));
    }
    stats.check(f)?;
    let ft: Vec<f64> = f.iter().map(|&x| stats.complement(x)).collect();
    let prefactor = 4.0 * PI / (m as f64 * m as f64);
    Ok((0..m)
        .into_par_iter()
        .map(|k1| {
            let (k2s, k3s, k4s, ws, ks) = table.columns(k1);
            let (f1, ft1) = (f[k1], ft[k1]);
            let mut acc = 0.0;
            for i in 0..ws.len() {
                let (k2, k3, k4) = (k2s[i] as usize, k3s[i] as usize, k4s[i] as usize);
                let gain = f[k3] * f[k4] * ft1 * ft[k2];
                let loss = f1 * f[k2] * ft[k3] * ft[k4];
                acc += ws[i] * ks[i] * (gain - loss);
            }
            prefactor * acc
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct CollisionInvariants {
    /// `∫ Q`
    pub mass_rate: f64,
    /// `∫ e·Q`
    pub energy_rate: f64,
    /// `∫ Q(p) e^{i p_j}` per axis: the rate of the circular means. Not a
    /// conserved quantity on the torus; reported as a diagnostic.
    pub momentum_rate: Vec<C64>,
    /// `−∫ Q ln(F/F̃)`
    pub entropy_production: f64,
    /// The logarithm hit the `1e-300` clamp.
    pub clamped: bool,
    /// `‖Q‖₁ = Σ |Q|`
    pub q_l1: f64,
}

pub fn collision_invariants(
    lattice: &Lattice,
    table: &QuadrupleTable,
    f: &[f64],
    stats: Statistics,
) -> Result<CollisionInvariants> {
    let q = collision_operator(table, f, stats)?;
    let grid = &lattice.grid;
    let mass_rate = lattice.integral(|k| q[k]);
    let energy_rate = lattice.integral(|k| lattice.energy(k) * q[k]);
    let momentum_rate = (0..grid.dim())
        .map(|axis| lattice.integral(|k| C64::from_polar(q[k], grid.momentum(k)[axis])))
        .collect();
    let mut clamped = false;
    let mut log_ratio = Vec::with_capacity(f.len());
    for &x in f {
        let (num, den) = (x, stats.complement(x));
        if num < LOG_CLAMP || den < LOG_CLAMP {
            clamped = true;
        }
        log_ratio.push(num.max(LOG_CLAMP).ln() - den.max(LOG_CLAMP).ln());
    }
    let entropy_production = -lattice.integral(|k| q[k] * log_ratio[k]);
    Ok(CollisionInvariants {
        mass_rate,
        energy_rate,
        momentum_rate,
        entropy_production,
        clamped,
        q_l1: q.iter().map(|x| x.abs()).sum(),
    })
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::collision::{KernelMode, Mollifier, MollifierKind};
    use crate::lattice::{DispersionSpec, PotentialSpec};

    fn setup() -> (Lattice, QuadrupleTable) {
        let lat = Lattice::build(
            2,
            4,
            &DispersionSpec::next_nearest(),
            &PotentialSpec::Exponential {
                strength: 1.0,
                range: 1.0,
            },
        )
        .unwrap();
        let table = QuadrupleTable::build(&lat, Mollifier::new(MollifierKind::Gaussian, 0.3), KernelMode::Plain);
        (lat, table)
    }

    #[test]
    fn constants_are_stationary() {
        let (_, table) = setup();
        for c in [0.0, 0.37, 1.0] {
            let q = collision_operator(&table, &[c; 16], Statistics::Fermion).unwrap();
            assert!(q.iter().all(|&x| x == 0.0), "{c}: {q:?}");
        }
        let q = collision_operator(&table, &[2.5; 16], Statistics::Boson).unwrap();
        assert!(q.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn mass_conserved_and_entropy_produced() {
        let (lat, table) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let f: Vec<f64> = (0..16).map(|_| rng.random_range(0.05..0.95)).collect();
            let inv = collision_invariants(&lat, &table, &f, Statistics::Fermion).unwrap();
            assert!(inv.mass_rate.abs() * 16.0 < 1e-12 * inv.q_l1);
            assert!(inv.entropy_production >= 0.0);
            assert!(!inv.clamped);
        }
    }

    #[test]
    fn range_is_checked() {
        let (_, table) = setup();
        let mut f = vec![0.5; 16];
        f[3] = 1.1;
        assert!(matches!(
            collision_operator(&table, &f, Statistics::Fermion),
            Err(Error::OccupationOutOfRange { mode: 3, .. })
        ));
        assert!(collision_operator(&table, &f, Statistics::Boson).is_ok());
    }

    #[test]
    fn clamp_is_flagged() {
        let (lat, table) = setup();
        let mut f = vec![0.3; 16];
        f[0] = 0.0;
        assert!(
            collision_invariants(&lat, &table, &f, Statistics::Fermion)
                .unwrap()
                .clamped
        );
    }
}
