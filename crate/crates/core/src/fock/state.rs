use std::sync::Arc;

use nalgebra::DMatrix;

use super::sector::FockSector;
use crate::error::{Error, Result};
use crate::linalg::{det_from_fn, C64, ONE, ZERO};

/// Amplitudes over the basis of one Fock sector.
#[derive(Clone, Debug)]
pub struct StateVector {
    sector: Arc<FockSector>,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn new(sector: Arc<FockSector>, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != sector.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for a sector of dimension {}",
                amps.len(),
                sector.dim()
            )));
        }
        Ok(Self { sector, amps })
    }

    /// The occupation-basis state with exactly `modes` filled.
    pub fn slater(sector: Arc<FockSector>, modes: &[usize]) -> Result<Self> {
        let mut mask = 0u64;
        for &m in modes {
            if m >= sector.modes() || mask & (1 << m) != 0 {
                return Err(Error::InvalidSector(format!(
                    "invalid or repeated mode {m} in Slater state"
                )));
            }
            mask |= 1 << m;
        }
        let index = sector.rank(mask).ok_or_else(|| {
            Error::InvalidSector(format!(
                "{} occupied modes in a {}-particle sector",
                modes.len(),
                sector.particles()
            ))
        })?;
        let mut amps = vec![ZERO; sector.dim()];
        amps[index] = ONE;
        Ok(Self { sector, amps })
    }

    /// `Π_j b⁺_j |0⟩` with `b⁺_j = Σ_m U[m, j] α⁺_m` for the `n` columns of
    /// `orbitals`. Orthonormal columns give a normalized state.
    pub fn slater_orbitals(sector: Arc<FockSector>, orbitals: &DMatrix<C64>) -> Result<Self> {
        let n = sector.particles();
        if orbitals.nrows() != sector.modes() || orbitals.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "orbital matrix is {}x{}, sector needs {}x{}",
                orbitals.nrows(),
                orbitals.ncols(),
                sector.modes(),
                n
            )));
        }
        let amps = sector
            .basis()
            .iter()
            .map(|&mask| {
                let rows: Vec<usize> = (0..sector.modes()).filter(|m| mask & (1 << m) != 0).collect();
                det_from_fn(n, |i, j| orbitals[(rows[i], j)])
            })
            .collect();
        Ok(Self { sector, amps })
    }

    pub fn sector(&self) -> &Arc<FockSector> {
        &self.sector
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }
}
