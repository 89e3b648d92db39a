use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::sector::{apply_ladder, FockSector, Ladder};
use super::state::StateVector;
use crate::error::{Error, Result};
use crate::linalg::{C64, ZERO};

/// Rows per rayon task in the sparse matrix-vector product.
const PAR_ROWS: usize = 512;

/// Sparse (CSR) operator on one Fock sector.
#[derive(Clone, Debug)]
pub struct ManyBodyOperator {
    sector: Arc<FockSector>,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<C64>,
    hermitian: bool,
}

impl ManyBodyOperator {
    /// Assemble from `(row, col, value)` triplets; duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(sector: Arc<FockSector>, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        let dim = sector.dim();
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c as u32);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        let mut op = Self {
            sector,
            row_ptr,
            cols,
            vals,
            hermitian: false,
        };
        op.drop_zeros();
        op
    }

    fn drop_zeros(&mut self) {
        let dim = self.dim();
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(self.cols.len());
        let mut vals = Vec::with_capacity(self.vals.len());
        for r in 0..dim {
            for idx in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.vals[idx] != ZERO {
                    cols.push(self.cols[idx]);
                    vals.push(self.vals[idx]);
                }
            }
            row_ptr[r + 1] = cols.len();
        }
        self.row_ptr = row_ptr;
        self.cols = cols;
        self.vals = vals;
    }

    pub fn sector(&self) -> &Arc<FockSector> {
        &self.sector
    }

    pub fn dim(&self) -> usize {
        self.sector.dim()
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Verify `max |A − A†| < tolerance` and set the hermitian flag.
    pub fn certify_hermitian(&mut self, tolerance: f64) -> Result<()> {
        let residual = self.hermiticity_residual();
        if residual >= tolerance {
            return Err(Error::NotHermitian { residual });
        }
        self.hermitian = true;
        Ok(())
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.cols[range.clone()].binary_search(&(col as u32)) {
            Ok(pos) => self.vals[range.start + pos],
            Err(_) => ZERO,
        }
    }

    pub fn hermiticity_residual(&self) -> f64 {
        (0..self.dim())
            .into_par_iter()
            .map(|r| {
                (self.row_ptr[r]..self.row_ptr[r + 1])
                    .map(|idx| (self.vals[idx] - self.get(self.cols[idx] as usize, r).conj()).norm())
                    .fold(0.0f64, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![ZERO; self.dim()];
        self.apply_into(x, &mut y);
        y
    }

    pub fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.dim());
        assert_eq!(y.len(), self.dim());
        let row = |r: usize| -> C64 {
            (self.row_ptr[r]..self.row_ptr[r + 1])
                .map(|idx| self.vals[idx] * x[self.cols[idx] as usize])
                .sum()
        };
        if self.dim() >= 4 * PAR_ROWS {
            y.par_chunks_mut(PAR_ROWS).enumerate().for_each(|(chunk, out)| {
                for (i, slot) in out.iter_mut().enumerate() {
                    *slot = row(chunk * PAR_ROWS + i);
                }
            });
        } else {
            for (r, slot) in y.iter_mut().enumerate() {
                *slot = row(r);
            }
        }
    }

    /// `⟨ψ|A|ψ⟩`.
    pub fn expectation(&self, psi: &StateVector) -> C64 {
        let a_psi = self.apply(psi.amplitudes());
        psi.amplitudes().iter().zip(&a_psi).map(|(l, r)| l.conj() * r).sum()
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for r in 0..self.dim() {
            for idx in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.cols[idx] as usize)] += self.vals[idx];
            }
        }
        m
    }

    /// `self + scale·other` on the same sector.
    pub fn add_scaled(&self, other: &ManyBodyOperator, scale: C64) -> Result<ManyBodyOperator> {
        if self.sector != other.sector && *self.sector != *other.sector {
            return Err(Error::DimensionMismatch("operators live on different sectors".into()));
        }
        let mut triplets = Vec::with_capacity(self.nnz() + other.nnz());
        for (op, s) in [(self, C64::new(1.0, 0.0)), (other, scale)] {
            for r in 0..op.dim() {
                for idx in op.row_ptr[r]..op.row_ptr[r + 1] {
                    triplets.push((r, op.cols[idx] as usize, s * op.vals[idx]));
                }
            }
        }
        Ok(ManyBodyOperator::from_triplets(self.sector.clone(), triplets))
    }
}

/// A quartic operator `Σ c(k₁,k₂,k₃,k₄) α⁺_{k₁} α⁺_{k₂} α_{k₃} α_{k₄}` stored
/// as its nonzero coefficients.
#[derive(Clone, Debug, Default)]
pub struct QuarticTerms {
    modes: usize,
    terms: Vec<([usize; 4], C64)>,
}

impl QuarticTerms {
    pub fn new(modes: usize) -> Self {
        Self {
            modes,
            terms: Vec::new(),
        }
    }

    /// Dense enumeration of all `M⁴` index tuples; keeps nonzero values.
    pub fn from_fn(modes: usize, coefficient: impl Fn([usize; 4]) -> C64) -> Self {
        let mut out = Self::new(modes);
        for k1 in 0..modes {
            for k2 in 0..modes {
                for k3 in 0..modes {
                    for k4 in 0..modes {
                        out.push([k1, k2, k3, k4], coefficient([k1, k2, k3, k4]));
                    }
                }
            }
        }
        out
    }

    pub fn push(&mut self, k: [usize; 4], value: C64) {
        assert!(k.iter().all(|&m| m < self.modes), "mode out of range");
        if value != ZERO {
            self.terms.push((k, value));
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn terms(&self) -> &[([usize; 4], C64)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn act(k: [usize; 4], mask: u64) -> Option<(u64, f64)> {
        let ops = [
            Ladder::Annihilate(k[3]),
            Ladder::Annihilate(k[2]),
            Ladder::Create(k[1]),
            Ladder::Create(k[0]),
        ];
        ops.iter().try_fold((mask, 1.0), |(m, s), &op| {
            apply_ladder(m, op).map(|(m2, s2)| (m2, s * s2))
        })
    }

    /// Matrix on `sector` (number-conserving, so it maps the sector to itself).
    pub fn to_operator(&self, sector: Arc<FockSector>) -> Result<ManyBodyOperator> {
        if sector.modes() != self.modes {
            return Err(Error::DimensionMismatch(format!(
                "quartic operator on {} modes applied to a {}-mode sector",
                self.modes,
                sector.modes()
            )));
        }
        let triplets: Vec<(usize, usize, C64)> = (0..sector.dim())
            .into_par_iter()
            .flat_map_iter(|col| {
                let mask = sector.mask(col);
                let sector = &sector;
                self.terms.iter().filter_map(move |&(k, c)| {
                    let (out, sign) = Self::act(k, mask)?;
                    let row = sector.rank(out).expect("number-conserving");
                    Some((row, col, c * sign))
                })
            })
            .collect();
        Ok(ManyBodyOperator::from_triplets(sector, triplets))
    }

    /// `⟨ψ| Σ c α⁺α⁺αα |ψ⟩` without assembling the matrix.
    pub fn expectation(&self, psi: &StateVector) -> C64 {
        let sector = psi.sector();
        let amps = psi.amplitudes();
        // per-column partials are summed sequentially so the result does not
        // depend on the thread count
        let partials: Vec<C64> = (0..sector.dim())
            .into_par_iter()
            .map(|col| {
                let mask = sector.mask(col);
                let a = amps[col];
                if a == ZERO {
                    return ZERO;
                }
                self.terms
                    .iter()
                    .filter_map(|&(k, c)| {
                        let (out, sign) = Self::act(k, mask)?;
                        let row = sector.rank(out)?;
                        Some(amps[row].conj() * c * a * sign)
                    })
                    .sum::<C64>()
            })
            .collect();
        partials.iter().sum()
    }
}
