//! The discrete momentum torus `(2π/L)ℤ^d / 2πℤ^d` with its dispersion,
//! pair potential and antisymmetrized interaction vertex.
//!
//! Momenta are stored as flat indices into `{0, …, L-1}^d` (component 0 is
//! the fastest-varying digit). Momentum arithmetic is exact integer
//! arithmetic on these digits; floating point only enters through energies
//! and Fourier coefficients.

use std::f64::consts::PI;
use std::iter::Sum;
use std::ops::Mul;

use crate::error::{Error, Result};

/// Default cap on the number of momentum modes `L^d`.
pub const DEFAULT_MODE_CAP: usize = 4096;

/// The momentum torus `Λ*`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentumGrid {
    dim: usize,
    side: usize,
    len: usize,
}

impl MomentumGrid {
    pub fn new(dim: usize, side: usize) -> Result<Self> {
        Self::with_cap(dim, side, DEFAULT_MODE_CAP)
    }

    pub fn with_cap(dim: usize, side: usize, cap: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidGrid("dimension must be at least 1".into()));
        }
        if side < 2 {
            return Err(Error::InvalidGrid(format!(
                "side length must be at least 2, got {side}"
            )));
        }
        let len = (0..dim)
            .try_fold(1usize, |acc, _| acc.checked_mul(side))
            .filter(|&n| n <= cap)
            .ok_or(Error::ModeCapExceeded {
                modes: (side as f64).powi(dim as i32) as usize,
                cap,
            })?;
        Ok(Self { dim, side, len })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> usize {
        self.side
    }

    /// Number of modes, `L^d`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `L^{-d}`, the measure of one momentum cell.
    pub fn cell_volume(&self) -> f64 {
        1.0 / self.len as f64
    }

    /// Integer grid coordinates of a mode, each in `0..L`.
    pub fn coords(&self, index: usize) -> Vec<usize> {
        let mut rest = index;
        (0..self.dim)
            .map(|_| {
                let c = rest % self.side;
                rest /= self.side;
                c
            })
            .collect()
    }

    /// Flat index of integer coordinates, reduced mod `L` componentwise.
    pub fn index_of(&self, coords: &[i64]) -> usize {
        assert_eq!(coords.len(), self.dim, "coordinate arity");
        let side = self.side as i64;
        coords
            .iter()
            .rev()
            .fold(0usize, |acc, &c| acc * self.side + c.rem_euclid(side) as usize)
    }

    /// The momentum vector `(2π/L)·coords`, every component in `[0, 2π)`.
    pub fn momentum(&self, index: usize) -> Vec<f64> {
        let step = 2.0 * PI / self.side as f64;
        self.coords(index).into_iter().map(|c| c as f64 * step).collect()
    }

    /// Grid index of `Σ sᵢ kᵢ` (mod 2π componentwise), exact.
    pub fn combine(&self, terms: &[(i32, usize)]) -> usize {
        let side = self.side as i64;
        let mut acc = vec![0i64; self.dim];
        for &(sign, k) in terms {
            debug_assert!(k < self.len, "mode index {k} out of range");
            let mut rest = k;
            for a in acc.iter_mut() {
                *a += sign as i64 * (rest % self.side) as i64;
                rest /= self.side;
            }
        }
        let mut index = 0usize;
        for &a in acc.iter().rev() {
            index = index * self.side + a.rem_euclid(side) as usize;
        }
        index
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        self.combine_pair(a, b, 1)
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.combine_pair(a, b, -1)
    }

    pub fn neg(&self, a: usize) -> usize {
        self.combine(&[(-1, a)])
    }

    fn combine_pair(&self, a: usize, b: usize, sign: i64) -> usize {
        let (mut ra, mut rb) = (a, b);
        let mut index = 0usize;
        let mut scale = 1usize;
        for _ in 0..self.dim {
            let ca = (ra % self.side) as i64;
            let cb = (rb % self.side) as i64;
            ra /= self.side;
            rb /= self.side;
            let c = (ca + sign * cb).rem_euclid(self.side as i64) as usize;
            index += c * scale;
            scale *= self.side;
        }
        index
    }

    /// `k₁ + k₂ = k₃ + k₄` on the torus.
    pub fn conserves(&self, k1: usize, k2: usize, k3: usize, k4: usize) -> bool {
        self.add(k1, k2) == self.add(k3, k4)
    }

    /// The momentum `k₄ = k₁ + k₂ − k₃` closing a conserving quadruple.
    pub fn close_quadruple(&self, k1: usize, k2: usize, k3: usize) -> usize {
        self.combine(&[(1, k1), (1, k2), (-1, k3)])
    }

    /// `L^{-d} Σ_p f(p)`, the lattice image of `∫ dp`.
    pub fn integral<T, F>(&self, f: F) -> T
    where
        F: Fn(usize) -> T,
        T: Sum + Mul<f64, Output = T>,
    {
        (0..self.len).map(f).sum::<T>() * self.cell_volume()
    }
}

/// Choice of single-particle dispersion `e(p)`.
#[derive(Clone, Debug, PartialEq, Default)]
pub enum DispersionSpec {
    /// `e(p) = 2 Σᵢ (1 − cos pᵢ)`.
    #[default]
    NearestNeighbor,
    /// `e(p) = Σᵢ [2(1 − cos pᵢ) + 2γ(1 − cos 2pᵢ)]`.
    NextNearestNeighbor { gamma: f64 },
    /// Explicit energies in flat mode order.
    Table(Vec<f64>),
}

impl DispersionSpec {
    /// The next-nearest-neighbor dispersion with the default `γ = 0.4`.
    pub fn next_nearest() -> Self {
        DispersionSpec::NextNearestNeighbor { gamma: 0.4 }
    }
}

#[derive(Clone, Debug)]
pub struct Dispersion {
    spec: DispersionSpec,
    energies: Vec<f64>,
}

impl Dispersion {
    pub fn new(grid: &MomentumGrid, spec: &DispersionSpec) -> Result<Self> {
        let energies: Vec<f64> = match spec {
            DispersionSpec::NearestNeighbor => (0..grid.len())
                .map(|k| grid.momentum(k).iter().map(|p| 2.0 * (1.0 - p.cos())).sum())
                .collect(),
            DispersionSpec::NextNearestNeighbor { gamma } => (0..grid.len())
                .map(|k| {
                    grid.momentum(k)
                        .iter()
                        .map(|p| 2.0 * (1.0 - p.cos()) + 2.0 * gamma * (1.0 - (2.0 * p).cos()))
                        .sum()
                })
                .collect(),
            DispersionSpec::Table(values) => {
                if values.len() != grid.len() {
                    return Err(Error::InvalidGrid(format!(
                        "dispersion table has {} entries, grid has {} modes",
                        values.len(),
                        grid.len()
                    )));
                }
                values.clone()
            }
        };
        if let Some(k) = energies.iter().position(|e| !e.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite energy at mode {k}")));
        }
        Ok(Self {
            spec: spec.clone(),
            energies,
        })
    }

    pub fn spec(&self) -> &DispersionSpec {
        &self.spec
    }

    #[inline]
    pub fn energy(&self, k: usize) -> f64 {
        self.energies[k]
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }
}

/// Choice of real-space pair potential `v(x)`.
#[derive(Clone, Debug, PartialEq, Default)]
pub enum PotentialSpec {
    #[default]
    Zero,
    /// `v(x) = s` everywhere; its transform lives at `k = 0` only.
    Constant { strength: f64 },
    /// `v(x) = s` on the `2d` nearest neighbours of the origin.
    NearestNeighbor { strength: f64 },
    /// `v(x) = s·exp(−|x|/r)` with the minimal-image Euclidean distance.
    Exponential { strength: f64, range: f64 },
    /// Explicit `v(x)` in flat site order.
    Table(Vec<f64>),
}

#[derive(Clone, Debug)]
pub struct PairPotential {
    real_space: Vec<f64>,
    fourier: Vec<f64>,
}

impl PairPotential {
    pub fn new(grid: &MomentumGrid, spec: &PotentialSpec) -> Result<Self> {
        let n = grid.len();
        let side = grid.side() as i64;
        let real_space: Vec<f64> = match spec {
            PotentialSpec::Zero => vec![0.0; n],
            PotentialSpec::Constant { strength } => vec![*strength; n],
            PotentialSpec::NearestNeighbor { strength } => (0..n)
                .map(|x| {
                    let c = grid.coords(x);
                    let dist: i64 = c
                        .iter()
                        .map(|&ci| {
                            let ci = ci as i64;
                            ci.min(side - ci)
                        })
                        .sum();
                    if dist == 1 {
                        *strength
                    } else {
                        0.0
                    }
                })
                .collect(),
            PotentialSpec::Exponential { strength, range } => {
                if *range <= 0.0 {
                    return Err(Error::InvalidGrid("potential range must be positive".into()));
                }
                (0..n)
                    .map(|x| {
                        let r2: f64 = grid
                            .coords(x)
                            .iter()
                            .map(|&ci| {
                                let ci = ci as i64;
                                let m = ci.min(side - ci) as f64;
                                m * m
                            })
                            .sum();
                        strength * (-r2.sqrt() / range).exp()
                    })
                    .collect()
            }
            PotentialSpec::Table(values) => {
                if values.len() != n {
                    return Err(Error::InvalidGrid(format!(
                        "potential table has {} entries, grid has {n} sites",
                        values.len()
                    )));
                }
                values.clone()
            }
        };

        for x in 0..n {
            let mx = grid.neg(x);
            let (a, b) = (real_space[x], real_space[mx]);
            if !a.is_finite() || (a - b).abs() > 1e-14 * a.abs().max(b.abs()).max(1.0) {
                return Err(Error::AsymmetricPotential {
                    x: grid.coords(x),
                    forward: a,
                    backward: b,
                });
            }
        }

        // v symmetric, so the transform is a pure cosine sum.
        let sites: Vec<Vec<f64>> = (0..n)
            .map(|x| grid.coords(x).iter().map(|&c| c as f64).collect())
            .collect();
        let step = 2.0 * PI / grid.side() as f64;
        let fourier = (0..n)
            .map(|k| {
                let kc: Vec<f64> = grid.coords(k).iter().map(|&c| c as f64 * step).collect();
                real_space
                    .iter()
                    .zip(&sites)
                    .filter(|(v, _)| **v != 0.0)
                    .map(|(v, x)| {
                        let phase: f64 = kc.iter().zip(x).map(|(a, b)| a * b).sum();
                        v * phase.cos()
                    })
                    .sum()
            })
            .collect();

        Ok(Self { real_space, fourier })
    }

    pub fn real_space(&self) -> &[f64] {
        &self.real_space
    }

    /// `v̂(k) = Σ_x v(x) e^{−ik·x}` (real and even for symmetric `v`).
    #[inline]
    pub fn fourier(&self, k: usize) -> f64 {
        self.fourier[k]
    }

    pub fn fourier_table(&self) -> &[f64] {
        &self.fourier
    }
}

/// Grid, dispersion and potential built together; read-only afterwards.
#[derive(Clone, Debug)]
pub struct Lattice {
    pub grid: MomentumGrid,
    pub dispersion: Dispersion,
    pub potential: PairPotential,
}

impl Lattice {
    pub fn build(dim: usize, side: usize, dispersion: &DispersionSpec, potential: &PotentialSpec) -> Result<Self> {
        Self::build_with_cap(dim, side, dispersion, potential, DEFAULT_MODE_CAP)
    }

    pub fn build_with_cap(
        dim: usize,
        side: usize,
        dispersion: &DispersionSpec,
        potential: &PotentialSpec,
        cap: usize,
    ) -> Result<Self> {
        let grid = MomentumGrid::with_cap(dim, side, cap)?;
        let dispersion = Dispersion::new(&grid, dispersion)?;
        let potential = PairPotential::new(&grid, potential)?;
        Ok(Self {
            grid,
            dispersion,
            potential,
        })
    }

    pub fn modes(&self) -> usize {
        self.grid.len()
    }

    #[inline]
    pub fn energy(&self, k: usize) -> f64 {
        self.dispersion.energy(k)
    }

    /// `Δe = e(k₁) + e(k₂) − e(k₃) − e(k₄)`, evaluated as a difference of pair
    /// sums so that swapping the pairs flips the sign exactly.
    #[inline]
    pub fn delta_e(&self, k1: usize, k2: usize, k3: usize, k4: usize) -> f64 {
        (self.energy(k1) + self.energy(k2)) - (self.energy(k3) + self.energy(k4))
    }

    /// Antisymmetrized two-body vertex
    /// `¼(v̂(k₁−k₄) − v̂(k₂−k₄) − v̂(k₁−k₃) + v̂(k₂−k₃))`, or 0 when
    /// `k₁ + k₂ ≠ k₃ + k₄`. The `L^d` carried by the momentum delta is not
    /// included.
    pub fn vertex(&self, k1: usize, k2: usize, k3: usize, k4: usize) -> f64 {
        if !self.grid.conserves(k1, k2, k3, k4) {
            return 0.0;
        }
        self.vertex_unchecked(k1, k2, k3, k4)
    }

    /// The vertex formula without the momentum-conservation support.
    pub fn vertex_unchecked(&self, k1: usize, k2: usize, k3: usize, k4: usize) -> f64 {
        let g = &self.grid;
        let v = &self.potential;
        0.25 * (v.fourier(g.sub(k1, k4)) - v.fourier(g.sub(k2, k4)) - v.fourier(g.sub(k1, k3))
            + v.fourier(g.sub(k2, k3)))
    }

    /// Coefficient of `α⁺_{k₁} α⁺_{k₂} α_{k₃} α_{k₄}` in the interaction
    /// operator with Kronecker-normalized modes: `L^{-d}·vertex`.
    #[inline]
    pub fn interaction(&self, k1: usize, k2: usize, k3: usize, k4: usize) -> f64 {
        self.grid.cell_volume() * self.vertex(k1, k2, k3, k4)
    }

    /// `L^{-d} Σ_p f(p)`.
    pub fn integral<T, F>(&self, f: F) -> T
    where
        F: Fn(usize) -> T,
        T: Sum + Mul<f64, Output = T>,
    {
        self.grid.integral(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(side: usize, potential: PotentialSpec) -> Lattice {
        Lattice::build(1, side, &DispersionSpec::NearestNeighbor, &potential).unwrap()
    }

    #[test]
    fn one_dimensional_modes() {
        let g = MomentumGrid::new(1, 4).unwrap();
        let p: Vec<f64> = (0..4).map(|k| g.momentum(k)[0]).collect();
        let expected = [0.0, PI / 2.0, PI, 3.0 * PI / 2.0];
        for (a, b) in p.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn grid_rejects_bad_shapes() {
        assert!(MomentumGrid::new(0, 4).is_err());
        assert!(MomentumGrid::new(1, 1).is_err());
        assert!(matches!(
            MomentumGrid::with_cap(3, 10, 100),
            Err(Error::ModeCapExceeded { cap: 100, .. })
        ));
    }

    #[test]
    fn index_roundtrip() {
        let g = MomentumGrid::new(3, 5).unwrap();
        for k in 0..g.len() {
            let c: Vec<i64> = g.coords(k).iter().map(|&c| c as i64).collect();
            assert_eq!(g.index_of(&c), k);
        }
        assert_eq!(g.index_of(&[-1, 5, 7]), g.index_of(&[4, 0, 2]));
    }

    #[test]
    fn combine_examples() {
        let g = MomentumGrid::new(1, 4).unwrap();
        assert_eq!(g.combine(&[(1, 3), (1, 0)]), 3);
        assert_eq!(g.combine(&[(1, 1), (1, 3)]), 0);
        let g2 = MomentumGrid::new(2, 3).unwrap();
        for k1 in 0..9 {
            for k2 in 0..9 {
                assert_eq!(g2.combine(&[(1, k1), (1, k2), (-1, k1)]), k2);
                assert_eq!(g2.sub(g2.add(k1, k2), k2), k1);
            }
        }
    }

    #[test]
    fn nearest_neighbor_dispersion() {
        let lat = ring(4, PotentialSpec::Zero);
        assert_eq!(lat.energy(0), 0.0);
        assert!((lat.integral(|k| lat.energy(k)) - 2.0).abs() < 1e-14);
        for k in 0..4 {
            assert!((lat.energy(k) - lat.energy(lat.grid.neg(k))).abs() < 1e-14);
        }
    }

    #[test]
    fn nearest_neighbor_potential_transform() {
        let lat = ring(4, PotentialSpec::NearestNeighbor { strength: 1.0 });
        assert!((lat.potential.fourier(2) + 2.0).abs() < 1e-14);
        for k in 0..4 {
            let expected = 2.0 * (PI / 2.0 * k as f64).cos();
            assert!((lat.potential.fourier(k) - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_asymmetric_table() {
        let grid = MomentumGrid::new(1, 4).unwrap();
        let err = PairPotential::new(&grid, &PotentialSpec::Table(vec![0.0, 1.0, 0.0, 0.5]));
        assert!(matches!(err, Err(Error::AsymmetricPotential { .. })));
    }

    #[test]
    fn vertex_examples() {
        let lat = ring(4, PotentialSpec::Zero);
        assert_eq!(lat.vertex(0, 2, 1, 1), 0.0);
        let lat = ring(4, PotentialSpec::NearestNeighbor { strength: 1.0 });
        assert!(lat.vertex(0, 2, 1, 1).abs() < 1e-15);
        assert_eq!(lat.vertex(0, 1, 2, 2), 0.0);
    }

    #[test]
    fn delta_normalization() {
        let g = MomentumGrid::new(2, 3).unwrap();
        let q = 5;
        let n = g.len() as f64;
        let v: f64 = g.integral(|p| if p == q { n } else { 0.0 });
        assert!((v - 1.0).abs() < 1e-15);
        assert!((g.integral(|_| 1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn vertex_symmetries_exhaustive() {
        let specs = [
            (1, 4, PotentialSpec::NearestNeighbor { strength: 0.7 }),
            (
                2,
                4,
                PotentialSpec::Exponential {
                    strength: 1.3,
                    range: 0.8,
                },
            ),
            (
                1,
                16,
                PotentialSpec::Exponential {
                    strength: -0.4,
                    range: 2.0,
                },
            ),
        ];
        for (d, l, pot) in specs {
            let lat = Lattice::build(d, l, &DispersionSpec::next_nearest(), &pot).unwrap();
            let m = lat.modes();
            for k in 0..m {
                let f = lat.potential.fourier(k);
                assert!((f - lat.potential.fourier(lat.grid.neg(k))).abs() < 1e-12);
            }
            for k1 in 0..m {
                for k2 in 0..m {
                    for k3 in 0..m {
                        for k4 in 0..m {
                            let v = lat.vertex(k1, k2, k3, k4);
                            assert!((v + lat.vertex(k2, k1, k3, k4)).abs() < 1e-14);
                            assert!((v + lat.vertex(k1, k2, k4, k3)).abs() < 1e-14);
                            assert!((v - lat.vertex(k4, k3, k2, k1)).abs() < 1e-14);
                            if v != 0.0 {
                                assert!(lat.grid.conserves(k1, k2, k3, k4));
                            }
                        }
                    }
                }
            }
        }
    }
}
