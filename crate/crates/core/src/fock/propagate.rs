use nalgebra::{DMatrix, DVector};

use super::operator::ManyBodyOperator;
use super::state::StateVector;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, HermitianEigen, C64, ZERO};

/// Sectors up to this dimension are propagated by full diagonalization.
pub const DENSE_LIMIT: usize = 4096;

/// Norm drift that aborts a propagation.
const NORM_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Engine {
    /// Dense up to [`DENSE_LIMIT`], Krylov above.
    #[default]
    Auto,
    Dense,
    Krylov,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KrylovOptions {
    pub subspace: usize,
    /// Target local error per substep.
    pub tolerance: f64,
    pub max_halvings: u32,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self {
            subspace: 30,
            tolerance: 1e-10,
            max_halvings: 60,
        }
    }
}

enum Method {
    Dense(HermitianEigen),
    Krylov(KrylovOptions),
}

/// Computes `e^{−itH} ψ` for a fixed hermitian `H`.
pub struct Propagator<'a> {
    op: &'a ManyBodyOperator,
    method: Method,
}

impl<'a> Propagator<'a> {
    pub fn new(op: &'a ManyBodyOperator, engine: Engine) -> Result<Self> {
        Self::with_options(op, engine, KrylovOptions::default())
    }

    pub fn with_options(op: &'a ManyBodyOperator, engine: Engine, krylov: KrylovOptions) -> Result<Self> {
        if !op.is_hermitian() {
            return Err(Error::NotHermitian {
                residual: op.hermiticity_residual(),
            });
        }
        let dense = match engine {
            Engine::Auto => op.dim() <= DENSE_LIMIT,
            Engine::Dense => true,
            Engine::Krylov => false,
        };
        let method = if dense {
            Method::Dense(hermitian_eigen(&op.to_dense(), 1e-12)?)
        } else {
            Method::Krylov(krylov)
        };
        Ok(Self { op, method })
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.method, Method::Dense(_))
    }

    /// Schrödinger propagation `e^{−itH} ψ`.
    pub fn propagate(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        if psi.sector().dim() != self.op.dim() {
            return Err(Error::DimensionMismatch(format!(
                "state of dimension {} with operator of dimension {}",
                psi.sector().dim(),
                self.op.dim()
            )));
        }
        if t == 0.0 {
            return Ok(psi.clone());
        }
        let amps = match &self.method {
            Method::Dense(eig) => dense_step(eig, psi.amplitudes(), t),
            Method::Krylov(options) => krylov_propagate(self.op, psi.amplitudes(), t, options)?,
        };
        let out = StateVector::new(psi.sector().clone(), amps)?;
        let drift = (out.norm() - psi.norm()).abs();
        if drift > NORM_TOLERANCE {
            return Err(Error::NormDrift {
                time: t,
                drift,
                tolerance: NORM_TOLERANCE,
            });
        }
        Ok(out)
    }

    /// The state `e^{+itH} ψ`, whose expectations are `ρ_t(A) = ρ(e^{−itH} A e^{itH})`
    /// (the Heisenberg-picture convention used by the correlation hierarchy).
    pub fn heisenberg_state(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        self.propagate(psi, -t)
    }
}

/// `e^{−itH} ψ` with the engine chosen by dimension.
pub fn evolve(h: &ManyBodyOperator, psi: &StateVector, t: f64) -> Result<StateVector> {
    Propagator::new(h, Engine::Auto)?.propagate(psi, t)
}

fn dense_step(eig: &HermitianEigen, psi: &[C64], t: f64) -> Vec<C64> {
    let v = &eig.vectors;
    let coeffs = v.adjoint() * DVector::from_column_slice(psi);
    let phased = DVector::from_fn(coeffs.len(), |k, _| {
        coeffs[k] * C64::from_polar(1.0, -t * eig.values[k])
    });
    (v * phased).iter().copied().collect()
}

struct KrylovBasis {
    norm: f64,
    vectors: Vec<Vec<C64>>,
    alphas: Vec<f64>,
    betas: Vec<f64>,
    // β after the last vector; zero on an invariant subspace
    residual: f64,
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn lanczos(op: &ManyBodyOperator, start: &[C64], size: usize) -> KrylovBasis {
    let norm = start.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let mut vectors = vec![start.iter().map(|a| a / norm).collect::<Vec<_>>()];
    let mut alphas = Vec::with_capacity(size);
    let mut betas = Vec::with_capacity(size);
    let mut residual = 0.0;
    let mut w = vec![ZERO; start.len()];
    for j in 0..size.min(start.len()) {
        op.apply_into(&vectors[j], &mut w);
        let alpha = dot(&vectors[j], &w).re;
        alphas.push(alpha);
        // full reorthogonalization, twice
        for _ in 0..2 {
            for v in &vectors {
                let overlap = dot(v, &w);
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= overlap * vi;
                }
            }
        }
        let beta = w.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let scale = alphas.iter().map(|a| a.abs()).fold(1e-300, f64::max);
        if beta <= 1e-13 * scale || j + 1 == size.min(start.len()) {
            residual = if j + 1 == start.len() { 0.0 } else { beta };
            if beta <= 1e-13 * scale {
                residual = 0.0;
            }
            break;
        }
        betas.push(beta);
        vectors.push(w.iter().map(|a| a / beta).collect());
    }
    KrylovBasis {
        norm,
        vectors,
        alphas,
        betas,
        residual,
    }
}

impl KrylovBasis {
    /// Coefficients of `e^{−iτT} e₁` and the a-posteriori error estimate.
    fn exponentiate(&self, eig: &nalgebra::SymmetricEigen<f64, nalgebra::Dyn>, tau: f64) -> (Vec<C64>, f64) {
        let m = self.alphas.len();
        let s = &eig.eigenvectors;
        let coeffs: Vec<C64> = (0..m)
            .map(|i| {
                (0..m)
                    .map(|k| C64::from_polar(s[(i, k)] * s[(0, k)], -tau * eig.eigenvalues[k]))
                    .sum()
            })
            .collect();
        let err = self.norm * self.residual * coeffs[m - 1].norm();
        (coeffs, err)
    }

    fn combine(&self, coeffs: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; self.vectors[0].len()];
        for (c, v) in coeffs.iter().zip(&self.vectors) {
            let c = c * self.norm;
            for (o, x) in out.iter_mut().zip(v) {
                *o += c * x;
            }
        }
        out
    }
}

fn krylov_propagate(op: &ManyBodyOperator, psi: &[C64], t: f64, options: &KrylovOptions) -> Result<Vec<C64>> {
    let mut state = psi.to_vec();
    let mut elapsed = 0.0;
    let mut step = t;
    while (t - elapsed).abs() > 0.0 {
        let remaining = t - elapsed;
        if step.abs() > remaining.abs() {
            step = remaining;
        }
        if state.iter().all(|a| *a == ZERO) {
            return Ok(state);
        }
        let basis = lanczos(op, &state, options.subspace);
        let m = basis.alphas.len();
        let tri = DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                basis.alphas[i]
            } else if i + 1 == j {
                basis.betas[i]
            } else if j + 1 == i {
                basis.betas[j]
            } else {
                0.0
            }
        });
        let eig = nalgebra::SymmetricEigen::new(tri);
        let mut halvings = 0;
        loop {
            let (coeffs, err) = basis.exponentiate(&eig, step);
            if err <= options.tolerance {
                state = basis.combine(&coeffs);
                elapsed += step;
                if halvings == 0 {
                    step *= 2.0;
                }
                break;
            }
            halvings += 1;
            if halvings > options.max_halvings {
                return Err(Error::KrylovStall(format!(
                    "error estimate {err:e} above {:e} after {halvings} halvings at t = {elapsed}",
                    options.tolerance
                )));
            }
            step *= 0.5;
        }
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::fock::{build_hamiltonian, two_point_matrix, FockSector};
    use crate::lattice::{DispersionSpec, Lattice, PotentialSpec};
    use crate::linalg::random_isometry;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn instance(lambda: f64) -> (Lattice, Arc<FockSector>, ManyBodyOperator) {
        let lat = Lattice::build(
            1,
            8,
            &DispersionSpec::next_nearest(),
            &PotentialSpec::Exponential {
                strength: 1.0,
                range: 1.0,
            },
        )
        .unwrap();
        let sector = Arc::new(FockSector::new(8, 4).unwrap());
        let h = build_hamiltonian(&lat, sector.clone(), lambda).unwrap();
        (lat, sector, h)
    }

    fn random_state(sector: &Arc<FockSector>, seed: u64) -> StateVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_isometry(&mut rng, sector.modes(), sector.particles());
        StateVector::slater_orbitals(sector.clone(), &u).unwrap()
    }

    #[test]
    fn zero_time_is_identity() {
        let (_, sector, h) = instance(0.5);
        let psi = random_state(&sector, 1);
        let out = evolve(&h, &psi, 0.0).unwrap();
        assert_eq!(out.amplitudes(), psi.amplitudes());
    }

    #[test]
    fn unitarity_and_energy_conservation() {
        let (_, sector, h) = instance(0.7);
        let psi = random_state(&sector, 2);
        assert!((psi.norm() - 1.0).abs() < 1e-12);
        let prop = Propagator::new(&h, Engine::Dense).unwrap();
        let e0 = h.expectation(&psi).re;
        for t in [0.3, 1.0, 4.0, 10.0] {
            let out = prop.propagate(&psi, t).unwrap();
            assert!((out.norm() - 1.0).abs() < 1e-9);
            assert!((h.expectation(&out).re - e0).abs() < 1e-8);
        }
    }

    #[test]
    fn krylov_matches_dense() {
        let (_, sector, h) = instance(0.9);
        let psi = random_state(&sector, 3);
        let dense = Propagator::new(&h, Engine::Dense).unwrap();
        let krylov = Propagator::new(&h, Engine::Krylov).unwrap();
        assert!(!krylov.is_dense());
        for t in [0.05, 1.3, 7.5, -2.0] {
            let a = dense.propagate(&psi, t).unwrap();
            let b = krylov.propagate(&psi, t).unwrap();
            let diff: f64 = a
                .amplitudes()
                .iter()
                .zip(b.amplitudes())
                .map(|(x, y)| (x - y).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(diff < 1e-8, "t = {t}: {diff:e}");
        }
    }

    #[test]
    fn free_phase_law() {
        let (lat, sector, h) = instance(0.0);
        let psi = random_state(&sector, 4);
        let nu0 = two_point_matrix(&psi);
        let prop = Propagator::new(&h, Engine::Auto).unwrap();
        let t = 1.7;
        let nu = two_point_matrix(&prop.heisenberg_state(&psi, t).unwrap());
        for p in 0..8 {
            for q in 0..8 {
                let expected = nu0.get(p, q) * C64::from_polar(1.0, -t * (lat.energy(p) - lat.energy(q)));
                assert!((nu.get(p, q) - expected).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn refuses_non_hermitian() {
        let sector = Arc::new(FockSector::new(3, 1).unwrap());
        let op = ManyBodyOperator::from_triplets(sector, vec![(0, 1, C64::new(1.0, 0.0))]);
        assert!(matches!(
            Propagator::new(&op, Engine::Auto),
            Err(Error::NotHermitian { .. })
        ));
    }
}
