use rayon::prelude::*;

use super::coefficients::QuarticCoefficient;
use crate::error::{Error, Result};
use crate::fock::interaction_terms;
use crate::lattice::Lattice;
use crate::linalg::{C64, ZERO};
use crate::quasifree::CorrelationMatrix;

/// Hermiticity tolerance on the two-point matrix fed to the closure.
const HERMITIAN_TOLERANCE: f64 = 1e-10;

/// Quasifree weight multiplying `M_pq(k₁,…,k₄,l₁,…,l₄)`:
/// `4(ν₁₁ν₂₂ν̃₃₃ν̃₄₄ + 4ν₁₁ν₂₃ν₄₂ν̃₃₄)` with `ν_ij = ν_{kᵢ lⱼ}`.
#[inline]
fn weight(nu: &CorrelationMatrix, k: [usize; 4], l: [usize; 4]) -> C64 {
    let n = |i: usize, j: usize| nu.get(k[i], l[j]);
    let t = |i: usize, j: usize| nu.tilde(k[i], l[j]);
    let direct = n(0, 0) * n(1, 1) * t(2, 2) * t(3, 3);
    let exchange = n(0, 0) * n(1, 2) * n(3, 1) * t(2, 3);
    4.0 * (direct + 4.0 * exchange)
}

/// `ρ([Φ, G_pq(τ)])` in a quasifree state with two-point function `ν`.
///
/// `[Φ, G] = Σ M α⁺_{k₁}α⁺_{k₂}α_{l₄}α_{l₃} α⁺_{k₃}α⁺_{k₄}α_{l₂}α_{l₁}` with
/// `M = Φ(k₁,k₂,l₄,l₃) G(k₃,k₄,l₂,l₁) − Φ(k₃,k₄,l₂,l₁) G(k₁,k₂,l₄,l₃)`. The
/// eight-fold sum is a contraction of the two sparse coefficient lists.
pub fn closure_rhs(lattice: &Lattice, p: usize, q: usize, tau: f64, nu: &CorrelationMatrix) -> Result<C64> {
    if nu.modes() != lattice.modes() {
        return Err(Error::DimensionMismatch(format!(
            "two-point matrix has {} modes, lattice has {}",
            nu.modes(),
            lattice.modes()
        )));
    }
    let residual = nu.hermiticity_residual();
    if residual > HERMITIAN_TOLERANCE {
        return Err(Error::NotHermitian { residual });
    }
    let phi = interaction_terms(lattice);
    let g = QuarticCoefficient::duhamel(lattice, p, q, tau).terms();
    let g = g.terms();
    let partials: Vec<C64> = phi
        .terms()
        .par_iter()
        .map(|&(a, phi_a)| {
            let mut acc = ZERO;
            for &(b, g_b) in g {
                // Φ G: (k₁,k₂,l₄,l₃) = a, (k₃,k₄,l₂,l₁) = b
                let forward = weight(nu, [a[0], a[1], b[0], b[1]], [b[3], b[2], a[3], a[2]]);
                // G Φ: (k₁,k₂,l₄,l₃) = b, (k₃,k₄,l₂,l₁) = a
                let backward = weight(nu, [b[0], b[1], a[0], a[1]], [a[3], a[2], b[3], b[2]]);
                acc += phi_a * g_b * (forward - backward);
            }
            acc
        })
        .collect();
    Ok(partials.iter().sum())
}

/// `max_p |Σ 32 (δ(k₁,p) − δ(k₃,p)) V(k₁,k₂,k₃,k₂) V(k₃,k₄,k₄,k₁) cos(τ(e₃ − e₁))|`
/// over all `k₁…k₄`, with `V` the conserving vertex.
pub fn second_term_cancellation_check(lattice: &Lattice, tau: f64) -> f64 {
    second_term_with_vertex(lattice, tau, |a, b, c, d| lattice.vertex(a, b, c, d))
}

/// The same sum with an arbitrary vertex.
///
/// A translation-invariant vertex with even `v̂` cancels even without the
/// momentum delta, since the summand is then odd under `k₁ ↔ k₃`; a broken
/// vertex must also break that symmetry to show a residue.
pub fn second_term_with_vertex(
    lattice: &Lattice,
    tau: f64,
    vertex: impl Fn(usize, usize, usize, usize) -> f64 + Sync,
) -> f64 {
    let m = lattice.modes();
    (0..m)
        .map(|p| {
            let mut total = 0.0;
            for k1 in 0..m {
                for k3 in 0..m {
                    let deltas = f64::from(u8::from(k1 == p)) - f64::from(u8::from(k3 == p));
                    if deltas == 0.0 {
                        continue;
                    }
                    let phase = (tau * (lattice.energy(k3) - lattice.energy(k1))).cos();
                    let mut inner = 0.0;
                    for k2 in 0..m {
                        for k4 in 0..m {
                            inner += vertex(k1, k2, k3, k2) * vertex(k3, k4, k4, k1);
                        }
                    }
                    total += 32.0 * deltas * inner * phase;
                }
            }
            total.abs()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::fock::{two_point_matrix, FockSector, StateVector};
    use crate::lattice::{DispersionSpec, PotentialSpec};
    use crate::linalg::random_isometry;

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

    fn exact(lattice: &Lattice, psi: &StateVector, p: usize, q: usize, tau: f64) -> C64 {
        let sector = psi.sector().clone();
        let phi = interaction_terms(lattice).to_operator(sector.clone()).unwrap();
        let g = QuarticCoefficient::duhamel(lattice, p, q, tau)
            .terms()
            .to_operator(sector)
            .unwrap();
        let amps = psi.amplitudes();
        let dot = |v: Vec<C64>| amps.iter().zip(&v).map(|(a, b)| a.conj() * b).sum::<C64>();
        dot(phi.apply(&g.apply(amps))) - dot(g.apply(&phi.apply(amps)))
    }

    #[test]
    fn matches_exact_on_slater_states() {
        let lat = lattice(1, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=3 {
            let sector = Arc::new(FockSector::new(4, n).unwrap());
            let psi = StateVector::slater_orbitals(sector, &random_isometry(&mut rng, 4, n)).unwrap();
            let nu = two_point_matrix(&psi);
            for (p, q, tau) in [(0, 0, 0.0), (1, 3, 0.3), (2, 1, 1.0)] {
                let closed = closure_rhs(&lat, p, q, tau, &nu).unwrap();
                let reference = exact(&lat, &psi, p, q, tau);
                assert!(
                    (closed - reference).norm() < 1e-10,
                    "n={n} p={p} q={q}: {closed} vs {reference}"
                );
            }
        }
    }

    #[test]
    fn empty_and_full_band_vanish() {
        let lat = lattice(1, 5);
        for nu in [CorrelationMatrix::zeros(5), CorrelationMatrix::identity(5)] {
            for (p, q) in [(0, 0), (1, 2)] {
                assert!(closure_rhs(&lat, p, q, 0.4, &nu).unwrap().norm() < 1e-14);
            }
        }
    }

    #[test]
    fn rejects_non_hermitian_input() {
        let lat = lattice(1, 3);
        let mut m = CorrelationMatrix::zeros(3).into_matrix();
        m[(0, 1)] = C64::new(0.5, 0.0);
        let nu = CorrelationMatrix::new(m).unwrap();
        assert!(matches!(
            closure_rhs(&lat, 0, 0, 0.0, &nu),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn second_term_cancels_only_with_conservation() {
        for (dim, side) in [(1, 4), (1, 6), (2, 3)] {
            let lat = lattice(dim, side);
            for tau in [0.0, 0.7] {
                assert_eq!(second_term_cancellation_check(&lat, tau), 0.0);
                let translated = second_term_with_vertex(&lat, tau, |a, b, c, d| lat.vertex_unchecked(a, b, c, d));
                assert!(translated < 1e-10, "d={dim} L={side} tau={tau}: {translated}");
                let broken = second_term_with_vertex(&lat, tau, |a, b, c, d| {
                    (1.0 + lat.energy(c)) * lat.vertex_unchecked(a, b, c, d)
                });
                assert!(broken > 1e-3, "d={dim} L={side}: {broken}");
            }
        }
    }
}
