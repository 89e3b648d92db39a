//! The first Duhamel step of the hierarchy, checked on an exact trajectory:
//! `ρ_t(F_pq) = ρ_0(G_pq(t)) − iλ ∫₀ᵗ ρ_s([Φ, G_pq(t−s)]) ds`.

use std::sync::Arc;

use qboltz::fock::{build_hamiltonian, interaction_terms, Engine, FockSector, Propagator, StateVector};
use qboltz::hierarchy::QuarticCoefficient;
use qboltz::linalg::{random_isometry, C64};
use qboltz::{DispersionSpec, Lattice, PotentialSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

#[test]
fn duhamel_expansion_holds_on_exact_dynamics() {
    let lattice = Lattice::build(
        1,
        4,
        &DispersionSpec::next_nearest(),
        &PotentialSpec::Exponential {
            strength: 1.0,
            range: 1.0,
        },
    )
    .unwrap();
    let sector = Arc::new(FockSector::new(4, 2).unwrap());
    let psi0 = StateVector::slater_orbitals(
        sector.clone(),
        &random_isometry(&mut ChaCha8Rng::seed_from_u64(4), 4, 2),
    )
    .unwrap();
    let lambda = 0.4;
    let t = 1.2;
    let h = build_hamiltonian(&lattice, sector.clone(), lambda).unwrap();
    let prop = Propagator::new(&h, Engine::Dense).unwrap();
    let phi = interaction_terms(&lattice).to_operator(sector.clone()).unwrap();
    let psi_t = prop.heisenberg_state(&psi0, t).unwrap();

    // composite Simpson on 120 panels; the integrand is entire in s
    let panels = 120;
    let h_s = t / panels as f64;
    for (p, q) in [(0, 0), (1, 3), (2, 1)] {
        let f = QuarticCoefficient::commutator(&lattice, p, q)
            .terms()
            .to_operator(sector.clone())
            .unwrap();
        let lhs = f.expectation(&psi_t);
        let g_t = QuarticCoefficient::duhamel(&lattice, p, q, t)
            .terms()
            .to_operator(sector.clone())
            .unwrap();
        let mut integral = C64::new(0.0, 0.0);
        for i in 0..=panels {
            let s = i as f64 * h_s;
            let weight = if i == 0 || i == panels {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let psi_s = prop.heisenberg_state(&psi0, s).unwrap();
            let g = QuarticCoefficient::duhamel(&lattice, p, q, t - s)
                .terms()
                .to_operator(sector.clone())
                .unwrap();
            let amps = psi_s.amplitudes();
            let commutator = dot(amps, &phi.apply(&g.apply(amps))) - dot(amps, &g.apply(&phi.apply(amps)));
            integral += commutator * (weight * h_s / 3.0);
        }
        let rhs = g_t.expectation(&psi0) - C64::i() * lambda * integral;
        assert!((lhs - rhs).norm() < 1e-9, "p={p} q={q}: {lhs} vs {rhs}");
        // the interaction term matters at this coupling
        assert!((lhs - g_t.expectation(&psi0)).norm() > 1e-4);
    }
}
