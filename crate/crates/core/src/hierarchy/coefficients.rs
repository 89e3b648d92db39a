use crate::fock::QuarticTerms;
use crate::lattice::Lattice;
use crate::linalg::{C64, ZERO};

#[inline]
fn kron(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// Coefficient of `F_pq = [Φ, α⁺_p α_q]` on `α⁺_{k₁}α⁺_{k₂}α_{k₃}α_{k₄}`.
pub fn coeff_f_pq(lattice: &Lattice, p: usize, q: usize, k: [usize; 4]) -> C64 {
    let phi = |a, b, c, d| lattice.interaction(a, b, c, d);
    let [k1, k2, k3, k4] = k;
    let value = -kron(q, k4) * phi(k1, k2, p, k3) + kron(q, k3) * phi(k1, k2, p, k4) + kron(p, k1) * phi(k2, q, k3, k4)
        - kron(p, k2) * phi(k1, q, k3, k4);
    C64::new(value, 0.0)
}

/// Coefficient of `G_pq(τ)`: the Duhamel image of `F_pq` after a lag `τ`.
pub fn coeff_g_pq(lattice: &Lattice, p: usize, q: usize, tau: f64, k: [usize; 4]) -> C64 {
    let phi = |a, b, c, d| lattice.interaction(a, b, c, d);
    let [k1, k2, k3, k4] = k;
    let bracket =
        phi(k1, k2, k3, p) * kron(k4, q) - phi(k1, k2, k4, p) * kron(k3, q) - phi(q, k2, k3, k4) * kron(k1, p)
            + phi(q, k1, k3, k4) * kron(k2, p);
    if bracket == 0.0 {
        return ZERO;
    }
    C64::from_polar(bracket, -tau * lattice.delta_e(k1, k2, k3, k4))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum QuarticKind {
    /// `F_pq`
    Commutator,
    /// `G_pq(τ)`
    Duhamel { tau: f64 },
}

/// A quartic coefficient `(k₁,k₂,k₃,k₄) ↦ c` for fixed `(p, q)`.
#[derive(Clone, Copy, Debug)]
pub struct QuarticCoefficient<'a> {
    lattice: &'a Lattice,
    pub p: usize,
    pub q: usize,
    pub kind: QuarticKind,
}

impl<'a> QuarticCoefficient<'a> {
    pub fn commutator(lattice: &'a Lattice, p: usize, q: usize) -> Self {
        Self {
            lattice,
            p,
            q,
            kind: QuarticKind::Commutator,
        }
    }

    pub fn duhamel(lattice: &'a Lattice, p: usize, q: usize, tau: f64) -> Self {
        Self {
            lattice,
            p,
            q,
            kind: QuarticKind::Duhamel { tau },
        }
    }

    pub fn value(&self, k: [usize; 4]) -> C64 {
        match self.kind {
            QuarticKind::Commutator => coeff_f_pq(self.lattice, self.p, self.q, k),
            QuarticKind::Duhamel { tau } => coeff_g_pq(self.lattice, self.p, self.q, tau, k),
        }
    }

    /// Nonzero coefficients in lexicographic index order.
    ///
    /// Every term carries a Kronecker delta on `p` or `q` plus momentum
    /// conservation, so only `O(M²)` tuples are visited.
    pub fn terms(&self) -> QuarticTerms {
        let m = self.lattice.modes();
        let grid = &self.lattice.grid;
        let mut support = Vec::with_capacity(4 * m * m);
        // every nonzero tuple has k₁ + k₂ − k₃ − k₄ = p − q and one index
        // pinned to p or q
        let (p, q) = (self.p, self.q);
        for a in 0..m {
            for b in 0..m {
                let ab_p = grid.combine(&[(1, a), (1, b), (-1, p)]);
                let aq_b = grid.combine(&[(1, a), (1, q), (-1, b)]);
                support.push([a, b, ab_p, q]);
                support.push([a, b, q, ab_p]);
                support.push([p, a, b, aq_b]);
                support.push([a, p, b, aq_b]);
            }
        }
        support.sort_unstable();
        support.dedup();
        let mut terms = QuarticTerms::new(m);
        for k in support {
            terms.push(k, self.value(k));
        }
        terms
    }

    /// Largest violation of antisymmetry under `k₁ ↔ k₂` and `k₃ ↔ k₄`.
    pub fn antisymmetry_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, c) in self.terms().terms() {
            let [k1, k2, k3, k4] = *k;
            worst = worst.max((c + self.value([k2, k1, k3, k4])).norm());
            worst = worst.max((c + self.value([k1, k2, k4, k3])).norm());
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::fock::{apply_ladder, interaction_terms, FockSector, Ladder, ManyBodyOperator};
    use crate::lattice::{DispersionSpec, PotentialSpec};

    fn lattice(dim: usize, side: usize) -> Lattice {
        Lattice::build(
            dim,
            side,
            &DispersionSpec::next_nearest(),
            &PotentialSpec::Exponential {
                strength: 1.3,
                range: 0.8,
            },
        )
        .unwrap()
    }

    fn hopping(sector: &Arc<FockSector>, p: usize, q: usize) -> ManyBodyOperator {
        let triplets = (0..sector.dim())
            .filter_map(|col| {
                let (m1, s1) = apply_ladder(sector.mask(col), Ladder::Annihilate(q))?;
                let (m2, s2) = apply_ladder(m1, Ladder::Create(p))?;
                Some((sector.rank(m2)?, col, C64::new(s1 * s2, 0.0)))
            })
            .collect();
        ManyBodyOperator::from_triplets(sector.clone(), triplets)
    }

    #[test]
    fn matches_exact_commutator() {
        let lat = lattice(1, 4);
        let phi = interaction_terms(&lat);
        for n in 1..=3 {
            let sector = Arc::new(FockSector::new(4, n).unwrap());
            let phi_op = phi.to_operator(sector.clone()).unwrap().to_dense();
            for p in 0..4 {
                for q in 0..4 {
                    let a = hopping(&sector, p, q).to_dense();
                    let exact = &phi_op * &a - &a * &phi_op;
                    let assembled = QuarticCoefficient::commutator(&lat, p, q)
                        .terms()
                        .to_operator(sector.clone())
                        .unwrap()
                        .to_dense();
                    assert!((exact - assembled).camax() < 1e-12, "p={p} q={q} n={n}");
                }
            }
        }
    }

    #[test]
    fn duhamel_is_phased_commutator() {
        let lat = lattice(2, 3);
        for (p, q) in [(0, 0), (1, 5), (4, 2)] {
            let f = QuarticCoefficient::commutator(&lat, p, q);
            let g = QuarticCoefficient::duhamel(&lat, p, q, 0.7);
            for (k, c) in f.terms().terms() {
                let expected = c * C64::from_polar(1.0, -0.7 * lat.delta_e(k[0], k[1], k[2], k[3]));
                assert!((g.value(*k) - expected).norm() < 1e-15);
                assert!((g.value(*k).norm() - c.norm()).abs() < 1e-15);
            }
            for (k, c) in g.terms().terms() {
                assert!((f.value(*k).norm() - c.norm()).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn antisymmetric_and_sparse() {
        let lat = lattice(2, 3);
        for (p, q) in [(0, 0), (3, 7)] {
            let g = QuarticCoefficient::duhamel(&lat, p, q, 0.3);
            assert!(g.antisymmetry_residual() < 1e-15);
            let dense = QuarticTerms::from_fn(9, |k| g.value(k));
            let sparse = g.terms();
            assert_eq!(dense.terms(), sparse.terms());
        }
    }

    #[test]
    fn diagonal_form_collapses() {
        let lat = lattice(1, 6);
        let p = 2;
        let tau = 0.4;
        for (k, c) in QuarticCoefficient::duhamel(&lat, p, p, tau).terms().terms() {
            let [k1, k2, k3, k4] = *k;
            let deltas = kron(p, k4) + kron(p, k3) - kron(p, k2) - kron(p, k1);
            let expected = C64::from_polar(
                lat.interaction(k1, k2, k3, k4) * deltas,
                -tau * lat.delta_e(k1, k2, k3, k4),
            );
            assert!((c - expected).norm() < 1e-15);
        }
    }

    #[test]
    fn vanishes_off_support() {
        let lat = lattice(1, 6);
        assert_eq!(coeff_f_pq(&lat, 0, 1, [2, 3, 4, 5]), ZERO);
        let free = Lattice::build(1, 6, &DispersionSpec::next_nearest(), &PotentialSpec::Zero).unwrap();
        assert!(QuarticCoefficient::commutator(&free, 1, 2).terms().is_empty());
    }
}
