use crate::error::{Error, Result};

/// Default cap on the number of modes of an exact sector.
pub const DEFAULT_SECTOR_MODE_CAP: usize = 20;

/// A single creation or annihilation operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Ladder {
    Create(usize),
    Annihilate(usize),
}

impl Ladder {
    pub fn mode(self) -> usize {
        match self {
            Ladder::Create(k) | Ladder::Annihilate(k) => k,
        }
    }
}

/// Apply one ladder operator to a basis state.
///
/// Returns the new mask and the Jordan–Wigner sign, or `None` when the
/// operator annihilates the state (Pauli exclusion or empty mode).
#[inline]
pub fn apply_ladder(mask: u64, op: Ladder) -> Option<(u64, f64)> {
    let (mode, create) = match op {
        Ladder::Create(k) => (k, true),
        Ladder::Annihilate(k) => (k, false),
    };
    let bit = 1u64 << mode;
    if (mask & bit != 0) == create {
        return None;
    }
    let below = (mask & (bit - 1)).count_ones();
    let sign = if below.is_multiple_of(2) { 1.0 } else { -1.0 };
    Some((mask ^ bit, sign))
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// All `M`-bit masks with popcount `n`, in increasing order, with an O(n)
/// rank map (combinatorial number system).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockSector {
    modes: usize,
    particles: usize,
    basis: Vec<u64>,
    // binom[a][b] = C(a, b) for a < modes, b ≤ particles
    binom: Vec<Vec<usize>>,
}

impl FockSector {
    pub fn new(modes: usize, particles: usize) -> Result<Self> {
        Self::with_cap(modes, particles, DEFAULT_SECTOR_MODE_CAP)
    }

    pub fn with_cap(modes: usize, particles: usize, cap: usize) -> Result<Self> {
        if particles > modes {
            return Err(Error::InvalidSector(format!(
                "{particles} particles do not fit in {modes} modes"
            )));
        }
        if modes > cap.min(63) {
            return Err(Error::SectorTooLarge {
                modes,
                cap: cap.min(63),
                estimate: binomial(modes, particles),
            });
        }
        let dim = binomial(modes, particles) as usize;
        let mut basis = Vec::with_capacity(dim);
        if particles == 0 {
            basis.push(0);
        } else {
            // Gosper's hack walks masks of fixed popcount in increasing order.
            let mut mask: u64 = (1u64 << particles) - 1;
            let limit = 1u64 << modes;
            while mask < limit {
                basis.push(mask);
                let c = mask & mask.wrapping_neg();
                let r = mask + c;
                mask = (((r ^ mask) >> 2) / c) | r;
            }
        }
        debug_assert_eq!(basis.len(), dim);
        let binom = (0..modes.max(1))
            .map(|a| (0..=particles).map(|b| binomial(a, b) as usize).collect())
            .collect();
        Ok(Self {
            modes,
            particles,
            basis,
            binom,
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[u64] {
        &self.basis
    }

    #[inline]
    pub fn mask(&self, index: usize) -> u64 {
        self.basis[index]
    }

    /// Basis index of `mask`, or `None` if it is not in this sector.
    #[inline]
    pub fn rank(&self, mask: u64) -> Option<usize> {
        if mask.count_ones() as usize != self.particles || (self.modes < 64 && mask >> self.modes != 0) {
            return None;
        }
        let mut rest = mask;
        let mut rank = 0usize;
        let mut i = 1usize;
        while rest != 0 {
            let pos = rest.trailing_zeros() as usize;
            rank += self.binom[pos][i];
            rest &= rest - 1;
            i += 1;
        }
        Some(rank)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sectors() {
        let s = FockSector::new(2, 1).unwrap();
        assert_eq!(s.basis(), &[0b01, 0b10]);
        assert_eq!(FockSector::new(4, 2).unwrap().dim(), 6);
        assert_eq!(FockSector::new(3, 0).unwrap().basis(), &[0]);
        assert_eq!(FockSector::new(3, 3).unwrap().basis(), &[0b111]);
    }

    #[test]
    fn half_filled_sixteen_modes() {
        // independent count: number of 16-bit integers with popcount 8
        let brute = (0u32..1 << 16).filter(|m| m.count_ones() == 8).count();
        assert_eq!(brute, 12870);
        assert_eq!(FockSector::new(16, 8).unwrap().dim(), brute);
    }

    #[test]
    fn rank_inverts_basis() {
        for (m, n) in [(6, 3), (9, 4), (10, 1), (12, 6)] {
            let s = FockSector::new(m, n).unwrap();
            assert!(s.basis().windows(2).all(|w| w[0] < w[1]));
            for (i, &mask) in s.basis().iter().enumerate() {
                assert_eq!(s.rank(mask), Some(i));
            }
            assert_eq!(s.rank(0), if n == 0 { Some(0) } else { None });
        }
    }

    #[test]
    fn cap_is_enforced() {
        match FockSector::with_cap(24, 12, 20) {
            Err(Error::SectorTooLarge { estimate, .. }) => assert_eq!(estimate, 2704156),
            other => panic!("expected refusal, got {other:?}"),
        }
        assert!(FockSector::new(3, 4).is_err());
    }

    #[test]
    fn ladder_signs() {
        assert_eq!(apply_ladder(0b01, Ladder::Annihilate(0)), Some((0b00, 1.0)));
        assert_eq!(apply_ladder(0b01, Ladder::Create(0)), None);
        assert_eq!(apply_ladder(0b00, Ladder::Annihilate(1)), None);
        assert_eq!(apply_ladder(0b011, Ladder::Create(2)), Some((0b111, 1.0)));
        assert_eq!(apply_ladder(0b110, Ladder::Create(0)), Some((0b111, 1.0)));
        assert_eq!(apply_ladder(0b111, Ladder::Annihilate(1)), Some((0b101, -1.0)));
    }

    #[test]
    fn anticommutation_on_basis_states() {
        // {α_p, α⁺_q} = δ_pq checked as operators on every 4-mode mask
        let act = |ops: &[Ladder], mask: u64| -> Option<(u64, f64)> {
            ops.iter().rev().try_fold((mask, 1.0), |(m, s), &op| {
                apply_ladder(m, op).map(|(m2, s2)| (m2, s * s2))
            })
        };
        for p in 0..4 {
            for q in 0..4 {
                for mask in 0u64..16 {
                    let mut acc = std::collections::HashMap::<u64, f64>::new();
                    for ops in [
                        [Ladder::Annihilate(p), Ladder::Create(q)],
                        [Ladder::Create(q), Ladder::Annihilate(p)],
                    ] {
                        if let Some((m, s)) = act(&ops, mask) {
                            *acc.entry(m).or_default() += s;
                        }
                    }
                    acc.retain(|_, v| *v != 0.0);
                    if p == q {
                        assert_eq!(acc.len(), 1);
                        assert_eq!(acc.get(&mask), Some(&1.0));
                    } else {
                        assert!(acc.is_empty());
                    }
                }
            }
        }
    }

    /// `(a b + b a)|mask⟩`, summed over both orders, as `(mask, amplitude)`.
    fn anticommutator(a: Ladder, b: Ladder, mask: u64) -> Vec<(u64, f64)> {
        let mut out: Vec<(u64, f64)> = Vec::new();
        for (first, second) in [(b, a), (a, b)] {
            if let Some((m1, s1)) = apply_ladder(mask, first) {
                if let Some((m2, s2)) = apply_ladder(m1, second) {
                    match out.iter_mut().find(|(m, _)| *m == m2) {
                        Some(entry) => entry.1 += s1 * s2,
                        None => out.push((m2, s1 * s2)),
                    }
                }
            }
        }
        out.retain(|&(_, amp)| amp != 0.0);
        out
    }

    proptest::proptest! {
        #[test]
        fn canonical_anticommutation(mask in 0u64..1 << 10, i in 0usize..10, j in 0usize..10) {
            use Ladder::{Annihilate, Create};
            let delta = if i == j { vec![(mask, 1.0)] } else { Vec::new() };
            proptest::prop_assert_eq!(anticommutator(Annihilate(i), Create(j), mask), delta);
            proptest::prop_assert!(anticommutator(Create(i), Create(j), mask).is_empty());
            proptest::prop_assert!(anticommutator(Annihilate(i), Annihilate(j), mask).is_empty());
        }
    }
}
