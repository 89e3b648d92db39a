use nalgebra::DMatrix;

use super::sector::{apply_ladder, Ladder};
use super::state::StateVector;
use crate::error::{Error, Result};
use crate::lattice::MomentumGrid;
use crate::linalg::{C64, ZERO};
use crate::quasifree::CorrelationMatrix;

/// `ν_pq = ⟨ψ| α⁺_p α_q |ψ⟩`.
pub fn two_point_matrix(psi: &StateVector) -> CorrelationMatrix {
    let sector = psi.sector();
    let m = sector.modes();
    let amps = psi.amplitudes();
    let mut nu = DMatrix::from_element(m, m, ZERO);
    for (col, &a) in amps.iter().enumerate() {
        if a == ZERO {
            continue;
        }
        let mask = sector.mask(col);
        for q in (0..m).filter(|&q| mask & (1 << q) != 0) {
            let (m1, s1) = apply_ladder(mask, Ladder::Annihilate(q)).expect("occupied");
            for p in 0..m {
                if let Some((m2, s2)) = apply_ladder(m1, Ladder::Create(p)) {
                    let row = sector.rank(m2).expect("number-conserving");
                    nu[(p, q)] += amps[row].conj() * a * (s1 * s2);
                }
            }
        }
    }
    CorrelationMatrix::new(nu).expect("square")
}

/// `⟨ψ| O₁ O₂ ⋯ O_r |ψ⟩` for ladder operators listed left to right; the
/// rightmost acts first. No reordering is performed.
pub fn expectation(psi: &StateVector, ops: &[Ladder]) -> C64 {
    let created = ops.iter().filter(|o| matches!(o, Ladder::Create(_))).count();
    if 2 * created != ops.len() {
        return ZERO;
    }
    let sector = psi.sector();
    let amps = psi.amplitudes();
    let mut total = ZERO;
    for (col, &a) in amps.iter().enumerate() {
        if a == ZERO {
            continue;
        }
        let acted = ops.iter().rev().try_fold((sector.mask(col), 1.0), |(mask, s), &op| {
            apply_ladder(mask, op).map(|(m2, s2)| (m2, s * s2))
        });
        if let Some((out, sign)) = acted {
            let row = sector.rank(out).expect("number-conserving");
            total += amps[row].conj() * a * sign;
        }
    }
    total
}

/// `⟨α⁺_{p₁}⋯α⁺_{p_m} α_{q₁}⋯α_{q_{m'}}⟩` with operators in the given order.
pub fn n_point_function(psi: &StateVector, creations: &[usize], annihilations: &[usize]) -> C64 {
    let ops: Vec<Ladder> = creations
        .iter()
        .map(|&p| Ladder::Create(p))
        .chain(annihilations.iter().map(|&q| Ladder::Annihilate(q)))
        .collect();
    expectation(psi, &ops)
}

/// `⟨α⁺_{k₁}α⁺_{k₂}α_{l₄}α_{l₃} α⁺_{k₃}α⁺_{k₄}α_{l₂}α_{l₁}⟩`, not normal ordered.
pub fn eight_point_function(psi: &StateVector, k: [usize; 4], l: [usize; 4]) -> C64 {
    use Ladder::*;
    expectation(
        psi,
        &[
            Create(k[0]),
            Create(k[1]),
            Annihilate(l[3]),
            Annihilate(l[2]),
            Create(k[2]),
            Create(k[3]),
            Annihilate(l[1]),
            Annihilate(l[0]),
        ],
    )
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `Ŵ^ε(ξ, V) = ν(V − εξ/2, V + εξ/2)`, with the offset `ξ` in units of the
/// grid spacing `2π/L`.
pub fn wigner_hat(grid: &MomentumGrid, nu: &CorrelationMatrix, eps: f64, xi: &[i64], v: usize) -> Result<C64> {
    if xi.len() != grid.dim() {
        return Err(Error::DimensionMismatch(format!(
            "offset has {} components on a {}-dimensional grid",
            xi.len(),
            grid.dim()
        )));
    }
    let mut half = Vec::with_capacity(xi.len());
    for &x in xi {
        let h = eps * x as f64 / 2.0;
        if (h - h.round()).abs() > 1e-12 {
            let g = xi.iter().fold(0, |acc, &x| gcd(acc, x.unsigned_abs()));
            let step = 2.0 / g as f64;
            let nearest = ((eps / step).round()).max(1.0) * step;
            return Err(Error::OffGrid { nearest_eps: nearest });
        }
        half.push(h.round() as i64);
    }
    let centre: Vec<i64> = grid.coords(v).iter().map(|&c| c as i64).collect();
    let lo: Vec<i64> = centre.iter().zip(&half).map(|(c, h)| c - h).collect();
    let hi: Vec<i64> = centre.iter().zip(&half).map(|(c, h)| c + h).collect();
    Ok(nu.get(grid.index_of(&lo), grid.index_of(&hi)))
}

/// Probability of each total momentum (as a grid index).
pub fn total_momentum_distribution(grid: &MomentumGrid, psi: &StateVector) -> Vec<f64> {
    let sector = psi.sector();
    let mut dist = vec![0.0; grid.len()];
    for (i, a) in psi.amplitudes().iter().enumerate() {
        let mut mask = sector.mask(i);
        let mut total = 0;
        while mask != 0 {
            total = grid.add(total, mask.trailing_zeros() as usize);
            mask &= mask - 1;
        }
        dist[total] += a.norm_sqr();
    }
    dist
}
