use std::f64::consts::PI;
use std::str::FromStr;

use crate::lattice::Lattice;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MollifierKind {
    #[default]
    Gaussian,
    Lorentzian,
    Box,
}

impl FromStr for MollifierKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gaussian" => Ok(Self::Gaussian),
            "lorentzian" => Ok(Self::Lorentzian),
            "box" => Ok(Self::Box),
            other => Err(format!("unknown mollifier `{other}` (gaussian | lorentzian | box)")),
        }
    }
}

/// An even, nonnegative bump `δ_η` with unit integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mollifier {
    pub kind: MollifierKind,
    pub eta: f64,
}

impl Mollifier {
    pub fn new(kind: MollifierKind, eta: f64) -> Self {
        assert!(eta > 0.0 && eta.is_finite(), "mollifier width must be positive");
        Self { kind, eta }
    }

    /// Gaussian of width `2 ×` the median gap between distinct `Δe` values.
    pub fn default_for(lattice: &Lattice) -> Self {
        Self::new(MollifierKind::Gaussian, default_eta(lattice))
    }

    #[inline]
    pub fn value(&self, e: f64) -> f64 {
        let eta = self.eta;
        match self.kind {
            MollifierKind::Gaussian => (-0.5 * (e / eta).powi(2)).exp() / (eta * (2.0 * PI).sqrt()),
            MollifierKind::Lorentzian => eta / (PI * (e * e + eta * eta)),
            MollifierKind::Box => {
                if e.abs() <= eta {
                    0.5 / eta
                } else {
                    0.0
                }
            }
        }
    }

    /// Half-width outside which `δ_η` drops below `rel · δ_η(0)`;
    /// `None` when that radius is not finite.
    pub fn support_radius(&self, rel: f64) -> Option<f64> {
        let eta = self.eta;
        let r = match self.kind {
            MollifierKind::Gaussian => eta * (2.0 * (1.0 / rel).ln()).max(0.0).sqrt(),
            MollifierKind::Lorentzian => eta * (1.0 / rel - 1.0).max(0.0).sqrt(),
            MollifierKind::Box => eta,
        };
        r.is_finite().then_some(r)
    }

    /// Trapezoid quadrature of `δ_η` on `[lo, hi]` with `n` panels.
    pub fn mass_on(&self, lo: f64, hi: f64, n: usize) -> f64 {
        let h = (hi - lo) / n as f64;
        let inner: f64 = (1..n).map(|i| self.value(lo + i as f64 * h)).sum();
        h * (inner + 0.5 * (self.value(lo) + self.value(hi)))
    }
}

/// Twice the median spacing of the distinct sorted energy mismatches
/// `Δe(k₁, k₂, k₃, k₁ + k₂ − k₃)`; values closer than `1e-12` count as one.
pub fn default_eta(lattice: &Lattice) -> f64 {
    let m = lattice.modes();
    let mut values = Vec::with_capacity(m * m * m);
    for k1 in 0..m {
        for k2 in 0..m {
            for k3 in 0..m {
                let k4 = lattice.grid.close_quadruple(k1, k2, k3);
                values.push(lattice.delta_e(k1, k2, k3, k4));
            }
        }
    }
    values.sort_by(f64::total_cmp);
    values.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
    let mut gaps: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    if gaps.is_empty() {
        return 1.0;
    }
    gaps.sort_by(f64::total_cmp);
    2.0 * gaps[gaps.len() / 2]
}
