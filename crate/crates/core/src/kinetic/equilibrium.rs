use super::solver::OccupationFunction;
use crate::collision::Statistics;
use crate::error::{Error, Result};
use crate::lattice::Lattice;

/// `F(k) = 1/(1 + e^{β(e(k) − μ)})`.
pub fn fermi_dirac_profile(lattice: &Lattice, beta: f64, mu: f64) -> OccupationFunction {
    let values = lattice
        .dispersion
        .energies()
        .iter()
        .map(|&e| fermi(beta * (e - mu)))
        .collect();
    OccupationFunction::new_unchecked(values, Statistics::Fermion)
}

#[inline]
fn fermi(x: f64) -> f64 {
    // evaluated on the decaying side to avoid inf/inf
    if x > 0.0 {
        let t = (-x).exp();
        t / (1.0 + t)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

fn xlnx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// `S = −∫ [F ln F + (1−F) ln(1−F)]` for fermions and
/// `S = ∫ [(1+F) ln(1+F) − F ln F]` for bosons.
pub fn entropy(lattice: &Lattice, f: &OccupationFunction) -> f64 {
    let v = f.values();
    match f.statistics() {
        Statistics::Fermion => -lattice.integral(|k| xlnx(v[k]) + xlnx(1.0 - v[k])),
        Statistics::Boson => lattice.integral(|k| xlnx(1.0 + v[k]) - xlnx(v[k])),
    }
}

/// The Fermi–Dirac parameters `(β, μ)` whose profile has the given
/// `∫F` and `∫eF`.
///
/// With `a = βμ`, the mass is increasing in `a` at fixed `β`, and along the
/// fixed-mass curve the energy is decreasing in `β`; both are solved by
/// bisection.
pub fn fit_fermi_dirac(lattice: &Lattice, mass: f64, energy: f64) -> Result<(f64, f64)> {
    let e = lattice.dispersion.energies();
    let w = lattice.grid.cell_volume();
    if !(mass > 0.0 && mass < 1.0) {
        return Err(Error::Numerical(format!("no Fermi-Dirac profile has mass {mass}")));
    }
    let moments = |beta: f64, a: f64| -> (f64, f64) {
        e.iter().fold((0.0, 0.0), |(n, en), &ek| {
            let f = fermi(beta * ek - a);
            (n + w * f, en + w * ek * f)
        })
    };
    let a_for = |beta: f64| -> f64 {
        let (mut lo, mut hi) = (-1.0, 1.0);
        while moments(beta, lo).0 > mass {
            lo *= 2.0;
        }
        while moments(beta, hi).0 < mass {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if moments(beta, mid).0 < mass {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi.abs().max(1.0) {
                break;
            }
        }
        0.5 * (lo + hi)
    };
    let energy_at = |beta: f64| moments(beta, a_for(beta)).1;
    let (emin, emax) = (energy_at(1e3), energy_at(-1e3));
    if !(energy > emin && energy < emax) {
        return Err(Error::Numerical(format!(
            "energy {energy} outside the Fermi-Dirac range ({emin}, {emax}) at mass {mass}"
        )));
    }
    let (mut lo, mut hi) = (-1.0, 1.0);
    while energy_at(lo) < energy {
        lo *= 2.0;
    }
    while energy_at(hi) > energy {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if energy_at(mid) > energy {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.abs().max(1.0) {
            break;
        }
    }
    let beta = 0.5 * (lo + hi);
    let mu = a_for(beta) / beta;
    Ok((beta, mu))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{DispersionSpec, PotentialSpec};

    fn lattice() -> Lattice {
        Lattice::build(2, 4, &DispersionSpec::next_nearest(), &PotentialSpec::Zero).unwrap()
    }

    #[test]
    fn infinite_temperature_and_zero_temperature() {
        let lat = lattice();
        assert!(fermi_dirac_profile(&lat, 0.0, 1.3).values().iter().all(|&f| f == 0.5));
        let f = fermi_dirac_profile(&lat, 1e4, 3.1);
        for (k, &e) in lat.dispersion.energies().iter().enumerate() {
            assert_eq!(f.values()[k], if e < 3.1 { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn detailed_balance_identity() {
        let lat = lattice();
        let (beta, mu) = (0.8, 2.0);
        let f = fermi_dirac_profile(&lat, beta, mu);
        for (k, &e) in lat.dispersion.energies().iter().enumerate() {
            let x = f.values()[k];
            let expected = (-beta * (e - mu)).exp();
            assert!((x / (1.0 - x) - expected).abs() <= 1e-14 * expected.max(1.0));
        }
    }

    #[test]
    fn entropy_extremes() {
        let lat = lattice();
        let s = |c: f64| {
            entropy(
                &lat,
                &OccupationFunction::new(vec![c; 16], Statistics::Fermion).unwrap(),
            )
        };
        assert_eq!(s(0.0), 0.0);
        assert_eq!(s(1.0), 0.0);
        assert!((s(0.5) - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn flat_profile_maximizes_entropy_at_fixed_mass() {
        let lat = lattice();
        let flat = OccupationFunction::new(vec![0.4; 16], Statistics::Fermion).unwrap();
        let s0 = entropy(&lat, &flat);
        for j in 0..8 {
            let mut v = vec![0.4; 16];
            v[j] += 0.05;
            v[15 - j] -= 0.05;
            let s = entropy(&lat, &OccupationFunction::new(v, Statistics::Fermion).unwrap());
            assert!(s < s0);
        }
    }

    #[test]
    fn fit_recovers_parameters() {
        let lat = lattice();
        for (beta, mu) in [(0.7, 2.5), (-0.4, 3.0), (2.0, 1.0)] {
            let f = fermi_dirac_profile(&lat, beta, mu);
            let mass = lat.integral(|k| f.values()[k]);
            let energy = lat.integral(|k| lat.energy(k) * f.values()[k]);
            let (b, m) = fit_fermi_dirac(&lat, mass, energy).unwrap();
            assert!((b - beta).abs() < 1e-8 && (m - mu).abs() < 1e-8, "{b} {m}");
        }
    }
}
