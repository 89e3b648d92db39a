use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::collision::{kernel_value, KernelMode};
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::linalg::C64;
use crate::output::{float, CsvWriter};

pub const MEMORY_SCHEMA: &str = "qboltz.memory.v1";

/// Occupations may leave `[0, 1]` by at most this much before a step is
/// rejected.
const STEP_SLACK: f64 = 1e-6;
/// Relative size of the imaginary part tolerated in an assembled rate.
const IMAGINARY_TOLERANCE: f64 = 1e-12;

/// Every momentum-conserving quadruple with its kernel
/// `|v̂(k₁−k₄) − v̂(k₁−k₃)|²` and mismatch `Δe`, ordered by `(k₁, k₂, k₃)`.
#[derive(Clone, Debug)]
pub(crate) struct Quadruples {
    pub k: Vec<[usize; 4]>,
    pub kernel: Vec<f64>,
    pub delta_e: Vec<f64>,
}

impl Quadruples {
    pub fn new(lattice: &Lattice) -> Self {
        let m = lattice.modes();
        let mut out = Self {
            k: Vec::with_capacity(m * m * m),
            kernel: Vec::with_capacity(m * m * m),
            delta_e: Vec::with_capacity(m * m * m),
        };
        for k1 in 0..m {
            for k2 in 0..m {
                for k3 in 0..m {
                    let k4 = lattice.grid.close_quadruple(k1, k2, k3);
                    out.k.push([k1, k2, k3, k4]);
                    out.kernel
                        .push(kernel_value(lattice, k1, k2, k3, k4, KernelMode::Plain));
                    out.delta_e.push(lattice.delta_e(k1, k2, k3, k4));
                }
            }
        }
        out
    }

    /// Quadruples with `k₁ = p` occupy one contiguous block.
    pub fn row(&self, p: usize, modes: usize) -> std::ops::Range<usize> {
        p * modes * modes..(p + 1) * modes * modes
    }
}

/// `f₁f₂f̃₃f̃₄ − f₄f₃f̃₂f̃₁` with `f̃ = 1 − f`.
#[inline]
pub(crate) fn bracket(f: &[f64], k: [usize; 4]) -> f64 {
    let [a, b, c, d] = k.map(|i| f[i]);
    a * b * (1.0 - c) * (1.0 - d) - d * c * (1.0 - b) * (1.0 - a)
}

/// Stored trajectory `f(t)` of the homogeneous memory equation.
#[derive(Clone, Debug, PartialEq)]
pub struct MemoryKernelState {
    lambda: f64,
    times: Vec<f64>,
    values: Vec<Vec<f64>>,
}

impl MemoryKernelState {
    pub fn new(f0: Vec<f64>, lambda: f64) -> Self {
        Self {
            lambda,
            times: vec![0.0],
            values: vec![f0],
        }
    }

    /// Times must increase strictly and snapshots keep their length.
    pub fn push(&mut self, t: f64, f: Vec<f64>) -> Result<()> {
        let last = *self.times.last().expect("history starts at t = 0");
        if t.is_nan() || t <= last {
            return Err(Error::Numerical(format!("history time {t} does not follow {last}")));
        }
        if f.len() != self.values[0].len() {
            return Err(Error::DimensionMismatch(format!(
                "snapshot has {} modes, history has {}",
                f.len(),
                self.values[0].len()
            )));
        }
        self.times.push(t);
        self.values.push(f);
        Ok(())
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn snapshot(&self, i: usize) -> &[f64] {
        &self.values[i]
    }

    pub fn last(&self) -> &[f64] {
        self.values.last().expect("nonempty")
    }

    pub fn end(&self) -> f64 {
        *self.times.last().expect("nonempty")
    }

    /// Snapshot at `t`, linear between stored times.
    pub fn at(&self, t: f64) -> Result<Vec<f64>> {
        if t < 0.0 || t > self.end() * (1.0 + 1e-12) + 1e-12 {
            return Err(Error::HistoryGap {
                requested: t,
                available: self.end(),
            });
        }
        let i = self.times.partition_point(|&s| s <= t).max(1) - 1;
        if i + 1 >= self.times.len() || self.times[i] == t {
            return Ok(self.values[i].clone());
        }
        let w = (t - self.times[i]) / (self.times[i + 1] - self.times[i]);
        Ok(self.values[i]
            .iter()
            .zip(&self.values[i + 1])
            .map(|(a, b)| a + w * (b - a))
            .collect())
    }

    /// Rows `(t, mode, f)` for every stored time.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<PathBuf> {
        let mut out = CsvWriter::create(path, MEMORY_SCHEMA, &["t", "mode", "f"])?;
        for (t, f) in self.times.iter().zip(&self.values) {
            for (mode, v) in f.iter().enumerate() {
                out.row(&[float(*t), mode.to_string(), float(*v)])?;
            }
        }
        out.finish()
    }
}

/// `∂_t f_p(t)` of the memory equation
///
/// `∂_t f_p = −λ² ∫₀ᵗ ds 2L^{-2d} Σ e^{−i(t−s)Δe} (δ(p,k₁) − δ(p,k₄)) K b(s)`
///
/// over all conserving quadruples, with trapezoidal weights on the stored
/// times in `[0, t]`. The imaginary part cancels between a quadruple and
/// its swap `(k₄,k₃,k₂,k₁)`; a residue above `1e-12` of the summed
/// magnitudes is an error.
pub fn memory_rhs(lattice: &Lattice, history: &MemoryKernelState, t: f64) -> Result<Vec<f64>> {
    let m = lattice.modes();
    if history.values[0].len() != m {
        return Err(Error::DimensionMismatch(format!(
            "history has {} modes, lattice has {}",
            history.values[0].len(),
            m
        )));
    }
    if t > history.end() * (1.0 + 1e-12) + 1e-12 || t < 0.0 {
        return Err(Error::HistoryGap {
            requested: t,
            available: history.end(),
        });
    }
    let mut nodes: Vec<(f64, &[f64])> = history
        .times
        .iter()
        .zip(&history.values)
        .take_while(|(s, _)| **s <= t)
        .map(|(s, f)| (*s, f.as_slice()))
        .collect();
    let end_point;
    if nodes.last().is_some_and(|(s, _)| *s < t) {
        end_point = history.at(t)?;
        nodes.push((t, &end_point));
    }
    let quads = Quadruples::new(lattice);
    // b(s) per node, shared by all quadruples of a row
    let scale = 2.0 * lattice.grid.cell_volume().powi(2) * history.lambda.powi(2);
    let per_quad: Vec<C64> = (0..quads.k.len())
        .into_par_iter()
        .map(|x| {
            let k = quads.k[x];
            let mut integral = C64::new(0.0, 0.0);
            for w in nodes.windows(2) {
                let (s0, f0) = w[0];
                let (s1, f1) = w[1];
                let g0 = C64::from_polar(bracket(f0, k), -(t - s0) * quads.delta_e[x]);
                let g1 = C64::from_polar(bracket(f1, k), -(t - s1) * quads.delta_e[x]);
                integral += 0.5 * (s1 - s0) * (g0 + g1);
            }
            integral * quads.kernel[x]
        })
        .collect();
    let mut rates = vec![C64::new(0.0, 0.0); m];
    let mut magnitude = vec![0.0; m];
    for (x, term) in per_quad.iter().enumerate() {
        let [k1, _, _, k4] = quads.k[x];
        if k1 == k4 {
            continue;
        }
        rates[k1] -= scale * term;
        rates[k4] += scale * term;
        magnitude[k1] += scale * term.norm();
        magnitude[k4] += scale * term.norm();
    }
    rates
        .iter()
        .zip(&magnitude)
        .map(|(r, &mag)| {
            if r.im.abs() > IMAGINARY_TOLERANCE * mag.max(f64::MIN_POSITIVE) {
                Err(Error::ComplexRate { imag: r.im, scale: mag })
            } else {
                Ok(r.re)
            }
        })
        .collect()
}

/// Step and horizon of a memory-equation run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MemoryConfig {
    pub lambda: f64,
    pub t_end: f64,
    /// `None` picks [`default_step`].
    pub dt: Option<f64>,
}

impl MemoryConfig {
    pub fn step(&self, lattice: &Lattice) -> f64 {
        self.dt.unwrap_or_else(|| default_step(lattice, self.lambda))
    }
}

/// `min(0.05/λ², 0.25/(2·spread of e))`. Since `|Δe| ≤ 2·spread`, the second
/// bound resolves the fastest phase.
pub fn default_step(lattice: &Lattice, lambda: f64) -> f64 {
    let e = lattice.dispersion.energies();
    let spread = e.iter().copied().fold(f64::NEG_INFINITY, f64::max) - e.iter().copied().fold(f64::INFINITY, f64::min);
    let by_phase = if spread > 0.0 {
        0.25 / (2.0 * spread)
    } else {
        f64::INFINITY
    };
    let by_coupling = if lambda > 0.0 {
        0.05 / (lambda * lambda)
    } else {
        f64::INFINITY
    };
    let h = by_phase.min(by_coupling);
    if h.is_finite() {
        h
    } else {
        0.05
    }
}

/// Integrate the memory equation from `f₀` with Heun steps.
///
/// `∫₀ᵗ cos((t−s)Δe) b(s) ds = cos(tΔe) A(t) + sin(tΔe) B(t)` with running
/// trapezoid integrals `A = ∫ cos(sΔe) b`, `B = ∫ sin(sΔe) b`, so one step
/// costs `O(#quadruples)` instead of `O(steps · #quadruples)`. The quadrature
/// equals the one in [`memory_rhs`] on the stored history.
pub fn solve_memory_equation(lattice: &Lattice, f0: &[f64], config: &MemoryConfig) -> Result<MemoryKernelState> {
    let m = lattice.modes();
    if f0.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "initial data has {} modes, lattice has {m}",
            f0.len()
        )));
    }
    if let Some((mode, &value)) = f0.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
        return Err(Error::OccupationOutOfRange { mode, value });
    }
    let h = config.step(lattice);
    if !(h > 0.0 && config.t_end >= 0.0) {
        return Err(Error::Numerical(format!("invalid memory settings {config:?}")));
    }
    let quads = Quadruples::new(lattice);
    let n = quads.k.len();
    let scale = 4.0 * lattice.grid.cell_volume().powi(2) * config.lambda.powi(2);
    let rate = |t: f64, a: &[f64], b: &[f64]| -> Vec<f64> {
        (0..m)
            .into_par_iter()
            .map(|p| {
                let sum: f64 = quads
                    .row(p, m)
                    .map(|x| {
                        let (s, c) = (t * quads.delta_e[x]).sin_cos();
                        quads.kernel[x] * (c * a[x] + s * b[x])
                    })
                    .sum();
                -scale * sum
            })
            .collect()
    };
    let brackets = |f: &[f64]| -> Vec<f64> { quads.k.iter().map(|&k| bracket(f, k)).collect() };
    let advance = |t0: f64, t1: f64, a: &[f64], b: &[f64], b0: &[f64], b1: &[f64]| -> (Vec<f64>, Vec<f64>) {
        let dt = t1 - t0;
        let mut an = a.to_vec();
        let mut bn = b.to_vec();
        for x in 0..n {
            let (s0, c0) = (t0 * quads.delta_e[x]).sin_cos();
            let (s1, c1) = (t1 * quads.delta_e[x]).sin_cos();
            an[x] += 0.5 * dt * (c0 * b0[x] + c1 * b1[x]);
            bn[x] += 0.5 * dt * (s0 * b0[x] + s1 * b1[x]);
        }
        (an, bn)
    };

    let mut history = MemoryKernelState::new(f0.to_vec(), config.lambda);
    let mut f = f0.to_vec();
    let mut a = vec![0.0; n];
    let mut b = vec![0.0; n];
    let mut bf = brackets(&f);
    let steps = (config.t_end / h).ceil() as usize;
    for i in 0..steps {
        let t0 = i as f64 * h;
        let t1 = ((i + 1) as f64 * h).min(config.t_end);
        let dt = t1 - t0;
        let r0 = rate(t0, &a, &b);
        let predicted: Vec<f64> = f.iter().zip(&r0).map(|(v, r)| v + dt * r).collect();
        let (ap, bp) = advance(t0, t1, &a, &b, &bf, &brackets(&predicted));
        let r1 = rate(t1, &ap, &bp);
        let next: Vec<f64> = f
            .iter()
            .zip(r0.iter().zip(&r1))
            .map(|(v, (x, y))| v + 0.5 * dt * (x + y))
            .collect();
        if let Some((mode, &value)) = next
            .iter()
            .enumerate()
            .find(|(_, v)| !(-STEP_SLACK..=1.0 + STEP_SLACK).contains(*v) || !v.is_finite())
        {
            return Err(Error::StepRejected { time: t1, mode, value });
        }
        let b_next = brackets(&next);
        (a, b) = advance(t0, t1, &a, &b, &bf, &b_next);
        bf = b_next;
        f = next;
        history.push(t1, f.clone())?;
    }
    Ok(history)
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::hierarchy::closure_rhs;
    use crate::lattice::{DispersionSpec, PotentialSpec};
    use crate::quasifree::CorrelationMatrix;

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

    fn random_history(rng: &mut ChaCha8Rng, modes: usize, lambda: f64, times: &[f64]) -> MemoryKernelState {
        let mut h = MemoryKernelState::new((0..modes).map(|_| rng.random::<f64>()).collect(), lambda);
        for &t in &times[1..] {
            h.push(t, (0..modes).map(|_| rng.random::<f64>()).collect()).unwrap();
        }
        h
    }

    #[test]
    fn trivial_cases_vanish() {
        let lat = lattice(1, 5);
        let h = MemoryKernelState::new(vec![0.3; 5], 0.5);
        assert!(memory_rhs(&lat, &h, 0.0).unwrap().iter().all(|r| *r == 0.0));
        let mut h = MemoryKernelState::new(vec![0.3; 5], 0.5);
        h.push(0.4, vec![0.3; 5]).unwrap();
        assert!(memory_rhs(&lat, &h, 0.4).unwrap().iter().all(|r| r.abs() < 1e-16));
        let run = solve_memory_equation(
            &lat,
            &[0.1, 0.9, 0.4, 0.0, 1.0],
            &MemoryConfig {
                lambda: 0.0,
                t_end: 1.0,
                dt: Some(0.1),
            },
        )
        .unwrap();
        assert_eq!(run.last(), &[0.1, 0.9, 0.4, 0.0, 1.0]);
    }

    #[test]
    fn real_on_random_histories() {
        let lat = lattice(2, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_history(&mut rng, 9, 0.7, &[0.0, 0.1, 0.25, 0.3, 0.6]);
        for t in [0.1, 0.3, 0.45, 0.6] {
            memory_rhs(&lat, &h, t).unwrap();
        }
        assert!(matches!(memory_rhs(&lat, &h, 0.9), Err(Error::HistoryGap { .. })));
    }

    #[test]
    fn matches_integrated_closure() {
        let lat = lattice(1, 5);
        let lambda = 0.6;
        let times = [0.0, 0.2, 0.35, 0.5];
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let h = random_history(&mut rng, 5, lambda, &times);
        let t = 0.5;
        let rates = memory_rhs(&lat, &h, t).unwrap();
        for (p, &rate) in rates.iter().enumerate() {
            let g: Vec<C64> = times
                .iter()
                .enumerate()
                .map(|(i, &s)| {
                    closure_rhs(&lat, p, p, t - s, &CorrelationMatrix::from_diagonal(h.snapshot(i))).unwrap()
                })
                .collect();
            let integral: C64 = (0..times.len() - 1)
                .map(|i| 0.5 * (times[i + 1] - times[i]) * (g[i] + g[i + 1]))
                .sum();
            let expected = -lambda * lambda * integral;
            assert!(expected.im.abs() < 1e-14);
            assert!(
                (rate - expected.re).abs() < 1e-13 * (1.0 + rate.abs()),
                "p={p}: {rate} vs {expected}"
            );
        }
    }

    #[test]
    fn separable_solver_reproduces_direct_rates() {
        let lat = lattice(1, 6);
        let f0 = [0.9, 0.8, 0.1, 0.3, 0.05, 0.6];
        let run = solve_memory_equation(
            &lat,
            &f0,
            &MemoryConfig {
                lambda: 0.8,
                t_end: 0.6,
                dt: Some(0.05),
            },
        )
        .unwrap();
        assert_eq!(run.times().len(), 13);
        // central difference of the stored trajectory against the direct rate
        for i in [4, 8] {
            let t = run.times()[i];
            let direct = memory_rhs(&lat, &run, t).unwrap();
            for (p, &d) in direct.iter().enumerate() {
                let fd = (run.snapshot(i + 1)[p] - run.snapshot(i - 1)[p]) / (run.times()[i + 1] - run.times()[i - 1]);
                assert!((fd - d).abs() < 5e-3 * (1.0 + d.abs()), "t={t} p={p}: {fd} vs {d}");
            }
        }
    }

    #[test]
    fn initial_slope_vanishes() {
        let lat = lattice(1, 6);
        let f0 = [0.9, 0.8, 0.1, 0.3, 0.05, 0.6];
        let change = |lambda: f64, t: f64| {
            let run = solve_memory_equation(
                &lat,
                &f0,
                &MemoryConfig {
                    lambda,
                    t_end: t,
                    dt: Some(t / 40.0),
                },
            )
            .unwrap();
            run.last()
                .iter()
                .zip(&f0)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        };
        // O(λ² t²): halving t quarters the change, halving λ quarters it too
        let base = change(0.5, 0.2);
        assert!((change(0.5, 0.1) / base - 0.25).abs() < 0.02);
        assert!((change(0.25, 0.2) / base - 0.25).abs() < 1e-3);
    }

    #[test]
    fn conserves_mass() {
        let lat = lattice(2, 3);
        let f0: Vec<f64> = (0..9).map(|k| 0.1 + 0.09 * k as f64).collect();
        let run = solve_memory_equation(
            &lat,
            &f0,
            &MemoryConfig {
                lambda: 0.5,
                t_end: 2.0,
                dt: None,
            },
        )
        .unwrap();
        let mass = |f: &[f64]| f.iter().sum::<f64>();
        assert!((mass(run.last()) - mass(&f0)).abs() < 1e-12);
        assert!(run.last() != f0.as_slice());
    }

    #[test]
    fn history_interpolates_and_guards() {
        let mut h = MemoryKernelState::new(vec![0.0, 1.0], 1.0);
        h.push(1.0, vec![1.0, 0.0]).unwrap();
        assert_eq!(h.at(0.25).unwrap(), vec![0.25, 0.75]);
        assert!(h.push(1.0, vec![0.0, 0.0]).is_err());
        assert!(matches!(h.at(1.5), Err(Error::HistoryGap { .. })));
    }

    #[test]
    fn csv_rows() {
        let dir = tempfile::tempdir().unwrap();
        let mut h = MemoryKernelState::new(vec![0.5, 0.25], 1.0);
        h.push(0.5, vec![0.4, 0.3]).unwrap();
        let path = h.write_csv(dir.path().join("m.csv")).unwrap();
        let rows = crate::output::read_rows(&path).unwrap();
        assert_eq!(rows.len(), 4);
    }
}
