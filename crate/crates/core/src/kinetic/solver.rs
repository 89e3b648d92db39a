use std::str::FromStr;

use super::equilibrium::entropy;
use crate::collision::{collision_operator, QuadrupleTable, Statistics};
use crate::error::{Error, Result};
use crate::lattice::Lattice;

/// Fermion occupations outside `[−tol, 1 + tol]` abort the integration.
const BOUND_ABORT: f64 = 1e-6;

/// Occupation numbers `F(k)` on the momentum grid.
#[derive(Clone, Debug, PartialEq)]
pub struct OccupationFunction {
    values: Vec<f64>,
    stats: Statistics,
}

impl OccupationFunction {
    /// Fermion values must lie in `[0, 1]` and boson values be nonnegative,
    /// both up to `1e-9`.
    pub fn new(values: Vec<f64>, stats: Statistics) -> Result<Self> {
        for (mode, &value) in values.iter().enumerate() {
            let ok = match stats {
                Statistics::Fermion => (-1e-9..=1.0 + 1e-9).contains(&value),
                Statistics::Boson => value >= -1e-9 && value.is_finite(),
            };
            if !ok {
                return Err(Error::OccupationOutOfRange { mode, value });
            }
        }
        Ok(Self { values, stats })
    }

    pub(crate) fn new_unchecked(values: Vec<f64>, stats: Statistics) -> Self {
        Self { values, stats }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn statistics(&self) -> Statistics {
        self.stats
    }

    pub fn sup_distance(&self, other: &OccupationFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Method {
    #[default]
    Rk4,
    /// Dormand–Prince 5(4) with embedded error control.
    Rk45,
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rk4" => Ok(Self::Rk4),
            "rk45" | "rk45-adaptive" => Ok(Self::Rk45),
            other => Err(format!("unknown method `{other}` (rk4 | rk45)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    /// Fixed step for RK4, initial step for RK45; `None` picks
    /// `0.01 / max(1, ‖Q[F₀]‖∞)`.
    pub dt: Option<f64>,
    pub method: Method,
    pub t_end: f64,
    /// Kinetic-time interval between log rows; steps are shortened to land
    /// on every multiple.
    pub cadence: f64,
    /// Local error target of the adaptive method.
    pub tolerance: f64,
    /// Boson runs stop once some `F` exceeds this value.
    pub blowup_guard: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: None,
            method: Method::Rk4,
            t_end: 1.0,
            cadence: 0.1,
            tolerance: 1e-8,
            blowup_guard: 1e6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunLogRow {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub entropy: f64,
    pub min_f: f64,
    pub max_f: f64,
    pub q_inf: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunLog {
    pub rows: Vec<RunLogRow>,
    /// `F` at every logged time.
    pub snapshots: Vec<Vec<f64>>,
    /// Kinetic time at which the boson blow-up guard tripped.
    pub blowup: Option<f64>,
    /// Largest excursion of a fermion occupation outside `[0, 1]`.
    pub max_violation: f64,
    pub steps: usize,
}

impl RunLog {
    fn record(&mut self, lattice: &Lattice, t: f64, f: &OccupationFunction, q: &[f64]) {
        let v = f.values();
        self.rows.push(RunLogRow {
            t,
            mass: lattice.integral(|k| v[k]),
            energy: lattice.integral(|k| lattice.energy(k) * v[k]),
            entropy: entropy(lattice, f),
            min_f: v.iter().copied().fold(f64::INFINITY, f64::min),
            max_f: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            q_inf: q.iter().map(|x| x.abs()).fold(0.0, f64::max),
        });
        self.snapshots.push(v.to_vec());
    }
}

fn axpy(y: &[f64], a: f64, x: &[f64]) -> Vec<f64> {
    y.iter().zip(x).map(|(y, x)| y + a * x).collect()
}

fn combine(y: &[f64], h: f64, terms: &[(f64, &[f64])]) -> Vec<f64> {
    let mut out = y.to_vec();
    for &(c, k) in terms {
        if c != 0.0 {
            for (o, x) in out.iter_mut().zip(k) {
                *o += h * c * x;
            }
        }
    }
    out
}

struct Rhs<'a> {
    table: &'a QuadrupleTable,
    stats: Statistics,
}

impl Rhs<'_> {
    fn eval(&self, f: &[f64]) -> Result<Vec<f64>> {
        collision_operator(self.table, f, self.stats)
    }
}

fn rk4_step(rhs: &Rhs, f: &[f64], k1: &[f64], h: f64) -> Result<Vec<f64>> {
    let k2 = rhs.eval(&axpy(f, 0.5 * h, k1))?;
    let k3 = rhs.eval(&axpy(f, 0.5 * h, &k2))?;
    let k4 = rhs.eval(&axpy(f, h, &k3))?;
    Ok(combine(
        f,
        h,
        &[(1.0 / 6.0, k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)],
    ))
}

/// Dormand–Prince tableau.
const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One Dormand–Prince attempt: the 5th-order solution, its slope (FSAL) and
/// the scaled error norm.
fn dp_step(rhs: &Rhs, f: &[f64], k1: &[f64], h: f64, tol: f64) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let mut ks: Vec<Vec<f64>> = vec![k1.to_vec()];
    for stage in 1..7 {
        let terms: Vec<(f64, &[f64])> = (0..stage).map(|j| (DP_A[stage][j], ks[j].as_slice())).collect();
        let y = combine(f, h, &terms);
        // stage 7 is evaluated at the 5th-order solution itself
        debug_assert!(DP_C[stage] > 0.0);
        ks.push(rhs.eval(&y)?);
    }
    let y5 = combine(f, h, &(0..7).map(|j| (DP_B5[j], ks[j].as_slice())).collect::<Vec<_>>());
    let mut err = 0.0f64;
    for i in 0..f.len() {
        let e: f64 = h * (0..7).map(|j| (DP_B5[j] - DP_B4[j]) * ks[j][i]).sum::<f64>();
        err = err.max(e.abs() / (tol * (1.0 + f[i].abs().max(y5[i].abs()))));
    }
    let last = ks.pop().expect("seven stages");
    Ok((y5, last, err))
}

/// A stage leaving the admissible range means the step was too large, not
/// that the input was bad.
fn stage_guard(time: f64) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::OccupationOutOfRange { mode, value } => Error::BoundViolation { time, mode, value },
        other => other,
    }
}

/// Integrate `∂_T F = Q[F]` from `T = 0` to `config.t_end`.
pub fn integrate(
    lattice: &Lattice,
    f0: &OccupationFunction,
    table: &QuadrupleTable,
    config: &SolverConfig,
) -> Result<(OccupationFunction, RunLog)> {
    if !(config.t_end >= 0.0 && config.cadence > 0.0 && config.tolerance > 0.0) {
        return Err(Error::Numerical(format!("invalid solver settings {config:?}")));
    }
    let stats = f0.statistics();
    let rhs = Rhs { table, stats };
    let mut f = f0.values().to_vec();
    let mut q = rhs.eval(&f)?;
    let q_inf = q.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let mut h = config.dt.unwrap_or(0.01 / q_inf.max(1.0));
    if h <= 0.0 {
        return Err(Error::Numerical(format!("non-positive step {h}")));
    }
    let mut log = RunLog::default();
    let mut t = 0.0;
    log.record(lattice, t, &OccupationFunction::new_unchecked(f.clone(), stats), &q);
    let n_marks = (config.t_end / config.cadence - 1e-9).ceil().max(0.0) as usize;
    let marks: Vec<f64> = (1..=n_marks)
        .map(|i| (i as f64 * config.cadence).min(config.t_end))
        .collect();
    for &mark in &marks {
        while t < mark {
            let remaining = mark - t;
            let (h_try, clipped) = if h >= remaining * (1.0 - 1e-12) {
                (remaining, true)
            } else {
                (h, false)
            };
            let (next, next_q, t_next) = match config.method {
                Method::Rk4 => {
                    let y = rk4_step(&rhs, &f, &q, h_try).map_err(stage_guard(t))?;
                    let qy = rhs.eval(&y).map_err(stage_guard(t))?;
                    (y, qy, if clipped { mark } else { t + h_try })
                }
                Method::Rk45 => {
                    let (y, qy, err) = dp_step(&rhs, &f, &q, h_try, config.tolerance).map_err(stage_guard(t))?;
                    let factor = if err == 0.0 {
                        5.0
                    } else {
                        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                    };
                    if err > 1.0 {
                        h = h_try * factor;
                        if h < 1e-14 * config.t_end.max(1.0) {
                            return Err(Error::Numerical(format!("adaptive step underflow at T = {t}")));
                        }
                        continue;
                    }
                    if !clipped {
                        h = h_try * factor;
                    }
                    (y, qy, if clipped { mark } else { t + h_try })
                }
            };
            log.steps += 1;
            t = t_next;
            f = next;
            q = next_q;
            match stats {
                Statistics::Fermion => {
                    for (mode, &value) in f.iter().enumerate() {
                        let excess = (-value).max(value - 1.0);
                        log.max_violation = log.max_violation.max(excess);
                        if excess > BOUND_ABORT {
                            return Err(Error::BoundViolation { time: t, mode, value });
                        }
                    }
                }
                Statistics::Boson => {
                    if f.iter().any(|&x| x > config.blowup_guard || !x.is_finite()) {
                        log.blowup = Some(t);
                        let state = OccupationFunction::new_unchecked(f, stats);
                        log.record(lattice, t, &state, &q);
                        return Ok((state, log));
                    }
                }
            }
        }
        log.record(lattice, t, &OccupationFunction::new_unchecked(f.clone(), stats), &q);
    }
    Ok((OccupationFunction::new_unchecked(f, stats), log))
}
