use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidGrid(String),

    #[error("pair potential is not symmetric: v({x:?}) = {forward} but v(-x) = {backward}")]
    AsymmetricPotential { x: Vec<usize>, forward: f64, backward: f64 },

    #[error("{modes} momentum modes exceed the configured cap of {cap}")]
    ModeCapExceeded { modes: usize, cap: usize },

    #[error("Fock sector with {modes} modes exceeds the cap of {cap} modes (sector would hold {estimate} states)")]
    SectorTooLarge { modes: usize, cap: usize, estimate: u128 },

    #[error("invalid sector: {0}")]
    InvalidSector(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("operator is not hermitian (max |A - A†| = {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("norm drift {drift:e} after propagating to t = {time} exceeds {tolerance:e}")]
    NormDrift { time: f64, drift: f64, tolerance: f64 },

    #[error("Krylov propagation failed to converge: {0}")]
    KrylovStall(String),

    #[error("Wigner offset is off-grid; nearest representable epsilon is {nearest_eps}")]
    OffGrid { nearest_eps: f64 },

    #[error("occupation out of admissible range at mode {mode}: {value}")]
    OccupationOutOfRange { mode: usize, value: f64 },

    #[error("fermion bound violated at T = {time}: F[{mode}] = {value} (dT too large?)")]
    BoundViolation { time: f64, mode: usize, value: f64 },

    #[error("memory history has a gap: requested t = {requested}, history ends at {available}")]
    HistoryGap { requested: f64, available: f64 },

    #[error("memory step rejected at t = {time}: f[{mode}] = {value} left [-1e-6, 1+1e-6]")]
    StepRejected { time: f64, mode: usize, value: f64 },

    #[error("rate has a non-negligible imaginary part {imag:e} (scale {scale:e})")]
    ComplexRate { imag: f64, scale: f64 },

    #[error("{0}")]
    Numerical(String),

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("i/o error on {path:?}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(line: usize, message: impl Into<String>) -> Self {
        Error::Config {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors raised by a numerical guard (as opposed to bad input).
    pub fn is_numerical_guard(&self) -> bool {
        matches!(
            self,
            Error::NormDrift { .. }
                | Error::KrylovStall(_)
                | Error::BoundViolation { .. }
                | Error::StepRejected { .. }
                | Error::ComplexRate { .. }
                | Error::Numerical(_)
        )
    }
}
