//! Time integration of `∂_T F = Q[F]` in kinetic time, with conservation and
//! entropy monitoring.

mod equilibrium;
mod solver;

pub use equilibrium::{entropy, fermi_dirac_profile, fit_fermi_dirac};
pub use solver::{integrate, Method, OccupationFunction, RunLog, RunLogRow, SolverConfig};

pub use crate::collision::Statistics;
