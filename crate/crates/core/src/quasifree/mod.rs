//! Gauge-invariant quasifree states: two-point functions of quadratic Gibbs
//! states, determinant formulas for monomials, and residuals measuring how far
//! an exactly evolved state is from restricted quasifreeness.

mod correlation;
mod gibbs;
mod residual;
mod wick;

pub use correlation::CorrelationMatrix;
pub use gibbs::{FockDensity, FULL_FOCK_MODE_CAP};
pub use residual::{
    exact_eight_point, exact_four_point, quasifreeness_residual, write_residual_rows, ExactState, ResidualKind,
    ResidualRecord, ResidualReport, SampleSpec, RESIDUAL_COLUMNS, RESIDUAL_SCHEMA,
};
pub use wick::{det4_prediction, det8_prediction, quasifree_two_point, wick_expectation, QuasifreeSpec};
