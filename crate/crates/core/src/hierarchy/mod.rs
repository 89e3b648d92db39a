//! The second Duhamel step of the BBGKY-type hierarchy for `ν_pq`, its
//! quasifree closure, and the homogeneous memory-kernel equation with its
//! Markov limit.

mod closure;
mod coefficients;
mod markov;
mod memory;

pub use closure::{closure_rhs, second_term_cancellation_check, second_term_with_vertex};
pub use coefficients::{coeff_f_pq, coeff_g_pq, QuarticCoefficient, QuarticKind};
pub use markov::{beta_function, beta_table, markov_limit_value, write_beta_csv, BETA_SCHEMA};
pub use memory::{default_step, memory_rhs, solve_memory_equation, MemoryConfig, MemoryKernelState, MEMORY_SCHEMA};
