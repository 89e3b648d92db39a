//! Exact lattice-fermion dynamics next to the discrete quantum Boltzmann
//! equation.
//!
//! The crate is organised bottom-up:
//!
//! - [`lattice`]: the discrete momentum torus, dispersion, pair potential and
//!   the antisymmetrized two-body vertex.
//! - [`fock`]: fixed-particle-number Fock sectors, sparse many-body operators,
//!   exact propagation and correlation measurements.
//! - [`quasifree`]: quasifree (Gibbs-quadratic) states, determinant formulas
//!   for monomial expectations and restricted-quasifreeness residuals.
//! - [`collision`]: momentum-conserving quadruples, mollified energy deltas and
//!   the collision operator with its invariants.
//! - [`kinetic`]: time integration of the homogeneous Boltzmann equation.
//! - [`hierarchy`]: commutator coefficients, the quasifree closure of the
//!   second Duhamel step, the memory-kernel equation and its Markov limit.
//! - [`harness`]: config-driven experiment runner with CSV output.
//!
//! # Normalization
//!
//! All operators use Kronecker-normalized modes: `{α_p, α⁺_q} = 1(p = q)`.
//! Occupations `f_p = ⟨α⁺_p α_p⟩` lie in `[0, 1]`. Momentum sums carry an
//! explicit `L^{-d}` per integrated momentum, the same way a continuum
//! `∫ dp` would be discretized.

pub mod collision;
pub mod error;
pub mod fock;
pub mod harness;
pub mod hierarchy;
pub mod kinetic;
pub mod lattice;
pub mod linalg;
pub mod output;
pub mod quasifree;

pub use error::{Error, Result};
pub use lattice::{DispersionSpec, Lattice, PotentialSpec};
