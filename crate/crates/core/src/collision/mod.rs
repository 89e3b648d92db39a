//! The discrete collision operator of the homogeneous quantum Boltzmann
//! equation.
//!
//! For every `k₁` the table lists the quadruples `(k₁, k₂, k₃, k₄)` with
//! `k₄ = k₁ + k₂ − k₃` exactly on the grid, weighted by a mollified energy
//! delta `δ_η(Δe)`. The collision operator is
//!
//! ```text
//! Q[F](k₁) = 4π L^{-2d} Σ w·K·[F₃F₄F̃₁F̃₂ − F₁F₂F̃₃F̃₄]
//! ```
//!
//! with `F̃ = 1 − F` for fermions and `1 + F` for bosons.

mod mollifier;
mod operator;
mod table;

pub use mollifier::{Mollifier, MollifierKind};
pub use operator::{collision_invariants, collision_operator, CollisionInvariants, Statistics};
pub use table::{kernel_value, KernelMode, Quadruple, QuadrupleTable, TABLE_STATS_SCHEMA};
