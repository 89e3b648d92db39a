//! Exact dynamics of `H = H₀ + λΦ` on a fixed-particle-number sector of the
//! fermionic Fock space.
//!
//! Basis states are `M`-bit occupation masks. The state `|mask⟩` is
//! `α⁺_{m₁} α⁺_{m₂} ⋯ α⁺_{mₙ} |0⟩` with `m₁ < m₂ < ⋯`, which makes the
//! Jordan–Wigner sign of a ladder operator on mode `k` equal to
//! `(−1)^{#occupied modes below k}`.

mod checkpoint;
mod hamiltonian;
mod observables;
mod operator;
mod propagate;
mod sector;
mod state;

pub use checkpoint::{read_checkpoint, write_checkpoint, write_correlation_csv};
pub use hamiltonian::{build_hamiltonian, interaction_terms, kinetic_energy};
pub use observables::{
    eight_point_function, expectation, n_point_function, total_momentum_distribution, two_point_matrix, wigner_hat,
};
pub use operator::{ManyBodyOperator, QuarticTerms};
pub use propagate::{evolve, Engine, KrylovOptions, Propagator, DENSE_LIMIT};
pub use sector::{apply_ladder, binomial, FockSector, Ladder, DEFAULT_SECTOR_MODE_CAP};
pub use state::StateVector;
