//! Exact reduced dynamics of one or two qubits coupled through XX flip-flop
//! terms to periodic XX spin-chain baths.
//!
//! The bath is fermionized analytically and the qubit-bath coupling enters
//! only through precomputed tables of plane-wave Slater-determinant sums
//! ([`slater::FTable`]). Each conserved-magnetization sector is then a small
//! linear system that is integrated in the interaction picture
//! ([`dynamics`]) and reduced to qubit observables ([`observables`]). The
//! [`oracle`] module holds the independent references: dense exact
//! diagonalization of the spin Hamiltonian and closed-form limits.
//!
//! The crate is `no_std` (it needs `alloc`). With the default `rayon`
//! feature, f-table rows and independent sectors are computed in parallel;
//! results do not depend on the thread count.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

mod error;
pub(crate) mod math;
pub(crate) mod par;

pub mod basis;
pub mod dynamics;
pub mod model;
pub mod observables;
pub mod oracle;
pub mod slater;

pub use num_complex::Complex64;

pub use basis::{enumerate_configs, rank, unrank, ConfigSpace, FermionConfig};
pub use dynamics::{
    evolve_coherent, evolve_ground, evolve_sector, CoherentRun, EvolutionPlan, FTableSet,
    GroundRun, QubitAmplitudes, SectorState, SectorTrajectory,
};
pub use error::{Error, Result};
pub use model::{
    coherent_coefficients, critical_fields, dispersion, ground_state, ground_state_for,
    momentum_grid, Branch, CoherentSpec, Coupling, GroundStateSpec, ModelParams, MomentumGrid,
    Parity,
};
pub use observables::{
    bloch_and_purity, concurrence, decoherence_factor, two_qubit_rho, w_factors, BellState,
    BlochPoint, TwoQubitRho, WFactors,
};
pub use slater::{
    build_f_table, dicke_initial_amplitudes, f_function, slater, FTable, TableBuildOptions,
};
