//! Thermodynamics of sudden quantum quenches.
//!
//! The crate computes the entropy production `Σ = S(ρ₀‖ρ_τ)` of an
//! instantaneous quench `H₀ → H₀ + ΔH` starting from a Gibbs state, together
//! with its second-order split into a classical (population) part `Λ_cl` and
//! a quantum (coherence) part `Λ_qu`:
//!
//! * [`operator`] holds the dense Hermitian algebra (spectral decomposition
//!   with degeneracy grouping, Gibbs states, dephasing, relative entropy,
//!   variance and the y-integrated Wigner–Yanase–Dyson skew information).
//! * [`quench`] assembles the full [`quench::EntropyBudget`] for any finite
//!   dimensional Hamiltonian.
//! * [`landau_zener`] and [`xy_chain`] are closed-form backends for the two
//!   model systems, with explicit matrices for cross-checking against the
//!   generic code path.
//! * [`tpm`] enumerates and samples two-point-measurement trajectories and
//!   checks the integral fluctuation theorems.

pub mod error;
pub mod landau_zener;
pub mod operator;
pub mod quadrature;
pub mod quench;
pub mod special;
pub mod tpm;
pub mod xy_chain;

pub use error::{Error, Result};
pub use operator::{DensityOperator, HermitianOperator, Matrix, SpectralDecomposition};
pub use quench::{EntropyBudget, QuenchSpec};

/// Library version recorded in experiment metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
