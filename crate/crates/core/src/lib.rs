//! Quantization of the damped harmonic oscillator under different operator
//! orderings.
//!
//! The crate builds the Hamiltonian p²/2m + ½mω²y² + λ·(ordered yp) on a
//! position grid or in a truncated oscillator basis, diagonalizes it with
//! in-house dense solvers, reproduces the closed-form levels through the
//! Nikiforov–Uvarov construction, and checks the phase transformation that
//! maps the symmetrized Hamiltonian onto an oscillator of frequency
//! sqrt(ω² − λ²/4).

pub mod analysis;
pub mod cli;
pub mod error;
pub mod gauge;
pub mod linalg;
pub mod model;
pub mod nu;
pub mod operators;
pub mod verification;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, Spectrum};
pub use model::{analytic_energy, ordering_shift, regime_of, OrderingScheme, PhysParams, Regime};
pub use operators::{Backend, FockBasis, Grid};
