//! Solitary travelling waves in long-range FPUT lattices.
//!
//! The crate classifies a lattice potential by its dispersion relation,
//! constructs the travelling wave as a corrected KdV soliton by a contraction
//! iteration in even Sobolev spaces, and checks the result against direct
//! simulation of the lattice equations of motion.

// `!(x > 0.0)` deliberately rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod dispersion;
pub mod error;
pub mod krylov;
pub mod operators;
pub mod simulator;
pub mod solver;
pub mod spectral;

pub use catalog::{build_model, LatticeModel, ModelConfig, PotentialSpec};
pub use error::{Error, Result};
