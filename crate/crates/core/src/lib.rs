//! Collective geometric-phase gates for charge qubits sharing one cavity mode.
//!
//! Units: `ħ = 1`, energies and angular frequencies in rad/ns, times in ns.
//! Basis index of `|b_{N−1} … b_0⟩ ⊗ |n⟩` is `n·2^N + Σ b_i 2^i`.

// `!(x > 0.0)` rejects NaN along with non-positive values
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod cluster;
pub mod error;
pub mod gates;
pub mod linalg;
pub mod model;
pub mod open_system;
pub mod operator;
pub mod phases;
pub mod propagator;
pub mod space;
pub mod sparse;
pub mod state;
pub mod units;

pub use error::{Error, Result};
