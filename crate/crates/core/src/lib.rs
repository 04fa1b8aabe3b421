//! Entangled and classical values of n-player symmetric XOR games.
//!
//! A game is a bit list `G_0..G_n`; players win on input weight `j` when the
//! parity of their answers equals `G_j`. The entangled value is the maximum
//! modulus of `Σ (-1)^{G_j} C(n,j) 2^-n λ^j` on `|λ| = 1`
//! ([`quantum::entangled_value`]); the classical value is the best bias of a
//! deterministic strategy ([`classical::classical_value`]). [`sz`] benches the
//! random cosine sums behind the asymptotics, and [`ensemble`] runs the Monte
//! Carlo sweeps.

pub mod classical;
pub mod combinatorics;
pub mod ensemble;
pub mod error;
pub mod game;
pub mod plot;
pub mod quantum;
pub mod sz;
mod trig_max;

pub use error::{Error, Result};
pub use game::{SampleDescriptor, SymmetricGame};
pub use trig_max::{ValueEnclosure, MAX_GRID};
