//! Particle-number-conserving fermionic classical shadows.
//!
//! The crate samples classical shadows of η-particle fermion states under
//! Haar-random single-particle rotations, estimates k-body reduced density
//! matrices with either a dense estimator or a Pfaffian-based fast path, and
//! checks the closed-form channel and variance identities against exact
//! brute-force oracles.

pub mod channel;
pub mod combinat;
pub mod error;
pub mod fastpath;
pub mod fock;
pub mod identities;
pub mod linalg;
pub mod shadows;

pub use error::{Error, Result};
