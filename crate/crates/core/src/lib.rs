//! Exact local representation densities of hermitian lattices over
//! unramified quadratic extensions of p-adic fields.
//!
//! The crate computes representation densities by brute-force counting over
//! truncated rings, evaluates the matching closed forms symbolically in the
//! residue cardinality `q`, and mechanically verifies the local identities
//! relating them: the recursion formula, the cancellation laws, volume and
//! duality identities, the correction-coefficient (beta) system and its
//! Fourier relation, and the rank-1 intersection-number identity.
//!
//! Start with the runnable examples (`cargo run --example hironaka_table`)
//! or the `hermden` binary (`hermden verify hironaka --p 3`).

pub mod cache;
pub mod cli;
pub mod closed;
pub mod error;
pub mod field;
pub mod herm;
pub mod kr;
pub mod laurent;
pub mod oracle;

pub use error::{Error, Result};
pub use field::{FElement, PrimeContext, ResidueRing};
pub use herm::{AdmissibleFunction, HermMatrix, Weight, WeightVector};
