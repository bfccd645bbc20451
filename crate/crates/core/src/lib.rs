//! Exact computational algebra for certifying torsion growth in
//! abelianizations of finite-index subgroups.
//!
//! The crate is organized around an exact integer linear algebra substrate
//! ([`linalg`]), finitely generated abelian groups ([`abelian`]), free-group
//! words with free differential calculus ([`words`], [`group`], [`fox`]),
//! coset enumeration and subgroup rewriting ([`cosets`], [`search`]),
//! group-ring lattices with a perturbation construction ([`zgmod`]), the
//! inductive two-relator chain driver ([`construct`]) and Lie-lattice
//! torsion identities ([`lie`]). All arithmetic is exact.

pub mod abelian;
pub mod construct;
pub mod cosets;
pub mod error;
pub mod fox;
pub mod group;
pub mod lie;
pub mod linalg;
pub mod report;
pub mod search;
pub mod words;
pub mod zgmod;

pub use error::{Error, Result};
