//! Exact computational algebra for wreath products, group rings and
//! direct/stable finiteness, with desk-scale verification suites.
//!
//! The crate is organised around six subsystems:
//!
//! * [`groups`] — a catalogue of concrete computable groups (cyclic, free
//!   abelian, permutation, table, products, central quotients) with exact
//!   element arithmetic and deterministic enumeration.
//! * [`rings`] — exact coefficient rings (ℤ, ℤ/nℤ, GF(p^k), rational
//!   functions) and group rings R[Γ] with convolution, augmentation and
//!   pushforward along group homomorphisms.
//! * [`matrices`] — matrix rings over group rings, block-triangular
//!   subrings, unitriangular inversion, Hensel lifting, and one-sided-unit
//!   searches for direct-finiteness verification.
//! * [`wreath`] — wreath products Δ≀Γ, structured endomorphism
//!   constructors, the module identification with R^d, and finite-instance
//!   structural checkers.
//! * [`automata`] — additive and linear cellular automata over catalogue
//!   groups, exact injectivity/surjectivity checking, the matrix↔CA
//!   correspondence and p-component decomposition.
//! * [`localembed`] — constructive local embeddings of field towers into
//!   matrix algebras over F_p, with a universal witness verifier.
//!
//! All values are immutable after construction and freely shareable
//! between threads. All arithmetic is exact; there is no floating point
//! anywhere in the crate.

pub mod automata;
pub mod error;
pub mod groups;
pub mod localembed;
pub mod matrices;
pub mod parse;
pub mod rings;
pub mod rng;
pub mod wreath;

pub use error::{Error, Result};
