//! Homotopy machinery for semigroup presentations.
//!
//! The crate is organised around the derivation graph of a semigroup
//! presentation: vertices are non-empty words, edges are single rule
//! applications in context. On top of that sit homotopy relations between
//! parallel paths, homotopy bases, and two constructions that transport
//! bases between related presentations:
//!
//! * [`subgroup`] rewrites a presentation and homotopy base of a semigroup
//!   into a presentation and base for an arbitrary subgroup of finite
//!   translational index (coset alphabet `[i,a]`, the word and path maps
//!   `phi`/`psi`, the `Lambda` paths, and the base `K ∪ W`).
//! * [`extension`] builds a presentation and base for an ideal extension of
//!   a semigroup by a completely 0-simple semigroup (Rees matrix data,
//!   quasi-normal forms, the families `X1, X1', X2, X3, Xe`), iterated into
//!   a driver for arbitrary finite regular semigroups.
//!
//! Everything is desk-scale and certified: the [`oracle`] module enumerates
//! finite semigroups by breadth-first closure with certified word
//! identifications, and all constructed objects are validated against it.
//!
//! The crate is `no_std` (with `alloc`); all containers are ordered so that
//! every construction is deterministic and byte-reproducible.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod extension;
pub mod graph;
pub mod homotopy;
pub mod oracle;
pub mod subgroup;
pub mod words;

pub use graph::{Edge, Path, PathFinder, Sign, SubgraphFilter};
pub use homotopy::{HomotopyBase, Move, ParallelPair};
pub use oracle::{CosetFamily, FiniteSemigroup, GreenStructure};
pub use words::{Interner, Letter, Presentation, Rule, Tag, Word};
