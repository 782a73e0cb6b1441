//! Exact computation with graphs of groups over free groups.
//!
//! The crate provides, bottom up:
//!
//! * [`words`] — freely reduced and cyclic words over a finite ordered basis, with
//!   exact rational lengths and free-group automorphisms given on a basis;
//! * [`gog`] — graphs of groups with free vertex groups and trivial-or-cyclic edge
//!   groups, the path group with Britton reduction and a deterministic normal form;
//! * [`morphism`] — graph-of-groups isomorphisms with correction terms, composition,
//!   inversion, iteration and the equivalence moves;
//! * [`marking`] — identifications of a fundamental group with a standard free group;
//! * [`twisted`] — twisted conjugacy in free groups and base-point-free twisted
//!   conjugacy of closed words, with reduction and zero detection;
//! * [`dehn`] — Dehn twists with twistors, bondedness and the efficiency checker;
//! * [`two_level`] — 2-level graphs of groups, 2-level twists, the efficiency
//!   predicate and the normalization moves;
//! * [`growth`] — growth tables, quadratic-coefficient predictions, boundary simplex
//!   limit points and cancellation probes.
//!
//! All values are immutable after construction and every operation is a pure
//! function, so everything can be shared freely across threads. No floating point is
//! used anywhere; lengths are exact rationals.

pub mod dehn;
pub mod fixtures;
pub mod gog;
pub mod growth;
pub mod marking;
pub mod morphism;
pub mod oracle;
pub mod twisted;
pub mod two_level;
pub mod words;

pub use words::{Basis, BasisMap, CyclicWord, FreeWord, Letter, Rational, WordError};
