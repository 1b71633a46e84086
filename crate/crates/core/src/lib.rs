//! Exact enumeration and analysis of vertex optimal designs.
//!
//! Given a finite-support optimal design problem with rational regressors and
//! a known maximal optimal design, the set of all optimal designs is a
//! polytope `{w >= 0 : A w = b}`. This crate verifies the maximal design with
//! the equivalence theorem, builds that polytope, enumerates its vertices in
//! exact rational arithmetic, and derives the downstream artifacts: minimal
//! supports, bounds on the vertex count, symmetry orbits, decompositions,
//! exact design sizes and secondary-criterion optima.

pub mod analysis;
pub mod catalog;
pub mod design;
pub mod error;
pub mod io;
pub mod linalg;
pub mod polytope;
pub mod secondary;

pub use error::{Error, Result};
pub use linalg::{Rational, RationalMatrix};
