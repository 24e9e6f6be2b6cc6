//! Symbolic Grassmann-Berezin calculus paired with a weighted-graph
//! uniform-spanning-tree toolkit.
//!
//! The crate cross-verifies every identity it implements through independent
//! routes: Berezin Gaussian integrals against determinants, the matrix-tree
//! theorem against brute-force tree enumeration, transfer-impedance edge
//! probabilities against fermionic expectations, cyclic-permutation cumulant
//! formulas against set-partition inversion of exact Gaussian moments, and
//! supersymmetric localization against exact superintegration.

pub mod cumulants;
pub mod error;
pub mod gaussian;
pub mod graph;
pub mod grassmann;
pub mod matrix;
pub mod poly;
pub mod scalar;
pub mod superspace;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::{Rat, Scalar};
