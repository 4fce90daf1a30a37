//! Spectral measurement bench for div-curl products of orthonormal vector
//! fields on the periodic torus.
//!
//! The crate discretizes the classical div-curl setup on `[0,2π)^d` with
//! exact Fourier multipliers: curl-free and divergence-free families, Riesz
//! transforms and their commutators with multiplication operators, Hodge
//! potentials, negative-order Sobolev norms, and weak Schatten functionals
//! of densely materialized operators. On top of that sit seeded, replayable
//! experiments that check the algebraic identities to machine precision and
//! measure how the norms scale with the number of orthonormal pairs.

// parameter validation negates partial-order comparisons on purpose: the
// negated form also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
pub mod clifford;
pub mod config;
pub mod error;
pub mod experiment;
pub mod family;
pub mod fft;
pub mod field;
pub mod grid;
pub mod norms;
pub mod par;
pub mod runner;
pub mod spectral;

#[cfg(test)]
pub mod test_support;

pub use error::{Error, Result};
pub use field::{ScalarField, TwoFormField, VectorField};
pub use grid::Grid;
