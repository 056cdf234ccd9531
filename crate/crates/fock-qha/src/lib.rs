//! Numerical toolkit for operator theory on the Bargmann-Fock space.
//!
//! The crate works in a truncated monomial basis of the Fock space of
//! entire functions square-integrable against the Gaussian measure
//! `e^{-pi |z|^2} dm(z)` on C^n. It provides
//!
//! * the truncated basis itself (multi-indices, monomials, reproducing
//!   kernels) in [`fock`],
//! * tensor Gauss-Hermite quadrature matched to the Gaussian weight in
//!   [`quadrature`],
//! * symbol classes, heat kernels and function-side convolutions in
//!   [`symbols`],
//! * Toeplitz, Weyl/displacement and heat-semigroup operators in
//!   [`operators`],
//! * the quantum-harmonic-analysis convolutions (function * operator,
//!   operator * operator, Berezin transform, heat flow, Berger-Coburn
//!   reconstruction) in [`qha`],
//! * spectral summaries (operator/Schatten norms, convergence studies)
//!   in [`spectral`],
//! * a verification harness for the identities and inequalities the
//!   toolkit is built around in [`verify`], with report serialization
//!   in [`report`].

pub mod error;
pub mod fock;
pub mod operators;
pub mod qha;
pub mod quadrature;
pub mod report;
pub mod spectral;
pub mod symbols;
pub mod verify;

pub use error::{FockError, Result};

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex64;
