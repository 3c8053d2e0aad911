//! Spectral theory of diagonal canonical Hamiltonian systems `J M' = z H M`
//! on the half-line and of Krein strings.
//!
//! The crate works with piecewise-constant Hamiltonians carrying a constant
//! infinite tail. On that class every transfer matrix is a finite product of
//! closed-form matrix exponentials, the Weyl function is exact, and the
//! logarithmic integral of the spectral density can be obtained without any
//! improper integral. Quadrature is kept as an independent cross-check.
//!
//! Modules:
//!
//! - [`hamiltonian`]: data model, duality, shifts, Bernstein–Szegő truncation,
//!   det-one time change, the `ξ`/`η` grids and the discrete characteristic `K̃(H)`.
//! - [`transfer`]: per-piece propagators and the transfer matrix `M(t, z)`.
//! - [`weyl`]: Weyl–Titchmarsh function, Weyl disks, spectral density.
//! - [`entropy`]: the functionals `I`, `J`, `K` and the identity suite.
//! - [`muckenhoupt`]: fixed-scale `A₂` characteristics of weights.
//! - [`string`]: Krein strings and their bijection with unit-trace Hamiltonians.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]
#![warn(missing_debug_implementations)]
#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN.

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod entropy;
mod error;
pub mod hamiltonian;
mod math;
pub mod muckenhoupt;
pub mod quadrature;
pub mod string;
pub mod transfer;
pub mod weyl;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

#[cfg(test)]
pub(crate) mod testutil;
