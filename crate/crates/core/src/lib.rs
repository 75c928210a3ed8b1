// SPDX-License-Identifier: Apache-2.0

//! Geometry of quantum circuit size on `SU(2^n)`.
//!
//! The crate models control Hamiltonians as vectors in the generalized Pauli
//! basis and measures curves of unitaries with right-invariant local metrics
//! (`F1`, `F2`, `Fp`, `Fq` and the smoothed Finsler metrics `F1Δ`, `FpΔ`).
//!
//! - [`pauli`]: Pauli strings, Pauli vectors, stabilizer subgroups.
//! - [`metric`]: the norms on the Lie algebra, the implicit-norm smoothing,
//!   Hessians and convexity checks.
//! - [`coords`]: Pauli coordinates, vectorization and the BCH superoperator
//!   that converts natural Pauli tangent coordinates into Hamiltonians.
//! - [`geodesic`]: the metric pulled back to Pauli coordinates, Christoffel
//!   symbols, geodesic shooting, Euler–Lagrange residuals and curve lengths.
//! - [`lattice`]: minimal Pauli geodesics through diagonal unitaries as a
//!   closest-vector problem, plus the volume bounds.
//! - [`bounds`]: the circuit-to-curve construction bounding distance by gate
//!   count, and the isometry catalogue.
//! - [`acceptance`]: the end-to-end checks shared by the CLI `reproduce`
//!   command and the acceptance test target.

#![forbid(unsafe_code)]

pub mod acceptance;
pub mod bounds;
pub mod config;
pub mod coords;
pub mod error;
pub mod geodesic;
pub mod lattice;
pub mod linalg;
pub mod metric;
pub mod pauli;

pub use error::{Error, Result};

/// Dense complex matrix used for operators and superoperators.
pub type CMatrix = nalgebra::DMatrix<num_complex::Complex64>;
