//! Quasi-static brittle crack propagation with second- and fourth-order
//! phase-field models, discretised by NURBS-based isogeometric analysis on
//! non-conforming multipatch meshes coupled by master-slave condensation.
//!
//! The crate is split along the solution pipeline:
//!
//! * [`splines`] - B-spline/NURBS evaluation, knot insertion, Gauss rules.
//! * [`multipatch`] - patch models, interface coupling matrices, DOF
//!   classification and system condensation.
//! * [`constitutive`] - spectral strain split, degraded stress, consistent
//!   tangent, crack densities and the strain-history field.
//! * [`assembly`] - physical shape derivatives, element matrices and global
//!   sparse assembly.
//! * [`solver`] - staggered load-stepping driver with displacement control.
//! * [`problems`] - builders for the built-in benchmark models.
//! * [`linalg`] - small dense helpers and a skyline Cholesky solver.
//!
//! Everything is `no_std` + `alloc`; IO lives in the companion CLI crate.

#![no_std]
#![warn(missing_docs)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod assembly;
pub mod constitutive;
pub mod linalg;
pub mod multipatch;
pub mod problems;
pub mod solver;
pub mod splines;

pub(crate) mod fmath;
