//! Mixed finite elements for the coupled Stokes-Darcy problem.
//!
//! The crate is `no_std` (it needs `alloc`) and carries everything that is
//! pure computation: interface-matched triangulations, quadrature, the four
//! discrete spaces (bubble-enriched Lagrange velocities on the free-flow
//! region, Raviart-Thomas velocities on the porous region, discontinuous
//! pressures, interface multipliers), the element forms, the divergence-free
//! reconstruction used by the pressure-robust right-hand side, saddle-point
//! assembly, error norms and the benchmark problems.
//!
//! Factorization, file formats and the command line live in the `sdfem`
//! crate.

#![no_std]
#![forbid(unsafe_code)]
// Index loops mirror the math; `!(x > 0)` is the NaN-rejecting test.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

extern crate alloc;
#[cfg(any(feature = "std", test))]
extern crate std;

pub mod bench;
mod error;
pub mod errors;
pub mod fespace;
pub mod field;
pub mod forms;
pub mod geometry;
pub mod linalg;
pub mod mesh;
pub mod quadrature;
pub mod reconstruction;
pub mod system;

pub use error::{Error, Result};
pub use fespace::{Degree, Discretization};
pub use mesh::{EdgeClass, Marker, Mesh, Subdomain};

/// A point in the plane.
pub type Point = [f64; 2];
