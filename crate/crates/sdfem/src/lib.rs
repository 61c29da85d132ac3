//! Sparse solves, mesh files, reports, parameter sweeps and diagnostics on
//! top of `sdfem-core`.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

pub mod cli;
pub mod diagnostics;
pub mod msh;
pub mod output;
pub mod solve;
pub mod study;

pub use sdfem_core as core;
