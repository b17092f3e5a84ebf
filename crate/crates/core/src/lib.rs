//! Crisp and fuzzy finite element eigenvalue studies of the one-group
//! neutron diffusion equation on an equilateral triangular bare reactor.
//!
//! The crate is organized bottom-up:
//!
//! * [`interval`] and [`fuzzy`]: interval arithmetic, triangular fuzzy
//!   numbers and α-cut families.
//! * [`mesh`]: the median-fan triangulation and its refinements.
//! * [`fem`]: linear triangular elements, assembly and constraints.
//! * [`sparse`] and [`eig`]: sparse storage, envelope Cholesky and the
//!   generalized eigen solvers.
//! * [`study`]: α-level parameter sweeps and the mesh convergence study.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod eig;
pub mod error;
pub mod fem;
pub mod fuzzy;
pub mod interval;
pub mod mesh;
pub mod sparse;
pub mod study;

pub use error::{Error, Result};
