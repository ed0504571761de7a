//! Compressible magnetohydrodynamics in a rotating frame on a staggered grid,
//! with diagnostics for energy, entropy and the ballistic energy functional.
#![allow(clippy::neg_cmp_op_on_partial_ord)]


pub mod diagnostics;
pub mod elliptic;
pub mod grid;
pub mod scenarios;
pub mod solver;
pub mod thermo;
