//! Position-dependent SIAC (PSIAC) spline filtering for discontinuous
//! Galerkin output.
//!
//! Filter coefficients over rational knot sequences are generated in exact
//! rational arithmetic; applying a boundary filter reduces to one dot
//! product with a precomputed convolution matrix, yielding a polynomial in
//! the evaluation point. A double-precision quadrature pipeline
//! reproducing the conventional per-point approach is included for
//! stability comparisons, along with an upwind-DG/RK4 solver for the
//! canonical advection test problem.

pub mod dg;
pub mod exact;
pub mod filter;
pub mod kernel;
pub mod legacy;
pub mod spline;
