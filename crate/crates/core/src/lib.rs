//! Local minima, second-order points and third-order Newton steps for
//! multivariate cubic polynomials.

// Links the system OpenBLAS used by the SDP backend.
extern crate openblas_src;

pub mod classify;
pub mod coeff;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod linalg;
pub mod local_min;
pub mod newton;
pub mod poly;
pub mod reductions;
pub mod sdp;
pub mod sdpa;
pub mod sparse;

pub use coeff::{parse_f64, parse_rational, rationalize, Coeff};
pub use error::{Error, Result};
pub use poly::{CubicPolynomial, MonomialMap, RationalCubic, UnivariateCubic};
pub use sparse::SparsePolynomial;
