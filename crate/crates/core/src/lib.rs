//! Numerical tropicalization of complex algebraic curves.
//!
//! Given generators of an ideal defining a curve in the torus `(C*)^n`, the
//! pipeline finds candidate ray directions by slicing the amoeba with binomial
//! hypersurfaces, computes each ray's multiplicity by counting homotopy paths
//! that converge into the torus as a Puiseux parameter goes to zero, and checks
//! the assembled fan against the numerically computed degree of the curve.
//!
//! No Gröbner bases are computed anywhere.

pub mod error;
pub mod intlin;
pub mod multiplicity;
pub mod pipeline;
pub mod plot;
pub mod poly;
pub mod slicer;
pub mod tracker;
pub mod tropfan;

pub use error::{Error, Result};
