//! Numerical toolkit for basic hypergeometric series, the q-middle convolution,
//! and the variant of the q-hypergeometric equation of degree 2 together with
//! its closed-form solution families.
//!
//! Module map:
//! - [`qseries`]: q-Pochhammer symbols, `rφr-1`, theta functions, the q-Appell `Φ⁽¹⁾`
//! - [`jackson`]: Jackson integrals with a lattice scale `ξ`, kernels and weights
//! - [`qmc`]: q-convolution, q-middle convolution, quotient actions, scalar reduction
//! - [`variant`]: scalar q-difference operators and the parameter correspondences
//! - [`solutions`]: evaluators for every closed-form solution family
//! - [`relations`]: transformation-formula checks, linear relations, pseudo-constants
//! - [`suite`]: seeded verification sweeps producing [`relations::RelationReport`]s

pub mod error;
pub mod jackson;
pub mod poly;
pub mod qmc;
pub mod qseries;
pub mod relations;
pub mod sampling;
pub mod solutions;
pub mod suite;
pub mod truncation;
pub mod tuple_file;
pub mod variant;

pub use error::{QError, Result};
pub use truncation::{BilateralTruncation, Truncation};

/// Complex scalar used for every parameter and value in the crate.
pub type C64 = num_complex::Complex<f64>;

/// Shorthand constructor for a real-valued [`C64`].
#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}
