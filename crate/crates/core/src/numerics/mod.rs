//! Small numerical building blocks shared by the rest of the crate.

pub mod fit;
pub mod quad;

pub use fit::{linear_fit, quadratic_fit, LinearFit};
pub use quad::{GaussLegendre, QuadResult, Quadrature};
