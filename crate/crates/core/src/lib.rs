//! Numerical toolkit for fractional P(φ)₁-processes: stable processes and
//! bridges, fractional Schrödinger operators, Feynman-Kac semigroups,
//! intrinsic ultracontractivity diagnostics and Gibbs measures on path space.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod feynman_kac;
pub mod gibbs;
pub mod iuc;
pub mod mc;
pub mod numerics;
pub mod potentials;
pub mod spectral;
pub mod stable;

pub use error::{Error, ErrorClass, Result};
pub use mc::{Accumulator, Chunking, MCEstimate};
pub use potentials::{PotentialKind, PotentialSpec};
pub use stable::{PathSkeleton, StableLaw, StableParams};
