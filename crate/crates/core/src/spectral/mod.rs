//! Fractional Schrödinger operators on a periodic grid, their ground states
//! and the intrinsic semigroup.

mod eigen;
mod grid;
mod hamiltonian;
mod model;

pub use eigen::{lowest_eigenpairs, EigenConfig, EigenResult};
pub use grid::{GridSpec, DEFAULT_POINT_BUDGET};
pub use hamiltonian::{Hamiltonian, DEFAULT_V_CAP};
pub use model::{ground_state, ground_state_with, DecayFit, ProjectionDecay, SpectralConfig, SpectralModel};

/// Builds the discretised `(-Δ)^{α/2} + V`.
pub fn build_hamiltonian(
    grid: GridSpec,
    params: crate::stable::StableParams,
    v: &crate::potentials::PotentialSpec,
    cap: Option<f64>,
) -> crate::Result<Hamiltonian> {
    Hamiltonian::new(grid, params, v, cap)
}
