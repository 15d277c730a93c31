//! Hamiltonians of the secular binary-asteroid problem.

mod hamiltonian;
mod kepler;
mod params;
mod potential;
mod reduced;

pub use hamiltonian::{averaged_hamiltonian, full_hamiltonian, SecularModel, VectorField};
pub use kepler::{
    angle_diff, eccentricity, orbital_geometry, rho_and_projection, solve_kepler, t_pm, wrap_angle, OrbitalGeometry,
};
pub use params::{jacobi_mass_constants, kappa_for_beta, Parameters, PotentialBackend, SecularState, MAX_ORDER};
pub use potential::{
    u_exact, u_pm_direct, u_pm_direct_with, u_pm_identity, u_pm_identity_with, u_truncated, Jet3, TruncatedPotential,
    ORACLE_NODES,
};
pub use reduced::{Extremum, FGrid, FTopology};
