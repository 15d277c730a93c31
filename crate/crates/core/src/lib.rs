//! Symbolic dynamics in the secular planar binary-asteroid problem.
//!
//! The pipeline runs from the averaged Hamiltonian through an RK4 flow and a
//! Poincaré return map to fixed points, invariant manifolds, covering
//! relations and fast Lyapunov indicators.

pub mod chaos;
pub mod covering;
pub mod error;
pub mod fixed_points;
pub mod integrator;
pub mod manifolds;
pub mod model;
pub mod poincare;

pub use error::{Error, Result};
pub use model::{Parameters, SecularModel, SecularState};
