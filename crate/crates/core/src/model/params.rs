use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the secular phase space.
///
/// Coordinates are the asteroid angular momentum, the planet radial impulse,
/// the asteroid pericentre angle measured from the planet direction, and the
/// planet distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecularState {
    pub ang_momentum: f64,
    pub radial_momentum: f64,
    pub pericentre: f64,
    pub distance: f64,
}

impl SecularState {
    pub const fn new(ang_momentum: f64, radial_momentum: f64, pericentre: f64, distance: f64) -> Self {
        Self {
            ang_momentum,
            radial_momentum,
            pericentre,
            distance,
        }
    }

    /// Components in the order (G, R, g, r).
    pub fn to_array(self) -> [f64; 4] {
        [
            self.ang_momentum,
            self.radial_momentum,
            self.pericentre,
            self.distance,
        ]
    }

    pub fn from_array(x: [f64; 4]) -> Self {
        Self::new(x[0], x[1], x[2], x[3])
    }
}

/// How the averaged potential coefficients are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialBackend {
    /// Periodic trapezoid quadrature in the eccentric anomaly at every call.
    Quadrature,
    /// Chebyshev-in-G / cosine-in-g coefficient tables built once at startup.
    Cached,
}

/// Physical constants of the model plus the reference datum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    pub m0: f64,
    pub beta: f64,
    /// Total angular momentum C.
    pub total_ang_momentum: f64,
    /// Asteroid Delaunay action Λ.
    pub lambda: f64,
    /// Truncation order of the potential expansion (even).
    pub k_max: usize,
    /// Trapezoid nodes for the truncated-potential quadrature.
    pub quad_nodes: usize,
    pub backend: PotentialBackend,
    pub datum: SecularState,
}

/// Highest supported truncation order.
pub const MAX_ORDER: usize = 40;

impl Default for Parameters {
    fn default() -> Self {
        Self {
            m0: 1.0,
            beta: 40.0,
            total_ang_momentum: 75.597,
            lambda: 3.099,
            k_max: 10,
            quad_nodes: 32,
            backend: PotentialBackend::Cached,
            datum: SecularState::new(-2.4915, -0.0039, 1.4524, 3132.069),
        }
    }
}

impl Parameters {
    /// Semi-major axis, a = Λ² / m₀³.
    pub fn semi_major_axis(&self) -> f64 {
        self.lambda * self.lambda / (self.m0 * self.m0 * self.m0)
    }

    /// Ratio β a / r.
    pub fn epsilon(&self, distance: f64) -> f64 {
        self.beta * self.semi_major_axis() / distance
    }

    /// Radius of the circular planet orbit minimising K₀, C² / (2 m₀³).
    pub fn circular_radius(&self) -> f64 {
        let c = self.total_ang_momentum;
        c * c / (2.0 * self.m0.powi(3))
    }

    /// Time-scale factor σ between the model's integration time and the
    /// secular time of the rescaled problem (equal binary masses, planet mass
    /// ratio fixed by β). Secular time t corresponds to model time σ·t.
    pub fn time_scale(&self) -> f64 {
        let kappa = kappa_for_beta(self.beta);
        let denom = 2.0 + kappa;
        kappa.powi(3) * 4.0 / denom
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("m0", self.m0),
            ("beta", self.beta),
            ("total_ang_momentum", self.total_ang_momentum),
            ("lambda", self.lambda),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if self.k_max < 2 || self.k_max % 2 != 0 || self.k_max > MAX_ORDER {
            return Err(Error::InvalidParameter(format!(
                "k_max must be even and in [2, {MAX_ORDER}], got {}",
                self.k_max
            )));
        }
        // the integrand is a trigonometric polynomial of degree k_max + 1
        if self.quad_nodes < self.k_max + 2 {
            return Err(Error::InvalidParameter(format!(
                "quad_nodes must be at least k_max + 2 = {}, got {}",
                self.k_max + 2,
                self.quad_nodes
            )));
        }
        let d = self.datum;
        if !(d.distance > 0.0) {
            return Err(Error::InvalidParameter("datum distance must be positive".into()));
        }
        if d.ang_momentum.abs() > self.lambda {
            return Err(Error::InvalidParameter(format!(
                "datum |G| = {} exceeds Lambda = {}",
                d.ang_momentum.abs(),
                self.lambda
            )));
        }
        let eps = self.epsilon(d.distance);
        if eps >= 0.5 {
            return Err(Error::InvalidParameter(format!(
                "datum violates beta a / r < 1/2 (got {eps})"
            )));
        }
        Ok(())
    }
}

/// Mass constants (β, β̄, σ) of the rescaled Jacobi Hamiltonian for mass
/// ratios m₁ = μ m₀ and m₂ = κ m₀.
pub fn jacobi_mass_constants(mu: f64, kappa: f64) -> Result<(f64, f64, f64)> {
    if !(mu > 0.0 && kappa > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "mass ratios must be positive (mu = {mu}, kappa = {kappa})"
        )));
    }
    let denom = 1.0 + mu + kappa;
    let beta = kappa * kappa * (1.0 + mu) / (mu * mu * denom);
    let beta_bar = kappa * kappa * (1.0 + mu) / (mu * denom);
    let sigma = kappa.powi(3) * (1.0 + mu).powi(2) / (mu * mu * denom);
    Ok((beta, beta_bar, sigma))
}

/// Planet mass ratio κ giving the requested β when μ = 1 (positive root of
/// 2κ² = β (2 + κ)).
pub fn kappa_for_beta(beta: f64) -> f64 {
    0.25 * (beta + (beta * beta + 16.0 * beta).sqrt())
}
