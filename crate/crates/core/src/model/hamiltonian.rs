use super::kepler::orbital_geometry;
use super::params::{Parameters, SecularState};
use super::potential::{u_pm_direct, Order, TruncatedPotential};
use crate::error::{Error, Result};

/// Anything that can drive the integrator: a vector field on R⁴ and its Jacobian.
pub trait VectorField: Sync {
    fn eval(&self, x: &[f64; 4]) -> Result<[f64; 4]>;
    fn jacobian(&self, x: &[f64; 4]) -> Result<[[f64; 4]; 4]>;
}

/// The truncated secular Hamiltonian H = K(G, R, r) + U_k(G, g, r) together
/// with its canonical vector field.
#[derive(Debug, Clone)]
pub struct SecularModel {
    params: Parameters,
    potential: TruncatedPotential,
    /// When false the interaction potential is switched off and only K remains.
    with_potential: bool,
}

impl SecularModel {
    pub fn new(params: Parameters) -> Result<Self> {
        let potential = TruncatedPotential::new(&params)?;
        Ok(Self {
            params,
            potential,
            with_potential: true,
        })
    }

    /// The same model with U_k disabled.
    pub fn kinetic_only(&self) -> Self {
        Self {
            with_potential: false,
            ..self.clone()
        }
    }

    pub fn params(&self) -> &Parameters {
        &self.params
    }

    pub fn potential(&self) -> &TruncatedPotential {
        &self.potential
    }

    /// Energy of the datum, the level of the section.
    pub fn h_star(&self) -> Result<f64> {
        self.hamiltonian(&self.params.datum)
    }

    /// Kinetic part K = (R² + (G − C)²/r²)/(2m₀) − 2m₀²/r.
    pub fn kinetic(&self, s: &SecularState) -> f64 {
        let p = &self.params;
        let dg = s.ang_momentum - p.total_ang_momentum;
        let r = s.distance;
        (s.radial_momentum * s.radial_momentum + dg * dg / (r * r)) / (2.0 * p.m0) - 2.0 * p.m0 * p.m0 / r
    }

    pub fn hamiltonian(&self, s: &SecularState) -> Result<f64> {
        let u = if self.with_potential {
            self.potential.value(s.ang_momentum, s.pericentre, s.distance)?
        } else {
            self.check_distance(s.distance)?;
            0.0
        };
        Ok(self.kinetic(s) + u)
    }

    fn check_distance(&self, r: f64) -> Result<()> {
        if r > 0.0 {
            Ok(())
        } else {
            Err(Error::Domain(format!("distance {r} must be positive")))
        }
    }

    /// Hamiltonian with R = 0; H = this + R²/(2m₀).
    pub fn hamiltonian_at_rest(&self, g_mom: f64, peri: f64, dist: f64) -> Result<f64> {
        self.hamiltonian(&SecularState::new(g_mom, 0.0, peri, dist))
    }

    fn potential_jet(&self, s: &SecularState, order: Order) -> Result<super::potential::Jet3> {
        if self.with_potential {
            self.potential.jet(s.ang_momentum, s.pericentre, s.distance, order)
        } else {
            self.check_distance(s.distance)?;
            let lim = self.params.lambda - 1e-9;
            if s.ang_momentum.abs() > lim {
                return Err(Error::Domain(format!("|G| = {} exceeds {lim}", s.ang_momentum.abs())));
            }
            Ok(Default::default())
        }
    }

    /// (Ġ, Ṙ, ġ, ṙ) = (−∂H/∂g, −∂H/∂r, ∂H/∂G, ∂H/∂R).
    pub fn vector_field(&self, s: &SecularState) -> Result<[f64; 4]> {
        let p = &self.params;
        let jet = self.potential_jet(s, Order::Gradient)?;
        let r = s.distance;
        let dg = s.ang_momentum - p.total_ang_momentum;
        let h_mom = dg / (p.m0 * r * r) + jet.grad[0];
        let h_peri = jet.grad[1];
        let h_dist = -dg * dg / (p.m0 * r * r * r) + 2.0 * p.m0 * p.m0 / (r * r) + jet.grad[2];
        Ok([-h_peri, -h_dist, h_mom, s.radial_momentum / p.m0])
    }

    /// Jacobian of the vector field with respect to (G, R, g, r).
    pub fn vf_jacobian(&self, s: &SecularState) -> Result<[[f64; 4]; 4]> {
        let p = &self.params;
        let jet = self.potential_jet(s, Order::Hessian)?;
        let r = s.distance;
        let dg = s.ang_momentum - p.total_ang_momentum;
        let m0 = p.m0;
        let u = &jet.hess;
        // second derivatives of H in the (G, g, r) block
        let h_mm = 1.0 / (m0 * r * r) + u[0][0];
        let h_mp = u[0][1];
        let h_mr = -2.0 * dg / (m0 * r * r * r) + u[0][2];
        let h_pp = u[1][1];
        let h_pr = u[1][2];
        let h_rr = 3.0 * dg * dg / (m0 * r.powi(4)) - 4.0 * m0 * m0 / (r * r * r) + u[2][2];
        Ok([
            [-h_mp, 0.0, -h_pp, -h_pr],
            [-h_mr, 0.0, -h_pr, -h_rr],
            [h_mm, 0.0, h_mp, h_mr],
            [0.0, 1.0 / m0, 0.0, 0.0],
        ])
    }

    /// Reduced one-degree-of-freedom Hamiltonian F(G, g) = (K₁ + U_k) at r = r₀.
    pub fn reduced_f(&self, g_mom: f64, peri: f64) -> Result<f64> {
        let p = &self.params;
        let r0 = p.circular_radius();
        let k1 = g_mom * (g_mom - 2.0 * p.total_ang_momentum) / (2.0 * p.m0 * r0 * r0);
        Ok(k1 + self.potential.value(g_mom, peri, r0)?)
    }
}

impl VectorField for SecularModel {
    fn eval(&self, x: &[f64; 4]) -> Result<[f64; 4]> {
        self.vector_field(&SecularState::from_array(*x))
    }

    fn jacobian(&self, x: &[f64; 4]) -> Result<[[f64; 4]; 4]> {
        self.vf_jacobian(&SecularState::from_array(*x))
    }
}

/// The unaveraged three-degree-of-freedom Hamiltonian, including the
/// Keplerian constant and the mass factor σ.
#[allow(clippy::too_many_arguments)]
pub fn full_hamiltonian(
    params: &Parameters,
    sigma: f64,
    lambda: f64,
    g_mom: f64,
    radial: f64,
    mean_anomaly: f64,
    peri: f64,
    dist: f64,
) -> Result<f64> {
    let m0 = params.m0;
    let a = lambda * lambda / m0.powi(3);
    let ba = params.beta * a;
    let geo = orbital_geometry(lambda, g_mom, mean_anomaly, peri)?;
    let common = dist * dist + ba * ba * geo.rho * geo.rho;
    let cross = 2.0 * ba * dist * geo.projection;
    let (plus, minus) = (common + cross, common - cross);
    if !(plus > 0.0 && minus > 0.0) {
        return Err(Error::Domain("non-positive radicand in the interaction terms".into()));
    }
    let dg = g_mom - params.total_ang_momentum;
    Ok(-m0.powi(5) / (2.0 * lambda * lambda) + sigma / (2.0 * m0) * (radial * radial + dg * dg / (dist * dist))
        - sigma * m0 * m0 / plus.sqrt()
        - sigma * m0 * m0 / minus.sqrt())
}

/// The averaged Hamiltonian H̄ assembled from the exact U±.
pub fn averaged_hamiltonian(params: &Parameters, sigma: f64, g_mom: f64, radial: f64, peri: f64, dist: f64) -> Result<f64> {
    let m0 = params.m0;
    let (up, um) = u_pm_direct(params, g_mom, peri, dist)?;
    let dg = g_mom - params.total_ang_momentum;
    let k = (radial * radial + dg * dg / (dist * dist)) / (2.0 * m0) - 2.0 * m0 * m0 / dist;
    let u = up + um + 2.0 * m0 * m0 / dist;
    Ok(-m0.powi(5) / (2.0 * params.lambda * params.lambda) + sigma * k + sigma * u)
}
