//! Two-body geometry of the asteroid ellipse.

use crate::error::{Error, Result};

const NEWTON_ITERS: usize = 50;

/// Eccentric anomaly ξ solving ξ − e sin ξ = ℓ.
///
/// Newton from ξ₀ = ℓ + e sin ℓ; falls back to bisection on the bracket
/// [ℓ − e, ℓ + e] if Newton has not settled after 50 iterations.
pub fn solve_kepler(e: f64, mean_anomaly: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&e) {
        return Err(Error::Domain(format!("eccentricity {e} outside [0, 1)")));
    }
    let ell = mean_anomaly;
    if e == 0.0 {
        return Ok(ell);
    }
    let residual = |xi: f64| xi - e * xi.sin() - ell;
    let tol = 4.0 * f64::EPSILON * ell.abs().max(1.0);

    let mut xi = ell + e * ell.sin();
    for _ in 0..NEWTON_ITERS {
        let f = residual(xi);
        let step = f / (1.0 - e * xi.cos());
        xi -= step;
        if step.abs() <= tol {
            if residual(xi).abs() < 1e-13 && (xi - ell).abs() <= e + tol {
                return Ok(xi);
            }
            break;
        }
    }

    let (mut lo, mut hi) = (ell - e, ell + e);
    if residual(lo) > 0.0 || residual(hi) < 0.0 {
        return Err(Error::KeplerNonConvergence { e, mean_anomaly });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if residual(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= tol {
            break;
        }
    }
    let xi = 0.5 * (lo + hi);
    if residual(xi).abs() < 1e-13 {
        Ok(xi)
    } else {
        Err(Error::KeplerNonConvergence { e, mean_anomaly })
    }
}

/// Instantaneous ellipse quantities at a given mean anomaly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitalGeometry {
    pub eccentricity: f64,
    pub eccentric_anomaly: f64,
    /// 1 − e cos ξ
    pub rho: f64,
    /// Projection of the asteroid position (in units of a) on the planet direction.
    pub projection: f64,
}

/// Eccentricity √(1 − G²/Λ²), clamped at zero for |G| = Λ.
pub fn eccentricity(lambda: f64, ang_momentum: f64) -> f64 {
    let u = ang_momentum / lambda;
    (1.0 - u * u).max(0.0).sqrt()
}

/// ρ and p as functions of the eccentric anomaly.
#[inline]
pub fn rho_and_projection(e: f64, u: f64, cos_xi: f64, sin_xi: f64, cos_g: f64, sin_g: f64) -> (f64, f64) {
    let rho = 1.0 - e * cos_xi;
    let p = (cos_xi - e) * cos_g - u * sin_xi * sin_g;
    (rho, p)
}

pub fn orbital_geometry(lambda: f64, ang_momentum: f64, mean_anomaly: f64, pericentre: f64) -> Result<OrbitalGeometry> {
    if ang_momentum.abs() > lambda {
        return Err(Error::Domain(format!("|G| = {} exceeds Lambda = {lambda}", ang_momentum.abs())));
    }
    let e = eccentricity(lambda, ang_momentum);
    let xi = solve_kepler(e, mean_anomaly)?;
    let (rho, projection) = rho_and_projection(
        e,
        ang_momentum / lambda,
        xi.cos(),
        xi.sin(),
        pericentre.cos(),
        pericentre.sin(),
    );
    Ok(OrbitalGeometry {
        eccentricity: e,
        eccentric_anomaly: xi,
        rho,
        projection,
    })
}

/// The pair t₊, t₋ = e cos g ± ε G²/Λ².
pub fn t_pm(lambda: f64, ang_momentum: f64, pericentre: f64, eps: f64) -> Result<(f64, f64)> {
    if ang_momentum.abs() > lambda {
        return Err(Error::Domain(format!("|G| = {} exceeds Lambda = {lambda}", ang_momentum.abs())));
    }
    if !(0.0..0.5).contains(&eps) {
        return Err(Error::Domain(format!("epsilon {eps} outside [0, 1/2)")));
    }
    let u2 = (ang_momentum / lambda).powi(2);
    let base = eccentricity(lambda, ang_momentum) * pericentre.cos();
    Ok((base + eps * u2, base - eps * u2))
}

/// Wrap an angle into [0, period).
pub fn wrap_angle(x: f64, period: f64) -> f64 {
    let w = x.rem_euclid(period);
    if w >= period {
        0.0
    } else {
        w
    }
}

/// Signed difference a − b folded into [−period/2, period/2).
pub fn angle_diff(a: f64, b: f64, period: f64) -> f64 {
    (a - b + 0.5 * period).rem_euclid(period) - 0.5 * period
}
