//! Fixed points of planar maps: Newton iteration, linear stability, surveys.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::fundamental_matrix;
use crate::model::{angle_diff, wrap_angle, VectorField};
use crate::poincare::{Mesh, Section, Seed};

pub type Mat2 = [[f64; 2]; 2];

/// An area-preserving map of a plane or cylinder, z = (g, G).
///
/// When `angle_period` is set the first coordinate is an angle and
/// differences are taken modulo that period.
pub trait PlaneMap: Sync {
    fn apply(&self, z: [f64; 2]) -> Result<[f64; 2]>;

    fn angle_period(&self) -> Option<f64> {
        None
    }

    /// a − b, with the angle folded when applicable.
    fn diff(&self, a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
        match self.angle_period() {
            Some(p) => [angle_diff(a[0], b[0], p), a[1] - b[1]],
            None => [a[0] - b[0], a[1] - b[1]],
        }
    }

    fn normalize(&self, z: [f64; 2]) -> [f64; 2] {
        match self.angle_period() {
            Some(p) => [wrap_angle(z[0], p), z[1]],
            None => z,
        }
    }
}

impl PlaneMap for Section {
    fn apply(&self, z: [f64; 2]) -> Result<[f64; 2]> {
        Ok(self.return_map(&Seed::new(z[0], z[1]))?.seed.as_vec())
    }

    fn angle_period(&self) -> Option<f64> {
        Some(PI)
    }
}

/// The return map of a section under the time-reversed flow.
pub struct Backward<'a>(pub &'a Section);

impl PlaneMap for Backward<'_> {
    fn apply(&self, z: [f64; 2]) -> Result<[f64; 2]> {
        Ok(self.0.backward_return_map(&Seed::new(z[0], z[1]))?.seed.as_vec())
    }

    fn angle_period(&self) -> Option<f64> {
        Some(PI)
    }
}

/// Central finite-difference Jacobian with per-coordinate step h·max(1, |zᵢ|).
/// If a perturbed evaluation fails the step is shrunk once by 10.
pub fn map_jacobian<M: PlaneMap + ?Sized>(map: &M, z: [f64; 2], h: f64) -> Result<Mat2> {
    let mut jac = [[0.0; 2]; 2];
    for j in 0..2 {
        let base = h * z[j].abs().max(1.0);
        let column = |step: f64| -> Result<[f64; 2]> {
            let mut zp = z;
            let mut zm = z;
            zp[j] += step;
            zm[j] -= step;
            let d = map.diff(map.apply(zp)?, map.apply(zm)?);
            Ok([d[0] / (2.0 * step), d[1] / (2.0 * step)])
        };
        let col = match column(base) {
            Ok(c) => c,
            Err(_) => column(0.1 * base)?,
        };
        jac[0][j] = col[0];
        jac[1][j] = col[1];
    }
    Ok(jac)
}

/// DP from the fundamental matrix of the flow, projected through the
/// section and energy constraints. Independent of [`map_jacobian`].
pub fn variational_map_jacobian(section: &Section, seed: &Seed) -> Result<Mat2> {
    let model = section.model();
    let x0 = section.lift_state(seed)?;
    let ret = section.return_map(seed)?;
    let n = section.normal();
    let n4 = [n[0], 0.0, n[1], n[2]];
    let f0 = model.eval(&x0.to_array())?;
    // H_G = ġ, H_g = −Ġ, H_r = −Ṙ, H_R = ṙ.
    let (hg_mom, hg_peri, h_r, h_rad) = (f0[2], -f0[0], -f0[1], f0[3]);
    if h_rad.abs() < 1e-300 {
        return Err(Error::DegenerateSection("radial velocity vanishes at the lift".into()));
    }
    let dr_dperi = -n[1] / n[2];
    let dr_dmom = -n[0] / n[2];
    let drad_dperi = -(hg_peri + h_r * dr_dperi) / h_rad;
    let drad_dmom = -(hg_mom + h_r * dr_dmom) / h_rad;
    let lift = [[0.0, drad_dperi, 1.0, dr_dperi], [1.0, drad_dmom, 0.0, dr_dmom]];

    let delta = section.settings().delta;
    let (_, m) = fundamental_matrix(model, &x0.to_array(), ret.tau, delta)?;
    let f1 = model.eval(&ret.state.to_array())?;
    let rate: f64 = (0..4).map(|i| n4[i] * f1[i]).sum();
    let mut out = [[0.0; 2]; 2];
    for (j, col) in lift.iter().enumerate() {
        let mut dx = [0.0; 4];
        for (i, d) in dx.iter_mut().enumerate() {
            *d = (0..4).map(|k| m[k][i] * col[k]).sum();
        }
        let dtau = -(0..4).map(|i| n4[i] * dx[i]).sum::<f64>() / rate;
        out[0][j] = dx[2] + f1[2] * dtau;
        out[1][j] = dx[0] + f1[0] * dtau;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Hyperbolic,
    Elliptic,
    Marginal,
}

impl Stability {
    pub fn as_str(self) -> &'static str {
        match self {
            Stability::Hyperbolic => "hyperbolic",
            Stability::Elliptic => "elliptic",
            Stability::Marginal => "marginal",
        }
    }
}

/// Eigen-decomposition of a 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Linearization {
    pub jacobian: Mat2,
    /// (re, im) of both eigenvalues; for a real pair the first has the larger modulus.
    pub eigenvalues: [(f64, f64); 2],
    pub stability: Stability,
    /// Unit unstable and stable directions of a real pair.
    pub directions: Option<([f64; 2], [f64; 2])>,
}

const MARGINAL_TOL: f64 = 1e-4;

fn eigenvector(m: &Mat2, lambda: f64) -> [f64; 2] {
    let a = [m[0][1], lambda - m[0][0]];
    let b = [lambda - m[1][1], m[1][0]];
    let na = a[0].hypot(a[1]);
    let nb = b[0].hypot(b[1]);
    let (v, nv) = if na >= nb { (a, na) } else { (b, nb) };
    if nv == 0.0 {
        return [1.0, 0.0];
    }
    // Fixed orientation: first nonzero component positive.
    let s = if v[0] < 0.0 || (v[0] == 0.0 && v[1] < 0.0) { -1.0 } else { 1.0 };
    [s * v[0] / nv, s * v[1] / nv]
}

pub fn classify(m: Mat2) -> Linearization {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = 0.25 * tr * tr - det;
    if disc >= 0.0 {
        let root = disc.sqrt();
        let (mut l1, mut l2) = (0.5 * tr + root, 0.5 * tr - root);
        if l2.abs() > l1.abs() {
            std::mem::swap(&mut l1, &mut l2);
        }
        let marginal = (l1.abs() - 1.0).abs() < MARGINAL_TOL || (l2.abs() - 1.0).abs() < MARGINAL_TOL;
        let stability = if marginal { Stability::Marginal } else { Stability::Hyperbolic };
        let directions = (!marginal).then(|| (eigenvector(&m, l1), eigenvector(&m, l2)));
        Linearization {
            jacobian: m,
            eigenvalues: [(l1, 0.0), (l2, 0.0)],
            stability,
            directions,
        }
    } else {
        let im = (-disc).sqrt();
        let modulus = det.abs().sqrt();
        let stability = if (modulus - 1.0).abs() < MARGINAL_TOL && (0.5 * tr).abs() > 1.0 - MARGINAL_TOL {
            Stability::Marginal
        } else {
            Stability::Elliptic
        };
        Linearization {
            jacobian: m,
            eigenvalues: [(0.5 * tr, im), (0.5 * tr, -im)],
            stability,
            directions: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonSettings {
    /// Convergence threshold on ‖P(z) − z‖.
    pub tol: f64,
    pub max_iter: usize,
    /// Finite-difference step for DP.
    pub fd_step: f64,
    /// Longest Newton step allowed before damping.
    pub max_step: f64,
    /// Give up when the iterate moves further than this from the guess.
    pub max_travel: f64,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 30,
            fd_step: 1e-7,
            max_step: 0.1,
            max_travel: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub point: [f64; 2],
    pub residual: f64,
    pub iterations: usize,
    pub linearization: Linearization,
}

impl FixedPoint {
    pub fn stability(&self) -> Stability {
        self.linearization.stability
    }

    pub fn seed(&self) -> Seed {
        Seed::new(self.point[0], self.point[1])
    }
}

fn solve2(m: &Mat2, b: [f64; 2]) -> Option<[f64; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let scale = m.iter().flatten().fold(0.0f64, |a, x| a.max(x.abs())).max(1e-300);
    if det.abs() < 1e-8 * scale * scale {
        return None;
    }
    Some([
        (m[1][1] * b[0] - m[0][1] * b[1]) / det,
        (m[0][0] * b[1] - m[1][0] * b[0]) / det,
    ])
}

fn norm2(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

/// Newton's method on P(z) − z with a finite-difference Jacobian and step
/// damping.
pub fn newton_fixed_point<M: PlaneMap + ?Sized>(map: &M, guess: [f64; 2], settings: &NewtonSettings) -> Result<FixedPoint> {
    let start = map.normalize(guess);
    let mut z = start;
    let mut f = map.diff(map.apply(z)?, z);
    let mut res = norm2(f);
    for iter in 0..=settings.max_iter {
        if res < settings.tol {
            let jac = map_jacobian(map, z, settings.fd_step)?;
            return Ok(FixedPoint {
                point: z,
                residual: res,
                iterations: iter,
                linearization: classify(jac),
            });
        }
        if iter == settings.max_iter {
            break;
        }
        let mut jm = map_jacobian(map, z, settings.fd_step)?;
        jm[0][0] -= 1.0;
        jm[1][1] -= 1.0;
        let mut step = solve2(&jm, [-f[0], -f[1]])
            .ok_or_else(|| Error::Newton(format!("DP − I is singular at ({:.6}, {:.6})", z[0], z[1])))?;
        let len = norm2(step);
        if len > settings.max_step {
            step = [step[0] * settings.max_step / len, step[1] * settings.max_step / len];
        }
        let mut accepted = false;
        for _ in 0..6 {
            let trial = map.normalize([z[0] + step[0], z[1] + step[1]]);
            if let Ok(pz) = map.apply(trial) {
                let ft = map.diff(pz, trial);
                let rt = norm2(ft);
                if rt < res || rt < settings.tol {
                    z = trial;
                    f = ft;
                    res = rt;
                    accepted = true;
                    break;
                }
            }
            step = [0.5 * step[0], 0.5 * step[1]];
        }
        if !accepted {
            return Err(Error::Newton(format!(
                "no decrease of the residual {res:.3e} at ({:.6}, {:.6})",
                z[0], z[1]
            )));
        }
        if norm2(map.diff(z, start)) > settings.max_travel {
            return Err(Error::Newton("iterate left the search neighbourhood".into()));
        }
    }
    Err(Error::Newton(format!(
        "no convergence in {} iterations (residual {res:.3e})",
        settings.max_iter
    )))
}

/// Distance between two points, angle folded when applicable.
pub fn map_distance<M: PlaneMap + ?Sized>(map: &M, a: [f64; 2], b: [f64; 2]) -> f64 {
    norm2(map.diff(a, b))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurveySettings {
    pub newton: NewtonSettings,
    /// Points closer than this are the same fixed point.
    pub dedup_radius: f64,
    /// Skip guesses whose initial residual exceeds this.
    pub max_initial_residual: Option<f64>,
}

impl Default for SurveySettings {
    fn default() -> Self {
        Self {
            newton: NewtonSettings {
                max_iter: 20,
                ..NewtonSettings::default()
            },
            dedup_radius: 1e-5,
            max_initial_residual: None,
        }
    }
}

/// Newton from every node of `mesh`; converged points deduplicated and
/// sorted by (G, g).
pub fn survey<M: PlaneMap + ?Sized>(map: &M, mesh: &Mesh, settings: &SurveySettings) -> Vec<FixedPoint> {
    let guesses: Vec<[f64; 2]> = mesh.nodes().map(|s| s.as_vec()).collect();
    let found: Vec<FixedPoint> = guesses
        .par_iter()
        .filter_map(|&z| {
            if let Some(limit) = settings.max_initial_residual {
                let pz = map.apply(z).ok()?;
                if norm2(map.diff(pz, z)) > limit {
                    return None;
                }
            }
            newton_fixed_point(map, z, &settings.newton).ok()
        })
        .collect();
    dedup(map, found, settings.dedup_radius)
}

/// Merges points within `radius`, keeping the smaller residual, and sorts.
pub fn dedup<M: PlaneMap + ?Sized>(map: &M, mut points: Vec<FixedPoint>, radius: f64) -> Vec<FixedPoint> {
    points.sort_by(|a, b| a.residual.total_cmp(&b.residual));
    let mut out: Vec<FixedPoint> = Vec::new();
    for p in points {
        if out.iter().all(|q| map_distance(map, p.point, q.point) >= radius) {
            out.push(p);
        }
    }
    out.sort_by(|a, b| {
        a.point[1]
            .total_cmp(&b.point[1])
            .then(a.point[0].total_cmp(&b.point[0]))
    });
    out
}
