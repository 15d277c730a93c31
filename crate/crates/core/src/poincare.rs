//! The section through the datum, lift/projection, and the first-return map.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{kepler_radial_period, rk4_step};
use crate::model::{angle_diff, wrap_angle, SecularModel, SecularState, VectorField};

/// A point (g, G) of the section chart, g ∈ [0, π).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Seed {
    pub pericentre: f64,
    pub ang_momentum: f64,
}

impl Seed {
    /// Builds a seed, folding the angle into [0, π).
    pub fn new(pericentre: f64, ang_momentum: f64) -> Self {
        Self {
            pericentre: wrap_angle(pericentre, PI),
            ang_momentum,
        }
    }

    pub fn as_vec(self) -> [f64; 2] {
        [self.pericentre, self.ang_momentum]
    }

    /// Euclidean distance with the angle difference taken modulo π.
    pub fn distance(&self, other: &Seed) -> f64 {
        let dg = angle_diff(self.pericentre, other.pericentre, PI);
        let dm = self.ang_momentum - other.ang_momentum;
        (dg * dg + dm * dm).sqrt()
    }

    /// Componentwise difference self − other, angle folded into [−π/2, π/2).
    pub fn delta(&self, other: &Seed) -> [f64; 2] {
        [
            angle_diff(self.pericentre, other.pericentre, PI),
            self.ang_momentum - other.ang_momentum,
        ]
    }

    pub fn offset(&self, d: [f64; 2]) -> Seed {
        Seed::new(self.pericentre + d[0], self.ang_momentum + d[1])
    }
}

/// Why a seed cannot be lifted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Inadmissible {
    /// The energy condition gives R² < 0.
    NegativeRadialEnergy { r_squared: f64 },
    /// The plane equation puts r outside the model's domain (r ≤ 0, ε ≥ 1/2, |G| > Λ).
    OutOfDomain,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LiftOutcome {
    Admissible(SecularState),
    Inadmissible(Inadmissible),
}

impl LiftOutcome {
    pub fn state(self) -> Option<SecularState> {
        match self {
            LiftOutcome::Admissible(s) => Some(s),
            LiftOutcome::Inadmissible(_) => None,
        }
    }
}

/// RK4 steps per radial period in the default return map. At 1000 steps the
/// energy error near the planet's pericentre reaches 1e-5 per revolution and
/// fixed points move by 1e-5; at 2000 both are below 1e-6.
pub const DEFAULT_STEPS_PER_PERIOD: f64 = 2000.0;

/// Numerical settings of the return map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnSettings {
    /// RK4 step.
    pub delta: f64,
    /// Section tolerance on the plane residual.
    pub eps_sigma: f64,
    /// Minimum flight time before a crossing counts.
    pub t_min: f64,
    /// Give up after this much time without a return.
    pub t_max: f64,
}

/// Plane Σ through the datum, normal to the (G, g, r) velocity there.
#[derive(Debug, Clone)]
pub struct Section {
    model: SecularModel,
    point: [f64; 3],
    normal: [f64; 3],
    h_star: f64,
    /// Sign of R chosen by the lift.
    branch: f64,
    settings: ReturnSettings,
}

/// Result of one application of the return map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Return {
    pub seed: Seed,
    pub tau: f64,
    pub state: SecularState,
    /// Plane residual at the returned point.
    pub residual: f64,
}

impl Section {
    /// Builds Σ with default settings: δ = T_r/2000 where T_r is the measured
    /// return time of the datum, and the lift branch following the sign of R⋆.
    pub fn build(model: SecularModel) -> Result<Self> {
        Self::build_with_steps(model, DEFAULT_STEPS_PER_PERIOD)
    }

    /// As [`Section::build`] with δ = T_r / `steps_per_period`.
    pub fn build_with_steps(model: SecularModel, steps_per_period: f64) -> Result<Self> {
        if !(steps_per_period >= 10.0 && steps_per_period.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "steps per period must be at least 10, got {steps_per_period}"
            )));
        }
        let estimate = kepler_radial_period(&model);
        let provisional = ReturnSettings {
            delta: estimate / steps_per_period,
            eps_sigma: 1e-10,
            t_min: estimate / 100.0,
            t_max: 100.0 * estimate,
        };
        let mut section = Self::with_settings(model, provisional, None)?;
        let period = section.return_map(&section.datum_seed())?.tau;
        section.settings = ReturnSettings {
            delta: period / steps_per_period,
            eps_sigma: 1e-10,
            t_min: period / 100.0,
            t_max: 100.0 * period,
        };
        Ok(section)
    }

    /// Builds Σ with explicit settings; `branch` overrides the sign of R
    /// used by the lift (default: the sign of the datum's R⋆).
    pub fn with_settings(model: SecularModel, settings: ReturnSettings, branch: Option<f64>) -> Result<Self> {
        let datum = model.params().datum;
        let v = model.vector_field(&datum)?;
        let normal = [v[0], v[2], v[3]];
        if normal.iter().all(|c| c.abs() < 1e-14) {
            return Err(Error::DegenerateSection("velocity at the datum vanishes".into()));
        }
        if normal[2].abs() < 1e-14 {
            return Err(Error::DegenerateSection("the section cannot be solved for r (v_r = 0)".into()));
        }
        let h_star = model.hamiltonian(&datum)?;
        let branch = match branch {
            Some(b) if b < 0.0 => -1.0,
            Some(_) => 1.0,
            None if datum.radial_momentum < 0.0 => -1.0,
            None => 1.0,
        };
        Ok(Self {
            point: [datum.ang_momentum, datum.pericentre, datum.distance],
            normal,
            h_star,
            branch,
            settings,
            model,
        })
    }

    /// The same plane on another energy level.
    pub fn with_energy(mut self, h: f64) -> Self {
        self.h_star = h;
        self
    }

    pub fn model(&self) -> &SecularModel {
        &self.model
    }

    pub fn normal(&self) -> [f64; 3] {
        self.normal
    }

    pub fn point(&self) -> [f64; 3] {
        self.point
    }

    pub fn h_star(&self) -> f64 {
        self.h_star
    }

    pub fn branch(&self) -> f64 {
        self.branch
    }

    pub fn settings(&self) -> &ReturnSettings {
        &self.settings
    }

    pub fn set_settings(&mut self, settings: ReturnSettings) {
        self.settings = settings;
    }

    pub fn datum_seed(&self) -> Seed {
        Seed::new(self.point[1], self.point[0])
    }

    /// Affine section function evaluated on a full state.
    pub fn plane(&self, x: &[f64; 4]) -> f64 {
        let n = &self.normal;
        let q = &self.point;
        n[0] * (x[0] - q[0]) + n[1] * (x[2] - q[1]) + n[2] * (x[3] - q[2])
    }

    /// Reconstructs (G, R, g, r) from a seed: r from the plane, R from H = h⋆.
    pub fn lift(&self, seed: &Seed) -> LiftOutcome {
        let params = self.model.params();
        let g_mom = seed.ang_momentum;
        let peri = wrap_angle(seed.pericentre, PI);
        let n = &self.normal;
        let q = &self.point;
        let dist = q[2] - (n[0] * (g_mom - q[0]) + n[1] * (peri - q[1])) / n[2];
        if !(dist > 0.0) || params.epsilon(dist) >= 0.5 || !(g_mom.abs() <= params.lambda) {
            return LiftOutcome::Inadmissible(Inadmissible::OutOfDomain);
        }
        let rest = match self.model.hamiltonian_at_rest(g_mom, peri, dist) {
            Ok(h) => h,
            Err(_) => return LiftOutcome::Inadmissible(Inadmissible::OutOfDomain),
        };
        let r_squared = 2.0 * params.m0 * (self.h_star - rest);
        if r_squared < 0.0 {
            return LiftOutcome::Inadmissible(Inadmissible::NegativeRadialEnergy { r_squared });
        }
        LiftOutcome::Admissible(SecularState::new(g_mom, self.branch * r_squared.sqrt(), peri, dist))
    }

    pub fn lift_state(&self, seed: &Seed) -> Result<SecularState> {
        match self.lift(seed) {
            LiftOutcome::Admissible(s) => Ok(s),
            LiftOutcome::Inadmissible(why) => Err(Error::Inadmissible {
                g: seed.pericentre,
                big_g: seed.ang_momentum,
                reason: format!("{why:?}"),
            }),
        }
    }

    /// Projection (G, R, g, r) ↦ (g mod π, G).
    pub fn project(state: &SecularState) -> Seed {
        Seed::new(state.pericentre, state.ang_momentum)
    }

    /// First return to Σ with the departure orientation.
    pub fn return_map(&self, seed: &Seed) -> Result<Return> {
        self.return_from(&self.lift_state(seed)?, 1.0)
    }

    /// First return under the time-reversed flow, for stable manifolds.
    pub fn backward_return_map(&self, seed: &Seed) -> Result<Return> {
        self.return_from(&self.lift_state(seed)?, -1.0)
    }

    /// Return of a full state lying on Σ. `direction` is ±1 (forward/backward time).
    pub fn return_from(&self, start: &SecularState, direction: f64) -> Result<Return> {
        let set = &self.settings;
        let h = direction.signum() * set.delta;
        let x0 = start.to_array();
        let v0 = self.model.eval(&x0)?;
        let mut x = x0;
        let mut s_prev = self.plane(&x);
        let mut t = 0.0;
        while t < set.t_max {
            let xn = rk4_step(&self.model, &x, h).map_err(|e| Error::Integration {
                time: t,
                reason: e.to_string(),
            })?;
            let s_next = self.plane(&xn);
            let t_next = t + set.delta;
            if t_next > set.t_min && (s_prev * s_next < 0.0 || s_next == 0.0) {
                let (frac, xc, resid) = self.bisect_crossing(&x, s_prev, h)?;
                let vc = self.model.eval(&xc)?;
                let orient = v0[0] * vc[0] + v0[2] * vc[2] + v0[3] * vc[3];
                if orient > 0.0 {
                    let state = SecularState::from_array(xc);
                    return Ok(Return {
                        seed: Section::project(&state),
                        tau: t + frac * set.delta,
                        state,
                        residual: resid,
                    });
                }
            }
            x = xn;
            s_prev = s_next;
            t = t_next;
        }
        Err(Error::NoReturn { t_max: set.t_max })
    }

    /// Bisects the step length from `x` until the plane residual drops below
    /// the tolerance. Returns (fraction of the step, state, residual).
    fn bisect_crossing(&self, x: &[f64; 4], s_start: f64, h: f64) -> Result<(f64, [f64; 4], f64)> {
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut best = (1.0, *x, f64::INFINITY);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let xm = rk4_step(&self.model, x, mid * h)?;
            let sm = self.plane(&xm);
            if sm.abs() < best.2.abs() {
                best = (mid, xm, sm);
            }
            if sm.abs() < self.settings.eps_sigma {
                return Ok(self.polish_crossing(x, h, (mid, xm, sm)));
            }
            if sm * s_start > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-16 {
                break;
            }
        }
        Ok(best)
    }

    /// A few Newton steps on the partial step length using ds/dh ≈ n·f, so
    /// that the returned point depends smoothly on the seed.
    fn polish_crossing(&self, x: &[f64; 4], h: f64, start: (f64, [f64; 4], f64)) -> (f64, [f64; 4], f64) {
        let mut best = start;
        for _ in 0..3 {
            let (frac, xm, sm) = best;
            let Ok(v) = self.model.eval(&xm) else { break };
            let rate = h * (self.normal[0] * v[0] + self.normal[1] * v[2] + self.normal[2] * v[3]);
            if rate == 0.0 {
                break;
            }
            let next = frac - sm / rate;
            if !(0.0..=1.0).contains(&next) {
                break;
            }
            let Ok(xn) = rk4_step(&self.model, x, next * h) else { break };
            let sn = self.plane(&xn);
            if sn.abs() >= sm.abs() {
                break;
            }
            best = (next, xn, sn);
        }
        best
    }

    /// n-fold iteration; stops at the first failure and reports its index.
    pub fn iterate(&self, seed: &Seed, n: usize) -> (Vec<Seed>, Option<Error>) {
        let mut out = Vec::with_capacity(n + 1);
        out.push(*seed);
        let mut z = *seed;
        for i in 0..n {
            match self.return_map(&z) {
                Ok(r) => {
                    z = r.seed;
                    out.push(z);
                }
                Err(e) => {
                    return (
                        out,
                        Some(Error::Iterate {
                            index: i + 1,
                            source: Box::new(e),
                        }),
                    )
                }
            }
        }
        (out, None)
    }

    /// Admissibility of every node of a (g, G) mesh, row-major in G.
    pub fn admissible_region(&self, mesh: &Mesh) -> Vec<bool> {
        mesh.nodes().map(|z| self.lift(&z).state().is_some()).collect()
    }
}

/// Regular grid over (g, G).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    pub peri_min: f64,
    pub peri_max: f64,
    pub n_peri: usize,
    pub mom_min: f64,
    pub mom_max: f64,
    pub n_mom: usize,
}

impl Mesh {
    /// Cell-centred grid over [0, π) × [−Λ, Λ].
    pub fn full(lambda: f64, n_peri: usize, n_mom: usize) -> Self {
        let dg = PI / n_peri as f64;
        let dm = 2.0 * lambda / n_mom as f64;
        Self {
            peri_min: 0.5 * dg,
            peri_max: PI - 0.5 * dg,
            n_peri,
            mom_min: -lambda + 0.5 * dm,
            mom_max: lambda - 0.5 * dm,
            n_mom,
        }
    }

    fn axis(min: f64, max: f64, n: usize, i: usize) -> f64 {
        if n <= 1 {
            0.5 * (min + max)
        } else {
            min + (max - min) * i as f64 / (n - 1) as f64
        }
    }

    pub fn len(&self) -> usize {
        self.n_peri * self.n_mom
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn node(&self, i_peri: usize, i_mom: usize) -> Seed {
        Seed {
            pericentre: Self::axis(self.peri_min, self.peri_max, self.n_peri, i_peri),
            ang_momentum: Self::axis(self.mom_min, self.mom_max, self.n_mom, i_mom),
        }
    }

    /// True when the g axis covers the full circle with uniform spacing, so
    /// the first and last columns are neighbours.
    pub fn periodic_in_angle(&self) -> bool {
        if self.n_peri < 2 {
            return false;
        }
        let step = (self.peri_max - self.peri_min) / (self.n_peri - 1) as f64;
        ((self.peri_min + PI - self.peri_max) - step).abs() < 1e-9 * step.max(1.0)
    }

    /// Connected components (4-neighbour, g periodic when the mesh wraps) of
    /// the nodes whose flag equals `value`. Indices are row-major; components
    /// are sorted by their first index.
    pub fn components(&self, flags: &[bool], value: bool) -> Vec<Vec<usize>> {
        let (ni, nj) = (self.n_peri, self.n_mom);
        let wrap = self.periodic_in_angle();
        let mut label = vec![usize::MAX; ni * nj];
        let mut out = Vec::new();
        for start in 0..ni * nj {
            if flags[start] != value || label[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut comp = vec![start];
            label[start] = id;
            let mut k = 0;
            while k < comp.len() {
                let idx = comp[k];
                k += 1;
                let (i, j) = (idx % ni, idx / ni);
                let mut next = Vec::with_capacity(4);
                if i > 0 {
                    next.push(idx - 1);
                } else if wrap {
                    next.push(idx + ni - 1);
                }
                if i + 1 < ni {
                    next.push(idx + 1);
                } else if wrap {
                    next.push(idx + 1 - ni);
                }
                if j > 0 {
                    next.push(idx - ni);
                }
                if j + 1 < nj {
                    next.push(idx + ni);
                }
                for n in next {
                    if flags[n] == value && label[n] == usize::MAX {
                        label[n] = id;
                        comp.push(n);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Nodes in row-major order (G outer, g inner).
    pub fn nodes(&self) -> impl Iterator<Item = Seed> + '_ {
        (0..self.n_mom).flat_map(move |j| (0..self.n_peri).map(move |i| self.node(i, j)))
    }
}
