//! Fixed-step classical Runge–Kutta propagation of states and tangent vectors.

use crate::error::{Error, Result};
use crate::model::{SecularModel, SecularState, VectorField};

#[inline]
fn axpy(x: &[f64; 4], h: f64, k: &[f64; 4]) -> [f64; 4] {
    [x[0] + h * k[0], x[1] + h * k[1], x[2] + h * k[2], x[3] + h * k[3]]
}

#[inline]
fn matvec(m: &[[f64; 4]; 4], w: &[f64; 4]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (o, row) in out.iter_mut().zip(m) {
        *o = row[0] * w[0] + row[1] * w[1] + row[2] * w[2] + row[3] * w[3];
    }
    out
}

pub fn norm(x: &[f64; 4]) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3]).sqrt()
}

/// One classical RK4 step of length `dt` (negative steps integrate backwards).
pub fn rk4_step<F: VectorField + ?Sized>(field: &F, x: &[f64; 4], dt: f64) -> Result<[f64; 4]> {
    let d = rk4_increment(field, x, dt)?;
    Ok([x[0] + d[0], x[1] + d[1], x[2] + d[2], x[3] + d[3]])
}

/// The change of state over one RK4 step.
pub fn rk4_increment<F: VectorField + ?Sized>(field: &F, x: &[f64; 4], dt: f64) -> Result<[f64; 4]> {
    let k1 = field.eval(x)?;
    let k2 = field.eval(&axpy(x, 0.5 * dt, &k1))?;
    let k3 = field.eval(&axpy(x, 0.5 * dt, &k2))?;
    let k4 = field.eval(&axpy(x, dt, &k3))?;
    let h = dt / 6.0;
    Ok([
        h * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        h * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        h * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
        h * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3]),
    ])
}

/// State with Kahan-compensated accumulation of the step increments. Over
/// 10⁶ steps the plain sum loses several digits in r, which is three orders
/// of magnitude larger than a typical increment.
#[derive(Debug, Clone, Copy)]
struct Compensated {
    x: [f64; 4],
    carry: [f64; 4],
}

impl Compensated {
    fn new(x: [f64; 4]) -> Self {
        Self { x, carry: [0.0; 4] }
    }

    fn step<F: VectorField + ?Sized>(&mut self, field: &F, dt: f64) -> Result<()> {
        let d = rk4_increment(field, &self.x, dt)?;
        for i in 0..4 {
            let y = d[i] - self.carry[i];
            let t = self.x[i] + y;
            self.carry[i] = (t - self.x[i]) - y;
            self.x[i] = t;
        }
        Ok(())
    }
}

/// Step lengths that take a flow from 0 to `t_final` in steps of `delta`,
/// shortening the last one to land on `t_final`.
fn schedule(t_final: f64, delta: f64) -> Result<(usize, f64, f64)> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParameter(format!("time step must be positive, got {delta}")));
    }
    if !t_final.is_finite() {
        return Err(Error::InvalidParameter(format!("final time must be finite, got {t_final}")));
    }
    let dir = if t_final < 0.0 { -1.0 } else { 1.0 };
    let span = t_final.abs();
    let mut n = (span / delta).floor() as usize;
    let mut rest = span - n as f64 * delta;
    // A remainder below the rounding error of n·δ is an artefact of how
    // t_final was computed, not a partial step.
    let tol = delta * 1e-12 + 4.0 * f64::EPSILON * span;
    if rest > delta - tol {
        n += 1;
        rest = 0.0;
    }
    if rest < tol {
        rest = 0.0;
    }
    Ok((n, dir * delta, dir * rest))
}

fn wrap_err(time: f64, err: Error) -> Error {
    match err {
        Error::Integration { .. } => err,
        other => Error::Integration {
            time,
            reason: other.to_string(),
        },
    }
}

/// Φ^t(x): composition of RK4 steps of size `delta`.
pub fn flow<F: VectorField + ?Sized>(field: &F, x0: &[f64; 4], t_final: f64, delta: f64) -> Result<[f64; 4]> {
    let (n, h, rest) = schedule(t_final, delta)?;
    let mut x = Compensated::new(*x0);
    let mut t = 0.0;
    for i in 1..=n {
        x.step(field, h).map_err(|e| wrap_err(t, e))?;
        t = i as f64 * h;
    }
    if rest != 0.0 {
        x.step(field, rest).map_err(|e| wrap_err(t, e))?;
    }
    Ok(x.x)
}

/// Sampled trajectory.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<[f64; 4]>,
}

/// As [`flow`], recording every `stride`-th step (and the endpoints).
pub fn flow_dense<F: VectorField + ?Sized>(
    field: &F,
    x0: &[f64; 4],
    t_final: f64,
    delta: f64,
    stride: usize,
) -> Result<Trajectory> {
    let stride = stride.max(1);
    let (n, h, rest) = schedule(t_final, delta)?;
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![*x0],
    };
    let mut acc = Compensated::new(*x0);
    let mut t = 0.0;
    for i in 1..=n {
        acc.step(field, h).map_err(|e| wrap_err(t, e))?;
        t = if i == n && rest == 0.0 { t_final } else { i as f64 * h };
        if i % stride == 0 {
            traj.times.push(t);
            traj.states.push(acc.x);
        }
    }
    if rest != 0.0 {
        acc.step(field, rest).map_err(|e| wrap_err(t, e))?;
        t = t_final;
    }
    let x = acc.x;
    if *traj.times.last().unwrap() != t {
        traj.times.push(t);
        traj.states.push(x);
    }
    Ok(traj)
}

/// A base point together with a tangent vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentState {
    pub base: SecularState,
    pub w: [f64; 4],
}

/// One RK4 step of the coupled system ẋ = f(x), ẇᵢ = Df(x) wᵢ for `K`
/// tangent vectors sharing the base trajectory.
pub fn variational_step<F: VectorField + ?Sized, const K: usize>(
    field: &F,
    x: &[f64; 4],
    ws: &[[f64; 4]; K],
    dt: f64,
) -> Result<([f64; 4], [[f64; 4]; K])> {
    let stage = |x: &[f64; 4], ws: &[[f64; 4]; K]| -> Result<([f64; 4], [[f64; 4]; K])> {
        let fx = field.eval(x)?;
        let jac = field.jacobian(x)?;
        let mut dw = [[0.0; 4]; K];
        for (d, w) in dw.iter_mut().zip(ws) {
            *d = matvec(&jac, w);
        }
        Ok((fx, dw))
    };
    let shift = |ws: &[[f64; 4]; K], h: f64, ks: &[[f64; 4]; K]| {
        let mut out = [[0.0; 4]; K];
        for i in 0..K {
            out[i] = axpy(&ws[i], h, &ks[i]);
        }
        out
    };
    let (k1, l1) = stage(x, ws)?;
    let (k2, l2) = stage(&axpy(x, 0.5 * dt, &k1), &shift(ws, 0.5 * dt, &l1))?;
    let (k3, l3) = stage(&axpy(x, 0.5 * dt, &k2), &shift(ws, 0.5 * dt, &l2))?;
    let (k4, l4) = stage(&axpy(x, dt, &k3), &shift(ws, dt, &l3))?;
    let h = dt / 6.0;
    let comb = |a: &[f64; 4], b: &[f64; 4], c: &[f64; 4], d: &[f64; 4], y: &[f64; 4]| {
        let mut o = [0.0; 4];
        for j in 0..4 {
            o[j] = y[j] + h * (a[j] + 2.0 * b[j] + 2.0 * c[j] + d[j]);
        }
        o
    };
    let xn = comb(&k1, &k2, &k3, &k4, x);
    let mut wn = [[0.0; 4]; K];
    for i in 0..K {
        wn[i] = comb(&l1[i], &l2[i], &l3[i], &l4[i], &ws[i]);
    }
    Ok((xn, wn))
}

/// Integrate a base point and `K` tangent vectors to `t_final`, calling
/// `observe(t, x, ws)` after every step. The observer may rescale the
/// tangent vectors in place.
pub fn variational_flow_with<F, const K: usize, O>(
    field: &F,
    x0: &[f64; 4],
    w0: [[f64; 4]; K],
    t_final: f64,
    delta: f64,
    mut observe: O,
) -> Result<([f64; 4], [[f64; 4]; K])>
where
    F: VectorField + ?Sized,
    O: FnMut(f64, &[f64; 4], &mut [[f64; 4]; K]),
{
    let (n, h, rest) = schedule(t_final, delta)?;
    let mut x = *x0;
    let mut ws = w0;
    let mut t = 0.0;
    for i in 1..=n {
        let (xn, wn) = variational_step(field, &x, &ws, h).map_err(|e| wrap_err(t, e))?;
        x = xn;
        ws = wn;
        t = i as f64 * h;
        observe(t, &x, &mut ws);
    }
    if rest != 0.0 {
        let (xn, wn) = variational_step(field, &x, &ws, rest).map_err(|e| wrap_err(t, e))?;
        x = xn;
        ws = wn;
        observe(t_final, &x, &mut ws);
    }
    Ok((x, ws))
}

/// Tangent-state propagation.
pub fn variational_flow<F: VectorField + ?Sized>(
    field: &F,
    state: &TangentState,
    t_final: f64,
    delta: f64,
) -> Result<TangentState> {
    let (x, [w]) = variational_flow_with(field, &state.base.to_array(), [state.w], t_final, delta, |_, _, _| {})?;
    Ok(TangentState {
        base: SecularState::from_array(x),
        w,
    })
}

/// Fundamental matrix of the linearised flow, stored by columns: `m[i]` is
/// the image of the i-th canonical basis vector.
pub fn fundamental_matrix<F: VectorField + ?Sized>(
    field: &F,
    x0: &[f64; 4],
    t_final: f64,
    delta: f64,
) -> Result<([f64; 4], [[f64; 4]; 4])> {
    let mut basis = [[0.0; 4]; 4];
    for (i, b) in basis.iter_mut().enumerate() {
        b[i] = 1.0;
    }
    variational_flow_with(field, x0, basis, t_final, delta, |_, _, _| {})
}

/// Δ = ‖x₀ − Φ^{−τ}(Φ^{τ}(x₀))‖ / ‖x₀‖. The backward leg retraces the
/// forward step sequence in reverse order, so a final partial step is undone
/// first.
pub fn forward_backward_error<F: VectorField + ?Sized>(field: &F, x0: &[f64; 4], tau: f64, delta: f64) -> Result<f64> {
    if tau < 0.0 {
        return Err(Error::InvalidParameter(format!("tau must be non-negative, got {tau}")));
    }
    if tau == 0.0 {
        return Ok(0.0);
    }
    let forward = flow(field, x0, tau, delta)?;
    let (n, h, rest) = schedule(tau, delta)?;
    let mut x = Compensated::new(forward);
    if rest != 0.0 {
        x.step(field, -rest).map_err(|e| wrap_err(tau, e))?;
    }
    for i in 0..n {
        x.step(field, -h).map_err(|e| wrap_err(tau - rest - i as f64 * h, e))?;
    }
    let back = x.x;
    let diff = [x0[0] - back[0], x0[1] - back[1], x0[2] - back[2], x0[3] - back[3]];
    Ok(norm(&diff) / norm(x0))
}

/// Keplerian estimate of the planet's radial period for the datum energy,
/// treating K₀ as a two-body problem with coupling 2m₀².
pub fn kepler_radial_period(model: &SecularModel) -> f64 {
    let p = model.params();
    let d = p.datum;
    let c = p.total_ang_momentum;
    let m0 = p.m0;
    let r = d.distance;
    let energy = d.radial_momentum * d.radial_momentum / (2.0 * m0) + c * c / (2.0 * m0 * r * r) - 2.0 * m0 * m0 / r;
    let k = 2.0 * m0 * m0;
    let a = k / (2.0 * energy.abs());
    2.0 * std::f64::consts::PI * (m0 * a * a * a / k).sqrt()
}

/// Maximum relative energy error along a trajectory.
pub fn max_energy_drift(model: &SecularModel, traj: &Trajectory) -> Result<f64> {
    let h0 = model.hamiltonian(&SecularState::from_array(traj.states[0]))?;
    let mut worst: f64 = 0.0;
    for x in &traj.states {
        let h = model.hamiltonian(&SecularState::from_array(*x))?;
        worst = worst.max(((h - h0) / h0).abs());
    }
    Ok(worst)
}
