//! The ℓ-averaged interaction potential.
//!
//! Three routes to the same function: direct quadrature of the averaged
//! Newtonian terms, the ξ-integral identity in terms of t±, and the
//! truncated even-order Legendre expansion used by the dynamics. For the
//! truncated form the averages
//!
//!   A_n(G, g) = (1/2π) ∫ ρ^{n+1} P_n(p/ρ) dξ
//!
//! are trigonometric polynomials of degree n + 1 in ξ, so an N-node trapezoid
//! rule with N > n + 1 integrates them exactly. Each A_n is also a polynomial
//! in G/Λ times a cosine polynomial in 2g, which is what the cached backend
//! exploits.

use std::f64::consts::PI;

use super::kepler::{eccentricity, rho_and_projection, t_pm};
use super::params::{Parameters, PotentialBackend, MAX_ORDER};
use crate::error::{Error, Result};

/// Node count used by the exact-potential oracles.
pub const ORACLE_NODES: usize = 256;

fn check_epsilon(params: &Parameters, distance: f64) -> Result<f64> {
    if !(distance > 0.0) {
        return Err(Error::Domain(format!("distance {distance} must be positive")));
    }
    let eps = params.epsilon(distance);
    if eps >= 0.5 {
        return Err(Error::Domain(format!("beta a / r = {eps} must stay below 1/2")));
    }
    Ok(eps)
}

fn check_ang_momentum(params: &Parameters, g_mom: f64) -> Result<()> {
    if g_mom.abs() > params.lambda {
        return Err(Error::Domain(format!(
            "|G| = {} exceeds Lambda = {}",
            g_mom.abs(),
            params.lambda
        )));
    }
    Ok(())
}

/// U₊, U₋ by quadrature of the averaged Newtonian terms, with dℓ = ρ dξ.
pub fn u_pm_direct(params: &Parameters, g_mom: f64, peri: f64, dist: f64) -> Result<(f64, f64)> {
    u_pm_direct_with(params, g_mom, peri, dist, ORACLE_NODES)
}

pub fn u_pm_direct_with(params: &Parameters, g_mom: f64, peri: f64, dist: f64, nodes: usize) -> Result<(f64, f64)> {
    check_ang_momentum(params, g_mom)?;
    check_epsilon(params, dist)?;
    let e = eccentricity(params.lambda, g_mom);
    let u = g_mom / params.lambda;
    let ba = params.beta * params.semi_major_axis();
    let (cg, sg) = (peri.cos(), peri.sin());
    let (mut plus, mut minus) = (0.0, 0.0);
    for j in 0..nodes {
        let xi = 2.0 * PI * j as f64 / nodes as f64;
        let (rho, p) = rho_and_projection(e, u, xi.cos(), xi.sin(), cg, sg);
        let common = dist * dist + ba * ba * rho * rho;
        let cross = 2.0 * ba * dist * p;
        plus += rho / (common + cross).sqrt();
        minus += rho / (common - cross).sqrt();
    }
    let scale = -params.m0 * params.m0 / nodes as f64;
    Ok((scale * plus, scale * minus))
}

/// U₊, U₋ through the t± identity, regular at G = 0.
///
/// U± = −(m₀²/2πr) ∫ (1 − cos ξ) dξ / √(1 ∓ 2ε(1 − cos ξ) t± + ε²(1 − cos ξ)²)
pub fn u_pm_identity(params: &Parameters, g_mom: f64, peri: f64, dist: f64) -> Result<(f64, f64)> {
    u_pm_identity_with(params, g_mom, peri, dist, ORACLE_NODES)
}

pub fn u_pm_identity_with(params: &Parameters, g_mom: f64, peri: f64, dist: f64, nodes: usize) -> Result<(f64, f64)> {
    check_ang_momentum(params, g_mom)?;
    let eps = check_epsilon(params, dist)?;
    let (tp, tm) = t_pm(params.lambda, g_mom, peri, eps)?;
    let (mut plus, mut minus) = (0.0, 0.0);
    for j in 0..nodes {
        let xi = 2.0 * PI * j as f64 / nodes as f64;
        let w = 1.0 - xi.cos();
        let quad = 1.0 + eps * eps * w * w;
        plus += w / (quad - 2.0 * eps * w * tp).sqrt();
        minus += w / (quad + 2.0 * eps * w * tm).sqrt();
    }
    let scale = -params.m0 * params.m0 / (dist * nodes as f64);
    Ok((scale * plus, scale * minus))
}

/// Exact U = U₊ + U₋ + 2m₀²/r from the direct form.
pub fn u_exact(params: &Parameters, g_mom: f64, peri: f64, dist: f64) -> Result<f64> {
    let (p, m) = u_pm_direct(params, g_mom, peri, dist)?;
    Ok(p + m + 2.0 * params.m0 * params.m0 / dist)
}

/// One even-order average and its derivatives in (G, g).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct AverageJet {
    pub v: f64,
    pub d_mom: f64,
    pub d_peri: f64,
    pub d_mom_mom: f64,
    pub d_mom_peri: f64,
    pub d_peri_peri: f64,
}

/// How many derivatives of the averages to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum Order {
    Value,
    Gradient,
    Hessian,
}

const MAX_EVEN: usize = MAX_ORDER / 2;

#[derive(Debug, Clone)]
struct QuadratureTable {
    cos_sin: Vec<(f64, f64)>,
}

impl QuadratureTable {
    fn new(nodes: usize) -> Self {
        let cos_sin = (0..nodes)
            .map(|j| {
                let xi = 2.0 * PI * j as f64 / nodes as f64;
                (xi.cos(), xi.sin())
            })
            .collect();
        Self { cos_sin }
    }

    /// Fills `out[i]` with the jet of A_{2i+2}.
    fn eval(&self, lambda: f64, k_max: usize, g_mom: f64, peri: f64, order: Order, out: &mut [AverageJet]) {
        let n_even = k_max / 2;
        for jet in out[..n_even].iter_mut() {
            *jet = AverageJet::default();
        }
        let u = g_mom / lambda;
        let e = eccentricity(lambda, g_mom);
        let (e_g, e_gg) = if order > Order::Value {
            (-u / (lambda * e), -1.0 / (lambda * lambda * e * e * e))
        } else {
            (0.0, 0.0)
        };
        let (cg, sg) = (peri.cos(), peri.sin());

        for &(cx, sx) in &self.cos_sin {
            let (rho, p) = rho_and_projection(e, u, cx, sx, cg, sg);
            let s = rho * rho;
            // Q_n = ρ^n P_n(p/ρ) and its partials in p and S = ρ².
            let (mut q0, mut q1) = (1.0, p);
            let (mut qp0, mut qp1) = (0.0, 1.0);
            let (mut qs0, mut qs1) = (0.0, 0.0);
            let (mut qpp0, mut qpp1) = (0.0, 0.0);
            let (mut qps0, mut qps1) = (0.0, 0.0);
            let (mut qss0, mut qss1) = (0.0, 0.0);

            // geometry derivatives
            let rho_g = -e_g * cx;
            let rho_gg = -e_gg * cx;
            let p_mom = -e_g * cg - sx * sg / lambda;
            let p_peri = -(cx - e) * sg - u * sx * cg;
            let p_mom_mom = -e_gg * cg;
            let p_mom_peri = e_g * sg - sx * cg / lambda;
            let p_peri_peri = -p;
            let s_mom = 2.0 * rho * rho_g;
            let s_mom_mom = 2.0 * (rho_g * rho_g + rho * rho_gg);

            for n in 1..k_max {
                let nf = n as f64;
                let a = (2.0 * nf + 1.0) / (nf + 1.0);
                let b = nf / (nf + 1.0);
                let q2 = a * p * q1 - b * s * q0;
                let (mut qp2, mut qs2, mut qpp2, mut qps2, mut qss2) = (0.0, 0.0, 0.0, 0.0, 0.0);
                if order > Order::Value {
                    qp2 = a * (q1 + p * qp1) - b * s * qp0;
                    qs2 = a * p * qs1 - b * (q0 + s * qs0);
                }
                if order == Order::Hessian {
                    qpp2 = a * (2.0 * qp1 + p * qpp1) - b * s * qpp0;
                    qps2 = a * (qs1 + p * qps1) - b * (qp0 + s * qps0);
                    qss2 = a * p * qss1 - b * (2.0 * qs0 + s * qss0);
                }
                q0 = q1;
                q1 = q2;
                qp0 = qp1;
                qp1 = qp2;
                qs0 = qs1;
                qs1 = qs2;
                qpp0 = qpp1;
                qpp1 = qpp2;
                qps0 = qps1;
                qps1 = qps2;
                qss0 = qss1;
                qss1 = qss2;

                if (n + 1) % 2 != 0 {
                    continue;
                }
                let jet = &mut out[(n + 1) / 2 - 1];
                jet.v += rho * q1;
                if order == Order::Value {
                    continue;
                }
                let chain_mom = qp1 * p_mom + qs1 * s_mom;
                jet.d_mom += rho_g * q1 + rho * chain_mom;
                jet.d_peri += rho * qp1 * p_peri;
                if order == Order::Hessian {
                    jet.d_mom_mom += rho_gg * q1
                        + 2.0 * rho_g * chain_mom
                        + rho
                            * (qpp1 * p_mom * p_mom
                                + 2.0 * qps1 * p_mom * s_mom
                                + qss1 * s_mom * s_mom
                                + qp1 * p_mom_mom
                                + qs1 * s_mom_mom);
                    jet.d_mom_peri += rho_g * qp1 * p_peri
                        + rho * (qpp1 * p_mom * p_peri + qps1 * p_peri * s_mom + qp1 * p_mom_peri);
                    jet.d_peri_peri += rho * (qpp1 * p_peri * p_peri + qp1 * p_peri_peri);
                }
            }
        }
        let inv = 1.0 / self.cos_sin.len() as f64;
        for jet in out[..n_even].iter_mut() {
            jet.v *= inv;
            jet.d_mom *= inv;
            jet.d_peri *= inv;
            jet.d_mom_mom *= inv;
            jet.d_mom_peri *= inv;
            jet.d_peri_peri *= inv;
        }
    }
}

/// Chebyshev (in G/Λ) × cos(2hg) coefficient tables for every even order.
#[derive(Debug, Clone)]
struct CachedTable {
    degree: usize,
    /// coeffs[i][h] = Chebyshev coefficients of the cos(2hg) harmonic of A_{2i+2}
    coeffs: Vec<Vec<Vec<f64>>>,
}

impl CachedTable {
    fn build(quad: &QuadratureTable, lambda: f64, k_max: usize) -> Self {
        let n_even = k_max / 2;
        let degree = k_max + 2;
        let n_cheb = degree + 1;
        let n_peri = 2 * (k_max + 2);
        let mut samples = vec![vec![vec![0.0; n_peri]; n_cheb]; n_even];
        let mut buf = [AverageJet::default(); MAX_EVEN];
        for ic in 0..n_cheb {
            let x = (PI * (ic as f64 + 0.5) / n_cheb as f64).cos();
            for jp in 0..n_peri {
                let peri = PI * jp as f64 / n_peri as f64;
                quad.eval(lambda, k_max, lambda * x, peri, Order::Value, &mut buf);
                for i in 0..n_even {
                    samples[i][ic][jp] = buf[i].v;
                }
            }
        }
        let mut coeffs = Vec::with_capacity(n_even);
        for (i, order_samples) in samples.iter().enumerate() {
            let harmonics = i + 2; // n/2 + 1 for n = 2i + 2
            let mut per_h = Vec::with_capacity(harmonics);
            for h in 0..harmonics {
                // harmonic amplitude at each Chebyshev node
                let amp: Vec<f64> = order_samples
                    .iter()
                    .map(|row| {
                        let s: f64 = row
                            .iter()
                            .enumerate()
                            .map(|(jp, v)| v * (2.0 * PI * (h * jp) as f64 / n_peri as f64).cos())
                            .sum();
                        s * if h == 0 { 1.0 } else { 2.0 } / n_peri as f64
                    })
                    .collect();
                let cheb: Vec<f64> = (0..n_cheb)
                    .map(|k| {
                        let s: f64 = amp
                            .iter()
                            .enumerate()
                            .map(|(ic, a)| a * (PI * k as f64 * (ic as f64 + 0.5) / n_cheb as f64).cos())
                            .sum();
                        s * if k == 0 { 1.0 } else { 2.0 } / n_cheb as f64
                    })
                    .collect();
                per_h.push(cheb);
            }
            coeffs.push(per_h);
        }
        Self { degree, coeffs }
    }

    fn eval(&self, lambda: f64, k_max: usize, g_mom: f64, peri: f64, order: Order, out: &mut [AverageJet]) {
        let x = g_mom / lambda;
        let mut t = [0.0; MAX_ORDER + 3];
        let mut dt = [0.0; MAX_ORDER + 3];
        let mut ddt = [0.0; MAX_ORDER + 3];
        t[0] = 1.0;
        t[1] = x;
        dt[1] = 1.0;
        for j in 1..self.degree {
            t[j + 1] = 2.0 * x * t[j] - t[j - 1];
            dt[j + 1] = 2.0 * t[j] + 2.0 * x * dt[j] - dt[j - 1];
            ddt[j + 1] = 4.0 * dt[j] + 2.0 * x * ddt[j] - ddt[j - 1];
        }
        let n_terms = self.degree + 1;
        let (c2, s2) = ((2.0 * peri).cos(), (2.0 * peri).sin());
        let inv_l = 1.0 / lambda;
        for (i, per_h) in self.coeffs.iter().enumerate().take(k_max / 2) {
            let mut jet = AverageJet::default();
            let (mut ch, mut sh) = (1.0, 0.0);
            for (h, cheb) in per_h.iter().enumerate() {
                let a: f64 = cheb.iter().zip(&t[..n_terms]).map(|(c, t)| c * t).sum();
                let hf = 2.0 * h as f64;
                jet.v += a * ch;
                if order > Order::Value {
                    let da: f64 = cheb.iter().zip(&dt[..n_terms]).map(|(c, t)| c * t).sum::<f64>() * inv_l;
                    jet.d_mom += da * ch;
                    jet.d_peri -= hf * a * sh;
                    if order == Order::Hessian {
                        let dda: f64 =
                            cheb.iter().zip(&ddt[..n_terms]).map(|(c, t)| c * t).sum::<f64>() * inv_l * inv_l;
                        jet.d_mom_mom += dda * ch;
                        jet.d_mom_peri -= hf * da * sh;
                        jet.d_peri_peri -= hf * hf * a * ch;
                    }
                }
                let next_c = ch * c2 - sh * s2;
                sh = sh * c2 + ch * s2;
                ch = next_c;
            }
            out[i] = jet;
        }
    }
}

#[derive(Debug, Clone)]
enum Backend {
    Quadrature,
    Cached(CachedTable),
}

/// Value, gradient and Hessian of a scalar in the variables (G, g, r).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Jet3 {
    pub value: f64,
    pub grad: [f64; 3],
    pub hess: [[f64; 3]; 3],
}

/// Even-order truncation U_k of the averaged potential.
#[derive(Debug, Clone)]
pub struct TruncatedPotential {
    m0: f64,
    lambda: f64,
    beta_a: f64,
    k_max: usize,
    quad: QuadratureTable,
    backend: Backend,
}

impl TruncatedPotential {
    pub fn new(params: &Parameters) -> Result<Self> {
        params.validate()?;
        let quad = QuadratureTable::new(params.quad_nodes);
        let backend = match params.backend {
            PotentialBackend::Quadrature => Backend::Quadrature,
            PotentialBackend::Cached => Backend::Cached(CachedTable::build(&quad, params.lambda, params.k_max)),
        };
        Ok(Self {
            m0: params.m0,
            lambda: params.lambda,
            beta_a: params.beta * params.semi_major_axis(),
            k_max: params.k_max,
            quad,
            backend,
        })
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    fn averages(&self, g_mom: f64, peri: f64, order: Order, out: &mut [AverageJet]) {
        match &self.backend {
            Backend::Quadrature => self.quad.eval(self.lambda, self.k_max, g_mom, peri, order, out),
            Backend::Cached(table) => table.eval(self.lambda, self.k_max, g_mom, peri, order, out),
        }
    }

    /// A_n(G, g) for n = 2, 4, ..., k_max.
    pub fn averages_at(&self, g_mom: f64, peri: f64) -> Vec<f64> {
        let mut buf = [AverageJet::default(); MAX_EVEN];
        self.averages(g_mom, peri, Order::Value, &mut buf);
        buf[..self.k_max / 2].iter().map(|j| j.v).collect()
    }

    fn check(&self, g_mom: f64, dist: f64, order: Order) -> Result<()> {
        if !(dist > 0.0) || self.beta_a / dist >= 0.5 {
            return Err(Error::Domain(format!("beta a / r = {} must stay below 1/2", self.beta_a / dist)));
        }
        let limit = if order > Order::Value { self.lambda - 1e-9 } else { self.lambda };
        if !(g_mom.abs() <= limit) {
            return Err(Error::Domain(format!("|G| = {} exceeds {limit}", g_mom.abs())));
        }
        Ok(())
    }

    pub(crate) fn jet(&self, g_mom: f64, peri: f64, dist: f64, order: Order) -> Result<Jet3> {
        self.check(g_mom, dist, order)?;
        let mut buf = [AverageJet::default(); MAX_EVEN];
        self.averages(g_mom, peri, order, &mut buf);
        let eps = self.beta_a / dist;
        let eps2 = eps * eps;
        let base = -2.0 * self.m0 * self.m0 / dist;
        let mut eps_n = 1.0;
        let mut out = Jet3::default();
        let inv_r = 1.0 / dist;
        for (i, a) in buf[..self.k_max / 2].iter().enumerate() {
            eps_n *= eps2;
            let n = (2 * i + 2) as f64;
            let c = base * eps_n;
            let c_r = -(n + 1.0) * inv_r * c;
            out.value += c * a.v;
            if order == Order::Value {
                continue;
            }
            out.grad[0] += c * a.d_mom;
            out.grad[1] += c * a.d_peri;
            out.grad[2] += c_r * a.v;
            if order == Order::Hessian {
                let c_rr = (n + 1.0) * (n + 2.0) * inv_r * inv_r * c;
                out.hess[0][0] += c * a.d_mom_mom;
                out.hess[0][1] += c * a.d_mom_peri;
                out.hess[1][1] += c * a.d_peri_peri;
                out.hess[0][2] += c_r * a.d_mom;
                out.hess[1][2] += c_r * a.d_peri;
                out.hess[2][2] += c_rr * a.v;
            }
        }
        out.hess[1][0] = out.hess[0][1];
        out.hess[2][0] = out.hess[0][2];
        out.hess[2][1] = out.hess[1][2];
        Ok(out)
    }

    /// U_k(G, g, r).
    pub fn value(&self, g_mom: f64, peri: f64, dist: f64) -> Result<f64> {
        Ok(self.jet(g_mom, peri, dist, Order::Value)?.value)
    }

    /// U_k and its gradient in (G, g, r).
    pub fn gradient(&self, g_mom: f64, peri: f64, dist: f64) -> Result<(f64, [f64; 3])> {
        let j = self.jet(g_mom, peri, dist, Order::Gradient)?;
        Ok((j.value, j.grad))
    }

    pub fn hessian(&self, g_mom: f64, peri: f64, dist: f64) -> Result<Jet3> {
        self.jet(g_mom, peri, dist, Order::Hessian)
    }
}

/// Free-function form of U_k for one-off evaluations.
pub fn u_truncated(params: &Parameters, g_mom: f64, peri: f64, dist: f64) -> Result<f64> {
    TruncatedPotential::new(params)?.value(g_mom, peri, dist)
}
