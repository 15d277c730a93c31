use std::f64::consts::PI;

use horseshoe_core::model::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn params() -> Parameters {
    Parameters::default()
}

fn quadrature_params() -> Parameters {
    Parameters {
        backend: PotentialBackend::Quadrature,
        ..Parameters::default()
    }
}

/// (G, g, r) with ε ≤ 0.3 and |G| ≤ Λ − 0.05.
fn random_points(n: usize, seed: u64) -> Vec<(f64, f64, f64)> {
    let p = params();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            (
                rng.gen_range(-(p.lambda - 0.05)..(p.lambda - 0.05)),
                rng.gen_range(0.0..2.0 * PI),
                rng.gen_range(1300.0..6000.0),
            )
        })
        .collect()
}

fn random_states(n: usize, seed: u64) -> Vec<SecularState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    random_points(n, seed)
        .into_iter()
        .map(|(gm, g, r)| SecularState::new(gm, rng.gen_range(-0.01..0.01), g, r))
        .collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn direct_and_identity_forms_agree() {
    let p = params();
    for (gm, g, r) in random_points(100, 1) {
        let (dp, dm) = u_pm_direct(&p, gm, g, r).unwrap();
        let (ip, im) = u_pm_identity(&p, gm, g, r).unwrap();
        assert!(rel(ip, dp) < 1e-12 && rel(im, dm) < 1e-12, "({gm}, {g}, {r}): {dp} {ip} / {dm} {im}");
    }
    let d = p.datum;
    let (dp, dm) = u_pm_direct(&p, d.ang_momentum, d.pericentre, d.distance).unwrap();
    let (ip, im) = u_pm_identity(&p, d.ang_momentum, d.pericentre, d.distance).unwrap();
    assert!(rel(ip, dp) < 1e-12 && rel(im, dm) < 1e-12);
}

#[test]
fn oracle_quadrature_is_converged() {
    let p = params();
    for (gm, g, r) in random_points(20, 2) {
        let a = u_pm_direct_with(&p, gm, g, r, ORACLE_NODES).unwrap();
        let b = u_pm_direct_with(&p, gm, g, r, 2 * ORACLE_NODES).unwrap();
        assert!(rel(a.0, b.0) < 1e-13 && rel(a.1, b.1) < 1e-13);
        let a = u_pm_identity_with(&p, gm, g, r, ORACLE_NODES).unwrap();
        let b = u_pm_identity_with(&p, gm, g, r, 2 * ORACLE_NODES).unwrap();
        assert!(rel(a.0, b.0) < 1e-13 && rel(a.1, b.1) < 1e-13);
    }
}

#[test]
fn weak_coupling_limit() {
    let p = Parameters {
        beta: 40.0e-8,
        ..params()
    };
    let r = 3000.0;
    for f in [u_pm_direct, u_pm_identity] {
        let (up, um) = f(&p, 1.3, 0.7, r).unwrap();
        assert!(rel(up, -1.0 / r) < 1e-8 && rel(um, -1.0 / r) < 1e-8);
    }
}

#[test]
fn shifting_pericentre_by_pi_swaps_the_terms() {
    let p = params();
    for (gm, g, r) in random_points(10, 3) {
        let (up, um) = u_pm_direct(&p, gm, g, r).unwrap();
        let (sp, sm) = u_pm_direct(&p, gm, g + PI, r).unwrap();
        assert!(rel(sp, um) < 1e-13 && rel(sm, up) < 1e-13);
    }
}

#[test]
fn identity_is_regular_at_zero_momentum() {
    let p = params();
    let r = p.beta * p.semi_major_axis() / 0.12;
    for g in [0.0, 0.4, 1.5, 3.0] {
        let (up, um) = u_pm_identity(&p, 0.0, g, r).unwrap();
        let (dp, dm) = u_pm_direct(&p, 0.0, g, r).unwrap();
        assert!(up.is_finite() && um.is_finite());
        assert!(rel(up, dp) < 1e-12 && rel(um, dm) < 1e-12);
    }
}

#[test]
fn domain_violations_are_rejected() {
    let p = params();
    let r_bad = p.beta * p.semi_major_axis() / 0.5;
    assert!(u_pm_direct(&p, 1.0, 0.3, r_bad).is_err());
    assert!(u_pm_identity(&p, 1.0, 0.3, r_bad).is_err());
    assert!(u_truncated(&p, 1.0, 0.3, r_bad).is_err());
    assert!(u_pm_direct(&p, 3.2, 0.3, 3000.0).is_err());
    let m = SecularModel::new(p.clone()).unwrap();
    assert!(m.vector_field(&SecularState::new(p.lambda, 0.0, 0.3, 3000.0)).is_err());
}

#[test]
fn truncation_error_at_the_datum() {
    let p = params();
    let d = p.datum;
    let exact = u_exact(&p, d.ang_momentum, d.pericentre, d.distance).unwrap();
    let trunc = u_truncated(&p, d.ang_momentum, d.pericentre, d.distance).unwrap();
    let err = rel(trunc, exact);
    assert!(err < 1e-7, "{err}");
    // 50-digit evaluation of the averaged Newtonian terms (512 nodes).
    assert!(rel(exact, 2.482_299_527_265_682_6e-6) < 1e-9, "{exact:e}");
    let (up, um) = u_pm_direct(&p, d.ang_momentum, d.pericentre, d.distance).unwrap();
    assert!(rel(up, -3.220_953_989_019_684e-4) < 1e-13);
    assert!(rel(um, -3.139_778_378_632_294_6e-4) < 1e-13);
}

#[test]
fn truncation_error_respects_the_tail_bound() {
    let p = params();
    for (gm, g, r) in random_points(30, 4) {
        let eps = p.epsilon(r);
        let e = eccentricity(p.lambda, gm);
        let bound = 2.0 * eps.powi(p.k_max as i32 + 1) * (2.0 / r) * (1.0 + e).powi(p.k_max as i32 + 2);
        let err = (u_truncated(&p, gm, g, r).unwrap() - u_exact(&p, gm, g, r).unwrap()).abs();
        assert!(err <= bound, "({gm}, {g}, {r}): {err:e} > {bound:e}");
    }
}

#[test]
fn truncated_potential_symmetries() {
    let p = params();
    let u = TruncatedPotential::new(&p).unwrap();
    for (gm, g, r) in random_points(20, 5) {
        let base = u.value(gm, g, r).unwrap();
        assert!(rel(u.value(gm, g + PI, r).unwrap(), base) < 1e-13);
        assert!(rel(u.value(gm, -g, r).unwrap(), base) < 1e-13);
    }
}

#[test]
fn truncated_potential_has_only_even_cosine_harmonics() {
    let p = params();
    let u = TruncatedPotential::new(&p).unwrap();
    let n = 64;
    let (gm, r) = (1.7, 2500.0);
    let vals: Vec<f64> = (0..n).map(|j| u.value(gm, 2.0 * PI * j as f64 / n as f64, r).unwrap()).collect();
    let scale = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    for k in 1..n / 2 {
        let (mut c, mut s) = (0.0, 0.0);
        for (j, v) in vals.iter().enumerate() {
            let th = 2.0 * PI * (k * j) as f64 / n as f64;
            c += v * th.cos();
            s += v * th.sin();
        }
        let (c, s) = (2.0 * c / n as f64, 2.0 * s / n as f64);
        assert!(s.abs() < 1e-13 * scale, "sine harmonic {k}: {s:e}");
        if k % 2 == 1 || k > p.k_max {
            assert!(c.abs() < 1e-13 * scale, "cosine harmonic {k}: {c:e}");
        }
    }
}

#[test]
fn cached_and_quadrature_backends_agree() {
    let cached = TruncatedPotential::new(&params()).unwrap();
    let quad = TruncatedPotential::new(&quadrature_params()).unwrap();
    for (gm, g, r) in random_points(50, 6) {
        let a = cached.hessian(gm, g, r).unwrap();
        let b = quad.hessian(gm, g, r).unwrap();
        assert!(rel(a.value, b.value) < 1e-10);
        let gscale = b.grad.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for i in 0..3 {
            assert!((a.grad[i] - b.grad[i]).abs() < 1e-10 * gscale, "grad {i}");
        }
        let hscale = b.hess.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
        for i in 0..3 {
            for j in 0..3 {
                assert!((a.hess[i][j] - b.hess[i][j]).abs() < 1e-10 * hscale, "hess {i}{j}");
            }
        }
    }
}

#[test]
fn more_nodes_do_not_change_the_truncated_potential() {
    let a = TruncatedPotential::new(&quadrature_params()).unwrap();
    let b = TruncatedPotential::new(&Parameters {
        quad_nodes: 64,
        ..quadrature_params()
    })
    .unwrap();
    for (gm, g, r) in random_points(20, 7) {
        assert!(rel(a.value(gm, g, r).unwrap(), b.value(gm, g, r).unwrap()) < 1e-13);
    }
}

#[test]
fn averaged_hamiltonian_is_the_mean_of_the_full_one() {
    let p = params();
    let (_, _, sigma) = jacobi_mass_constants(1.0, kappa_for_beta(p.beta)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let nodes = 8192;
    // Plain trapezoid in ℓ converges slowly as e → 1, so the sample keeps e ≤ 0.95.
    let lim = p.lambda * (1.0f64 - 0.95 * 0.95).sqrt();
    let points = random_points(60, 8).into_iter().filter(|q| q.0.abs() >= lim).take(20);
    for (gm, g, r) in points {
        let radial = rng.gen_range(-0.01..0.01);
        let mean: f64 = (0..nodes)
            .map(|j| full_hamiltonian(&p, sigma, p.lambda, gm, radial, 2.0 * PI * j as f64 / nodes as f64, g, r).unwrap())
            .sum::<f64>()
            / nodes as f64;
        let avg = averaged_hamiltonian(&p, sigma, gm, radial, g, r).unwrap();
        assert!(rel(mean, avg) < 1e-12, "{mean} {avg}");
    }
}

#[test]
fn full_hamiltonian_limits_and_symmetry() {
    let p = params();
    let sigma = 8.0;
    let weak = Parameters {
        beta: 1e-12,
        ..params()
    };
    let r = 3000.0;
    let kepler = -1.0 / (2.0 * p.lambda * p.lambda);
    let kin = sigma / 2.0 * (0.0 + (1.0 - p.total_ang_momentum).powi(2) / (r * r));
    let h = full_hamiltonian(&weak, sigma, p.lambda, 1.0, 0.0, 0.4, 0.2, r).unwrap();
    assert!(rel(h - kepler - kin, -2.0 * sigma / r) < 1e-10);
    for (gm, g, r) in random_points(10, 9) {
        let a = full_hamiltonian(&p, sigma, p.lambda, gm, 0.003, 0.8, g, r).unwrap();
        let b = full_hamiltonian(&p, sigma, p.lambda, gm, 0.003, -0.8, -g, r).unwrap();
        assert!(rel(a, b) < 1e-13);
    }
}

#[test]
fn datum_energy() {
    let m = SecularModel::new(params()).unwrap();
    let h = m.h_star().unwrap();
    assert!(rel(h, -3.176_678_695_106_431_7e-4) < 1e-12, "{h:e}");
    let q = SecularModel::new(quadrature_params()).unwrap();
    assert!(rel(q.h_star().unwrap(), h) < 1e-12);
}

#[test]
fn hamiltonian_is_even_in_radial_momentum() {
    let m = SecularModel::new(params()).unwrap();
    for s in random_states(20, 10) {
        let flipped = SecularState::new(s.ang_momentum, -s.radial_momentum, s.pericentre, s.distance);
        assert_eq!(m.hamiltonian(&s).unwrap(), m.hamiltonian(&flipped).unwrap());
    }
}

#[test]
fn circular_radius_minimises_the_keplerian_part() {
    let p = params();
    let c = p.total_ang_momentum;
    let k0 = |r: f64| c * c / (2.0 * r * r) - 2.0 / r;
    let (mut lo, mut hi) = (1000.0, 10000.0);
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if k0(m1) < k0(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let r0 = p.circular_radius();
    assert!((0.5 * (lo + hi) - r0).abs() < 1e-6 * r0);
    assert!((r0 - 2857.453_204_5).abs() < 1e-6);
}

/// Fourth-order central difference.
fn d5(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
}

fn with(s: &SecularState, i: usize, v: f64) -> SecularState {
    let mut a = s.to_array();
    a[i] = v;
    SecularState::from_array(a)
}

#[test]
fn vector_field_matches_finite_differences() {
    let m = SecularModel::new(params()).unwrap();
    for s in random_states(50, 11) {
        let x = s.to_array();
        let h = |i: usize| 1e-3 * x[i].abs().max(1.0);
        let dh = |i: usize| d5(|v| m.hamiltonian(&with(&s, i, v)).unwrap(), x[i], h(i));
        let fd = [-dh(2), -dh(3), dh(0), dh(1)];
        let vf = m.vector_field(&s).unwrap();
        for i in 0..4 {
            assert!(rel(vf[i], fd[i]) < 1e-8, "component {i} at {s:?}: {} vs {}", vf[i], fd[i]);
        }
    }
}

#[test]
fn kinetic_flow_keeps_momentum_fixed() {
    let m = SecularModel::new(params()).unwrap().kinetic_only();
    for s in random_states(10, 12) {
        assert_eq!(m.vector_field(&s).unwrap()[0], 0.0);
    }
}

#[test]
fn radial_velocity_at_the_datum() {
    let p = params();
    let m = SecularModel::new(p.clone()).unwrap();
    assert_eq!(m.vector_field(&p.datum).unwrap()[3], -0.0039);
}

#[test]
fn jacobian_matches_finite_differences_and_is_traceless() {
    let m = SecularModel::new(params()).unwrap();
    for s in random_states(50, 13) {
        let x = s.to_array();
        let jac = m.vf_jacobian(&s).unwrap();
        let norm = jac.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
        let trace = jac[0][0] + jac[1][1] + jac[2][2] + jac[3][3];
        assert!(trace.abs() < 1e-10 * norm, "trace {trace:e}");
        assert_eq!(jac[3][1], 1.0 / m.params().m0);
        for j in 0..4 {
            let h = 1e-3 * x[j].abs().max(1.0);
            for i in 0..4 {
                let fd = d5(|v| m.vector_field(&with(&s, j, v)).unwrap()[i], x[j], h);
                let scale = jac[i].iter().fold(0.0f64, |a, v| a.max(v.abs()));
                assert!(
                    (jac[i][j] - fd).abs() <= 1e-6 * fd.abs().max(1e-3 * scale),
                    "J[{i}][{j}] at {s:?}: {} vs {fd}",
                    jac[i][j]
                );
            }
        }
    }
}

#[test]
fn reduced_hamiltonian_symmetries() {
    let m = SecularModel::new(params()).unwrap();
    for (gm, g, _) in random_points(20, 14) {
        let f = m.reduced_f(gm, g).unwrap();
        assert!(rel(m.reduced_f(gm, g + PI).unwrap(), f) < 1e-13);
        assert!(rel(m.reduced_f(gm, -g).unwrap(), f) < 1e-13);
    }
}
