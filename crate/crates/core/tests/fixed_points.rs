use std::f64::consts::PI;

use horseshoe_core::fixed_points::*;
use horseshoe_core::model::wrap_angle;
use horseshoe_core::poincare::Mesh;
use horseshoe_core::{Error, Result};

struct Linear(Mat2, [f64; 2]);

impl PlaneMap for Linear {
    fn apply(&self, z: [f64; 2]) -> Result<[f64; 2]> {
        let m = &self.0;
        let c = self.1;
        let d = [z[0] - c[0], z[1] - c[1]];
        Ok([c[0] + m[0][0] * d[0] + m[0][1] * d[1], c[1] + m[1][0] * d[0] + m[1][1] * d[1]])
    }
}

/// Area-preserving Hénon map (x, y) ↦ (1 − a x² + y, b x) with b = −1.
struct Henon(f64);

impl PlaneMap for Henon {
    fn apply(&self, z: [f64; 2]) -> Result<[f64; 2]> {
        Ok([1.0 - self.0 * z[0] * z[0] + z[1], -z[0]])
    }
}

/// Standard map on the cylinder, angle period 2π.
struct Standard(f64);

impl PlaneMap for Standard {
    fn apply(&self, z: [f64; 2]) -> Result<[f64; 2]> {
        let p = z[1] + self.0 * z[0].sin();
        Ok([wrap_angle(z[0] + p, 2.0 * PI), p])
    }
    fn angle_period(&self) -> Option<f64> {
        Some(2.0 * PI)
    }
}

#[test]
fn linear_saddle_is_found_and_classified() {
    let map = Linear([[2.0, 1.0], [1.0, 1.0]], [0.3, -0.2]);
    let fp = newton_fixed_point(&map, [0.0, 0.0], &NewtonSettings::default()).unwrap();
    assert!((fp.point[0] - 0.3).abs() < 1e-9 && (fp.point[1] + 0.2).abs() < 1e-9);
    assert_eq!(fp.stability(), Stability::Hyperbolic);
    let phi = 0.5 * (3.0 + 5f64.sqrt());
    assert!((fp.linearization.eigenvalues[0].0 - phi).abs() < 1e-6);
    assert!((fp.linearization.eigenvalues[1].0 - 1.0 / phi).abs() < 1e-6);
    let (vu, vs) = fp.linearization.directions.unwrap();
    let expect_u = [1.0 / (1.0 + (phi - 2.0).powi(2)).sqrt(), (phi - 2.0) / (1.0 + (phi - 2.0).powi(2)).sqrt()];
    assert!((vu[0] - expect_u[0]).abs() < 1e-6 && (vu[1] - expect_u[1]).abs() < 1e-6);
    assert!((vu[0] * vs[0] + vu[1] * vs[1]).abs() < 1e-6);
}

#[test]
fn rotation_is_elliptic() {
    let (c, s) = (0.3f64.cos(), 0.3f64.sin());
    let lin = classify([[c, -s], [s, c]]);
    assert_eq!(lin.stability, Stability::Elliptic);
    assert!((lin.eigenvalues[0].1.abs() - s).abs() < 1e-15);
}

#[test]
fn near_identity_is_marginal() {
    assert_eq!(classify([[1.0, 0.3], [0.0, 1.0]]).stability, Stability::Marginal);
    assert_eq!(classify([[1.00001, 0.0], [0.0, 0.99999]]).stability, Stability::Marginal);
}

#[test]
fn henon_fixed_points() {
    // x* = (−1 ± √(1 + a))/a; the minus branch is a saddle.
    let a = 2.0;
    let map = Henon(a);
    let x_minus = (-1.0 - (1.0 + a).sqrt()) / a;
    let fp = newton_fixed_point(&map, [x_minus + 0.05, -x_minus - 0.05], &NewtonSettings::default()).unwrap();
    assert!((fp.point[0] - x_minus).abs() < 1e-10);
    assert!((fp.point[1] + x_minus).abs() < 1e-10);
    assert_eq!(fp.stability(), Stability::Hyperbolic);
    let j = fp.linearization.jacobian;
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    assert!((det - 1.0).abs() < 1e-7);
}

#[test]
fn standard_map_survey_finds_both_fixed_points() {
    let map = Standard(0.5);
    let mesh = Mesh {
        peri_min: 0.1,
        peri_max: 6.2,
        n_peri: 12,
        mom_min: -0.5,
        mom_max: 0.5,
        n_mom: 5,
    };
    let fps = survey(&map, &mesh, &SurveySettings::default());
    assert_eq!(fps.len(), 2, "{fps:?}");
    let saddle = fps.iter().find(|f| f.stability() == Stability::Hyperbolic).unwrap();
    let centre = fps.iter().find(|f| f.stability() == Stability::Elliptic).unwrap();
    assert!(saddle.point[0].abs() < 1e-9 || (saddle.point[0] - 2.0 * PI).abs() < 1e-9);
    assert!((centre.point[0] - PI).abs() < 1e-9);
}

#[test]
fn singular_newton_is_reported() {
    let map = Linear([[1.0, 1.0], [0.0, 1.0]], [0.0, 0.0]);
    let err = newton_fixed_point(&map, [0.1, 0.1], &NewtonSettings::default()).unwrap_err();
    assert!(matches!(err, Error::Newton(_)));
}
