use std::f64::consts::PI;

use horseshoe_core::model::FGrid;
use horseshoe_core::{Parameters, SecularModel};

fn grid(f: impl Fn(f64, f64) -> f64, n: usize) -> FGrid {
    let mut g = FGrid {
        n_peri: n,
        n_mom: n,
        lambda: 1.0,
        values: vec![0.0; n * n],
    };
    for j in 0..n {
        for i in 0..n {
            let [peri, mom] = g.node(i, j);
            g.values[j * n + i] = f(peri, mom);
        }
    }
    g
}

#[test]
fn pendulum_has_island_and_bands() {
    // Pendulum in (2g, G): island centred on g = 0, rotation for |G| large.
    let t = grid(|g, m| 0.5 * m * m - 0.05 * (2.0 * g).cos() + 0.3 * m, 40).topology();
    assert_eq!(t.islands.len(), 1, "{:?}", t.islands);
    let g = t.islands[0].point[0];
    assert!(g < 0.1 || g > PI - 0.1);
    assert!(!t.islands[0].maximum);
    assert!(t.rotational_levels.is_some());
    assert!(t.mixed());
}

#[test]
fn pure_shear_has_no_island() {
    let t = grid(|_, m| m, 20).topology();
    assert!(t.islands.is_empty());
    assert!(t.rotational_levels.is_some());
}

#[test]
fn pure_well_has_no_band() {
    let t = grid(|g, m| m * m + (2.0 * g).cos(), 20).topology();
    assert!(t.rotational_levels.is_none());
}

#[test]
fn grid_layout() {
    let m = SecularModel::new(Parameters::default()).unwrap();
    let g = FGrid::sample(&m, 8, 6).unwrap();
    assert_eq!(g.values.len(), 48);
    let [peri, mom] = g.node(3, 2);
    assert!((peri - PI * 3.5 / 8.0).abs() < 1e-15);
    assert!((mom - g.lambda * (-1.0 + 5.0 / 6.0)).abs() < 1e-15);
    assert_eq!(g.at(3, 2), m.reduced_f(mom, peri).unwrap());
    assert!(FGrid::sample(&m, 2, 6).is_err());
}

#[test]
fn secular_portrait_topology() {
    // F has a maximum near (π/2, G ≈ −2.5) and a minimum at g = 0, G ≈ 1.4,
    // separated by rotational levels.
    let m = SecularModel::new(Parameters::default()).unwrap();
    let t = FGrid::sample(&m, 40, 40).unwrap().topology();
    assert_eq!(t.islands.len(), 2, "{:?}", t.islands);
    let max = t.islands.iter().find(|e| e.maximum).unwrap();
    assert!((max.point[0] - PI / 2.0).abs() < 0.1 && (max.point[1] + 2.5).abs() < 0.1, "{max:?}");
    let min = t.islands.iter().find(|e| !e.maximum).unwrap();
    assert!(min.point[0] < 0.1 && (min.point[1] - 1.45).abs() < 0.1, "{min:?}");
    let (lo, hi) = t.rotational_levels.unwrap();
    assert!(lo < hi && min.value < lo && max.value > hi);
}
