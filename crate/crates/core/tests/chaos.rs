use horseshoe_core::chaos::*;
use horseshoe_core::integrator::{norm, variational_flow_with};
use horseshoe_core::model::VectorField;
use horseshoe_core::poincare::Mesh;
use horseshoe_core::Result;

struct Zero;
impl VectorField for Zero {
    fn eval(&self, _: &[f64; 4]) -> Result<[f64; 4]> {
        Ok([0.0; 4])
    }
    fn jacobian(&self, _: &[f64; 4]) -> Result<[[f64; 4]; 4]> {
        Ok([[0.0; 4]; 4])
    }
}

/// ẋ = x, ẏ = −y in the first two slots, the rest frozen.
struct Saddle;
impl VectorField for Saddle {
    fn eval(&self, x: &[f64; 4]) -> Result<[f64; 4]> {
        Ok([x[0], -x[1], 0.0, 0.0])
    }
    fn jacobian(&self, _: &[f64; 4]) -> Result<[[f64; 4]; 4]> {
        let mut j = [[0.0; 4]; 4];
        j[0][0] = 1.0;
        j[1][1] = -1.0;
        Ok(j)
    }
}

#[test]
fn zero_field_has_zero_fli() {
    let mut s = ChaosSettings::new(50.0, 0.1);
    s.curve_stride = 10;
    let (v, curve, t, err) = fli_from_state(&Zero, &[1.0, 2.0, 3.0, 4.0], &s);
    assert!(err.is_none());
    assert_eq!(v, 0.0);
    assert!(curve.iter().all(|c| c.1 == 0.0));
    assert!((t - 50.0).abs() < 1e-9);
}

#[test]
fn saddle_fli_grows_linearly() {
    let mut s = ChaosSettings::new(20.0, 0.01);
    s.curve_stride = 100;
    let (v, curve, _, _) = fli_from_state(&Saddle, &[0.0; 4], &s);
    // Only e₁ grows: FLI = t/4 exactly up to the RK4 error.
    assert!((v - 5.0).abs() < 1e-6, "{v}");
    assert!(curve.windows(2).all(|w| w[1].1 >= w[0].1));
    let (chi, _) = mle_from_state(&Saddle, &[0.0; 4], &s).unwrap();
    assert!((chi - 1.0).abs() < 0.1, "{chi}");
}

#[test]
fn renormalised_mle_matches_plain_growth() {
    let s = ChaosSettings::new(20.0, 0.01);
    let (chi, _) = mle_from_state(&Saddle, &[0.0; 4], &s).unwrap();
    let (_, [w]) = variational_flow_with(&Saddle, &[0.0; 4], [[0.5; 4]], 20.0, 0.01, |_, _, _| {}).unwrap();
    let plain = norm(&w).ln() / 20.0;
    assert!((chi - plain).abs() < 1e-6 * plain.abs(), "{chi} {plain}");
}

#[test]
fn zones_of_a_synthetic_map() {
    let mesh = Mesh {
        peri_min: 0.0,
        peri_max: 3.0,
        n_peri: 4,
        mom_min: -3.0,
        mom_max: 3.0,
        n_mom: 7,
    };
    // Rows bottom to top: mixed, mixed, regular, regular, regular, chaotic, chaotic.
    let rows: [[f64; 4]; 7] = [
        [1.0, 9.0, 1.0, 9.0],
        [9.0, 1.0, 1.0, 1.0],
        [1.0; 4],
        [1.0; 4],
        [1.0; 4],
        [9.0, 9.0, 9.0, 1.0],
        [9.0; 4],
    ];
    let nodes: Vec<MapNode> = mesh
        .nodes()
        .zip(rows.iter().flatten())
        .map(|(seed, &fli)| MapNode {
            seed,
            fli,
            flag: NodeFlag::Ok,
        })
        .collect();
    let z = zone_structure(&nodes, &mesh, 5.0);
    assert_eq!(z.band, Some((-1.0, 1.0)));
    assert!((z.upper_chaotic_fraction - 0.875).abs() < 1e-12);
    assert_eq!((z.lower_regular_nodes, z.lower_chaotic_nodes), (5, 3));
    assert!(z.three_zones);
    let flat: Vec<MapNode> = nodes.iter().map(|n| MapNode { fli: 1.0, ..*n }).collect();
    assert!(!zone_structure(&flat, &mesh, 5.0).three_zones);
}

#[test]
fn lyapunov_time_sentinel() {
    assert!(lyapunov_time(-1e-3, 1e-3).is_infinite());
    assert!(lyapunov_time(1e-3, 2e-3).is_infinite());
    assert!((lyapunov_time(2e-3, 2.1e-3) - 500.0).abs() < 1e-9);
}

#[test]
fn mle_series_samples_doubling_horizons() {
    let s = ChaosSettings::new(16.0, 0.01);
    let (series, err) = mle_series_from_state(&Saddle, &[0.0; 4], &s, 4);
    assert!(err.is_none());
    let times: Vec<f64> = series.iter().map(|p| p.0).collect();
    for (t, want) in times.iter().zip([2.0, 4.0, 8.0, 16.0]) {
        assert!((t - want).abs() < 0.011, "{times:?}");
    }
    // χ(t) = 1 + log(‖w₀ projected‖)/t → 1.
    assert!(series.windows(2).all(|w| (w[1].1 - 1.0).abs() < (w[0].1 - 1.0).abs()));
    let (chi, half) = mle_from_state(&Saddle, &[0.0; 4], &s).unwrap();
    assert!((series[3].1 - chi).abs() < 1e-12 && (series[2].1 - half).abs() < 1e-3);
}

/// x = t until it passes 1.5, then failure.
struct Escape;
impl VectorField for Escape {
    fn eval(&self, x: &[f64; 4]) -> Result<[f64; 4]> {
        if x[0] > 1.5 {
            return Err(horseshoe_core::Error::Domain("escaped".into()));
        }
        Ok([1.0, -x[1], 0.0, 0.0])
    }
    fn jacobian(&self, _: &[f64; 4]) -> Result<[[f64; 4]; 4]> {
        let mut j = [[0.0; 4]; 4];
        j[1][1] = -1.0;
        Ok(j)
    }
}

#[test]
fn mle_series_keeps_horizons_before_failure() {
    let s = ChaosSettings::new(8.0, 0.01);
    let (series, err) = mle_series_from_state(&Escape, &[0.0; 4], &s, 4);
    assert!(err.is_some());
    // Fails near t = 1.5: only the t = 1 horizon is recorded.
    assert_eq!(series.len(), 1, "{series:?}");
    assert!((series[0].0 - 1.0).abs() < 0.011);
}

#[test]
fn calibrated_threshold_uses_the_weakest_chaotic_reference() {
    assert_eq!(calibrated_threshold(&[7.0, 12.0, 33.0]), Some(9.5));
    assert_eq!(calibrated_threshold(&[7.0, 33.0, 12.0]), Some(9.5));
    assert_eq!(calibrated_threshold(&[7.0]), None);
    assert_eq!(calibrated_threshold(&[]), None);
}
