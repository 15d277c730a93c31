use horseshoe_core::model::{jacobi_mass_constants, kappa_for_beta, Parameters};

#[test]
fn mass_constants_direct_substitution() {
    let (b, bb, s) = jacobi_mass_constants(1.0, 1.0).unwrap();
    assert!((b - 2.0 / 3.0).abs() < 1e-15);
    assert!((bb - 2.0 / 3.0).abs() < 1e-15);
    assert!((s - 4.0 / 3.0).abs() < 1e-15);

    let p = Parameters::default();
    let (_, _, sigma) = jacobi_mass_constants(1.0, kappa_for_beta(p.beta)).unwrap();
    assert!((p.time_scale() - sigma).abs() < 1e-12 * sigma);
    assert!((p.time_scale() - 1746.57).abs() < 0.01);

    let (b, bb, s) = jacobi_mass_constants(1.0, 2.0).unwrap();
    assert_eq!((b, bb, s), (2.0, 2.0, 8.0));
}

#[test]
fn mass_constants_invert_beta_40() {
    let kappa = 10.0 + 140f64.sqrt();
    assert!((kappa_for_beta(40.0) - kappa).abs() < 1e-12);
    let (b, bb, _) = jacobi_mass_constants(1.0, kappa).unwrap();
    assert!((b - 40.0).abs() < 1e-12);
    assert!((bb / b - 1.0).abs() < 1e-15);
}

#[test]
fn mass_constants_ratio_is_mu() {
    for &(mu, kappa) in &[(0.3, 5.0), (2.0, 11.0), (1.0, 0.1)] {
        let (b, bb, _) = jacobi_mass_constants(mu, kappa).unwrap();
        assert!((bb / b - mu).abs() < 1e-14);
    }
    assert!(jacobi_mass_constants(0.0, 1.0).is_err());
}

#[test]
fn default_parameters_are_valid() {
    let p = Parameters::default();
    p.validate().unwrap();
    assert!((p.semi_major_axis() - 3.099f64.powi(2)).abs() < 1e-15);
    assert!((p.epsilon(p.datum.distance) - 40.0 * 9.603801 / 3132.069).abs() < 1e-12);
    assert!((p.circular_radius() - 2857.4532045).abs() < 1e-6);
}

#[test]
fn validation_rejects_bad_inputs() {
    let mut p = Parameters::default();
    p.k_max = 9;
    assert!(p.validate().is_err());
    let mut p = Parameters::default();
    p.datum.distance = 500.0;
    assert!(p.validate().is_err());
    let mut p = Parameters::default();
    p.beta = -1.0;
    assert!(p.validate().is_err());
    let mut p = Parameters::default();
    p.quad_nodes = 8;
    assert!(p.validate().is_err());
}
