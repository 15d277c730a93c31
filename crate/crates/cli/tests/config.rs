use horseshoe_cli::config::{parse, RunConfig};
use horseshoe_core::Parameters;

#[test]
fn empty_config_is_the_default() {
    let l = parse("").unwrap();
    assert_eq!(l.config.parameters(), Parameters::default());
    assert_eq!(l.hash.len(), 64);
}

#[test]
fn unknown_keys_are_rejected() {
    assert!(parse("colour = 1").is_err());
    assert!(parse("[model]\nbeta = 40\nbogus = 1").is_err());
    assert!(parse("[horseshoe]\nq3 = [0.0, 0.0]").is_err());
}

#[test]
fn invalid_models_are_rejected() {
    assert!(parse("[model]\nk_max = 9").is_err());
    assert!(parse("[model.datum]\nr = 10.0").is_err());
    assert!(parse("[horseshoe]\na1 = [0.1, -0.1]").is_err());
}

#[test]
fn datum_keys_use_symbol_names() {
    let l = parse("[model.datum]\nG = -2.0\nR = 0.001\ng = 1.0\nr = 3000.0").unwrap();
    let d = l.config.parameters().datum;
    assert_eq!((d.ang_momentum, d.radial_momentum, d.pericentre, d.distance), (-2.0, 0.001, 1.0, 3000.0));
}

#[test]
fn secular_time_is_scaled() {
    let c = RunConfig::default();
    assert!((c.model_time(1.0) - 1746.57).abs() < 0.01);
    let c = parse("[fli]\ntime_unit = \"model\"").unwrap().config;
    assert_eq!(c.model_time(5000.0), 5000.0);
}

#[test]
fn shipped_configs_parse() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs");
    let reference = parse(&std::fs::read_to_string(format!("{dir}/reference.toml")).unwrap()).unwrap();
    // The reference file spells out the defaults.
    let d = RunConfig::default();
    assert_eq!(
        serde_json::to_value(&reference.config.model).unwrap(),
        serde_json::to_value(&d.model).unwrap()
    );
    assert_eq!(
        serde_json::to_value(&reference.config.flow_check).unwrap(),
        serde_json::to_value(&d.flow_check).unwrap()
    );
    parse(&std::fs::read_to_string(format!("{dir}/quick.toml")).unwrap()).unwrap();
}
