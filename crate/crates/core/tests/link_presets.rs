//! Shipped presets and the JSON link configuration format.

use pulseforge::modem::{simulate_link, LinkSpec, MatchedSpec, NoiseLaw, ShapingSpec};
use pulseforge::presets::{self, Preset};

#[test]
fn every_preset_meets_its_expectations() {
    for p in presets::all() {
        let v = p.verify(None).unwrap();
        let failed: Vec<_> = v.checks.iter().filter(|c| !c.pass).collect();
        assert!(failed.is_empty(), "{}: {failed:?}", p.name);
    }
}

#[test]
fn presets_survive_json() {
    let text = serde_json::to_string_pretty(&presets::all()).unwrap();
    let back: Vec<Preset> = serde_json::from_str(&text).unwrap();
    assert_eq!(back, presets::all());
}

#[test]
fn minimal_config_uses_defaults() {
    let json = r#"{
        "k_up": 12, "symbols": 4, "pulses": 50, "snr_db": 0.0,
        "noise": "gaussian", "seed": 1,
        "shaping": {"kind": "slepian", "fc": 0.16},
        "matched": {"kind": "same"}
    }"#;
    let spec: LinkSpec = serde_json::from_str(json).unwrap();
    assert_eq!(spec.rho, 2.0);
    assert_eq!(spec.f_tx, 0.25);
    assert_eq!(spec.sub_channels, 0);
    assert!((spec.effective_spacing().unwrap() - 0.32).abs() < 1e-15);
    let r = simulate_link(&spec.build().unwrap()).unwrap();
    assert_eq!(r.rx_points.len(), 50);
    assert!((r.delta_sharp - 2.5).abs() < 1e-2);
}

#[test]
fn unknown_noise_law_is_rejected() {
    let json = r#"{
        "k_up": 12, "symbols": 4, "pulses": 5, "snr_db": 0.0,
        "noise": "pink", "seed": 1,
        "shaping": {"kind": "rectangular"}, "matched": {"kind": "same"}
    }"#;
    assert!(serde_json::from_str::<LinkSpec>(json).is_err());
}

#[test]
fn invalid_parameters_fail_to_build() {
    let base: LinkSpec = serde_json::from_str(
        r#"{"k_up": 12, "symbols": 4, "pulses": 5, "snr_db": 0.0, "noise": "none", "seed": 1,
            "shaping": {"kind": "rectangular"}, "matched": {"kind": "same"}}"#,
    )
    .unwrap();
    let mut s = base.clone();
    s.symbols = 1;
    assert!(s.build().is_err());
    let mut s = base.clone();
    s.f_tx = 0.5;
    assert!(s.build().is_err());
    let mut s = base.clone();
    s.pulses = 0;
    assert!(s.build().is_err());
    let mut s = base;
    s.shaping = ShapingSpec::Slepian { fc: 0.6 };
    assert!(s.build().is_err());
}

#[test]
fn wise_shaping_and_rectangular_receiver_run() {
    let mut spec = match presets::example2().task {
        presets::PresetTask::Link(s) => s,
        _ => unreachable!(),
    };
    spec.pulses = 200;
    spec.noise = NoiseLaw::None;
    spec.shaping = ShapingSpec::Wise {
        fc: 0.16,
        f_lo: 0.08,
        f_hi: 0.2,
        w_pass: 1.0,
        w_stop: 100.0,
        q: 12,
    };
    spec.matched = MatchedSpec::Same;
    let r = simulate_link(&spec.build().unwrap()).unwrap();
    assert_eq!(r.errors, 0);
    spec.matched = MatchedSpec::Rectangular;
    let r = simulate_link(&spec.build().unwrap()).unwrap();
    assert_eq!(r.errors, 0);
}
