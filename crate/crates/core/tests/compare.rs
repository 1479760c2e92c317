use mkdv_shock::oracle::{
    compare_envelope, compare_slice, compare_wavelength, elliptic_window, synthetic_slice, CompareConfig, FieldSlice,
    GridSpec,
};
use mkdv_shock::scattering::ShockParams;
use mkdv_shock::wavefield::{WaveConfig, Wavefield};

fn field(c: f64) -> Wavefield {
    Wavefield::new(ShockParams::new(c).unwrap(), WaveConfig::default()).unwrap()
}

fn strict() -> CompareConfig {
    CompareConfig { envelope_median: 0.01, envelope_max: 0.01, wavelength_median: 0.01, ..CompareConfig::default() }
}

#[test]
fn synthetic_slices_close_the_loop() {
    let f = field(1.0);
    let x = GridSpec::default().x();
    for t in [20.0, 40.0] {
        let slice = synthetic_slice(&f, t, x.clone()).unwrap();
        let report = compare_slice(&slice, &f, &strict()).unwrap();
        assert!(report.pass, "t = {t}: {:?}", report.failures);
        assert!(report.envelope.entries.len() > 40);
        assert!(!report.wavelength.insufficient);
        assert!(report.wavelength.max.unwrap() <= 0.01, "t = {t}: {:?}", report.wavelength.max);
        assert_eq!(report.plateau_mean, Some(1.0));
    }
}

#[test]
fn closed_loop_at_other_height() {
    let f = field(1.5);
    let x: Vec<f64> = (0..8192).map(|i| -256.0 + i as f64 / 16.0).collect();
    let slice = synthetic_slice(&f, 10.0, x).unwrap();
    let report = compare_slice(&slice, &f, &strict()).unwrap();
    assert!(report.pass, "{:?}", report.failures);
}

#[test]
fn plateau_only_slice_reduces_to_mean_check() {
    let f = field(1.0);
    let x: Vec<f64> = (0..1600).map(|i| -500.0 + i as f64 / 8.0).collect();
    let slice = synthetic_slice(&f, 40.0, x).unwrap();
    assert!(elliptic_window(&slice, &f, &CompareConfig::default()).is_none());
    let report = compare_slice(&slice, &f, &CompareConfig::default()).unwrap();
    assert!(report.envelope.empty);
    assert!(report.wavelength.insufficient);
    assert_eq!(report.plateau_mean, Some(1.0));
    assert!(report.pass);
}

#[test]
fn shifted_plateau_fails_mean_check() {
    let f = field(1.0);
    let x: Vec<f64> = (0..1600).map(|i| -500.0 + i as f64 / 8.0).collect();
    let slice = FieldSlice { t: 40.0, q: vec![1.2; x.len()], x };
    let report = compare_slice(&slice, &f, &CompareConfig::default()).unwrap();
    assert!(!report.pass);
    assert_eq!(report.failures.len(), 1);
}

#[test]
fn early_slices_are_flagged() {
    let f = field(1.0);
    let x: Vec<f64> = (0..4096).map(|i| -64.0 + i as f64 / 32.0).collect();
    let slice = synthetic_slice(&f, 5.0, x).unwrap();
    let env = compare_envelope(&slice, &f, &CompareConfig::default()).unwrap();
    assert!(env.early && !env.empty);
}

#[test]
fn spacings_grow_towards_the_soliton_edge() {
    let f = field(1.0);
    let x = GridSpec::default().x();
    let slice = synthetic_slice(&f, 40.0, x).unwrap();
    let report = compare_wavelength(&slice, &f, &CompareConfig::default()).unwrap();
    let spacings: Vec<f64> = report.entries.iter().map(|e| e.spacing).collect();
    let n = spacings.len();
    assert!(n > 20);
    assert!(spacings[n - 1] > 2.0 * spacings[0], "{spacings:?}");
    let growing = spacings.windows(2).filter(|w| w[1] > w[0]).count();
    assert!(growing as f64 >= 0.9 * (n - 1) as f64);
}
