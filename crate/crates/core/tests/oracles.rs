use num_complex::Complex64;
use oplab::lab::{run, ExperimentConfig, ExperimentId, Model};
use oplab::measure::parse_measure;
use oplab::sum::Precision;

fn model(text: &str, degree: usize) -> Model {
    Model::new(&parse_measure(text).unwrap(), 4096, degree, Precision::High).unwrap()
}

#[test]
fn legendre_and_chebyshev_recurrences() {
    let Model::Real { coefficients: c, .. } = model("legendre", 60) else { panic!() };
    for k in 1..=60 {
        let kf = k as f64;
        assert!((c.a[k - 1] - kf / (4.0 * kf * kf - 1.0).sqrt()).abs() < 1e-12, "a_{k}");
        assert!(c.b[k - 1].abs() < 1e-13);
    }
    let Model::Real { coefficients: c, .. } = model("chebyshev", 60) else { panic!() };
    assert!((c.a[0] - 0.5f64.sqrt()).abs() < 1e-12);
    for k in 2..=60 {
        assert!((c.a[k - 1] - 0.5).abs() < 1e-12, "a_{k}");
    }
}

#[test]
fn jacobi_one_one_recurrence() {
    let Model::Real { coefficients: c, .. } = model("jacobi(1,1)", 40) else { panic!() };
    for k in 1..=40 {
        let kf = k as f64;
        let exact = (kf * (kf + 2.0) / ((2.0 * kf + 1.0) * (2.0 * kf + 3.0))).sqrt();
        assert!((c.a[k - 1] - exact).abs() < 1e-11, "a_{k}");
    }
}

#[test]
fn bernstein_szego_has_one_verblunsky_coefficient() {
    let Model::Circle { coefficients: v, .. } = model("bernstein_szego(0.5)", 32) else { panic!() };
    assert!((v.alpha[0] - Complex64::new(0.5, 0.0)).norm() < 1e-12);
    for a in &v.alpha[1..] {
        assert!(a.norm() < 1e-12);
    }
    let Model::Circle { coefficients: v, .. } = model("lebesgue_circle", 32) else { panic!() };
    assert!(v.alpha.iter().all(|a| a.norm() < 1e-13));
}

#[test]
fn reports_repeat_exactly() {
    let cfg = ExperimentConfig { seed: 7, ..Default::default() };
    for id in [ExperimentId::Prop2_6, ExperimentId::Eq2_9, ExperimentId::Thm7_2] {
        let a = serde_json::to_string(&run(id, &cfg).unwrap()).unwrap();
        let b = serde_json::to_string(&run(id, &cfg).unwrap()).unwrap();
        assert_eq!(a, b, "{id}");
    }
}

#[test]
fn reports_embed_the_resolved_config() {
    let r = run(ExperimentId::Eq2_17, &ExperimentConfig::default()).unwrap();
    let cfg: ExperimentConfig = serde_json::from_value(r.config.clone()).unwrap();
    assert_eq!(cfg.sweep, vec![5, 10, 20, 40]);
    assert_eq!(cfg.measures.len(), 3);
    assert!(r.recompute());
}
