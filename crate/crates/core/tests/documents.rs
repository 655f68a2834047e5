use pgospa::io::{mb_to_json, result_json, RawMb};
use pgospa::generate::random_mb;
use pgospa::{pgospa, BaseDistanceKind, Document, Error, MbDensity, MetricParams, ValidationOptions};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn random_mbs_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut r = ChaCha8Rng::seed_from_u64(1);
    for k in 0..20 {
        let mb = random_mb(&mut r, k % 5, 1 + k % 3, 0.4);
        let path = dir.path().join(format!("mb{k}.json"));
        std::fs::write(&path, mb_to_json(&mb)).unwrap();
        let back: MbDensity<f64> = Document::load(&path).unwrap().into_mb(ValidationOptions::default()).unwrap();
        assert_eq!(back, mb);
        assert_eq!(mb_to_json(&back), mb_to_json(&mb));
    }
}

#[test]
fn semantic_errors_are_not_parse_errors() {
    let bad_r = r#"{"components":[{"r":1.5,"density":{"type":"dirac","location":[0.0]}}]}"#;
    let err = Document::parse(bad_r).unwrap().into_mb::<f64>(ValidationOptions::default()).unwrap_err();
    assert!(!err.is_parse());
    assert!(err.to_string().contains("r = 1.5"));

    let not_psd = r#"{"components":[{"r":0.5,"density":{"type":"gaussian","mean":[0.0,0.0],"cov":[[1.0,2.0],[2.0,1.0]]}}]}"#;
    let err = Document::parse(not_psd).unwrap().into_mb::<f64>(ValidationOptions::default()).unwrap_err();
    assert!(matches!(err, Error::NotPsd { .. }));

    let mixed_dims = r#"{"components":[{"r":0.5,"density":{"type":"dirac","location":[0.0]}},
                         {"r":0.5,"density":{"type":"dirac","location":[0.0,1.0]}}]}"#;
    let err = Document::parse(mixed_dims).unwrap().into_mb::<f64>(ValidationOptions::default()).unwrap_err();
    assert!(matches!(err, Error::DimensionMismatch { .. }));
}

#[test]
fn mixture_weights_are_renormalized_with_warning() {
    let text = r#"{"mixture":[{"weight":0.5,"mb":{"components":[]}},{"weight":0.6,"mb":{"components":[]}}]}"#;
    let Document::Mixture(raw) = Document::parse(text).unwrap() else { panic!("not a mixture") };
    let (mix, warning) = raw.validate::<f64>(ValidationOptions::default()).unwrap();
    assert!(warning.is_some());
    let total: f64 = mix.entries().iter().map(|e| e.0).sum();
    assert!((total - 1.0).abs() < 1e-15);
}

#[test]
fn result_document_layout() {
    let raw: RawMb = serde_json::from_str(r#"{"components":[{"r":1.0,"density":{"type":"dirac","location":[0.0]}}]}"#).unwrap();
    let x: MbDensity<f64> = raw.validate(ValidationOptions::default()).unwrap();
    let y = MbDensity::from_points(&[vec![2.0]]).unwrap();
    let p = MetricParams::new(5.0, 1.0, 2.0).unwrap();
    let res = pgospa(&x, &y, &p, BaseDistanceKind::Wasserstein2).unwrap();
    let v = result_json(&res, &p, BaseDistanceKind::Wasserstein2);
    assert_eq!(v["total"], 2.0);
    assert_eq!(v["p"], 1.0);
    assert_eq!(v["decomposition"]["localization"], 2.0);
    assert_eq!(v["decomposition"]["false"], 0.0);
    assert_eq!(v["matched_pairs"], serde_json::json!([[0, 0]]));
    assert_eq!(v["near_tie"], false);
    let q = MetricParams::new(5.0, 1.0, 1.0).unwrap();
    let res = pgospa(&x, &y, &q, BaseDistanceKind::Wasserstein2).unwrap();
    assert!(result_json(&res, &q, BaseDistanceKind::Wasserstein2)["decomposition"].is_null());
}
