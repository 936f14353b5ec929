use humbilical::family::{Ambient, CaseId, FamilyParams, FamilySpec, MeanCurvatureLabel, RatioLaw};
use humbilical::ode::FirstOrderLaw;
use humbilical::Error;
use proptest::prelude::*;

fn case(id: &str) -> CaseId {
    id.parse().unwrap()
}

#[test]
fn catalog_has_twenty_six_rows_in_order() {
    let all = CaseId::all();
    assert_eq!(all.len(), 26);
    let count = |a| all.iter().filter(|c| c.ambient == a).count();
    assert_eq!(count(Ambient::ComplexProjective), 5);
    assert_eq!(count(Ambient::Flat), 6);
    assert_eq!(count(Ambient::ComplexHyperbolic), 15);
    assert_eq!(all[0].to_string(), "CP.1");
    assert_eq!(all[5].to_string(), "C.1");
    assert_eq!(all[25].to_string(), "CH.15");
}

#[test]
fn c4_row() {
    let info = case("C.4").info();
    assert_eq!(info.ratio, RatioLaw::SevenMinusNThirds);
    assert_eq!(info.ratio.symbol(), "(7-n)/3");
    assert_eq!(info.restriction, Some("n != 7"));
}

#[test]
fn ch8_requires_negative_c() {
    let info = case("CH.8").info();
    assert_eq!(info.c_sign, Some(-1));
    assert!(info.params.contains("c<0"));
    let bad = FamilySpec::with_params(case("CH.8"), 3, FamilyParams { c: Some(1.0), ..Default::default() });
    assert!(matches!(bad.validate(), Err(Error::Usage(_))));
    let good = FamilySpec::with_params(case("CH.8"), 3, FamilyParams { c: Some(-0.5), ..Default::default() });
    assert!(good.validate().is_ok());
}

#[test]
fn ch3_requires_positive_c() {
    let bad = FamilySpec::with_params(case("CH.3"), 3, FamilyParams { c: Some(-1.0), ..Default::default() });
    assert!(matches!(bad.validate(), Err(Error::Usage(_))));
}

#[test]
fn labels_follow_the_catalog() {
    use MeanCurvatureLabel::*;
    for (id, label) in [("CP.1", Constant), ("CP.2", NonConstant), ("C.2", Constant), ("C.3", NonConstant), ("C.4", Unstated), ("CH.1", Constant), ("CH.12", NonConstant)] {
        assert_eq!(case(id).info().mean_curvature, label, "{id}");
    }
}

#[test]
fn case_ids_parse() {
    assert_eq!(case("cp.2"), case("CP.2"));
    assert_eq!(case(" CH.15 ").to_string(), "CH.15");
    for bad in ["CP.6", "C.0", "CH.16", "X.1", "CP", "CP.x", ""] {
        assert!(matches!(bad.parse::<CaseId>(), Err(Error::Usage(_))), "{bad:?}");
    }
}

#[test]
fn dimension_gates() {
    for (id, n) in [("C.4", 7), ("CP.3", 7), ("CH.13", 7), ("C.5", 2), ("CP.4", 2), ("CH.14", 2)] {
        assert!(matches!(FamilySpec::new(case(id), n).validate(), Err(Error::Usage(_))), "{id} n={n}");
    }
    assert!(FamilySpec::new(case("C.4"), 6).validate().is_ok());
    assert!(matches!(FamilySpec::new(case("C.1"), 1).validate(), Err(Error::Usage(_))));
}

#[test]
fn expected_ratios() {
    let with_mu = |id: &str, mu: f64| FamilySpec::with_params(case(id), 3, FamilyParams { mu: Some(mu), ..Default::default() });
    assert_eq!(with_mu("CP.1", 2.0).expected_ratio().unwrap(), Some(0.75));
    assert_eq!(with_mu("CH.7", 0.5).expected_ratio().unwrap(), Some(5.0));
    assert_eq!(FamilySpec::new(case("CH.1"), 3).expected_ratio().unwrap(), Some(2.0));
    assert_eq!(FamilySpec::new(case("CH.14"), 3).expected_ratio().unwrap(), Some(-2.0));
    assert_eq!(FamilySpec::new(case("C.4"), 10).expected_ratio().unwrap(), Some(-1.0));
    assert_eq!(FamilySpec::new(case("CP.5"), 3).expected_ratio().unwrap(), None);
}

#[test]
fn parameter_constraints() {
    let spec = |id: &str, p: FamilyParams| FamilySpec::with_params(case(id), 3, p);
    assert!(spec("C.1", FamilyParams { a: Some(-1.0), ..Default::default() }).validate().is_err());
    assert!(spec("CH.2", FamilyParams { mu: Some(0.5), ..Default::default() }).validate().is_err());
    assert!(spec("CH.7", FamilyParams { mu: Some(1.5), ..Default::default() }).validate().is_err());
    assert!(spec("C.2", FamilyParams { span: Some((0.1, 1.0)), ..Default::default() }).validate().is_err());
    assert!(spec("C.6", FamilyParams { curve: Some("spiral".into()), ..Default::default() }).validate().is_err());
}

#[test]
fn spec_json_round_trip() {
    let spec = FamilySpec::with_params(case("CP.2"), 4, FamilyParams { c: Some(10.0), mu0: Some(1.0), ..Default::default() });
    let text = serde_json::to_string(&spec).unwrap();
    assert_eq!(text, r#"{"case":"CP.2","n":4,"params":{"c":10.0,"mu0":1.0}}"#);
    assert_eq!(serde_json::from_str::<FamilySpec>(&text).unwrap(), spec);
    assert!(serde_json::from_str::<FamilySpec>(r#"{"case":"CP.9","n":3,"params":{}}"#).is_err());
    assert!(serde_json::from_str::<FamilySpec>(r#"{"case":"CP.2","n":3,"params":{"q":1}}"#).is_err());
}

#[test]
fn pinned_turning_point_defaults() {
    let p = FamilySpec::new(case("CP.2"), 3).resolved().unwrap();
    assert_eq!((p.c, p.mu0), (Some(10.0), Some(1.0)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Default first-order data start strictly inside the band Φ > 0 wherever a case applies.
    #[test]
    fn first_order_defaults_start_in_the_band(index in 0usize..26, n in 2usize..9) {
        let id = CaseId::all()[index];
        let spec = FamilySpec::new(id, n);
        prop_assume!(spec.validate().is_ok());
        let p = spec.resolved().unwrap();
        if let (Some(c), Some(mu0), Some(ratio)) = (p.c, p.mu0, spec.expected_ratio().unwrap()) {
            let law = FirstOrderLaw::new(ratio, id.eps(), c).unwrap();
            prop_assert!(law.phi(mu0) > 0.0, "{id} n={n}: Φ(μ₀) = {}", law.phi(mu0));
            if let Some(sign) = id.info().c_sign {
                prop_assert_eq!(c.signum() as i8, sign);
            }
        }
    }

    #[test]
    fn display_and_parse_round_trip(index in 0usize..26) {
        let id = CaseId::all()[index];
        prop_assert_eq!(id.to_string().parse::<CaseId>().unwrap(), id);
        prop_assert_eq!(id.to_string().to_lowercase().parse::<CaseId>().unwrap(), id);
    }
}
