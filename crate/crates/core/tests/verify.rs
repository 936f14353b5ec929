use humbilical::family::{build_family, CaseId, FamilyParams, FamilySpec};
use humbilical::kernel::Jet3;
use humbilical::verify::{verify_family, verify_immersion, Geometry, GridSpec, VerificationReport, VerifyOptions};
use humbilical::Error;
use proptest::prelude::*;

fn case(id: &str) -> CaseId {
    id.parse().unwrap()
}

fn run(id: &str, n: usize, params: FamilyParams) -> VerificationReport {
    verify_family(&FamilySpec::with_params(case(id), n, params), &VerifyOptions::default()).unwrap()
}

fn assert_all_pass(report: &VerificationReport) {
    let failed: Vec<String> = report
        .failed()
        .map(|c| format!("{} = {:e} (tol {:e})", c.name, c.max_residual, c.tolerance))
        .collect();
    assert!(failed.is_empty(), "{}: {failed:?}", report.family);
}

#[test]
fn circle_extensor_passes_with_constant_mean_curvature() {
    let report = run("C.2", 3, FamilyParams { a: Some(2.0), ..Default::default() });
    assert_all_pass(&report);
    assert!(report.mean_curvature.constant);
    assert_eq!(report.mean_curvature.matches_label, Some(true));
    let (lo, hi) = report.extraction.ratio_range.unwrap();
    assert!((lo - 1.0).abs() < 1e-8 && (hi - 1.0).abs() < 1e-8);
}

#[test]
fn oscillating_projective_family_passes() {
    let report = run("CP.2", 3, FamilyParams { c: Some(10.0), ..Default::default() });
    assert_all_pass(&report);
    assert!(!report.mean_curvature.constant);
    assert_eq!(report.mean_curvature.matches_label, Some(true));
    assert!(report.events.iter().filter(|e| matches!(e.kind, humbilical::ode::EventKind::TurningPoint { .. })).count() >= 1);
}

#[test]
fn flat_hyperbolic_family_passes_with_ratio_two() {
    let report = run("CH.1", 3, FamilyParams::default());
    assert_all_pass(&report);
    assert!(report.mean_curvature.constant);
    let (lo, hi) = report.extraction.ratio_range.unwrap();
    assert!((lo - 2.0).abs() < 1e-8 && (hi - 2.0).abs() < 1e-8);
}

#[test]
fn normal_bundle_family_passes() {
    let report = run("C.3", 3, FamilyParams { a: Some(1.5), ..Default::default() });
    assert_all_pass(&report);
    assert!(report.check("tbe_raw").unwrap().max_residual < 1e-6);
}

#[test]
fn cylinder_raw_bitension_vanishes() {
    let report = run("C.1", 3, FamilyParams::default());
    assert_all_pass(&report);
    assert!(report.check("tbe_raw").unwrap().max_residual < 1e-9);
}

#[test]
fn whitney_control_fails_both_paths() {
    let report = run("C.6", 3, FamilyParams { curve: Some("whitney".into()), ..Default::default() });
    let raw = report.check("tbe_raw").unwrap();
    assert!(!raw.pass);
    assert!(raw.relative.unwrap() > 1e-2, "{raw:?}");
    let structural = report.check("tbe_structural").unwrap();
    assert!(structural.max_residual > 10.0 * structural.tolerance);
    // everything that does not involve the bitension still holds
    for c in report.failed() {
        assert!(matches!(c.name.as_str(), "tbe_raw" | "tbe_structural" | "residual_tbe3"), "{}", c.name);
    }
}

#[test]
fn perturbation_is_detected() {
    let spec = FamilySpec::with_params(case("C.3"), 3, FamilyParams { a: Some(1.5), ..Default::default() });
    let mut imm = build_family(&spec).unwrap();
    imm.chart = imm
        .chart
        .perturbed(2, |x: &[Jet3]| (&(&x[0] * &x[0]) + &(&x[1] * &x[1])).scale(-1.0).exp().scale(1e-3))
        .unwrap();
    let report = verify_immersion(&imm, &spec, spec.resolved().unwrap(), Some(0.0), &VerifyOptions::default()).unwrap();
    let pattern = report.check("pattern").unwrap();
    assert!(pattern.max_residual > 1e-4, "{pattern:?}");
    assert!(!report.passed());
}

#[test]
fn raw_bitension_is_flat_only() {
    let imm = build_family(&FamilySpec::new(case("CP.1"), 3)).unwrap();
    let geom = Geometry::at(&imm.chart, &imm.chart.random_grid(1, 1)[0]).unwrap();
    let ext = geom.extract(None).unwrap();
    assert!(matches!(geom.raw_bitension(&ext.frame), Err(Error::NotSupported(_))));
    assert!(matches!(geom.gauss_residual(&ext.frame), Err(Error::NotSupported(_))));
}

#[test]
fn minimal_profiles_use_the_fallback_frame() {
    let report = run("CH.14", 3, FamilyParams::default());
    assert_all_pass(&report);
    assert_eq!(report.extraction.minimal_points, report.points);
    // H ≡ 0 is constant, against the non-constant label
    assert_eq!(report.mean_curvature.matches_label, Some(false));
}

#[test]
fn parallel_and_serial_reports_agree() {
    let spec = FamilySpec::new(case("CH.6"), 3);
    let par = verify_family(&spec, &VerifyOptions::default()).unwrap();
    let ser = verify_family(&spec, &VerifyOptions { parallel: false, ..Default::default() }).unwrap();
    assert_eq!(par, ser);
    assert_eq!(serde_json::to_string(&par).unwrap(), serde_json::to_string(&ser).unwrap());
}

#[test]
fn random_grids_are_seeded() {
    let spec = FamilySpec::new(case("C.2"), 3);
    let opts = |seed| VerifyOptions { grid: GridSpec::Random(30), seed, parallel: true };
    let a = verify_family(&spec, &opts(7)).unwrap();
    assert_eq!(a, verify_family(&spec, &opts(7)).unwrap());
    assert_eq!(a.points, 30);
    assert!(a.grid.contains("seed 7"));
}

#[test]
fn grid_parsing() {
    assert_eq!(GridSpec::parse("21x9x9").unwrap(), GridSpec::Product(vec![21, 9, 9]));
    assert_eq!(GridSpec::parse("random:200").unwrap(), GridSpec::Random(200));
    assert_eq!(GridSpec::parse("default").unwrap(), GridSpec::Default);
    for bad in ["", "0x3", "3x", "random:", "rand:3"] {
        assert!(GridSpec::parse(bad).is_err(), "{bad:?}");
    }
}

#[test]
fn wrong_grid_dimension_is_a_usage_error() {
    let spec = FamilySpec::new(case("C.2"), 3);
    let err = verify_family(&spec, &VerifyOptions { grid: GridSpec::Product(vec![5, 5]), ..Default::default() }).unwrap_err();
    assert!(matches!(err, Error::Usage(_)));
}

#[test]
fn reports_record_rungs_and_schema() {
    let report = run("CP.2", 3, FamilyParams::default());
    assert_eq!(report.schema_version, 1);
    let value = serde_json::to_value(&report).unwrap();
    for key in ["family", "ambient", "n", "params", "checks", "events", "versions"] {
        assert!(value.get(key).is_some(), "{key}");
    }
    // ODE provenance moves jet-based checks to the third-derivative rung
    assert_eq!(report.check("pattern").unwrap().tolerance, 1e-5);
    assert_eq!(report.check("lagrangian").unwrap().tolerance, 1e-8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Circle extensors of any radius pass everything, with λ = μ = 1/a.
    #[test]
    fn circle_extensors(a in 0.3f64..4.0) {
        let report = verify_family(
            &FamilySpec::with_params(case("C.2"), 3, FamilyParams { a: Some(a), ..Default::default() }),
            &VerifyOptions { grid: GridSpec::Random(20), seed: 1, parallel: true },
        ).unwrap();
        prop_assert!(report.passed());
        let (lo, hi) = report.extraction.lambda_range;
        prop_assert!((lo - 1.0 / a).abs() < 1e-8 && (hi - 1.0 / a).abs() < 1e-8);
    }

    /// Constant-μ projective lifts have ratio 1 − μ⁻².
    #[test]
    fn constant_projective_lifts(mu in 0.4f64..3.0) {
        let report = verify_family(
            &FamilySpec::with_params(case("CP.1"), 3, FamilyParams { mu: Some(mu), ..Default::default() }),
            &VerifyOptions { grid: GridSpec::Random(20), seed: 2, parallel: true },
        ).unwrap();
        prop_assert!(report.passed());
        let (lo, hi) = report.extraction.ratio_range.unwrap();
        let want = 1.0 - mu.powi(-2);
        prop_assert!((lo - want).abs() < 1e-8 && (hi - want).abs() < 1e-8);
    }
}
