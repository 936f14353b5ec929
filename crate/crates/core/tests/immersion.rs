use humbilical::curves::{curvature_and_argument, reparametrize_unit_speed, PlaneCurve};
use humbilical::family::{build_extensor_ratio_family, build_family, CaseId, FamilyParams, FamilySpec};
use humbilical::immersion::{build_complex_extensor, build_cylinder, sphere_chart};
use humbilical::kernel::{fd_derivative, CJet, Jet3};
use humbilical::verify::{verify_immersion, Geometry, VerifyOptions};
use humbilical::Error;
use num_complex::Complex64;
use proptest::prelude::*;

fn case(id: &str) -> CaseId {
    id.parse().unwrap()
}

fn jets(values: &[f64]) -> Vec<Jet3> {
    (0..values.len()).map(|i| Jet3::variable(values.len(), i, values[i])).collect()
}

#[test]
fn cylinder_at_origin() {
    let imm = build_cylinder(1.0, 2).unwrap();
    let x = imm.chart.position(&[0.0, 0.0]).unwrap();
    assert_eq!(x.len(), 4);
    for (got, want) in x.iter().zip([1.0, 0.0, 0.0, 0.0]) {
        assert!((got - want).abs() < 1e-15, "{x:?}");
    }
}

#[test]
fn cylinder_shape() {
    let imm = build_cylinder(1.0, 2).unwrap();
    let geom = Geometry::at(&imm.chart, &[0.4, -0.7]).unwrap();
    let ext = geom.extract(None).unwrap();
    assert!((ext.pattern.lambda - 1.0).abs() < 1e-12);
    assert!(ext.pattern.mu.abs() < 1e-12);
    assert!((ext.pattern.mean_curvature - 0.5).abs() < 1e-12);
}

#[test]
fn cylinder_rejects_bad_radius() {
    assert!(matches!(build_cylinder(0.0, 3), Err(Error::Usage(_))));
}

#[test]
fn sphere_chart_base_point() {
    let y = sphere_chart(&jets(&[0.0])).unwrap();
    assert!((y[0].value() - 1.0).abs() < 1e-15 && y[1].value().abs() < 1e-15);
}

#[test]
fn sphere_chart_jets_match_finite_differences() {
    let p = [0.7, -2.1];
    let y = sphere_chart(&jets(&p)).unwrap();
    for comp in 0..3 {
        let f = |q: &[f64]| -> humbilical::Result<f64> { Ok(sphere_chart(&jets(q))?[comp].value()) };
        for dir in 0..2 {
            let fd = fd_derivative(&f, &p, dir, 1, 1e-4).unwrap();
            assert!((y[comp].first(dir) - fd).abs() < 1e-7, "component {comp}, direction {dir}");
        }
    }
}

#[test]
fn sphere_chart_pole_is_rejected() {
    assert!(matches!(sphere_chart(&jets(&[0.0, 1.0])), Err(Error::DegenerateChart(_))));
}

#[test]
fn extensor_metric_is_block_diagonal() {
    let curve = PlaneCurve::vertical_line(1.5);
    let imm = build_complex_extensor(&curve, 3).unwrap();
    let p = [0.3, 1.1, 0.4];
    let geom = Geometry::at(&imm.chart, &p).unwrap();
    let f2 = curve.value(p[0]).unwrap().norm_sqr();
    // round metric on S² in polar angles: diag(1, sin²u₁)
    let want = [[1.0, 0.0, 0.0], [0.0, f2, 0.0], [0.0, 0.0, f2 * p[1].sin().powi(2)]];
    for a in 0..3 {
        for b in 0..3 {
            assert!((geom.metric[a][b].value() - want[a][b]).abs() < 1e-12, "g[{a}][{b}]");
        }
    }
}

#[test]
fn circle_extensor_has_ratio_one() {
    let imm = build_complex_extensor(&PlaneCurve::circle(2.0).with_domain((-1.0, 1.0)), 3).unwrap();
    let ext = Geometry::at(&imm.chart, &[0.2, 1.0, 0.5]).unwrap().extract(None).unwrap();
    assert!((ext.pattern.lambda - 0.5).abs() < 1e-10);
    assert!((ext.pattern.mu - 0.5).abs() < 1e-10);
}

#[test]
fn line_extensor_structure_at_closest_point() {
    let r = 1.7;
    let imm = build_complex_extensor(&PlaneCurve::vertical_line(r), 3).unwrap();
    let ext = Geometry::at(&imm.chart, &[0.0, 1.2, 0.3]).unwrap().extract(None).unwrap();
    assert!(ext.pattern.lambda.abs() < 1e-12);
    assert!((ext.pattern.mu - 1.0 / r).abs() < 1e-12);
}

#[test]
fn generic_extensor_recovers_curvature_and_argument_rate() {
    // an off-centre ellipse, reparametrised by arc length
    let curve = reparametrize_unit_speed(
        |t: &Jet3| Ok(CJet::new(t.cos().scale(2.0).add_scalar(3.0), t.sin())),
        -0.8,
        0.8,
    )
    .unwrap();
    let imm = build_complex_extensor(&curve, 3).unwrap();
    let (lo, hi) = curve.domain();
    for i in 1..6 {
        let s = lo + (hi - lo) * i as f64 / 6.0;
        let ca = curvature_and_argument(&curve, s).unwrap();
        let ext = Geometry::at(&imm.chart, &[s, 1.0, 0.2]).unwrap().extract(None).unwrap();
        assert!((ext.pattern.lambda - ca.curvature).abs() < 1e-6, "s = {s}");
        assert!((ext.pattern.mu - ca.arg_rate).abs() < 1e-6, "s = {s}");
    }
}

#[test]
fn flat_charts_are_lagrangian() {
    for id in ["C.1", "C.2", "C.3", "C.4", "C.5", "C.6"] {
        let imm = build_family(&FamilySpec::new(case(id), 3)).unwrap();
        let p: Vec<f64> = imm.chart.domain().iter().map(|(lo, hi)| 0.3 * lo + 0.7 * hi).collect();
        let geom = Geometry::at(&imm.chart, &p).unwrap();
        let frame = geom.orthonormal_frame(None, &[0, 1, 2]).unwrap();
        assert!(geom.lagrangian_residual(&frame) < 1e-8, "{id}");
    }
}

#[test]
fn flat_hyperbolic_lift_lies_on_the_quadric() {
    let imm = build_family(&FamilySpec::new(case("CH.1"), 3)).unwrap();
    for p in imm.chart.random_grid(20, 3) {
        let geom = Geometry::at(&imm.chart, &p).unwrap();
        assert!(geom.containment_residual(-1.0) < 1e-10);
    }
}

#[test]
fn sech_lift_matches_the_closed_formula() {
    let imm = build_family(&FamilySpec::new(case("CH.12"), 3)).unwrap();
    for p in [[0.3f64, 0.2, -0.5], [-0.9, 1.0, 0.1], [0.0, 0.0, 0.0]] {
        let (s, u2, u3) = (p[0], p[1], p[2]);
        let sum = u2 * u2 + u3 * u3;
        let (sech, tanh) = (1.0 / (2.0 * s).cosh(), (2.0 * s).tanh());
        let pre = Complex64::from_polar((2.0 * s).cosh().sqrt(), s.tanh().atan());
        let i = Complex64::i();
        let want = [
            pre / 2.0 * (1.0 + sum + sech - i * tanh),
            pre / 2.0 * (i * sum + i * sech - i + tanh),
            // the containment ⟨ψ, ψ⟩ = −1 fixes the factor of the trailing components to pre
            pre * u2,
            pre * u3,
        ];
        let x = imm.chart.position(&p).unwrap();
        for (k, w) in want.iter().enumerate() {
            let got = Complex64::new(x[2 * k], x[2 * k + 1]);
            assert!((got - w).norm() < 1e-10, "component {k} at {p:?}: {got} vs {w}");
        }
        let geom = Geometry::at(&imm.chart, &p).unwrap();
        let frame = geom.orthonormal_frame(None, &[0, 1, 2]).unwrap();
        assert!(geom.horizontality_residual(&frame) < 1e-8);
    }
}

#[test]
fn lifts_are_horizontal_and_contained() {
    for id in ["CP.1", "CP.2", "CP.5", "CH.2", "CH.6", "CH.7", "CH.11", "CH.15"] {
        let spec = FamilySpec::new(case(id), 3);
        let imm = build_family(&spec).unwrap();
        let level = imm.chart.level().unwrap();
        for p in imm.chart.random_grid(10, 5) {
            let geom = Geometry::at(&imm.chart, &p).unwrap();
            let frame = geom.orthonormal_frame(None, &[0, 1, 2]).unwrap();
            assert!(geom.containment_residual(level) < 1e-8, "{id}");
            assert!(geom.horizontality_residual(&frame) < 1e-6, "{id}");
        }
    }
}

#[test]
fn ratio_gate() {
    for r in [2.0, 0.5, -1.0] {
        let err = build_extensor_ratio_family(r, 4, 2.0, 0.5, 1.0, (-1.0, 1.0)).unwrap_err();
        assert!(matches!(err, Error::Usage(_)), "r = {r}: {err}");
    }
    // (7 − n)/3 = 1 for n = 4, where Φ = (c − 1)μ⁴
    assert!(build_extensor_ratio_family(1.0, 4, 2.0, 0.5, 1.0, (-1.0, 1.0)).is_ok());
}

#[test]
fn ratio_family_one_minus_n_in_four_dimensions() {
    // Φ(μ₀) = (r − 2)²μ₀²·½ picks c
    let (r, mu0): (f64, f64) = (-3.0, 0.5);
    let c = (r - 2.0).powi(2) * mu0 * mu0 * (mu0 * mu0 + 0.5) / mu0.powf(2.0 * (r - 3.0) / (r - 2.0));
    let imm = build_extensor_ratio_family(r, 4, c, mu0, 1.0, (-0.3, 0.3)).unwrap();
    let spec = FamilySpec::new(case("C.5"), 4);
    let report = verify_immersion(&imm, &spec, FamilyParams::default(), Some(r), &VerifyOptions::default()).unwrap();
    let failed: Vec<_> = report.failed().map(|c| c.name.clone()).collect();
    assert!(failed.is_empty(), "{failed:?}");
}

#[test]
fn isotropic_family_in_ten_dimensions() {
    let spec = FamilySpec::new(case("C.4"), 10);
    assert_eq!(spec.expected_ratio().unwrap(), Some(-1.0));
    let imm = build_family(&spec).unwrap();
    assert_eq!(imm.chart.dim(), 10);
    let ext = Geometry::at(&imm.chart, &imm.chart.random_grid(1, 9)[0]).unwrap().extract(None).unwrap();
    assert!((ext.pattern.lambda + ext.pattern.mu).abs() < 1e-6);
}

#[test]
fn case_gates() {
    for (id, n) in [("C.4", 7), ("CP.3", 7), ("CH.4", 7), ("CH.13", 7), ("CP.4", 2), ("CH.5", 2), ("CH.14", 2)] {
        let err = build_family(&FamilySpec::new(case(id), n)).unwrap_err();
        assert!(matches!(err, Error::Usage(_)), "{id} n={n}: {err}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cylinder_metric_is_identity(a in 0.2f64..5.0, s in -3.0f64..3.0, u in -1.0f64..1.0, v in -1.0f64..1.0) {
        let imm = build_cylinder(a, 3).unwrap();
        let geom = Geometry::at(&imm.chart, &[s, u, v]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((geom.metric[i][j].value() - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sphere_chart_is_unit(u1 in 0.05f64..3.0, u2 in 0.05f64..3.0, u3 in -3.0f64..3.0) {
        let y = sphere_chart(&jets(&[u1, u2, u3])).unwrap();
        let norm: f64 = y.iter().map(|c| c.value() * c.value()).sum();
        prop_assert!((norm.sqrt() - 1.0).abs() < 1e-15);
    }
}
