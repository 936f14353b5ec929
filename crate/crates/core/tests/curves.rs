use humbilical::curves::{
    curvature_and_argument, reparametrize_unit_speed, theta2_residual, PlaneCurve,
};
use humbilical::kernel::{CJet, Jet3};
use humbilical::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn circle_about_origin() {
    for &a in &[0.5, 1.0, 3.0] {
        let f = PlaneCurve::circle(a);
        for &s in &[-1.0, 0.0, 2.5] {
            let ca = curvature_and_argument(&f, s).unwrap();
            assert!((ca.curvature - 1.0 / a).abs() < 1e-12);
            assert!((ca.arg_rate - 1.0 / a).abs() < 1e-12);
            assert!(theta2_residual(&f, s).unwrap().abs() < 1e-12);
            assert!(f.unit_speed_residual(s).unwrap().abs() < 1e-14);
        }
    }
}

#[test]
fn unit_circle() {
    let f = PlaneCurve::new(|s| Ok(CJet::unit_phase(s)), (-5.0, 5.0));
    let ca = curvature_and_argument(&f, 0.7).unwrap();
    assert!((ca.curvature - 1.0).abs() < 1e-14 && (ca.arg_rate - 1.0).abs() < 1e-14);
}

#[test]
fn vertical_line() {
    let r = 1.3;
    let f = PlaneCurve::vertical_line(r);
    for &s in &[-2.0, 0.0, 0.4, 3.0] {
        let ca = curvature_and_argument(&f, s).unwrap();
        assert!(ca.curvature.abs() < 1e-14);
        assert!((ca.arg_rate - r / (r * r + s * s)).abs() < 1e-14);
        assert!(theta2_residual(&f, s).unwrap().abs() < 1e-8);
    }
}

#[test]
fn radial_line_is_degenerate() {
    let f = PlaneCurve::new(|s| Ok(CJet::real(s + 1.0)), (-0.5, 0.5));
    assert!(matches!(
        curvature_and_argument(&f, 0.2),
        Err(Error::DegenerateCurve { .. })
    ));
}

#[test]
fn reparametrised_circle() {
    let f = reparametrize_unit_speed(|t| Ok(CJet::unit_phase(t).scale(2.0)), 0.0, 6.0).unwrap();
    assert!((f.domain().1 - 12.0).abs() < 1e-10);
    for &s in &[0.1, 3.0, 7.7, 11.9] {
        assert!(f.unit_speed_residual(s).unwrap().abs() < 1e-8);
        let ca = curvature_and_argument(&f, s).unwrap();
        assert!((ca.curvature - 0.5).abs() < 1e-8);
    }
}

#[test]
fn reparametrised_line() {
    let f = reparametrize_unit_speed(|t| Ok(CJet::new(t + 1.0, t.clone())), 0.0, 2.0).unwrap();
    for &s in &[0.0, 1.0, 2.5] {
        assert!(f.unit_speed_residual(s).unwrap().abs() < 1e-8);
        assert!(curvature_and_argument(&f, s).unwrap().curvature.abs() < 1e-8);
    }
}

#[test]
fn reparametrised_ellipse() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (a, b) = (rng.gen_range(1.0..3.0), rng.gen_range(0.3..1.0));
    let f = reparametrize_unit_speed(
        move |t| Ok(CJet::new(t.cos().scale(a), t.sin().scale(b))),
        0.0,
        std::f64::consts::TAU,
    )
    .unwrap();
    let len = f.domain().1;
    for i in 0..100 {
        let s = len * (i as f64 + 0.5) / 100.0;
        assert!(f.unit_speed_residual(s).unwrap().abs() < 1e-8, "s = {s}");
    }
}

#[test]
fn non_regular_input_is_rejected() {
    assert!(reparametrize_unit_speed(|t| Ok(CJet::real(t * t)), -1.0, 1.0).is_err());
    assert!(reparametrize_unit_speed(|t| Ok(CJet::real(t.clone())), 1.0, 1.0).is_err());
}

/// ρ(t)·e^{it} with a random trigonometric radial profile.
fn fourier_curve(coeffs: Vec<(f64, f64)>) -> impl Fn(&Jet3) -> humbilical::Result<CJet> {
    move |t: &Jet3| {
        let mut rho = t.constant_like(1.0);
        for (k, &(a, b)) in coeffs.iter().enumerate() {
            let kt = t.scale((k + 1) as f64);
            rho = rho + kt.cos().scale(a) + kt.sin().scale(b);
        }
        Ok(CJet::unit_phase(t).mul_real(&rho))
    }
}

#[test]
fn theta2_identity_on_random_fourier_curves() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let coeffs: Vec<(f64, f64)> = (0..3)
            .map(|_| (rng.gen_range(-0.1..0.1), rng.gen_range(-0.1..0.1)))
            .collect();
        let f = reparametrize_unit_speed(fourier_curve(coeffs), 0.0, std::f64::consts::TAU).unwrap();
        let len = f.domain().1;
        for i in 0..5 {
            let s = len * (i as f64 + 0.3) / 5.0;
            assert!(f.unit_speed_residual(s).unwrap().abs() < 1e-8);
            worst = worst.max(theta2_residual(&f, s).unwrap().abs());
        }
    }
    assert!(worst < 1e-6, "max theta2 residual {worst:e}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn theta2_identity_on_closed_forms(
        frac in 0.0f64..0.9,
        w in 0.2f64..2.0,
        phase in -1.0f64..1.0,
        s in -1.0f64..1.0,
    ) {
        // an off-centre circle of radius 1/w still winding around the origin
        let centre = frac / w;
        let f = PlaneCurve::new(
            move |s| Ok(CJet::unit_phase(&(s.scale(w) + phase)).scale(1.0 / w) + CJet::real(s.constant_like(centre))),
            (-1.0, 1.0),
        );
        let ca = curvature_and_argument(&f, s).unwrap();
        prop_assert!((ca.curvature - w).abs() < 1e-10);
        prop_assert!(theta2_residual(&f, s).unwrap().abs() < 1e-8);
    }
}

#[test]
fn constant_argument_rate_forces_constant_modulus() {
    use humbilical::ode::{integrate, DEFAULT_TOL};
    use std::sync::Arc;
    // α″ = 2 − κ√(4α − α′²) with constant κ, on the state (α, α′)
    let kappa = 0.8;
    let rhs: humbilical::ode::Rhs = Arc::new(move |y: &[Jet3]| {
        let disc = y[0].scale(4.0) - &y[1] * &y[1];
        Ok(vec![y[1].clone(), disc.sqrt()?.scale(-kappa) + 2.0])
    });
    let arg_rate = |y: &[f64]| (4.0 * y[0] - y[1] * y[1]).sqrt() / (2.0 * y[0]);

    let alpha0 = 1.0 / (kappa * kappa);
    let sol = integrate(Arc::clone(&rhs), &[alpha0, 0.0], (-3.0, 3.0), &[], DEFAULT_TOL).unwrap();
    let samples: Vec<Vec<f64>> = (0..=60).map(|i| sol.state(-3.0 + 0.1 * i as f64).unwrap()).collect();
    let moduli: Vec<f64> = samples.iter().map(|y| y[0].sqrt()).collect();
    let mean = moduli.iter().sum::<f64>() / moduli.len() as f64;
    let variance = moduli.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / moduli.len() as f64;
    assert!(variance < 1e-8);
    for y in &samples {
        assert!((arg_rate(y) - kappa).abs() < 1e-8);
    }

    // off-centre circles of the same curvature have a varying argument rate
    let sol = integrate(rhs, &[2.0, 0.5], (-1.0, 1.0), &[], DEFAULT_TOL).unwrap();
    let rates: Vec<f64> = (0..=20).map(|i| arg_rate(&sol.state(-1.0 + 0.1 * i as f64).unwrap())).collect();
    let spread = rates.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - rates.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(spread > 1e-3);
}
