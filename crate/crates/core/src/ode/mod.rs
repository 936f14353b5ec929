//! Classification ODEs: ratio roots, first-order laws, the coupled system and residuals.

pub mod integrator;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use integrator::{integrate, DenseSolution, Event, EventKind, Rhs, Watch, DEFAULT_TOL};

use crate::error::{Error, Result};
use crate::kernel::Jet3;

/// Threshold for |λ − 2μ|, |3λ + (n−1)μ| and μ at which integration stops.
pub const SINGULAR_THRESHOLD: f64 = 1e-6;
/// Integration stops once |μ| exceeds this (finite-time blow-up).
pub const BLOW_UP_THRESHOLD: f64 = 1e6;
/// |Φ′(μ)| below this at a root of Φ classifies the root as double.
pub const DOUBLE_ROOT_TOL: f64 = 1e-9;

/// A rational number in lowest terms with positive denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rational {
    pub num: i64,
    pub den: i64,
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0);
        let g = gcd(num.abs(), den.abs()).max(1);
        let sign = if den < 0 { -1 } else { 1 };
        Rational {
            num: sign * num / g,
            den: sign * den / g,
        }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl std::fmt::Display for Rational {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRoot {
    pub ratio: Rational,
    /// The root solves the cubic but is ruled out (r = −1 on surfaces).
    pub excluded: bool,
    /// λ = −μ, the isotropic ratio.
    pub isotropic: bool,
}

/// Roots of r(r + n − 1)(3r + n − 7) = 0, the ratios admitted by the tangential bitension equation.
pub fn ratio_roots(n: usize) -> Result<Vec<RatioRoot>> {
    if n < 2 {
        return Err(Error::usage(format!("dimension must be at least 2, got {n}")));
    }
    let n = n as i64;
    let mut roots: Vec<RatioRoot> = Vec::new();
    for ratio in [Rational::new(0, 1), Rational::new(1 - n, 1), Rational::new(7 - n, 3)] {
        if roots.iter().any(|r| r.ratio == ratio) {
            continue;
        }
        roots.push(RatioRoot {
            ratio,
            excluded: n == 2 && ratio == Rational::new(-1, 1),
            isotropic: n >= 3 && ratio == Rational::new(-1, 1),
        });
    }
    Ok(roots)
}

/// Admissible ratios only (excluded roots dropped).
pub fn admissible_ratios(n: usize) -> Result<Vec<f64>> {
    Ok(ratio_roots(n)?
        .into_iter()
        .filter(|r| !r.excluded)
        .map(|r| r.ratio.to_f64())
        .collect())
}

/// Order-3 univariate jets of the profile (λ, μ, k) at one value of the arc length.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileJets {
    pub lambda: Jet3,
    pub mu: Jet3,
    pub k: Jet3,
}

fn d(j: &Jet3, k: usize) -> f64 {
    j.univariate_derivative(k)
}

/// μ″(λ−2μ) − μ′(λ′−3μ′) + (λ−2μ)²(−μ² + λμ + ε).
pub fn residual_legen(p: &ProfileJets, eps: i8) -> Result<f64> {
    if eps == 0 {
        return Err(Error::NotApplicable(
            "the Legendre curve equation needs a curved ambient (ε = ±1)".into(),
        ));
    }
    let (l, m) = (&p.lambda, &p.mu);
    let gap = d(l, 0) - 2.0 * d(m, 0);
    Ok(d(m, 2) * gap - d(m, 1) * (d(l, 1) - 3.0 * d(m, 1))
        + gap * gap * (-d(m, 0).powi(2) + d(l, 0) * d(m, 0) + eps as f64))
}

/// (3λ + (n−1)μ)(λ−2μ)λ′ + (n−1)λ(3λ + (n−5)μ)μ′.
pub fn residual_tbe3(p: &ProfileJets, n: usize) -> f64 {
    let nf = n as f64;
    let (l, m) = (d(&p.lambda, 0), d(&p.mu, 0));
    (3.0 * l + (nf - 1.0) * m) * (l - 2.0 * m) * d(&p.lambda, 1)
        + (nf - 1.0) * l * (3.0 * l + (nf - 5.0) * m) * d(&p.mu, 1)
}

/// −k′ − k² − (ε + λμ − μ²).
pub fn residual_gauss2(p: &ProfileJets, eps: i8) -> f64 {
    let (l, m) = (d(&p.lambda, 0), d(&p.mu, 0));
    -d(&p.k, 1) - d(&p.k, 0).powi(2) - (eps as f64 + l * m - m * m)
}

/// k(λ − 2μ) − μ′, the defining relation of k.
pub fn residual_k_definition(p: &ProfileJets) -> f64 {
    d(&p.k, 0) * (d(&p.lambda, 0) - 2.0 * d(&p.mu, 0)) - d(&p.mu, 1)
}

/// μ′² = Φ(μ) with Φ(μ) = −(r−2)²μ²(μ² + ε) + c·μ^{2(r−3)/(r−2)}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstOrderLaw {
    pub ratio: f64,
    pub eps: i8,
    pub c: f64,
}

impl FirstOrderLaw {
    pub fn new(ratio: f64, eps: i8, c: f64) -> Result<Self> {
        if (ratio - 2.0).abs() < 1e-12 {
            return Err(Error::usage("ratio 2 has no first-order law"));
        }
        if !matches!(eps, -1..=1) {
            return Err(Error::usage(format!("ε must be −1, 0 or 1, got {eps}")));
        }
        let law = FirstOrderLaw { ratio, eps, c };
        if law.band_probe().is_none() {
            return Err(Error::domain(
                "first-order law",
                format!("Φ < 0 for every μ > 0 (r = {ratio}, ε = {eps}, c = {c})"),
            ));
        }
        Ok(law)
    }

    pub fn exponent(&self) -> f64 {
        2.0 * (self.ratio - 3.0) / (self.ratio - 2.0)
    }

    fn quad_coeff(&self) -> f64 {
        (self.ratio - 2.0).powi(2)
    }

    pub fn phi(&self, mu: f64) -> f64 {
        let a = self.quad_coeff();
        -a * mu * mu * (mu * mu + self.eps as f64) + self.c * mu.powf(self.exponent())
    }

    pub fn dphi(&self, mu: f64) -> f64 {
        let a = self.quad_coeff();
        let p = self.exponent();
        -a * (4.0 * mu.powi(3) + 2.0 * self.eps as f64 * mu) + self.c * p * mu.powf(p - 1.0)
    }

    pub fn phi_jet(&self, mu: &Jet3) -> Result<Jet3> {
        let a = self.quad_coeff();
        let m2 = mu * mu;
        Ok((&m2 * &(&m2 + self.eps as f64)).scale(-a) + mu.powf(self.exponent())?.scale(self.c))
    }

    pub fn dphi_jet(&self, mu: &Jet3) -> Result<Jet3> {
        let a = self.quad_coeff();
        let p = self.exponent();
        let cubic = (mu * &(mu * mu)).scale(4.0) + mu.scale(2.0 * self.eps as f64);
        Ok(cubic.scale(-a) + mu.powf(p - 1.0)?.scale(self.c * p))
    }

    /// A point of the admissible band {μ > 0 : Φ(μ) ≥ 0}, if the band is nonempty.
    pub fn band_probe(&self) -> Option<f64> {
        let grid: Vec<f64> = (-120..=120).map(|i| 10f64.powf(i as f64 / 20.0)).collect();
        if let Some(&mu) = grid.iter().find(|&&mu| self.phi(mu) > 0.0) {
            return Some(mu);
        }
        // a band reduced to a double root: refine the maximum of Φ
        let best = (1..grid.len() - 1).max_by(|&a, &b| {
            self.phi(grid[a]).total_cmp(&self.phi(grid[b]))
        })?;
        let (mut lo, mut hi) = (grid[best - 1], grid[best + 1]);
        let golden = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..200 {
            let a = hi - golden * (hi - lo);
            let b = lo + golden * (hi - lo);
            if self.phi(a) > self.phi(b) {
                hi = b;
            } else {
                lo = a;
            }
        }
        let mu = 0.5 * (lo + hi);
        let scale = 1.0 + self.quad_coeff() * mu.powi(4) + (self.c * mu.powf(self.exponent())).abs();
        (self.phi(mu) >= -1e-12 * scale).then_some(mu)
    }

    /// Second-order form μ″ = Φ′(μ)/2 on the state (μ, μ′).
    pub fn rhs(&self) -> Rhs {
        let law = *self;
        Arc::new(move |y: &[Jet3]| {
            if !(y[0].value() > 0.0) {
                return Err(Error::domain("first-order law", "μ left the half-line μ > 0"));
            }
            Ok(vec![y[1].clone(), law.dphi_jet(&y[0])?.scale(0.5)])
        })
    }
}

/// Integrates μ′² = Φ(μ) from μ(0) = μ₀ with the sign of μ′(0) given by `sign0`.
///
/// The law is integrated in its second-order form, which passes smoothly through
/// simple turning points; these are reported as events.
pub fn integrate_first_order(
    law: &FirstOrderLaw,
    mu0: f64,
    sign0: f64,
    span: (f64, f64),
) -> Result<DenseSolution> {
    if !(mu0 > 0.0) {
        return Err(Error::usage(format!("μ₀ must be positive, got {mu0}")));
    }
    let phi0 = law.phi(mu0);
    let scale = 1.0 + law.quad_coeff() * mu0.powi(4) + (law.c * mu0.powf(law.exponent())).abs();
    if phi0 < -1e-13 * scale {
        return Err(Error::domain(
            "integrate_first_order",
            format!("Φ(μ₀) = {phi0:e} < 0 at μ₀ = {mu0}"),
        ));
    }
    let rhs = law.rhs();
    if phi0.abs() <= 1e-13 * scale && law.dphi(mu0).abs() < DOUBLE_ROOT_TOL {
        log::info!("μ₀ = {mu0} is a double root of Φ; returning the equilibrium");
        return Ok(DenseSolution::constant(
            vec![mu0, 0.0],
            span,
            rhs,
            vec![Event {
                s: 0.0,
                kind: EventKind::Equilibrium { mu: mu0 },
            }],
        ));
    }
    let dmu0 = sign0.signum() * phi0.max(0.0).sqrt();
    let watches = [
        Watch::passive("mu'", |y| y[1]),
        Watch::terminal("mu", |y| y[0] - SINGULAR_THRESHOLD),
        Watch::terminal("blow-up", |y| BLOW_UP_THRESHOLD - y[0].abs()),
    ];
    let mut sol = integrate(rhs, &[mu0, dmu0], span, &watches, DEFAULT_TOL)?;
    classify_turning_points(&mut sol, law);
    Ok(sol)
}

fn classify_turning_points(sol: &mut DenseSolution, law: &FirstOrderLaw) {
    for event in sol.events_mut() {
        if let EventKind::TurningPoint { simple, mu } = &mut event.kind {
            *simple = law.dphi(*mu).abs() >= DOUBLE_ROOT_TOL;
        }
    }
}

/// λ′ and μ″ of the coupled system on the state (λ, μ, μ′).
pub fn coupled_rhs(n: usize, eps: i8) -> Rhs {
    let nf = n as f64;
    let e = eps as f64;
    Arc::new(move |y: &[Jet3]| {
        let (l, m, dm) = (&y[0], &y[1], &y[2]);
        let gap = l - &m.scale(2.0);
        let trace = l.scale(3.0) + m.scale(nf - 1.0);
        let num = (l * &(l.scale(3.0) + m.scale(nf - 5.0))) * dm;
        let dl = num.scale(-(nf - 1.0)).checked_div(&(&trace * &gap))?;
        let curvature = -(m * m) + l * m + e;
        let ddm = (dm * &(&dl - &dm.scale(3.0)) - &(&gap * &gap) * &curvature).checked_div(&gap)?;
        Ok(vec![dl, dm.clone(), ddm])
    })
}

/// Integrates the coupled system for (λ, μ) from (λ₀, μ₀, μ′₀) at s = 0.
pub fn integrate_coupled(
    n: usize,
    eps: i8,
    lambda0: f64,
    mu0: f64,
    dmu0: f64,
    span: (f64, f64),
) -> Result<DenseSolution> {
    if n < 2 {
        return Err(Error::usage(format!("dimension must be at least 2, got {n}")));
    }
    if !matches!(eps, -1..=1) {
        return Err(Error::usage(format!("ε must be −1, 0 or 1, got {eps}")));
    }
    let nf = n as f64;
    if !(mu0 > 0.0) {
        return Err(Error::usage(format!("μ₀ must be positive, got {mu0}")));
    }
    if (lambda0 - 2.0 * mu0).abs() < SINGULAR_THRESHOLD
        || (3.0 * lambda0 + (nf - 1.0) * mu0).abs() < SINGULAR_THRESHOLD
    {
        return Err(Error::usage(format!(
            "singular initial data: λ₀ − 2μ₀ = {}, 3λ₀ + (n−1)μ₀ = {}",
            lambda0 - 2.0 * mu0,
            3.0 * lambda0 + (nf - 1.0) * mu0
        )));
    }
    let watches = [
        Watch::terminal("lambda-2mu", |y: &[f64]| {
            (y[0] - 2.0 * y[1]).abs() - SINGULAR_THRESHOLD
        }),
        Watch::terminal("3lambda+(n-1)mu", move |y: &[f64]| {
            (3.0 * y[0] + (nf - 1.0) * y[1]).abs() - SINGULAR_THRESHOLD
        }),
        Watch::terminal("mu", |y: &[f64]| y[1] - SINGULAR_THRESHOLD),
        Watch::terminal("blow-up", |y: &[f64]| BLOW_UP_THRESHOLD - y[1].abs()),
    ];
    integrate(
        coupled_rhs(n, eps),
        &[lambda0, mu0, dmu0],
        span,
        &watches,
        DEFAULT_TOL,
    )
}

/// μ = sech((r−2)s + c) and k = −tanh((r−2)s + c) as jets of `s`.
pub fn sech_family_jets(ratio: f64, phase: f64, s: &Jet3) -> Result<(Jet3, Jet3)> {
    if (ratio - 2.0).abs() < 1e-12 {
        return Err(Error::Branch("ratio 2 is the degenerate case λ = 2μ".into()));
    }
    let v = s.scale(ratio - 2.0) + phase;
    Ok((v.sech(), -v.tanh()))
}

pub fn sech_family(ratio: f64, phase: f64, s: f64) -> Result<(f64, f64)> {
    let (mu, k) = sech_family_jets(ratio, phase, &Jet3::constant_with_order(1, 0, s))?;
    Ok((mu.value(), k.value()))
}

/// Right-hand side on the state (λ, μ, k) for profiles with μ² + k² = 1:
/// μ′ = (λ−2μ)k, k′ = −μ(λ−2μ), and λ′ from the tangential biharmonic condition.
pub fn null_branch_rhs(n: usize) -> Rhs {
    let nf = n as f64;
    Arc::new(move |y: &[Jet3]| {
        let (l, m, k) = (&y[0], &y[1], &y[2]);
        let gap = l - &m.scale(2.0);
        let trace = l.scale(3.0) + m.scale(nf - 1.0);
        let num = &(l * &(l.scale(3.0) + m.scale(nf - 5.0))) * k;
        let dl = num.scale(-(nf - 1.0)).checked_div(&trace)?;
        Ok(vec![dl, &gap * k, -(m * &gap)])
    })
}

/// Integrates the profile system on the null branch μ² + k² = 1 of the hyperbolic
/// case from (λ₀, μ₀, k₀) at s = 0.
pub fn integrate_null_branch(
    n: usize,
    lambda0: f64,
    mu0: f64,
    k0: f64,
    span: (f64, f64),
) -> Result<DenseSolution> {
    if n < 2 {
        return Err(Error::usage(format!("dimension must be at least 2, got {n}")));
    }
    if !(mu0 > 0.0) {
        return Err(Error::usage(format!("μ₀ must be positive, got {mu0}")));
    }
    if (mu0 * mu0 + k0 * k0 - 1.0).abs() > 1e-12 {
        return Err(Error::usage(format!(
            "initial data off the branch: μ₀² + k₀² − 1 = {:e}",
            mu0 * mu0 + k0 * k0 - 1.0
        )));
    }
    let nf = n as f64;
    if (lambda0 - 2.0 * mu0).abs() < SINGULAR_THRESHOLD
        || (3.0 * lambda0 + (nf - 1.0) * mu0).abs() < SINGULAR_THRESHOLD
    {
        return Err(Error::usage("singular initial data for the null branch"));
    }
    let watches = [
        Watch::terminal("lambda-2mu", |y: &[f64]| {
            (y[0] - 2.0 * y[1]).abs() - SINGULAR_THRESHOLD
        }),
        Watch::terminal("3lambda+(n-1)mu", move |y: &[f64]| {
            (3.0 * y[0] + (nf - 1.0) * y[1]).abs() - SINGULAR_THRESHOLD
        }),
        Watch::terminal("mu", |y: &[f64]| y[1] - SINGULAR_THRESHOLD),
        Watch::terminal("blow-up", |y: &[f64]| BLOW_UP_THRESHOLD - y[1].abs()),
    ];
    integrate(null_branch_rhs(n), &[lambda0, mu0, k0], span, &watches, DEFAULT_TOL)
}
