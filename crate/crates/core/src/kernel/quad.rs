//! Adaptive Simpson quadrature and jet-valued running integrals.

use super::jet::Jet3;
use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-10;
const MAX_DEPTH: u32 = 40;

/// ∫_a^b f by adaptive Simpson with absolute tolerance `tol`.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a)?;
    let fb = f(b)?;
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(&f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if !delta.is_finite() {
        return Err(Error::domain("quadrature", "non-finite integrand"));
    }
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    Ok(simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}

/// Running integral `s ↦ ∫_{origin}^{s} f` with the integral over a uniform
/// knot grid cached at construction.
#[derive(Debug, Clone)]
pub struct CumulativeIntegral {
    origin: f64,
    step: f64,
    /// `forward[k] = ∫_origin^{origin + k·step}`, `backward[k]` likewise to the left.
    forward: Vec<f64>,
    backward: Vec<f64>,
    tol: f64,
}

impl CumulativeIntegral {
    /// Tabulates the integral over `[lo, hi] ∋ origin`; the integrand is never
    /// evaluated outside that interval.
    pub fn new<F>(f: F, origin: f64, lo: f64, hi: f64, tol: f64) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64>,
    {
        if !(lo <= origin && origin <= hi) {
            return Err(Error::usage(format!(
                "origin {origin} outside [{lo}, {hi}]"
            )));
        }
        let step = ((hi - lo) / 64.0).max(1e-3);
        let cells = |len: f64| (len / step).ceil() as usize;
        let mut forward = vec![0.0];
        for k in 0..cells(hi - origin) {
            let a = origin + k as f64 * step;
            let prev = forward[k];
            forward.push(prev + adaptive_simpson(&f, a, (a + step).min(hi), tol)?);
        }
        let mut backward = vec![0.0];
        for k in 0..cells(origin - lo) {
            let b = origin - k as f64 * step;
            let prev = backward[k];
            backward.push(prev - adaptive_simpson(&f, (b - step).max(lo), b, tol)?);
        }
        Ok(CumulativeIntegral {
            origin,
            step,
            forward,
            backward,
            tol,
        })
    }

    pub fn eval<F>(&self, f: F, s: f64) -> Result<f64>
    where
        F: Fn(f64) -> Result<f64>,
    {
        let offset = s - self.origin;
        let (table, sign) = if offset >= 0.0 {
            (&self.forward, 1.0)
        } else {
            (&self.backward, -1.0)
        };
        let k = ((offset.abs() / self.step).floor() as usize).min(table.len() - 1);
        let knot = self.origin + sign * k as f64 * self.step;
        Ok(table[k] + adaptive_simpson(f, knot, s, self.tol)?)
    }
}

/// A running integral that owns its integrand.
#[derive(Clone)]
pub struct RunningIntegral {
    table: CumulativeIntegral,
    integrand: std::sync::Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>,
}

impl std::fmt::Debug for RunningIntegral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RunningIntegral")
            .field("table", &self.table)
            .finish_non_exhaustive()
    }
}

impl RunningIntegral {
    pub fn new<F>(integrand: F, origin: f64, lo: f64, hi: f64) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64> + Send + Sync + 'static,
    {
        let integrand: std::sync::Arc<dyn Fn(f64) -> Result<f64> + Send + Sync> =
            std::sync::Arc::new(integrand);
        let table = CumulativeIntegral::new(|x| integrand(x), origin, lo, hi, DEFAULT_TOL)?;
        Ok(RunningIntegral { table, integrand })
    }

    pub fn value(&self, s: f64) -> Result<f64> {
        self.table.eval(|x| (self.integrand)(x), s)
    }
}

/// Jet of `s ↦ ∫^s f` at a point, from the integral's value and the integrand's
/// univariate jet there (the derivatives come from the fundamental theorem of calculus).
pub fn integral_jet(value: f64, integrand: &Jet3) -> Jet3 {
    let order = (integrand.order() as usize + 1).min(3);
    let mut d = vec![value];
    for k in 0..order {
        d.push(integrand.univariate_derivative(k));
    }
    Jet3::from_derivatives(1, 0, &d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_polynomial_and_transcendental() {
        let cubic = adaptive_simpson(|x| Ok(x * x * x), 0.0, 2.0, 1e-12).unwrap();
        assert!((cubic - 4.0).abs() < 1e-12);
        let sine = adaptive_simpson(|x: f64| Ok(x.sin()), 0.0, std::f64::consts::PI, 1e-12).unwrap();
        assert!((sine - 2.0).abs() < 1e-10);
    }

    #[test]
    fn cumulative_matches_closed_form() {
        let f = |x: f64| Ok(1.0 / x.cosh());
        let table = CumulativeIntegral::new(f, 0.0, -3.0, 3.0, 1e-12).unwrap();
        for &s in &[-2.9, -1.0, -0.01, 0.0, 0.4, 2.5] {
            let exact = 2.0 * (s / 2.0f64).tanh().atan();
            assert!((table.eval(f, s).unwrap() - exact).abs() < 1e-10, "s = {s}");
        }
    }

    #[test]
    fn integral_jet_uses_integrand_derivatives() {
        let x = Jet3::variable(1, 0, 0.3);
        let j = integral_jet(7.0, &x.sin());
        assert_eq!(j.univariate_derivative(0), 7.0);
        assert!((j.univariate_derivative(1) - 0.3f64.sin()).abs() < 1e-15);
        assert!((j.univariate_derivative(3) + 0.3f64.sin()).abs() < 1e-15);
    }
}
