//! Unit-speed Legendre curves in S³(1) ⊂ ℂ² and H₁³(−1) ⊂ ℂ₁².

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{CJet, Jet3, Signature};
use crate::ode::residual_legen;
use crate::structure::StructureFunctions;

/// Univariate order-3 jets of (z₁, z₂) at a point.
pub type CurveMap = Arc<dyn Fn(f64) -> Result<[CJet; 2]> + Send + Sync>;

/// Relative tolerance on the curve equation of the structure functions fed to a builder.
pub const INPUT_TOL: f64 = 1e-6;
const INPUT_SAMPLES: usize = 41;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HyperbolicBranch {
    /// μ² + k² > 1.
    I,
    /// μ² + k² < 1.
    II,
}

#[derive(Clone)]
pub struct LegendreCurve {
    z: CurveMap,
    sig: Signature,
    level: f64,
    domain: (f64, f64),
    source: Option<StructureFunctions>,
}

impl fmt::Debug for LegendreCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LegendreCurve")
            .field("sig", &self.sig)
            .field("level", &self.level)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

impl LegendreCurve {
    /// Wraps an explicit map. `sig` must be two-dimensional.
    pub fn new<F>(z: F, sig: Signature, level: f64, domain: (f64, f64)) -> Result<Self>
    where
        F: Fn(f64) -> Result<[CJet; 2]> + Send + Sync + 'static,
    {
        if sig.complex_dim() != 2 {
            return Err(Error::usage("Legendre curves live in a two-dimensional complex space"));
        }
        Ok(LegendreCurve { z: Arc::new(z), sig, level, domain, source: None })
    }

    pub fn sig(&self) -> Signature {
        self.sig
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn source(&self) -> Option<&StructureFunctions> {
        self.source.as_ref()
    }

    /// The same curve with its map post-composed by `f`.
    pub fn map_with<F>(&self, f: F) -> Self
    where
        F: Fn([CJet; 2]) -> [CJet; 2] + Send + Sync + 'static,
    {
        let inner = Arc::clone(&self.z);
        LegendreCurve {
            z: Arc::new(move |s| Ok(f(inner(s)?))),
            ..self.clone()
        }
    }

    pub fn jets(&self, s: f64) -> Result<[CJet; 2]> {
        let (lo, hi) = self.domain;
        if s < lo || s > hi {
            return Err(Error::domain("Legendre curve", format!("s = {s} outside [{lo}, {hi}]")));
        }
        (self.z)(s)
    }

    /// Jets of (z₁, z₂) along a multivariate jet of the arc length.
    pub fn pullback(&self, s: &Jet3) -> Result<[CJet; 2]> {
        let [a, b] = self.jets(s.value())?;
        Ok([a.pullback(s), b.pullback(s)])
    }

    pub fn value(&self, s: f64) -> Result<[Complex64; 2]> {
        let [a, b] = self.jets(s)?;
        Ok([a.value(), b.value()])
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LegendreResiduals {
    pub containment: f64,
    pub unit_speed: f64,
    pub legendre: f64,
}

impl LegendreResiduals {
    pub fn max(&self) -> f64 {
        self.containment.max(self.unit_speed).max(self.legendre)
    }
}

fn hermitian(sig: Signature, a: &[Complex64; 2], b: &[Complex64; 2]) -> f64 {
    (0..2).map(|j| sig.sign(2 * j) * (a[j] * b[j].conj()).re).sum()
}

/// Maximum residuals of containment, unit speed and the Legendre condition over `grid`.
pub fn verify_legendre(curve: &LegendreCurve, grid: &[f64]) -> Result<LegendreResiduals> {
    let mut out = LegendreResiduals::default();
    for &s in grid {
        let jets = curve.jets(s)?;
        let z = [jets[0].value(), jets[1].value()];
        let dz = [jets[0].univariate_derivative(1), jets[1].univariate_derivative(1)];
        let iz = [z[0] * Complex64::i(), z[1] * Complex64::i()];
        let r = LegendreResiduals {
            containment: (hermitian(curve.sig, &z, &z) - curve.level).abs(),
            unit_speed: (hermitian(curve.sig, &dz, &dz) - 1.0).abs(),
            legendre: hermitian(curve.sig, &dz, &iz).abs(),
        };
        out.containment = out.containment.max(r.containment);
        out.unit_speed = out.unit_speed.max(r.unit_speed);
        out.legendre = out.legendre.max(r.legendre);
    }
    Ok(out)
}

/// `count` points spread uniformly over the closed interval, endpoints pulled in slightly.
pub fn sample_grid(domain: (f64, f64), count: usize) -> Vec<f64> {
    let (lo, hi) = domain;
    let pad = 1e-9 * (hi - lo);
    if count < 2 {
        return vec![0.5 * (lo + hi)];
    }
    (0..count)
        .map(|i| lo + pad + (hi - lo - 2.0 * pad) * i as f64 / (count - 1) as f64)
        .collect()
}

fn check_input(sf: &StructureFunctions, expected_eps: i8) -> Result<()> {
    if sf.eps() != expected_eps {
        return Err(Error::usage(format!(
            "structure functions carry ε = {}, the builder needs ε = {expected_eps}",
            sf.eps()
        )));
    }
    for s in sample_grid(sf.domain(), INPUT_SAMPLES) {
        let [lambda, mu, _] = sf.values(s)?;
        if (lambda - 2.0 * mu).abs() < 1e-12 {
            return Err(Error::Branch(format!("λ = 2μ at s = {s}")));
        }
        if mu.abs() < 1e-12 {
            return Err(Error::Branch(format!("μ = 0 at s = {s}")));
        }
        let res = residual_legen(&sf.jets(s)?, sf.eps())?;
        // the residual is quartic in the profile, so compare against its natural size
        let scale = 1.0 + (lambda - 2.0 * mu).powi(2) * (mu * mu + (lambda * mu).abs() + 1.0);
        if !(res.abs() < INPUT_TOL * scale) {
            return Err(Error::InconsistentInput(format!(
                "curve equation residual {res:e} at s = {s}"
            )));
        }
    }
    Ok(())
}

/// The factor (iμ − k)·e^{i∫(λ−μ)} and the phase e^{i∫μ}, both unnormalised.
fn raw_components(sf: &StructureFunctions, s: f64) -> Result<(CJet, CJet, Jet3)> {
    let p = sf.jets(s)?;
    let twisted = CJet::new(-&p.k, p.mu.clone()) * CJet::unit_phase(&sf.phase_gap(s)?);
    let plain = CJet::unit_phase(&sf.phase_mu(s)?);
    let radial = &p.mu * &p.mu + &p.k * &p.k;
    Ok((twisted, plain, radial))
}

/// z = ((iμ−k)e^{i∫(λ−μ)}, e^{i∫μ}) / √(μ² + k² + 1) in S³(1).
pub fn build_legendre_sphere(sf: &StructureFunctions) -> Result<LegendreCurve> {
    check_input(sf, 1)?;
    let src = sf.clone();
    let z: CurveMap = Arc::new(move |s| {
        let (twisted, plain, radial) = raw_components(&src, s)?;
        let inv = (radial + 1.0).sqrt()?.recip()?;
        Ok([twisted.mul_real(&inv), plain.mul_real(&inv)])
    });
    Ok(LegendreCurve {
        z,
        sig: Signature::Euclidean(2),
        level: 1.0,
        domain: sf.domain(),
        source: Some(sf.clone()),
    })
}

/// Legendre curve in H₁³(−1) on the given branch of the sign of μ² + k² − 1.
///
/// Branch I puts the twisted factor in the timelike slot; branch II swaps the
/// two components so that ⟨z, z⟩ = −1 still holds.
pub fn build_legendre_hyperbolic(
    sf: &StructureFunctions,
    branch: HyperbolicBranch,
) -> Result<LegendreCurve> {
    let sign = match branch {
        HyperbolicBranch::I => 1.0,
        HyperbolicBranch::II => -1.0,
    };
    for s in sample_grid(sf.domain(), 4 * INPUT_SAMPLES) {
        let [_, mu, k] = sf.values(s)?;
        let indicator = sign * (mu * mu + k * k - 1.0);
        if !(indicator > 0.0) {
            return Err(Error::Branch(format!(
                "μ² + k² − 1 = {:e} at s = {s} leaves branch {branch:?}",
                mu * mu + k * k - 1.0
            )));
        }
    }
    check_input(sf, -1)?;
    let src = sf.clone();
    let z: CurveMap = Arc::new(move |s| {
        let (twisted, plain, radial) = raw_components(&src, s)?;
        let inv = (radial.add_scalar(-1.0).scale(sign)).sqrt()?.recip()?;
        let (twisted, plain) = (twisted.mul_real(&inv), plain.mul_real(&inv));
        Ok(match branch {
            HyperbolicBranch::I => [twisted, plain],
            HyperbolicBranch::II => [plain, twisted],
        })
    });
    Ok(LegendreCurve {
        z,
        sig: Signature::Lorentz(2),
        level: -1.0,
        domain: sf.domain(),
        source: Some(sf.clone()),
    })
}
