//! Unit-speed plane curves in ℂ* and their curvature/argument identities.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::{CJet, CumulativeIntegral, Jet3};
use crate::structure::StructureFunctions;

/// A complex-valued map evaluated on univariate jets.
pub type ComplexMap = Arc<dyn Fn(&Jet3) -> Result<CJet> + Send + Sync>;

#[derive(Clone)]
pub struct PlaneCurve {
    map: ComplexMap,
    domain: (f64, f64),
}

impl fmt::Debug for PlaneCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PlaneCurve")
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

/// κ and θ′ at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureArgument {
    pub curvature: f64,
    pub arg_rate: f64,
}

impl PlaneCurve {
    pub fn new<F>(map: F, domain: (f64, f64)) -> Self
    where
        F: Fn(&Jet3) -> Result<CJet> + Send + Sync + 'static,
    {
        PlaneCurve {
            map: Arc::new(map),
            domain,
        }
    }

    pub fn from_shared(map: ComplexMap, domain: (f64, f64)) -> Self {
        PlaneCurve { map, domain }
    }

    /// `a·e^{is/a}`, the circle of radius `a` about the origin.
    pub fn circle(radius: f64) -> Self {
        PlaneCurve::new(
            move |s| Ok(CJet::unit_phase(&s.scale(1.0 / radius)).scale(radius)),
            (-10.0, 10.0),
        )
    }

    /// `r + s·i`, a vertical line at distance `r` from the origin.
    pub fn vertical_line(r: f64) -> Self {
        PlaneCurve::new(
            move |s| Ok(CJet::new(s.constant_like(r), s.clone())),
            (-10.0, 10.0),
        )
    }

    /// `e^{i∫₀ˢμ}/√(μ² + k²)` from flat-ambient structure functions.
    pub fn from_structure(sf: &StructureFunctions) -> Result<Self> {
        if sf.eps() != 0 {
            return Err(Error::usage("plane profile curves need flat structure functions"));
        }
        let src = sf.clone();
        Ok(PlaneCurve::new(
            move |s| {
                let p = src.jets(s.value())?;
                let modulus = (&p.mu * &p.mu + &p.k * &p.k).sqrt()?.recip()?;
                let f = CJet::unit_phase(&src.phase_mu(s.value())?).mul_real(&modulus);
                Ok(f.pullback(s))
            },
            sf.domain(),
        ))
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn with_domain(mut self, domain: (f64, f64)) -> Self {
        self.domain = domain;
        self
    }

    pub fn shared_map(&self) -> ComplexMap {
        Arc::clone(&self.map)
    }

    /// Composes the curve with an arbitrary jet (for instance a chart coordinate).
    pub fn eval_jet(&self, s: &Jet3) -> Result<CJet> {
        (self.map)(s)
    }

    /// Order-3 univariate jet of F at `s`.
    pub fn jet(&self, s: f64) -> Result<CJet> {
        (self.map)(&Jet3::variable(1, 0, s))
    }

    pub fn value(&self, s: f64) -> Result<Complex64> {
        Ok(self.jet(s)?.value())
    }

    /// |F′(s)| − 1.
    pub fn unit_speed_residual(&self, s: f64) -> Result<f64> {
        Ok(self.jet(s)?.univariate_derivative(1).norm() - 1.0)
    }
}

struct AlphaJets {
    alpha: Jet3,
    discriminant: Jet3,
}

fn alpha_jets(f: &PlaneCurve, s: f64) -> Result<AlphaJets> {
    let alpha = f.jet(s)?.norm_sqr();
    let d_alpha = alpha.partial(0);
    let discriminant = alpha.scale(4.0).truncate(2) - &d_alpha * &d_alpha;
    if !(discriminant.value() > 0.0) {
        return Err(Error::DegenerateCurve {
            s,
            discriminant: discriminant.value(),
        });
    }
    Ok(AlphaJets {
        alpha,
        discriminant,
    })
}

/// κ = (2 − α″)/√(4α − α′²) and θ′ = √(4α − α′²)/(2α) with α = |F|².
pub fn curvature_and_argument(f: &PlaneCurve, s: f64) -> Result<CurvatureArgument> {
    let a = alpha_jets(f, s)?;
    let root = a.discriminant.value().sqrt();
    Ok(CurvatureArgument {
        curvature: (2.0 - a.alpha.univariate_derivative(2)) / root,
        arg_rate: root / (2.0 * a.alpha.value()),
    })
}

/// θ″ − (κ − 2θ′)(ln|F|)′, which vanishes for every admissible curve.
pub fn theta2_residual(f: &PlaneCurve, s: f64) -> Result<f64> {
    let a = alpha_jets(f, s)?;
    let root = a.discriminant.sqrt()?;
    let arg_rate = root.checked_div(&a.alpha.truncate(2).scale(2.0))?;
    let curvature = (2.0 - a.alpha.univariate_derivative(2)) / root.value();
    let log_rate = a.alpha.univariate_derivative(1) / (2.0 * a.alpha.value());
    Ok(arg_rate.univariate_derivative(1) - (curvature - 2.0 * arg_rate.value()) * log_rate)
}

/// Arc-length reparametrisation of a regular curve `g` on `[t0, t1]`.
///
/// The result is parametrised by `s ∈ [0, L]` with `s = 0` at `t0`. The
/// derivatives of the inverse `t(s)` follow from those of the arc length, so
/// the composite stays an exact jet.
pub fn reparametrize_unit_speed<G>(g: G, t0: f64, t1: f64) -> Result<PlaneCurve>
where
    G: Fn(&Jet3) -> Result<CJet> + Send + Sync + 'static,
{
    if !(t1 > t0) {
        return Err(Error::usage(format!("empty parameter interval [{t0}, {t1}]")));
    }
    let g: ComplexMap = Arc::new(g);
    let speed = {
        let g = Arc::clone(&g);
        move |t: f64| -> Result<f64> {
            let d = g(&Jet3::variable(1, 0, t))?.univariate_derivative(1).norm();
            if !(d > 0.0) {
                return Err(Error::DegenerateChart(format!(
                    "curve is not regular at t = {t}"
                )));
            }
            Ok(d)
        }
    };
    let table = Arc::new(CumulativeIntegral::new(&speed, t0, t0, t1, 1e-13)?);
    let length = table.eval(&speed, t1)?;

    let inverse = {
        let g = Arc::clone(&g);
        let table = Arc::clone(&table);
        move |s: f64| -> Result<[f64; 4]> {
            // Newton on σ(t) = s, safeguarded by bisection inside [t0, t1]
            let (mut lo, mut hi) = (t0, t1);
            let mut t = t0 + (t1 - t0) * (s / length).clamp(0.0, 1.0);
            for _ in 0..100 {
                let resid = table.eval(&speed, t)? - s;
                if resid > 0.0 {
                    hi = t;
                } else {
                    lo = t;
                }
                let step = resid / speed(t)?;
                let mut next = t - step;
                if !(next > lo && next < hi) {
                    next = 0.5 * (lo + hi);
                }
                let done = (next - t).abs() <= 1e-15 * (1.0 + t.abs());
                t = next;
                if done || resid.abs() < 1e-14 {
                    break;
                }
            }
            let speed_jet = g(&Jet3::variable(1, 0, t))?.partial_speed()?;
            let (v1, v2, v3) = (
                speed_jet.univariate_derivative(0),
                speed_jet.univariate_derivative(1),
                speed_jet.univariate_derivative(2),
            );
            Ok([
                t,
                1.0 / v1,
                -v2 / v1.powi(3),
                (3.0 * v2 * v2 - v1 * v3) / v1.powi(5),
            ])
        }
    };

    Ok(PlaneCurve::new(
        move |s: &Jet3| {
            let t = inverse(s.value())?;
            g(&s.chain(t))
        },
        (0.0, length),
    ))
}

trait SpeedJet {
    fn partial_speed(&self) -> Result<Jet3>;
}

impl SpeedJet for CJet {
    /// |∂F| as an order-2 jet.
    fn partial_speed(&self) -> Result<Jet3> {
        let dre = self.re.partial(0);
        let dim = self.im.partial(0);
        (&dre * &dre + &dim * &dim).sqrt()
    }
}
