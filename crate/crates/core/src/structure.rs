//! Structure functions (λ, μ, k) of an H-umbilical submanifold along the arc length s.

use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{integral_jet, Jet3, RunningIntegral};
use crate::ode::{sech_family_jets, DenseSolution, FirstOrderLaw, ProfileJets};

/// Order-3 jets of (λ, μ, k) at a base point.
pub type ProfileMap = Arc<dyn Fn(f64) -> Result<ProfileJets> + Send + Sync>;
/// Values (λ, μ, k) at a base point.
pub type ValueMap = Arc<dyn Fn(f64) -> Result<[f64; 3]> + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    OdeSolution,
}

/// λ, μ, k on an interval of the arc length together with the phase integrals
/// ∫₀ˢ μ and ∫₀ˢ (λ − μ).
#[derive(Clone)]
pub struct StructureFunctions {
    jets: ProfileMap,
    values: ValueMap,
    eps: i8,
    domain: (f64, f64),
    provenance: Provenance,
    // built on first use, so a domain that is about to be restricted is never integrated whole
    phases: Arc<Phases>,
}

#[derive(Default)]
struct Phases {
    mu: OnceLock<RunningIntegral>,
    gap: OnceLock<RunningIntegral>,
    k: OnceLock<RunningIntegral>,
}

impl fmt::Debug for StructureFunctions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StructureFunctions")
            .field("eps", &self.eps)
            .field("domain", &self.domain)
            .field("provenance", &self.provenance)
            .finish_non_exhaustive()
    }
}

fn univariate(s: f64) -> Jet3 {
    Jet3::variable(1, 0, s)
}

impl StructureFunctions {
    /// Builds from a jet map; values are read off the jets.
    pub fn from_jets<F>(jets: F, eps: i8, domain: (f64, f64), provenance: Provenance) -> Result<Self>
    where
        F: Fn(f64) -> Result<ProfileJets> + Send + Sync + 'static,
    {
        let jets: ProfileMap = Arc::new(jets);
        let j = Arc::clone(&jets);
        let values: ValueMap = Arc::new(move |s| {
            let p = j(s)?;
            Ok([p.lambda.value(), p.mu.value(), p.k.value()])
        });
        Self::assemble(jets, values, eps, domain, provenance)
    }

    fn assemble(
        jets: ProfileMap,
        values: ValueMap,
        eps: i8,
        domain: (f64, f64),
        provenance: Provenance,
    ) -> Result<Self> {
        if !matches!(eps, -1..=1) {
            return Err(Error::usage(format!("ε must be −1, 0 or 1, got {eps}")));
        }
        let (lo, hi) = domain;
        if !(lo <= 0.0 && 0.0 <= hi && lo < hi) {
            return Err(Error::usage(format!(
                "domain [{lo}, {hi}] must contain the base point s = 0"
            )));
        }
        Ok(StructureFunctions {
            phases: Arc::default(),
            jets,
            values,
            eps,
            domain,
            provenance,
        })
    }

    /// Constant λ and μ with k = 0.
    pub fn constant(lambda: f64, mu: f64, eps: i8, domain: (f64, f64)) -> Result<Self> {
        let jets: ProfileMap = Arc::new(move |s| {
            let x = univariate(s);
            Ok(ProfileJets {
                lambda: x.constant_like(lambda),
                mu: x.constant_like(mu),
                k: x.constant_like(0.0),
            })
        });
        let values: ValueMap = Arc::new(move |_| Ok([lambda, mu, 0.0]));
        Self::assemble(jets, values, eps, domain, Provenance::ClosedForm)
    }

    /// μ = sech((r−2)s + c), k = −tanh((r−2)s + c), λ = rμ.
    pub fn sech(ratio: f64, phase: f64, eps: i8, domain: (f64, f64)) -> Result<Self> {
        sech_family_jets(ratio, phase, &univariate(0.0))?;
        Self::from_jets(
            move |s| {
                let (mu, k) = sech_family_jets(ratio, phase, &univariate(s))?;
                Ok(ProfileJets { lambda: mu.scale(ratio), mu, k })
            },
            eps,
            domain,
            Provenance::ClosedForm,
        )
    }

    /// λ = rμ with μ from a solution of the first-order law on the state (μ, μ′),
    /// and k = μ′/((r−2)μ).
    pub fn first_order(law: &FirstOrderLaw, sol: Arc<DenseSolution>) -> Result<Self> {
        let ratio = law.ratio;
        let gap = ratio - 2.0;
        let domain = sol.domain();
        let jet_sol = Arc::clone(&sol);
        let jets: ProfileMap = Arc::new(move |s| {
            let y = jet_sol.jets(s)?;
            let k = y[1].checked_div(&y[0].scale(gap))?;
            Ok(ProfileJets { lambda: y[0].scale(ratio), mu: y[0].clone(), k })
        });
        let values: ValueMap = Arc::new(move |s| {
            let y = sol.state(s)?;
            Ok([ratio * y[0], y[0], y[1] / (gap * y[0])])
        });
        Self::assemble(jets, values, law.eps, domain, Provenance::OdeSolution)
    }

    /// A coupled solution on the state (λ, μ, μ′), with k = μ′/(λ−2μ).
    pub fn coupled(sol: Arc<DenseSolution>, eps: i8) -> Result<Self> {
        let domain = sol.domain();
        let jet_sol = Arc::clone(&sol);
        let jets: ProfileMap = Arc::new(move |s| {
            let y = jet_sol.jets(s)?;
            let k = y[2].checked_div(&(&y[0] - &y[1].scale(2.0)))?;
            Ok(ProfileJets { lambda: y[0].clone(), mu: y[1].clone(), k })
        });
        let values: ValueMap = Arc::new(move |s| {
            let y = sol.state(s)?;
            Ok([y[0], y[1], y[2] / (y[0] - 2.0 * y[1])])
        });
        Self::assemble(jets, values, eps, domain, Provenance::OdeSolution)
    }

    /// A solution on the state (λ, μ, k) itself, as produced on the null branch.
    pub fn direct(sol: Arc<DenseSolution>, eps: i8) -> Result<Self> {
        let domain = sol.domain();
        let jet_sol = Arc::clone(&sol);
        let jets: ProfileMap = Arc::new(move |s| {
            let y = jet_sol.jets(s)?;
            Ok(ProfileJets { lambda: y[0].clone(), mu: y[1].clone(), k: y[2].clone() })
        });
        let values: ValueMap = Arc::new(move |s| {
            let y = sol.state(s)?;
            Ok([y[0], y[1], y[2]])
        });
        Self::assemble(jets, values, eps, domain, Provenance::OdeSolution)
    }

    pub fn eps(&self) -> i8 {
        self.eps
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Shrinks the domain; the base point must stay inside.
    pub fn restrict(&self, domain: (f64, f64)) -> Result<Self> {
        let (lo, hi) = domain;
        if !(self.domain.0 <= lo && hi <= self.domain.1 && lo <= 0.0 && 0.0 <= hi && lo < hi) {
            return Err(Error::usage(format!(
                "[{lo}, {hi}] is not a subinterval of [{}, {}] around 0",
                self.domain.0, self.domain.1
            )));
        }
        let mut out = self.clone();
        out.domain = domain;
        out.phases = Arc::default();
        Ok(out)
    }

    fn phase_table<'a>(
        &'a self,
        cell: &'a OnceLock<RunningIntegral>,
        pick: fn([f64; 3]) -> f64,
    ) -> Result<&'a RunningIntegral> {
        if let Some(t) = cell.get() {
            return Ok(t);
        }
        let v = Arc::clone(&self.values);
        let table = RunningIntegral::new(move |s| Ok(pick(v(s)?)), 0.0, self.domain.0, self.domain.1)?;
        Ok(cell.get_or_init(|| table))
    }

    fn check(&self, s: f64) -> Result<()> {
        let (lo, hi) = self.domain;
        if s < lo || s > hi || !s.is_finite() {
            return Err(Error::domain(
                "structure functions",
                format!("s = {s} outside [{lo}, {hi}]"),
            ));
        }
        Ok(())
    }

    pub fn jets(&self, s: f64) -> Result<ProfileJets> {
        self.check(s)?;
        (self.jets)(s)
    }

    /// (λ, μ, k) at `s`.
    pub fn values(&self, s: f64) -> Result<[f64; 3]> {
        self.check(s)?;
        (self.values)(s)
    }

    /// ∫₀ˢ μ as a univariate jet.
    pub fn phase_mu(&self, s: f64) -> Result<Jet3> {
        let p = self.jets(s)?;
        let table = self.phase_table(&self.phases.mu, |v| v[1])?;
        Ok(integral_jet(table.value(s)?, &p.mu))
    }

    /// ∫₀ˢ (λ − μ) as a univariate jet.
    pub fn phase_gap(&self, s: f64) -> Result<Jet3> {
        let p = self.jets(s)?;
        let table = self.phase_table(&self.phases.gap, |v| v[0] - v[1])?;
        Ok(integral_jet(table.value(s)?, &(&p.lambda - &p.mu)))
    }

    /// ∫₀ˢ k as a univariate jet.
    pub fn phase_k(&self, s: f64) -> Result<Jet3> {
        let p = self.jets(s)?;
        let table = self.phase_table(&self.phases.k, |v| v[2])?;
        Ok(integral_jet(table.value(s)?, &p.k))
    }

    /// Value of ∫₀ˢ k alone, without derivative data.
    pub fn phase_k_value(&self, s: f64) -> Result<f64> {
        self.check(s)?;
        self.phase_table(&self.phases.k, |v| v[2])?.value(s)
    }

    /// Largest interval around 0 inside the domain on which `indicator(λ, μ, k) > 0`.
    ///
    /// The domain is scanned on a uniform grid and each sign change is refined
    /// by bisection; the returned endpoints sit just inside the zero set.
    pub fn admissible_interval<F>(&self, indicator: F) -> Result<(f64, f64)>
    where
        F: Fn([f64; 3]) -> f64,
    {
        let g = |s: f64| -> Result<f64> { Ok(indicator(self.values(s)?)) };
        if !(g(0.0)? > 0.0) {
            return Err(Error::Branch(format!(
                "condition fails at the base point (indicator {:e})",
                g(0.0)?
            )));
        }
        let (lo, hi) = self.domain;
        let scan = |end: f64| -> Result<f64> {
            const CELLS: usize = 400;
            let mut prev = 0.0;
            for i in 1..=CELLS {
                let s = if i == CELLS { end } else { end * i as f64 / CELLS as f64 };
                if !(g(s)? > 0.0) {
                    let (mut a, mut b) = (prev, s);
                    for _ in 0..60 {
                        let m = 0.5 * (a + b);
                        if g(m)? > 0.0 {
                            a = m;
                        } else {
                            b = m;
                        }
                    }
                    return Ok(a);
                }
                prev = s;
            }
            Ok(end)
        };
        Ok((scan(lo)?, scan(hi)?))
    }
}
