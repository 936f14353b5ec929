//! The catalog of tangentially biharmonic Lagrangian H-umbilical families and
//! a single entry point that builds any of them from a [`FamilySpec`].

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::curves::PlaneCurve;
use crate::error::{Error, Result};
use crate::immersion::{
    build_complex_extensor, build_cylinder, build_flat_hyperbolic, build_null_branch_hyperbolic,
    build_profile_extensor, build_sech_hyperbolic, lift_with_hyperboloid, lift_with_sphere,
    Immersion,
};
use crate::legendre::{build_legendre_hyperbolic, build_legendre_sphere, HyperbolicBranch};
use crate::ode::{
    integrate_coupled, integrate_first_order, integrate_null_branch, ratio_roots, Event,
    EventKind, FirstOrderLaw, Rational,
};
use crate::structure::StructureFunctions;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ambient {
    /// ℂPⁿ(4), ε = 1.
    ComplexProjective,
    /// ℂⁿ, ε = 0.
    Flat,
    /// ℂHⁿ(−4), ε = −1.
    ComplexHyperbolic,
}

impl Ambient {
    pub fn eps(self) -> i8 {
        match self {
            Ambient::ComplexProjective => 1,
            Ambient::Flat => 0,
            Ambient::ComplexHyperbolic => -1,
        }
    }

    fn prefix(self) -> &'static str {
        match self {
            Ambient::ComplexProjective => "CP",
            Ambient::Flat => "C",
            Ambient::ComplexHyperbolic => "CH",
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Ambient::ComplexProjective => "CP^n(4)",
            Ambient::Flat => "C^n",
            Ambient::ComplexHyperbolic => "CH^n(-4)",
        }
    }

    fn case_count(self) -> u8 {
        match self {
            Ambient::ComplexProjective => 5,
            Ambient::Flat => 6,
            Ambient::ComplexHyperbolic => 15,
        }
    }
}

/// A case label such as `CP.2`, `C.4` or `CH.15`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct CaseId {
    pub ambient: Ambient,
    pub index: u8,
}

impl CaseId {
    pub fn new(ambient: Ambient, index: u8) -> Result<Self> {
        if index == 0 || index > ambient.case_count() {
            return Err(Error::usage(format!(
                "{} has cases 1 to {}, got {index}",
                ambient.prefix(),
                ambient.case_count()
            )));
        }
        Ok(CaseId { ambient, index })
    }

    /// All 26 cases in catalog order.
    pub fn all() -> Vec<CaseId> {
        [Ambient::ComplexProjective, Ambient::Flat, Ambient::ComplexHyperbolic]
            .into_iter()
            .flat_map(|a| (1..=a.case_count()).map(move |i| CaseId { ambient: a, index: i }))
            .collect()
    }

    pub fn eps(self) -> i8 {
        self.ambient.eps()
    }

    pub fn info(self) -> CaseInfo {
        catalog_row(self)
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.ambient.prefix(), self.index)
    }
}

impl FromStr for CaseId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::usage(format!("unknown case identifier {s:?}"));
        let (head, tail) = s.trim().split_once('.').ok_or_else(bad)?;
        let ambient = match head.to_ascii_uppercase().as_str() {
            "CP" => Ambient::ComplexProjective,
            "C" => Ambient::Flat,
            "CH" => Ambient::ComplexHyperbolic,
            _ => return Err(bad()),
        };
        let index: u8 = tail.parse().map_err(|_| bad())?;
        CaseId::new(ambient, index).map_err(|_| bad())
    }
}

impl From<CaseId> for String {
    fn from(c: CaseId) -> String {
        c.to_string()
    }
}

impl TryFrom<String> for CaseId {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// How the ratio λ/μ of a case depends on n and its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioLaw {
    Zero,
    One,
    Two,
    /// (7 − n)/3.
    SevenMinusNThirds,
    /// 1 − n.
    OneMinusN,
    /// 1 − μ⁻².
    OneMinusInverseSquare,
    /// 1 + μ⁻².
    OnePlusInverseSquare,
    /// Not a constant multiple (coupled profiles); for the cylinder μ = 0.
    None,
}

impl RatioLaw {
    pub fn symbol(self) -> &'static str {
        match self {
            RatioLaw::Zero => "0",
            RatioLaw::One => "1",
            RatioLaw::Two => "2",
            RatioLaw::SevenMinusNThirds => "(7-n)/3",
            RatioLaw::OneMinusN => "1-n",
            RatioLaw::OneMinusInverseSquare => "1-mu^-2",
            RatioLaw::OnePlusInverseSquare => "1+mu^-2",
            RatioLaw::None => "-",
        }
    }

    /// Ratio for dimension `n` and constant μ (used by the two μ-dependent laws).
    pub fn value(self, n: usize, mu: Option<f64>) -> Option<f64> {
        let nf = n as f64;
        match self {
            RatioLaw::Zero => Some(0.0),
            RatioLaw::One => Some(1.0),
            RatioLaw::Two => Some(2.0),
            RatioLaw::SevenMinusNThirds => Some((7.0 - nf) / 3.0),
            RatioLaw::OneMinusN => Some(1.0 - nf),
            RatioLaw::OneMinusInverseSquare => mu.map(|m| 1.0 - 1.0 / (m * m)),
            RatioLaw::OnePlusInverseSquare => mu.map(|m| 1.0 + 1.0 / (m * m)),
            RatioLaw::None => None,
        }
    }

    /// The cubic root this law corresponds to, if any.
    fn root(self, n: usize) -> Option<Rational> {
        let n = n as i64;
        match self {
            RatioLaw::Zero => Some(Rational::new(0, 1)),
            RatioLaw::SevenMinusNThirds => Some(Rational::new(7 - n, 3)),
            RatioLaw::OneMinusN => Some(Rational::new(1 - n, 1)),
            _ => None,
        }
    }
}

/// Constancy of |H| as stated for a case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeanCurvatureLabel {
    Constant,
    NonConstant,
    Unstated,
}

impl MeanCurvatureLabel {
    pub fn symbol(self) -> &'static str {
        match self {
            MeanCurvatureLabel::Constant => "constant",
            MeanCurvatureLabel::NonConstant => "non-constant",
            MeanCurvatureLabel::Unstated => "unstated",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    Cylinder,
    CircleExtensor,
    LineExtensor,
    ExtensorFirstOrder,
    ExtensorCoupled,
    SphereLiftConstant,
    SphereLiftFirstOrder,
    SphereLiftCoupled,
    HyperboloidLiftConstant,
    HyperboloidLiftFirstOrder,
    HyperboloidLiftCoupled,
    FlatRatioTwo,
    SechProfile,
    NullBranch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CaseInfo {
    pub id: CaseId,
    pub ratio: RatioLaw,
    pub mean_curvature: MeanCurvatureLabel,
    pub construction: Construction,
    /// Parameter signature shown by `list-families`.
    pub params: &'static str,
    /// Dimension restriction, if any.
    pub restriction: Option<&'static str>,
    /// Required sign of the integration constant c.
    pub c_sign: Option<i8>,
}

fn catalog_row(id: CaseId) -> CaseInfo {
    use Construction::*;
    use MeanCurvatureLabel::*;
    use RatioLaw as R;
    let (ratio, label, construction, params, c_sign): (RatioLaw, _, _, &'static str, _) =
        match (id.ambient, id.index) {
            (Ambient::ComplexProjective, 1) => (R::OneMinusInverseSquare, Constant, SphereLiftConstant, "mu != 0", None),
            (Ambient::ComplexProjective, 2) => (R::Zero, NonConstant, SphereLiftFirstOrder, "c>0, mu0, sign0", Some(1)),
            (Ambient::ComplexProjective, 3) => (R::SevenMinusNThirds, NonConstant, SphereLiftFirstOrder, "c>0, mu0, sign0", Some(1)),
            (Ambient::ComplexProjective, 4) => (R::OneMinusN, NonConstant, SphereLiftFirstOrder, "c>0, mu0, sign0", Some(1)),
            (Ambient::ComplexProjective, 5) => (R::None, NonConstant, SphereLiftCoupled, "lambda0, mu0, dmu0", None),
            (Ambient::Flat, 1) => (R::None, Constant, Cylinder, "a>0", None),
            (Ambient::Flat, 2) => (R::One, Constant, CircleExtensor, "a>0", None),
            (Ambient::Flat, 3) => (R::Zero, NonConstant, LineExtensor, "a>0 (distance to origin)", None),
            (Ambient::Flat, 4) => (R::SevenMinusNThirds, Unstated, ExtensorFirstOrder, "c, mu0, sign0", None),
            (Ambient::Flat, 5) => (R::OneMinusN, Unstated, ExtensorFirstOrder, "c, mu0, sign0", None),
            (Ambient::Flat, 6) => (R::None, Unstated, ExtensorCoupled, "lambda0, mu0, dmu0 | curve=whitney", None),
            (Ambient::ComplexHyperbolic, 1) => (R::Two, Constant, FlatRatioTwo, "-", None),
            (Ambient::ComplexHyperbolic, 2) => (R::OnePlusInverseSquare, Constant, SphereLiftConstant, "mu^2>1", None),
            (Ambient::ComplexHyperbolic, 3) => (R::Zero, NonConstant, SphereLiftFirstOrder, "c>0, mu0, sign0", Some(1)),
            (Ambient::ComplexHyperbolic, 4) => (R::SevenMinusNThirds, NonConstant, SphereLiftFirstOrder, "c>0, mu0, sign0", Some(1)),
            (Ambient::ComplexHyperbolic, 5) => (R::OneMinusN, NonConstant, SphereLiftFirstOrder, "c>0, mu0, sign0", Some(1)),
            (Ambient::ComplexHyperbolic, 6) => (R::None, NonConstant, SphereLiftCoupled, "lambda0, mu0, dmu0; mu^2+k^2>1", None),
            (Ambient::ComplexHyperbolic, 7) => (R::OnePlusInverseSquare, Constant, HyperboloidLiftConstant, "0<mu^2<1", None),
            (Ambient::ComplexHyperbolic, 8) => (R::Zero, NonConstant, HyperboloidLiftFirstOrder, "c<0, mu0, sign0", Some(-1)),
            (Ambient::ComplexHyperbolic, 9) => (R::SevenMinusNThirds, NonConstant, HyperboloidLiftFirstOrder, "c<0, mu0, sign0", Some(-1)),
            (Ambient::ComplexHyperbolic, 10) => (R::OneMinusN, NonConstant, HyperboloidLiftFirstOrder, "c<0, mu0, sign0", Some(-1)),
            (Ambient::ComplexHyperbolic, 11) => (R::None, NonConstant, HyperboloidLiftCoupled, "lambda0, mu0, dmu0; mu^2+k^2<1", None),
            (Ambient::ComplexHyperbolic, 12) => (R::Zero, NonConstant, SechProfile, "phase", None),
            (Ambient::ComplexHyperbolic, 13) => (R::SevenMinusNThirds, NonConstant, SechProfile, "phase", None),
            (Ambient::ComplexHyperbolic, 14) => (R::OneMinusN, NonConstant, SechProfile, "phase", None),
            (Ambient::ComplexHyperbolic, 15) => (R::None, NonConstant, NullBranch, "lambda0, mu0, k0; mu0^2+k0^2=1", None),
            _ => unreachable!("case ids are validated on construction"),
        };
    let restriction = match ratio {
        R::SevenMinusNThirds => Some("n != 7"),
        R::OneMinusN => Some("n != 2"),
        _ => None,
    };
    CaseInfo { id, ratio, mean_curvature: label, construction, params, restriction, c_sign }
}

/// Case parameters; unset fields take the catalog defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyParams {
    /// Radius (C.1, C.2) or distance of the line to the origin (C.3).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    /// Integration constant of the first-order law.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    /// Constant μ of the closed-form lifts.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu0: Option<f64>,
    /// Sign of μ′(0) for first-order laws.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sign0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda0: Option<f64>,
    /// μ′(0) for the coupled system.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dmu0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k0: Option<f64>,
    /// Phase constant of the sech profile.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase: Option<f64>,
    /// Interval of the arc length.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub span: Option<(f64, f64)>,
    /// Named curve replacing the default profile; only `whitney` (κ = 3θ′) is known.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curve: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub case: CaseId,
    pub n: usize,
    pub params: FamilyParams,
}

/// Ratio of the κ = 3θ′ negative control.
pub const WHITNEY_RATIO: f64 = 3.0;

impl FamilySpec {
    pub fn new(case: CaseId, n: usize) -> Self {
        FamilySpec { case, n, params: FamilyParams::default() }
    }

    pub fn with_params(case: CaseId, n: usize, params: FamilyParams) -> Self {
        FamilySpec { case, n, params }
    }

    pub fn eps(&self) -> i8 {
        self.case.eps()
    }

    pub fn info(&self) -> CaseInfo {
        self.case.info()
    }

    pub fn is_whitney(&self) -> bool {
        self.params.curve.as_deref() == Some("whitney")
    }

    /// The parameters with every catalog default filled in.
    pub fn resolved(&self) -> Result<FamilyParams> {
        use Construction::*;
        let p = &self.params;
        let info = self.info();
        let mut out = FamilyParams { span: p.span, ..Default::default() };
        if let Some(curve) = &p.curve {
            if curve != "whitney" || self.case.to_string() != "C.6" {
                return Err(Error::usage(format!(
                    "curve {curve:?} is not available for {}; only C.6 accepts curve=whitney",
                    self.case
                )));
            }
            out.curve = Some(curve.clone());
        }
        let default_span = |s: (f64, f64)| Some(p.span.unwrap_or(s));
        match info.construction {
            Cylinder | CircleExtensor | LineExtensor => {
                out.a = Some(p.a.unwrap_or(match self.case.index {
                    2 => 2.0,
                    _ => 1.0,
                }));
                out.span = default_span((-1.0, 1.0));
            }
            ExtensorFirstOrder | SphereLiftFirstOrder | HyperboloidLiftFirstOrder => {
                let (c, mu0) = self.first_order_defaults();
                out.c = Some(p.c.unwrap_or(c));
                out.mu0 = Some(p.mu0.unwrap_or(mu0));
                out.sign0 = Some(p.sign0.unwrap_or(1.0));
                out.span = default_span(if self.case.to_string() == "CP.2" {
                    (-2.0, 2.0)
                } else {
                    (-1.0, 1.0)
                });
            }
            ExtensorCoupled if self.is_whitney() => {
                out.c = Some(p.c.unwrap_or(1.0));
                out.mu0 = Some(p.mu0.unwrap_or(0.5));
                out.sign0 = Some(p.sign0.unwrap_or(1.0));
                out.span = default_span((-1.0, 1.0));
            }
            ExtensorCoupled | SphereLiftCoupled | HyperboloidLiftCoupled => {
                let (l0, m0, d0) = match info.construction {
                    SphereLiftCoupled if self.eps() == -1 => (0.5, 1.5, 0.2),
                    _ => (1.0, 0.3, 0.1),
                };
                out.lambda0 = Some(p.lambda0.unwrap_or(l0));
                out.mu0 = Some(p.mu0.unwrap_or(m0));
                out.dmu0 = Some(p.dmu0.unwrap_or(d0));
                out.span = default_span((-1.0, 1.0));
            }
            SphereLiftConstant | HyperboloidLiftConstant => {
                let d = if info.construction == HyperboloidLiftConstant { 0.5 } else { 2.0 };
                out.mu = Some(p.mu.unwrap_or(d));
                out.span = default_span((-3.0, 3.0));
            }
            FlatRatioTwo => out.span = default_span((-3.0, 3.0)),
            SechProfile => {
                out.phase = Some(p.phase.unwrap_or(0.0));
                out.span = default_span((-1.5, 1.5));
            }
            NullBranch => {
                out.lambda0 = Some(p.lambda0.unwrap_or(1.5));
                out.mu0 = Some(p.mu0.unwrap_or(0.6));
                out.k0 = Some(p.k0.unwrap_or(0.8));
                out.span = default_span((-1.0, 1.0));
            }
        }
        Ok(out)
    }

    /// (c, μ₀) for first-order cases. Unless the case pins c, it is solved from
    /// Φ(μ₀) = (r−2)²μ₀²k₀², i.e. k(0)² = k₀², with k₀² = 1 on type I of ℂHⁿ and ½ otherwise.
    fn first_order_defaults(&self) -> (f64, f64) {
        if (self.case.ambient, self.case.index) == (Ambient::ComplexProjective, 2) {
            return (10.0, 1.0);
        }
        let mu0 = self.params.mu0.unwrap_or(0.5);
        let ratio = self.info().ratio.value(self.n, None).unwrap_or(0.0);
        let k0_sq = if self.info().c_sign == Some(1) && self.eps() == -1 { 1.0 } else { 0.5 };
        let gap = ratio - 2.0;
        let p = 2.0 * (ratio - 3.0) / gap;
        let c = gap * gap * mu0 * mu0 * (mu0 * mu0 + self.eps() as f64 + k0_sq) / mu0.powf(p);
        (c, mu0)
    }

    /// The ratio the case prescribes, once n and μ are known.
    pub fn expected_ratio(&self) -> Result<Option<f64>> {
        if self.is_whitney() {
            return Ok(Some(WHITNEY_RATIO));
        }
        let p = self.resolved()?;
        Ok(self.info().ratio.value(self.n, p.mu))
    }

    /// Validates n, the case gates and parameter signs.
    pub fn validate(&self) -> Result<FamilyParams> {
        let info = self.info();
        if self.n < 2 {
            return Err(Error::usage(format!("dimension must be at least 2, got {}", self.n)));
        }
        let p = self.resolved()?;
        if let Some(root) = info.ratio.root(self.n) {
            let roots = ratio_roots(self.n)?;
            let admissible = roots.iter().any(|r| r.ratio == root && !r.excluded);
            let merged = info.ratio == RatioLaw::SevenMinusNThirds && self.n == 7;
            if !admissible || merged {
                return Err(Error::usage(format!(
                    "{} requires {}",
                    self.case,
                    info.restriction.unwrap_or("an admissible ratio")
                )));
            }
        }
        if let (Some(sign), Some(c)) = (info.c_sign, p.c) {
            if !(c * sign as f64 > 0.0) {
                let want = if sign > 0 { "c > 0" } else { "c < 0" };
                return Err(Error::usage(format!("{} requires {want}, got c = {c}", self.case)));
            }
        }
        if let Some(a) = p.a {
            if !(a > 0.0) {
                return Err(Error::usage(format!("{} requires a > 0, got {a}", self.case)));
            }
        }
        if let Some(mu) = p.mu {
            let ok = match info.construction {
                Construction::SphereLiftConstant if self.eps() == -1 => mu * mu > 1.0,
                Construction::HyperboloidLiftConstant => mu * mu < 1.0 && mu != 0.0,
                _ => mu != 0.0,
            };
            if !ok {
                return Err(Error::usage(format!(
                    "{} requires {}, got mu = {mu}",
                    self.case, info.params
                )));
            }
        }
        if let Some((lo, hi)) = p.span {
            if !(lo < 0.0 && 0.0 < hi) {
                return Err(Error::usage(format!("span [{lo}, {hi}] must contain 0 in its interior")));
            }
        }
        Ok(p)
    }
}

/// Margin kept inside an admissible interval found by bisection.
const BRANCH_MARGIN: f64 = 0.02;

fn shrink(full: (f64, f64), found: (f64, f64)) -> (f64, f64) {
    let lo = if found.0 > full.0 { found.0 * (1.0 - BRANCH_MARGIN) } else { found.0 };
    let hi = if found.1 < full.1 { found.1 * (1.0 - BRANCH_MARGIN) } else { found.1 };
    (lo, hi)
}

fn restrict_to(sf: StructureFunctions, indicator: impl Fn([f64; 3]) -> f64) -> Result<(StructureFunctions, bool)> {
    let full = sf.domain();
    let found = sf.admissible_interval(indicator)?;
    let dom = shrink(full, found);
    if dom == full {
        return Ok((sf, false));
    }
    Ok((sf.restrict(dom)?, true))
}

fn first_order_profile(ratio: f64, eps: i8, p: &FamilyParams) -> Result<(StructureFunctions, Vec<Event>)> {
    let law = FirstOrderLaw::new(ratio, eps, p.c.expect("resolved"))?;
    let sol = integrate_first_order(&law, p.mu0.expect("resolved"), p.sign0.expect("resolved"), p.span.expect("resolved"))?;
    let events = sol.events().to_vec();
    Ok((StructureFunctions::first_order(&law, Arc::new(sol))?, events))
}

fn note_events(out: &mut Immersion, events: Vec<Event>) {
    for e in &events {
        if let EventKind::Singular { quantity } = &e.kind {
            out.notices.push(format!("integration stopped at s = {} where {quantity} became singular", e.s));
        }
        if let EventKind::TurningPoint { .. } = e.kind {
            out.notices.push(format!("turning point kept in the domain at s = {}", e.s));
        }
    }
    out.events = events;
}

/// Extensor over the plane curve of a first-order law with the given ratio.
///
/// The ratio must be one of the roots admitted for n.
pub fn build_extensor_ratio_family(ratio: f64, n: usize, c: f64, mu0: f64, sign0: f64, span: (f64, f64)) -> Result<Immersion> {
    let admissible = ratio_roots(n)?
        .iter()
        .any(|r| !r.excluded && (r.ratio.to_f64() - ratio).abs() < 1e-12);
    if !admissible {
        return Err(Error::usage(format!("ratio {ratio} is not admitted for n = {n}")));
    }
    extensor_for_law(ratio, n, c, mu0, sign0, span)
}

fn extensor_for_law(ratio: f64, n: usize, c: f64, mu0: f64, sign0: f64, span: (f64, f64)) -> Result<Immersion> {
    let params = FamilyParams { c: Some(c), mu0: Some(mu0), sign0: Some(sign0), span: Some(span), ..Default::default() };
    let (sf, events) = first_order_profile(ratio, 0, &params)?;
    let mut notices = Vec::new();
    let sf = tame(sf, None, &mut notices)?;
    let mut out = build_profile_extensor(&sf, n)?;
    out.notices.extend(notices);
    note_events(&mut out, events);
    Ok(out)
}

/// Builds the chart of any catalog case.
pub fn build_family(spec: &FamilySpec) -> Result<Immersion> {
    use Construction::*;
    let p = spec.validate()?;
    let info = spec.info();
    let n = spec.n;
    let eps = spec.eps();
    let ratio = info.ratio.value(n, p.mu);
    let span = p.span.expect("resolved");
    let mut out = match info.construction {
        Cylinder => {
            let a = p.a.expect("resolved");
            let mut out = build_cylinder(a, n)?;
            out.profile = Some(StructureFunctions::constant(1.0 / a, 0.0, 0, (-3.0, 3.0))?);
            out
        }
        CircleExtensor => {
            let a = p.a.expect("resolved");
            let mut out = build_complex_extensor(&PlaneCurve::circle(a).with_domain(span), n)?;
            out.profile = Some(StructureFunctions::constant(1.0 / a, 1.0 / a, 0, span)?);
            out
        }
        LineExtensor => {
            let a = p.a.expect("resolved");
            let curve = PlaneCurve::vertical_line(a).with_domain(span);
            let mut out = build_complex_extensor(&curve, n)?;
            out.profile = Some(line_profile(a, span)?);
            out
        }
        ExtensorFirstOrder => extensor_for_law(
            ratio.expect("fixed ratio"),
            n,
            p.c.expect("resolved"),
            p.mu0.expect("resolved"),
            p.sign0.expect("resolved"),
            span,
        )?,
        ExtensorCoupled if spec.is_whitney() => {
            let mut out = extensor_for_law(
                WHITNEY_RATIO,
                n,
                p.c.expect("resolved"),
                p.mu0.expect("resolved"),
                p.sign0.expect("resolved"),
                span,
            )?;
            out.notices.push("negative control: κ = 3θ′ is not tangentially biharmonic".into());
            out
        }
        ExtensorCoupled => {
            let sol = integrate_coupled(n, 0, p.lambda0.unwrap(), p.mu0.unwrap(), p.dmu0.unwrap(), span)?;
            let events = sol.events().to_vec();
            let sf = StructureFunctions::coupled(Arc::new(sol), 0)?;
            let mut notices = Vec::new();
            let sf = tame(sf, None, &mut notices)?;
            let mut out = build_profile_extensor(&sf, n)?;
            out.notices.extend(notices);
            note_events(&mut out, events);
            out
        }
        SphereLiftConstant | HyperboloidLiftConstant => {
            let mu = p.mu.expect("resolved");
            let lambda = ratio.expect("fixed ratio") * mu;
            let sf = StructureFunctions::constant(lambda, mu, eps, span)?;
            lift_profile(&sf, info.construction, n)?
        }
        SphereLiftFirstOrder | HyperboloidLiftFirstOrder => {
            let (sf, events) = first_order_profile(ratio.expect("fixed ratio"), eps, &p)?;
            let mut out = restricted_lift(sf, info.construction, n)?;
            note_events(&mut out, events);
            out
        }
        SphereLiftCoupled | HyperboloidLiftCoupled => {
            let sol = integrate_coupled(n, eps, p.lambda0.unwrap(), p.mu0.unwrap(), p.dmu0.unwrap(), span)?;
            let events = sol.events().to_vec();
            let sf = StructureFunctions::coupled(Arc::new(sol), eps)?;
            let mut out = restricted_lift(sf, info.construction, n)?;
            note_events(&mut out, events);
            out
        }
        FlatRatioTwo => build_flat_hyperbolic(n)?,
        SechProfile => {
            let r = ratio.expect("fixed ratio");
            let mut out = build_sech_hyperbolic(r, n, span)?;
            if p.phase != Some(0.0) {
                return Err(Error::NotSupported("the explicit sech lift is written for phase 0".into()));
            }
            out.notices.push(format!("sech profile μ = sech({}s)", r - 2.0));
            out
        }
        NullBranch => {
            let sol = integrate_null_branch(n, p.lambda0.unwrap(), p.mu0.unwrap(), p.k0.unwrap(), span)?;
            let events = sol.events().to_vec();
            let sf = StructureFunctions::direct(Arc::new(sol), -1)?;
            let mut out = build_null_branch_hyperbolic(&sf, n)?;
            note_events(&mut out, events);
            out
        }
    };
    if ratio == Some(1.0 - n as f64) {
        out.notices.push("λ + (n−1)μ vanishes identically for ratio 1−n, so H = 0".into());
    }
    Ok(out)
}

/// λ = 0, μ = a/(a² + s²), k = s/(a² + s²) for the line a + is.
fn line_profile(a: f64, span: (f64, f64)) -> Result<StructureFunctions> {
    StructureFunctions::from_jets(
        move |s| {
            let x = crate::kernel::Jet3::variable(1, 0, s);
            let q = (&x * &x).add_scalar(a * a).recip()?;
            Ok(crate::ode::ProfileJets { lambda: x.constant_like(0.0), mu: q.scale(a), k: &x * &q })
        },
        0,
        span,
        crate::structure::Provenance::ClosedForm,
    )
}

fn lift_profile(sf: &StructureFunctions, construction: Construction, n: usize) -> Result<Immersion> {
    match (construction, sf.eps()) {
        (Construction::SphereLiftConstant | Construction::SphereLiftFirstOrder | Construction::SphereLiftCoupled, 1) => {
            lift_with_sphere(&build_legendre_sphere(sf)?, n)
        }
        (Construction::SphereLiftConstant | Construction::SphereLiftFirstOrder | Construction::SphereLiftCoupled, _) => {
            lift_with_sphere(&build_legendre_hyperbolic(sf, HyperbolicBranch::I)?, n)
        }
        _ => lift_with_hyperboloid(&build_legendre_hyperbolic(sf, HyperbolicBranch::II)?, n),
    }
}

/// μ is kept within [μ₀/FLOOR, CAP·max(μ₀, 1)] so blow-ups and exponential tails stay outside the chart.
const MU_FLOOR: f64 = 4.0;
const MU_CAP: f64 = 4.0;
/// Smallest |μ² + k² − 1| kept for ℂHⁿ lifts; the normalisation amplifies errors by its inverse.
const BRANCH_GAP: f64 = 0.05;

/// Shrinks an ODE profile to the interval around s = 0 where μ stays in its band and,
/// for ℂHⁿ lifts, μ² + k² − 1 keeps its sign with margin.
fn tame(sf: StructureFunctions, branch_sign: Option<f64>, notices: &mut Vec<String>) -> Result<StructureFunctions> {
    let mu0 = sf.values(0.0)?[1];
    let (lo_mu, hi_mu) = (mu0 / MU_FLOOR, MU_CAP * mu0.max(1.0));
    let (sf, restricted) = restrict_to(sf, move |[_, m, k]| {
        let mut v = (m - lo_mu).min(hi_mu - m);
        if let Some(sign) = branch_sign {
            v = v.min(sign * (m * m + k * k - 1.0) - BRANCH_GAP);
        }
        v
    })?;
    if restricted {
        let (lo, hi) = sf.domain();
        notices.push(format!("profile domain restricted to [{lo:.6}, {hi:.6}]"));
    }
    Ok(sf)
}

fn branch_sign(construction: Construction, eps: i8) -> Option<f64> {
    match (construction, eps) {
        (_, 1) | (_, 0) => None,
        (Construction::HyperboloidLiftFirstOrder | Construction::HyperboloidLiftCoupled, _) => Some(-1.0),
        _ => Some(1.0),
    }
}

/// Lift after shrinking the domain to a well-conditioned piece of the branch containing s = 0.
fn restricted_lift(sf: StructureFunctions, construction: Construction, n: usize) -> Result<Immersion> {
    let mut notices = Vec::new();
    let sign = branch_sign(construction, sf.eps());
    let sf = tame(sf, sign, &mut notices)?;
    let mut out = lift_profile(&sf, construction, n)?;
    out.notices.extend(notices);
    Ok(out)
}
