//! Charts of the classified submanifolds: maps into ℂⁿ for the flat ambient and
//! horizontal lifts into S^{2n+1}(1) ⊂ ℂ^{n+1} or H₁^{2n+1}(−1) ⊂ ℂ₁^{n+1}.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curves::PlaneCurve;
use crate::error::{Error, Result};
use crate::kernel::{integral_jet, jet_lift, CJet, Jet3, RunningIntegral, Signature};
use crate::legendre::LegendreCurve;
use crate::ode::Event;
use crate::structure::StructureFunctions;

/// Real ambient coordinates (interleaved real and imaginary parts) as jets of the chart variables.
pub type ChartMap = Arc<dyn Fn(&[Jet3]) -> Result<Vec<Jet3>> + Send + Sync>;

/// Minimum distance (in |sin| of an angle or |sinh ρ|) to a chart pole.
pub const POLE_TOL: f64 = 1e-6;
/// Largest unit-speed defect accepted from an extensor profile (ODE curves reach ~1e-7).
pub const UNIT_SPEED_TOL: f64 = 1e-6;
/// Margin kept between default grids and the poles of angle charts.
const ANGLE_MARGIN: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartKind {
    /// (s, angles on S^{n−1}).
    ProductWithSphere,
    /// (s, ρ, angles on S^{n−2}) parametrising y₁² − y₂² − ⋯ − yₙ² = 1.
    ProductWithHyperboloid,
    /// (s, u₂, …, uₙ) with Euclidean u-coordinates.
    Graph,
}

#[derive(Clone)]
pub struct ImmersionChart {
    n: usize,
    eps: i8,
    sig: Signature,
    kind: ChartKind,
    map: ChartMap,
    domain: Vec<(f64, f64)>,
}

impl fmt::Debug for ImmersionChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ImmersionChart")
            .field("n", &self.n)
            .field("eps", &self.eps)
            .field("sig", &self.sig)
            .field("kind", &self.kind)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

impl ImmersionChart {
    pub fn new(
        n: usize,
        eps: i8,
        kind: ChartKind,
        domain: Vec<(f64, f64)>,
        map: ChartMap,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::usage(format!("dimension must be at least 2, got {n}")));
        }
        if domain.len() != n {
            return Err(Error::usage("chart domain needs one interval per coordinate"));
        }
        let sig = match eps {
            0 => Signature::Euclidean(n),
            1 => Signature::Euclidean(n + 1),
            -1 => Signature::Lorentz(n + 1),
            _ => return Err(Error::usage(format!("ε must be −1, 0 or 1, got {eps}"))),
        };
        Ok(ImmersionChart { n, eps, sig, kind, map, domain })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn eps(&self) -> i8 {
        self.eps
    }

    pub fn sig(&self) -> Signature {
        self.sig
    }

    pub fn kind(&self) -> ChartKind {
        self.kind
    }

    pub fn is_lift(&self) -> bool {
        self.eps != 0
    }

    /// ⟨ψ, ψ⟩ required of lift charts.
    pub fn level(&self) -> Option<f64> {
        match self.eps {
            0 => None,
            e => Some(e as f64),
        }
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn with_domain(mut self, domain: Vec<(f64, f64)>) -> Result<Self> {
        if domain.len() != self.n {
            return Err(Error::usage("chart domain needs one interval per coordinate"));
        }
        self.domain = domain;
        Ok(self)
    }

    fn check(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.n {
            return Err(Error::usage(format!(
                "chart point has {} coordinates, expected {}",
                p.len(),
                self.n
            )));
        }
        for (i, (&x, &(lo, hi))) in p.iter().zip(&self.domain).enumerate() {
            if !(x >= lo && x <= hi) {
                return Err(Error::domain(
                    "chart",
                    format!("coordinate {i} = {x} outside [{lo}, {hi}]"),
                ));
            }
        }
        Ok(())
    }

    /// Order-3 jets of the real ambient coordinates at `p`.
    pub fn jets(&self, p: &[f64]) -> Result<Vec<Jet3>> {
        self.check(p)?;
        let out = jet_lift(p, |x| (self.map)(x))?;
        if out.len() != self.sig.real_dim() {
            return Err(Error::usage("chart map returned the wrong number of coordinates"));
        }
        Ok(out)
    }

    /// Ambient position at `p`.
    pub fn position(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.check(p)?;
        let vars: Vec<Jet3> = p.iter().map(|&x| Jet3::constant_with_order(p.len(), 0, x)).collect();
        Ok((self.map)(&vars)?.iter().map(Jet3::value).collect())
    }

    /// Post-composes the chart with the complex-linear map `u` of the ambient space.
    pub fn with_transform(&self, u: &DMatrix<Complex64>) -> Result<Self> {
        let m = self.sig.complex_dim();
        if u.nrows() != m || u.ncols() != m {
            return Err(Error::usage(format!("transform must be {m}×{m}")));
        }
        let u = u.clone();
        let inner = Arc::clone(&self.map);
        let map: ChartMap = Arc::new(move |x| {
            let coords = inner(x)?;
            let z: Vec<CJet> = (0..m)
                .map(|j| CJet::new(coords[2 * j].clone(), coords[2 * j + 1].clone()))
                .collect();
            let mut out = Vec::with_capacity(2 * m);
            for r in 0..m {
                let mut acc = z[0].scale_complex(u[(r, 0)]);
                for (c, zc) in z.iter().enumerate().skip(1) {
                    acc = acc + zc.scale_complex(u[(r, c)]);
                }
                out.push(acc.re);
                out.push(acc.im);
            }
            Ok(out)
        });
        Ok(ImmersionChart { map, ..self.clone() })
    }

    /// Adds `bump(x)` to real coordinate `coord`; used to probe detector sensitivity.
    pub fn perturbed<F>(&self, coord: usize, bump: F) -> Result<Self>
    where
        F: Fn(&[Jet3]) -> Jet3 + Send + Sync + 'static,
    {
        if coord >= self.sig.real_dim() {
            return Err(Error::usage(format!("no real coordinate {coord}")));
        }
        let inner = Arc::clone(&self.map);
        let map: ChartMap = Arc::new(move |x| {
            let mut c = inner(x)?;
            c[coord] = &c[coord] + &bump(x);
            Ok(c)
        });
        Ok(ImmersionChart { map, ..self.clone() })
    }

    /// Full product grid with `counts[i]` points along coordinate `i`, endpoints included.
    pub fn product_grid(&self, counts: &[usize]) -> Result<Vec<Vec<f64>>> {
        if counts.len() != self.n || counts.iter().any(|&c| c == 0) {
            return Err(Error::usage(format!(
                "grid needs {} positive counts, got {counts:?}",
                self.n
            )));
        }
        let axes: Vec<Vec<f64>> = counts
            .iter()
            .zip(&self.domain)
            .map(|(&c, &(lo, hi))| {
                if c == 1 {
                    vec![0.5 * (lo + hi)]
                } else {
                    (0..c).map(|i| (lo + (hi - lo) * i as f64 / (c - 1) as f64).clamp(lo, hi)).collect()
                }
            })
            .collect();
        let mut points = vec![Vec::with_capacity(self.n)];
        for axis in &axes {
            points = points
                .into_iter()
                .flat_map(|p| {
                    axis.iter().map(move |&x| {
                        let mut q = p.clone();
                        q.push(x);
                        q
                    })
                })
                .collect();
        }
        Ok(points)
    }

    /// `count` points drawn uniformly from the chart box with a fixed seed.
    pub fn random_grid(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| self.domain.iter().map(|&(lo, hi)| rng.gen_range(lo..=hi)).collect())
            .collect()
    }

    /// 11 × 5^{n−1} product grid for n ≤ 4, otherwise 200 seeded random points.
    pub fn default_grid(&self, seed: u64) -> Vec<Vec<f64>> {
        if self.n <= 4 {
            let mut counts = vec![5; self.n];
            counts[0] = 11;
            self.product_grid(&counts).expect("valid counts")
        } else {
            self.random_grid(200, seed)
        }
    }
}

/// A built submanifold: its chart plus the data it was made from.
#[derive(Debug, Clone)]
pub struct Immersion {
    pub chart: ImmersionChart,
    pub profile: Option<StructureFunctions>,
    pub legendre: Option<LegendreCurve>,
    pub plane: Option<PlaneCurve>,
    pub events: Vec<Event>,
    pub notices: Vec<String>,
}

impl Immersion {
    fn bare(chart: ImmersionChart) -> Self {
        Immersion {
            chart,
            profile: None,
            legendre: None,
            plane: None,
            events: Vec::new(),
            notices: Vec::new(),
        }
    }
}

fn pole_error(what: &str, value: f64) -> Error {
    Error::DegenerateChart(format!("{what} = {value:e} is within {POLE_TOL:e} of a chart pole"))
}

/// Unit vector of ℝ^{k+1} from k hyperspherical angles.
///
/// y₁ = cos u₁, y₂ = sin u₁ cos u₂, …, y_{k+1} = sin u₁ ⋯ sin u_k. All angles but
/// the last are polar and must stay away from 0 and π.
pub fn sphere_chart(angles: &[Jet3]) -> Result<Vec<Jet3>> {
    let k = angles.len();
    if k == 0 {
        return Err(Error::usage("sphere chart needs at least one angle"));
    }
    for u in &angles[..k - 1] {
        let s = u.value().sin();
        if s.abs() < POLE_TOL {
            return Err(pole_error("sin of a polar angle", s));
        }
    }
    let mut out = Vec::with_capacity(k + 1);
    let mut prefix = angles[0].constant_like(1.0);
    for u in angles {
        out.push(&prefix * &u.cos());
        prefix = &prefix * &u.sin();
    }
    out.push(prefix);
    Ok(out)
}

/// Point of the hyperboloid y₁² − y₂² − ⋯ − y_m² = 1 from ρ and m − 2 angles of ω ∈ S^{m−2}.
///
/// With no angles (m = 2), ω ranges over S⁰ and the chart is (cosh ρ, sinh ρ).
pub fn hyperboloid_chart(rho: &Jet3, angles: &[Jet3]) -> Result<Vec<Jet3>> {
    let mut out = vec![rho.cosh()];
    let sh = rho.sinh();
    if angles.is_empty() {
        out.push(sh);
        return Ok(out);
    }
    if sh.value().abs() < POLE_TOL {
        return Err(pole_error("sinh ρ", sh.value()));
    }
    for w in sphere_chart(angles)? {
        out.push(&sh * &w);
    }
    Ok(out)
}

/// Default box for k sphere angles: polar angles kept off the poles, the last one periodic.
fn sphere_box(k: usize) -> Vec<(f64, f64)> {
    use std::f64::consts::PI;
    let mut b = vec![(ANGLE_MARGIN, PI - ANGLE_MARGIN); k];
    if let Some(last) = b.last_mut() {
        *last = (-PI + ANGLE_MARGIN, PI - ANGLE_MARGIN);
    }
    b
}

fn interleave(z: Vec<CJet>) -> Vec<Jet3> {
    z.into_iter().flat_map(|c| [c.re, c.im]).collect()
}

/// (a·e^{is/a}, u₂, …, uₙ) in ℂⁿ.
pub fn build_cylinder(a: f64, n: usize) -> Result<Immersion> {
    if !(a > 0.0) {
        return Err(Error::usage(format!("cylinder radius must be positive, got {a}")));
    }
    let map: ChartMap = Arc::new(move |x| {
        let mut z = vec![CJet::unit_phase(&x[0].scale(1.0 / a)).scale(a)];
        z.extend(x[1..].iter().map(|u| CJet::real(u.clone())));
        Ok(interleave(z))
    });
    let mut domain = vec![(-1.0, 1.0); n];
    domain[0] = (-3.0, 3.0);
    Ok(Immersion::bare(ImmersionChart::new(n, 0, ChartKind::Graph, domain, map)?))
}

/// F(s)·y(u) in ℂⁿ with y on the unit sphere S^{n−1}.
pub fn build_complex_extensor(curve: &PlaneCurve, n: usize) -> Result<Immersion> {
    const SAMPLES: usize = 33;
    let (lo, hi) = curve.domain();
    for i in 0..SAMPLES {
        let s = (lo + (hi - lo) * i as f64 / (SAMPLES - 1) as f64).clamp(lo, hi);
        let speed = curve.unit_speed_residual(s)?;
        if !(speed.abs() < UNIT_SPEED_TOL) {
            return Err(Error::usage(format!(
                "extensor profile is not unit speed at s = {s} (residual {speed:e})"
            )));
        }
        let r = curve.value(s)?.norm();
        if !(r > 1e-10) {
            return Err(Error::usage(format!("extensor profile meets the origin at s = {s}")));
        }
    }
    let f = curve.clone();
    let map: ChartMap = Arc::new(move |x| {
        let fs = f.eval_jet(&x[0])?;
        let y = sphere_chart(&x[1..])?;
        Ok(interleave(y.iter().map(|yj| fs.mul_real(yj)).collect()))
    });
    let mut domain = vec![curve.domain()];
    domain.extend(sphere_box(n - 1));
    let mut out = Immersion::bare(ImmersionChart::new(
        n,
        0,
        ChartKind::ProductWithSphere,
        domain,
        map,
    )?);
    out.plane = Some(curve.clone());
    Ok(out)
}

/// Extensor over the plane curve of flat structure functions.
pub fn build_profile_extensor(sf: &StructureFunctions, n: usize) -> Result<Immersion> {
    let curve = PlaneCurve::from_structure(sf)?;
    let mut out = build_complex_extensor(&curve, n)?;
    out.profile = Some(sf.clone());
    Ok(out)
}

/// ψ = (z₁(s), z₂(s)·y) with y ∈ S^{n−1}; used for ℂPⁿ and type-I ℂHⁿ lifts.
pub fn lift_with_sphere(curve: &LegendreCurve, n: usize) -> Result<Immersion> {
    let eps = lift_eps(curve)?;
    let z = curve.clone();
    let map: ChartMap = Arc::new(move |x| {
        let [z1, z2] = z.pullback(&x[0])?;
        let y = sphere_chart(&x[1..])?;
        let mut out = vec![z1];
        out.extend(y.iter().map(|yj| z2.mul_real(yj)));
        Ok(interleave(out))
    });
    let mut domain = vec![curve.domain()];
    domain.extend(sphere_box(n - 1));
    let mut out = Immersion::bare(ImmersionChart::new(
        n,
        eps,
        ChartKind::ProductWithSphere,
        domain,
        map,
    )?);
    out.profile = curve.source().cloned();
    out.legendre = Some(curve.clone());
    Ok(out)
}

/// ψ = (z₁(s)·y, z₂(s)) with y on the hyperboloid y₁² − y₂² − ⋯ − yₙ² = 1.
pub fn lift_with_hyperboloid(curve: &LegendreCurve, n: usize) -> Result<Immersion> {
    if lift_eps(curve)? != -1 {
        return Err(Error::usage("hyperboloid lifts live in the anti-de Sitter space"));
    }
    let z = curve.clone();
    let map: ChartMap = Arc::new(move |x| {
        let [z1, z2] = z.pullback(&x[0])?;
        let y = hyperboloid_chart(&x[1], &x[2..])?;
        let mut out: Vec<CJet> = y.iter().map(|yj| z1.mul_real(yj)).collect();
        out.push(z2);
        Ok(interleave(out))
    });
    let mut domain = vec![curve.domain()];
    if n == 2 {
        domain.push((-1.0, 1.0));
    } else {
        domain.push((0.2, 1.2));
        domain.extend(sphere_box(n - 2));
    }
    let mut out = Immersion::bare(ImmersionChart::new(
        n,
        -1,
        ChartKind::ProductWithHyperboloid,
        domain,
        map,
    )?);
    out.profile = curve.source().cloned();
    out.legendre = Some(curve.clone());
    Ok(out)
}

fn lift_eps(curve: &LegendreCurve) -> Result<i8> {
    match curve.sig() {
        Signature::Euclidean(2) => Ok(1),
        Signature::Lorentz(2) => Ok(-1),
        _ => Err(Error::usage("Legendre curve must live in ℂ² or ℂ₁²")),
    }
}

fn half_square_sum(u: &[Jet3]) -> Jet3 {
    let mut acc = u[0].constant_like(0.0);
    for x in u {
        acc = acc + x * x;
    }
    acc.scale(0.5)
}

fn graph_domain(s: (f64, f64), n: usize) -> Vec<(f64, f64)> {
    let mut d = vec![(-1.0, 1.0); n];
    d[0] = s;
    d
}

/// The flat ratio-2 lift e^{is}(1 − is + ½Σu², s + (i/2)Σu², u₂, …, uₙ) in H₁^{2n+1}(−1).
pub fn build_flat_hyperbolic(n: usize) -> Result<Immersion> {
    let map: ChartMap = Arc::new(|x| {
        let s = &x[0];
        let q = half_square_sum(&x[1..]);
        let phase = CJet::unit_phase(s);
        let first = CJet::new(q.add_scalar(1.0), -s);
        let second = CJet::new(s.clone(), q.clone());
        let mut out = vec![&phase * &first, &phase * &second];
        out.extend(x[1..].iter().map(|u| phase.mul_real(u)));
        Ok(interleave(out))
    });
    let chart = ImmersionChart::new(n, -1, ChartKind::Graph, graph_domain((-3.0, 3.0), n), map)?;
    let mut out = Immersion::bare(chart);
    out.profile = Some(StructureFunctions::constant(2.0, 1.0, -1, (-3.0, 3.0))?);
    Ok(out)
}

/// Lift with sech profile μ = sech((r−2)s), λ = rμ, on the null branch μ² + k² = 1:
///
/// ψ = P(s)·(½ + Q + ½C − iI, iQ + (i/2)C − i/2 + I, u₂, …, uₙ), Q = ½Σu²,
/// P = cosh^{−1/(r−2)}((r−2)s)·exp[(2i/(r−2)) atan tanh((r−2)s/2)],
/// C = cosh^{2/(r−2)}((r−2)s), I = ∫₀ˢ cosh^{(4−r)/(r−2)}((r−2)x) dx.
pub fn build_sech_hyperbolic(ratio: f64, n: usize, span: (f64, f64)) -> Result<Immersion> {
    let gap = ratio - 2.0;
    if gap.abs() < 1e-12 {
        return Err(Error::Branch("ratio 2 has no sech profile".into()));
    }
    let power = (4.0 - ratio) / gap;
    let integral = RunningIntegral::new(
        move |x: f64| Ok((gap * x).cosh().powf(power)),
        0.0,
        span.0,
        span.1,
    )?;
    let map: ChartMap = Arc::new(move |x| {
        let s = &x[0];
        let v = s.scale(gap);
        let ch = v.cosh();
        let modulus = ch.powf(-1.0 / gap)?;
        let arg = v.scale(0.5).tanh().atan().scale(2.0 / gap);
        let prefactor = CJet::unit_phase(&arg).mul_real(&modulus);
        let c = ch.powf(2.0 / gap)?;
        let base = Jet3::variable(1, 0, s.value());
        let i_jet = integral_jet(
            integral.value(s.value())?,
            &base.scale(gap).cosh().powf(power)?,
        )
        .pullback(s);
        let q = half_square_sum(&x[1..]);
        let first = CJet::new((&q + &c.scale(0.5)).add_scalar(0.5), -&i_jet);
        let second = CJet::new(i_jet.clone(), (&q + &c.scale(0.5)).add_scalar(-0.5));
        let mut out = vec![&prefactor * &first, &prefactor * &second];
        out.extend(x[1..].iter().map(|u| prefactor.mul_real(u)));
        Ok(interleave(out))
    });
    let chart = ImmersionChart::new(n, -1, ChartKind::Graph, graph_domain(span, n), map)?;
    let mut out = Immersion::bare(chart);
    out.profile = Some(StructureFunctions::sech(ratio, 0.0, -1, span)?);
    Ok(out)
}

/// Lift built from null-branch structure functions (μ² + k² = 1):
///
/// ψ = E(s)·(1 + Q − W, (−k₀ + iμ₀)(Q − W), u₂, …, uₙ), Q = ½Σu²,
/// E = exp ∫₀ˢ(k + iμ), W = ∫₀ˢ (k + iμ)·exp(−∫₀ˣ 2k) dx.
pub fn build_null_branch_hyperbolic(sf: &StructureFunctions, n: usize) -> Result<Immersion> {
    if sf.eps() != -1 {
        return Err(Error::usage("null-branch lifts need ε = −1 structure functions"));
    }
    let (lo, hi) = sf.domain();
    let weight = |src: StructureFunctions, pick: usize| {
        move |x: f64| -> Result<f64> {
            let [_, mu, k] = src.values(x)?;
            let damp = (-2.0 * src.phase_k_value(x)?).exp();
            Ok(damp * if pick == 0 { k } else { mu })
        }
    };
    let w_re = RunningIntegral::new(weight(sf.clone(), 0), 0.0, lo, hi)?;
    let w_im = RunningIntegral::new(weight(sf.clone(), 1), 0.0, lo, hi)?;
    let [_, mu0, k0] = sf.values(0.0)?;
    let src = sf.clone();
    let map: ChartMap = Arc::new(move |x| {
        let s = &x[0];
        let t = s.value();
        let p = src.jets(t)?;
        let damp = src.phase_k(t)?.scale(-2.0).exp();
        let w = CJet::new(
            integral_jet(w_re.value(t)?, &(&p.k * &damp)),
            integral_jet(w_im.value(t)?, &(&p.mu * &damp)),
        )
        .pullback(s);
        let e = CJet::unit_phase(&src.phase_mu(t)?)
            .mul_real(&src.phase_k(t)?.exp())
            .pullback(s);
        let q = CJet::real(half_square_sum(&x[1..]));
        let first = (&q - &w) + CJet::real(s.constant_like(1.0));
        let second = (&q - &w).scale_complex(Complex64::new(-k0, mu0));
        let mut out = vec![&e * &first, &e * &second];
        out.extend(x[1..].iter().map(|u| e.mul_real(u)));
        Ok(interleave(out))
    });
    let chart = ImmersionChart::new(n, -1, ChartKind::Graph, graph_domain((lo, hi), n), map)?;
    let mut out = Immersion::bare(chart);
    out.profile = Some(sf.clone());
    Ok(out)
}
