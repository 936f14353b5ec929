//! Grid verification of a built family: pointwise extrinsic checks, intrinsic
//! residuals of the structure functions, aggregated into a [`VerificationReport`].

pub mod geometry;

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curves::{curvature_and_argument, theta2_residual};
use crate::error::{Error, Result};
use crate::family::{build_family, FamilyParams, FamilySpec, MeanCurvatureLabel};
use crate::immersion::Immersion;
use crate::legendre::{sample_grid, verify_legendre};
use crate::ode::{residual_gauss2, residual_k_definition, residual_legen, residual_tbe3, Event};
use crate::structure::Provenance;

pub use geometry::{Extraction, Frame, Geometry, ShapePattern, MINIMAL_TOL, RANK_TOL};

pub const SCHEMA_VERSION: u32 = 1;
/// |H| counts as constant over the grid when its variance is below this.
pub const CONSTANCY_VARIANCE: f64 = 1e-8;
/// Frame rotations must leave λ and μ unchanged to this accuracy.
pub const ROTATION_TOL: f64 = 1e-10;
/// Orthonormality of the computed frame.
pub const FRAME_TOL: f64 = 1e-10;
/// Change of the bitension residual under a rigid motion.
pub const RIGID_TOL: f64 = 1e-8;
/// Points used for the rigid-motion comparison.
const RIGID_POINTS: usize = 6;

/// Rungs of the tolerance ladder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rung {
    /// Closed-form identities.
    Algebraic,
    /// Jet-based geometric residuals.
    Geometric,
    /// Residuals limited by third derivatives of ODE solutions.
    ThirdDerivative,
    /// A fixed threshold outside the ladder.
    Threshold,
}

impl Rung {
    pub fn tolerance(self) -> f64 {
        match self {
            Rung::Algebraic => 1e-8,
            Rung::Geometric => 1e-6,
            Rung::ThirdDerivative => 1e-5,
            Rung::Threshold => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub rung: Rung,
    pub pass: bool,
    pub grid: String,
    /// Residual divided by the scale named in `scale`, when one applies.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relative: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<String>,
}

impl Check {
    fn new(name: &str, max_residual: f64, tolerance: f64, rung: Rung, grid: &str) -> Self {
        Check {
            name: name.to_string(),
            max_residual,
            tolerance,
            rung,
            pass: max_residual < tolerance,
            grid: grid.to_string(),
            relative: None,
            scale: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanCurvatureSummary {
    pub label: MeanCurvatureLabel,
    pub min: f64,
    pub max: f64,
    pub variance: f64,
    pub constant: bool,
    /// Whether the observed constancy agrees with the label; absent when unstated.
    pub matches_label: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionSummary {
    pub lambda_range: (f64, f64),
    pub mu_range: (f64, f64),
    pub ratio_range: Option<(f64, f64)>,
    pub minimal_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub family: String,
    pub ambient: String,
    pub n: usize,
    pub params: FamilyParams,
    pub grid: String,
    pub points: usize,
    pub checks: Vec<Check>,
    pub mean_curvature: MeanCurvatureSummary,
    pub extraction: ExtractionSummary,
    pub expected_ratio: Option<f64>,
    pub events: Vec<Event>,
    pub notes: Vec<String>,
    pub versions: BTreeMap<String, String>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failed(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GridSpec {
    /// 11 × 5^{n−1} for n ≤ 4, otherwise 200 seeded random points.
    Default,
    Product(Vec<usize>),
    Random(usize),
}

impl GridSpec {
    /// Parses `21x9x9` or `random:200`.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || Error::usage(format!("cannot parse grid {text:?}; use e.g. 21x9x9 or random:200"));
        if text == "default" {
            return Ok(GridSpec::Default);
        }
        if let Some(count) = text.strip_prefix("random:") {
            return Ok(GridSpec::Random(count.parse().map_err(|_| bad())?));
        }
        let counts: Vec<usize> = text
            .split('x')
            .map(|t| t.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        if counts.is_empty() || counts.contains(&0) {
            return Err(bad());
        }
        Ok(GridSpec::Product(counts))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub grid: GridSpec,
    pub seed: u64,
    pub parallel: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { grid: GridSpec::Default, seed: 0, parallel: true }
    }
}

/// Everything measured at one chart point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub chart: Vec<f64>,
    pub ambient: Vec<f64>,
    pub lambda: f64,
    pub mu: f64,
    pub mean_curvature: f64,
    pub minimal: bool,
    pub min_eigenvalue: f64,
    pub orthonormality: f64,
    pub lagrangian: f64,
    pub containment: Option<f64>,
    pub horizontality: Option<f64>,
    pub pattern: f64,
    pub ratio: Option<f64>,
    pub profile: Option<f64>,
    pub extensor_identity: Option<f64>,
    pub rotation: f64,
    pub codazzi: f64,
    pub tbe_structural: f64,
    pub tbe_raw: Option<f64>,
    pub grad_tau_sq: Option<f64>,
    pub grad_cross: Option<f64>,
    pub gauss: Option<f64>,
    pub rigid_motion: Option<f64>,
}

/// Column names of [`PointRecord::residual_columns`].
pub const RESIDUAL_COLUMNS: [&str; 14] = [
    "orthonormality",
    "lagrangian",
    "containment",
    "horizontality",
    "pattern",
    "ratio",
    "profile",
    "extensor_identity",
    "rotation",
    "codazzi",
    "tbe_structural",
    "tbe_raw",
    "grad_cross",
    "gauss",
];

impl PointRecord {
    /// Residuals in the order of [`RESIDUAL_COLUMNS`]; NaN where not applicable.
    pub fn residual_columns(&self) -> [f64; 14] {
        let o = |x: Option<f64>| x.unwrap_or(f64::NAN);
        [
            self.orthonormality,
            self.lagrangian,
            o(self.containment),
            o(self.horizontality),
            self.pattern,
            o(self.ratio),
            o(self.profile),
            o(self.extensor_identity),
            self.rotation,
            self.codazzi,
            self.tbe_structural,
            o(self.tbe_raw),
            o(self.grad_cross),
            o(self.gauss),
        ]
    }
}

/// Random orthogonal k×k matrix from a seeded Gaussian via QR.
fn random_orthogonal(k: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    if k == 0 {
        return DMatrix::zeros(0, 0);
    }
    let m = DMatrix::from_fn(k, k, |_, _| rng.gen_range(-1.0..1.0));
    m.qr().q()
}

/// Random unitary preserving the block split ℂ¹ ⊕ ℂ^{m−1} (so also the Lorentz form).
fn random_block_unitary(m: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    let mut out = DMatrix::from_element(m, m, Complex64::new(0.0, 0.0));
    let phase: f64 = rng.gen_range(-3.0..3.0);
    out[(0, 0)] = Complex64::from_polar(1.0, phase);
    if m > 1 {
        let k = m - 1;
        let g = DMatrix::from_fn(k, k, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let q = g.qr().q();
        for i in 0..k {
            for j in 0..k {
                out[(i + 1, j + 1)] = q[(i, j)];
            }
        }
    }
    out
}

struct Context<'a> {
    imm: &'a Immersion,
    expected_ratio: Option<f64>,
    rotation_seed: u64,
    rigid: Option<crate::immersion::ImmersionChart>,
}

fn structural_tbe(geom: &Geometry, ext: &Extraction) -> (f64, Vec<Vec<Vec<f64>>>) {
    let n = geom.n;
    let nf = n as f64;
    let e = ext.frame.values();
    let conn = geom.connection_forms(&ext.frame);
    let (l, m) = (ext.pattern.lambda, ext.pattern.mu);
    let dl = |j: usize| ext.lambda.directional(&e[j]);
    let dm = |j: usize| ext.mu.directional(&e[j]);
    let div: f64 = (1..n).map(|i| conn[0][i][i]).sum();
    let first = (3.0 * l + (nf - 1.0) * m) * (dl(0) + (nf - 1.0) * dm(0))
        + 2.0 * m * (l + (nf - 1.0) * m) * div;
    let rest: f64 = (1..n)
        .map(|j| {
            ((l + (nf + 1.0) * m) * (dl(j) + (nf - 1.0) * dm(j))
                + 2.0 * m * (l + (nf - 1.0) * m) * conn[0][j][0])
                .abs()
        })
        .sum();
    (first.abs() + rest, conn)
}

fn codazzi(ext: &Extraction, conn: &[Vec<Vec<f64>>]) -> f64 {
    let n = conn.len();
    let e = ext.frame.values();
    let (l, m) = (ext.pattern.lambda, ext.pattern.mu);
    let mut worst = 0.0f64;
    for j in 1..n {
        let w1j_e1 = conn[0][j][0];
        let wj1_e1 = conn[j][0][0];
        let c1 = ext.lambda.directional(&e[j]) - (2.0 * m - l) * wj1_e1;
        let c3 = ext.mu.directional(&e[j]) - 3.0 * m * w1j_e1;
        let c4 = m * w1j_e1;
        worst = worst.max(c1.abs()).max(c3.abs()).max(c4.abs());
    }
    worst
}

fn tbe_at(chart: &crate::immersion::ImmersionChart, p: &[f64]) -> Result<(f64, Option<f64>)> {
    let geom = Geometry::at(chart, p)?;
    let ext = geom.extract(None)?;
    let (structural, _) = structural_tbe(&geom, &ext);
    let raw = if chart.is_lift() {
        None
    } else {
        let (r, _) = geom.raw_bitension(&ext.frame)?;
        Some(r.iter().map(|x| x * x).sum::<f64>().sqrt())
    };
    Ok((structural, raw))
}

fn point_record(ctx: &Context, index: usize, p: &[f64]) -> Result<PointRecord> {
    let chart = &ctx.imm.chart;
    let n = chart.dim();
    let nf = n as f64;
    let geom = Geometry::at(chart, p)?;
    let ext = geom.extract(None)?;
    let e = ext.frame.values();
    let (l, m) = (ext.pattern.lambda, ext.pattern.mu);

    let mut rng = ChaCha8Rng::seed_from_u64(ctx.rotation_seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let rot = random_orthogonal(n - 1, &mut rng);
    let rotated = geom.rotated(&ext, &rot)?;
    let rotation = (rotated.pattern.lambda - l).abs().max((rotated.pattern.mu - m).abs());

    let (tbe_structural, conn) = structural_tbe(&geom, &ext);
    let cod = codazzi(&ext, &conn);

    let (tbe_raw, grad_tau_sq, grad_cross, gauss) = if chart.is_lift() {
        (None, None, None, None)
    } else {
        let (res, grad) = geom.raw_bitension(&ext.frame)?;
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let predicted = 2.0 * (l + (nf - 1.0) * m)
            * (ext.lambda.directional(&e[0]) + (nf - 1.0) * ext.mu.directional(&e[0]));
        (
            Some(norm(&res)),
            Some(norm(&grad)),
            Some((grad[0] - predicted).abs()),
            Some(geom.gauss_residual(&ext.frame)?),
        )
    };

    let s = p[0];
    let profile = match &ctx.imm.profile {
        Some(sf) => {
            let [pl, pm, _] = sf.values(s)?;
            Some((pl - l).abs().max((pm - m).abs()))
        }
        None => None,
    };
    let extensor_identity = match &ctx.imm.plane {
        Some(curve) => {
            let ca = curvature_and_argument(curve, s)?;
            Some((ca.curvature - l).abs().max((ca.arg_rate - m).abs()))
        }
        None => None,
    };
    let rigid_motion = match &ctx.rigid {
        Some(moved) if index < RIGID_POINTS => {
            let (s0, r0) = tbe_at(chart, p)?;
            let (s1, r1) = tbe_at(moved, p)?;
            let raw = match (r0, r1) {
                (Some(a), Some(b)) => (a - b).abs(),
                _ => 0.0,
            };
            Some((s0 - s1).abs().max(raw))
        }
        _ => None,
    };

    Ok(PointRecord {
        chart: p.to_vec(),
        ambient: geom.position.clone(),
        lambda: l,
        mu: m,
        mean_curvature: (l + (nf - 1.0) * m).abs() / nf,
        minimal: ext.pattern.minimal,
        min_eigenvalue: geom.min_eigenvalue(),
        orthonormality: geom.orthonormality_residual(&ext.frame),
        lagrangian: geom.lagrangian_residual(&ext.frame),
        containment: chart.level().map(|lvl| geom.containment_residual(lvl)),
        horizontality: chart.is_lift().then(|| geom.horizontality_residual(&ext.frame)),
        pattern: ext.pattern.off_pattern,
        ratio: ctx.expected_ratio.map(|r| (l - r * m).abs()),
        profile,
        extensor_identity,
        rotation,
        codazzi: cod,
        tbe_structural,
        tbe_raw,
        grad_tau_sq,
        grad_cross,
        gauss,
        rigid_motion,
    })
}

fn grid_points(imm: &Immersion, opts: &VerifyOptions) -> Result<(Vec<Vec<f64>>, String)> {
    let chart = &imm.chart;
    Ok(match &opts.grid {
        GridSpec::Default => {
            let pts = chart.default_grid(opts.seed);
            let label = if chart.dim() <= 4 {
                let mut counts = vec!["5".to_string(); chart.dim()];
                counts[0] = "11".into();
                counts.join("x")
            } else {
                format!("random:200 seed {}", opts.seed)
            };
            (pts, label)
        }
        GridSpec::Product(counts) => {
            let label = counts.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("x");
            (chart.product_grid(counts)?, label)
        }
        GridSpec::Random(count) => (chart.random_grid(*count, opts.seed), format!("random:{count} seed {}", opts.seed)),
    })
}

/// Per-point records on the requested grid, in grid order.
pub fn verify_points(imm: &Immersion, expected_ratio: Option<f64>, opts: &VerifyOptions) -> Result<(Vec<PointRecord>, String)> {
    let (points, label) = grid_points(imm, opts)?;
    let m = imm.chart.sig().complex_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(17));
    let unitary = random_block_unitary(m, &mut rng);
    let ctx = Context {
        imm,
        expected_ratio,
        rotation_seed: opts.seed,
        rigid: Some(imm.chart.with_transform(&unitary)?),
    };
    let records: Vec<Result<PointRecord>> = if opts.parallel {
        points.par_iter().enumerate().map(|(i, p)| point_record(&ctx, i, p)).collect()
    } else {
        points.iter().enumerate().map(|(i, p)| point_record(&ctx, i, p)).collect()
    };
    Ok((records.into_iter().collect::<Result<Vec<_>>>()?, label))
}

fn max_of(records: &[PointRecord], f: impl Fn(&PointRecord) -> Option<f64>) -> Option<f64> {
    let vals: Vec<f64> = records.iter().filter_map(f).collect();
    if vals.is_empty() {
        return None;
    }
    // NaN propagates as a failure
    Some(vals.iter().fold(0.0f64, |a, &b| if b.is_nan() || a.is_nan() { f64::NAN } else { a.max(b) }))
}

/// Builds the family and runs every applicable check.
pub fn verify_family(spec: &FamilySpec, opts: &VerifyOptions) -> Result<VerificationReport> {
    let params = spec.validate()?;
    let imm = build_family(spec)?;
    let expected_ratio = spec.expected_ratio()?;
    verify_immersion(&imm, spec, params, expected_ratio, opts)
}

/// Runs the checks on an already built immersion.
pub fn verify_immersion(
    imm: &Immersion,
    spec: &FamilySpec,
    params: FamilyParams,
    expected_ratio: Option<f64>,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    let (records, grid) = verify_points(imm, expected_ratio, opts)?;
    let chart = &imm.chart;
    let n = chart.dim();
    let ode = imm.profile.as_ref().map(|p| p.provenance()) == Some(Provenance::OdeSolution);
    let (closed_rung, geo_rung) = if ode {
        (Rung::Geometric, Rung::ThirdDerivative)
    } else {
        (Rung::Algebraic, Rung::Geometric)
    };
    let mut checks = Vec::new();
    let push = |checks: &mut Vec<Check>, name: &str, value: Option<f64>, rung: Rung, tol: Option<f64>| {
        if let Some(v) = value {
            checks.push(Check::new(name, v, tol.unwrap_or(rung.tolerance()), rung, &grid));
        }
    };

    let min_eig = records.iter().map(|r| r.min_eigenvalue).fold(f64::INFINITY, f64::min);
    push(&mut checks, "rank", Some(RANK_TOL / min_eig), Rung::Threshold, None);
    push(&mut checks, "frame_orthonormality", max_of(&records, |r| Some(r.orthonormality)), Rung::Algebraic, Some(FRAME_TOL));
    push(&mut checks, "lagrangian", max_of(&records, |r| Some(r.lagrangian)), Rung::Algebraic, None);
    push(&mut checks, "containment", max_of(&records, |r| r.containment), Rung::Algebraic, None);
    push(&mut checks, "horizontality", max_of(&records, |r| r.horizontality), closed_rung, None);
    if let Some(curve) = &imm.legendre {
        let res = verify_legendre(curve, &sample_grid(curve.domain(), 101))?;
        push(&mut checks, "legendre_containment", Some(res.containment), Rung::Algebraic, None);
        push(&mut checks, "unit_speed", Some(res.unit_speed), closed_rung, None);
        push(&mut checks, "legendre", Some(res.legendre), closed_rung, None);
    }
    push(&mut checks, "pattern", max_of(&records, |r| Some(r.pattern)), geo_rung, None);
    push(&mut checks, "ratio", max_of(&records, |r| r.ratio), geo_rung, None);
    push(&mut checks, "profile", max_of(&records, |r| r.profile), geo_rung, None);
    push(&mut checks, "extensor_identity", max_of(&records, |r| r.extensor_identity), geo_rung, None);
    push(&mut checks, "frame_rotation", max_of(&records, |r| Some(r.rotation)), Rung::Algebraic, Some(ROTATION_TOL));
    push(&mut checks, "codazzi", max_of(&records, |r| Some(r.codazzi)), geo_rung, None);
    push(&mut checks, "tbe_structural", max_of(&records, |r| Some(r.tbe_structural)), geo_rung, None);
    push(&mut checks, "grad_tau_cross", max_of(&records, |r| r.grad_cross), Rung::ThirdDerivative, None);
    push(&mut checks, "gauss", max_of(&records, |r| r.gauss), Rung::ThirdDerivative, None);
    push(&mut checks, "rigid_motion", max_of(&records, |r| r.rigid_motion), Rung::Algebraic, Some(RIGID_TOL));

    if let Some(raw) = max_of(&records, |r| r.tbe_raw) {
        let scale = records.iter().filter_map(|r| r.grad_tau_sq).fold(0.0f64, f64::max);
        let mut c = Check::new("tbe_raw", raw, geo_rung.tolerance(), geo_rung, &grid);
        c.relative = (scale > 0.0).then(|| raw / scale);
        c.scale = Some("max |grad |tau|^2|".into());
        checks.push(c);
    }

    // intrinsic residuals along the distinct s-values of the grid
    if let Some(sf) = &imm.profile {
        let mut svals: Vec<f64> = records.iter().map(|r| r.chart[0]).collect();
        svals.sort_by(f64::total_cmp);
        svals.dedup();
        let mut legen = None;
        let (mut tbe3, mut gauss2, mut kdef) = (0.0f64, 0.0f64, 0.0f64);
        for &s in &svals {
            let pj = sf.jets(s)?;
            match residual_legen(&pj, sf.eps()) {
                Ok(v) => legen = Some(legen.unwrap_or(0.0f64).max(v.abs())),
                Err(Error::NotApplicable(_)) => {}
                Err(e) => return Err(e),
            }
            tbe3 = tbe3.max(residual_tbe3(&pj, n).abs());
            gauss2 = gauss2.max(residual_gauss2(&pj, sf.eps()).abs());
            let [l, m, _] = sf.values(s)?;
            if (l - 2.0 * m).abs() > 1e-12 {
                kdef = kdef.max(residual_k_definition(&pj).abs());
            }
        }
        let rung = if ode { Rung::ThirdDerivative } else { Rung::Geometric };
        push(&mut checks, "residual_legen", legen, rung, None);
        push(&mut checks, "residual_tbe3", Some(tbe3), rung, None);
        push(&mut checks, "residual_gauss2", Some(gauss2), rung, None);
        push(&mut checks, "residual_k_definition", Some(kdef), rung, None);
    }
    if let Some(curve) = &imm.plane {
        let mut worst = 0.0f64;
        for s in sample_grid(curve.domain(), 41) {
            worst = worst.max(theta2_residual(curve, s)?.abs());
        }
        push(&mut checks, "theta2", Some(worst), Rung::Geometric, None);
    }

    let hs: Vec<f64> = records.iter().map(|r| r.mean_curvature).collect();
    let mean = hs.iter().sum::<f64>() / hs.len() as f64;
    let variance = hs.iter().map(|h| (h - mean).powi(2)).sum::<f64>() / hs.len() as f64;
    let constant = variance < CONSTANCY_VARIANCE;
    let label = spec.info().mean_curvature;
    let matches_label = match label {
        MeanCurvatureLabel::Constant => Some(constant),
        MeanCurvatureLabel::NonConstant => Some(!constant),
        MeanCurvatureLabel::Unstated => None,
    };
    let range = |f: fn(&PointRecord) -> f64| {
        records.iter().map(f).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)))
    };
    let ratios: Vec<f64> = records.iter().filter(|r| r.mu.abs() > 1e-12).map(|r| r.lambda / r.mu).collect();
    let minimal_points = records.iter().filter(|r| r.minimal).count();

    let mut notes = imm.notices.clone();
    if minimal_points > 0 {
        notes.push(format!(
            "{minimal_points} of {} points are numerically minimal; e1 taken along the normalised s-direction there",
            records.len()
        ));
    }
    if ode {
        notes.push("ODE-provenance profile: geometric checks use the third-derivative rung".into());
    }
    let mut versions = BTreeMap::new();
    versions.insert("humbilical".to_string(), env!("CARGO_PKG_VERSION").to_string());

    Ok(VerificationReport {
        schema_version: SCHEMA_VERSION,
        family: spec.case.to_string(),
        ambient: spec.case.ambient.symbol().to_string(),
        n,
        params,
        grid,
        points: records.len(),
        checks,
        mean_curvature: MeanCurvatureSummary {
            label,
            min: hs.iter().cloned().fold(f64::INFINITY, f64::min),
            max: hs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            variance,
            constant,
            matches_label,
        },
        extraction: ExtractionSummary {
            lambda_range: range(|r| r.lambda),
            mu_range: range(|r| r.mu),
            ratio_range: (!ratios.is_empty()).then(|| {
                ratios.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)))
            }),
            minimal_points,
        },
        expected_ratio,
        events: imm.events.clone(),
        notes,
        versions,
    })
}
