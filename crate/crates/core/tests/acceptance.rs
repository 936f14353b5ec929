//! Acceptance run: one PASS/FAIL line per criterion, with the thresholds pinned below.
//!
//! A failure exits non-zero unless it is listed in `KNOWN_FAILURES` and its
//! failing set is exactly the one recorded there. Set `ACCEPTANCE_STRICT=1`
//! to make every failure fatal.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use humbilical::curves::{reparametrize_unit_speed, theta2_residual};
use humbilical::family::{Ambient, CaseId, FamilyParams, FamilySpec};
use humbilical::kernel::{CJet, Jet3};
use humbilical::ode::{integrate_first_order, ratio_roots, sech_family_jets, EventKind, FirstOrderLaw, Rational};
use humbilical::verify::{verify_family, GridSpec, VerificationReport, VerifyOptions, CONSTANCY_VARIANCE};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GEOMETRIC: f64 = 1e-6;
const ODE_INTRINSIC: f64 = 1e-5;
const WHITNEY_RELATIVE: f64 = 1e-2;
const ODE_EXTREMA: f64 = 1e-6;
const ODE_ENERGY: f64 = 1e-8;
const SECH_LAW: f64 = 1e-12;
const GRAD_TAU: f64 = 1e-5;
const BIHARMONIC_VALUE: f64 = 1e-8;

/// Criterion, expected failing set, reason.
const KNOWN_FAILURES: &[(u32, &[&str], &str)] = &[(
    4,
    &["label CH.10", "label CH.14", "label CH.5", "label CP.4"],
    "ratio 1-n forces H = 0, which is constant, against the non-constant label",
)];

struct Outcome {
    failures: BTreeSet<String>,
    details: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome { failures: BTreeSet::new(), details: Vec::new() }
    }

    fn require(&mut self, ok: bool, tag: impl Into<String>, detail: impl Into<String>) {
        if !ok {
            self.failures.insert(tag.into());
            self.details.push(detail.into());
        }
    }
}

fn case(id: &str) -> CaseId {
    id.parse().unwrap()
}

fn report(spec: &FamilySpec, grid: GridSpec) -> humbilical::Result<VerificationReport> {
    verify_family(spec, &VerifyOptions { grid, ..Default::default() })
}

fn residual(report: &VerificationReport, name: &str) -> Option<f64> {
    report.check(name).map(|c| c.max_residual)
}

/// Demands every listed check that the report carries stays below `tol`.
fn bound(out: &mut Outcome, report: &VerificationReport, names: &[&str], tol: f64) {
    for name in names {
        if let Some(v) = residual(report, name) {
            out.require(v < tol, format!("{name} {}", report.family), format!("{} {name} = {v:e} (bound {tol:e})", report.family));
        }
    }
}

fn failed_checks(out: &mut Outcome, report: &VerificationReport) {
    for c in report.failed() {
        out.require(false, format!("{} {}", c.name, report.family), format!("{} {} = {:e} (tol {:e})", report.family, c.name, c.max_residual, c.tolerance));
    }
}

fn ratio_cubic() -> Outcome {
    let mut out = Outcome::new();
    for n in 2..=12i64 {
        let roots = ratio_roots(n as usize).unwrap();
        let got: Vec<Rational> = roots.iter().filter(|r| !r.excluded).map(|r| r.ratio).collect();
        let mut want: Vec<Rational> = Vec::new();
        for r in [Rational::new(0, 1), Rational::new(1 - n, 1), Rational::new(7 - n, 3)] {
            if !want.contains(&r) && !(n == 2 && r == Rational::new(-1, 1)) {
                want.push(r);
            }
        }
        let same = got.len() == want.len() && want.iter().all(|w| got.contains(w));
        out.require(same, format!("roots n={n}"), format!("n={n}: {got:?} vs {want:?}"));
        let distinct = if n == 7 { 2 } else { 3 };
        out.require(roots.len() == distinct, format!("count n={n}"), format!("n={n}: {} roots", roots.len()));
        let isotropic = roots.iter().any(|r| r.isotropic && !r.excluded);
        out.require(isotropic == (n == 10), format!("isotropic n={n}"), format!("n={n}: isotropic root {isotropic}"));
    }
    out
}

fn motivating_example() -> Outcome {
    let mut out = Outcome::new();
    for n in 2..=4 {
        let mut counts = vec![9; n];
        counts[0] = 21;
        for r in [0.5, 1.0, 2.0] {
            let spec = FamilySpec::with_params(case("C.3"), n, FamilyParams { a: Some(r), ..Default::default() });
            let rep = report(&spec, GridSpec::Product(counts.clone())).unwrap();
            let tag = format!("n={n} r={r}");
            for name in ["lagrangian", "pattern", "ratio", "tbe_raw"] {
                let v = residual(&rep, name).unwrap_or(f64::INFINITY);
                out.require(v < GEOMETRIC, format!("{name} {tag}"), format!("{tag}: {name} = {v:e}"));
            }
            let (lo, hi) = rep.extraction.ratio_range.unwrap_or((f64::NAN, f64::NAN));
            out.require(lo.abs() < GEOMETRIC && hi.abs() < GEOMETRIC, format!("ratio0 {tag}"), format!("{tag}: ratio in [{lo}, {hi}]"));
        }
    }
    out
}

fn flat_catalog() -> Outcome {
    let mut out = Outcome::new();
    for id in ["C.1", "C.2", "C.3", "C.4", "C.5", "C.6"] {
        match report(&FamilySpec::new(case(id), 3), GridSpec::Default) {
            Ok(rep) => failed_checks(&mut out, &rep),
            Err(e) => out.require(false, format!("build {id}"), format!("{id}: {e}")),
        }
    }
    let whitney = FamilySpec::with_params(case("C.6"), 3, FamilyParams { curve: Some("whitney".into()), ..Default::default() });
    let rep = report(&whitney, GridSpec::Default).unwrap();
    let rel = rep.check("tbe_raw").and_then(|c| c.relative).unwrap_or(0.0);
    out.require(rel > WHITNEY_RELATIVE, "whitney", format!("Whitney raw bitension relative {rel:e}"));
    out
}

fn curved_catalog() -> Outcome {
    let mut out = Outcome::new();
    out.require(CONSTANCY_VARIANCE == 1e-8, "variance threshold", format!("constancy threshold {CONSTANCY_VARIANCE:e}"));
    for id in CaseId::all().into_iter().filter(|c| c.ambient != Ambient::Flat) {
        let rep = match report(&FamilySpec::new(id, 3), GridSpec::Default) {
            Ok(rep) => rep,
            Err(e) => {
                out.require(false, format!("build {id}"), format!("{id}: {e}"));
                continue;
            }
        };
        bound(&mut out, &rep, &["containment", "legendre_containment", "unit_speed", "horizontality", "legendre"], GEOMETRIC);
        let ode = rep.check("pattern").map(|c| c.tolerance) == Some(ODE_INTRINSIC);
        bound(&mut out, &rep, &["residual_legen", "residual_tbe3", "residual_gauss2"], if ode { ODE_INTRINSIC } else { GEOMETRIC });
        failed_checks(&mut out, &rep);
        let h = &rep.mean_curvature;
        out.require(
            h.matches_label != Some(false),
            format!("label {id}"),
            format!("{id}: |H| variance {:e} reads {} against label {:?}", h.variance, if h.constant { "constant" } else { "non-constant" }, h.label),
        );
    }
    out
}

fn ode_suite() -> Outcome {
    let mut out = Outcome::new();
    let law = FirstOrderLaw::new(0.0, 1, 10.0).unwrap();
    // Φ = 10μ³ − 4μ²(μ² + 1) vanishes at μ = ½ and μ = 2
    for root in [0.5, 2.0] {
        out.require(law.phi(root).abs() < 1e-12, format!("root {root}"), format!("Φ({root}) = {:e}", law.phi(root)));
    }
    let sol = integrate_first_order(&law, 1.0, 1.0, (-6.0, 6.0)).unwrap();
    let turns: Vec<(f64, f64)> = sol
        .events()
        .iter()
        .filter_map(|e| match e.kind {
            EventKind::TurningPoint { simple: true, mu } => Some((e.s, mu)),
            _ => None,
        })
        .collect();
    out.require(turns.len() >= 4, "turning count", format!("{} turning points", turns.len()));
    let lo = turns.iter().map(|t| t.1).fold(f64::INFINITY, f64::min);
    let hi = turns.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
    out.require((lo - 0.5).abs() < ODE_EXTREMA && (hi - 2.0).abs() < ODE_EXTREMA, "extrema", format!("μ range [{lo}, {hi}]"));
    let (a, b) = sol.domain();
    let mut drift = 0.0f64;
    for i in 0..=4000 {
        let y = sol.state(a + (b - a) * i as f64 / 4000.0).unwrap();
        drift = drift.max((y[1] * y[1] - law.phi(y[0])).abs());
    }
    out.require(drift < ODE_ENERGY, "energy", format!("max |μ′² − Φ(μ)| = {drift:e}"));

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let (r, phase, s) = (rng.gen_range(-10.0..1.9), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let (mu, k) = sech_family_jets(r, phase, &Jet3::variable(1, 0, s)).unwrap();
        let m = mu.value();
        worst.0 = worst.0.max((mu.univariate_derivative(1) - (r - 2.0) * m * k.value()).abs());
        worst.1 = worst.1.max((m * m + k.value().powi(2) - 1.0).abs());
    }
    out.require(worst.0 < SECH_LAW && worst.1 < SECH_LAW, "sech", format!("sech law {:e}, unit circle {:e}", worst.0, worst.1));
    out
}

/// ρ(t)·e^{it} with a small random trigonometric radius.
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

fn identity_suite() -> Outcome {
    let mut out = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let coeffs = (0..3).map(|_| (rng.gen_range(-0.1..0.1), rng.gen_range(-0.1..0.1))).collect();
        let f = reparametrize_unit_speed(fourier_curve(coeffs), 0.0, std::f64::consts::TAU).unwrap();
        let len = f.domain().1;
        for i in 0..5 {
            worst = worst.max(theta2_residual(&f, len * (i as f64 + 0.3) / 5.0).unwrap().abs());
        }
    }
    out.require(worst < GEOMETRIC, "theta2", format!("max theta2 residual {worst:e}"));

    for id in CaseId::all() {
        let mut spec = FamilySpec::new(id, 3);
        if id.to_string() == "C.6" {
            let whitney = FamilySpec::with_params(id, 3, FamilyParams { curve: Some("whitney".into()), ..Default::default() });
            agreement(&mut out, &report(&whitney, GridSpec::Default).unwrap());
        }
        if id.to_string() == "C.3" {
            spec.params.a = Some(1.5);
        }
        let rep = report(&spec, GridSpec::Default).unwrap();
        bound(&mut out, &rep, &["codazzi"], GEOMETRIC);
        bound(&mut out, &rep, &["grad_tau_cross"], GRAD_TAU);
        agreement(&mut out, &rep);
    }
    out
}

fn agreement(out: &mut Outcome, rep: &VerificationReport) {
    if let (Some(raw), Some(structural)) = (rep.check("tbe_raw"), rep.check("tbe_structural")) {
        let tag = format!("verdicts {}{}", rep.family, rep.params.curve.as_deref().map(|c| format!(" {c}")).unwrap_or_default());
        out.require(raw.pass == structural.pass, tag.clone(), format!("{tag}: raw {} vs structural {}", raw.pass, structural.pass));
    }
}

fn biharmonic_constant_mu() -> Outcome {
    let mut out = Outcome::new();
    let n = 3.0f64;
    let mu = ((n + 5.0 + (n * n + 6.0 * n + 25.0).sqrt()) / (2.0 * n)).sqrt();
    let spec = FamilySpec::with_params(case("CP.1"), 3, FamilyParams { mu: Some(mu), ..Default::default() });
    let rep = report(&spec, GridSpec::Default).unwrap();
    failed_checks(&mut out, &rep);
    let names = ["containment", "horizontality", "unit_speed", "legendre", "pattern", "ratio", "profile", "codazzi", "tbe_structural", "residual_legen", "residual_tbe3", "residual_gauss2"];
    bound(&mut out, &rep, &names, BIHARMONIC_VALUE);
    out
}

fn determinism() -> Outcome {
    let mut out = Outcome::new();
    for (id, n) in [("CP.2", 3), ("C.6", 3), ("CH.3", 4)] {
        let spec = FamilySpec::new(case(id), n);
        let json = |parallel| {
            let rep = verify_family(&spec, &VerifyOptions { parallel, ..Default::default() }).unwrap();
            serde_json::to_string_pretty(&rep).unwrap()
        };
        let first = json(true);
        out.require(first == json(true), format!("repeat {id}"), format!("{id}: repeated runs differ"));
        out.require(first == json(false), format!("serial {id}"), format!("{id}: parallel and serial differ"));
    }
    out
}

fn main() {
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let criteria: [(u32, &str, Duration, fn() -> Outcome); 8] = [
        (1, "ratio cubic roots for n = 2..12", Duration::from_secs(1), ratio_cubic),
        (2, "line extensor F = r + si", Duration::from_secs(30), motivating_example),
        (3, "flat catalog and Whitney control", Duration::from_secs(120), flat_catalog),
        (4, "curved catalog", Duration::from_secs(300), curved_catalog),
        (5, "first-order ODE and sech law", Duration::from_secs(10), ode_suite),
        (6, "identity suite", Duration::from_secs(60), identity_suite),
        (7, "biharmonic constant-mu value", Duration::from_secs(5), biharmonic_constant_mu),
        (8, "determinism", Duration::MAX, determinism),
    ];
    let mut fatal = 0;
    for (id, title, budget, run) in criteria {
        let start = Instant::now();
        let mut outcome = run();
        let elapsed = start.elapsed();
        outcome.require(elapsed <= budget, "runtime", format!("took {elapsed:.1?}, budget {budget:?}"));
        let pass = outcome.failures.is_empty();
        println!("{} criterion {id}: {title} ({elapsed:.1?})", if pass { "PASS" } else { "FAIL" });
        for line in &outcome.details {
            println!("       {line}");
        }
        if pass {
            continue;
        }
        let known = KNOWN_FAILURES.iter().find(|(k, set, _)| {
            *k == id && outcome.failures == set.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>()
        });
        match known {
            Some((_, _, reason)) if !strict => println!("       known failure: {reason}"),
            _ => fatal += 1,
        }
    }
    if fatal > 0 {
        println!("{fatal} criterion failure(s) beyond the known set");
        std::process::exit(1);
    }
}
