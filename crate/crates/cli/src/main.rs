//! `humbilical`: enumerate, build, verify and export H-umbilical families.

mod export;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use humbilical::family::{build_family, CaseId, FamilyParams, FamilySpec};
use humbilical::ode::{integrate_first_order, FirstOrderLaw};
use humbilical::structure::StructureFunctions;
use humbilical::verify::{verify_family, GridSpec, VerificationReport, VerifyOptions};

/// Failure classes, each with its own exit code.
#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failed(String),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Io { .. } => 3,
        }
    }

    fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }
}

impl From<humbilical::Error> for CliError {
    fn from(e: humbilical::Error) -> Self {
        match e {
            humbilical::Error::Usage(_) | humbilical::Error::Branch(_) => CliError::Usage(e.to_string()),
            other => CliError::Failed(other.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Parser)]
#[command(name = "humbilical", version, about = "Build and verify tangentially biharmonic Lagrangian H-umbilical submanifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the catalog of families.
    ListFamilies,
    /// Integrate the profile ODE of a case, or of an explicit first-order law, and write (s, μ, μ′, λ, k) as CSV.
    SolveOde(SolveArgs),
    /// Build a chart and print a JSON summary of it.
    Build(FamilyArgs),
    /// Run every applicable check; exit 0 iff all pass.
    Verify(VerifyArgs),
    /// Write sampled chart points, and the profile when there is one, as CSV.
    Export(ExportArgs),
    /// Print the check summary of a saved JSON report; exit 0 iff all its checks pass.
    Report(ReportArgs),
}

#[derive(Args, Clone)]
struct FamilyArgs {
    /// Case identifier such as C.3, CP.2 or CH.15.
    #[arg(long, value_parser = parse_case)]
    case: CaseId,
    /// Complex dimension.
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Radius (C.1, C.2) or distance of the line to the origin (C.3).
    #[arg(long)]
    a: Option<f64>,
    /// Integration constant of the first-order law.
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    /// Value of μ for constant-profile cases.
    #[arg(long)]
    mu: Option<f64>,
    /// μ at s = 0.
    #[arg(long)]
    mu0: Option<f64>,
    /// Sign of μ′ at s = 0.
    #[arg(long, allow_hyphen_values = true)]
    sign0: Option<f64>,
    /// λ at s = 0 for the coupled system and the null branch.
    #[arg(long, allow_hyphen_values = true)]
    lambda0: Option<f64>,
    /// μ′ at s = 0 for the coupled system.
    #[arg(long, allow_hyphen_values = true)]
    dmu0: Option<f64>,
    /// k at s = 0 on the null branch μ² + k² = 1.
    #[arg(long, allow_hyphen_values = true)]
    k0: Option<f64>,
    /// Phase shift of the sech profile.
    #[arg(long, allow_hyphen_values = true)]
    phase: Option<f64>,
    /// Arc-length interval as LO,HI.
    #[arg(long, value_parser = parse_span, allow_hyphen_values = true)]
    span: Option<(f64, f64)>,
    /// Named replacement profile; `whitney` selects the κ = 3θ′ control.
    #[arg(long)]
    curve: Option<String>,
    /// JSON summary for build, JSON report for verify, file prefix for export.
    #[arg(long)]
    output: Option<PathBuf>,
}

impl FamilyArgs {
    fn spec(&self) -> FamilySpec {
        let params = FamilyParams {
            a: self.a,
            c: self.c,
            mu: self.mu,
            mu0: self.mu0,
            sign0: self.sign0,
            lambda0: self.lambda0,
            dmu0: self.dmu0,
            k0: self.k0,
            phase: self.phase,
            span: self.span,
            curve: self.curve.clone(),
        };
        FamilySpec::with_params(self.case, self.n, params)
    }
}

#[derive(Args)]
struct GridArgs {
    /// `default`, a product grid like 21x9x9, or random:COUNT.
    #[arg(long, default_value = "default", value_parser = parse_grid)]
    grid: GridSpec,
    /// Seed for random grids and random frame rotations.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Evaluate grid points on one thread.
    #[arg(long)]
    serial: bool,
}

impl GridArgs {
    fn options(&self) -> VerifyOptions {
        VerifyOptions { grid: self.grid.clone(), seed: self.seed, parallel: !self.serial }
    }
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// Replace the tolerance of one check, as NAME=VALUE; recorded in the report notes.
    #[arg(long = "tol", value_parser = parse_override)]
    overrides: Vec<(String, f64)>,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// Samples along s in the profile CSV.
    #[arg(long, default_value_t = 201)]
    samples: usize,
}

#[derive(Args)]
struct SolveArgs {
    /// Take the profile of this case; otherwise --ratio, --eps and --c describe the law.
    #[arg(long, value_parser = parse_case)]
    case: Option<CaseId>,
    /// Complex dimension.
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Ratio r of the first-order law.
    #[arg(long, allow_hyphen_values = true)]
    ratio: Option<f64>,
    /// Curvature sign ε of the ambient: 1, 0 or −1.
    #[arg(long, allow_hyphen_values = true, default_value_t = 1)]
    eps: i8,
    /// Integration constant of the law.
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    /// μ at s = 0.
    #[arg(long)]
    mu0: Option<f64>,
    /// Sign of μ′ at s = 0.
    #[arg(long, allow_hyphen_values = true)]
    sign0: Option<f64>,
    /// Integration interval as LO,HI.
    #[arg(long, value_parser = parse_span, allow_hyphen_values = true)]
    span: Option<(f64, f64)>,
    /// Rows in the CSV.
    #[arg(long, default_value_t = 201)]
    samples: usize,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// A report written by `verify --output`.
    input: PathBuf,
}

fn parse_case(text: &str) -> std::result::Result<CaseId, String> {
    text.parse::<CaseId>().map_err(|e| e.to_string())
}

fn parse_grid(text: &str) -> std::result::Result<GridSpec, String> {
    GridSpec::parse(text).map_err(|e| e.to_string())
}

fn parse_span(text: &str) -> std::result::Result<(f64, f64), String> {
    let (lo, hi) = text.split_once(',').ok_or_else(|| format!("expected LO,HI, got {text:?}"))?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("not a number: {t:?}"));
    Ok((num(lo)?, num(hi)?))
}

fn parse_override(text: &str) -> std::result::Result<(String, f64), String> {
    let (name, value) = text.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got {text:?}"))?;
    let value = value.parse::<f64>().map_err(|_| format!("not a number: {value:?}"))?;
    if !(value > 0.0) {
        return Err(format!("tolerance must be positive, got {value}"));
    }
    Ok((name.to_string(), value))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("HUMBILICAL_LOG")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn run(command: Command) -> CliResult<u8> {
    match command {
        Command::ListFamilies => {
            print_stdout(&list_families())?;
            Ok(0)
        }
        Command::SolveOde(args) => solve_ode(&args),
        Command::Build(args) => build(&args),
        Command::Verify(args) => verify(&args),
        Command::Export(args) => export_samples(&args),
        Command::Report(args) => report(&args),
    }
}

fn print_stdout(text: &str) -> CliResult<()> {
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes()).map_err(|e| CliError::io(Path::new("<stdout>"), e))
}

fn write_or_print(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => print_stdout(text),
    }
}

fn list_families() -> String {
    let mut rows = vec![[
        "case".to_string(),
        "ambient".into(),
        "ratio".into(),
        "|H|".into(),
        "parameters".into(),
        "restriction".into(),
    ]];
    for id in CaseId::all() {
        let info = id.info();
        rows.push([
            id.to_string(),
            id.ambient.symbol().to_string(),
            info.ratio.symbol().to_string(),
            info.mean_curvature.symbol().to_string(),
            info.params.to_string(),
            info.restriction.unwrap_or("-").to_string(),
        ]);
    }
    let widths: Vec<usize> = (0..6).map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for row in &rows {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, &w)| format!("{cell}{}", " ".repeat(w - cell.chars().count())))
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn solve_ode(args: &SolveArgs) -> CliResult<u8> {
    let (sf, events) = match (args.case, args.ratio) {
        (Some(case), None) => {
            let spec = FamilySpec::with_params(
                case,
                args.n,
                FamilyParams { c: args.c, mu0: args.mu0, sign0: args.sign0, span: args.span, ..Default::default() },
            );
            spec.validate()?;
            let imm = build_family(&spec)?;
            let sf = imm
                .profile
                .ok_or_else(|| CliError::Usage(format!("{case} has no profile to solve")))?;
            (sf, imm.events)
        }
        (None, Some(ratio)) => {
            let c = args.c.ok_or_else(|| CliError::Usage("--ratio needs --c".into()))?;
            let law = FirstOrderLaw::new(ratio, args.eps, c)?;
            let sol = integrate_first_order(
                &law,
                args.mu0.unwrap_or(1.0),
                args.sign0.unwrap_or(1.0),
                args.span.unwrap_or((-5.0, 5.0)),
            )?;
            let events = sol.events().to_vec();
            (StructureFunctions::first_order(&law, Arc::new(sol))?, events)
        }
        _ => return Err(CliError::Usage("give exactly one of --case or --ratio".into())),
    };
    for e in &events {
        eprintln!("event at s = {:.12}: {:?}", e.s, e.kind);
    }
    let csv = export::profile_csv(&sf, args.samples)?;
    write_or_print(args.output.as_deref(), &csv)?;
    Ok(0)
}

fn build(args: &FamilyArgs) -> CliResult<u8> {
    let spec = args.spec();
    let params = spec.validate()?;
    let imm = build_family(&spec)?;
    let summary = serde_json::json!({
        "family": spec.case.to_string(),
        "ambient": spec.case.ambient.symbol(),
        "n": spec.n,
        "params": params,
        "chart": {
            "kind": format!("{:?}", imm.chart.kind()),
            "dimension": imm.chart.dim(),
            "domain": imm.chart.domain(),
            "ambient_real_dimension": 2 * imm.chart.sig().complex_dim(),
        },
        "profile": imm.profile.as_ref().map(|p| serde_json::json!({
            "domain": p.domain(),
            "provenance": p.provenance(),
        })),
        "events": imm.events,
        "notes": imm.notices,
    });
    let text = serde_json::to_string_pretty(&summary).expect("summary serialises") + "\n";
    write_or_print(args.output.as_deref(), &text)?;
    Ok(0)
}

fn apply_overrides(report: &mut VerificationReport, overrides: &[(String, f64)]) -> CliResult<()> {
    for (name, tol) in overrides {
        let check = report
            .checks
            .iter_mut()
            .find(|c| &c.name == name)
            .ok_or_else(|| CliError::Usage(format!("no check named {name:?} in this report")))?;
        report.notes.push(format!("tolerance of {name} overridden: {:e} -> {tol:e}", check.tolerance));
        check.tolerance = *tol;
        check.pass = check.max_residual < *tol;
    }
    Ok(())
}

fn summary_lines(report: &VerificationReport) -> String {
    let width = report.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut out = format!(
        "{} n={} grid {} ({} points)\n",
        report.family, report.n, report.grid, report.points
    );
    for c in &report.checks {
        let rel = match (c.relative, &c.scale) {
            (Some(r), Some(s)) => format!("  relative {r:.3e} to {s}"),
            _ => String::new(),
        };
        out.push_str(&format!(
            "{} {:width$}  {:.3e}  tol {:.0e}  [{:?}]{rel}\n",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.max_residual,
            c.tolerance,
            c.rung,
        ));
    }
    if let Some((lo, hi)) = report.extraction.ratio_range {
        out.push_str(&format!("ratio λ/μ in [{lo:.12}, {hi:.12}]\n"));
    }
    let h = &report.mean_curvature;
    let verdict = match h.matches_label {
        Some(true) => "matches label",
        Some(false) => "CONTRADICTS label",
        None => "label unstated",
    };
    out.push_str(&format!(
        "|H| in [{:.6e}, {:.6e}], variance {:.3e}: {} ({verdict})\n",
        h.min,
        h.max,
        h.variance,
        if h.constant { "constant" } else { "non-constant" }
    ));
    for note in &report.notes {
        out.push_str(&format!("note: {note}\n"));
    }
    out.push_str(if report.passed() { "verdict: PASS\n" } else { "verdict: FAIL\n" });
    out
}

fn verify(args: &VerifyArgs) -> CliResult<u8> {
    let spec = args.family.spec();
    let mut report = verify_family(&spec, &args.grid.options())?;
    apply_overrides(&mut report, &args.overrides)?;
    if let Some(path) = &args.family.output {
        let text = serde_json::to_string_pretty(&report).expect("report serialises") + "\n";
        fs::write(path, text).map_err(|e| CliError::io(path, e))?;
    }
    print_stdout(&summary_lines(&report))?;
    Ok(if report.passed() { 0 } else { 1 })
}

fn export_samples(args: &ExportArgs) -> CliResult<u8> {
    let spec = args.family.spec();
    spec.validate()?;
    let imm = build_family(&spec)?;
    let prefix = args
        .family
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}-n{}", spec.case, spec.n)));
    let points = export::points_csv(&imm, spec.expected_ratio()?, &args.grid.options())?;
    let points_path = with_suffix(&prefix, "points.csv");
    fs::write(&points_path, points).map_err(|e| CliError::io(&points_path, e))?;
    println!("wrote {}", points_path.display());
    if let Some(sf) = &imm.profile {
        let profile_path = with_suffix(&prefix, "profile.csv");
        let text = export::profile_csv(sf, args.samples)?;
        fs::write(&profile_path, text).map_err(|e| CliError::io(&profile_path, e))?;
        println!("wrote {}", profile_path.display());
    }
    Ok(0)
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_owned();
    name.push(".");
    name.push(suffix);
    PathBuf::from(name)
}

fn report(args: &ReportArgs) -> CliResult<u8> {
    let text = fs::read_to_string(&args.input).map_err(|e| CliError::io(&args.input, e))?;
    let report: VerificationReport = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: not a verification report: {e}", args.input.display())))?;
    print_stdout(&summary_lines(&report))?;
    Ok(if report.passed() { 0 } else { 1 })
}
