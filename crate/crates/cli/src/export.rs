//! CSV writers. Numbers carry 17 significant digits in exponent form so files
//! are locale-independent and round-trip exactly.

use humbilical::immersion::Immersion;
use humbilical::legendre::sample_grid;
use humbilical::structure::StructureFunctions;
use humbilical::verify::{verify_points, VerifyOptions, RESIDUAL_COLUMNS};

use crate::{CliError, CliResult};

fn num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x:.16e}")
    }
}

fn finish(writer: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(writer.into_inner().expect("in-memory writer")).expect("ascii output")
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Failed(format!("csv: {e}"))
}

/// Header of [`points_csv`] for a chart of dimension `n` in ℂ^m.
pub fn points_header(n: usize, m: usize) -> Vec<String> {
    let mut head: Vec<String> = (0..n).map(|i| format!("u{i}")).collect();
    head.extend((0..2 * m).map(|i| format!("x{i}")));
    head.extend(["lambda", "mu", "abs_h"].map(String::from));
    head.extend(RESIDUAL_COLUMNS.iter().map(|c| c.to_string()));
    head
}

/// Chart coordinates, ambient real coordinates, λ, μ, |H| and the per-point residuals.
/// Residuals that do not apply to the chart are left empty.
pub fn points_csv(imm: &Immersion, expected_ratio: Option<f64>, opts: &VerifyOptions) -> CliResult<String> {
    let (records, _) = verify_points(imm, expected_ratio, opts)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(points_header(imm.chart.dim(), imm.chart.sig().complex_dim()))
        .map_err(csv_error)?;
    for r in &records {
        let mut row: Vec<String> = r.chart.iter().chain(&r.ambient).map(|&x| num(x)).collect();
        row.extend([r.lambda, r.mu, r.mean_curvature].map(num));
        row.extend(r.residual_columns().map(num));
        w.write_record(&row).map_err(csv_error)?;
    }
    Ok(finish(w))
}

pub const PROFILE_HEADER: [&str; 5] = ["s", "mu", "mu_prime", "lambda", "k"];

/// (s, μ, μ′, λ, k) on `samples` points of the profile domain.
pub fn profile_csv(sf: &StructureFunctions, samples: usize) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(PROFILE_HEADER).map_err(csv_error)?;
    for s in sample_grid(sf.domain(), samples.max(2)) {
        let jets = sf.jets(s)?;
        let row = [s, jets.mu.value(), jets.mu.univariate_derivative(1), jets.lambda.value(), jets.k.value()];
        w.write_record(row.map(num)).map_err(csv_error)?;
    }
    Ok(finish(w))
}
