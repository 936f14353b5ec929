//! Central finite differences with one level of Richardson extrapolation.

use crate::error::{Error, Result};

pub const DEFAULT_STEP: f64 = 1e-3;

/// Derivative of order 1, 2 or 3 of `f` at `point` along coordinate `dir`.
///
/// All three stencils are second-order accurate; combining steps `h` and
/// `h/2` cancels the leading error term.
pub fn fd_derivative<F>(f: F, point: &[f64], dir: usize, order: u8, h: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    if !(h > 0.0) {
        return Err(Error::usage(format!("step must be positive, got {h}")));
    }
    if dir >= point.len() {
        return Err(Error::usage(format!(
            "direction {dir} out of range for {} variables",
            point.len()
        )));
    }
    let coarse = stencil(&f, point, dir, order, h)?;
    let fine = stencil(&f, point, dir, order, 0.5 * h)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Univariate convenience wrapper.
pub fn fd_derivative_1d<F>(f: F, x: f64, order: u8, h: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    fd_derivative(|p: &[f64]| f(p[0]), &[x], 0, order, h)
}

fn stencil<F>(f: &F, point: &[f64], dir: usize, order: u8, h: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let mut shifted = point.to_vec();
    let mut at = |k: f64| -> Result<f64> {
        shifted[dir] = point[dir] + k * h;
        let v = f(&shifted).map_err(|e| {
            Error::domain("fd_derivative", format!("stencil point {}: {e}", shifted[dir]))
        })?;
        if !v.is_finite() {
            return Err(Error::domain(
                "fd_derivative",
                format!("non-finite value at stencil point {}", shifted[dir]),
            ));
        }
        Ok(v)
    };
    match order {
        1 => Ok((at(1.0)? - at(-1.0)?) / (2.0 * h)),
        2 => Ok((at(1.0)? - 2.0 * at(0.0)? + at(-1.0)?) / (h * h)),
        3 => Ok((at(2.0)? - 2.0 * at(1.0)? + 2.0 * at(-1.0)? - at(-2.0)?) / (2.0 * h * h * h)),
        _ => Err(Error::usage(format!("unsupported derivative order {order}"))),
    }
}
