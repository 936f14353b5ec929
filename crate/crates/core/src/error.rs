use thiserror::Error;

/// Errors raised while building or verifying a submanifold.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Caller supplied inconsistent or out-of-range arguments.
    #[error("usage error: {0}")]
    Usage(String),

    /// An elementary operation was evaluated outside its domain.
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    /// The unit-speed plane curve is momentarily radial (4α − α′² ≤ 0).
    #[error("degenerate curve at s = {s}: 4α − α′² = {discriminant:e}")]
    DegenerateCurve { s: f64, discriminant: f64 },

    /// The chart does not define an immersion at the requested point.
    #[error("degenerate chart: {0}")]
    DegenerateChart(String),

    /// A branch condition of the construction fails (λ = 2μ, sign of μ² + k² − 1, ...).
    #[error("branch error: {0}")]
    Branch(String),

    /// Structure functions do not satisfy the curve equation they are fed into.
    #[error("inconsistent input: {0}")]
    InconsistentInput(String),

    /// Mean curvature vanishes, so e₁ = JH/|H| is undefined.
    #[error("minimal point: |H| = {0:e}")]
    MinimalPoint(f64),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("not supported: {0}")]
    NotSupported(String),

    /// Integration could not be started or continued.
    #[error("ode error: {0}")]
    Ode(String),
}

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
