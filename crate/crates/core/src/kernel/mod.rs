//! Numeric kernel: jets, finite differences, quadrature and the ambient inner products.

pub mod ambient;
pub mod complex;
pub mod fd;
pub mod jet;
pub mod quad;

pub use ambient::{apply_j, inner, j_apply, j_apply_jets, AmbientVector, Signature};
pub use complex::CJet;
pub use fd::{fd_derivative, fd_derivative_1d, DEFAULT_STEP};
pub use jet::{jet_lift, taylor_solution, Jet3, MAX_ORDER};
pub use quad::{adaptive_simpson, integral_jet, CumulativeIntegral, RunningIntegral};
