//! Ambient complex spaces ℂ^m and ℂ₁^m realised as ℝ^{2m}.
//!
//! Coordinates are stored as interleaved pairs `(x₁, y₁, x₂, y₂, …)` with
//! `z_j = x_j + i y_j`. The Lorentzian signature negates the first pair, which
//! is the inner product of the anti-de Sitter model H₁^{2m−1}(−1).

use serde::{Deserialize, Serialize};

use super::jet::Jet3;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Signature {
    /// ℂ^m with ⟨z, w⟩ = Re Σ z_j w̄_j.
    Euclidean(usize),
    /// ℂ₁^m with ⟨z, w⟩ = Re(−z₁w̄₁ + Σ_{j≥2} z_j w̄_j).
    Lorentz(usize),
}

impl Signature {
    /// Complex dimension m.
    pub fn complex_dim(self) -> usize {
        match self {
            Signature::Euclidean(m) | Signature::Lorentz(m) => m,
        }
    }

    pub fn real_dim(self) -> usize {
        2 * self.complex_dim()
    }

    /// Sign attached to real coordinate `index`.
    #[inline]
    pub fn sign(self, index: usize) -> f64 {
        match self {
            Signature::Lorentz(_) if index < 2 => -1.0,
            _ => 1.0,
        }
    }

    /// Indefinite inner product of two real coordinate vectors.
    pub fn dot(self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        a.iter()
            .zip(b)
            .enumerate()
            .map(|(i, (x, y))| self.sign(i) * x * y)
            .sum()
    }

    /// Inner product of jet-valued coordinate vectors.
    pub fn dot_jets(self, a: &[Jet3], b: &[Jet3]) -> Jet3 {
        debug_assert_eq!(a.len(), b.len());
        let mut acc = a[0].constant_like(0.0);
        for i in 0..a.len() {
            if self.sign(i) < 0.0 {
                acc.add_product(&-&a[i], &b[i]);
            } else {
                acc.add_product(&a[i], &b[i]);
            }
        }
        acc
    }
}

/// Applies J (multiplication by i) pairwise: (x, y) ↦ (−y, x).
pub fn j_apply(coords: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; coords.len()];
    for p in 0..coords.len() / 2 {
        out[2 * p] = -coords[2 * p + 1];
        out[2 * p + 1] = coords[2 * p];
    }
    out
}

pub fn j_apply_jets(coords: &[Jet3]) -> Vec<Jet3> {
    let mut out = Vec::with_capacity(coords.len());
    for p in 0..coords.len() / 2 {
        out.push(-&coords[2 * p + 1]);
        out.push(coords[2 * p].clone());
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmbientVector {
    pub coords: Vec<f64>,
    pub sig: Signature,
}

impl AmbientVector {
    pub fn new(coords: Vec<f64>, sig: Signature) -> Result<Self> {
        if coords.len() != sig.real_dim() {
            return Err(Error::usage(format!(
                "expected {} real coordinates for {:?}, got {}",
                sig.real_dim(),
                sig,
                coords.len()
            )));
        }
        Ok(AmbientVector { coords, sig })
    }

    /// Builds a vector from complex coordinates `(re, im)` pairs.
    pub fn from_complex(z: &[(f64, f64)], sig: Signature) -> Result<Self> {
        let coords = z.iter().flat_map(|&(x, y)| [x, y]).collect();
        AmbientVector::new(coords, sig)
    }
}

/// ⟨v, w⟩ = Re Σ ±z_i w̄_i with the sign pattern of the shared signature.
pub fn inner(v: &AmbientVector, w: &AmbientVector) -> Result<f64> {
    if v.sig != w.sig {
        return Err(Error::usage(format!(
            "signature mismatch: {:?} vs {:?}",
            v.sig, w.sig
        )));
    }
    if v.coords.len() != w.coords.len() {
        return Err(Error::usage("dimension mismatch in inner product"));
    }
    Ok(v.sig.dot(&v.coords, &w.coords))
}

pub fn apply_j(v: &AmbientVector) -> AmbientVector {
    AmbientVector {
        coords: j_apply(&v.coords),
        sig: v.sig,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn euclidean_unit_vector() {
        let v = AmbientVector::new(vec![1.0, 0.0, 0.0, 0.0], Signature::Euclidean(2)).unwrap();
        assert_eq!(inner(&v, &v).unwrap(), 1.0);
    }

    #[test]
    fn lorentz_first_coordinate_is_timelike() {
        let v = AmbientVector::new(vec![1.0, 0.0, 0.0, 0.0], Signature::Lorentz(2)).unwrap();
        assert_eq!(inner(&v, &v).unwrap(), -1.0);
    }

    #[test]
    fn one_and_i_are_orthogonal() {
        let v = AmbientVector::new(vec![1.0, 0.0], Signature::Euclidean(1)).unwrap();
        let w = AmbientVector::new(vec![0.0, 1.0], Signature::Euclidean(1)).unwrap();
        assert_eq!(inner(&v, &w).unwrap(), 0.0);
    }

    #[test]
    fn mismatches_are_usage_errors() {
        let v = AmbientVector::new(vec![1.0, 0.0], Signature::Euclidean(1)).unwrap();
        let w = AmbientVector::new(vec![1.0, 0.0], Signature::Lorentz(1)).unwrap();
        assert!(matches!(inner(&v, &w), Err(Error::Usage(_))));
        assert!(AmbientVector::new(vec![1.0], Signature::Euclidean(1)).is_err());
    }

    #[test]
    fn j_on_basis() {
        assert_eq!(j_apply(&[1.0, 0.0]), vec![0.0, 1.0]);
        assert_eq!(j_apply(&[0.0, 1.0]), vec![-1.0, 0.0]);
    }

    fn sig_strategy() -> impl Strategy<Value = Signature> {
        prop_oneof![Just(Signature::Euclidean(3)), Just(Signature::Lorentz(3))]
    }

    fn vec6() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-5.0f64..5.0, 6)
    }

    proptest! {
        #[test]
        fn j_squares_to_minus_identity(v in vec6()) {
            let jj = j_apply(&j_apply(&v));
            for (a, b) in jj.iter().zip(&v) {
                prop_assert_eq!(*a, -*b);
            }
        }

        #[test]
        fn j_is_an_isometry_and_skew(sig in sig_strategy(), v in vec6(), w in vec6()) {
            let a = AmbientVector::new(v.clone(), sig).unwrap();
            let b = AmbientVector::new(w.clone(), sig).unwrap();
            let base = inner(&a, &b).unwrap();
            let rotated = inner(&apply_j(&a), &apply_j(&b)).unwrap();
            prop_assert!((base - rotated).abs() <= 1e-12 * (1.0 + base.abs()));
            prop_assert!(inner(&apply_j(&a), &a).unwrap().abs() <= 1e-12);
        }

        #[test]
        fn inner_is_bilinear_and_symmetric(
            sig in sig_strategy(), u in vec6(), v in vec6(), w in vec6(),
            alpha in -3.0f64..3.0, beta in -3.0f64..3.0,
        ) {
            let mix: Vec<f64> = u.iter().zip(&v).map(|(x, y)| alpha * x + beta * y).collect();
            let lhs = sig.dot(&mix, &w);
            let rhs = alpha * sig.dot(&u, &w) + beta * sig.dot(&v, &w);
            prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
            prop_assert_eq!(sig.dot(&u, &w), sig.dot(&w, &u));
        }

        #[test]
        fn only_lorentz_admits_negative_norms(v in vec6()) {
            prop_assert!(Signature::Euclidean(3).dot(&v, &v) >= 0.0);
        }
    }

    #[test]
    fn lorentz_negative_norm_exists() {
        let v = [2.0, 0.0, 1.0, 0.0, 0.0, 0.0];
        assert!(Signature::Lorentz(3).dot(&v, &v) < 0.0);
    }
}
