//! Complex numbers whose real and imaginary parts are jets.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::jet::Jet3;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct CJet {
    pub re: Jet3,
    pub im: Jet3,
}

impl CJet {
    pub fn new(re: Jet3, im: Jet3) -> Self {
        CJet { re, im }
    }

    pub fn real(re: Jet3) -> Self {
        let im = re.constant_like(0.0);
        CJet { re, im }
    }

    pub fn constant(n_vars: usize, z: Complex64) -> Self {
        CJet {
            re: Jet3::constant(n_vars, z.re),
            im: Jet3::constant(n_vars, z.im),
        }
    }

    /// `e^{iφ}` for a real jet `φ`.
    pub fn unit_phase(phase: &Jet3) -> Self {
        CJet {
            re: phase.cos(),
            im: phase.sin(),
        }
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }

    pub fn n_vars(&self) -> usize {
        self.re.n_vars()
    }

    pub fn conj(&self) -> Self {
        CJet {
            re: self.re.clone(),
            im: -&self.im,
        }
    }

    /// Multiplication by `i`.
    pub fn times_i(&self) -> Self {
        CJet {
            re: -&self.im,
            im: self.re.clone(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        CJet {
            re: self.re.scale(c),
            im: self.im.scale(c),
        }
    }

    pub fn scale_complex(&self, c: Complex64) -> Self {
        CJet {
            re: &self.re.scale(c.re) - &self.im.scale(c.im),
            im: &self.re.scale(c.im) + &self.im.scale(c.re),
        }
    }

    pub fn mul_real(&self, r: &Jet3) -> Self {
        CJet {
            re: &self.re * r,
            im: &self.im * r,
        }
    }

    /// |z|² as a real jet.
    pub fn norm_sqr(&self) -> Jet3 {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn exp(&self) -> Self {
        let m = self.re.exp();
        CJet {
            re: &m * &self.im.cos(),
            im: &m * &self.im.sin(),
        }
    }

    pub fn recip(&self) -> Result<Self> {
        let inv = self.norm_sqr().recip()?;
        Ok(self.conj().mul_real(&inv))
    }

    pub fn checked_div(&self, denom: &CJet) -> Result<Self> {
        Ok(self * &denom.recip()?)
    }

    /// Derivative data of a univariate complex jet: `k`-th derivative.
    pub fn univariate_derivative(&self, k: usize) -> Complex64 {
        Complex64::new(
            self.re.univariate_derivative(k),
            self.im.univariate_derivative(k),
        )
    }

    pub fn pullback(&self, inner: &Jet3) -> Self {
        CJet {
            re: self.re.pullback(inner),
            im: self.im.pullback(inner),
        }
    }

    pub fn embed(&self, n_vars: usize, var: usize) -> Self {
        CJet {
            re: self.re.embed(n_vars, var),
            im: self.im.embed(n_vars, var),
        }
    }
}

impl Add for &CJet {
    type Output = CJet;
    fn add(self, rhs: &CJet) -> CJet {
        CJet {
            re: &self.re + &rhs.re,
            im: &self.im + &rhs.im,
        }
    }
}

impl Sub for &CJet {
    type Output = CJet;
    fn sub(self, rhs: &CJet) -> CJet {
        CJet {
            re: &self.re - &rhs.re,
            im: &self.im - &rhs.im,
        }
    }
}

impl Mul for &CJet {
    type Output = CJet;
    fn mul(self, rhs: &CJet) -> CJet {
        CJet {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl Neg for &CJet {
    type Output = CJet;
    fn neg(self) -> CJet {
        self.scale(-1.0)
    }
}

impl Add for CJet {
    type Output = CJet;
    fn add(self, rhs: CJet) -> CJet {
        &self + &rhs
    }
}

impl Sub for CJet {
    type Output = CJet;
    fn sub(self, rhs: CJet) -> CJet {
        &self - &rhs
    }
}

impl Mul for CJet {
    type Output = CJet;
    fn mul(self, rhs: CJet) -> CJet {
        &self * &rhs
    }
}
