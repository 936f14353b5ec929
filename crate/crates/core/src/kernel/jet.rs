//! Truncated multivariate Taylor jets.
//!
//! A [`Jet3`] carries the value of a scalar quantity together with all of its
//! partial derivatives up to total order three with respect to `n_vars` chart
//! variables. Arithmetic propagates the derivatives exactly (Leibniz rule for
//! products, Faà di Bruno for composition with elementary functions), so a
//! closed-form immersion evaluated on jets yields exact first, second and third
//! derivatives at a point.
//!
//! Every jet records the highest order it is valid for. Taking a partial
//! derivative lowers that order by one, and binary operations return the
//! smaller of the two operand orders. This lets the verifier derive, say, the
//! first-order jet of a metric coefficient from the third-order jet of an
//! immersion without any bookkeeping at the call site.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Highest derivative order carried by a jet.
pub const MAX_ORDER: u8 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct Jet3 {
    value: f64,
    first: Vec<f64>,
    second: Vec<f64>,
    third: Vec<f64>,
    n_vars: usize,
    order: u8,
}

impl Jet3 {
    fn zeros(n_vars: usize, order: u8) -> Self {
        Jet3 {
            value: 0.0,
            first: if order >= 1 { vec![0.0; n_vars] } else { Vec::new() },
            second: if order >= 2 {
                vec![0.0; n_vars * n_vars]
            } else {
                Vec::new()
            },
            third: if order >= 3 {
                vec![0.0; n_vars * n_vars * n_vars]
            } else {
                Vec::new()
            },
            n_vars,
            order,
        }
    }

    /// A constant, exact to every order.
    pub fn constant(n_vars: usize, value: f64) -> Self {
        let mut j = Jet3::zeros(n_vars, MAX_ORDER);
        j.value = value;
        j
    }

    /// A constant with a prescribed truncation order (cheaper for low orders).
    pub fn constant_with_order(n_vars: usize, order: u8, value: f64) -> Self {
        let mut j = Jet3::zeros(n_vars, order);
        j.value = value;
        j
    }

    /// A constant of the same shape and order as `self`.
    pub fn constant_like(&self, value: f64) -> Self {
        Jet3::constant_with_order(self.n_vars, self.order, value)
    }

    /// The coordinate function `x_index` evaluated at `value`.
    pub fn variable(n_vars: usize, index: usize, value: f64) -> Self {
        assert!(index < n_vars, "variable index {index} out of range");
        let mut j = Jet3::zeros(n_vars, MAX_ORDER);
        j.value = value;
        j.first[index] = 1.0;
        j
    }

    /// Builds a jet depending on a single variable from its derivatives
    /// `[f, f′, f″, f‴]` along that variable. Shorter slices give lower orders.
    pub fn from_derivatives(n_vars: usize, var: usize, derivs: &[f64]) -> Self {
        assert!(!derivs.is_empty() && derivs.len() <= 4);
        assert!(var < n_vars);
        let order = (derivs.len() - 1) as u8;
        let mut j = Jet3::zeros(n_vars, order);
        j.value = derivs[0];
        let n = n_vars;
        if order >= 1 {
            j.first[var] = derivs[1];
        }
        if order >= 2 {
            j.second[var * n + var] = derivs[2];
        }
        if order >= 3 {
            j.third[(var * n + var) * n + var] = derivs[3];
        }
        j
    }

    /// Re-embeds a single-variable jet as a jet in `n_vars` variables depending on `var` only.
    pub fn embed(&self, n_vars: usize, var: usize) -> Self {
        assert_eq!(self.n_vars, 1, "embed expects a univariate jet");
        let d: Vec<f64> = (0..=self.order as usize)
            .map(|k| self.univariate_derivative(k))
            .collect();
        Jet3::from_derivatives(n_vars, var, &d)
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn first(&self, i: usize) -> f64 {
        debug_assert!(self.order >= 1);
        self.first[i]
    }

    pub fn second(&self, i: usize, j: usize) -> f64 {
        debug_assert!(self.order >= 2);
        self.second[i * self.n_vars + j]
    }

    pub fn third(&self, i: usize, j: usize, k: usize) -> f64 {
        debug_assert!(self.order >= 3);
        let n = self.n_vars;
        self.third[(i * n + j) * n + k]
    }

    pub fn gradient(&self) -> &[f64] {
        &self.first
    }

    /// `k`-th derivative of a univariate jet (`k = 0` is the value).
    pub fn univariate_derivative(&self, k: usize) -> f64 {
        debug_assert_eq!(self.n_vars, 1);
        match k {
            0 => self.value,
            1 => self.first[0],
            2 => self.second[0],
            3 => self.third[0],
            _ => panic!("derivative order {k} exceeds jet order"),
        }
    }

    /// Derivative along a chart vector with components `dir`.
    pub fn directional(&self, dir: &[f64]) -> f64 {
        debug_assert!(self.order >= 1);
        self.first.iter().zip(dir).map(|(a, b)| a * b).sum()
    }

    /// The jet of ∂f/∂x_i, one order lower.
    pub fn partial(&self, i: usize) -> Jet3 {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let n = self.n_vars;
        let mut r = Jet3::zeros(n, self.order - 1);
        r.value = self.first[i];
        if r.order >= 1 {
            r.first.copy_from_slice(&self.second[i * n..(i + 1) * n]);
        }
        if r.order >= 2 {
            r.second
                .copy_from_slice(&self.third[i * n * n..(i + 1) * n * n]);
        }
        r
    }

    /// Drops derivative data above `order`.
    pub fn truncate(&self, order: u8) -> Jet3 {
        if order >= self.order {
            return self.clone();
        }
        let mut r = self.clone();
        r.order = order;
        if order < 3 {
            r.third.clear();
        }
        if order < 2 {
            r.second.clear();
        }
        if order < 1 {
            r.first.clear();
        }
        r
    }

    fn check_shape(&self, other: &Jet3) {
        assert_eq!(
            self.n_vars, other.n_vars,
            "jets over different variable counts"
        );
    }

    pub fn scale(&self, c: f64) -> Jet3 {
        let mut r = self.clone();
        r.value *= c;
        r.first.iter_mut().for_each(|x| *x *= c);
        r.second.iter_mut().for_each(|x| *x *= c);
        r.third.iter_mut().for_each(|x| *x *= c);
        r
    }

    pub fn add_scalar(&self, c: f64) -> Jet3 {
        let mut r = self.clone();
        r.value += c;
        r
    }

    fn zip_linear(&self, other: &Jet3, a: f64, b: f64) -> Jet3 {
        self.check_shape(other);
        let order = self.order.min(other.order);
        let mut r = Jet3::zeros(self.n_vars, order);
        r.value = a * self.value + b * other.value;
        for (dst, (x, y)) in r.first.iter_mut().zip(self.first.iter().zip(&other.first)) {
            *dst = a * x + b * y;
        }
        for (dst, (x, y)) in r
            .second
            .iter_mut()
            .zip(self.second.iter().zip(&other.second))
        {
            *dst = a * x + b * y;
        }
        for (dst, (x, y)) in r.third.iter_mut().zip(self.third.iter().zip(&other.third)) {
            *dst = a * x + b * y;
        }
        r
    }

    fn product(&self, o: &Jet3) -> Jet3 {
        let mut r = Jet3::zeros(self.n_vars, self.order.min(o.order));
        r.add_product(self, o);
        r
    }

    /// Drops derivative orders above `order`.
    fn truncate_to(&mut self, order: u8) {
        if order < self.order {
            if order < 3 {
                self.third.clear();
            }
            if order < 2 {
                self.second.clear();
            }
            if order < 1 {
                self.first.clear();
            }
            self.order = order;
        }
    }

    /// `self += x·y` without temporaries; the result keeps the lowest order involved.
    pub fn add_product(&mut self, x: &Jet3, y: &Jet3) {
        x.check_shape(y);
        self.check_shape(x);
        let n = self.n_vars;
        let order = self.order.min(x.order).min(y.order);
        self.truncate_to(order);
        let (a, b) = (x.value, y.value);
        self.value += a * b;
        if order >= 1 {
            let (xf, yf) = (&x.first[..n], &y.first[..n]);
            for (i, dst) in self.first[..n].iter_mut().enumerate() {
                *dst += xf[i] * b + a * yf[i];
            }
        }
        if order >= 2 {
            let (xf, yf) = (&x.first[..n], &y.first[..n]);
            let (xs, ys) = (&x.second[..n * n], &y.second[..n * n]);
            for (ij, dst) in self.second[..n * n].iter_mut().enumerate() {
                let (i, j) = (ij / n, ij % n);
                *dst += xs[ij] * b + xf[i] * yf[j] + xf[j] * yf[i] + a * ys[ij];
            }
        }
        if order >= 3 {
            let (xf, yf) = (&x.first[..n], &y.first[..n]);
            let (xs, ys) = (&x.second[..n * n], &y.second[..n * n]);
            let (xt, yt) = (&x.third[..n * n * n], &y.third[..n * n * n]);
            let dst = &mut self.third[..n * n * n];
            for i in 0..n {
                for j in 0..n {
                    let ij = i * n + j;
                    let (xij, yij) = (xs[ij], ys[ij]);
                    let row = &mut dst[ij * n..ij * n + n];
                    let (xik, yik) = (&xs[i * n..i * n + n], &ys[i * n..i * n + n]);
                    let (xjk, yjk) = (&xs[j * n..j * n + n], &ys[j * n..j * n + n]);
                    let (xt_row, yt_row) = (&xt[ij * n..ij * n + n], &yt[ij * n..ij * n + n]);
                    for k in 0..n {
                        row[k] += xt_row[k] * b
                            + xij * yf[k]
                            + xik[k] * yf[j]
                            + xjk[k] * yf[i]
                            + xf[i] * yjk[k]
                            + xf[j] * yik[k]
                            + xf[k] * yij
                            + a * yt_row[k];
                    }
                }
            }
        }
    }

    /// Composition `g ∘ self` given `[g, g′, g″, g‴]` evaluated at `self.value()`.
    pub fn chain(&self, g: [f64; 4]) -> Jet3 {
        let n = self.n_vars;
        let mut r = Jet3::zeros(n, self.order);
        r.value = g[0];
        if self.order >= 1 {
            for i in 0..n {
                r.first[i] = g[1] * self.first[i];
            }
        }
        if self.order >= 2 {
            for i in 0..n {
                for j in 0..n {
                    let ij = i * n + j;
                    r.second[ij] = g[2] * self.first[i] * self.first[j] + g[1] * self.second[ij];
                }
            }
        }
        if self.order >= 3 {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let ijk = (i * n + j) * n + k;
                        let f = &self.first;
                        let s = &self.second;
                        r.third[ijk] = g[3] * f[i] * f[j] * f[k]
                            + g[2] * (s[i * n + j] * f[k] + s[i * n + k] * f[j] + s[j * n + k] * f[i])
                            + g[1] * self.third[ijk];
                    }
                }
            }
        }
        r
    }

    /// Composes a univariate jet with `inner`, whose value must be this jet's base point.
    pub fn pullback(&self, inner: &Jet3) -> Jet3 {
        debug_assert_eq!(self.n_vars, 1);
        let d = |k: usize| if k as u8 <= self.order { self.univariate_derivative(k) } else { 0.0 };
        inner.chain([d(0), d(1), d(2), d(3)]).truncate(self.order)
    }

    pub fn exp(&self) -> Jet3 {
        let e = self.value.exp();
        self.chain([e, e, e, e])
    }

    pub fn sin(&self) -> Jet3 {
        let (s, c) = self.value.sin_cos();
        self.chain([s, c, -s, -c])
    }

    pub fn cos(&self) -> Jet3 {
        let (s, c) = self.value.sin_cos();
        self.chain([c, -s, -c, s])
    }

    pub fn sinh(&self) -> Jet3 {
        let (sh, ch) = (self.value.sinh(), self.value.cosh());
        self.chain([sh, ch, sh, ch])
    }

    pub fn cosh(&self) -> Jet3 {
        let (sh, ch) = (self.value.sinh(), self.value.cosh());
        self.chain([ch, sh, ch, sh])
    }

    pub fn tanh(&self) -> Jet3 {
        let t = self.value.tanh();
        let s = 1.0 - t * t;
        self.chain([t, s, -2.0 * t * s, s * (6.0 * t * t - 2.0)])
    }

    pub fn sech(&self) -> Jet3 {
        // cosh ≥ 1, so the reciprocal is always defined
        let ch = self.cosh();
        let v = 1.0 / ch.value;
        ch.chain([v, -v * v, 2.0 * v * v * v, -6.0 * v * v * v * v])
    }

    pub fn atan(&self) -> Jet3 {
        let x = self.value;
        let q = 1.0 + x * x;
        self.chain([
            x.atan(),
            1.0 / q,
            -2.0 * x / (q * q),
            (6.0 * x * x - 2.0) / (q * q * q),
        ])
    }

    pub fn sqrt(&self) -> Result<Jet3> {
        if !(self.value > 0.0) {
            return Err(Error::domain(
                "sqrt",
                format!("argument {:e} is not positive", self.value),
            ));
        }
        let r = self.value.sqrt();
        Ok(self.chain([
            r,
            0.5 / r,
            -0.25 / (r * r * r),
            0.375 / (r * r * r * r * r),
        ]))
    }

    pub fn ln(&self) -> Result<Jet3> {
        if !(self.value > 0.0) {
            return Err(Error::domain(
                "ln",
                format!("argument {:e} is not positive", self.value),
            ));
        }
        let x = self.value;
        Ok(self.chain([x.ln(), 1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x)]))
    }

    /// Real power `self^p`; requires a positive base.
    pub fn powf(&self, p: f64) -> Result<Jet3> {
        if !(self.value > 0.0) {
            return Err(Error::domain(
                "powf",
                format!("base {:e} is not positive (exponent {p})", self.value),
            ));
        }
        let x = self.value;
        let v = x.powf(p);
        Ok(self.chain([
            v,
            p * v / x,
            p * (p - 1.0) * v / (x * x),
            p * (p - 1.0) * (p - 2.0) * v / (x * x * x),
        ]))
    }

    pub fn recip(&self) -> Result<Jet3> {
        let x = self.value;
        if x == 0.0 || !x.is_finite() {
            return Err(Error::domain("recip", format!("division by {x:e}")));
        }
        let v = 1.0 / x;
        Ok(self.chain([v, -v * v, 2.0 * v * v * v, -6.0 * v * v * v * v]))
    }

    pub fn checked_div(&self, denom: &Jet3) -> Result<Jet3> {
        Ok(self * &denom.recip()?)
    }

    pub fn powi(&self, k: u32) -> Jet3 {
        let mut acc = self.constant_like(1.0);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }
}

impl Add for &Jet3 {
    type Output = Jet3;
    fn add(self, rhs: &Jet3) -> Jet3 {
        self.zip_linear(rhs, 1.0, 1.0)
    }
}

impl Sub for &Jet3 {
    type Output = Jet3;
    fn sub(self, rhs: &Jet3) -> Jet3 {
        self.zip_linear(rhs, 1.0, -1.0)
    }
}

impl Mul for &Jet3 {
    type Output = Jet3;
    fn mul(self, rhs: &Jet3) -> Jet3 {
        self.product(rhs)
    }
}

impl Neg for &Jet3 {
    type Output = Jet3;
    fn neg(self) -> Jet3 {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Jet3 {
            type Output = Jet3;
            fn $m(self, rhs: Jet3) -> Jet3 {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Jet3> for Jet3 {
            type Output = Jet3;
            fn $m(self, rhs: &Jet3) -> Jet3 {
                (&self).$m(rhs)
            }
        }
        impl $tr<Jet3> for &Jet3 {
            type Output = Jet3;
            fn $m(self, rhs: Jet3) -> Jet3 {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Jet3 {
    type Output = Jet3;
    fn neg(self) -> Jet3 {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &Jet3 {
    type Output = Jet3;
    fn mul(self, rhs: f64) -> Jet3 {
        self.scale(rhs)
    }
}

impl Mul<f64> for Jet3 {
    type Output = Jet3;
    fn mul(self, rhs: f64) -> Jet3 {
        self.scale(rhs)
    }
}

impl Add<f64> for &Jet3 {
    type Output = Jet3;
    fn add(self, rhs: f64) -> Jet3 {
        self.add_scalar(rhs)
    }
}

impl Add<f64> for Jet3 {
    type Output = Jet3;
    fn add(self, rhs: f64) -> Jet3 {
        self.add_scalar(rhs)
    }
}

impl Sub<f64> for &Jet3 {
    type Output = Jet3;
    fn sub(self, rhs: f64) -> Jet3 {
        self.add_scalar(-rhs)
    }
}

impl Sub<f64> for Jet3 {
    type Output = Jet3;
    fn sub(self, rhs: f64) -> Jet3 {
        self.add_scalar(-rhs)
    }
}

/// Evaluates a closed-form chart map on jets seeded at `point`.
///
/// The map receives one variable jet per chart coordinate and returns the
/// jets of its output coordinates; their derivative data is exact through
/// order three.
pub fn jet_lift<F>(point: &[f64], f: F) -> Result<Vec<Jet3>>
where
    F: FnOnce(&[Jet3]) -> Result<Vec<Jet3>>,
{
    let n = point.len();
    let vars: Vec<Jet3> = point
        .iter()
        .enumerate()
        .map(|(i, &x)| Jet3::variable(n, i, x))
        .collect();
    f(&vars)
}

/// Taylor data of a solution of the autonomous system `y′ = rhs(y)` through `y0`.
///
/// Picard iteration on univariate jets: after three sweeps every component is
/// exact through order three, and `rhs` applied to the result gives `y′`
/// through order three (hence `y⁗`).
pub fn taylor_solution<F>(y0: &[f64], rhs: F) -> Result<Vec<Jet3>>
where
    F: Fn(&[Jet3]) -> Result<Vec<Jet3>>,
{
    let mut y: Vec<Jet3> = y0
        .iter()
        .map(|&v| Jet3::constant_with_order(1, 0, v))
        .collect();
    for order in 1..=MAX_ORDER {
        let f = rhs(&y)?;
        y = y0
            .iter()
            .zip(&f)
            .map(|(&v, fi)| {
                let mut d = vec![v];
                for k in 0..order as usize {
                    d.push(fi.univariate_derivative(k));
                }
                Jet3::from_derivatives(1, 0, &d)
            })
            .collect();
    }
    Ok(y)
}
