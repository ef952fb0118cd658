//! Truncated Taylor jets.
//!
//! A [`Jet`] of order `k` stores the Taylor coefficients `c_j = f^(j)(t0) / j!`
//! for `j = 0..=k`. Arithmetic on jets propagates derivatives exactly (up to
//! rounding), which is how every derivative in this crate is computed.

#![allow(clippy::needless_range_loop)]

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Highest derivative order carried by a jet.
pub const MAX_ORDER: usize = 4;
const LEN: usize = MAX_ORDER + 1;

const FACTORIAL: [f64; LEN] = [1.0, 1.0, 2.0, 6.0, 24.0];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    coeffs: [f64; LEN],
    order: usize,
}

impl Jet {
    pub fn constant(value: f64, order: usize) -> Self {
        assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
        let mut coeffs = [0.0; LEN];
        coeffs[0] = value;
        Self { coeffs, order }
    }

    /// The identity function expanded at `at`.
    pub fn variable(at: f64, order: usize) -> Self {
        let mut jet = Self::constant(at, order);
        if order >= 1 {
            jet.coeffs[1] = 1.0;
        }
        jet
    }

    /// Builds a jet from Taylor coefficients.
    pub fn from_coeffs(coeffs: &[f64]) -> Self {
        assert!(!coeffs.is_empty() && coeffs.len() <= LEN);
        let mut c = [0.0; LEN];
        c[..coeffs.len()].copy_from_slice(coeffs);
        Self { coeffs: c, order: coeffs.len() - 1 }
    }

    /// Builds a jet from plain derivatives `[f, f', f'', ...]`.
    pub fn from_derivatives(derivs: &[f64]) -> Self {
        let mut jet = Self::from_coeffs(derivs);
        for k in 0..=jet.order {
            jet.coeffs[k] /= FACTORIAL[k];
        }
        jet
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeff(&self, k: usize) -> f64 {
        assert!(k <= self.order);
        self.coeffs[k]
    }

    /// The `k`-th derivative at the expansion point.
    pub fn derivative(&self, k: usize) -> f64 {
        self.coeff(k) * FACTORIAL[k]
    }

    pub fn derivatives(&self) -> Vec<f64> {
        (0..=self.order).map(|k| self.derivative(k)).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs[..=self.order].iter().all(|c| c.is_finite())
    }

    pub fn truncate(mut self, order: usize) -> Self {
        let order = order.min(self.order);
        for c in &mut self.coeffs[order + 1..] {
            *c = 0.0;
        }
        self.order = order;
        self
    }

    /// Jet of `f'`, one order lower.
    pub fn differentiate(&self) -> Self {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let mut coeffs = [0.0; LEN];
        for k in 0..self.order {
            coeffs[k] = (k + 1) as f64 * self.coeffs[k + 1];
        }
        Self { coeffs, order: self.order - 1 }
    }

    /// Jet of an antiderivative whose value at the expansion point is `value`.
    pub fn antiderivative(&self, value: f64) -> Self {
        assert!(self.order < MAX_ORDER, "antiderivative would exceed order {MAX_ORDER}");
        let mut coeffs = [0.0; LEN];
        coeffs[0] = value;
        for k in 0..=self.order {
            coeffs[k + 1] = self.coeffs[k] / (k + 1) as f64;
        }
        Self { coeffs, order: self.order + 1 }
    }

    pub fn scale(mut self, factor: f64) -> Self {
        for c in &mut self.coeffs[..=self.order] {
            *c *= factor;
        }
        self
    }

    /// Composes a scalar function with this jet, given the function's
    /// derivatives `[w(u0), w'(u0), ...]` at `u0 = self.value()`.
    ///
    /// Infinite outer derivatives only contaminate the coefficients they
    /// actually contribute to.
    pub fn compose(&self, outer: &[f64]) -> Self {
        let order = self.order;
        assert!(outer.len() > order);
        let mut delta = *self;
        delta.coeffs[0] = 0.0;
        let mut power = Self::constant(1.0, order);
        let mut out = [0.0; LEN];
        for (k, &w) in outer.iter().enumerate().take(order + 1) {
            let wk = w / FACTORIAL[k];
            if wk != 0.0 {
                for j in k..=order {
                    if power.coeffs[j] != 0.0 {
                        out[j] += wk * power.coeffs[j];
                    }
                }
            }
            if k < order {
                power = power * delta;
            }
        }
        Self { coeffs: out, order }
    }

    pub fn powf(&self, exponent: f64) -> Self {
        let u0 = self.value();
        let mut outer = [0.0; LEN];
        let mut falling = 1.0;
        for (k, w) in outer.iter_mut().enumerate().take(self.order + 1) {
            *w = if falling == 0.0 { 0.0 } else { falling * u0.powf(exponent - k as f64) };
            falling *= exponent - k as f64;
        }
        self.compose(&outer[..=self.order])
    }

    pub fn powi(&self, n: i32) -> Self {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut result = Self::constant(1.0, self.order);
        let mut base = *self;
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = result * base;
            }
            e >>= 1;
            if e > 0 {
                base = base * base;
            }
        }
        result
    }

    pub fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    pub fn exp(&self) -> Self {
        let e = self.value().exp();
        self.compose(&[e; LEN][..=self.order])
    }

    pub fn recip(&self) -> Self {
        Self::constant(1.0, self.order) / *self
    }
}

fn binary_order(a: &Jet, b: &Jet) -> usize {
    a.order.min(b.order)
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        let order = binary_order(&self, &rhs);
        let mut coeffs = [0.0; LEN];
        for k in 0..=order {
            coeffs[k] = self.coeffs[k] + rhs.coeffs[k];
        }
        Jet { coeffs, order }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self + (-rhs)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let order = binary_order(&self, &rhs);
        let mut coeffs = [0.0; LEN];
        for k in 0..=order {
            coeffs[k] = (0..=k).map(|j| self.coeffs[j] * rhs.coeffs[k - j]).sum();
        }
        Jet { coeffs, order }
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        let order = binary_order(&self, &rhs);
        let b0 = rhs.coeffs[0];
        let mut coeffs = [0.0; LEN];
        for k in 0..=order {
            let acc: f64 = (0..k).map(|j| coeffs[j] * rhs.coeffs[k - j]).sum();
            coeffs[k] = (self.coeffs[k] - acc) / b0;
        }
        Jet { coeffs, order }
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.coeffs[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(self, rhs: f64) -> Jet {
        self + (-rhs)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Add<Jet> for f64 {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        rhs + self
    }
}

impl Sub<Jet> for f64 {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        -rhs + self
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        rhs.scale(self)
    }
}
