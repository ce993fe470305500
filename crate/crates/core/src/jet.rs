//! Second-order forward-mode automatic differentiation in four variables.
//!
//! Metric components are written once, generic over [`Scalar`]. Evaluating
//! them on [`Jet2`] seeds yields exact first and second coordinate
//! derivatives, which is all the curvature pipeline needs.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Arithmetic needed to evaluate a metric in closed form.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn cst(v: f64) -> Self;
    fn value(&self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn powf(self, p: f64) -> Self;
    fn recip(self) -> Self {
        Self::cst(1.0) / self
    }
    fn scale(self, c: f64) -> Self {
        self * Self::cst(c)
    }
}

impl Scalar for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
    fn recip(self) -> Self {
        1.0 / self
    }
    fn scale(self, c: f64) -> Self {
        self * c
    }
}

/// Value, gradient and Hessian with respect to four coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet2 {
    pub v: f64,
    pub d: [f64; 4],
    pub h: [[f64; 4]; 4],
}

impl Jet2 {
    pub fn constant(v: f64) -> Self {
        Jet2 {
            v,
            d: [0.0; 4],
            h: [[0.0; 4]; 4],
        }
    }

    /// The coordinate function x^i evaluated at `v`.
    pub fn variable(v: f64, i: usize) -> Self {
        let mut j = Jet2::constant(v);
        j.d[i] = 1.0;
        j
    }

    pub fn seed(x: [f64; 4]) -> [Jet2; 4] {
        [0, 1, 2, 3].map(|i| Jet2::variable(x[i], i))
    }

    /// Compose with a scalar function given its value and first two derivatives.
    fn chain(self, f0: f64, f1: f64, f2: f64) -> Self {
        let mut out = Jet2::constant(f0);
        for i in 0..4 {
            out.d[i] = f1 * self.d[i];
            for k in 0..4 {
                out.h[i][k] = f1 * self.h[i][k] + f2 * self.d[i] * self.d[k];
            }
        }
        out
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(mut self, o: Jet2) -> Jet2 {
        self.v += o.v;
        for i in 0..4 {
            self.d[i] += o.d[i];
            for k in 0..4 {
                self.h[i][k] += o.h[i][k];
            }
        }
        self
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        self + (-o)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(mut self) -> Jet2 {
        self.v = -self.v;
        for i in 0..4 {
            self.d[i] = -self.d[i];
            for k in 0..4 {
                self.h[i][k] = -self.h[i][k];
            }
        }
        self
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        let mut out = Jet2::constant(self.v * o.v);
        for i in 0..4 {
            out.d[i] = self.v * o.d[i] + o.v * self.d[i];
            for k in 0..4 {
                out.h[i][k] = self.v * o.h[i][k]
                    + o.v * self.h[i][k]
                    + self.d[i] * o.d[k]
                    + o.d[i] * self.d[k];
            }
        }
        out
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    fn div(self, o: Jet2) -> Jet2 {
        self * o.recip()
    }
}

impl Scalar for Jet2 {
    fn cst(v: f64) -> Self {
        Jet2::constant(v)
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }
    fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }
    fn ln(self) -> Self {
        let r = 1.0 / self.v;
        self.chain(self.v.ln(), r, -r * r)
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.v))
    }
    fn powf(self, p: f64) -> Self {
        let v = self.v;
        self.chain(
            v.powf(p),
            p * v.powf(p - 1.0),
            p * (p - 1.0) * v.powf(p - 2.0),
        )
    }
    fn recip(self) -> Self {
        let r = 1.0 / self.v;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }
    fn scale(mut self, c: f64) -> Self {
        self.v *= c;
        for i in 0..4 {
            self.d[i] *= c;
            for k in 0..4 {
                self.h[i][k] *= c;
            }
        }
        self
    }
}
