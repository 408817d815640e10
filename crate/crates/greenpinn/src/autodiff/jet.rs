//! Second-order directional jets.
//!
//! A [`Jet2`] carries a value and its first and second derivative along one
//! input coordinate. Propagating jets through a computation yields exact
//! directional derivatives; pure second derivatives per axis are all that is
//! needed to assemble Laplacians and divergence-form operators, so cross
//! derivatives are never materialized.

// Transcendentals go through `libm` (pure Rust) rather than the platform
// libm: glibc resolves sin/exp per call site (IFUNC / vectorized variants),
// which breaks bit-equality between evaluation paths that must agree.
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Value, first and second directional derivative along one coordinate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet2 {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet2 {
    pub const ZERO: Jet2 = Jet2 { v: 0.0, d1: 0.0, d2: 0.0 };

    /// A quantity that does not vary along the active coordinate.
    #[inline]
    pub fn constant(v: f64) -> Self {
        Jet2 { v, d1: 0.0, d2: 0.0 }
    }

    /// Seed for an input coordinate: `(x, 1, 0)` when this coordinate is the
    /// differentiation direction, `(x, 0, 0)` otherwise.
    #[inline]
    pub fn seed(x: f64, active: bool) -> Self {
        Jet2 { v: x, d1: if active { 1.0 } else { 0.0 }, d2: 0.0 }
    }

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.v.is_finite() && self.d1.is_finite() && self.d2.is_finite()
    }

    /// Chain rule through a scalar function given `(f, f', f'')` at `self.v`.
    #[inline]
    pub fn lift(self, f: f64, df: f64, ddf: f64) -> Self {
        Jet2 {
            v: f,
            d1: df * self.d1,
            d2: ddf * self.d1 * self.d1 + df * self.d2,
        }
    }

    #[inline]
    pub fn recip(self) -> Self {
        let r = 1.0 / self.v;
        self.lift(r, -r * r, 2.0 * r * r * r)
    }

    #[inline]
    pub fn sin(self) -> Self {
        let (s, c) = libm::sincos(self.v);
        self.lift(s, c, -s)
    }

    #[inline]
    pub fn cos(self) -> Self {
        let (s, c) = libm::sincos(self.v);
        self.lift(c, -s, -c)
    }

    #[inline]
    pub fn exp(self) -> Self {
        let e = libm::exp(self.v);
        self.lift(e, e, e)
    }

    #[inline]
    pub fn tanh(self) -> Self {
        let t = libm::tanh(self.v);
        let dt = 1.0 - t * t;
        self.lift(t, dt, -2.0 * t * dt)
    }

    /// `max(0, x)^3`; the subgradient at 0 is taken as 0 for both derivative
    /// channels, matching the continuous extension.
    #[inline]
    pub fn relu_pow3(self) -> Self {
        let m = self.v.max(0.0);
        self.lift(m * m * m, 3.0 * m * m, 6.0 * m)
    }

    #[inline]
    pub fn relu(self) -> Self {
        let g = if self.v > 0.0 { 1.0 } else { 0.0 };
        self.lift(self.v.max(0.0), g, 0.0)
    }

    /// Multiplication by a compile-time-known constant.
    #[inline]
    pub fn scale(self, c: f64) -> Self {
        Jet2 { v: c * self.v, d1: c * self.d1, d2: c * self.d2 }
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    #[inline]
    fn add(self, o: Jet2) -> Jet2 {
        Jet2 { v: self.v + o.v, d1: self.d1 + o.d1, d2: self.d2 + o.d2 }
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    #[inline]
    fn sub(self, o: Jet2) -> Jet2 {
        Jet2 { v: self.v - o.v, d1: self.d1 - o.d1, d2: self.d2 - o.d2 }
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    #[inline]
    fn mul(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
        }
    }
}

// Division is reciprocal-then-multiply so that the plain-jet path and the
// taped path (which records Recip and Mul nodes) produce bit-identical values.
impl Div for Jet2 {
    type Output = Jet2;
    #[inline]
    fn div(self, o: Jet2) -> Jet2 {
        self * o.recip()
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    #[inline]
    fn neg(self) -> Jet2 {
        Jet2 { v: -self.v, d1: -self.d1, d2: -self.d2 }
    }
}

/// Shared scalar interface for analytic fields and closed-form solutions,
/// letting one definition serve both plain evaluation (`f64`) and directional
/// differentiation ([`Jet2`]).
pub trait Real:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(c: f64) -> Self;
    fn value(self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn tanh(self) -> Self;
    fn relu_pow3(self) -> Self;
    fn relu(self) -> Self;
    fn scale(self, c: f64) -> Self;
}

impl Real for f64 {
    #[inline]
    fn from_f64(c: f64) -> Self {
        c
    }
    #[inline]
    fn value(self) -> f64 {
        self
    }
    #[inline]
    fn sin(self) -> Self {
        libm::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        libm::cos(self)
    }
    #[inline]
    fn exp(self) -> Self {
        libm::exp(self)
    }
    #[inline]
    fn tanh(self) -> Self {
        libm::tanh(self)
    }
    #[inline]
    fn relu_pow3(self) -> Self {
        let m = self.max(0.0);
        m * m * m
    }
    #[inline]
    fn relu(self) -> Self {
        self.max(0.0)
    }
    #[inline]
    fn scale(self, c: f64) -> Self {
        c * self
    }
}

impl Real for Jet2 {
    #[inline]
    fn from_f64(c: f64) -> Self {
        Jet2::constant(c)
    }
    #[inline]
    fn value(self) -> f64 {
        self.v
    }
    #[inline]
    fn sin(self) -> Self {
        Jet2::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        Jet2::cos(self)
    }
    #[inline]
    fn exp(self) -> Self {
        Jet2::exp(self)
    }
    #[inline]
    fn tanh(self) -> Self {
        Jet2::tanh(self)
    }
    #[inline]
    fn relu_pow3(self) -> Self {
        Jet2::relu_pow3(self)
    }
    #[inline]
    fn relu(self) -> Self {
        Jet2::relu(self)
    }
    #[inline]
    fn scale(self, c: f64) -> Self {
        Jet2::scale(self, c)
    }
}

/// Hidden-layer activation functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Sine,
    Tanh,
    Relu,
    ReluPow3,
}

impl Activation {
    /// `(f, f', f'')` at `x`.
    #[inline]
    pub fn derivs(self, x: f64) -> (f64, f64, f64) {
        match self {
            Activation::Sine => {
                let (s, c) = libm::sincos(x);
                (s, c, -s)
            }
            Activation::Tanh => {
                let t = libm::tanh(x);
                let dt = 1.0 - t * t;
                (t, dt, -2.0 * t * dt)
            }
            Activation::Relu => {
                let g = if x > 0.0 { 1.0 } else { 0.0 };
                (x.max(0.0), g, 0.0)
            }
            Activation::ReluPow3 => {
                let m = x.max(0.0);
                (m * m * m, 3.0 * m * m, 6.0 * m)
            }
        }
    }

    /// `(f, f', f'', f''')` at `x`; the third derivative enters the reverse
    /// pass through second-derivative channels.
    #[inline]
    pub fn derivs3(self, x: f64) -> (f64, f64, f64, f64) {
        match self {
            Activation::Sine => {
                let (s, c) = libm::sincos(x);
                (s, c, -s, -c)
            }
            Activation::Tanh => {
                let t = libm::tanh(x);
                let dt = 1.0 - t * t;
                let ddt = -2.0 * t * dt;
                (t, dt, ddt, -2.0 * (dt * dt + t * ddt))
            }
            Activation::Relu => {
                let g = if x > 0.0 { 1.0 } else { 0.0 };
                (x.max(0.0), g, 0.0, 0.0)
            }
            Activation::ReluPow3 => {
                let m = x.max(0.0);
                let g = if x > 0.0 { 6.0 } else { 0.0 };
                (m * m * m, 3.0 * m * m, 6.0 * m, g)
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Sine => "sine",
            Activation::Tanh => "tanh",
            Activation::Relu => "relu",
            Activation::ReluPow3 => "relu_pow3",
        }
    }
}

pub fn jet_seed(x: f64, active: bool) -> Jet2 {
    Jet2::seed(x, active)
}

/// Elementary binary operations exposed for direct testing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Elementary unary operations exposed for direct testing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum UnaryOp {
    Sin,
    Cos,
    Exp,
    Tanh,
    ReluPow3,
    Neg,
    Scale(f64),
}

pub fn jet_binary(op: BinaryOp, a: Jet2, b: Jet2) -> Result<Jet2, crate::Error> {
    match op {
        BinaryOp::Add => Ok(a + b),
        BinaryOp::Sub => Ok(a - b),
        BinaryOp::Mul => Ok(a * b),
        BinaryOp::Div => {
            if b.v == 0.0 {
                Err(crate::Error::DivisionByZero)
            } else {
                Ok(a / b)
            }
        }
    }
}

pub fn jet_unary(op: UnaryOp, a: Jet2) -> Jet2 {
    match op {
        UnaryOp::Sin => a.sin(),
        UnaryOp::Cos => a.cos(),
        UnaryOp::Exp => a.exp(),
        UnaryOp::Tanh => a.tanh(),
        UnaryOp::ReluPow3 => a.relu_pow3(),
        UnaryOp::Neg => -a,
        UnaryOp::Scale(c) => a.scale(c),
    }
}
