//! Reference Green's kernels with closed-form expressions.

use serde::{Deserialize, Serialize};

/// Kernel of the inverse of a reference operator (sign convention of the
/// positive-definite operator, so all kernels are nonnegative near the
/// diagonal).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GreenKernel {
    /// Dirichlet kernel on `(a, b)`: `(min-a)(b-max)/(b-a)`.
    Interval1d { a: f64, b: f64 },
    /// `-log|x-y| / (2 pi)`.
    FreeSpace2d,
    /// `1 / (4 pi |x-y|)`.
    FreeSpace3d,
}

impl GreenKernel {
    pub fn dim(&self) -> usize {
        match self {
            GreenKernel::Interval1d { .. } => 1,
            GreenKernel::FreeSpace2d => 2,
            GreenKernel::FreeSpace3d => 3,
        }
    }

    /// Free-space kernels are singular at `x = y` and get ball-truncated
    /// stencils that exclude the center point; the interval kernel is
    /// bounded and is applied over the whole domain.
    pub fn is_truncated(&self) -> bool {
        !matches!(self, GreenKernel::Interval1d { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            GreenKernel::Interval1d { .. } => "interval1d",
            GreenKernel::FreeSpace2d => "free_space_2d",
            GreenKernel::FreeSpace3d => "free_space_3d",
        }
    }

    /// Kernel value. Free-space kernels assume `x != y`; stencil
    /// construction guarantees the singular diagonal is never evaluated.
    #[inline]
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            GreenKernel::Interval1d { a, b } => {
                let (lo, hi) = if x[0] <= y[0] { (x[0], y[0]) } else { (y[0], x[0]) };
                (lo - a) * (b - hi) / (b - a)
            }
            GreenKernel::FreeSpace2d => {
                let r2 = dist2(x, y);
                -libm::log(r2) / (4.0 * std::f64::consts::PI)
            }
            GreenKernel::FreeSpace3d => {
                let r = dist2(x, y).sqrt();
                1.0 / (4.0 * std::f64::consts::PI * r)
            }
        }
    }
}

#[inline]
fn dist2(x: &[f64], y: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (a, b) in x.iter().zip(y) {
        let d = a - b;
        acc += d * d;
    }
    acc
}
