//! Computational domains with analytic geometry queries.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Interval { a: f64, b: f64 },
    /// The square `(a, b)^2`.
    Square { a: f64, b: f64 },
    Disk { center: [f64; 2], radius: f64 },
    Ball { center: [f64; 3], radius: f64 },
}

impl Domain {
    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            Domain::Square { .. } | Domain::Disk { .. } => 2,
            Domain::Ball { .. } => 3,
        }
    }

    /// Lower and upper corners of the bounding box.
    pub fn bbox(&self) -> (Vec<f64>, Vec<f64>) {
        match *self {
            Domain::Interval { a, b } => (vec![a], vec![b]),
            Domain::Square { a, b } => (vec![a, a], vec![b, b]),
            Domain::Disk { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
            Domain::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match *self {
            Domain::Interval { a, b } => x[0] > a && x[0] < b,
            Domain::Square { a, b } => x.iter().all(|&xi| xi > a && xi < b),
            Domain::Disk { center, radius } => dist2(x, &center) < radius * radius,
            Domain::Ball { center, radius } => dist2(x, &center) < radius * radius,
        }
    }

    /// Distance from an interior point to the boundary, computed from the
    /// domain geometry rather than by sampling.
    pub fn dist_to_boundary(&self, x: &[f64]) -> f64 {
        match *self {
            Domain::Interval { a, b } => (x[0] - a).min(b - x[0]),
            Domain::Square { a, b } => x
                .iter()
                .map(|&xi| (xi - a).min(b - xi))
                .fold(f64::INFINITY, f64::min),
            Domain::Disk { center, radius } => radius - dist2(x, &center).sqrt(),
            Domain::Ball { center, radius } => radius - dist2(x, &center).sqrt(),
        }
    }

    pub fn measure(&self) -> f64 {
        match *self {
            Domain::Interval { a, b } => b - a,
            Domain::Square { a, b } => (b - a) * (b - a),
            Domain::Disk { radius, .. } => std::f64::consts::PI * radius * radius,
            Domain::Ball { radius, .. } => {
                4.0 / 3.0 * std::f64::consts::PI * radius * radius * radius
            }
        }
    }
}

#[inline]
fn dist2(x: &[f64], c: &[f64]) -> f64 {
    x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum()
}
