//! Collocation point generation: interior lattices and boundary sampling.
//!
//! Grid sampling lays an interior lattice over the bounding box with the
//! rule `x_j = lo + (hi - lo) (j+1) / (n+1)` per axis (boundary nodes always
//! excluded) and keeps the points strictly inside the domain. The requested
//! count is fitted to the lattice: `n = round(target^(1/d))` per axis, so for
//! masked domains the returned count is the filtered subset of an
//! `n^d`-point box lattice. Lattice metadata is retained to allow ball-subset
//! queries and cell-measure quadrature.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::domain::Domain;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Grid,
    UniformRandom,
}

/// Point-major flat coordinate storage.
#[derive(Clone, Debug, Default)]
pub struct Points {
    pub dim: usize,
    pub coords: Vec<f64>,
}

impl Points {
    pub fn new(dim: usize) -> Self {
        Points { dim, coords: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn push(&mut self, x: &[f64]) {
        debug_assert_eq!(x.len(), self.dim);
        self.coords.extend_from_slice(x);
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks(self.dim)
    }
}

/// Interior-lattice metadata for grid-sampled point sets.
#[derive(Clone, Debug)]
pub struct LatticeInfo {
    /// Nodes per axis of the bounding-box lattice.
    pub n_per_axis: usize,
    /// Lattice coordinates along each axis.
    pub axes: Vec<Vec<f64>>,
    /// Node spacing per axis.
    pub spacing: Vec<f64>,
    /// Row-major lattice index (axis 0 slowest) to interior point index;
    /// `None` where the lattice node fell outside the domain.
    pub index_of: Vec<Option<u32>>,
}

impl LatticeInfo {
    /// Quadrature cell measure `prod(spacing)`.
    pub fn cell_measure(&self) -> f64 {
        self.spacing.iter().product()
    }
}

/// Interior collocation points. Grid strategy returns lattice metadata;
/// random strategy returns exactly `target` i.i.d. uniform points.
pub fn sample_interior(
    domain: &Domain,
    strategy: Strategy,
    target: usize,
    seed: u64,
) -> (Points, Option<LatticeInfo>) {
    let d = domain.dim();
    match strategy {
        Strategy::Grid => {
            let n = if d == 1 {
                target.max(1)
            } else {
                ((target as f64).powf(1.0 / d as f64).round() as usize).max(1)
            };
            let (lo, hi) = domain.bbox();
            let axes: Vec<Vec<f64>> = (0..d)
                .map(|a| {
                    (0..n)
                        .map(|j| lo[a] + (hi[a] - lo[a]) * (j + 1) as f64 / (n + 1) as f64)
                        .collect()
                })
                .collect();
            let spacing: Vec<f64> =
                (0..d).map(|a| (hi[a] - lo[a]) / (n + 1) as f64).collect();

            let mut pts = Points::new(d);
            let mut index_of = vec![None; n.pow(d as u32)];
            let mut x = vec![0.0; d];
            for (flat, slot) in index_of.iter_mut().enumerate() {
                let mut rem = flat;
                for a in (0..d).rev() {
                    x[a] = axes[a][rem % n];
                    rem /= n;
                }
                let inside = match domain {
                    Domain::Interval { .. } | Domain::Square { .. } => true,
                    _ => domain.contains(&x),
                };
                if inside {
                    *slot = Some(pts.len() as u32);
                    pts.push(&x);
                }
            }
            (pts, Some(LatticeInfo { n_per_axis: n, axes, spacing, index_of }))
        }
        Strategy::UniformRandom => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (lo, hi) = domain.bbox();
            let mut pts = Points::new(d);
            let mut x = vec![0.0; d];
            while pts.len() < target {
                for a in 0..d {
                    x[a] = rng.gen_range(lo[a]..hi[a]);
                }
                if domain.contains(&x) {
                    pts.push(&x);
                }
            }
            (pts, None)
        }
    }
}

/// Boundary points under the surface measure, deterministic in `seed`.
/// Intervals always return their two endpoints.
pub fn sample_boundary(domain: &Domain, count: usize, seed: u64) -> Points {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match *domain {
        Domain::Interval { a, b } => {
            let mut pts = Points::new(1);
            pts.push(&[a]);
            pts.push(&[b]);
            pts
        }
        Domain::Square { a, b } => {
            // Stratified allocation: each side receives count/4, the
            // remainder going to the first sides in fixed order.
            let mut pts = Points::new(2);
            let base = count / 4;
            let rem = count % 4;
            for side in 0..4usize {
                let n_side = base + usize::from(side < rem);
                for _ in 0..n_side {
                    let t = rng.gen_range(a..b);
                    let p = match side {
                        0 => [t, a],
                        1 => [b, t],
                        2 => [t, b],
                        _ => [a, t],
                    };
                    pts.push(&p);
                }
            }
            pts
        }
        Domain::Disk { center, radius } => {
            let mut pts = Points::new(2);
            for _ in 0..count {
                let theta = rng.gen_range(0.0..std::f64::consts::TAU);
                pts.push(&[
                    center[0] + radius * libm::cos(theta),
                    center[1] + radius * libm::sin(theta),
                ]);
            }
            pts
        }
        Domain::Ball { center, radius } => {
            let mut pts = Points::new(3);
            for _ in 0..count {
                loop {
                    let g: [f64; 3] = [
                        rng.sample(StandardNormal),
                        rng.sample(StandardNormal),
                        rng.sample(StandardNormal),
                    ];
                    let norm = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
                    if norm > 1e-12 {
                        pts.push(&[
                            center[0] + radius * g[0] / norm,
                            center[1] + radius * g[1] / norm,
                            center[2] + radius * g[2] / norm,
                        ]);
                        break;
                    }
                }
            }
            pts
        }
    }
}
