//! Truncation-ball membership for interior point sets.

use super::kernel::GreenKernel;
use crate::problems::{Domain, LatticeInfo, Points};

/// Interior points inside the truncation ball of one collocation point.
/// `radius` is the analytic distance from the center to the boundary.
/// Members are stored in lexicographic coordinate order, which fixes the
/// inner summation order regardless of how the input points were ordered.
#[derive(Clone, Debug)]
pub struct BallStencil {
    pub center: u32,
    pub radius: f64,
    pub members: Vec<u32>,
}

#[derive(Clone, Copy, Debug, Default, serde::Serialize)]
pub struct StencilStats {
    pub min_members: usize,
    pub median_members: usize,
    pub max_members: usize,
    /// Points whose truncation ball contained no other interior point; they
    /// contribute nothing to the preconditioned sum.
    pub excluded: usize,
}

/// Stencils sorted by center in lexicographic coordinate order.
pub struct StencilSet {
    pub stencils: Vec<BallStencil>,
    pub stats: StencilStats,
}

/// Build one stencil per interior point.
///
/// For the interval kernel the "stencil" is the whole interior set (the
/// kernel is global and bounded, center included). Free-space kernels take
/// every interior point with `|y - x| <= dist(x, boundary)`, excluding the
/// singular center. Lattice metadata accelerates the search; without it a
/// brute-force scan gives identical membership.
pub fn build_stencils(
    points: &Points,
    lattice: Option<&LatticeInfo>,
    domain: &Domain,
    kernel: &GreenKernel,
) -> StencilSet {
    let n = points.len();
    let order = canonical_order(points);

    let mut stencils = Vec::with_capacity(n);
    if !kernel.is_truncated() {
        let all: Vec<u32> = order.clone();
        for &i in &order {
            stencils.push(BallStencil {
                center: i,
                radius: domain.dist_to_boundary(points.point(i as usize)),
                members: all.clone(),
            });
        }
    } else {
        for &i in &order {
            let x = points.point(i as usize);
            let r = domain.dist_to_boundary(x);
            let members = match lattice {
                Some(lat) => lattice_ball(points, lat, x, r, i),
                None => brute_ball(points, x, r, i),
            };
            stencils.push(BallStencil { center: i, radius: r, members });
        }
    }

    let mut sizes: Vec<usize> = stencils.iter().map(|s| s.members.len()).collect();
    sizes.sort_unstable();
    let stats = StencilStats {
        min_members: sizes.first().copied().unwrap_or(0),
        median_members: sizes.get(sizes.len() / 2).copied().unwrap_or(0),
        max_members: sizes.last().copied().unwrap_or(0),
        excluded: sizes.iter().filter(|&&m| m == 0).count(),
    };
    StencilSet { stencils, stats }
}

/// Indices sorted by point coordinates, lexicographically.
fn canonical_order(points: &Points) -> Vec<u32> {
    let mut order: Vec<u32> = (0..points.len() as u32).collect();
    order.sort_by(|&a, &b| {
        points
            .point(a as usize)
            .partial_cmp(points.point(b as usize))
            .expect("finite coordinates")
    });
    order
}

fn brute_ball(points: &Points, x: &[f64], r: f64, center: u32) -> Vec<u32> {
    let r2 = r * r;
    let mut members: Vec<u32> = (0..points.len() as u32)
        .filter(|&j| j != center && dist2(points.point(j as usize), x) <= r2)
        .collect();
    members.sort_by(|&a, &b| {
        points
            .point(a as usize)
            .partial_cmp(points.point(b as usize))
            .expect("finite coordinates")
    });
    members
}

fn lattice_ball(
    points: &Points,
    lat: &LatticeInfo,
    x: &[f64],
    r: f64,
    center: u32,
) -> Vec<u32> {
    let d = points.dim;
    let n = lat.n_per_axis;
    let r2 = r * r;
    // Per-axis index windows covering [x-r, x+r].
    let mut lo = vec![0usize; d];
    let mut hi = vec![0usize; d];
    for a in 0..d {
        lo[a] = lat.axes[a].partition_point(|&v| v < x[a] - r);
        hi[a] = lat.axes[a].partition_point(|&v| v <= x[a] + r);
        if lo[a] >= hi[a] {
            return Vec::new();
        }
    }
    let mut members = Vec::new();
    let mut jidx = lo.clone();
    'outer: loop {
        let flat = jidx.iter().fold(0usize, |acc, &j| acc * n + j);
        if let Some(pi) = lat.index_of[flat] {
            if pi != center && dist2(points.point(pi as usize), x) <= r2 {
                members.push(pi);
            }
        }
        // advance the index window odometer (last axis fastest, so members
        // come out in row-major / lexicographic order)
        for a in (0..d).rev() {
            jidx[a] += 1;
            if jidx[a] < hi[a] {
                continue 'outer;
            }
            if a == 0 {
                break 'outer;
            }
            jidx[a] = lo[a];
        }
    }
    members
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
