//! Integral-kernel preconditioning of collocation residuals.
//!
//! The residual at every interior point is convolved with a reference
//! kernel before squaring, which re-weights frequency content toward the
//! plain L2 error metric. One-dimensional problems use the interval kernel
//! over the whole domain; in two and three dimensions the free-space kernel
//! is truncated to a ball whose radius is the distance from the evaluation
//! point to the boundary.

mod kernel;
mod stencil;

pub use kernel::GreenKernel;
pub use stencil::{build_stencils, BallStencil, StencilSet, StencilStats};

use serde::{Deserialize, Serialize};

use crate::network::JetField;
use crate::par;
use crate::problems::{residual_field, EllipticProblem, LatticeInfo, Points};

/// Inner-sum normalization of the discrete preconditioned residual.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quadrature {
    /// The printed discrete form: inner sums carry `1/N_r` regardless of
    /// stencil size.
    PaperMean,
    /// Inner sums carry the lattice cell measure (`spacing^d` for grids,
    /// `|domain| / N_r` for random sets), making them true quadratures of
    /// the kernel integral.
    MeasureWeighted,
}

/// Precomputed sparse kernel application: forward rows for the inner sums
/// and transposed rows for distributing seed weights back onto residuals.
pub struct PrecondOperator {
    n: usize,
    offsets: Vec<usize>,
    members: Vec<u32>,
    weights: Vec<f64>,
    t_offsets: Vec<usize>,
    t_members: Vec<u32>,
    t_weights: Vec<f64>,
    inner_factor: f64,
}

impl PrecondOperator {
    /// Evaluate all kernel entries once; collocation points never move
    /// during a run, so this is a per-run cost.
    pub fn build(
        points: &Points,
        stencils: &StencilSet,
        kernel: &GreenKernel,
        quadrature: Quadrature,
        lattice: Option<&LatticeInfo>,
        domain_measure: f64,
    ) -> Self {
        let n = points.len();
        let inner_factor = match quadrature {
            Quadrature::PaperMean => 1.0 / n as f64,
            Quadrature::MeasureWeighted => match lattice {
                Some(l) => l.cell_measure(),
                None => domain_measure / n as f64,
            },
        };

        let mut offsets = Vec::with_capacity(n + 1);
        let mut members = Vec::new();
        let mut weights = Vec::new();
        offsets.push(0);
        for st in &stencils.stencils {
            let xi = points.point(st.center as usize);
            for &j in &st.members {
                members.push(j);
                weights.push(kernel.eval(xi, points.point(j as usize)));
            }
            offsets.push(members.len());
        }

        // Transpose with deterministic ordering: rows visited in order, so
        // each column's entries are already sorted by row.
        let mut t_counts = vec![0usize; n];
        for &j in &members {
            t_counts[j as usize] += 1;
        }
        let mut t_offsets = vec![0usize; n + 1];
        for i in 0..n {
            t_offsets[i + 1] = t_offsets[i] + t_counts[i];
        }
        let mut t_members = vec![0u32; members.len()];
        let mut t_weights = vec![0.0; members.len()];
        let mut cursor = t_offsets.clone();
        for (row, st) in stencils.stencils.iter().enumerate() {
            for (k, &j) in st.members.iter().enumerate() {
                let slot = cursor[j as usize];
                t_members[slot] = row as u32;
                t_weights[slot] = weights[offsets[row] + k];
                cursor[j as usize] += 1;
            }
        }

        PrecondOperator {
            n,
            offsets,
            members,
            weights,
            t_offsets,
            t_members,
            t_weights,
            inner_factor,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `S_i = factor * sum_j G(x_i, y_ij) r(y_ij)`.
    pub fn inner_sums(&self, residuals: &[f64]) -> Vec<f64> {
        debug_assert_eq!(residuals.len(), self.n);
        let mut out = vec![0.0; self.n];
        par::fill_by(&mut out, |i| {
            let mut acc = 0.0;
            for (m, w) in self.members[self.offsets[i]..self.offsets[i + 1]]
                .iter()
                .zip(&self.weights[self.offsets[i]..self.offsets[i + 1]])
            {
                acc += w * residuals[*m as usize];
            }
            self.inner_factor * acc
        });
        out
    }

    /// `(1/(2 N_r)) sum_i S_i^2`.
    pub fn loss_from_inner(&self, inner: &[f64]) -> f64 {
        par::sum_by(self.n, |i| inner[i] * inner[i]) / (2.0 * self.n as f64)
    }

    /// Adjoint weights on residuals:
    /// `w_j = (1/N_r) * factor * sum_i S_i G(x_i, y_ij)`.
    pub fn residual_seeds(&self, inner: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        let scale = self.inner_factor / self.n as f64;
        par::fill_by(&mut out, |j| {
            let mut acc = 0.0;
            for (row, w) in self.t_members[self.t_offsets[j]..self.t_offsets[j + 1]]
                .iter()
                .zip(&self.t_weights[self.t_offsets[j]..self.t_offsets[j + 1]])
            {
                acc += w * inner[*row as usize];
            }
            scale * acc
        });
        out
    }
}

/// The preconditioned residual term evaluated for any jet field.
pub fn precond_residual_loss(
    field: &dyn JetField,
    problem: &EllipticProblem,
    points: &Points,
    op: &PrecondOperator,
) -> f64 {
    let mut residuals = vec![0.0; points.len()];
    par::fill_by(&mut residuals, |i| residual_field(problem, field, points.point(i)));
    let inner = op.inner_sums(&residuals);
    op.loss_from_inner(&inner)
}

/// Boundary mean-square term `1/2 * mean((u - g)^2)`.
pub fn boundary_loss(field: &dyn JetField, problem: &EllipticProblem, boundary: &Points) -> f64 {
    let nb = boundary.len();
    par::sum_by(nb, |i| {
        let x = boundary.point(i);
        let d = field.value(x) - problem.boundary_value(x);
        d * d
    }) / (2.0 * nb as f64)
}

/// The full preconditioned objective: residual term plus `lambda_b` times
/// the boundary term.
pub fn full_precond_loss(
    field: &dyn JetField,
    problem: &EllipticProblem,
    points: &Points,
    op: &PrecondOperator,
    boundary: &Points,
    lambda_b: f64,
) -> f64 {
    precond_residual_loss(field, problem, points, op)
        + lambda_b * boundary_loss(field, problem, boundary)
}
