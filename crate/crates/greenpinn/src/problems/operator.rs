//! Divergence-form operator application and source generation.
//!
//! `div(k grad u) - c u` is assembled from per-axis jets as
//! `k * laplacian(u) + grad(k) . grad(u) - c * u`. Source terms come from
//! applying the same assembly to the exact solution, so exact-solution
//! residuals vanish identically at every point.

use super::catalog::{EllipticProblem, RhsConvention};
use super::fields::ScalarField;
use crate::network::{forward_jets, JetField, JetOutput, NetworkSpec, ParamSet};
use crate::Error;

/// Diffusion and zeroth-order data frozen at one point, plus the equation's
/// right-hand side in residual form. Caching these once per collocation set
/// keeps coefficient fields out of the training loop.
#[derive(Clone, Copy, Debug)]
pub struct PointCoeffs {
    pub k: f64,
    pub grad_k: [f64; 3],
    pub c: f64,
    /// Value `s(x)` such that the residual is `A(u_theta)(x) - s(x)`, where
    /// `A(u) = div(k grad u) - c u`.
    pub residual_rhs: f64,
}

/// Evaluate coefficients and the residual right-hand side at `x`.
pub fn point_coeffs(problem: &EllipticProblem, x: &[f64]) -> PointCoeffs {
    let d = problem.dim();
    let k = problem.k.value(x);
    let mut grad_k = [0.0; 3];
    for axis in 0..d {
        grad_k[axis] = problem.k.jet(x, axis).d1;
    }
    let c = problem.c.value(x);
    let residual_rhs = match problem.rhs {
        RhsConvention::DivForm => -1.0,
        RhsConvention::NegF | RhsConvention::General => {
            let exact = problem.exact.as_ref().expect("exact solution present");
            apply_to_jets(problem, x, &field_jets(exact.as_ref(), x, d))
        }
    };
    PointCoeffs { k, grad_k, c, residual_rhs }
}

fn field_jets(f: &dyn ScalarField, x: &[f64], d: usize) -> JetOutput {
    let mut grad = vec![0.0; d];
    let mut d2 = vec![0.0; d];
    let mut u = 0.0;
    for axis in 0..d {
        let j = f.jet(x, axis);
        grad[axis] = j.d1;
        d2[axis] = j.d2;
        if axis == 0 {
            u = j.v;
        }
    }
    JetOutput { u, grad, d2 }
}

/// `A(u) = k laplacian(u) + grad(k).grad(u) - c u` from precomputed jets.
pub fn apply_to_jets(problem: &EllipticProblem, x: &[f64], jets: &JetOutput) -> f64 {
    let d = problem.dim();
    let k = problem.k.value(x);
    let c = problem.c.value(x);
    let mut acc = k * jets.laplacian();
    for axis in 0..d {
        let dk = problem.k.jet(x, axis).d1;
        acc += dk * jets.grad[axis];
    }
    acc - c * jets.u
}

/// Same assembly from cached coefficients; used inside training loops.
#[inline]
pub fn apply_with_coeffs(co: &PointCoeffs, jets: &JetOutput, d: usize) -> f64 {
    let mut acc = co.k * jets.laplacian();
    for axis in 0..d {
        acc += co.grad_k[axis] * jets.grad[axis];
    }
    acc - co.c * jets.u
}

/// Apply the problem operator to a network at one interior point.
pub fn apply_operator(
    problem: &EllipticProblem,
    params: &ParamSet,
    spec: &NetworkSpec,
    x: &[f64],
) -> f64 {
    apply_to_jets(problem, x, &forward_jets(params, spec, x))
}

/// Apply the problem operator to any jet-evaluable field.
pub fn apply_operator_field(problem: &EllipticProblem, field: &dyn JetField, x: &[f64]) -> f64 {
    apply_to_jets(problem, x, &field.jets(x))
}

/// The source `f` in the problem's printed sign convention: `f = -A(u)` for
/// `laplacian(u) = -f` problems, `f = A(u)` under the general convention.
pub fn source_from_exact(problem: &EllipticProblem, x: &[f64]) -> crate::Result<f64> {
    let exact = problem.exact.as_ref().ok_or_else(|| {
        Error::MissingReference(problem.id.name().to_string())
    })?;
    let applied = apply_to_jets(problem, x, &field_jets(exact.as_ref(), x, problem.dim()));
    Ok(match problem.rhs {
        RhsConvention::NegF => -applied,
        RhsConvention::General => applied,
        RhsConvention::DivForm => unreachable!("DivForm problems carry no exact solution"),
    })
}

/// Residual `A(u_theta)(x) - s(x)` of a field against the problem.
pub fn residual_field(problem: &EllipticProblem, field: &dyn JetField, x: &[f64]) -> f64 {
    let co = point_coeffs(problem, x);
    apply_with_coeffs(&co, &field.jets(x), problem.dim()) - co.residual_rhs
}
