//! The example catalog: one elliptic boundary-value problem per record.

use serde::{Deserialize, Serialize};

use super::domain::Domain;
use super::fields::*;
use crate::Error;

/// Right-hand-side convention of the posed equation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhsConvention {
    /// `laplacian(u) = -f`; `f` is generated from the exact solution.
    NegF,
    /// `div(k grad u) = -1` with no closed-form solution; the reference comes
    /// from an offline finite-difference solve.
    DivForm,
    /// `Lu = f` with `L` the divergence-form operator as applied.
    General,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemId {
    U1,
    U2,
    U3Bumps2d,
    U4Disk,
    Multiscale1d,
    Multiscale2d,
    Bumps3d,
}

impl ProblemId {
    pub const ALL: [ProblemId; 7] = [
        ProblemId::U1,
        ProblemId::U2,
        ProblemId::U3Bumps2d,
        ProblemId::U4Disk,
        ProblemId::Multiscale1d,
        ProblemId::Multiscale2d,
        ProblemId::Bumps3d,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemId::U1 => "u1",
            ProblemId::U2 => "u2",
            ProblemId::U3Bumps2d => "u3_bumps2d",
            ProblemId::U4Disk => "u4_disk",
            ProblemId::Multiscale1d => "multiscale1d",
            ProblemId::Multiscale2d => "multiscale2d",
            ProblemId::Bumps3d => "bumps3d",
        }
    }

    pub fn parse(s: &str) -> crate::Result<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::UnknownProblem(s.to_string()))
    }
}

/// Domain, coefficients, exact solution, and sign convention for one posed
/// problem. Immutable after construction; safe to share across threads.
pub struct EllipticProblem {
    pub id: ProblemId,
    pub domain: Domain,
    /// Diffusion coefficient `k`.
    pub k: Box<dyn ScalarField>,
    /// Zeroth-order coefficient `c` (zero in every cataloged problem; the
    /// operator still applies it for generality).
    pub c: Box<dyn ScalarField>,
    /// Closed-form solution, when one exists.
    pub exact: Option<Box<dyn ScalarField>>,
    pub rhs: RhsConvention,
}

impl EllipticProblem {
    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn has_exact(&self) -> bool {
        self.exact.is_some()
    }

    /// Dirichlet boundary data: the trace of the exact solution, or zero for
    /// the reference-solution problems (which are posed with `u = 0`).
    pub fn boundary_value(&self, x: &[f64]) -> f64 {
        match &self.exact {
            Some(u) => u.value(x),
            None => 0.0,
        }
    }
}

/// Look up a cataloged problem by id.
pub fn catalog(id: ProblemId) -> EllipticProblem {
    let unit_interval = Domain::Interval { a: -1.0, b: 1.0 };
    let unit_square = Domain::Square { a: -1.0, b: 1.0 };
    let one = || Box::new(ConstField(1.0)) as Box<dyn ScalarField>;
    let zero = || Box::new(ConstField(0.0)) as Box<dyn ScalarField>;
    match id {
        ProblemId::U1 => EllipticProblem {
            id,
            domain: unit_interval,
            k: one(),
            c: zero(),
            exact: Some(Box::new(SineMix)),
            rhs: RhsConvention::NegF,
        },
        ProblemId::U2 => EllipticProblem {
            id,
            domain: unit_interval,
            k: one(),
            c: zero(),
            exact: Some(Box::new(LocalizedChirps)),
            rhs: RhsConvention::NegF,
        },
        ProblemId::U3Bumps2d => EllipticProblem {
            id,
            domain: unit_square,
            k: one(),
            c: zero(),
            exact: Some(Box::new(BumpMix2d)),
            rhs: RhsConvention::NegF,
        },
        ProblemId::U4Disk => EllipticProblem {
            id,
            domain: Domain::Disk { center: [0.0, 0.0], radius: 1.0 },
            k: one(),
            c: zero(),
            exact: Some(Box::new(DiskWaves)),
            rhs: RhsConvention::NegF,
        },
        ProblemId::Multiscale1d => EllipticProblem {
            id,
            domain: unit_interval,
            k: Box::new(OscillatoryCoef1d { amplitude: 1.8, period: 0.1 }),
            c: zero(),
            exact: None,
            rhs: RhsConvention::DivForm,
        },
        ProblemId::Multiscale2d => EllipticProblem {
            id,
            domain: unit_square,
            k: Box::new(OscillatoryCoef2d { amplitude: 1.8, period: 0.3 }),
            c: zero(),
            exact: None,
            rhs: RhsConvention::DivForm,
        },
        ProblemId::Bumps3d => EllipticProblem {
            id,
            domain: Domain::Ball { center: [0.0, 0.0, 0.0], radius: 1.0 },
            k: one(),
            c: zero(),
            exact: Some(Box::new(BumpMix3d)),
            rhs: RhsConvention::NegF,
        },
    }
}
