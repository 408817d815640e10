//! Solver library and experiment harness for second-order elliptic PDEs with
//! neural-network collocation.
//!
//! The crate trains pointwise network representations of PDE solutions under
//! three interchangeable objectives: direct function approximation, the plain
//! collocation residual, and a residual preconditioned by an integral kernel
//! (the Green's function of a reference operator). Frequency-mode diagnostics
//! track how individual Fourier (or Bessel-harmonic) components of the error
//! evolve over training.

pub mod autodiff;
pub mod network;
pub mod par;
pub mod precond;
pub mod problems;
pub mod spectral;

use thiserror::Error as ThisError;

#[derive(Debug, ThisError)]
pub enum Error {
    #[error("division by zero in jet arithmetic")]
    DivisionByZero,

    #[error("dangling node handle {idx} (tape has {len} nodes)")]
    DanglingNode { idx: u32, len: usize },

    #[error("unknown problem id `{0}`")]
    UnknownProblem(String),

    #[error("problem `{0}` has no closed-form solution; a reference solution file is required")]
    MissingReference(String),

    #[error("{0}")]
    UnsupportedMode(String),

    #[error("preconditioned loss requires a kernel and stencils")]
    MissingKernel,

    #[error("relative L2 error undefined: reference norm is zero")]
    ZeroNorm,

    #[error("quadrature did not converge: {0}")]
    QuadratureFailure(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("training aborted: non-finite loss at iteration {iter} (lr {lr:e}, grad norm {grad_norm:e})")]
    NanAbort { iter: usize, lr: f64, grad_norm: f64 },

    #[error("malformed file `{path}`: {reason}")]
    Format { path: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
