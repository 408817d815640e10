//! Frequency-mode decomposition of error fields and the truncation-symbol
//! checks backing the kernel-decay bound.

mod ball;
mod dft;
pub mod quad;
mod truncation;

pub use ball::{ball_basis, bessel_zero, mode_amplitude_3d_ball, real_sph_harm, spherical_j};
pub use dft::{mode_amplitude_1d, mode_amplitude_2d};
pub use truncation::{bound_sweep, symbol, symbol_quadrature, BoundSweep};

use serde::{Deserialize, Serialize};

/// Identifier of one tracked mode; the variant fixes the analysis used.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModeId {
    /// 1D Fourier mode in cycles per unit length (`sin(k pi x)` on the
    /// interval sits at `m = k/2`).
    Fourier1d(f64),
    /// 2D DFT bin `(k_x, k_y)` over the bounding box.
    Fourier2d([i64; 2]),
    /// Bessel-harmonic ball mode `(l, m, n)`.
    Ball([i64; 3]),
}

impl ModeId {
    pub fn label(&self) -> String {
        match self {
            ModeId::Fourier1d(m) => format!("m_{m}"),
            ModeId::Fourier2d([kx, ky]) => format!("k_{kx}_{ky}"),
            ModeId::Ball([l, m, n]) => format!("b_{l}_{m}_{n}"),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ModeId::Fourier1d(_) => 1,
            ModeId::Fourier2d(_) => 2,
            ModeId::Ball(_) => 3,
        }
    }
}

/// Amplitude history of one mode, aligned to the snapshot iterations.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModeTrace {
    pub mode: ModeId,
    pub iters: Vec<usize>,
    pub amplitudes: Vec<f64>,
}
