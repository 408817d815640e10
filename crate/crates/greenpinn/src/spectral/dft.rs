//! Direct DFT mode amplitudes for error fields.
//!
//! Only a handful of bins are ever tracked, so coefficients are computed
//! directly (`O(N)` per mode) with explicit bin conventions instead of
//! pulling in an FFT.
//!
//! Convention: on a uniform half-open grid over an interval of length `L`,
//! a frequency mode `m` (cycles per unit length) occupies bin `k = m L`;
//! components `sin(k pi x)` on `[-1, 1)` sit at mode `m = k/2`. Amplitudes
//! are normalized by `2/N` (1D) or `2/N^2` (2D) so a pure sine has
//! amplitude 1.

use crate::Error;

/// Amplitude of frequency mode `m` (cycles per unit length) of samples on a
/// uniform half-open grid over `[-1, 1)`. The bin `2m` must be an integer
/// and resolvable: `N > 2 * (2m)`.
pub fn mode_amplitude_1d(samples: &[f64], m: f64) -> crate::Result<f64> {
    let n = samples.len();
    let bin2 = 2.0 * m;
    let bin = bin2.round();
    if (bin2 - bin).abs() > 1e-9 || bin < 0.0 {
        return Err(Error::UnsupportedMode(format!(
            "mode m={m} has no integer bin: the domain has length 2, so 2m must be a \
             nonnegative integer (components sin(k pi x) sit at mode m = k/2)"
        )));
    }
    let k = bin as usize;
    if n <= 2 * k {
        return Err(Error::UnsupportedMode(format!(
            "mode m={m} (bin {k}) is not resolvable on {n} samples"
        )));
    }
    let (mut re, mut im) = (0.0, 0.0);
    for (j, &e) in samples.iter().enumerate() {
        let angle = -std::f64::consts::TAU * ((j * k) % n) as f64 / n as f64;
        let (s, c) = libm::sincos(angle);
        re += e * c;
        im += e * s;
    }
    Ok(2.0 / n as f64 * libm::hypot(re, im))
}

/// Amplitude of the 2D bin `(k_x, k_y)` of an `n x n` row-major grid over
/// the bounding box (zero outside the domain). Normalization `2/N^2`: a
/// pure `sin(pi k_x x)` on the box has amplitude 1.
pub fn mode_amplitude_2d(grid: &[f64], n: usize, kx: i64, ky: i64) -> crate::Result<f64> {
    if grid.len() != n * n {
        return Err(Error::UnsupportedMode(format!(
            "grid length {} is not {n}x{n}",
            grid.len()
        )));
    }
    let resolvable = |k: i64| k.unsigned_abs() as usize * 2 < n;
    if !resolvable(kx) || !resolvable(ky) {
        return Err(Error::UnsupportedMode(format!(
            "mode ({kx},{ky}) is not resolvable on a {n}x{n} grid"
        )));
    }
    let phase = |idx: usize, k: i64| {
        let k = k.rem_euclid(n as i64) as usize;
        -std::f64::consts::TAU * ((idx * k) % n) as f64 / n as f64
    };
    let (mut re, mut im) = (0.0, 0.0);
    for row in 0..n {
        // inner transform along y for this row
        let (mut r_re, mut r_im) = (0.0, 0.0);
        for col in 0..n {
            let (s, c) = libm::sincos(phase(col, ky));
            let e = grid[row * n + col];
            r_re += e * c;
            r_im += e * s;
        }
        let (s, c) = libm::sincos(phase(row, kx));
        re += r_re * c - r_im * s;
        im += r_re * s + r_im * c;
    }
    Ok(2.0 / (n * n) as f64 * libm::hypot(re, im))
}
