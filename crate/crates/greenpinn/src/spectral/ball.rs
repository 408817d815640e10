//! Bessel-harmonic mode analysis on the unit ball.
//!
//! Basis functions `j_l(z_{ln} r) Y_lm(theta, phi)` form an orthogonal
//! system on the ball, where `z_{ln}` is the n-th positive zero of the
//! spherical Bessel function `j_l`. Projections are taken with lattice
//! quadrature over the masked evaluation grid; the normalization uses the
//! same lattice inner product, so the cell measure cancels.

use crate::problems::Points;
use crate::Error;

/// Spherical Bessel function of the first kind, `l <= 6`.
///
/// Power series near the origin, upward recurrence elsewhere (stable for
/// the small orders used here).
pub fn spherical_j(l: usize, x: f64) -> f64 {
    debug_assert!(l <= 6);
    // Power series below the turning point (upward recurrence is unstable
    // for x < l), recurrence above.
    let series_below = if l == 0 { 1e-2 } else { l as f64 };
    if x.abs() < series_below {
        // j_l(x) = x^l / (2l+1)!! * sum_k (-t)^k / (k! (2l+3)(2l+5)...(2l+2k+1)),
        // t = x^2/2
        let mut double_fact = 1.0;
        for k in 0..l {
            double_fact *= (2 * k + 3) as f64;
        }
        let t = 0.5 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..=20 {
            term *= -t / (k as f64 * (2 * (l + k) + 1) as f64);
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        return libm::pow(x, l as f64) / double_fact * sum;
    }
    let j0 = libm::sin(x) / x;
    if l == 0 {
        return j0;
    }
    let j1 = libm::sin(x) / (x * x) - libm::cos(x) / x;
    if l == 1 {
        return j1;
    }
    let (mut prev, mut cur) = (j0, j1);
    for k in 1..l {
        let next = (2 * k + 1) as f64 / x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// The n-th positive zero of `j_l` (1-based), found by scanning for sign
/// changes and bisecting to 1e-12.
pub fn bessel_zero(l: usize, n: usize) -> crate::Result<f64> {
    if l > 4 || n == 0 || n > 4 {
        return Err(Error::UnsupportedMode(format!(
            "bessel zero (l={l}, n={n}) outside the implemented range l <= 4, 1 <= n <= 4"
        )));
    }
    let step = 0.05;
    let mut found = 0usize;
    let mut x0 = step;
    let mut f0 = spherical_j(l, x0);
    let mut x = x0 + step;
    while x < 60.0 {
        let f = spherical_j(l, x);
        if f0 * f < 0.0 {
            found += 1;
            if found == n {
                let (mut a, mut b) = (x0, x);
                let (mut fa, _) = (f0, f);
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    let fm = spherical_j(l, m);
                    if fa * fm <= 0.0 {
                        b = m;
                    } else {
                        a = m;
                        fa = fm;
                    }
                    if b - a < 1e-13 {
                        break;
                    }
                }
                return Ok(0.5 * (a + b));
            }
        }
        x0 = x;
        f0 = f;
        x += step;
    }
    Err(Error::QuadratureFailure(format!("no zero found for (l={l}, n={n})")))
}

/// Real spherical harmonic of degree `l <= 4` and order `m`, evaluated at
/// the unit direction `(ux, uy, uz)`. Orthonormal on the sphere; positive
/// `m` pairs with `cos(m phi)`, negative with `sin(|m| phi)`.
pub fn real_sph_harm(l: usize, m: i64, ux: f64, uy: f64, uz: f64) -> f64 {
    debug_assert!(l <= 4 && m.unsigned_abs() as usize <= l);
    let am = m.unsigned_abs() as usize;
    let ct = uz;
    let st = libm::hypot(ux, uy);
    let phi = libm::atan2(uy, ux);

    // Associated Legendre P_l^m(cos theta) without the Condon-Shortley
    // phase, via the standard upward recurrences.
    let mut pmm = 1.0;
    for k in 1..=am {
        pmm *= (2 * k - 1) as f64 * st;
    }
    let plm = if l == am {
        pmm
    } else {
        let pmm1 = (2 * am + 1) as f64 * ct * pmm;
        if l == am + 1 {
            pmm1
        } else {
            let (mut p0, mut p1) = (pmm, pmm1);
            let mut val = 0.0;
            for ll in (am + 2)..=l {
                val = ((2 * ll - 1) as f64 * ct * p1 - (ll + am - 1) as f64 * p0)
                    / (ll - am) as f64;
                p0 = p1;
                p1 = val;
            }
            val
        }
    };

    let mut norm = (2 * l + 1) as f64 / (4.0 * std::f64::consts::PI);
    for k in (l - am + 1)..=(l + am) {
        norm /= k as f64;
    }
    let norm = norm.sqrt();
    match m.cmp(&0) {
        std::cmp::Ordering::Equal => norm * plm,
        std::cmp::Ordering::Greater => {
            std::f64::consts::SQRT_2 * norm * plm * libm::cos(am as f64 * phi)
        }
        std::cmp::Ordering::Less => {
            std::f64::consts::SQRT_2 * norm * plm * libm::sin(am as f64 * phi)
        }
    }
}

/// Basis value `j_l(z_{ln} |x|) Y_lm(x/|x|)` at a point of the unit ball.
pub fn ball_basis(l: usize, m: i64, z_ln: f64, x: &[f64]) -> f64 {
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    if r < 1e-14 {
        return if l == 0 {
            real_sph_harm(0, 0, 0.0, 0.0, 1.0)
        } else {
            0.0
        };
    }
    spherical_j(l, z_ln * r) * real_sph_harm(l, m, x[0] / r, x[1] / r, x[2] / r)
}

/// Projection amplitude `|<e, B_lmn>| / <B_lmn, B_lmn>` over the masked
/// lattice points of the unit ball.
pub fn mode_amplitude_3d_ball(
    points: &Points,
    errors: &[f64],
    l: usize,
    m: i64,
    n: usize,
) -> crate::Result<f64> {
    if l > 4 || n == 0 || n > 4 || m.unsigned_abs() as usize > l {
        return Err(Error::UnsupportedMode(format!(
            "ball mode (l={l}, m={m}, n={n}) outside the implemented range"
        )));
    }
    debug_assert_eq!(points.len(), errors.len());
    let z = bessel_zero(l, n)?;
    let mut dot = 0.0;
    let mut norm2 = 0.0;
    for (i, x) in points.iter().enumerate() {
        let b = ball_basis(l, m, z, x);
        dot += errors[i] * b;
        norm2 += b * b;
    }
    if norm2 == 0.0 {
        return Err(Error::UnsupportedMode(format!(
            "basis (l={l}, m={m}, n={n}) vanishes on the supplied lattice"
        )));
    }
    Ok((dot / norm2).abs())
}
