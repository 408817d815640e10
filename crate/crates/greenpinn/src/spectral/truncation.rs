//! Radial frequency response of the ball-truncated kernel.
//!
//! `symbol(d, rho, ell)` is the closed form; `symbol_quadrature` evaluates
//! the defining radial integral numerically and is the oracle establishing
//! the closed forms. The symbol decays like `rho^{-3/2}` (d = 2) or
//! `rho^{-2}` (d = 3), which is what bounds the effective norm of the
//! preconditioned residual term; `bound_sweep` verifies the bound ratio
//! empirically over a dense grid.

use super::quad::integrate;

/// Closed-form truncation symbol for `d` in `{2, 3}`, `ell` in `[0, 1]`.
pub fn symbol(d: usize, rho: f64, ell: f64) -> f64 {
    assert!(d == 2 || d == 3, "symbol defined for d = 2, 3");
    if ell == 0.0 {
        return 0.0;
    }
    let u = rho * ell;
    match d {
        3 => {
            if u < 1e-3 {
                // (1 - cos u)/u^2 = 1/2 - u^2/24 + u^4/720
                ell * ell * (0.5 - u * u / 24.0 + u.powi(4) / 720.0)
            } else {
                (1.0 - libm::cos(u)) / (rho * rho)
            }
        }
        _ => {
            if u < 1e-3 {
                // (1 - J0(u))/u^2 = 1/4 - u^2/64; J1(u)/u = 1/2 - u^2/16
                let a = 0.25 - u * u / 64.0;
                let b = 0.5 - u * u / 16.0;
                ell * ell * (a - libm::log(ell) * b)
            } else {
                (1.0 - libm::j0(u) - libm::log(ell) * u * libm::j1(u)) / (rho * rho)
            }
        }
    }
}

/// The defining integral
/// `rho^{-(d-2)/2} * int_0^ell Phi_d(r) J_{(d-2)/2}(rho r) r^{(d-2)/2} r dr`
/// with the radial profiles `Phi_2(r) = -log r`, `Phi_3(r) = sqrt(pi/2)/r`
/// (normalized so the closed forms above hold exactly).
pub fn symbol_quadrature(d: usize, rho: f64, ell: f64) -> crate::Result<f64> {
    assert!(d == 2 || d == 3);
    if ell == 0.0 {
        return Ok(0.0);
    }
    match d {
        2 => {
            // Substitute r = ell t^2 to soften the log endpoint.
            let f = move |t: f64| {
                if t == 0.0 {
                    return 0.0;
                }
                let r = ell * t * t;
                -libm::log(r) * libm::j0(rho * r) * r * 2.0 * ell * t
            };
            integrate(&f, 0.0, 1.0, 1e-11)
        }
        _ => {
            if rho < 1e-10 {
                // Limit of the integrand as rho -> 0 is simply r.
                return integrate(&|r| r, 0.0, ell, 1e-12);
            }
            let half = std::f64::consts::FRAC_PI_2.sqrt();
            let f = move |r: f64| {
                if r == 0.0 {
                    return 0.0;
                }
                let x = rho * r;
                let j_half = (2.0 / (std::f64::consts::PI * x)).sqrt() * libm::sin(x);
                half / r * j_half * r.sqrt() * r
            };
            let v = integrate(&f, 0.0, ell, 1e-11)?;
            Ok(v / rho.sqrt())
        }
    }
}

/// Result of sweeping the decay-bound ratio over a `(rho, ell)` lattice.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct BoundSweep {
    pub d: usize,
    pub max_ratio: f64,
    pub arg_rho: f64,
    pub arg_ell: f64,
    pub n_rho: usize,
    pub n_ell: usize,
}

/// Ratio `|symbol| / min(1, rho^-p)` with `p = 3/2` (d=2) or `2` (d=3),
/// maximized over `rho in {0, 0.1, ..., 200}`, `ell in {0, 0.05, ..., 1}`.
pub fn bound_sweep(d: usize) -> BoundSweep {
    let p = if d == 2 { 1.5 } else { 2.0 };
    let n_rho = 2001;
    let n_ell = 21;
    let mut best = BoundSweep { d, max_ratio: 0.0, arg_rho: 0.0, arg_ell: 0.0, n_rho, n_ell };
    for i in 0..n_rho {
        let rho = 0.1 * i as f64;
        let cap = if rho <= 1.0 { 1.0 } else { libm::pow(rho, -p) };
        for j in 0..n_ell {
            let ell = 0.05 * j as f64;
            let ratio = symbol(d, rho, ell).abs() / cap;
            if ratio > best.max_ratio {
                best.max_ratio = ratio;
                best.arg_rho = rho;
                best.arg_ell = ell;
            }
        }
    }
    best
}
