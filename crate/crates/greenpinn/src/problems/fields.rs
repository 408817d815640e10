//! Analytic scalar fields: exact solutions and diffusion coefficients.
//!
//! Every field is written once, generically over [`Real`], and evaluated
//! either on plain `f64` or on [`Jet2`] for directional derivatives. Source
//! terms are produced by differentiating these closures with the same jet
//! machinery used for networks, so no hand-derived formula can drift out of
//! sync with its solution.

use std::f64::consts::PI;

use crate::autodiff::{Jet2, Real};

/// Jet-evaluable scalar field on the domain.
pub trait ScalarField: Send + Sync {
    fn value(&self, x: &[f64]) -> f64;
    /// Jet along one coordinate axis (the other coordinates held constant).
    fn jet(&self, x: &[f64], axis: usize) -> Jet2;
}

/// Wraps a generic closure evaluated on seeded jets.
macro_rules! impl_field {
    ($ty:ty, $dim:expr, $eval:ident) => {
        impl ScalarField for $ty {
            fn value(&self, x: &[f64]) -> f64 {
                debug_assert_eq!(x.len(), $dim);
                self.$eval(x)
            }
            fn jet(&self, x: &[f64], axis: usize) -> Jet2 {
                debug_assert_eq!(x.len(), $dim);
                let seeded: Vec<Jet2> =
                    (0..$dim).map(|k| Jet2::seed(x[k], k == axis)).collect();
                self.$eval(&seeded)
            }
        }
    };
}

#[derive(Clone, Copy, Debug)]
pub struct ConstField(pub f64);

impl ScalarField for ConstField {
    fn value(&self, _x: &[f64]) -> f64 {
        self.0
    }
    fn jet(&self, _x: &[f64], _axis: usize) -> Jet2 {
        Jet2::constant(self.0)
    }
}

/// `sin(2 pi x) + sin(5 pi x) + sin(9 pi x)` on the interval.
#[derive(Clone, Copy, Debug)]
pub struct SineMix;

impl SineMix {
    fn eval<S: Real>(&self, x: &[S]) -> S {
        let x = x[0];
        x.scale(2.0 * PI).sin() + x.scale(5.0 * PI).sin() + x.scale(9.0 * PI).sin()
    }
}
impl_field!(SineMix, 1, eval);

/// Localized chirps under a smooth cutoff supported on `(-0.6, 0.6)`.
#[derive(Clone, Copy, Debug)]
pub struct LocalizedChirps;

impl LocalizedChirps {
    fn eval<S: Real>(&self, x: &[S]) -> S {
        let x = x[0];
        if x.value().abs() >= 0.6 {
            return S::from_f64(0.0);
        }
        // chi = exp(-1 / ((x+0.6)^2 (0.6-x)^2))
        let p = x + S::from_f64(0.6);
        let q = S::from_f64(0.6) - x;
        let s = p * p * q * q;
        let chi = (-(S::from_f64(1.0) / s)).exp();

        let chirp = |c: f64, a: f64, b: f64| -> S {
            // sin(a (x - c)^2) * exp(-b (x - c)^2)
            let dx = x - S::from_f64(c);
            let r2 = dx * dx;
            r2.scale(a).sin() * (-r2.scale(b)).exp()
        };
        let inner = chirp(-0.2, 60.0, 80.0)
            + chirp(0.0, 300.0, 50.0).scale(0.8)
            + chirp(0.2, 40.0, 60.0).scale(0.6);
        (chi * inner).scale(1000.0)
    }
}
impl_field!(LocalizedChirps, 1, eval);

/// `exp(-1 / (1 - |x-c|^2/s^2))` inside `|x-c| < s`, zero outside with zero
/// jets.
fn bump<S: Real>(x: &[S], c: &[f64], s: f64) -> S {
    let mut r2 = S::from_f64(0.0);
    for (xi, &ci) in x.iter().zip(c) {
        let d = *xi - S::from_f64(ci);
        r2 = r2 + d * d;
    }
    if r2.value() >= s * s {
        return S::from_f64(0.0);
    }
    let t = S::from_f64(1.0) - r2.scale(1.0 / (s * s));
    (-(S::from_f64(1.0) / t)).exp()
}

/// Four compactly supported bumps of different scales in the square.
#[derive(Clone, Copy, Debug)]
pub struct BumpMix2d;

impl BumpMix2d {
    fn eval<S: Real>(&self, x: &[S]) -> S {
        bump(x, &[0.0, 0.0], 0.8)
            + bump(x, &[0.6, 0.6], 0.2).scale(0.7)
            + bump(x, &[-0.5, 0.3], 0.1).scale(0.5)
            + bump(x, &[0.2, -0.7], 0.1).scale(0.3)
    }
}
impl_field!(BumpMix2d, 2, eval);

/// Three compactly supported bumps in the unit ball.
#[derive(Clone, Copy, Debug)]
pub struct BumpMix3d;

impl BumpMix3d {
    fn eval<S: Real>(&self, x: &[S]) -> S {
        bump(x, &[0.0, 0.0, 0.0], 0.8)
            + bump(x, &[0.5, 0.5, 0.1], 0.4).scale(0.7)
            + bump(x, &[-0.4, 0.3, -0.1], 0.3).scale(0.5)
    }
}
impl_field!(BumpMix3d, 3, eval);

/// Cross-modulated waves on the disk (nonhomogeneous boundary data).
#[derive(Clone, Copy, Debug)]
pub struct DiskWaves;

impl DiskWaves {
    fn eval<S: Real>(&self, x: &[S]) -> S {
        let (x1, x2) = (x[0], x[1]);
        let cross = x1 * x2;
        (x1.scale(4.0 * PI) + cross.scale(2.0 * PI)).sin().scale(0.3)
            + (x2.scale(12.0 * PI) + cross.scale(4.0 * PI)).sin().scale(0.05)
    }
}
impl_field!(DiskWaves, 2, eval);

/// Rapidly oscillating diffusion coefficient
/// `2 / (2 + A sin(2 pi x / eps)) + 2 + A cos(2 pi x / eps)`.
#[derive(Clone, Copy, Debug)]
pub struct OscillatoryCoef1d {
    pub amplitude: f64,
    pub period: f64,
}

impl OscillatoryCoef1d {
    fn eval<S: Real>(&self, x: &[S]) -> S {
        let arg = x[0].scale(2.0 * PI / self.period);
        let two = S::from_f64(2.0);
        two / (two + arg.sin().scale(self.amplitude))
            + two
            + arg.cos().scale(self.amplitude)
    }
}
impl_field!(OscillatoryCoef1d, 1, eval);

/// Two-dimensional oscillatory coefficient; with `amplitude = 1.8` every
/// denominator stays `>= 0.2`, keeping the coefficient finite and positive.
#[derive(Clone, Copy, Debug)]
pub struct OscillatoryCoef2d {
    pub amplitude: f64,
    pub period: f64,
}

impl OscillatoryCoef2d {
    fn eval<S: Real>(&self, x: &[S]) -> S {
        let two = S::from_f64(2.0);
        let a1 = x[0].scale(2.0 * PI / self.period);
        let a2 = x[1].scale(2.0 * PI / self.period);
        let s1 = a1.sin().scale(self.amplitude);
        let s2 = a2.sin().scale(self.amplitude);
        let c2 = a2.cos().scale(self.amplitude);
        (two + s1) / (two + c2) + (two + s2) / (two + s1)
    }
}
impl_field!(OscillatoryCoef2d, 2, eval);
