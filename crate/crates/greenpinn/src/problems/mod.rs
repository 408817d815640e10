//! Problem catalog: domains, exact solutions, coefficients, operator
//! application, and collocation sampling.

mod catalog;
mod domain;
mod fields;
mod operator;
mod sampling;

pub use catalog::{catalog, EllipticProblem, ProblemId, RhsConvention};
pub use domain::Domain;
pub use fields::{
    BumpMix2d, BumpMix3d, ConstField, DiskWaves, LocalizedChirps, OscillatoryCoef1d,
    OscillatoryCoef2d, ScalarField, SineMix,
};
pub use operator::{
    apply_operator, apply_operator_field, apply_to_jets, apply_with_coeffs, point_coeffs,
    residual_field, source_from_exact, PointCoeffs,
};
pub use sampling::{sample_boundary, sample_interior, LatticeInfo, Points, Strategy};

use crate::autodiff::Jet2;
use crate::network::{JetField, JetOutput};

/// An analytic field viewed as a [`JetField`], letting closed-form solutions
/// stand in for a network anywhere one is expected.
pub struct ExactField<'a>(pub &'a dyn ScalarField, pub usize);

impl JetField for ExactField<'_> {
    fn jets(&self, x: &[f64]) -> JetOutput {
        let d = self.1;
        let mut grad = vec![0.0; d];
        let mut d2 = vec![0.0; d];
        let mut u = 0.0;
        for axis in 0..d {
            let j: Jet2 = self.0.jet(x, axis);
            grad[axis] = j.d1;
            d2[axis] = j.d2;
            if axis == 0 {
                u = j.v;
            }
        }
        JetOutput { u, grad, d2 }
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.0.value(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::Real;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_interior(problem: &EllipticProblem, n: usize, seed: u64) -> Points {
        let (pts, _) = sample_interior(&problem.domain, Strategy::UniformRandom, n, seed);
        pts
    }

    #[test]
    fn catalog_examples() {
        let u1 = catalog(ProblemId::U1);
        let e = u1.exact.as_ref().unwrap();
        assert_eq!(e.value(&[0.0]), 0.0);
        assert!(e.value(&[1.0]).abs() < 1e-12);
        assert!(e.value(&[-1.0]).abs() < 1e-12);

        let u2 = catalog(ProblemId::U2);
        let e = u2.exact.as_ref().unwrap();
        for x in [0.6, -0.6, 0.8, -0.95] {
            assert_eq!(e.value(&[x]), 0.0);
            let j = e.jet(&[x], 0);
            assert_eq!((j.v, j.d1, j.d2), (0.0, 0.0, 0.0));
        }

        // Bump boundary: zero value and zero jets at |x-c| = s and beyond.
        let u3 = catalog(ProblemId::U3Bumps2d);
        let e = u3.exact.as_ref().unwrap();
        let on_edge = [0.6 + 0.2, 0.6]; // second bump, center (0.6,0.6), s=0.2
        for axis in 0..2 {
            let j = e.jet(&on_edge, axis);
            assert_eq!((j.v, j.d1, j.d2), (0.0, 0.0, 0.0));
        }

        // k(0) = 2/(2+0) + 2 + 1.8 = 4.8
        let ms = catalog(ProblemId::Multiscale1d);
        assert!((ms.k.value(&[0.0]) - 4.8).abs() < 1e-14);

        assert!(matches!(ProblemId::parse("u3_bumps2d"), Ok(ProblemId::U3Bumps2d)));
        assert!(ProblemId::parse("nope").is_err());
    }

    #[test]
    fn multiscale2d_coefficient_is_elliptic() {
        let p = catalog(ProblemId::Multiscale2d);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut kmin = f64::INFINITY;
        let mut kmax = 0.0f64;
        for _ in 0..2000 {
            let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let k = p.k.value(&x);
            assert!(k.is_finite() && k > 0.0, "k not elliptic at {x:?}: {k}");
            kmin = kmin.min(k);
            kmax = kmax.max(k);
        }
        // Denominators bounded below by 0.2 keep k within fixed bounds.
        assert!(kmin > 0.05 && kmax < (3.8 / 0.2 + 3.8 / 0.2) + 1.0, "{kmin} {kmax}");
    }

    #[test]
    fn operator_trivial_cases() {
        // Affine field with unit k and zero c is annihilated.
        struct Affine;
        impl ScalarField for Affine {
            fn value(&self, x: &[f64]) -> f64 {
                3.0 * x[0] + 2.0
            }
            fn jet(&self, x: &[f64], axis: usize) -> crate::autodiff::Jet2 {
                let s = crate::autodiff::Jet2::seed(x[axis], true);
                if axis == 0 {
                    s.scale(3.0) + crate::autodiff::Jet2::constant(2.0)
                } else {
                    crate::autodiff::Jet2::constant(self.value(x))
                }
            }
        }
        let p = catalog(ProblemId::U1);
        assert_eq!(apply_operator_field(&p, &ExactField(&Affine, 1), &[0.37]), 0.0);

        // u = x^2 has laplacian 2.
        struct Square;
        impl Square {
            fn eval<S: Real>(&self, x: &[S]) -> S {
                x[0] * x[0]
            }
        }
        impl ScalarField for Square {
            fn value(&self, x: &[f64]) -> f64 {
                self.eval(x)
            }
            fn jet(&self, x: &[f64], axis: usize) -> crate::autodiff::Jet2 {
                self.eval(&[crate::autodiff::Jet2::seed(x[0], axis == 0)])
            }
        }
        let a = apply_operator_field(&p, &ExactField(&Square, 1), &[0.2]);
        assert!((a - 2.0).abs() < 1e-14);
    }

    /// Cross-check the divergence-form assembly against finite differences
    /// of the coefficient and solution fields.
    #[test]
    fn operator_matches_finite_difference_assembly() {
        let k = OscillatoryCoef1d { amplitude: 1.0, period: 0.5 };
        let u = SineMix;
        let problem = EllipticProblem {
            id: ProblemId::Multiscale1d,
            domain: Domain::Interval { a: -1.0, b: 1.0 },
            k: Box::new(k),
            c: Box::new(ConstField(0.0)),
            exact: None,
            rhs: RhsConvention::DivForm,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let h = 1e-3;
        let d5 = |f: &dyn Fn(f64) -> f64, x: f64| {
            (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
        };
        let dd5 = |f: &dyn Fn(f64) -> f64, x: f64| {
            (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h)
                - f(x - 2.0 * h))
                / (12.0 * h * h)
        };
        for _ in 0..100 {
            let x = rng.gen_range(-0.9..0.9);
            let kf = |t: f64| k.value(&[t]);
            let uf = |t: f64| u.value(&[t]);
            let fd = kf(x) * dd5(&uf, x) + d5(&kf, x) * d5(&uf, x);
            let jets = apply_operator_field(&problem, &ExactField(&u, 1), &[x]);
            let rel = (fd - jets).abs() / fd.abs().max(jets.abs()).max(1e-6);
            assert!(rel <= 1e-5, "x={x}: fd {fd} vs jets {jets}");
        }
    }

    #[test]
    fn source_sign_convention() {
        // For laplacian(u) = -f with u = sin(2 pi x): f = 4 pi^2 sin(2 pi x).
        struct Sin2Pi;
        impl Sin2Pi {
            fn eval<S: Real>(&self, x: &[S]) -> S {
                x[0].scale(2.0 * std::f64::consts::PI).sin()
            }
        }
        impl ScalarField for Sin2Pi {
            fn value(&self, x: &[f64]) -> f64 {
                self.eval(x)
            }
            fn jet(&self, x: &[f64], axis: usize) -> crate::autodiff::Jet2 {
                self.eval(&[crate::autodiff::Jet2::seed(x[0], axis == 0)])
            }
        }
        let problem = EllipticProblem {
            id: ProblemId::U1,
            domain: Domain::Interval { a: -1.0, b: 1.0 },
            k: Box::new(ConstField(1.0)),
            c: Box::new(ConstField(0.0)),
            exact: Some(Box::new(Sin2Pi)),
            rhs: RhsConvention::NegF,
        };
        let f = source_from_exact(&problem, &[0.25]).unwrap();
        let expect = 4.0 * std::f64::consts::PI * std::f64::consts::PI;
        assert!((f - expect).abs() / expect < 1e-12, "{f} vs {expect}");

        // Affine exact solution: f = 0.
        let fa = source_from_exact(&catalog(ProblemId::U1), &[1.0 / 3.0]).unwrap();
        let _ = fa; // u1 is not affine; just exercise the path
        assert!(source_from_exact(&catalog(ProblemId::Multiscale1d), &[0.0]).is_err());
    }

    #[test]
    fn exact_solutions_have_zero_residual() {
        for id in ProblemId::ALL {
            let p = catalog(id);
            let Some(exact) = p.exact.as_ref() else { continue };
            let pts = random_interior(&p, 100, 13);
            for x in pts.iter() {
                let r = residual_field(&p, &ExactField(exact.as_ref(), p.dim()), x);
                assert!(
                    r.abs() <= 1e-10,
                    "{}: residual {r} at {x:?}",
                    p.id.name()
                );
            }
        }
    }

    #[test]
    fn interval_grid_lattice_rule() {
        let d = Domain::Interval { a: -1.0, b: 1.0 };
        let (pts, lat) = sample_interior(&d, Strategy::Grid, 5, 0);
        let expect = [-2.0 / 3.0, -1.0 / 3.0, 0.0, 1.0 / 3.0, 2.0 / 3.0];
        assert_eq!(pts.len(), 5);
        for (i, x) in pts.iter().enumerate() {
            assert!((x[0] - expect[i]).abs() < 1e-15);
        }
        let lat = lat.unwrap();
        assert!((lat.cell_measure() - 2.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn disk_grid_points_are_strictly_inside() {
        let d = Domain::Disk { center: [0.0, 0.0], radius: 1.0 };
        let (pts, lat) = sample_interior(&d, Strategy::Grid, 10_000, 0);
        let lat = lat.unwrap();
        assert_eq!(lat.n_per_axis, 100);
        // close to pi/4 of the lattice
        assert!(pts.len() > 7700 && pts.len() <= 8050, "{}", pts.len());
        for x in pts.iter() {
            assert!(x[0] * x[0] + x[1] * x[1] < 1.0);
        }
        // lattice index map is consistent
        let mut seen = 0;
        for slot in &lat.index_of {
            if let Some(i) = slot {
                let p = pts.point(*i as usize);
                assert!(d.contains(p));
                seen += 1;
            }
        }
        assert_eq!(seen, pts.len());
    }

    #[test]
    fn random_sampling_is_deterministic() {
        let d = Domain::Ball { center: [0.0, 0.0, 0.0], radius: 1.0 };
        let (a, _) = sample_interior(&d, Strategy::UniformRandom, 500, 7);
        let (b, _) = sample_interior(&d, Strategy::UniformRandom, 500, 7);
        assert_eq!(a.coords, b.coords);
        assert_eq!(a.len(), 500);
        assert!(a.iter().all(|x| d.contains(x)));
    }

    #[test]
    fn boundary_sampling() {
        let iv = Domain::Interval { a: -1.0, b: 1.0 };
        let b = sample_boundary(&iv, 2, 0);
        assert_eq!(b.coords, vec![-1.0, 1.0]);

        let disk = Domain::Disk { center: [0.5, -0.25], radius: 2.0 };
        let b = sample_boundary(&disk, 64, 3);
        for x in b.iter() {
            let r = ((x[0] - 0.5).powi(2) + (x[1] + 0.25).powi(2)).sqrt();
            assert!((r - 2.0).abs() < 1e-12);
        }

        // Stratified square allocation: each side gets count/4 +- 1.
        let sq = Domain::Square { a: -1.0, b: 1.0 };
        for count in [17, 40, 99] {
            let b = sample_boundary(&sq, count, 1);
            assert_eq!(b.len(), count);
            let mut per_side = [0usize; 4];
            for x in b.iter() {
                if x[1] == -1.0 {
                    per_side[0] += 1;
                } else if x[0] == 1.0 {
                    per_side[1] += 1;
                } else if x[1] == 1.0 {
                    per_side[2] += 1;
                } else {
                    assert_eq!(x[0], -1.0);
                    per_side[3] += 1;
                }
            }
            let lo = count / 4;
            for s in per_side {
                assert!(s == lo || s == lo + 1, "side got {s} of {count}");
            }
        }

        let ball = Domain::Ball { center: [0.0, 0.0, 0.0], radius: 1.0 };
        let b = sample_boundary(&ball, 50, 9);
        for x in b.iter() {
            let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            assert!((r - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dist_to_boundary_examples() {
        let sq = Domain::Square { a: -1.0, b: 1.0 };
        assert_eq!(sq.dist_to_boundary(&[0.0, 0.0]), 1.0);
        assert!((sq.dist_to_boundary(&[0.7, -0.2]) - 0.3).abs() < 1e-15);
        let ball = Domain::Ball { center: [0.0, 0.0, 0.0], radius: 1.0 };
        assert!((ball.dist_to_boundary(&[0.5, 0.0, 0.0]) - 0.5).abs() < 1e-15);
    }
}
