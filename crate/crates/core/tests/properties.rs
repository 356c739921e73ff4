use num_complex::Complex64 as C;
use proptest::prelude::*;
use starkres::contours::ContourPath;
use starkres::numerics::{erf_complex, principal_sqrt, scaled_add, scaled_exp, scaled_mul};
use starkres::quadrature::integrate_complex;
use starkres::trajectories::kendall_tau;
use starkres::ScaledComplex64;

fn cplx(r: f64) -> impl Strategy<Value = C> {
    (-r..r, -r..r).prop_map(|(a, b)| C::new(a, b))
}

fn close(a: C, b: C, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm()).max(1e-300)
}

proptest! {
    #[test]
    fn scaled_mul_matches_plain(a in cplx(50.0), b in cplx(50.0)) {
        let p = scaled_mul(ScaledComplex64::from_complex(a), ScaledComplex64::from_complex(b)).to_complex();
        prop_assert!(close(p, a * b, 1e-14));
    }

    #[test]
    fn scaled_add_matches_plain(a in cplx(50.0), b in cplx(50.0)) {
        let s = scaled_add(ScaledComplex64::from_complex(a), ScaledComplex64::from_complex(b)).to_complex();
        prop_assert!((s - (a + b)).norm() <= 1e-14 * (a.norm() + b.norm()));
    }

    #[test]
    fn scaled_exp_matches_plain(w in cplx(300.0)) {
        prop_assert!(close(scaled_exp(w).to_complex(), w.exp(), 1e-12));
    }

    #[test]
    fn scaled_exp_keeps_modulus_beyond_overflow(re in 800.0..5000.0f64, im in -10.0..10.0f64) {
        let e = scaled_exp(C::new(re, im));
        prop_assert!((e.ln_abs() - re).abs() <= 1e-12 * re);
    }

    #[test]
    fn principal_sqrt_squares_back(z in cplx(1e3)) {
        let s = principal_sqrt(z);
        prop_assert!(close(s * s, z, 1e-14));
        prop_assert!(s.re >= 0.0);
    }

    #[test]
    fn erf_is_odd_and_conjugate_symmetric(z in cplx(5.0)) {
        let e = erf_complex(z);
        prop_assert!(close(erf_complex(-z), -e, 1e-12));
        prop_assert!(close(erf_complex(z.conj()), e.conj(), 1e-12));
    }

    #[test]
    fn reversed_segment_negates_integral(a in cplx(2.0), b in cplx(2.0)) {
        prop_assume!((a - b).norm() > 1e-3);
        let path = ContourPath::segment(a, b);
        let g = |k: C| (k * k).sin() + k;
        let fwd = integrate_complex(&path, g, 1e-12).unwrap().to_complex();
        let bwd = integrate_complex(&path.reversed(), g, 1e-12).unwrap().to_complex();
        prop_assert!(close(fwd, -bwd, 1e-10));
        let cubic = integrate_complex(&path, |k: C| k * k, 1e-12).unwrap().to_complex();
        prop_assert!(close(cubic, (b * b * b - a * a * a) / 3.0, 1e-10));
    }

    #[test]
    fn kendall_tau_flips_under_reversal(ys in proptest::collection::vec(-1.0..1.0f64, 3..40)) {
        let rev: Vec<f64> = ys.iter().rev().copied().collect();
        prop_assert!((kendall_tau(&ys) + kendall_tau(&rev)).abs() < 1e-12);
        prop_assert!(kendall_tau(&ys).abs() <= 1.0);
    }
}
