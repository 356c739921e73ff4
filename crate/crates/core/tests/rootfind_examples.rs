use num_complex::Complex64 as C;
use starkres::profiles::make_gaussian;
use starkres::resolvent::{EvalBudget, F_model1};
use starkres::rootfind::{
    eigenvalue_check, newton, rouche_ratio, scan_window, NewtonOptions, Rect, RootKind, ScanOptions,
};
use starkres::{Error, ScaledComplex64};

const R0: C = C::new(1.01905, -0.0111115);

#[test]
fn decoupled_model_has_no_zero_away_from_one() {
    let p = make_gaussian(0.0).unwrap();
    let b = EvalBudget::default();
    let rect = Rect::new(C::new(1.2, -0.3), C::new(1.6, -0.01));
    let rep = scan_window(|z| F_model1(z, 0.0, &p, &b), rect, (3, 3), &ScanOptions::default()).unwrap();
    assert!(rep.records.is_empty());
    assert_eq!(rep.winding.count, 0);
    assert!(rep.consistent());
}

#[test]
fn one_resonance_near_r0_without_field() {
    let p = make_gaussian(0.1).unwrap();
    let b = EvalBudget::default();
    let rep =
        scan_window(|z| F_model1(z, 0.0, &p, &b), Rect::centered(R0, 0.05), (3, 3), &ScanOptions::default()).unwrap();
    assert_eq!(rep.records.len(), 1);
    assert_eq!(rep.winding.count, 1);
    let r = &rep.records[0];
    assert!(r.count_certified);
    assert_eq!(r.kind, RootKind::Resonance);
    assert!((r.z() - R0).norm() < 5e-5);
}

#[test]
fn rouche_ratio_below_one_near_one() {
    let p = make_gaussian(0.1).unwrap();
    let q = rouche_ratio(&p, Rect::centered(C::new(1.0, 0.0), 0.1), 64, 1e-12).unwrap();
    assert!(q < 1.0);
}

#[test]
fn certified_root_survives_tighter_tolerance() {
    let p = make_gaussian(0.1).unwrap();
    let b = EvalBudget::default();
    let r = newton(|z| F_model1(z, 0.05, &p, &b), C::new(1.0, -0.005), &NewtonOptions::default()).unwrap();
    let tight = EvalBudget { rel_tol: b.rel_tol / 10.0, ..b.clone() };
    let v = F_model1(r.z(), 0.05, &p, &tight).unwrap();
    assert!(v.abs() <= NewtonOptions::default().cert_residual);
}

#[test]
fn newton_converges_quadratically_on_r0() {
    let p = make_gaussian(0.1).unwrap();
    let b = EvalBudget::default();
    let fh = |z: C| F_model1(z, 0.0, &p, &b);
    let root = newton(fh, C::new(1.0, -0.01), &NewtonOptions { tol: 1e-15, ..Default::default() }).unwrap().z();
    let iterate = |n: usize| -> C {
        match newton(fh, C::new(1.05, -0.03), &NewtonOptions { max_iter: n, tol: 0.0, ..Default::default() }) {
            Ok(r) => r.z(),
            Err(Error::NoConvergence { last, .. }) => last,
            Err(e) => panic!("{e}"),
        }
    };
    let errs: Vec<f64> = (1..=3).map(|n| (iterate(n) - root).norm()).collect();
    for w in errs.windows(2) {
        if w[0] > 1e-7 {
            assert!(w[1] / (w[0] * w[0]) < 50.0, "{errs:?}");
        }
    }
}

#[test]
fn newton_stops_at_domain_edge() {
    let e = newton(
        |z: C| {
            if z.re > 2.0 {
                Err(Error::Domain("outside".into()))
            } else {
                Ok(ScaledComplex64::from_complex(z.exp()))
            }
        },
        C::new(1.9, 0.0),
        &NewtonOptions { max_iter: 8, ..Default::default() },
    );
    assert!(matches!(e, Err(Error::NoConvergence { .. })));
}

#[test]
fn generic_real_points_are_not_eigenvalues() {
    let p = make_gaussian(0.1).unwrap();
    let b = EvalBudget::default();
    for lambda in [0.37, 1.3, 2.2] {
        let rep = eigenvalue_check(lambda, 0.1, &p, &b).unwrap();
        assert!(!rep.candidate);
        assert!(rep.f_residual > 1e-3);
    }
}
