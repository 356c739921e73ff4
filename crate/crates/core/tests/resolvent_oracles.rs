use num_complex::Complex64 as C;
use starkres::contours::{horizontal_piece, ContourPath};
use starkres::profiles::{default_model2_base, make_gaussian, make_model2, make_poly_gaussian};
use starkres::quadrature::integrate_complex;
use starkres::resolvent::physical::position_lower_or_direct;
use starkres::resolvent::{
    continuation_jump, expansion24_terms, momentum_lower, psi_f, resolvent, resolvent_direct, resolvent_f0_continued,
    resolvent_f0_general, DirectMethod, EvalBudget, Method, F_model2,
};

/// Gaussian profile: `-i mu^2 sqrt(pi) int_0^inf exp(-i z t) (1 - i t)^(-1/2) exp(-f^2 t^2 / 4 + i f^2 t^3 / 12) dt`.
fn gaussian_time_oracle(z: C, f: f64, mu: f64) -> C {
    let i = C::new(0.0, 1.0);
    let g = |t: C| (-i * z * t).exp() / (1.0 - i * t).sqrt() * (-f * f * t * t / 4.0 + i * f * f * t * t * t / 12.0).exp();
    let path = ContourPath::new(vec![horizontal_piece(0.0, 0.0, f64::INFINITY)]);
    let v = integrate_complex(&path, g, 1e-13).unwrap().to_complex();
    -i * mu * mu * std::f64::consts::PI.sqrt() * v
}

#[test]
fn momentum_matches_time_domain_oracle() {
    let p = make_gaussian(0.1).unwrap();
    for (f, z) in [
        (1.0, C::new(1.0, -0.3)),
        (0.2, C::new(1.02, -0.05)),
        (0.05, C::new(0.7, -0.01)),
        (0.05, C::new(1.3, 0.0)),
    ] {
        let m = momentum_lower(z, f, &p, 0.25).unwrap();
        let o = gaussian_time_oracle(z, f, 0.1);
        assert!((m - o).norm() <= 1e-10 * o.norm(), "f={f} z={z}: {m} vs {o}");
    }
}

#[test]
fn position_and_momentum_agree() {
    let p = make_gaussian(0.1).unwrap();
    let b = EvalBudget::default();
    let z = C::new(1.0, -0.3);
    let x = position_lower_or_direct(z, 1.0, &p, &b).unwrap();
    let m = momentum_lower(z, 1.0, &p, b.refine).unwrap();
    assert!((x - m).norm() <= 1e-9 * m.norm());
    let pb = EvalBudget { direct: DirectMethod::Position, ..b.clone() };
    let up = C::new(1.0, 0.3);
    let a = resolvent_direct(up, 1.0, &p, &pb).unwrap().to_complex();
    let c = resolvent_direct(up, 1.0, &p, &b).unwrap().to_complex();
    assert!((a - c).norm() <= 1e-9 * c.norm());
}

#[test]
fn jump_is_product_of_psi_values() {
    let p = make_gaussian(0.1).unwrap();
    let b = EvalBudget::default();
    let (z, f) = (C::new(1.02, -0.01), 0.1);
    let jump = continuation_jump(z, f, &p, &b).unwrap().to_complex();
    let a = psi_f(z.conj() / f, f, &p, &b).unwrap().to_complex().conj();
    let bb = psi_f(z / f, f, &p, &b).unwrap().to_complex();
    let expect = C::new(0.0, 2.0 * std::f64::consts::PI / f) * a * bb;
    assert!((jump - expect).norm() <= 1e-9 * expect.norm());
}

#[test]
fn continued_function_is_continuous_across_the_axis() {
    let p = make_gaussian(0.1).unwrap();
    let b = EvalBudget::with_method(Method::Exact);
    for f in [0.2, 0.03] {
        let x = 1.05;
        let up = resolvent(C::new(x, 1e-7), f, &p, &b).unwrap().to_complex();
        let on = resolvent(C::new(x, 0.0), f, &p, &b).unwrap().to_complex();
        let down = resolvent(C::new(x, -1e-7), f, &p, &b).unwrap().to_complex();
        assert!((up - on).norm() < 1e-6 * on.norm().max(1.0), "f={f}");
        assert!((down - on).norm() < 1e-6 * on.norm().max(1.0), "f={f}");
    }
}

#[test]
fn general_f0_route_matches_reduced_gaussian_oracle() {
    // |phi_hat|^2 = (1 + k^2 + k^4/4) exp(-k^2) reduces to the Gaussian closed form by k^2 = (k^2 - z) + z
    let p = make_poly_gaussian(vec![1.0, 0.0, 0.5]).unwrap();
    let sp = std::f64::consts::PI.sqrt();
    let (a, b, c) = (1.0, 1.0, 0.25);
    for z in [C::new(1.2, 0.3), C::new(1.2, 0.0), C::new(0.9, -0.2), C::new(2.5, -0.6), C::new(-0.5, 0.4)] {
        let i0 = resolvent_f0_continued(z, &make_gaussian(1.0).unwrap(), 1e-13).unwrap();
        let oracle = (a + b * z + c * z * z) * i0 + b * sp + c * (sp / 2.0 + z * sp);
        let q = resolvent_f0_general(z, &p, 1e-12).unwrap();
        assert!((q - oracle).norm() <= 1e-10 * oracle.norm(), "z={z}: {q} vs {oracle}");
    }
}

#[test]
fn expansion_error_frozen_values() {
    // errors of the O(f) expansion against the exact continuation, frozen from a run at rel_tol 1e-12
    let p = make_gaussian(0.1).unwrap();
    let z = C::new(1.02, -0.005);
    let exact = EvalBudget { rel_tol: 1e-12, ..EvalBudget::with_method(Method::Exact) };
    let b = EvalBudget { rel_tol: 1e-12, ..EvalBudget::default() };
    for (f, frozen) in [(0.04, 3.788e-4), (0.01, 9.585e-5)] {
        let ex = resolvent(z, f, &p, &exact).unwrap().to_complex();
        let e = expansion24_terms(z, f, &p, &b).unwrap().total().to_complex();
        let err = (e - ex).norm();
        assert!((err / frozen - 1.0).abs() < 0.01, "f={f}: {err:e}");
    }
}

#[test]
fn model2_closed_form_matches_direct_matrix_element() {
    let base = default_model2_base();
    let m = make_model2(&base, 0.05).unwrap();
    let b = EvalBudget::default();
    let z = C::new(1.1, 0.2);
    let closed = F_model2(z, 0.0, &m, &b).unwrap().to_complex();
    let direct = -1.0 + resolvent_f0_general(z, &m, 1e-12).unwrap();
    assert!((closed - direct).norm() <= 1e-9 * direct.norm().max(1.0), "{closed} vs {direct}");
}
