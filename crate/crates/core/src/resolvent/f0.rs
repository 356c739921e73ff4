//! Field-free matrix element `(phi, (p^2 - z)^{-1} phi)` and its continuation below the axis.

use num_complex::Complex64;

use crate::contours::{horizontal_piece, ContourPath, Region};
use crate::error::{Error, Result};
use crate::numerics::{erf_complex, principal_sqrt};
use crate::profiles::{Profile, ProfileKind};
use crate::quadrature::{integrate_complex, principal_value};

type C = Complex64;

fn check_domain(z: C, p: &Profile) -> Result<C> {
    if z.im == 0.0 && z.re <= 0.0 {
        return Err(Error::Domain(format!("z = {z} lies on the cut (-inf, 0]")));
    }
    let w = principal_sqrt(z);
    if z.im < 0.0 {
        let ok = match p.region {
            Region::Strip(k0) => w.im > -k0,
            Region::Sector(th) => w.im.atan2(w.re).abs() < th,
        };
        if !ok {
            return Err(Error::Domain(format!(
                "z = {z} lies outside the continuation region of the profile"
            )));
        }
    }
    Ok(w)
}

/// `int phi_hat(k) conj(phi_hat(conj k)) / (k^2 - z) dk` over the real line, for `z` off `[0, inf)`.
pub fn plain_integral(z: C, p: &Profile, tol: f64) -> Result<C> {
    if z.im == 0.0 && z.re >= 0.0 {
        return Err(Error::Domain(
            "plain integral is singular for z in [0, inf)".into(),
        ));
    }
    let a = principal_sqrt(z).re;
    let g = |k: C| p.at(k) * p.at_conj(k) / (k * k - z);
    let mut edges = vec![f64::NEG_INFINITY];
    if a > 1e-12 {
        edges.extend([-a, 0.0, a]);
    } else {
        edges.push(0.0);
    }
    edges.push(f64::INFINITY);
    let mut total = C::new(0.0, 0.0);
    for w in edges.windows(2) {
        let path = ContourPath::new(vec![horizontal_piece(0.0, w[0], w[1])]);
        total += integrate_complex(&path, g, tol)?.to_complex();
    }
    Ok(total)
}

/// Residue term `(i pi / sqrt z)(phi_hat(sqrt z) conj(phi_hat(conj sqrt z)) + phi_hat(-sqrt z) conj(phi_hat(-conj sqrt z)))`.
pub fn residue_term(z: C, p: &Profile) -> C {
    let w = principal_sqrt(z);
    C::new(0.0, std::f64::consts::PI) / w * (p.at(w) * p.at_conj(w) + p.at(-w) * p.at_conj(-w))
}

/// `P.V. int |phi_hat(k)|^2 / (k^2 - s^2) dk` for real `z = s^2 > 0`.
pub fn principal_part(z: f64, p: &Profile, tol: f64) -> Result<f64> {
    principal_value(|k| p.density(k), z.sqrt(), tol)
}

/// Continued value by quadrature: plain integral above the axis, plus the residue term below it.
pub fn resolvent_f0_general(z: C, p: &Profile, tol: f64) -> Result<C> {
    let w = check_domain(z, p)?;
    if z.im > 0.0 {
        plain_integral(z, p, tol)
    } else if z.im < 0.0 {
        Ok(plain_integral(z, p, tol)? + residue_term(z, p))
    } else {
        let half =
            C::new(0.0, std::f64::consts::PI / (2.0 * w.re)) * (p.density(w.re) + p.density(-w.re));
        Ok(principal_part(z.re, p, tol)? + half)
    }
}

/// Gaussian closed form `i pi mu^2 exp(-z)(1 + erf(i sqrt z)) / sqrt z`, valid off `(-inf, 0]`.
pub fn gaussian_f0_continued(z: C, mu: f64) -> C {
    let w = principal_sqrt(z);
    let i = C::new(0.0, 1.0);
    i * std::f64::consts::PI * mu * mu * (-z).exp() * (1.0 + erf_complex(i * w)) / w
}

/// Gaussian plain integral below the axis: `-i pi mu^2 exp(-z)(1 - erf(i sqrt z)) / sqrt z`.
pub fn gaussian_plain_lower(z: C, mu: f64) -> C {
    let w = principal_sqrt(z);
    let i = C::new(0.0, 1.0);
    -i * std::f64::consts::PI * mu * mu * (-z).exp() * (1.0 - erf_complex(i * w)) / w
}

/// Continued `(phi, (p^2 - z)^{-1} phi)`; Gaussian profiles use the closed form.
pub fn resolvent_f0_continued(z: C, p: &Profile, tol: f64) -> Result<C> {
    check_domain(z, p)?;
    match p.kind {
        ProfileKind::Gaussian { mu } => Ok(gaussian_f0_continued(z, mu)),
        _ => resolvent_f0_general(z, p, tol),
    }
}

/// Physical-sheet `(phi, (p^2 - z)^{-1} phi)` off `[0, inf)`.
pub fn resolvent_f0_plain(z: C, p: &Profile, tol: f64) -> Result<C> {
    match p.kind {
        ProfileKind::Gaussian { mu } if z.im < 0.0 => Ok(gaussian_plain_lower(z, mu)),
        ProfileKind::Gaussian { mu } if z.im > 0.0 => Ok(gaussian_f0_continued(z, mu)),
        _ => plain_integral(z, p, tol),
    }
}

/// `int |phi_hat|^2 / ((k^2 + |lambda|)(1 + |lambda|)) dk`; the model has the eigenvalue `lambda < 0` iff this equals 1.
pub fn bound_state_condition(lambda: f64, p: &Profile) -> Result<f64> {
    if !(lambda < 0.0) {
        return Err(Error::Domain(
            "bound-state condition needs lambda < 0".into(),
        ));
    }
    let l = lambda.abs();
    let g = |k: C| C::new(p.density(k.re) / ((k.re * k.re + l) * (1.0 + l)), 0.0);
    let path = ContourPath::new(vec![horizontal_piece(
        0.0,
        f64::NEG_INFINITY,
        f64::INFINITY,
    )]);
    Ok(integrate_complex(&path, g, 1e-12)?.to_complex().re)
}
