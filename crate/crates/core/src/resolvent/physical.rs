//! Physical-sheet matrix element `(phi, (p^2 + f x - z)^{-1} phi)` for `f > 0`.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::contours::{build_semicircle, Half, Orientation};
use crate::error::{Error, Result};
use crate::numerics::ScaledComplex;
use crate::profiles::Profile;
use crate::quadrature::{
    gauss_legendre, integrate_complex, integrate_real, legendre_integration_matrix,
};

use super::transforms::psi_f_fast;
use super::{DirectMethod, EvalBudget};

type C = Complex64;
type S = ScaledComplex<f64>;

const NODES: usize = 20;

struct Rule {
    x: Vec<f64>,
    w: Vec<f64>,
    s: Vec<Vec<f64>>,
}

fn rule() -> &'static Rule {
    static R: OnceLock<Rule> = OnceLock::new();
    R.get_or_init(|| {
        let (x, w) = gauss_legendre::<f64>(NODES);
        let s = legendre_integration_matrix(&x, &w);
        Rule { x, w, s }
    })
}

/// True when `|Im z| / f < 1e-3`, where the physical-sheet pole sits close to the real axis.
pub fn is_ill_conditioned(z: C, f: f64) -> bool {
    z.im.abs() / f < 1e-3
}

/// `-(i/f) int int_{k1 < k2} exp((i/f)(Phi(k2) - Phi(k1))) conj(phi_hat(k2)) phi_hat(k1)` with `Phi(k) = k^3/3 - z k`.
///
/// Valid for `Im z <= 0`; on the real axis this is the boundary value from below.
pub fn momentum_lower(z: C, f: f64, p: &Profile, refine: f64) -> Result<C> {
    if z.im > 0.0 {
        return Err(Error::Domain("momentum form needs Im z <= 0".into()));
    }
    if !(f > 0.0) {
        return Err(Error::Domain("f must be positive".into()));
    }
    let r = rule();
    let cut = p.support_cut;
    let i_over_f = C::new(0.0, 1.0 / f);
    let dphi = |a: f64, b: f64| (b - a) * (C::new((b * b + a * b + a * a) / 3.0, 0.0) - z);
    let rate = |k: f64| (C::new(k * k, 0.0) - z).norm() / f;
    let width = |k: f64| {
        let w0 = (0.25 / refine).min(std::f64::consts::PI / (refine * rate(k)));
        let w1 = w0.min(std::f64::consts::PI / (refine * rate(k + w0)));
        let curv =
            (std::f64::consts::PI * f / (k.abs().max((k + w1).abs()).max(1e-3))).sqrt() / refine;
        w1.min(curv).max(1e-9)
    };
    let mut u = C::new(0.0, 0.0);
    let mut acc = C::new(0.0, 0.0);
    let mut a = -cut;
    let mut nodes = [C::new(0.0, 0.0); NODES];
    let mut g = [C::new(0.0, 0.0); NODES];
    let mut e = [C::new(0.0, 0.0); NODES];
    while a < cut {
        let b = (a + width(a)).min(cut);
        let h = (b - a) / 2.0;
        let c = (a + b) / 2.0;
        for j in 0..NODES {
            let k = c + h * r.x[j];
            let d = i_over_f * dphi(a, k);
            e[j] = d.exp();
            let phik = p.at_real(k);
            g[j] = (-d).exp() * phik;
            nodes[j] = phik.conj();
        }
        let mut total = C::new(0.0, 0.0);
        for i in 0..NODES {
            let mut part = C::new(0.0, 0.0);
            for j in 0..NODES {
                part += g[j] * r.s[i][j];
            }
            let ui = e[i] * (u + part * h);
            acc += nodes[i] * ui * (r.w[i] * h);
            total += g[i] * r.w[i];
        }
        u = (i_over_f * dphi(a, b)).exp() * (u + total * h);
        a = b;
    }
    Ok(C::new(0.0, -1.0 / f) * acc)
}

/// Position-space form `(1/f) int |psi_f(x)|^2 / (x - z/f) dx` with exact-reuse caching of psi_f.
pub struct PsiCache<'a> {
    f: f64,
    p: &'a Profile,
    budget: EvalBudget,
    map: Mutex<HashMap<(u64, u64), C>>,
}

impl<'a> PsiCache<'a> {
    pub fn new(f: f64, p: &'a Profile, budget: &EvalBudget) -> Self {
        Self {
            f,
            p,
            budget: budget.clone(),
            map: Mutex::new(HashMap::new()),
        }
    }

    pub fn get(&self, x: C) -> Result<C> {
        let key = (x.re.to_bits(), x.im.to_bits());
        if let Some(v) = self.map.lock().expect("cache lock").get(&key) {
            return Ok(*v);
        }
        let v = psi_f_fast(x, self.f, self.p, &self.budget)?.to_complex();
        self.map.lock().expect("cache lock").insert(key, v);
        Ok(v)
    }

    /// `conj(psi_f(conj x)) psi_f(x)`.
    pub fn density(&self, x: C) -> Result<C> {
        Ok(self.get(x.conj())?.conj() * self.get(x)?)
    }

    pub fn len(&self) -> usize {
        self.map.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Range of `x` outside which `|psi_f(x)|` is negligible.
pub fn psi_support(f: f64, p: &Profile) -> (f64, f64) {
    let lo = -(60.0 * f).powf(2.0 / 3.0) / f - 2.0;
    let hi = (p.support_cut + 0.5).powi(2) / f;
    (lo, hi)
}

fn position_integral(z: C, f: f64, cache: &PsiCache, tol: f64) -> Result<C> {
    let (lo, hi) = psi_support(f, cache.p);
    let c = z.re / f;
    let err = Mutex::new(None);
    let integrand = |x: f64| -> C {
        match cache.density(C::new(x, 0.0)) {
            Ok(d) => d / (C::new(x, 0.0) - z / f),
            Err(e) => {
                *err.lock().expect("lock") = Some(e);
                C::new(0.0, 0.0)
            }
        }
    };
    let mut total = C::new(0.0, 0.0);
    let mut edges = vec![lo];
    if c > lo && c < hi {
        edges.push(c);
    }
    edges.push(hi);
    for w in edges.windows(2) {
        let re = integrate_real(|x| integrand(x).re, w[0], w[1], tol)?;
        let im = integrate_real(|x| integrand(x).im, w[0], w[1], tol)?;
        total += C::new(re, im);
    }
    if let Some(e) = err.into_inner().expect("lock") {
        return Err(e);
    }
    Ok(total / f)
}

/// Real-axis form: real line with a clockwise semicircle above `z/f`, giving the boundary value from below.
fn position_real_axis(z: C, f: f64, cache: &PsiCache, tol: f64) -> Result<C> {
    let (lo, hi) = psi_support(f, cache.p);
    let c = z.re / f;
    let delta = 0.5;
    let pole = C::new(c, 0.0);
    let f_at = |x: C| cache.density(x).map(|d| d / (x - pole));
    let err = Mutex::new(None);
    let guard = |x: C| match f_at(x) {
        Ok(v) => v,
        Err(e) => {
            *err.lock().expect("lock") = Some(e);
            C::new(0.0, 0.0)
        }
    };
    let left = integrate_real(|x| guard(C::new(x, 0.0)).re, lo, c - delta, tol)?
        + integrate_real(|x| guard(C::new(x, 0.0)).im, lo, c - delta, tol)? * C::new(0.0, 1.0);
    let right = integrate_real(|x| guard(C::new(x, 0.0)).re, c + delta, hi, tol)?
        + integrate_real(|x| guard(C::new(x, 0.0)).im, c + delta, hi, tol)? * C::new(0.0, 1.0);
    let arc = build_semicircle(c, delta, Half::Upper, Orientation::Clockwise)?;
    let mid = integrate_complex(&arc, guard, tol)?.to_complex();
    if let Some(e) = err.into_inner().expect("lock") {
        return Err(e);
    }
    Ok((left + right + mid) / f)
}

/// Position-space evaluation: for `Im z != 0` the physical value, on the axis the value from below.
pub fn position_lower_or_direct(z: C, f: f64, p: &Profile, budget: &EvalBudget) -> Result<C> {
    let cache = PsiCache::new(f, p, budget);
    if z.im == 0.0 {
        position_real_axis(z, f, &cache, budget.rel_tol)
    } else {
        position_integral(z, f, &cache, budget.rel_tol)
    }
}

/// Physical-sheet `(phi, (p^2 + f x - z)^{-1} phi)` for `Im z != 0`.
pub fn resolvent_direct(z: C, f: f64, p: &Profile, budget: &EvalBudget) -> Result<S> {
    if z.im == 0.0 {
        return Err(Error::Domain("direct resolvent needs Im z != 0".into()));
    }
    if !(f > 0.0) {
        return Err(Error::Domain("direct resolvent needs f > 0".into()));
    }
    let v = match budget.direct {
        DirectMethod::Momentum => {
            if z.im < 0.0 {
                momentum_lower(z, f, p, budget.refine)?
            } else {
                momentum_lower(z.conj(), f, p, budget.refine)?.conj()
            }
        }
        DirectMethod::Position => {
            position_integral(z, f, &PsiCache::new(f, p, budget), budget.rel_tol)?
        }
    };
    Ok(S::from_complex(v))
}

/// Physical-sheet value for `Im z < 0`, or the boundary value from below on the axis.
pub fn physical_lower(z: C, f: f64, p: &Profile, budget: &EvalBudget) -> Result<C> {
    match budget.direct {
        DirectMethod::Momentum => momentum_lower(z, f, p, budget.refine),
        DirectMethod::Position => position_lower_or_direct(z, f, p, budget),
    }
}

/// Smallest `K` with `int_{|k| > K} |phi_hat|^2 < rel * ||phi_hat||^2`.
pub fn mass_cut(p: &Profile, rel: f64) -> Result<f64> {
    let total = p.l2_norm * p.l2_norm;
    let mut k = 0.0;
    while k < p.support_cut {
        let tail = integrate_real(|x| p.density(x), k, f64::INFINITY, 1e-8)?
            + integrate_real(|x| p.density(x), f64::NEG_INFINITY, -k, 1e-8)?;
        if tail < rel * total {
            return Ok(k);
        }
        k += 0.1;
    }
    Ok(p.support_cut)
}

/// `||psi_f||_2^2` by composite Gauss-Legendre over the support of psi_f, evaluated in parallel.
///
/// The right end is placed where the profile carries less than `1e-13` of its mass.
pub fn psi_norm_squared(f: f64, p: &Profile, budget: &EvalBudget) -> Result<f64> {
    let (lo, _) = psi_support(f, p);
    let hi = (mass_cut(p, 1e-13)? + 0.5).powi(2) / f;
    let mut edges = vec![lo];
    let mut x = lo;
    while x < hi {
        // |psi_f|^2 beats at angular frequency about 2 sqrt(f x)
        let freq = 2.0 * (f * x.max(0.0)).sqrt() + 1.0;
        x = (x + 2.0 * std::f64::consts::PI / freq).min(hi);
        edges.push(x);
    }
    let (gx, gw) = gauss_legendre::<f64>(20);
    let panels: Vec<(f64, f64)> = edges.windows(2).map(|w| (w[0], w[1])).collect();
    let parts: Result<Vec<f64>> = panels
        .par_iter()
        .map(|&(a, b)| {
            let h = (b - a) / 2.0;
            let c = (a + b) / 2.0;
            let mut s = 0.0;
            for (xi, wi) in gx.iter().zip(&gw) {
                let v = psi_f_fast(C::new(c + h * xi, 0.0), f, p, budget)?.to_complex();
                s += wi * v.norm_sqr();
            }
            Ok(s * h)
        })
        .collect();
    Ok(parts?.iter().sum())
}
