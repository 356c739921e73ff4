//! Airy-type transforms `int exp(-(i/f)(k^3/3 - k z)) g(k) dk` and the function psi_f.

use num_complex::Complex64;

use crate::contours::{
    build_gamma_alpha, build_steepest, ContourPath, Side, SteepestOptions, SteepestPathSpec,
};
use crate::error::{Error, Result};
use crate::numerics::{principal_sqrt, ScaledComplex};
use crate::profiles::Profile;
use crate::quadrature::{integrate_oscillatory_with, CubicPhase, QuadOptions};

use super::EvalBudget;

type C = Complex64;
type S = ScaledComplex<f64>;

const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

fn opts(budget: &EvalBudget) -> QuadOptions<f64> {
    let mut o = QuadOptions::with_tol(budget.rel_tol);
    o.max_evals = budget.max_evals;
    o
}

/// Default contour depth: inside the profile's region and shallow enough that `exp(alpha^3 / 3f)` stays small.
pub fn default_alpha(f: f64, p: &Profile) -> f64 {
    0.5f64.min(0.5 * p.region.margin()).min((3.0 * f).cbrt())
}

/// `int exp(-(i/f)(k^3/3 - k z)) g(k) dk` along `path`.
pub fn cubic_transform_on<G>(
    path: &ContourPath<f64>,
    z: C,
    f: f64,
    g: G,
    budget: &EvalBudget,
) -> Result<S>
where
    G: Fn(C) -> C,
{
    let phase = CubicPhase { x: z };
    Ok(integrate_oscillatory_with(path, &phase, g, 1.0 / f, &opts(budget))?.value)
}

/// `psi_f(x) = (2 pi)^(-1/2) int_{gamma_alpha} exp(-i(k^3/(3f) - k x)) phi_hat(k) dk`.
pub fn psi_f_gamma(x: C, f: f64, p: &Profile, alpha: f64, budget: &EvalBudget) -> Result<S> {
    if !(f > 0.0) {
        return Err(Error::Domain("psi_f needs f > 0".into()));
    }
    let n = 1.0f64.max((f * x.re).max(0.0).sqrt() + 1.0);
    let path = build_gamma_alpha(alpha, n, p.region.margin())?;
    let z = x * f;
    let eval = p.eval.clone();
    let v = cubic_transform_on(&path, z, f, move |k| eval(k), budget)?;
    Ok(v.scale(C::new(1.0 / SQRT_2PI, 0.0)))
}

pub fn psi_f(x: C, f: f64, p: &Profile, budget: &EvalBudget) -> Result<S> {
    psi_f_gamma(x, f, p, default_alpha(f, p), budget)
}

/// `psi_f(x)` preferring the saddle decomposition when `f x` admits it.
pub fn psi_f_fast(x: C, f: f64, p: &Profile, budget: &EvalBudget) -> Result<S> {
    let eval = p.eval.clone();
    let v = transform_full(x * f, f, p, move |k| eval(k), budget)?;
    Ok(v.scale(C::new(1.0 / SQRT_2PI, 0.0)))
}

/// The six pieces of the saddle decomposition of `C_+` and `C_-`.
#[derive(Clone, Copy, Debug)]
pub struct SteepestIntegrals {
    /// `0 -> sqrt z`.
    pub i1: S,
    /// Along the plus curve from `sqrt z`.
    pub i2: S,
    /// Horizontal tail of the plus curve.
    pub i3: S,
    /// `-sqrt z -> 0`.
    pub i4: S,
    /// Along the minus curve, ending at `-sqrt z`.
    pub i5: S,
    /// Horizontal tail of the minus curve, oriented away from the saddle.
    pub i6: S,
    pub plus: SteepestPathSpec<f64>,
    pub minus: SteepestPathSpec<f64>,
}

impl SteepestIntegrals {
    /// Integral over `C_+`.
    pub fn plus_sum(&self) -> S {
        self.i1 + self.i2 + self.i3
    }

    /// Integral over `C_-`.
    pub fn minus_sum(&self) -> S {
        self.i4 + self.i5 - self.i6
    }

    pub fn total(&self) -> S {
        self.plus_sum() + self.minus_sum()
    }
}

/// True when the saddle decomposition applies: `Re sqrt z > 0` and `Im z <= 0`.
pub fn steepest_applies(z: C) -> bool {
    let w = principal_sqrt(z);
    z.im <= 0.0 && w.re > 1e-3 && z.norm() > 1e-6
}

pub fn steepest_options(p: &Profile, z: C) -> SteepestOptions<f64> {
    let k0 = p.region.margin();
    let eps2 = principal_sqrt(z).re;
    SteepestOptions::with_defaults(k0, eps2)
}

/// Computes `I1 .. I6` for the amplitude `g`.
pub fn steepest_integrals_for<G>(
    z: C,
    f: f64,
    g: G,
    sopts: &SteepestOptions<f64>,
    budget: &EvalBudget,
) -> Result<SteepestIntegrals>
where
    G: Fn(C) -> C + Copy,
{
    if !(f > 0.0) {
        return Err(Error::Domain("steepest integrals need f > 0".into()));
    }
    let w = principal_sqrt(z);
    let zero = C::new(0.0, 0.0);
    let (plus, plus_path) = build_steepest(z, Side::Plus, sopts)?;
    let (minus, minus_path) = build_steepest(z, Side::Minus, sopts)?;
    let plus_k = plus_path.shifted(w);
    let minus_k = minus_path.shifted(-w);
    let curve = |p: &ContourPath<f64>, i: usize| ContourPath::new(vec![p.pieces[i].clone()]);
    let i1 = cubic_transform_on(&ContourPath::segment(zero, w), z, f, g, budget)?;
    let i2 = cubic_transform_on(&curve(&plus_k, 0), z, f, g, budget)?;
    let i3 = cubic_transform_on(&curve(&plus_k, 1), z, f, g, budget)?;
    let i4 = cubic_transform_on(&ContourPath::segment(-w, zero), z, f, g, budget)?;
    let i5 = cubic_transform_on(&curve(&minus_k, 0).reversed(), z, f, g, budget)?;
    let i6 = cubic_transform_on(&curve(&minus_k, 1), z, f, g, budget)?;
    Ok(SteepestIntegrals {
        i1,
        i2,
        i3,
        i4,
        i5,
        i6,
        plus,
        minus,
    })
}

/// Saddle decomposition of `int exp(...) phi_hat(k) dk` for a profile.
pub fn steepest_integrals(
    z: C,
    f: f64,
    p: &Profile,
    budget: &EvalBudget,
) -> Result<SteepestIntegrals> {
    if !steepest_applies(z) {
        return Err(Error::Domain(
            "saddle decomposition needs Im z <= 0 and Re sqrt z > 0".into(),
        ));
    }
    let sopts = steepest_options(p, z);
    let e = &p.eval;
    steepest_integrals_for(z, f, |k| e(k), &sopts, budget)
}

/// `int_R exp(-(i/f)(k^3/3 - k z)) g(k) dk` on the deformed real line.
pub fn transform_full<G>(z: C, f: f64, p: &Profile, g: G, budget: &EvalBudget) -> Result<S>
where
    G: Fn(C) -> C,
{
    let gr = &g;
    if steepest_applies(z) {
        let sopts = steepest_options(p, z);
        if let Ok(s) = steepest_integrals_for(z, f, |k| gr(k), &sopts, budget) {
            return Ok(s.total());
        }
    }
    let xr = z.re / f;
    let n = 1.0f64.max(xr.max(0.0).sqrt() + 1.0);
    let path = build_gamma_alpha(default_alpha(f, p), n, p.region.margin())?;
    cubic_transform_on(&path, z, f, gr, budget)
}

/// `B = int exp(-(i/f)(k^3/3 - k z)) phi_hat(k) dk = sqrt(2 pi) psi_f(z/f)`.
pub fn transform_b(z: C, f: f64, p: &Profile, budget: &EvalBudget) -> Result<S> {
    let e = p.eval.clone();
    transform_full(z, f, p, move |k| e(k), budget)
}

/// `A = int exp(-(i/f)(k^3/3 - k z)) conj(phi_hat(-conj k)) dk = sqrt(2 pi) conj(psi_f(conj z / f))`.
pub fn transform_a(z: C, f: f64, p: &Profile, budget: &EvalBudget) -> Result<S> {
    let e = p.eval_conj.clone();
    transform_full(z, f, p, move |k| e(-k), budget)
}
