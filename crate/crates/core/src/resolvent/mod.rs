//! Resolvent matrix elements, their continuation across the spectrum, and the resonance functions.

pub mod f0;
pub mod physical;
pub mod transforms;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{principal_sqrt, scaled_exp, ScaledComplex};
use crate::profiles::{Profile, ProfileKind};

pub use f0::{
    bound_state_condition, gaussian_f0_continued, plain_integral, resolvent_f0_continued,
    resolvent_f0_general, resolvent_f0_plain,
};
pub use physical::{is_ill_conditioned, momentum_lower, psi_norm_squared, resolvent_direct};
pub use transforms::{
    psi_f, psi_f_gamma, steepest_integrals, transform_a, transform_b, SteepestIntegrals,
};

type C = Complex64;
type S = ScaledComplex<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Expansion24,
    Leading26,
    Auto,
}

/// Evaluation strategy for the physical-sheet part.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectMethod {
    /// One-dimensional recursion over the momentum double integral.
    Momentum,
    /// Position-space integral over `|psi_f|^2`.
    Position,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalBudget {
    pub rel_tol: f64,
    pub max_evals: usize,
    pub method: Method,
    /// `Auto` uses the exact form for `f >= auto_threshold`.
    pub auto_threshold: f64,
    pub direct: DirectMethod,
    /// Panel refinement factor of the momentum recursion.
    pub refine: f64,
}

impl Default for EvalBudget {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_evals: 2_000_000,
            method: Method::Auto,
            auto_threshold: 0.01,
            direct: DirectMethod::Momentum,
            refine: 0.25,
        }
    }
}

impl EvalBudget {
    pub fn with_method(method: Method) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) {
            return Err(Error::Config("rel_tol must be positive".into()));
        }
        if !(self.refine > 0.0) {
            return Err(Error::Config("refine must be positive".into()));
        }
        Ok(())
    }

    /// Method actually used at field strength `f` and energy `z`.
    pub fn resolve(&self, z: C, f: f64) -> Method {
        match self.method {
            Method::Auto => {
                if f >= self.auto_threshold || !transforms::steepest_applies(z) {
                    Method::Exact
                } else {
                    Method::Expansion24
                }
            }
            m => m,
        }
    }
}

/// Continued matrix element for `f > 0`: physical value above the axis, `(i/f) A B` plus the physical value from below otherwise.
pub fn resolvent_continued(z: C, f: f64, p: &Profile, budget: &EvalBudget) -> Result<S> {
    if f == 0.0 {
        return Ok(S::from_complex(resolvent_f0_continued(
            z,
            p,
            budget.rel_tol,
        )?));
    }
    if !(f > 0.0) {
        return Err(Error::Domain("f must be non-negative".into()));
    }
    if z.im > 0.0 {
        return resolvent_direct(z, f, p, budget);
    }
    let jump = continuation_jump(z, f, p, budget)?;
    let phys = physical::physical_lower(z, f, p, budget)?;
    Ok(jump + S::from_complex(phys))
}

/// `(i/f) A B = (2 pi i / f) conj(psi_f(conj z / f)) psi_f(z / f)`.
pub fn continuation_jump(z: C, f: f64, p: &Profile, budget: &EvalBudget) -> Result<S> {
    let a = transform_a(z, f, p, budget)?;
    let b = transform_b(z, f, p, budget)?;
    Ok((a * b).scale(C::new(0.0, 1.0 / f)))
}

/// Pieces of the small-field expansion.
#[derive(Clone, Copy, Debug)]
pub struct Expansion24 {
    /// `(i/f)` times the product of the full-line transforms.
    pub product: S,
    /// `-(i/f)` times the product of the negative half-line transforms.
    pub negative: S,
    /// `(1/z)(...)` boundary-value term.
    pub boundary: S,
    /// Physical-sheet field-free matrix element.
    pub plain: C,
}

impl Expansion24 {
    pub fn total(&self) -> S {
        self.product + self.negative + self.boundary + S::from_complex(self.plain)
    }
}

pub fn expansion24_terms(z: C, f: f64, p: &Profile, budget: &EvalBudget) -> Result<Expansion24> {
    if !(f > 0.0) {
        return Err(Error::Domain("expansion needs f > 0".into()));
    }
    if !transforms::steepest_applies(z) {
        return Err(Error::Domain(format!(
            "z = {z} outside the expansion region"
        )));
    }
    let sopts = transforms::steepest_options(p, z);
    let e = &p.eval;
    let ec = &p.eval_conj;
    let sb = transforms::steepest_integrals_for(z, f, |k| e(k), &sopts, budget)?;
    let sa = transforms::steepest_integrals_for(z, f, |k| ec(-k), &sopts, budget)?;
    let (a, b) = (sa.total(), sb.total());
    let (d, c) = (sa.minus_sum(), sb.minus_sum());
    let i_f = C::new(0.0, 1.0 / f);
    let product = (a * b).scale(i_f);
    let negative = (d * c).scale(-i_f);
    let boundary = (d.scale(p.boundary_right) + c.scale(p.boundary_left.conj())).scale(1.0 / z);
    let plain = resolvent_f0_plain(z, p, budget.rel_tol)?;
    Ok(Expansion24 {
        product,
        negative,
        boundary,
        plain,
    })
}

/// Small-field expansion with `O(f)` remainder.
pub fn resolvent_expansion24(z: C, f: f64, p: &Profile, budget: &EvalBudget) -> Result<S> {
    Ok(expansion24_terms(z, f, p, budget)?.total())
}

/// Saddle term `(pi / sqrt z) phi_hat(sqrt z) conj(phi_hat(-conj sqrt z)) exp((4i/3f) z^(3/2))`.
pub fn leading_saddle_term(z: C, f: f64, p: &Profile) -> S {
    let w = principal_sqrt(z);
    let pre = std::f64::consts::PI / w * p.at(w) * p.at_conj(-w);
    scaled_exp(C::new(0.0, 4.0 / (3.0 * f)) * z * w).scale(pre)
}

/// Leading-order form with `O(sqrt f)` remainder.
pub fn resolvent_leading26(z: C, f: f64, p: &Profile, budget: &EvalBudget) -> Result<S> {
    if !(f > 0.0) {
        return Err(Error::Domain("leading form needs f > 0".into()));
    }
    let rest = resolvent_f0_continued(z, p, budget.rel_tol)?;
    Ok(leading_saddle_term(z, f, p) + S::from_complex(rest))
}

/// Matrix element by the method selected in `budget`.
pub fn resolvent(z: C, f: f64, p: &Profile, budget: &EvalBudget) -> Result<S> {
    if f == 0.0 {
        return Ok(S::from_complex(resolvent_f0_continued(
            z,
            p,
            budget.rel_tol,
        )?));
    }
    if z.im > 0.0 {
        return resolvent_direct(z, f, p, budget);
    }
    match budget.resolve(z, f) {
        Method::Exact | Method::Auto => resolvent_continued(z, f, p, budget),
        Method::Expansion24 => resolvent_expansion24(z, f, p, budget),
        Method::Leading26 => resolvent_leading26(z, f, p, budget),
    }
}

/// `1 - z - (phi, R_f(z) phi)` continued to the second sheet.
#[allow(non_snake_case)]
pub fn F_model1(z: C, f: f64, p: &Profile, budget: &EvalBudget) -> Result<S> {
    let r = resolvent(z, f, p, budget)?;
    Ok(S::from_complex(C::new(1.0, 0.0) - z) - r)
}

/// `sgn(N) + (phi_eps, R_f(z) phi_eps)` with `N = (psi0, (1 - p^2) psi0) < 0`.
///
/// At `f = 0` this is the closed form `[(z-1)||psi0||^2 + (eps^2 + (z-1)^2)(psi0, (p^2-z)^{-1} psi0)] / |N|`.
#[allow(non_snake_case)]
pub fn F_model2(z: C, f: f64, p: &Profile, budget: &EvalBudget) -> Result<S> {
    let ProfileKind::ModelII {
        epsilon,
        sign_integral,
        ..
    } = p.kind
    else {
        return Err(Error::Domain("F_model2 needs a Model II profile".into()));
    };
    if sign_integral >= 0.0 {
        return Err(Error::NormSign {
            value: sign_integral,
        });
    }
    if f == 0.0 {
        let base = p
            .base
            .as_ref()
            .ok_or_else(|| Error::Domain("Model II profile without base".into()))?;
        let r0 = resolvent_f0_continued(z, base, budget.rel_tol)?;
        let zm1 = z - 1.0;
        let v = (zm1 * base.l2_norm.powi(2) + (epsilon * epsilon + zm1 * zm1) * r0)
            / sign_integral.abs();
        return Ok(S::from_complex(v));
    }
    let r = resolvent(z, f, p, budget)?;
    Ok(S::from_complex(C::new(-1.0, 0.0)) + r)
}

/// Which resonance function to use.
#[derive(Clone, Debug)]
pub enum Model {
    I(Profile),
    II(Profile),
}

impl Model {
    pub fn profile(&self) -> &Profile {
        match self {
            Model::I(p) | Model::II(p) => p,
        }
    }

    pub fn eval(&self, z: C, f: f64, budget: &EvalBudget) -> Result<S> {
        match self {
            Model::I(p) => F_model1(z, f, p, budget),
            Model::II(p) => F_model2(z, f, p, budget),
        }
    }

    pub fn eval_complex(&self, z: C, f: f64, budget: &EvalBudget) -> Result<C> {
        Ok(self.eval(z, f, budget)?.to_complex())
    }

    /// Zero of the decoupled problem, where trajectories start.
    pub fn unperturbed_zero(&self) -> C {
        C::new(1.0, 0.0)
    }
}

/// Small-`epsilon` Model II resonance `1 - (eps^2 / ||psi0||^2)(P.V.(psi0, (p^2-1)^{-1} psi0) + (i pi / 2)(|psi0_hat(1)|^2 + |psi0_hat(-1)|^2))`.
pub fn model2_r0_expansion(epsilon: f64, base: &Profile, tol: f64) -> Result<C> {
    let pv = f0::principal_part(1.0, base, tol)?;
    let half = std::f64::consts::PI / 2.0 * (base.density(1.0) + base.density(-1.0));
    Ok(C::new(1.0, 0.0) - epsilon * epsilon / base.l2_norm.powi(2) * C::new(pv, half))
}
