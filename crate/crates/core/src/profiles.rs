//! Fourier-side coupling profiles.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::contours::Region;
use crate::error::{Error, Result};
use crate::numerics::principal_sqrt;
use crate::quadrature::integrate_real;

pub type ProfileFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

#[derive(Clone, Debug, PartialEq)]
pub enum ProfileKind {
    Gaussian {
        mu: f64,
    },
    PolyGaussian {
        coeffs: Vec<f64>,
    },
    ModelII {
        epsilon: f64,
        normalization: f64,
        sign_integral: f64,
    },
    Custom,
}

/// A profile `phi_hat` with analyticity metadata.
#[derive(Clone)]
pub struct Profile {
    pub eval: ProfileFn,
    /// `k -> conj(phi_hat(conj k))`.
    pub eval_conj: ProfileFn,
    pub region: Region<f64>,
    pub l2_norm: f64,
    pub boundary_right: Complex64,
    pub boundary_left: Complex64,
    pub description: String,
    /// `|phi_hat(k)|` stays below `1e-17` of its maximum for real `|k| > support_cut`.
    pub support_cut: f64,
    pub kind: ProfileKind,
    /// Base profile of a Model II coupling.
    pub base: Option<Arc<Profile>>,
    /// User assertion of the derivative bound required for sector profiles.
    pub sector_bound_asserted: bool,
}

impl std::fmt::Debug for Profile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Profile")
            .field("description", &self.description)
            .field("region", &self.region)
            .field("l2_norm", &self.l2_norm)
            .field("kind", &self.kind)
            .finish()
    }
}

impl Profile {
    pub fn at(&self, k: Complex64) -> Complex64 {
        (self.eval)(k)
    }

    pub fn at_conj(&self, k: Complex64) -> Complex64 {
        (self.eval_conj)(k)
    }

    pub fn at_real(&self, k: f64) -> Complex64 {
        (self.eval)(Complex64::new(k, 0.0))
    }

    /// `|phi_hat(k)|^2` on the real line.
    pub fn density(&self, k: f64) -> f64 {
        self.at_real(k).norm_sqr()
    }

    pub fn mu(&self) -> Option<f64> {
        match self.kind {
            ProfileKind::Gaussian { mu } => Some(mu),
            _ => None,
        }
    }
}

/// Builds a profile from closures, computing norm, boundary values and support cut numerically.
pub fn make_custom(
    eval: ProfileFn,
    eval_conj: ProfileFn,
    region: Region<f64>,
    description: impl Into<String>,
) -> Result<Profile> {
    let mut p = Profile {
        eval,
        eval_conj,
        region,
        l2_norm: 0.0,
        boundary_right: Complex64::new(0.0, 0.0),
        boundary_left: Complex64::new(0.0, 0.0),
        description: description.into(),
        support_cut: 0.0,
        kind: ProfileKind::Custom,
        base: None,
        sector_bound_asserted: false,
    };
    p.support_cut = support_cut(&p);
    let (r, l) = boundary_values(&p);
    p.boundary_right = r;
    p.boundary_left = l;
    p.l2_norm = l2_norm_numeric(&p)?;
    Ok(p)
}

/// `phi_hat(k) = mu exp(-k^2/2)`.
pub fn make_gaussian(mu: f64) -> Result<Profile> {
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(Error::Domain(format!("mu = {mu} must be non-negative")));
    }
    let f: ProfileFn = Arc::new(move |k: Complex64| mu * (-k * k / 2.0).exp());
    Ok(Profile {
        eval: f.clone(),
        eval_conj: f,
        region: Region::Strip(4.0),
        l2_norm: mu * std::f64::consts::PI.powf(0.25),
        boundary_right: Complex64::new(mu, 0.0),
        boundary_left: Complex64::new(mu, 0.0),
        description: format!("gaussian mu={mu}"),
        support_cut: (2.0 * (17.0 * std::f64::consts::LN_10)).sqrt(),
        kind: ProfileKind::Gaussian { mu },
        base: None,
        sector_bound_asserted: false,
    })
}

/// `phi_hat(k) = (sum c_n k^n) exp(-k^2/2)` with real coefficients.
pub fn make_poly_gaussian(coeffs: Vec<f64>) -> Result<Profile> {
    if coeffs.is_empty() || coeffs.iter().all(|c| *c == 0.0) {
        return Err(Error::Domain("polynomial must be nonzero".into()));
    }
    let c = coeffs.clone();
    let f: ProfileFn = Arc::new(move |k: Complex64| {
        let poly = c
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &a| acc * k + a);
        poly * (-k * k / 2.0).exp()
    });
    let mut p = make_custom(
        f.clone(),
        f,
        Region::Strip(4.0),
        format!("poly-gaussian {coeffs:?}"),
    )?;
    p.kind = ProfileKind::PolyGaussian { coeffs };
    Ok(p)
}

/// Default Model II base `(1 + k^2) exp(-k^2/2)`.
pub fn default_model2_base() -> Profile {
    make_poly_gaussian(vec![1.0, 0.0, 1.0]).expect("fixed coefficients")
}

/// `int (1 - k^2) |psi0_hat(k)|^2 dk`.
pub fn model2_sign_integral(psi0: &Profile) -> Result<f64> {
    let cut = psi0.support_cut + 1.0;
    integrate_real(|k| (1.0 - k * k) * psi0.density(k), -cut, cut, 1e-13)
}

/// `phi_eps(k) = (k^2 - 1 + i eps) psi0_hat(k) / sqrt|N|` with `N = int (1 - k^2)|psi0_hat|^2 < 0`.
pub fn make_model2(psi0: &Profile, epsilon: f64) -> Result<Profile> {
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(Error::Domain(format!(
            "epsilon = {epsilon} must be non-negative"
        )));
    }
    let n_val = model2_sign_integral(psi0)?;
    if n_val >= 0.0 {
        return Err(Error::NormSign { value: n_val });
    }
    let norm = n_val.abs().sqrt();
    let (b, bc) = (psi0.eval.clone(), psi0.eval_conj.clone());
    let eval: ProfileFn =
        Arc::new(move |k: Complex64| (k * k - 1.0 + Complex64::new(0.0, epsilon)) * b(k) / norm);
    let eval_conj: ProfileFn =
        Arc::new(move |k: Complex64| (k * k - 1.0 - Complex64::new(0.0, epsilon)) * bc(k) / norm);
    let mut p = make_custom(
        eval,
        eval_conj,
        psi0.region,
        format!("model II eps={epsilon} over {}", psi0.description),
    )?;
    // the prefactor only grows polynomially, so the base cut still applies up to a margin
    p.support_cut = p.support_cut.max(psi0.support_cut);
    p.kind = ProfileKind::ModelII {
        epsilon,
        normalization: norm,
        sign_integral: n_val,
    };
    p.base = Some(Arc::new(psi0.clone()));
    p.sector_bound_asserted = psi0.sector_bound_asserted;
    Ok(p)
}

fn neville(h: &[f64], v: &[Complex64]) -> Complex64 {
    let mut t = v.to_vec();
    let n = t.len();
    for m in 1..n {
        for i in 0..n - m {
            t[i] = (t[i + 1] * h[i] - t[i] * h[i + m]) / (h[i] - h[i + m]);
        }
    }
    t[0]
}

/// `(phi_hat(+0), phi_hat(-0))` by Richardson extrapolation of one-sided samples.
pub fn boundary_values(p: &Profile) -> (Complex64, Complex64) {
    let hs = [1e-2, 1e-3, 1e-4, 1e-5];
    let right: Vec<Complex64> = hs.iter().map(|&h| p.at_real(h)).collect();
    let left: Vec<Complex64> = hs.iter().map(|&h| p.at_real(-h)).collect();
    (neville(&hs, &right), neville(&hs, &left))
}

/// Smallest `L` with `|phi_hat(k)| < 1e-17 max|phi_hat|` for real `|k| > L`, plus a margin.
pub fn support_cut(p: &Profile) -> f64 {
    let step = 0.05;
    let n = 4000;
    let mut peak: f64 = 0.0;
    let mut mags = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let k = i as f64 * step;
        let m = p.at_real(k).norm().max(p.at_real(-k).norm());
        peak = peak.max(m);
        mags.push(m);
    }
    let last = mags.iter().rposition(|&m| m >= 1e-17 * peak).unwrap_or(0);
    last as f64 * step + 0.5
}

fn l2_norm_numeric(p: &Profile) -> Result<f64> {
    let cut = p.support_cut + 1.0;
    Ok(integrate_real(|k| p.density(k), -cut, cut, 1e-13)?.sqrt())
}

/// `|phi_hat(sqrt z) conj(phi_hat(-conj sqrt z))|`, the saddle factor that must stay away from zero.
pub fn saddle_product(p: &Profile, z: Complex64) -> f64 {
    let w = principal_sqrt(z);
    (p.at(w) * p.at_conj(-w)).norm()
}

/// Finite-difference Cauchy-Riemann residual `|d_y f - i d_x f|` at `k`.
pub fn cauchy_riemann_residual(p: &Profile, k: Complex64) -> f64 {
    let h = 1e-5;
    let dx = (p.at(k + h) - p.at(k - h)) / (2.0 * h);
    let dy = (p.at(k + Complex64::new(0.0, h)) - p.at(k - Complex64::new(0.0, h))) / (2.0 * h);
    (dy - Complex64::new(0.0, 1.0) * dx).norm()
}

/// File-level description of a profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileConfig {
    Gaussian {
        mu: f64,
    },
    PolyGaussian {
        coeffs: Vec<f64>,
    },
    Model2 {
        epsilon: f64,
        #[serde(default)]
        base: Option<Box<ProfileConfig>>,
    },
}

impl ProfileConfig {
    pub fn build(&self) -> Result<Profile> {
        match self {
            ProfileConfig::Gaussian { mu } => make_gaussian(*mu),
            ProfileConfig::PolyGaussian { coeffs } => make_poly_gaussian(coeffs.clone()),
            ProfileConfig::Model2 { epsilon, base } => {
                let b = match base {
                    Some(b) => b.build()?,
                    None => default_model2_base(),
                };
                make_model2(&b, *epsilon)
            }
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }
}
