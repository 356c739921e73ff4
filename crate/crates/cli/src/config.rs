use std::fmt;
use std::path::{Path, PathBuf};

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};
use starkres::profiles::ProfileConfig;
use starkres::resolvent::{EvalBudget, Model};
use starkres::rootfind::{ModelKind, NewtonOptions, Rect};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelChoice {
    Model1,
    Model2,
}

impl ModelChoice {
    pub fn kind(self) -> ModelKind {
        match self {
            ModelChoice::Model1 => ModelKind::Model1,
            ModelChoice::Model2 => ModelKind::Model2,
        }
    }
}

/// Everything a subcommand needs. Missing fields take the defaults below.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelChoice,
    /// Explicit profile; when absent it is built from `mu` (model1) or `epsilon` (model2).
    pub profile: Option<ProfileConfig>,
    pub mu: f64,
    pub epsilon: f64,
    pub f: f64,
    /// Start and end field strength of a trace.
    pub f_range: [f64; 2],
    pub steps: usize,
    /// `[re_lo, re_hi, im_lo, im_hi]`.
    pub window: [f64; 4],
    /// Newton starts along the real and imaginary axes.
    pub grid: [usize; 2],
    /// Relative tolerance of the resolvent quadratures.
    pub tol: f64,
    pub newton_tol: f64,
    pub cert_residual: f64,
    pub samples_per_side: usize,
    pub mu_grid: Vec<f64>,
    /// Probe point of the order-law checks.
    pub probe: [f64; 2],
    pub validate_f: Vec<f64>,
    /// Newton seeds as `[re, im]`; the first one is used by `resonance` and `trace`.
    pub seeds: Vec<[f64; 2]>,
    pub out: PathBuf,
    pub svg: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelChoice::Model1,
            profile: None,
            mu: 0.1,
            epsilon: 0.05,
            f: 0.0,
            f_range: [0.02, 0.002],
            steps: 18,
            window: [0.9, 1.1, -0.04, -0.0005],
            grid: [6, 3],
            tol: 1e-10,
            newton_tol: 1e-11,
            cert_residual: 1e-7,
            samples_per_side: 32,
            mu_grid: (1..=17).map(|k| 0.05 * k as f64).collect(),
            probe: [1.02, -0.005],
            validate_f: vec![0.04, 0.02, 0.01, 0.005],
            seeds: Vec::new(),
            out: PathBuf::from("starkres_out"),
            svg: false,
        }
    }
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn field(name: &str, msg: &str) -> ConfigError {
    ConfigError(format!("config field `{name}`: {msg}"))
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| ConfigError(format!("{}: {}", path.display(), e.0)))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, v) in [("tol", self.tol), ("newton_tol", self.newton_tol), ("cert_residual", self.cert_residual)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(field(name, "must be a finite number > 0"));
            }
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(field("mu", "must be a finite number >= 0"));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(field("epsilon", "must be a finite number > 0"));
        }
        if !(self.f >= 0.0 && self.f.is_finite()) {
            return Err(field("f", "must be a finite number >= 0"));
        }
        let [a, b] = self.f_range;
        if !(a > 0.0 && b > 0.0 && a > b && a.is_finite()) {
            return Err(field("f_range", "needs start > end > 0"));
        }
        if self.steps == 0 {
            return Err(field("steps", "must be at least 1"));
        }
        let [rl, rh, il, ih] = self.window;
        if !(rl < rh && il < ih && self.window.iter().all(|x| x.is_finite())) {
            return Err(field("window", "needs re_lo < re_hi and im_lo < im_hi"));
        }
        if self.grid[0] == 0 || self.grid[1] == 0 {
            return Err(field("grid", "both dimensions must be positive"));
        }
        if self.samples_per_side < 4 {
            return Err(field("samples_per_side", "must be at least 4"));
        }
        if self.mu_grid.is_empty() || self.mu_grid.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
            return Err(field("mu_grid", "needs at least one entry, all finite and > 0"));
        }
        if self.validate_f.len() < 2 || self.validate_f.iter().any(|f| !(*f > 0.0)) {
            return Err(field("validate_f", "needs at least two positive field strengths"));
        }
        if let Some(p) = &self.profile {
            p.build().map_err(|e| field("profile", &e.to_string()))?;
        }
        Ok(())
    }

    pub fn budget(&self) -> EvalBudget {
        EvalBudget { rel_tol: self.tol, ..EvalBudget::default() }
    }

    pub fn newton(&self) -> NewtonOptions {
        NewtonOptions { tol: self.newton_tol, cert_residual: self.cert_residual, ..NewtonOptions::default() }
    }

    pub fn profile_config(&self) -> ProfileConfig {
        match (&self.profile, self.model) {
            (Some(p), _) => p.clone(),
            (None, ModelChoice::Model1) => ProfileConfig::Gaussian { mu: self.mu },
            (None, ModelChoice::Model2) => ProfileConfig::Model2 { epsilon: self.epsilon, base: None },
        }
    }

    pub fn build_model(&self) -> Result<Model, ConfigError> {
        let p = self.profile_config().build().map_err(|e| field("profile", &e.to_string()))?;
        Ok(match self.model {
            ModelChoice::Model1 => Model::I(p),
            ModelChoice::Model2 => Model::II(p),
        })
    }

    pub fn rect(&self) -> Rect {
        let [rl, rh, il, ih] = self.window;
        Rect::new(C::new(rl, il), C::new(rh, ih))
    }

    pub fn seed(&self) -> Option<C> {
        self.seeds.first().map(|s| C::new(s[0], s[1]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut c = RunConfig::default();
        c.model = ModelChoice::Model2;
        c.seeds = vec![[1.0, -0.01]];
        c.profile = Some(ProfileConfig::PolyGaussian { coeffs: vec![1.0, 0.0, 0.5] });
        assert_eq!(RunConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn unknown_field_is_named() {
        let e = RunConfig::from_json("{\n  \"mu\": 0.1,\n  \"tolerance\": 1e-9\n}").unwrap_err();
        assert!(e.0.contains("tolerance") && e.0.contains("line 3"), "{e}");
    }

    #[test]
    fn bad_tolerance_is_rejected() {
        let c = RunConfig { tol: 0.0, ..RunConfig::default() };
        assert!(c.validate().unwrap_err().0.contains("`tol`"));
    }
}
