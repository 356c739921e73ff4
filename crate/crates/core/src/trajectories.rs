//! Continuation of resonances in the field strength, instability diagnostics and coupling sweeps.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::ScaledComplex;
use crate::profiles::make_gaussian;
use crate::resolvent::{EvalBudget, F_model1, Model};
use crate::rootfind::{newton, NewtonOptions};

type C = Complex64;
type S = ScaledComplex<f64>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub f: f64,
    pub re: f64,
    pub im: f64,
    pub residual: f64,
    pub im_over_f: f64,
    pub newton_iters: usize,
}

impl TrajectoryPoint {
    pub fn r(&self) -> C {
        C::new(self.re, self.im)
    }
}

/// What a trajectory follows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceMode {
    /// One analytic branch: small steps, corrections far from the prediction are rejected.
    Branch,
    /// Zeros near the seed's real part: the predictor keeps the seed's `Re r` and extrapolates `Im r`; the corrector may land on a neighbouring zero.
    Ray,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceOptions {
    pub mode: TraceMode,
    pub newton: NewtonOptions,
    pub min_step: f64,
    pub max_step: f64,
    /// In branch mode, a corrected root farther than `jump_fraction * pi * f` from the prediction counts as a failed step.
    pub jump_fraction: f64,
    /// Newton iterations at or below which a step counts as easy.
    pub easy_iters: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            mode: TraceMode::Ray,
            newton: NewtonOptions::default(),
            min_step: 1e-5,
            max_step: 0.01,
            jump_fraction: 0.25,
            easy_iters: 4,
        }
    }
}

fn point(f: f64, rec: &crate::rootfind::ResonanceRecord) -> TrajectoryPoint {
    TrajectoryPoint {
        f,
        re: rec.re,
        im: rec.im,
        residual: rec.residual,
        im_over_f: rec.im.abs() / f,
        newton_iters: rec.newton_iters,
    }
}

/// Follows a zero of `fh(z, f)` from `f_start` down to `f_end`; returns the points found and the error that stopped the run, if any.
pub fn trace_partial<F>(
    fh: F,
    f_start: f64,
    f_end: f64,
    steps: usize,
    seed: C,
    opts: &TraceOptions,
) -> (Vec<TrajectoryPoint>, Option<Error>)
where
    F: Fn(C, f64) -> Result<S>,
{
    if !(f_start > f_end && f_end > 0.0) {
        return (
            Vec::new(),
            Some(Error::Domain("trace needs f_start > f_end > 0".into())),
        );
    }
    let first = match newton(|z| fh(z, f_start), seed, &opts.newton) {
        Ok(r) if r.residual <= opts.newton.cert_residual => r,
        Ok(r) => {
            let e = Error::NoConvergence {
                iters: r.newton_iters,
                last: r.z(),
                residual: r.residual,
            };
            return (Vec::new(), Some(e));
        }
        Err(e) => return (Vec::new(), Some(e)),
    };
    let mut pts = vec![point(f_start, &first)];
    let mut h = ((f_start - f_end) / steps.max(1) as f64).clamp(opts.min_step, opts.max_step);
    let mut easy = 0;
    let mut f = f_start;
    while f > f_end {
        let fn_ = (f - h).max(f_end);
        let last = pts[pts.len() - 1].r();
        let mut pred = if pts.len() >= 2 {
            let prev = &pts[pts.len() - 2];
            last + (last - prev.r()) * ((fn_ - f) / (f - prev.f))
        } else {
            last
        };
        if opts.mode == TraceMode::Ray {
            pred.re = pts[0].re;
        }
        let accepted = match newton(|z| fh(z, fn_), pred, &opts.newton) {
            Ok(r)
                if r.residual <= opts.newton.cert_residual
                    && (opts.mode == TraceMode::Ray
                        || (r.z() - pred).norm()
                            <= opts.jump_fraction * std::f64::consts::PI * fn_) =>
            {
                Some(r)
            }
            _ => None,
        };
        match accepted {
            Some(r) => {
                easy = if r.newton_iters <= opts.easy_iters {
                    easy + 1
                } else {
                    0
                };
                pts.push(point(fn_, &r));
                f = fn_;
                if easy >= 3 {
                    h = (2.0 * h).min(opts.max_step);
                    easy = 0;
                }
            }
            None => {
                easy = 0;
                if fn_ - f_end > 0.0 && h * 0.5 < opts.min_step || h <= opts.min_step {
                    return (pts, Some(Error::BranchLost { f, last }));
                }
                h *= 0.5;
            }
        }
    }
    (pts, None)
}

/// As [`trace_partial`], failing with `BranchLost` if the branch is not followed to `f_end`.
pub fn trace<F>(
    fh: F,
    f_start: f64,
    f_end: f64,
    steps: usize,
    seed: C,
    opts: &TraceOptions,
) -> Result<Vec<TrajectoryPoint>>
where
    F: Fn(C, f64) -> Result<S>,
{
    match trace_partial(fh, f_start, f_end, steps, seed, opts) {
        (pts, None) => Ok(pts),
        (_, Some(e)) => Err(e),
    }
}

pub fn trace_model(
    model: &Model,
    budget: &EvalBudget,
    f_start: f64,
    f_end: f64,
    steps: usize,
    seed: C,
    opts: &TraceOptions,
) -> (Vec<TrajectoryPoint>, Option<Error>) {
    trace_partial(
        |z, f| model.eval(z, f, budget),
        f_start,
        f_end,
        steps,
        seed,
        opts,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Unstable,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstabilityReport {
    pub c0_hat: f64,
    pub min_dist_to_r0: f64,
    pub verdict: Verdict,
    /// Largest and smallest `f` of the trajectory.
    pub f_range: (f64, f64),
    /// Kendall tau of `im_over_f` against step order (decreasing `f`).
    pub kendall_tau: f64,
    /// Normal score of `kendall_tau`.
    pub trend_score: f64,
    pub upward_trend: bool,
    /// Distance to `r0` is taken over points with `f` at most this.
    pub dist_f_max: f64,
}

/// Kendall tau-b of `ys` against their index.
pub fn kendall_tau(ys: &[f64]) -> f64 {
    let n = ys.len();
    let (mut conc, mut disc, mut ties) = (0i64, 0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let d = ys[j] - ys[i];
            if d > 0.0 {
                conc += 1;
            } else if d < 0.0 {
                disc += 1;
            } else {
                ties += 1;
            }
        }
    }
    let pairs = (conc + disc + ties) as f64;
    let untied = (conc + disc) as f64;
    if untied == 0.0 {
        return 0.0;
    }
    (conc - disc) as f64 / (pairs * untied).sqrt()
}

const Z95: f64 = 1.6448536269514722;

/// Diagnostics with the distance to `r0` measured for `f <= 0.1 |Im r0|`, or at the last point if none qualifies.
pub fn instability_report(traj: &[TrajectoryPoint], r0: C) -> InstabilityReport {
    instability_report_with(traj, r0, 0.1 * r0.im.abs())
}

pub fn instability_report_with(
    traj: &[TrajectoryPoint],
    r0: C,
    dist_f_max: f64,
) -> InstabilityReport {
    let ratios: Vec<f64> = traj.iter().map(|p| p.im_over_f).collect();
    let c0_hat = ratios.iter().cloned().fold(0.0, f64::max);
    let n = traj.len() as f64;
    let tau = kendall_tau(&ratios);
    let score = if traj.len() >= 3 {
        3.0 * tau * (n * (n - 1.0)).sqrt() / (2.0 * (2.0 * n + 5.0)).sqrt()
    } else {
        0.0
    };
    let upward = tau > 0.0 && score > Z95;
    let mut dists: Vec<f64> = traj
        .iter()
        .filter(|p| p.f <= dist_f_max)
        .map(|p| (p.r() - r0).norm())
        .collect();
    if dists.is_empty() {
        if let Some(p) = traj.iter().min_by(|a, b| a.f.total_cmp(&b.f)) {
            dists.push((p.r() - r0).norm());
        }
    }
    let min_dist = dists.into_iter().fold(f64::INFINITY, f64::min);
    let f_hi = traj.iter().map(|p| p.f).fold(f64::NEG_INFINITY, f64::max);
    let f_lo = traj.iter().map(|p| p.f).fold(f64::INFINITY, f64::min);
    let ok = !traj.is_empty() && c0_hat.is_finite() && !upward && min_dist >= 0.5 * r0.im.abs();
    InstabilityReport {
        c0_hat,
        min_dist_to_r0: min_dist,
        verdict: if ok {
            Verdict::Unstable
        } else {
            Verdict::Inconclusive
        },
        f_range: (f_hi, f_lo),
        kendall_tau: tau,
        trend_score: score,
        upward_trend: upward,
        dist_f_max,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MuSweepPoint {
    pub mu: f64,
    pub re: f64,
    pub im: f64,
    pub residual: f64,
}

impl MuSweepPoint {
    pub fn r0(&self) -> C {
        C::new(self.re, self.im)
    }
}

/// Field-free resonance of the Gaussian model along `mu_grid`, each Newton run seeded by the previous root.
pub fn mu_sweep(mu_grid: &[f64], opts: &NewtonOptions) -> Result<Vec<MuSweepPoint>> {
    let mut mus = mu_grid.to_vec();
    if mus.iter().any(|m| !(*m > 0.0)) {
        return Err(Error::Domain("mu values must be positive".into()));
    }
    mus.sort_by(f64::total_cmp);
    let budget = EvalBudget::default();
    let mut seed = C::new(1.0, -0.001);
    let mut out = Vec::with_capacity(mus.len());
    for mu in mus {
        let p = make_gaussian(mu)?;
        let rec = newton(|z| F_model1(z, 0.0, &p, &budget), seed, opts)?;
        seed = rec.z();
        out.push(MuSweepPoint {
            mu,
            re: rec.re,
            im: rec.im,
            residual: rec.residual,
        });
    }
    Ok(out)
}

pub const TRAJECTORY_HEADER: &str =
    "f_field_strength,re_r_energy,im_r_energy,residual_abs_F,im_over_f";
pub const MU_SWEEP_HEADER: &str = "mu_coupling,re_r0_energy,im_r0_energy";

/// 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn trajectory_csv(points: &[TrajectoryPoint]) -> String {
    let mut s = String::from(TRAJECTORY_HEADER);
    s.push('\n');
    for p in points {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            fmt17(p.f),
            fmt17(p.re),
            fmt17(p.im),
            fmt17(p.residual),
            fmt17(p.im_over_f)
        );
    }
    s
}

pub fn mu_sweep_csv(points: &[MuSweepPoint]) -> String {
    let mut s = String::from(MU_SWEEP_HEADER);
    s.push('\n');
    for p in points {
        let _ = writeln!(s, "{},{},{}", fmt17(p.mu), fmt17(p.re), fmt17(p.im));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(rs: impl Fn(f64) -> C, fs: &[f64]) -> Vec<TrajectoryPoint> {
        fs.iter()
            .map(|&f| {
                let r = rs(f);
                TrajectoryPoint {
                    f,
                    re: r.re,
                    im: r.im,
                    residual: 0.0,
                    im_over_f: r.im.abs() / f,
                    newton_iters: 1,
                }
            })
            .collect()
    }

    #[test]
    fn linear_family_is_followed_exactly() {
        let eps = 0.7;
        let pts = trace(
            |z, f| Ok(S::from_complex(1.0 - z - eps * f)),
            0.02,
            0.002,
            10,
            C::new(0.98, 0.0),
            &TraceOptions::default(),
        )
        .unwrap();
        assert!((pts.last().unwrap().f - 0.002).abs() < 1e-15);
        for p in &pts {
            assert!((p.r() - (1.0 - eps * p.f)).norm() < 1e-12);
        }
        assert!(pts.windows(2).all(|w| w[1].f < w[0].f));
    }

    #[test]
    fn synthetic_unstable() {
        let fs: Vec<f64> = (1..=40).rev().map(|k| k as f64 * 5e-4).collect();
        let traj = synthetic(|f| C::new(1.0, -0.5 * f), &fs);
        let rep = instability_report(&traj, C::new(1.0, -0.01));
        assert!((rep.c0_hat - 0.5).abs() < 1e-12);
        assert!(rep.min_dist_to_r0 >= 0.005);
        assert_eq!(rep.verdict, Verdict::Unstable);
    }

    #[test]
    fn synthetic_convergent_is_inconclusive() {
        let r0 = C::new(1.0, -0.01);
        let fs: Vec<f64> = (1..=40).rev().map(|k| k as f64 * 5e-4).collect();
        let traj = synthetic(|f| r0 + C::new(1.0, -1.0) * f, &fs);
        let rep = instability_report(&traj, r0);
        assert!(rep.upward_trend || rep.min_dist_to_r0 < 0.005);
        assert_eq!(rep.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn kendall_extremes() {
        assert!((kendall_tau(&[1.0, 2.0, 3.0, 4.0]) - 1.0).abs() < 1e-15);
        assert!((kendall_tau(&[4.0, 3.0, 2.0, 1.0]) + 1.0).abs() < 1e-15);
        assert_eq!(kendall_tau(&[1.0, 1.0, 1.0]), 0.0);
    }

    #[test]
    fn csv_layout() {
        let p = TrajectoryPoint {
            f: 0.01,
            re: 1.0,
            im: -0.001,
            residual: 1e-12,
            im_over_f: 0.1,
            newton_iters: 3,
        };
        let s = trajectory_csv(&[p]);
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some(TRAJECTORY_HEADER));
        assert_eq!(lines.next().unwrap().split(',').count(), 5);
        assert_eq!(fmt17(0.1), "1.0000000000000001e-1");
    }
}
