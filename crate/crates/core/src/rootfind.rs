//! Zeros of the continued resonance functions: damped Newton, argument-principle counts and window scans.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::ScaledComplex;
use crate::profiles::Profile;
use crate::resolvent::{psi_f, resolvent_f0_continued, EvalBudget, F_model1};

type C = Complex64;
type S = ScaledComplex<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Model1,
    Model2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootKind {
    Resonance,
    EigenvalueCandidate,
    /// Upper half-plane; never a zero of a continued function.
    Unexpected,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonanceRecord {
    pub re: f64,
    pub im: f64,
    /// `|F(z)|` at the returned root.
    pub residual: f64,
    /// `ln |F(z)|`.
    pub log_residual: f64,
    pub newton_iters: usize,
    pub f: Option<f64>,
    pub model: Option<ModelKind>,
    pub count_certified: bool,
    pub kind: RootKind,
}

impl ResonanceRecord {
    pub fn z(&self) -> C {
        C::new(self.re, self.im)
    }

    pub fn with_context(mut self, f: f64, model: ModelKind) -> Self {
        self.f = Some(f);
        self.model = Some(model);
        self
    }
}

fn classify(z: C) -> RootKind {
    if z.im < 0.0 {
        RootKind::Resonance
    } else if z.im == 0.0 {
        RootKind::EigenvalueCandidate
    } else {
        RootKind::Unexpected
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    /// Stop once the step is below `tol * max(1, |z|)`.
    pub tol: f64,
    pub max_iter: usize,
    /// Largest `|F|` accepted for a certified root.
    pub cert_residual: f64,
    pub max_halvings: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-11,
            max_iter: 50,
            cert_residual: 1e-7,
            max_halvings: 12,
        }
    }
}

fn diff_step(z: C) -> f64 {
    1e-7f64.max(1e-7 * z.norm())
}

/// Central difference `(F(z+h) - F(z-h)) / 2h`, falling back to the imaginary direction.
pub fn central_derivative<F>(fh: &F, z: C) -> Result<S>
where
    F: Fn(C) -> Result<S>,
{
    let h = diff_step(z);
    match (fh(z + h), fh(z - h)) {
        (Ok(a), Ok(b)) => Ok((a - b).scale(C::new(0.5 / h, 0.0))),
        _ => {
            let ih = C::new(0.0, h);
            let a = fh(z + ih)?;
            let b = fh(z - ih)?;
            Ok((a - b).scale(C::new(0.0, -0.5 / h)))
        }
    }
}

/// Damped Newton iteration with central-difference derivatives.
pub fn newton<F>(fh: F, z0: C, opts: &NewtonOptions) -> Result<ResonanceRecord>
where
    F: Fn(C) -> Result<S>,
{
    let mut z = z0;
    let mut fz = fh(z)?;
    let no_conv = |iters: usize, z: C, fz: &S| Error::NoConvergence {
        iters,
        last: z,
        residual: fz.abs(),
    };
    for it in 1..=opts.max_iter {
        if fz.is_zero() {
            return Ok(finish(&fh, z, fz, it - 1, opts));
        }
        let d = central_derivative(&fh, z).map_err(|_| no_conv(it, z, &fz))?;
        let step = (fz / d).to_complex();
        if !step.re.is_finite() || !step.im.is_finite() {
            return Err(no_conv(it, z, &fz));
        }
        let scale = z.norm().max(1.0);
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let zn = z - step * lambda;
            if let Ok(v) = fh(zn) {
                if v.ln_abs() < fz.ln_abs() || (step * lambda).norm() <= opts.tol * scale {
                    accepted = Some((zn, v));
                    break;
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((zn, v)) => {
                let moved = (zn - z).norm();
                z = zn;
                fz = v;
                if moved <= opts.tol * scale {
                    return Ok(finish(&fh, z, fz, it, opts));
                }
            }
            None => {
                if step.norm() <= 1e3 * opts.tol * scale {
                    return Ok(finish(&fh, z, fz, it, opts));
                }
                return Err(no_conv(it, z, &fz));
            }
        }
    }
    Err(no_conv(opts.max_iter, z, &fz))
}

/// A converged root within the step tolerance of the real axis is moved onto it when that does not worsen `|F|`.
fn finish<F>(fh: &F, z: C, fz: S, iters: usize, opts: &NewtonOptions) -> ResonanceRecord
where
    F: Fn(C) -> Result<S>,
{
    if z.im != 0.0 && z.im.abs() <= opts.tol * z.norm().max(1.0) {
        let zr = C::new(z.re, 0.0);
        if let Ok(v) = fh(zr) {
            if v.is_zero() || (!fz.is_zero() && v.ln_abs() <= fz.ln_abs() + std::f64::consts::LN_2) {
                return record(zr, &v, iters);
            }
        }
    }
    record(z, &fz, iters)
}

fn record(z: C, fz: &S, iters: usize) -> ResonanceRecord {
    ResonanceRecord {
        re: z.re,
        im: z.im,
        residual: fz.abs(),
        log_residual: fz.ln_abs(),
        newton_iters: iters,
        f: None,
        model: None,
        count_certified: false,
        kind: classify(z),
    }
}

/// Rectangle given by two opposite corners.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub lo: C,
    pub hi: C,
}

impl Rect {
    pub fn new(a: C, b: C) -> Self {
        Self {
            lo: C::new(a.re.min(b.re), a.im.min(b.im)),
            hi: C::new(a.re.max(b.re), a.im.max(b.im)),
        }
    }

    pub fn centered(c: C, half_width: f64) -> Self {
        let d = C::new(half_width, half_width);
        Self::new(c - d, c + d)
    }

    pub fn contains(&self, z: C) -> bool {
        z.re > self.lo.re && z.re < self.hi.re && z.im > self.lo.im && z.im < self.hi.im
    }

    pub fn width(&self) -> f64 {
        self.hi.re - self.lo.re
    }

    pub fn height(&self) -> f64 {
        self.hi.im - self.lo.im
    }

    pub fn center(&self) -> C {
        (self.lo + self.hi) * 0.5
    }

    /// Corners in counterclockwise order starting at the lower left.
    pub fn corners(&self) -> [C; 4] {
        [
            self.lo,
            C::new(self.hi.re, self.lo.im),
            self.hi,
            C::new(self.lo.re, self.hi.im),
        ]
    }

    /// Split along the longer side.
    pub fn bisect(&self) -> (Rect, Rect) {
        if self.width() >= self.height() {
            let m = 0.5 * (self.lo.re + self.hi.re);
            (
                Rect::new(self.lo, C::new(m, self.hi.im)),
                Rect::new(C::new(m, self.lo.im), self.hi),
            )
        } else {
            let m = 0.5 * (self.lo.im + self.hi.im);
            (
                Rect::new(self.lo, C::new(self.hi.re, m)),
                Rect::new(C::new(self.lo.re, m), self.hi),
            )
        }
    }

    fn perturbed(&self, attempt: usize) -> Rect {
        let grow = 0.013 * attempt as f64;
        let d = C::new(self.width() * grow, self.height() * grow * 0.7);
        Rect::new(self.lo - d, self.hi + d)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindingReport {
    pub rectangle: Rect,
    pub count: i64,
    /// Unrounded winding number.
    pub raw: f64,
    pub boundary_min_abs_f: f64,
    pub boundary_min_ln_abs: f64,
    pub evaluations: usize,
    pub perturbations: usize,
}

fn wrap(a: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let mut d = a % tau;
    if d > std::f64::consts::PI {
        d -= tau;
    } else if d <= -std::f64::consts::PI {
        d += tau;
    }
    d
}

const MAX_BISECT: usize = 30;

struct SideResult {
    darg: f64,
    min_ln: f64,
    max_ln: f64,
    evals: usize,
}

fn trace_side<F>(fh: &F, a: C, b: C, samples: usize) -> Result<SideResult>
where
    F: Fn(C) -> Result<S> + Sync,
{
    let pts: Vec<C> = (0..=samples)
        .map(|j| a + (b - a) * (j as f64 / samples as f64))
        .collect();
    let vals: Result<Vec<S>> = pts.par_iter().map(|&z| fh(z)).collect();
    let vals = vals?;
    let mut out = SideResult {
        darg: 0.0,
        min_ln: f64::INFINITY,
        max_ln: f64::NEG_INFINITY,
        evals: vals.len(),
    };
    for v in &vals {
        out.min_ln = out.min_ln.min(v.ln_abs());
        out.max_ln = out.max_ln.max(v.ln_abs());
    }
    for j in 0..samples {
        let mut stack = vec![(pts[j], vals[j], pts[j + 1], vals[j + 1], 0usize)];
        // depth-first, left half first, so the sum order is fixed
        while let Some((za, fa, zb, fb, depth)) = stack.pop() {
            let d = wrap(fb.arg() - fa.arg());
            if d.abs() < std::f64::consts::FRAC_PI_2 {
                out.darg += d;
                continue;
            }
            if depth >= MAX_BISECT {
                return Err(Error::BoundaryZero { attempts: 0 });
            }
            let zm = (za + zb) * 0.5;
            let fm = fh(zm)?;
            out.evals += 1;
            out.min_ln = out.min_ln.min(fm.ln_abs());
            out.max_ln = out.max_ln.max(fm.ln_abs());
            stack.push((zm, fm, zb, fb, depth + 1));
            stack.push((za, fa, zm, fm, depth + 1));
        }
    }
    Ok(out)
}

fn winding_once<F>(fh: &F, rect: &Rect, samples: usize) -> Result<WindingReport>
where
    F: Fn(C) -> Result<S> + Sync,
{
    let c = rect.corners();
    let sides: Vec<(C, C)> = (0..4).map(|i| (c[i], c[(i + 1) % 4])).collect();
    let parts: Result<Vec<SideResult>> = sides
        .par_iter()
        .map(|&(a, b)| trace_side(fh, a, b, samples))
        .collect();
    let parts = parts?;
    let total: f64 = parts.iter().map(|p| p.darg).sum();
    let min_ln = parts.iter().map(|p| p.min_ln).fold(f64::INFINITY, f64::min);
    let max_ln = parts
        .iter()
        .map(|p| p.max_ln)
        .fold(f64::NEG_INFINITY, f64::max);
    if !(min_ln > f64::NEG_INFINITY) || min_ln < max_ln + (1e-10f64).ln() {
        return Err(Error::BoundaryZero { attempts: 0 });
    }
    let raw = total / std::f64::consts::TAU;
    Ok(WindingReport {
        rectangle: *rect,
        count: raw.round() as i64,
        raw,
        boundary_min_abs_f: min_ln.exp(),
        boundary_min_ln_abs: min_ln,
        evaluations: parts.iter().map(|p| p.evals).sum(),
        perturbations: 0,
    })
}

/// Number of zeros of `fh` inside `rect`, counted with multiplicity by the argument principle.
pub fn winding_count<F>(fh: F, rect: Rect, samples_per_side: usize) -> Result<WindingReport>
where
    F: Fn(C) -> Result<S> + Sync,
{
    let samples = samples_per_side.max(4);
    for attempt in 0..=3 {
        let r = if attempt == 0 {
            rect
        } else {
            rect.perturbed(attempt)
        };
        let mut n = samples;
        let mut last = f64::NAN;
        let mut boundary_zero = false;
        for _ in 0..4 {
            match winding_once(&fh, &r, n) {
                Ok(mut rep) => {
                    if (rep.raw - rep.raw.round()).abs() <= 0.05 {
                        rep.perturbations = attempt;
                        return Ok(rep);
                    }
                    last = rep.raw;
                    n *= 2;
                }
                Err(Error::BoundaryZero { .. }) => {
                    boundary_zero = true;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if !boundary_zero {
            return Err(Error::NonIntegerWinding { value: last });
        }
    }
    Err(Error::BoundaryZero { attempts: 3 })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub newton: NewtonOptions,
    pub dedup_radius: f64,
    pub samples_per_side: usize,
    /// Certify each root with a small winding-number square.
    pub certify: bool,
    /// Grid doublings tried when the Newton count falls short of the winding count.
    pub max_regrids: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            newton: NewtonOptions::default(),
            dedup_radius: 1e-6,
            samples_per_side: 32,
            certify: true,
            max_regrids: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub records: Vec<ResonanceRecord>,
    pub winding: WindingReport,
    pub starts: usize,
    /// Set when the Newton count and the winding count disagree.
    pub diagnostic: Option<String>,
}

impl ScanReport {
    pub fn consistent(&self) -> bool {
        self.diagnostic.is_none()
    }
}

fn grid_nodes(rect: &Rect, nx: usize, ny: usize) -> Vec<C> {
    let mut v = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let x = rect.lo.re + rect.width() * (i as f64 + 0.5) / nx as f64;
            let y = rect.lo.im + rect.height() * (j as f64 + 0.5) / ny as f64;
            v.push(C::new(x, y));
        }
    }
    v
}

fn dedup(mut recs: Vec<ResonanceRecord>, radius: f64) -> Vec<ResonanceRecord> {
    recs.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut out: Vec<ResonanceRecord> = Vec::new();
    for r in recs {
        if let Some(q) = out.iter_mut().find(|q| (q.z() - r.z()).norm() <= radius) {
            if r.residual < q.residual {
                *q = r;
            }
        } else {
            out.push(r);
        }
    }
    out
}

/// Newton from every node of an `nx x ny` grid, deduplicated and cross-checked against the winding count.
pub fn scan_window<F>(
    fh: F,
    rect: Rect,
    grid: (usize, usize),
    opts: &ScanOptions,
) -> Result<ScanReport>
where
    F: Fn(C) -> Result<S> + Sync,
{
    let winding = winding_count(&fh, rect, opts.samples_per_side)?;
    let (mut nx, mut ny) = (grid.0.max(1), grid.1.max(1));
    let mut found: Vec<ResonanceRecord> = Vec::new();
    let mut starts = 0;
    for round in 0..=opts.max_regrids {
        let nodes = grid_nodes(&rect, nx, ny);
        starts += nodes.len();
        let runs: Vec<Option<ResonanceRecord>> = nodes
            .par_iter()
            .map(|&z0| newton(&fh, z0, &opts.newton).ok())
            .collect();
        found.extend(
            runs.into_iter()
                .flatten()
                .filter(|r| rect.contains(r.z()) && r.residual <= opts.newton.cert_residual),
        );
        found = dedup(found, opts.dedup_radius);
        if found.len() as i64 >= winding.count || round == opts.max_regrids {
            break;
        }
        nx *= 2;
        ny *= 2;
    }
    if opts.certify {
        let zs: Vec<C> = found.iter().map(|r| r.z()).collect();
        let flags: Vec<bool> = zs
            .par_iter()
            .map(|&z| {
                let gap = zs
                    .iter()
                    .filter(|&&w| w != z)
                    .map(|&w| (w - z).norm())
                    .fold(f64::INFINITY, f64::min);
                let half = (0.25 * gap)
                    .min(0.25 * rect.width().min(rect.height()))
                    .max(1e-9);
                matches!(winding_count(&fh, Rect::centered(z, half), 8), Ok(w) if w.count == 1)
            })
            .collect();
        for (r, ok) in found.iter_mut().zip(flags) {
            r.count_certified = ok && r.residual <= opts.newton.cert_residual;
        }
    }
    let diagnostic = if found.len() as i64 != winding.count {
        Some(format!(
            "Newton found {} distinct zeros, winding count is {}",
            found.len(),
            winding.count
        ))
    } else {
        None
    };
    Ok(ScanReport {
        records: found,
        winding,
        starts,
        diagnostic,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueReport {
    pub lambda: f64,
    /// `|F_model1(lambda)|`.
    pub f_residual: f64,
    /// `|psi_f(lambda / f)|`.
    pub psi_residual: f64,
    pub log_f_residual: f64,
    pub log_psi_residual: f64,
    pub candidate: bool,
}

/// Residuals of the two necessary conditions for a real eigenvalue `lambda` at field `f`.
pub fn eigenvalue_check(
    lambda: f64,
    f: f64,
    p: &Profile,
    budget: &EvalBudget,
) -> Result<EigenvalueReport> {
    let z = C::new(lambda, 0.0);
    let fv = F_model1(z, f, p, budget)?;
    let pv = psi_f(C::new(lambda / f, 0.0), f, p, budget)?;
    let small = 1e-6;
    Ok(EigenvalueReport {
        lambda,
        f_residual: fv.abs(),
        psi_residual: pv.abs(),
        log_f_residual: fv.ln_abs(),
        log_psi_residual: pv.ln_abs(),
        candidate: fv.abs() < small && pv.abs() < small,
    })
}

/// `max |(phi, (p^2 - z)^{-1} phi)| / |1 - z|` over the boundary of `rect`; below 1 certifies one zero of `F_model1` at `f = 0` inside.
pub fn rouche_ratio(p: &Profile, rect: Rect, samples_per_side: usize, tol: f64) -> Result<f64> {
    let c = rect.corners();
    let n = samples_per_side.max(2);
    let pts: Vec<C> = (0..4)
        .flat_map(|i| (0..n).map(move |j| c[i] + (c[(i + 1) % 4] - c[i]) * (j as f64 / n as f64)))
        .collect();
    let ratios: Result<Vec<f64>> = pts
        .par_iter()
        .map(|&z| Ok(resolvent_f0_continued(z, p, tol)?.norm() / (C::new(1.0, 0.0) - z).norm()))
        .collect();
    Ok(ratios?.into_iter().fold(0.0, f64::max))
}
