use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64 as C;
use serde::Serialize;
use serde_json::json;
use starkres::profiles::{default_model2_base, ProfileKind};
use starkres::resolvent::{
    model2_r0_expansion, resolvent, resolvent_expansion24, resolvent_leading26, EvalBudget, Method, Model,
};
use starkres::rootfind::{newton, scan_window, winding_count, Rect, ResonanceRecord, ScanOptions};
use starkres::trajectories::{
    fmt17, instability_report, mu_sweep, mu_sweep_csv, trace_model, trajectory_csv, TraceOptions,
};

use crate::config::{ConfigError, ModelChoice, RunConfig};
use crate::svg::{plot, Series, Style};

pub const ROOTS_HEADER: &str = "re_r_energy,im_r_energy,residual_abs_F,count_certified";
pub const ORDER_HEADER: &str = "f_field_strength,abs_err_expansion24,abs_err_leading26";

/// Slope tolerance of the order-law fits.
const SLOPE_TOL: f64 = 0.25;

pub enum Failure {
    Config(String),
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Numerical(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

impl From<starkres::Error> for Failure {
    fn from(e: starkres::Error) -> Self {
        match e {
            starkres::Error::Config(m) => Failure::Config(m),
            other => Failure::Numerical(other.to_string()),
        }
    }
}

fn io(path: &Path, e: std::io::Error) -> Failure {
    Failure::Config(format!("cannot write {}: {e}", path.display()))
}

/// Creates the output directory and stores the effective configuration next to the artifacts.
fn prepare_out(cfg: &RunConfig) -> Result<(), Failure> {
    fs::create_dir_all(&cfg.out).map_err(|e| io(&cfg.out, e))?;
    write(cfg, "config.json", &cfg.to_json())
}

fn write(cfg: &RunConfig, name: &str, body: &str) -> Result<(), Failure> {
    let p = cfg.out.join(name);
    fs::write(&p, body).map_err(|e| io(&p, e))
}

fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn default_seed(cfg: &RunConfig, model: &Model) -> Result<C, Failure> {
    if let Some(s) = cfg.seed() {
        return Ok(s);
    }
    Ok(match cfg.model {
        ModelChoice::Model1 => C::new(1.0, -0.01),
        ModelChoice::Model2 => {
            let base = model.profile().base.clone().unwrap_or_else(|| Arc::new(default_model2_base()));
            let eps = match model.profile().kind {
                ProfileKind::ModelII { epsilon, .. } => epsilon,
                _ => cfg.epsilon,
            };
            model2_r0_expansion(eps, &base, 1e-12)?
        }
    })
}

/// Winding count 1 on a small square around `z`; the square stays well inside the zero spacing at field `f`.
fn certify(model: &Model, z: C, f: f64, budget: &EvalBudget, samples: usize) -> bool {
    let mut half: f64 = 0.01;
    if f > 0.0 {
        half = half.min(0.2 * std::f64::consts::PI * f);
    }
    if z.im < 0.0 {
        half = half.min(0.5 * z.im.abs()).max(1e-6);
    }
    matches!(
        winding_count(|w| model.eval(w, f, budget), Rect::centered(z, half), samples),
        Ok(w) if w.count == 1
    )
}

/// Returns the JSON record printed on stdout.
pub fn resonance(cfg: &RunConfig) -> Result<String, Failure> {
    let model = cfg.build_model()?;
    let budget = cfg.budget();
    let seed = default_seed(cfg, &model)?;
    let mut rec = newton(|z| model.eval(z, cfg.f, &budget), seed, &cfg.newton())?.with_context(cfg.f, cfg.model.kind());
    rec.count_certified =
        rec.residual <= cfg.cert_residual && certify(&model, rec.z(), cfg.f, &budget, cfg.samples_per_side);
    let body = pretty(&rec);
    if !rec.count_certified {
        return Err(Failure::Numerical(format!("root at {} failed certification\n{body}", rec.z())));
    }
    Ok(body)
}

pub fn sweep_mu(cfg: &RunConfig) -> Result<String, Failure> {
    let pts = mu_sweep(&cfg.mu_grid, &cfg.newton())?;
    prepare_out(cfg)?;
    write(cfg, "mu_sweep.csv", &mu_sweep_csv(&pts))?;
    let small: Vec<_> = pts.iter().filter(|p| p.mu <= 0.2 && (p.r0() - 1.0).norm() > 0.0).collect();
    let exponent = if small.len() >= 2 {
        let xs: Vec<f64> = small.iter().map(|p| p.mu).collect();
        let ys: Vec<f64> = small.iter().map(|p| (p.r0() - 1.0).norm()).collect();
        Some(log_slope(&xs, &ys))
    } else {
        None
    };
    let summary = json!({
        "command": "sweep-mu",
        "count": pts.len(),
        "mu_range": [pts.first().map(|p| p.mu), pts.last().map(|p| p.mu)],
        "all_below_axis": pts.iter().all(|p| p.im < 0.0),
        "fit_exponent_abs_r0_minus_1_vs_mu": exponent,
        "max_residual": pts.iter().map(|p| p.residual).fold(0.0, f64::max),
    });
    if cfg.svg {
        let re = pts.iter().map(|p| (p.mu, p.re)).collect();
        let im = pts.iter().map(|p| (p.mu, p.im)).collect();
        write(cfg, "mu_sweep_re.svg", &plot("Real part of r0", "mu", "Re r0", &[Series::new("Re r0", re, Style::Line)]))?;
        write(cfg, "mu_sweep_im.svg", &plot("Imaginary part of r0", "mu", "Im r0", &[Series::new("Im r0", im, Style::Line)]))?;
    }
    let s = pretty(&summary);
    write(cfg, "summary.json", &s)?;
    Ok(s)
}

pub fn roots_csv(records: &[ResonanceRecord]) -> String {
    let mut s = String::from(ROOTS_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(s, "{},{},{},{}", fmt17(r.re), fmt17(r.im), fmt17(r.residual), r.count_certified);
    }
    s
}

pub fn scan(cfg: &RunConfig) -> Result<String, Failure> {
    let model = cfg.build_model()?;
    let budget = cfg.budget();
    let opts = ScanOptions { newton: cfg.newton(), samples_per_side: cfg.samples_per_side, ..ScanOptions::default() };
    let rect = cfg.rect();
    let rep = scan_window(|z| model.eval(z, cfg.f, &budget), rect, (cfg.grid[0], cfg.grid[1]), &opts)?;
    let mut records = rep.records.clone();
    records.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    prepare_out(cfg)?;
    write(cfg, "roots.csv", &roots_csv(&records))?;
    let summary = json!({
        "command": "scan",
        "f": cfg.f,
        "window": cfg.window,
        "count": records.len(),
        "winding_count": rep.winding.count,
        "winding_raw": rep.winding.raw,
        "certified": records.iter().filter(|r| r.count_certified).count(),
        "newton_starts": rep.starts,
        "consistent": rep.consistent(),
        "diagnostic": rep.diagnostic,
    });
    if cfg.svg {
        let pts = records.iter().map(|r| (r.re, r.im)).collect();
        let [rl, rh, il, ih] = cfg.window;
        let frame = vec![(rl, il), (rh, il), (rh, ih), (rl, ih), (rl, il)];
        let title = format!("Zeros of F at f = {}", cfg.f);
        write(
            cfg,
            "roots.svg",
            &plot(&title, "Re z", "Im z", &[Series::new("window", frame, Style::Line), Series::new("zeros", pts, Style::Points)]),
        )?;
    }
    let s = pretty(&summary);
    write(cfg, "summary.json", &s)?;
    if !rep.consistent() {
        return Err(Failure::Numerical(format!("scan count differs from winding count\n{s}")));
    }
    Ok(s)
}

/// Field-free resonance of the configured model.
fn field_free_root(cfg: &RunConfig, model: &Model, budget: &EvalBudget) -> Result<C, Failure> {
    let seed = match cfg.model {
        ModelChoice::Model1 => C::new(1.0, -0.01),
        ModelChoice::Model2 => default_seed(&RunConfig { seeds: Vec::new(), ..cfg.clone() }, model)?,
    };
    Ok(newton(|z| model.eval(z, 0.0, budget), seed, &cfg.newton())?.z())
}

pub fn trace(cfg: &RunConfig) -> Result<String, Failure> {
    let model = cfg.build_model()?;
    let budget = cfg.budget();
    let r0 = field_free_root(cfg, &model, &budget)?;
    let [f_start, f_end] = cfg.f_range;
    let seed = match cfg.seed() {
        Some(s) => s,
        None => {
            let opts = ScanOptions { newton: cfg.newton(), certify: false, ..ScanOptions::default() };
            let rep = scan_window(|z| model.eval(z, f_start, &budget), cfg.rect(), (cfg.grid[0], cfg.grid[1]), &opts)?;
            rep.records
                .iter()
                .map(|r| r.z())
                .min_by(|a, b| (a - r0).norm().total_cmp(&(b - r0).norm()))
                .ok_or_else(|| Failure::Numerical(format!("no zero found in the window at f = {f_start}")))?
        }
    };
    let topts = TraceOptions { newton: cfg.newton(), ..TraceOptions::default() };
    let (pts, err) = trace_model(&model, &budget, f_start, f_end, cfg.steps, seed, &topts);
    prepare_out(cfg)?;
    write(cfg, "trajectory.csv", &trajectory_csv(&pts))?;
    let rep = instability_report(&pts, r0);
    let usable: Vec<_> = pts.iter().filter(|p| p.im != 0.0).collect();
    let exponent = (usable.len() >= 2).then(|| {
        let xs: Vec<f64> = usable.iter().map(|p| p.f).collect();
        let ys: Vec<f64> = usable.iter().map(|p| p.im.abs()).collect();
        log_slope(&xs, &ys)
    });
    let summary = json!({
        "command": "trace",
        "r0": [r0.re, r0.im],
        "seed": [seed.re, seed.im],
        "points": pts.len(),
        "completed": err.is_none(),
        "error": err.as_ref().map(|e| e.to_string()),
        "c0_hat": rep.c0_hat,
        "fit_exponent_abs_im_vs_f": exponent,
        "report": rep,
    });
    if cfg.svg {
        let ratio = pts.iter().map(|p| (p.f, p.im_over_f)).collect();
        let path = pts.iter().map(|p| (p.re, p.im)).collect();
        write(cfg, "trajectory_ratio.svg", &plot("|Im r(f)| / f", "f", "|Im r| / f", &[Series::new("ratio", ratio, Style::Line)]))?;
        write(
            cfg,
            "trajectory_path.svg",
            &plot(
                "Resonance path",
                "Re r",
                "Im r",
                &[Series::new("r(f)", path, Style::Line), Series::new("r0", vec![(r0.re, r0.im)], Style::Points)],
            ),
        )?;
    }
    let s = pretty(&summary);
    write(cfg, "summary.json", &s)?;
    if let Some(e) = err {
        return Err(Failure::Numerical(format!("trace stopped early: {e}\n{s}")));
    }
    Ok(s)
}

pub fn validate(cfg: &RunConfig) -> Result<String, Failure> {
    let model = cfg.build_model()?;
    let p = model.profile();
    let z = C::new(cfg.probe[0], cfg.probe[1]);
    let exact_b = EvalBudget { rel_tol: cfg.tol, ..EvalBudget::with_method(Method::Exact) };
    let b = cfg.budget();
    let mut fs = cfg.validate_f.clone();
    fs.sort_by(|a, b| b.total_cmp(a));
    let mut e24 = Vec::with_capacity(fs.len());
    let mut e26 = Vec::with_capacity(fs.len());
    let mut csv = String::from(ORDER_HEADER);
    csv.push('\n');
    for &f in &fs {
        let ex = resolvent(z, f, p, &exact_b)?.to_complex();
        let a = (resolvent_expansion24(z, f, p, &b)?.to_complex() - ex).norm();
        let c = (resolvent_leading26(z, f, p, &b)?.to_complex() - ex).norm();
        let _ = writeln!(csv, "{},{},{}", fmt17(f), fmt17(a), fmt17(c));
        e24.push(a);
        e26.push(c);
    }
    let s24 = log_slope(&fs, &e24);
    let s26 = log_slope(&fs, &e26);
    let ok24 = (s24 - 1.0).abs() <= SLOPE_TOL;
    let ok26 = (s26 - 0.5).abs() <= SLOPE_TOL;
    prepare_out(cfg)?;
    write(cfg, "order_laws.csv", &csv)?;
    let summary = json!({
        "command": "validate",
        "probe": cfg.probe,
        "f": fs,
        "fits": [
            {"law": "expansion", "expected_exponent": 1.0, "fit_exponent": s24, "pass": ok24},
            {"law": "leading_order", "expected_exponent": 0.5, "fit_exponent": s26, "pass": ok26},
        ],
        "tolerance": SLOPE_TOL,
        "pass": ok24 && ok26,
    });
    if cfg.svg {
        let a = fs.iter().zip(&e24).map(|(f, e)| (f.ln(), e.ln())).collect();
        let c = fs.iter().zip(&e26).map(|(f, e)| (f.ln(), e.ln())).collect();
        write(
            cfg,
            "order_laws.svg",
            &plot(
                "Approximation error",
                "ln f",
                "ln |error|",
                &[Series::new("expansion", a, Style::Line), Series::new("leading order", c, Style::Line)],
            ),
        )?;
    }
    let s = pretty(&summary);
    write(cfg, "summary.json", &s)?;
    if !(ok24 && ok26) {
        return Err(Failure::Numerical(format!("order-law fit outside +/-{SLOPE_TOL}\n{s}")));
    }
    Ok(s)
}
