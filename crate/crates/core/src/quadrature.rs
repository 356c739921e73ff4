//! Adaptive Gauss-Kronrod quadrature along contour paths with scaled accumulation.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex;

use crate::contours::{horizontal_piece, ContourPath, Piece};
use crate::error::{Error, Result};
use crate::numerics::{lit, scaled_add, Real, ScaledComplex};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tuning knobs shared by all integrators.
#[derive(Clone, Copy, Debug)]
pub struct QuadOptions<T> {
    pub rel_tol: T,
    pub max_depth: u32,
    pub max_evals: usize,
    /// Tails stop once panels fall below this fraction of the running maximum.
    pub tail_cutoff: T,
    /// First panel length when marching along an infinite piece.
    pub tail_step: T,
}

impl<T: Real> QuadOptions<T> {
    pub fn with_tol(rel_tol: T) -> Self {
        Self {
            rel_tol,
            max_depth: 24,
            max_evals: 2_000_000,
            tail_cutoff: lit(1e-17),
            tail_step: T::one(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct QuadResult<T> {
    pub value: ScaledComplex<T>,
    /// Error estimate in units of `exp(value.log_scale())`.
    pub abs_error_estimate: T,
    pub evaluations: usize,
    /// Size of the discarded tails, in the same units.
    pub tail_bound: T,
}

impl<T: Real> QuadResult<T> {
    pub fn to_complex(&self) -> Complex<T> {
        self.value.to_complex()
    }

    pub fn abs_error(&self) -> T {
        self.abs_error_estimate * self.value.log_scale().exp()
    }
}

/// `k -> exp(-i phase(k) / f)` factor of an oscillatory integrand.
pub trait Phase<T>: Sync {
    fn value(&self, k: Complex<T>) -> Complex<T>;
    fn derivative(&self, k: Complex<T>) -> Complex<T>;
}

/// `k^3/3 - k x`.
#[derive(Clone, Copy, Debug)]
pub struct CubicPhase<T> {
    pub x: Complex<T>,
}

impl<T: Real> Phase<T> for CubicPhase<T> {
    fn value(&self, k: Complex<T>) -> Complex<T> {
        k * k * k / lit::<T>(3.0) - k * self.x
    }
    fn derivative(&self, k: Complex<T>) -> Complex<T> {
        k * k - self.x
    }
}

struct Panel<T> {
    piece: usize,
    a: T,
    b: T,
    depth: u32,
    val: Complex<T>,
    scale: T,
    err: T,
    l1: T,
    id: u64,
}

impl<T: Real> Panel<T> {
    fn ln_err(&self) -> f64 {
        (self.err.ln() + self.scale).to_f64().unwrap()
    }
}

struct Key {
    ln_err: f64,
    id: u64,
    slot: usize,
}

impl PartialEq for Key {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Key {}
impl PartialOrd for Key {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Key {
    fn cmp(&self, o: &Self) -> Ordering {
        self.ln_err
            .total_cmp(&o.ln_err)
            .then_with(|| o.id.cmp(&self.id))
    }
}

/// Raw integrand: returns `(mantissa, log_scale)` with no normalization required.
type RawFn<'a, T> = dyn Fn(Complex<T>) -> (Complex<T>, T) + 'a;
/// Maximum admissible panel length at `(piece, t)`.
type CapFn<'a, T> = dyn Fn(usize, T) -> T + 'a;

fn eval_panel<T: Real>(p: &Piece<T>, piece: usize, a: T, b: T, f: &RawFn<T>) -> Result<Panel<T>> {
    let c = (a + b) / lit(2.0);
    let h = (b - a) / lit(2.0);
    let mut m = [Complex::new(T::zero(), T::zero()); 15];
    let mut s = [T::neg_infinity(); 15];
    for j in 0..15 {
        let x: T = if j < 8 {
            lit(XGK[j])
        } else {
            -lit::<T>(XGK[j - 8])
        };
        let t = c + h * x;
        let k = (p.map)(t);
        let (v, sc) = f(k);
        let v = v * (p.deriv)(t);
        if !(v.re.is_finite() && v.im.is_finite()) || sc.is_nan() {
            return Err(Error::Domain(format!(
                "non-finite integrand at k = {:?} + {:?}i",
                k.re.to_f64().unwrap(),
                k.im.to_f64().unwrap()
            )));
        }
        if v.norm() > T::zero() {
            // fold the mantissa size into the scale so panels compare fairly
            let n = v.norm();
            m[j] = v / n;
            s[j] = sc + n.ln();
        }
    }
    let smax = s.iter().fold(T::neg_infinity(), |acc, &x| acc.max(x));
    let mut out = Panel {
        piece,
        a,
        b,
        depth: 0,
        val: Complex::new(T::zero(), T::zero()),
        scale: T::zero(),
        err: T::zero(),
        l1: T::zero(),
        id: 0,
    };
    if smax == T::neg_infinity() {
        return Ok(out);
    }
    let mut fv = [Complex::new(T::zero(), T::zero()); 15];
    for j in 0..15 {
        if s[j] > T::neg_infinity() {
            fv[j] = m[j] * (s[j] - smax).exp();
        }
    }
    // index 7 is the centre node
    let mut resk = fv[7] * lit::<T>(WGK[7]);
    let mut resg = fv[7] * lit::<T>(WG[3]);
    let mut resabs = fv[7].norm() * lit(WGK[7]);
    for j in 0..7 {
        let w = lit::<T>(WGK[j]);
        resk = resk + (fv[j] + fv[j + 8]) * w;
        resabs = resabs + (fv[j].norm() + fv[j + 8].norm()) * w;
        if j % 2 == 1 {
            resg = resg + (fv[j] + fv[j + 8]) * lit::<T>(WG[j / 2]);
        }
    }
    let mean = resk / lit::<T>(2.0);
    let mut resasc: T = (fv[7] - mean).norm() * lit::<T>(WGK[7]);
    for j in 0..7 {
        resasc = resasc + ((fv[j] - mean).norm() + (fv[j + 8] - mean).norm()) * lit(WGK[j]);
    }
    let ha = h.abs();
    let mut err = ((resk - resg) * h).norm();
    resasc = resasc * ha;
    resabs = resabs * ha;
    if resasc > T::zero() && err > T::zero() {
        let r = (lit::<T>(200.0) * err / resasc).powf(lit(1.5));
        err = resasc * r.min(T::one());
    }
    err = err.max(lit::<T>(50.0) * T::epsilon() * resabs);
    out.val = resk * h;
    out.scale = smax;
    out.err = err;
    out.l1 = resabs;
    Ok(out)
}

/// Log-domain accumulator of non-negative reals relative to a movable reference scale.
struct Totals<T> {
    reference: T,
    value: Complex<T>,
    err: T,
    l1: T,
}

impl<T: Real> Totals<T> {
    fn factor(&self, scale: T) -> T {
        (scale - self.reference).exp()
    }
    fn add(&mut self, p: &Panel<T>, sign: T) {
        let w = self.factor(p.scale) * sign;
        self.value = self.value + p.val * w;
        self.err = self.err + p.err * w;
        self.l1 = self.l1 + p.l1 * w;
    }
    fn rebuild<'a, I: Iterator<Item = &'a Panel<T>>>(&mut self, panels: I) {
        self.value = Complex::new(T::zero(), T::zero());
        self.err = T::zero();
        self.l1 = T::zero();
        for p in panels {
            self.add(p, T::one());
        }
    }
    fn converged(&self, rel_tol: T) -> bool {
        let floor = lit::<T>(100.0) * T::epsilon() * self.l1;
        self.err <= (rel_tol * self.value.norm()).max(floor)
    }
}

fn initial_panels<T: Real>(
    path: &ContourPath<T>,
    f: &RawFn<T>,
    cap: Option<&CapFn<T>>,
    opts: &QuadOptions<T>,
    evals: &mut usize,
    tail_bound_ln: &mut f64,
) -> Result<Vec<Panel<T>>> {
    let mut panels = Vec::new();
    for (idx, piece) in path.pieces.iter().enumerate() {
        let lo_inf = !piece.t_lo.is_finite();
        let hi_inf = !piece.t_hi.is_finite();
        match (lo_inf, hi_inf) {
            (false, false) => {
                march_finite(piece, idx, f, cap, evals, &mut panels)?;
            }
            (false, true) => {
                march_tail(
                    piece,
                    idx,
                    piece.t_lo,
                    T::one(),
                    f,
                    cap,
                    opts,
                    evals,
                    &mut panels,
                    tail_bound_ln,
                )?;
            }
            (true, false) => {
                march_tail(
                    piece,
                    idx,
                    piece.t_hi,
                    -T::one(),
                    f,
                    cap,
                    opts,
                    evals,
                    &mut panels,
                    tail_bound_ln,
                )?;
            }
            (true, true) => {
                march_tail(
                    piece,
                    idx,
                    T::zero(),
                    T::one(),
                    f,
                    cap,
                    opts,
                    evals,
                    &mut panels,
                    tail_bound_ln,
                )?;
                march_tail(
                    piece,
                    idx,
                    T::zero(),
                    -T::one(),
                    f,
                    cap,
                    opts,
                    evals,
                    &mut panels,
                    tail_bound_ln,
                )?;
            }
        }
    }
    Ok(panels)
}

fn capped_step<T: Real>(cap: Option<&CapFn<T>>, idx: usize, t: T, dir: T, want: T) -> T {
    match cap {
        None => want,
        Some(c) => {
            let mut h = want.min(c(idx, t));
            // the cap may shrink across the panel; one refinement with the far end
            h = h.min(c(idx, t + dir * h));
            h.max(want * lit(1e-9))
        }
    }
}

fn march_finite<T: Real>(
    piece: &Piece<T>,
    idx: usize,
    f: &RawFn<T>,
    cap: Option<&CapFn<T>>,
    evals: &mut usize,
    out: &mut Vec<Panel<T>>,
) -> Result<()> {
    let (a, b) = (piece.t_lo, piece.t_hi);
    if cap.is_none() {
        out.push(eval_panel(piece, idx, a, b, f)?);
        *evals += 15;
        return Ok(());
    }
    let mut t = a;
    let mut count = 0usize;
    while t < b {
        let h = capped_step(cap, idx, t, T::one(), b - t);
        let e = if b - (t + h) < h * lit(1e-6) {
            b
        } else {
            t + h
        };
        out.push(eval_panel(piece, idx, t, e, f)?);
        *evals += 15;
        t = e;
        count += 1;
        if count > 1_000_000 {
            return Err(Error::Domain(
                "oscillation cap produced too many panels".into(),
            ));
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn march_tail<T: Real>(
    piece: &Piece<T>,
    idx: usize,
    start: T,
    dir: T,
    f: &RawFn<T>,
    cap: Option<&CapFn<T>>,
    opts: &QuadOptions<T>,
    evals: &mut usize,
    out: &mut Vec<Panel<T>>,
    tail_bound_ln: &mut f64,
) -> Result<()> {
    let cut = opts.tail_cutoff.ln().to_f64().unwrap();
    let mut t = start;
    let mut step = opts.tail_step;
    let mut running_max = f64::NEG_INFINITY;
    let mut quiet = 0;
    for _ in 0..100_000 {
        let h = capped_step(cap, idx, t, dir, step);
        let e = t + dir * h;
        let (lo, hi) = if dir > T::zero() { (t, e) } else { (e, t) };
        let p = eval_panel(piece, idx, lo, hi, f)?;
        *evals += 15;
        let size = (p.l1.ln() + p.scale).to_f64().unwrap();
        running_max = running_max.max(size);
        let small = size < running_max + cut || size == f64::NEG_INFINITY;
        out.push(p);
        t = e;
        if small {
            quiet += 1;
            if quiet >= 2 {
                *tail_bound_ln = log_add(*tail_bound_ln, size);
                return Ok(());
            }
        } else {
            quiet = 0;
        }
        step = step * lit(1.5);
    }
    Err(Error::NonConvergence {
        piece: idx,
        lo: start.to_f64().unwrap(),
        hi: t.to_f64().unwrap(),
        estimate: f64::INFINITY,
    })
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

fn integrate_raw<T: Real>(
    path: &ContourPath<T>,
    f: &RawFn<T>,
    cap: Option<&CapFn<T>>,
    opts: &QuadOptions<T>,
) -> Result<QuadResult<T>> {
    let mut evals = 0usize;
    let mut tail_ln = f64::NEG_INFINITY;
    let mut slots: Vec<Option<Panel<T>>> = Vec::new();
    let mut heap = BinaryHeap::new();
    let mut next_id = 0u64;
    let init = initial_panels(path, f, cap, opts, &mut evals, &mut tail_ln)?;
    let reference = init
        .iter()
        .filter(|p| p.l1 > T::zero())
        .map(|p| p.scale + p.l1.ln())
        .fold(T::neg_infinity(), |a, b| a.max(b));
    let reference = if reference.is_finite() {
        reference
    } else {
        T::zero()
    };
    let mut totals = Totals {
        reference,
        value: Complex::new(T::zero(), T::zero()),
        err: T::zero(),
        l1: T::zero(),
    };
    for mut p in init {
        p.id = next_id;
        next_id += 1;
        totals.add(&p, T::one());
        heap.push(Key {
            ln_err: p.ln_err(),
            id: p.id,
            slot: slots.len(),
        });
        slots.push(Some(p));
    }
    let rebase_gap: T = T::max_value().ln() / lit(4.0);
    let mut frozen: Vec<usize> = Vec::new();
    let mut iter = 0usize;
    while !totals.converged(opts.rel_tol) {
        let Some(key) = heap.pop() else { break };
        let p = slots[key.slot].take().expect("live panel");
        if p.depth >= opts.max_depth || evals >= opts.max_evals {
            let slot = key.slot;
            slots[slot] = Some(p);
            frozen.push(slot);
            if evals >= opts.max_evals {
                break;
            }
            continue;
        }
        let mid = (p.a + p.b) / lit(2.0);
        let piece = &path.pieces[p.piece];
        let mut left = eval_panel(piece, p.piece, p.a, mid, f)?;
        let mut right = eval_panel(piece, p.piece, mid, p.b, f)?;
        evals += 30;
        totals.add(&p, -T::one());
        for child in [&mut left, &mut right] {
            child.depth = p.depth + 1;
            child.id = next_id;
            next_id += 1;
        }
        let top = left.scale.max(right.scale);
        if top - totals.reference > rebase_gap {
            totals.reference = top;
            totals.rebuild(slots.iter().flatten());
        }
        for child in [left, right] {
            totals.add(&child, T::one());
            heap.push(Key {
                ln_err: child.ln_err(),
                id: child.id,
                slot: slots.len(),
            });
            slots.push(Some(child));
        }
        iter += 1;
        if iter % 256 == 0 {
            totals.rebuild(slots.iter().flatten());
        }
    }
    totals.rebuild(slots.iter().flatten());
    if !totals.converged(opts.rel_tol) {
        let worst = slots
            .iter()
            .flatten()
            .max_by(|a, b| a.ln_err().total_cmp(&b.ln_err()))
            .expect("at least one panel");
        let rel = totals.err / totals.value.norm().max(T::min_positive_value());
        return Err(Error::NonConvergence {
            piece: worst.piece,
            lo: worst.a.to_f64().unwrap(),
            hi: worst.b.to_f64().unwrap(),
            estimate: rel.to_f64().unwrap(),
        });
    }
    let mut live: Vec<&Panel<T>> = slots.iter().flatten().collect();
    live.sort_by(|x, y| {
        x.piece
            .cmp(&y.piece)
            .then(x.a.partial_cmp(&y.a).unwrap_or(Ordering::Equal))
    });
    let mut value = ScaledComplex::zero();
    let mut err_ln = f64::NEG_INFINITY;
    for p in &live {
        value = scaled_add(value, ScaledComplex::new(p.val, p.scale));
        err_ln = log_add(err_ln, p.ln_err());
    }
    value = value.scale(Complex::new(path.orientation, T::zero()));
    let base = value.log_scale().to_f64().unwrap();
    Ok(QuadResult {
        value,
        abs_error_estimate: lit((err_ln - base).exp()),
        evaluations: evals.max(1),
        tail_bound: lit((tail_ln - base).exp()),
    })
}

/// Adaptive integral of a scaled integrand along `path`.
pub fn integrate<T, F>(path: &ContourPath<T>, integrand: F, rel_tol: T) -> Result<QuadResult<T>>
where
    T: Real,
    F: Fn(Complex<T>) -> ScaledComplex<T>,
{
    integrate_with(path, integrand, &QuadOptions::with_tol(rel_tol))
}

pub fn integrate_with<T, F>(
    path: &ContourPath<T>,
    integrand: F,
    opts: &QuadOptions<T>,
) -> Result<QuadResult<T>>
where
    T: Real,
    F: Fn(Complex<T>) -> ScaledComplex<T>,
{
    let raw = move |k: Complex<T>| {
        let v = integrand(k);
        (v.mantissa(), v.log_scale())
    };
    integrate_raw(path, &raw, None, opts)
}

/// Convenience wrapper for integrands that fit in ordinary floating point.
pub fn integrate_complex<T, F>(
    path: &ContourPath<T>,
    integrand: F,
    rel_tol: T,
) -> Result<QuadResult<T>>
where
    T: Real,
    F: Fn(Complex<T>) -> Complex<T>,
{
    let raw = move |k: Complex<T>| (integrand(k), T::zero());
    integrate_raw(path, &raw, None, &QuadOptions::with_tol(rel_tol))
}

/// `int exp(-i phase(k) / f) amplitude(k) dk` with panels capped at half a local wavelength.
pub fn integrate_oscillatory<T, P, A>(
    path: &ContourPath<T>,
    phase: &P,
    amplitude: A,
    one_over_f: T,
    rel_tol: T,
) -> Result<QuadResult<T>>
where
    T: Real,
    P: Phase<T>,
    A: Fn(Complex<T>) -> Complex<T>,
{
    integrate_oscillatory_with(
        path,
        phase,
        amplitude,
        one_over_f,
        &QuadOptions::with_tol(rel_tol),
    )
}

pub fn integrate_oscillatory_with<T, P, A>(
    path: &ContourPath<T>,
    phase: &P,
    amplitude: A,
    one_over_f: T,
    opts: &QuadOptions<T>,
) -> Result<QuadResult<T>>
where
    T: Real,
    P: Phase<T>,
    A: Fn(Complex<T>) -> Complex<T>,
{
    let raw = |k: Complex<T>| {
        let w = phase.value(k) * Complex::new(T::zero(), -one_over_f);
        let (s, c) = w.im.sin_cos();
        (amplitude(k) * Complex::new(c, s), w.re)
    };
    if one_over_f == T::zero() {
        return integrate_raw(path, &raw, None, opts);
    }
    let cap = |idx: usize, t: T| {
        let piece = &path.pieces[idx];
        let rate = (phase.derivative((piece.map)(t)) * (piece.deriv)(t)).norm() * one_over_f;
        if rate > T::zero() {
            T::PI() / rate
        } else {
            T::infinity()
        }
    };
    integrate_raw(path, &raw, Some(&cap), opts)
}

/// Real integral over `[a, b]`; either end may be infinite.
pub fn integrate_real<T, F>(f: F, a: T, b: T, rel_tol: T) -> Result<T>
where
    T: Real,
    F: Fn(T) -> T,
{
    let path = ContourPath::new(vec![horizontal_piece(T::zero(), a, b)]);
    let raw = move |k: Complex<T>| (Complex::new(f(k.re), T::zero()), T::zero());
    Ok(
        integrate_raw(&path, &raw, None, &QuadOptions::with_tol(rel_tol))?
            .to_complex()
            .re,
    )
}

/// `P.V. int_a^b g(k) / (k - s) dk` by singularity subtraction.
pub fn principal_value_interval<T, F>(g: F, s: T, a: T, b: T, rel_tol: T) -> Result<T>
where
    T: Real,
    F: Fn(T) -> T,
{
    if !(a < s && s < b) {
        return Err(Error::Domain(
            "singular point must lie inside the interval".into(),
        ));
    }
    let gs = g(s);
    let smooth = |k: T| {
        if k == s {
            T::zero()
        } else {
            (g(k) - gs) / (k - s)
        }
    };
    let left = integrate_real(smooth, a, s, rel_tol)?;
    let right = integrate_real(smooth, s, b, rel_tol)?;
    Ok(left + right + gs * ((b - s) / (s - a)).ln())
}

fn pv_line<T: Real, F: Fn(T) -> T>(g: &F, c: T, d: T, rel_tol: T) -> Result<T> {
    let gc = g(c);
    let smooth = |k: T| {
        if k == c {
            T::zero()
        } else {
            (g(k) - gc) / (k - c)
        }
    };
    let near =
        integrate_real(smooth, c - d, c, rel_tol)? + integrate_real(smooth, c, c + d, rel_tol)?;
    let lo = integrate_real(|k| g(k) / (k - c), T::neg_infinity(), c - d, rel_tol)?;
    let hi = integrate_real(|k| g(k) / (k - c), c + d, T::infinity(), rel_tol)?;
    Ok(near + lo + hi)
}

/// `P.V. int_R g(k) / (k^2 - s^2) dk` for `s > 0`.
pub fn principal_value<T, F>(fhat_sq: F, s: T, rel_tol: T) -> Result<T>
where
    T: Real,
    F: Fn(T) -> T,
{
    if !(s > lit(1e-8)) {
        return Err(Error::Domain("principal value needs s > 1e-8".into()));
    }
    let d = (s / lit(2.0)).min(T::one());
    let plus = pv_line(&fhat_sq, s, d, rel_tol)?;
    let minus = pv_line(&fhat_sq, -s, d, rel_tol)?;
    Ok((plus - minus) / (lit::<T>(2.0) * s))
}

fn legendre_pair<T: Real>(n: usize, x: T) -> (T, T) {
    // returns (P_n(x), P_{n-1}(x))
    let mut p0 = T::one();
    let mut p1 = x;
    if n == 0 {
        return (p0, T::zero());
    }
    for k in 2..=n {
        let kf: T = lit(k as f64);
        let p2 = ((lit::<T>(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

/// Gauss-Legendre nodes (ascending) and weights on `[-1, 1]`.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n >= 1);
    let mut x = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    let nf: T = lit(n as f64);
    for i in 0..n.div_ceil(2) {
        let mut r: T = (T::PI() * (lit::<T>(i as f64) + lit(0.75)) / (nf + lit(0.5))).cos();
        for _ in 0..100 {
            let (p, q) = legendre_pair(n, r);
            let dp = nf * (r * p - q) / (r * r - T::one());
            let dr = p / dp;
            r = r - dr;
            if dr.abs() <= T::epsilon() * lit(2.0) {
                break;
            }
        }
        let (p, q) = legendre_pair(n, r);
        let dp = nf * (r * p - q) / (r * r - T::one());
        let wi = lit::<T>(2.0) / ((T::one() - r * r) * dp * dp);
        x[n - 1 - i] = r;
        x[i] = -r;
        w[n - 1 - i] = wi;
        w[i] = wi;
    }
    (x, w)
}

/// `S[i][j] = int_{-1}^{x_i} l_j(x) dx` for the Lagrange basis on Gauss-Legendre nodes.
pub fn legendre_integration_matrix<T: Real>(x: &[T], w: &[T]) -> Vec<Vec<T>> {
    let n = x.len();
    let table = |t: T| {
        let mut p = vec![T::zero(); n + 1];
        p[0] = T::one();
        if n >= 1 {
            p[1] = t;
        }
        for k in 2..=n {
            let kf: T = lit(k as f64);
            p[k] =
                ((lit::<T>(2.0) * kf - T::one()) * t * p[k - 1] - (kf - T::one()) * p[k - 2]) / kf;
        }
        p
    };
    let pn: Vec<Vec<T>> = x.iter().map(|&t| table(t)).collect();
    let mut s = vec![vec![T::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = (x[i] + T::one()) / lit(2.0);
            for m in 1..n {
                acc = acc + pn[j][m] * (pn[i][m + 1] - pn[i][m - 1]) / lit(2.0);
            }
            s[i][j] = w[j] * acc;
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contours::{build_c_pm, build_gamma_alpha};

    type C = Complex<f64>;

    #[test]
    fn constant_over_segment() {
        let p = ContourPath::segment(C::new(0.0, 0.0), C::new(3.0, 4.0));
        let r = integrate_complex(&p, |_| C::new(1.0, 0.0), 1e-12).unwrap();
        assert!((r.to_complex() - C::new(3.0, 4.0)).norm() < 1e-14);
        assert!(r.abs_error_estimate >= 0.0 && r.evaluations > 0);
    }

    #[test]
    fn gaussian_over_gamma_alpha() {
        for alpha in [0.1, 0.5, 0.9] {
            let p = build_gamma_alpha(alpha, 1.0, 4.0).unwrap();
            let r = integrate_complex(&p, |k| (-k * k).exp(), 1e-12).unwrap();
            assert!((r.to_complex() - C::new(std::f64::consts::PI.sqrt(), 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn airy_type_integral_is_path_independent() {
        let f = 0.1;
        let ph = CubicPhase {
            x: C::new(0.0, 0.0),
        };
        let amp = |k: C| (-k * k / 2.0).exp();
        let a = integrate_oscillatory(&build_c_pm(0.3, 4.0).unwrap(), &ph, amp, 1.0 / f, 1e-12)
            .unwrap();
        let b = integrate_oscillatory(
            &build_gamma_alpha(0.5, 1.0, 4.0).unwrap(),
            &ph,
            amp,
            1.0 / f,
            1e-12,
        )
        .unwrap();
        assert!((a.to_complex() - b.to_complex()).norm() < 1e-10 * b.to_complex().norm());
    }

    #[test]
    fn oscillatory_matches_plain_rule() {
        let f = 0.05;
        let p = build_gamma_alpha(0.5, 1.0, 4.0).unwrap();
        let ph = CubicPhase {
            x: C::new(0.0, 0.0),
        };
        let amp = |k: C| (-k * k / 2.0).exp();
        let a = integrate_oscillatory(&p, &ph, amp, 1.0 / f, 1e-12)
            .unwrap()
            .to_complex();
        let b = integrate_complex(
            &p,
            |k| (C::new(0.0, -1.0 / f) * ph.value(k)).exp() * amp(k),
            1e-13,
        )
        .unwrap()
        .to_complex();
        assert!((a - b).norm() < 1e-10 * b.norm());
    }

    #[test]
    fn infinite_field_limit() {
        let p = build_gamma_alpha(0.5, 1.0, 4.0).unwrap();
        let ph = CubicPhase {
            x: C::new(0.0, 0.0),
        };
        let r = integrate_oscillatory(&p, &ph, |k| (-k * k / 2.0).exp(), 0.0, 1e-12).unwrap();
        assert!((r.to_complex().re - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn reversal_negates() {
        let p = build_gamma_alpha(0.4, 1.0, 4.0).unwrap();
        let g = |k: C| (-k * k).exp() * (k + 1.0);
        let a = integrate_complex(&p, g, 1e-12).unwrap().to_complex();
        let b = integrate_complex(&p.reversed(), g, 1e-12)
            .unwrap()
            .to_complex();
        assert!((a + b).norm() < 1e-13);
    }

    #[test]
    fn huge_scales_survive() {
        let p = ContourPath::segment(C::new(0.0, 0.0), C::new(1.0, 0.0));
        let r = integrate(
            &p,
            |k| ScaledComplex::new(C::new(1.0, 0.0), 2000.0 + k.re),
            1e-12,
        )
        .unwrap();
        let want = 2000.0 + (std::f64::consts::E - 1.0).ln();
        assert!((r.value.ln_abs() - want).abs() < 1e-12);
    }

    #[test]
    fn principal_values() {
        let v = principal_value_interval(|_| 2.5f64, 0.0, -3.0, 3.0, 1e-12).unwrap();
        assert!(v.abs() < 1e-14);
        let g = |k: f64| (-k * k).exp();
        let pv = principal_value(g, 1.0, 1e-12).unwrap();
        assert!(pv.is_finite());
        assert!(principal_value(g, 1e-9, 1e-12).is_err());
    }

    #[test]
    fn gauss_legendre_exactness() {
        let (x, w) = gauss_legendre::<f64>(12);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(22)).sum();
        assert!((s - 2.0 / 23.0).abs() < 1e-14);
        let m = legendre_integration_matrix(&x, &w);
        for i in 0..12 {
            let v: f64 = (0..12).map(|j| m[i][j] * x[j].powi(5)).sum();
            let want = (x[i].powi(6) - 1.0) / 6.0;
            assert!((v - want).abs() < 1e-14);
        }
    }
}
