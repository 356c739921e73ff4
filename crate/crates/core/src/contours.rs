//! Integration paths in the complex momentum plane.

use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::numerics::{lit, principal_sqrt, Real};

pub type PathMap<T> = Arc<dyn Fn(T) -> Complex<T> + Send + Sync>;

/// One smooth piece `t -> k(t)` on `[t_lo, t_hi]`; either end may be infinite.
#[derive(Clone)]
pub struct Piece<T> {
    pub map: PathMap<T>,
    pub deriv: PathMap<T>,
    pub t_lo: T,
    pub t_hi: T,
    pub smooth: bool,
}

impl<T: Real> Piece<T> {
    pub fn new(map: PathMap<T>, deriv: PathMap<T>, t_lo: T, t_hi: T) -> Self {
        Self {
            map,
            deriv,
            t_lo,
            t_hi,
            smooth: true,
        }
    }

    pub fn is_infinite(&self) -> bool {
        !self.t_lo.is_finite() || !self.t_hi.is_finite()
    }

    pub fn start(&self) -> Complex<T> {
        (self.map)(self.t_lo)
    }

    pub fn end(&self) -> Complex<T> {
        (self.map)(self.t_hi)
    }
}

/// Straight segment from `a` to `b`, parameter in `[0, 1]`.
pub fn segment_piece<T: Real>(a: Complex<T>, b: Complex<T>) -> Piece<T> {
    let d = b - a;
    Piece::new(
        Arc::new(move |t| a + d * t),
        Arc::new(move |_| d),
        T::zero(),
        T::one(),
    )
}

/// Horizontal ray `k = t + i*height` for `t` in `[t_lo, t_hi]` (one end infinite).
pub fn horizontal_piece<T: Real>(height: T, t_lo: T, t_hi: T) -> Piece<T> {
    Piece::new(
        Arc::new(move |t| Complex::new(t, height)),
        Arc::new(|_| Complex::new(T::one(), T::zero())),
        t_lo,
        t_hi,
    )
}

/// Piecewise-smooth oriented path.
#[derive(Clone)]
pub struct ContourPath<T> {
    pub pieces: Vec<Piece<T>>,
    /// +1 follows the parametrization, -1 reverses it.
    pub orientation: T,
    /// Parameter magnitude at which infinite tails were cut, if any.
    pub truncation: Option<T>,
}

impl<T: Real> ContourPath<T> {
    pub fn new(pieces: Vec<Piece<T>>) -> Self {
        Self {
            pieces,
            orientation: T::one(),
            truncation: None,
        }
    }

    pub fn segment(a: Complex<T>, b: Complex<T>) -> Self {
        Self::new(vec![segment_piece(a, b)])
    }

    pub fn reversed(&self) -> Self {
        let mut p = self.clone();
        p.orientation = -p.orientation;
        p
    }

    /// Same path translated by `offset`.
    pub fn shifted(&self, offset: Complex<T>) -> Self {
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                let m = p.map.clone();
                Piece {
                    map: Arc::new(move |t| m(t) + offset),
                    ..p.clone()
                }
            })
            .collect();
        Self {
            pieces,
            ..self.clone()
        }
    }

    pub fn concat(mut self, other: ContourPath<T>) -> Self {
        assert!(
            self.orientation == other.orientation,
            "concatenating paths of opposite orientation"
        );
        self.pieces.extend(other.pieces);
        self
    }

    /// Cuts infinite parameter ranges at `|t| = t_max`.
    pub fn truncated(&self, t_max: T) -> Self {
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                let mut q = p.clone();
                if !q.t_lo.is_finite() {
                    q.t_lo = -t_max;
                }
                if !q.t_hi.is_finite() {
                    q.t_hi = t_max;
                }
                q
            })
            .collect();
        Self {
            pieces,
            orientation: self.orientation,
            truncation: Some(t_max),
        }
    }

    /// Largest gap between consecutive piece endpoints.
    pub fn max_joint_gap(&self) -> T {
        let mut g = T::zero();
        for w in self.pieces.windows(2) {
            if w[0].t_hi.is_finite() && w[1].t_lo.is_finite() {
                g = g.max((w[0].end() - w[1].start()).norm());
            }
        }
        g
    }

    /// Arc length of a finite path.
    pub fn length(&self) -> T {
        let mut total = T::zero();
        for p in &self.pieces {
            assert!(!p.is_infinite(), "length of an untruncated infinite path");
            let n = 256;
            let h = (p.t_hi - p.t_lo) / lit(n as f64);
            for i in 0..n {
                let a = p.t_lo + h * lit(i as f64);
                // two-point Gauss rule per cell
                let c = a + h / lit(2.0);
                let d = h / lit(2.0) / lit::<T>(3.0).sqrt();
                total = total + ((p.deriv)(c - d).norm() + (p.deriv)(c + d).norm()) * h / lit(2.0);
            }
        }
        total
    }

    /// Sample points `(t, k)` per piece; infinite ends are sampled up to `reach` from the finite end.
    pub fn sample(&self, per_piece: usize, reach: T) -> Vec<(usize, T, Complex<T>)> {
        let mut out = Vec::new();
        for (i, p) in self.pieces.iter().enumerate() {
            let (a, b) = finite_window(p, reach);
            // sample from the finite end outward so that tails report their first offending point
            let outward_left = !p.t_lo.is_finite() && p.t_hi.is_finite();
            for j in 0..per_piece {
                let s = lit::<T>(j as f64) / lit((per_piece - 1).max(1) as f64);
                let t = if outward_left {
                    b - (b - a) * s
                } else {
                    a + (b - a) * s
                };
                out.push((i, t, (p.map)(t)));
            }
        }
        out
    }

    /// CSV dump with columns `t,re_k,im_k`.
    pub fn to_csv(&self, per_piece: usize, reach: T) -> String {
        let mut s = String::from("t,re_k,im_k\n");
        for (_, t, k) in self.sample(per_piece, reach) {
            let _ = writeln!(
                s,
                "{:.16e},{:.16e},{:.16e}",
                t.to_f64().unwrap(),
                k.re.to_f64().unwrap(),
                k.im.to_f64().unwrap()
            );
        }
        s
    }
}

fn finite_window<T: Real>(p: &Piece<T>, reach: T) -> (T, T) {
    match (p.t_lo.is_finite(), p.t_hi.is_finite()) {
        (true, true) => (p.t_lo, p.t_hi),
        (true, false) => (p.t_lo, p.t_lo + reach),
        (false, true) => (p.t_hi - reach, p.t_hi),
        (false, false) => (-reach, reach),
    }
}

/// Analyticity metadata of a Fourier profile.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum Region<T> {
    /// `|Im k| < k0`.
    Strip(T),
    /// `|arg(k)| < theta0` or `|arg(-k)| < theta0`.
    Sector(T),
}

impl<T: Real> Region<T> {
    pub fn contains(&self, k: Complex<T>) -> bool {
        match *self {
            Region::Strip(k0) => k.im.abs() < k0,
            Region::Sector(th) => {
                if k.norm() == T::zero() {
                    return true;
                }
                let a = k.arg().abs();
                a < th || (T::PI() - a) < th
            }
        }
    }

    /// Largest admissible depth below the real axis for horizontal tails.
    pub fn margin(&self) -> T {
        match *self {
            Region::Strip(k0) => k0,
            Region::Sector(th) => th.tan(),
        }
    }
}

/// True iff every sampled point lies in `region`; otherwise the first offending point.
pub fn validate_in_region<T: Real>(
    path: &ContourPath<T>,
    region: &Region<T>,
) -> (bool, Option<Complex<T>>) {
    let reach = path.truncation.unwrap_or(lit(50.0));
    for (_, _, k) in path.sample(128, reach) {
        if !region.contains(k) {
            return (false, Some(k));
        }
    }
    (true, None)
}

fn check_alpha<T: Real>(alpha: T, margin: T) -> Result<()> {
    if !(alpha > T::zero()) || alpha >= margin {
        return Err(Error::Domain(format!(
            "alpha = {:?} outside (0, {:?})",
            alpha.to_f64().unwrap(),
            margin.to_f64().unwrap()
        )));
    }
    Ok(())
}

/// Five-piece path: `(-inf,-N) - i alpha`, riser at `-N`, `[-N, N]`, drop at `N`, `(N, inf) - i alpha`.
pub fn build_gamma_alpha<T: Real>(alpha: T, n: T, margin: T) -> Result<ContourPath<T>> {
    check_alpha(alpha, margin)?;
    if !(n > T::zero()) {
        return Err(Error::Domain("N must be positive".into()));
    }
    let i = Complex::new(T::zero(), T::one());
    let left = horizontal_piece(-alpha, T::neg_infinity(), -n);
    let riser = Piece::new(
        Arc::new(move |t: T| Complex::new(-n, t - alpha)),
        Arc::new(move |_| i),
        T::zero(),
        alpha,
    );
    let middle = horizontal_piece(T::zero(), -n, n);
    let drop = Piece::new(
        Arc::new(move |t: T| Complex::new(n, -t)),
        Arc::new(move |_| -i),
        T::zero(),
        alpha,
    );
    let right = horizontal_piece(-alpha, n, T::infinity());
    Ok(ContourPath::new(vec![left, riser, middle, drop, right]))
}

/// The path through the origin joining `Im k = -alpha` at `|t| = 1`, restricted to `t >= 0`.
pub fn build_c_plus<T: Real>(alpha: T, margin: T) -> Result<ContourPath<T>> {
    check_alpha(alpha, margin)?;
    let slope = Complex::new(T::one(), -alpha);
    let ramp = Piece::new(
        Arc::new(move |t: T| slope * t),
        Arc::new(move |_| slope),
        T::zero(),
        T::one(),
    );
    let tail = horizontal_piece(-alpha, T::one(), T::infinity());
    Ok(ContourPath::new(vec![ramp, tail]))
}

/// The `t <= 0` half, oriented from `-inf - i alpha` to the origin.
pub fn build_c_minus<T: Real>(alpha: T, margin: T) -> Result<ContourPath<T>> {
    check_alpha(alpha, margin)?;
    let slope = Complex::new(T::one(), alpha);
    let tail = horizontal_piece(-alpha, T::neg_infinity(), -T::one());
    let ramp = Piece::new(
        Arc::new(move |t: T| slope * t),
        Arc::new(move |_| slope),
        -T::one(),
        T::zero(),
    );
    Ok(ContourPath::new(vec![tail, ramp]))
}

/// `C_- followed by C_+`.
pub fn build_c_pm<T: Real>(alpha: T, margin: T) -> Result<ContourPath<T>> {
    Ok(build_c_minus(alpha, margin)?.concat(build_c_plus(alpha, margin)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Half {
    Upper,
    Lower,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    Clockwise,
    CounterClockwise,
}

/// Half circle about a real center.
pub fn build_semicircle<T: Real>(
    center: T,
    radius: T,
    half: Half,
    orient: Orientation,
) -> Result<ContourPath<T>> {
    if !(radius > T::zero()) {
        return Err(Error::Domain("semicircle radius must be positive".into()));
    }
    let c = Complex::new(center, T::zero());
    let (phase0, dir) = match (half, orient) {
        (Half::Upper, Orientation::Clockwise) => (T::PI(), -T::one()),
        (Half::Upper, Orientation::CounterClockwise) => (T::zero(), T::one()),
        (Half::Lower, Orientation::Clockwise) => (T::zero(), -T::one()),
        (Half::Lower, Orientation::CounterClockwise) => (T::PI(), T::one()),
    };
    let map = move |t: T| c + Complex::from_polar(radius, phase0 + dir * t);
    let deriv =
        move |t: T| Complex::new(T::zero(), dir) * Complex::from_polar(radius, phase0 + dir * t);
    Ok(ContourPath::new(vec![Piece::new(
        Arc::new(map),
        Arc::new(deriv),
        T::zero(),
        T::PI(),
    )]))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Side {
    Plus,
    Minus,
}

/// Steepest-descent curve through the saddle `+sqrt z` (plus) or `-sqrt z` (minus), in the shifted variable zeta.
#[derive(Clone, Copy, Debug)]
pub struct SteepestPathSpec<T> {
    pub z: Complex<T>,
    pub gamma: T,
    pub nu: T,
    pub side: Side,
    pub delta: T,
    pub t0: T,
    pub theta0: T,
}

/// Parameters of the saddle paths.
#[derive(Clone, Copy, Debug)]
pub struct SteepestOptions<T> {
    /// Extent of the plus-side curve; defaults to `Re sqrt z / 10`.
    pub delta_plus: Option<T>,
    /// Small parameter of the minus-side `t0` / `Theta0` rule.
    pub eps: T,
    /// Half-width of the strip the shifted tails must stay in.
    pub k0: T,
}

impl<T: Real> SteepestOptions<T> {
    /// `eps = min(0.05, k0/4, eps2/10)` with `eps2` the lower bound on `Re sqrt z`.
    pub fn with_defaults(k0: T, eps2: T) -> Self {
        let eps = lit::<T>(0.05).min(k0 / lit(4.0)).min(eps2 / lit(10.0));
        Self {
            delta_plus: None,
            eps,
            k0,
        }
    }
}

/// `(a, b) = (nu/(gamma+s), (gamma+s/3)/(gamma+s))` and their s-derivatives.
fn curve_coeffs<T: Real>(gamma: T, nu: T, s: T) -> (T, T, T, T) {
    let g = gamma + s;
    let a = nu / g;
    let b = (gamma + s / lit(3.0)) / g;
    let da = -nu / (g * g);
    let db = (-lit::<T>(2.0) * gamma / lit(3.0)) / (g * g);
    (a, b, da, db)
}

/// Plus side: `y(x) = x (a - sqrt(a^2 + b))`, `x >= 0`.
fn plus_y<T: Real>(gamma: T, nu: T, x: T) -> (T, T) {
    let (a, b, da, db) = curve_coeffs(gamma, nu, x);
    let r = (a * a + b).sqrt();
    let g = a - r;
    let dg = da - (lit::<T>(2.0) * a * da + db) / (lit::<T>(2.0) * r);
    (x * g, g + x * dg)
}

/// Minus side with `x = -s`, `s >= 0`: `y = -s (a + sqrt(a^2 + b))`.
fn minus_y<T: Real>(gamma: T, nu: T, s: T) -> (T, T) {
    let (a, b, da, db) = curve_coeffs(gamma, nu, s);
    let r = (a * a + b).sqrt();
    let g = a + r;
    let dg = da + (lit::<T>(2.0) * a * da + db) / (lit::<T>(2.0) * r);
    (-s * g, -(g + s * dg))
}

/// `Theta0` reached by the minus-side curve at `|Re zeta| = t0`.
pub fn minus_theta0<T: Real>(gamma: T, nu: T, t0: T) -> T {
    -minus_y(gamma, nu, t0).0
}

/// Minus-side `(t0, Theta0)`: `t0 = 2 eps sqrt 3` when `nu < eps`, else `Theta0 = nu (1 + eps)`.
pub fn select_t0_theta0<T: Real>(gamma: T, nu: T, eps: T) -> (T, T) {
    if nu < eps {
        let t0 = lit::<T>(2.0) * eps * lit::<T>(3.0).sqrt();
        return (t0, minus_theta0(gamma, nu, t0));
    }
    let target = nu * (T::one() + eps);
    // Theta0 >= t0 / sqrt 3 brackets the root
    let mut lo = T::zero();
    let mut hi = target * lit::<T>(3.0).sqrt() * lit(1.01);
    while minus_theta0(gamma, nu, hi) < target {
        hi = hi * lit(2.0);
    }
    for _ in 0..200 {
        let mid = (lo + hi) / lit(2.0);
        if minus_theta0(gamma, nu, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t0 = (lo + hi) / lit(2.0);
    (t0, minus_theta0(gamma, nu, t0))
}

/// Builds the saddle curve and its horizontal continuation, oriented away from the saddle.
///
/// The returned path lives in the zeta plane; shift by `+sqrt z` (plus) or `-sqrt z` (minus) for k.
pub fn build_steepest<T: Real>(
    z: Complex<T>,
    side: Side,
    opts: &SteepestOptions<T>,
) -> Result<(SteepestPathSpec<T>, ContourPath<T>)> {
    let w = principal_sqrt(z);
    let gamma = w.re;
    let nu = -w.im;
    if !(gamma > T::zero()) || nu < T::zero() {
        return Err(Error::Domain(
            "steepest paths need Re sqrt z > 0 and Im sqrt z <= 0".into(),
        ));
    }
    let (t0, theta0) = match side {
        Side::Plus => {
            let d = opts.delta_plus.unwrap_or(gamma / lit(10.0));
            (d, -plus_y(gamma, nu, d).0)
        }
        Side::Minus => select_t0_theta0(gamma, nu, opts.eps),
    };
    let depth = match side {
        Side::Plus => theta0 + nu,
        Side::Minus => theta0 - nu,
    };
    if depth.abs() >= opts.k0 {
        let k = match side {
            Side::Plus => Complex::new(t0 + gamma, -depth),
            Side::Minus => Complex::new(-t0 - gamma, -depth),
        };
        return Err(Error::PathValidation {
            point: Complex::new(k.re.to_f64().unwrap(), k.im.to_f64().unwrap()),
        });
    }
    let spec = SteepestPathSpec {
        z,
        gamma,
        nu,
        side,
        delta: t0,
        t0,
        theta0,
    };
    let path = match side {
        Side::Plus => {
            let curve = Piece::new(
                Arc::new(move |x: T| Complex::new(x, plus_y(gamma, nu, x).0)),
                Arc::new(move |x: T| Complex::new(T::one(), plus_y(gamma, nu, x).1)),
                T::zero(),
                t0,
            );
            let tail = horizontal_piece(-theta0, t0, T::infinity());
            ContourPath::new(vec![curve, tail])
        }
        Side::Minus => {
            let curve = Piece::new(
                Arc::new(move |s: T| Complex::new(-s, minus_y(gamma, nu, s).0)),
                Arc::new(move |s: T| Complex::new(-T::one(), minus_y(gamma, nu, s).1)),
                T::zero(),
                t0,
            );
            let tail = Piece::new(
                Arc::new(move |s: T| Complex::new(-s, -theta0)),
                Arc::new(|_| Complex::new(-T::one(), T::zero())),
                t0,
                T::infinity(),
            );
            ContourPath::new(vec![curve, tail])
        }
    };
    Ok((spec, path))
}

/// `Re(zeta^3/3 + sqrt z zeta^2)` (plus) or `Re(zeta^3/3 - sqrt z zeta^2)` (minus).
pub fn steepest_residual<T: Real>(z: Complex<T>, side: Side, zeta: Complex<T>) -> T {
    let w = principal_sqrt(z);
    let s = match side {
        Side::Plus => w,
        Side::Minus => -w,
    };
    (zeta * zeta * zeta / lit::<T>(3.0) + s * zeta * zeta).re
}

/// Region `M`: bounds on `sqrt z` away from the real axis and the origin.
#[derive(Clone, Copy, Debug)]
pub struct RegionM<T> {
    pub eps1: T,
    pub eps2: T,
    pub eps3: T,
    pub a: T,
    pub region: Region<T>,
}

impl<T: Real> RegionM<T> {
    pub fn contains(&self, z: Complex<T>) -> bool {
        let w = principal_sqrt(z);
        let arg = w.im.atan2(w.re);
        let theta = match self.region {
            Region::Strip(_) => T::PI() / lit(3.0),
            Region::Sector(th) => (T::PI() / lit(3.0)).min(th),
        };
        let strip_ok = match self.region {
            Region::Strip(k0) => w.im >= -k0 + self.eps3,
            Region::Sector(_) => true,
        };
        w.re >= self.eps2
            && w.re <= self.a
            && arg < T::zero()
            && arg > -theta + self.eps1
            && strip_ok
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;

    #[test]
    fn gamma_alpha_geometry() {
        let p = build_gamma_alpha(0.5, 1.0, 4.0).unwrap();
        assert!((p.pieces[1].start() - C::new(-1.0, -0.5)).norm() < 1e-15);
        assert!((p.pieces[1].end() - C::new(-1.0, 0.0)).norm() < 1e-15);
        let tp = p.truncated(10.0);
        assert!(tp.max_joint_gap() < 1e-12);
        assert!((tp.length() - 21.0).abs() < 1e-10);
        assert!(build_gamma_alpha(1.5, 1.0, 1.0).is_err());
    }

    #[test]
    fn gamma_alpha_small_alpha_hugs_axis() {
        let p = build_gamma_alpha(1e-9f64, 1.0, 4.0).unwrap();
        for (_, _, k) in p.sample(16, 10.0) {
            assert!(k.im.abs() <= 1e-9);
        }
    }

    #[test]
    fn c_pm_definition() {
        let p = build_c_pm(0.3, 4.0).unwrap();
        let plus = &p.pieces[3];
        assert!(((plus.map)(2.0) - C::new(2.0, -0.3)).norm() < 1e-15);
        let ramp_minus = &p.pieces[1];
        assert!(((ramp_minus.map)(0.0)).norm() < 1e-15);
        assert!(((ramp_minus.map)(-0.5) - C::new(-1.0, -0.3) * 0.5).norm() < 1e-15);
        assert!(p.truncated(20.0).max_joint_gap() < 1e-12);
    }

    #[test]
    fn semicircle_orientation_and_length() {
        let p = build_semicircle(0.0, 1.0, Half::Upper, Orientation::Clockwise).unwrap();
        let q = &p.pieces[0];
        assert!((q.start() - C::new(-1.0, 0.0)).norm() < 1e-15);
        assert!((q.end() - C::new(1.0, 0.0)).norm() < 1e-15);
        assert!(((q.map)(std::f64::consts::FRAC_PI_2) - C::new(0.0, 1.0)).norm() < 1e-15);
        assert!((p.length() - std::f64::consts::PI).abs() < 1e-12);
        let l = build_semicircle(2.0, 0.5, Half::Lower, Orientation::CounterClockwise).unwrap();
        assert!((l.pieces[0].start() - C::new(1.5, 0.0)).norm() < 1e-15);
        assert!(
            ((l.pieces[0].map)(std::f64::consts::FRAC_PI_2) - C::new(2.0, -0.5)).norm() < 1e-15
        );
    }

    #[test]
    fn real_saddle_minus_curve() {
        let opts = SteepestOptions::with_defaults(4.0, 0.5);
        let (spec, path) = build_steepest(C::new(1.0, 0.0), Side::Minus, &opts).unwrap();
        assert_eq!(spec.nu, 0.0);
        let curve = &path.pieces[0];
        assert!(curve.start().norm() < 1e-15);
        for (_, _, zeta) in path.sample(200, 5.0).iter().take(200) {
            let x = zeta.re;
            let want = x * ((1.0 - x / 3.0) / (1.0 - x)).sqrt();
            assert!((zeta.im - want).abs() < 1e-13);
        }
    }

    #[test]
    fn steepest_residuals_vanish() {
        let z = C::new(1.0, -0.05).powu(2);
        let opts = SteepestOptions::with_defaults(4.0, 0.5);
        for side in [Side::Plus, Side::Minus] {
            let (_, path) = build_steepest(z, side, &opts).unwrap();
            let curve = ContourPath::new(vec![path.pieces[0].clone()]);
            for (_, _, zeta) in curve.sample(200, 1.0) {
                assert!(steepest_residual(z, side, zeta).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn theta0_exceeds_t0_over_sqrt3() {
        for (g, n) in [
            (1.0f64, 0.0f64),
            (1.0, 0.02),
            (0.8, 0.3),
            (1.2, 0.5),
            (0.3, 0.1),
        ] {
            for eps in [0.01, 0.05] {
                let (t0, th) = select_t0_theta0(g, n, eps);
                assert!(th > t0 / 3f64.sqrt(), "gamma {g} nu {n}");
                assert!(th > n);
                if n >= eps {
                    assert!((th - n * (1.0 + eps)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn region_checks() {
        let strip = Region::Strip(1.0);
        assert!(validate_in_region(&build_gamma_alpha(0.5, 1.0, 4.0).unwrap(), &strip).0);
        let (ok, at) = validate_in_region(&build_gamma_alpha(1.5, 1.0, 4.0).unwrap(), &strip);
        assert!(!ok);
        let at = at.unwrap();
        assert!((at - C::new(-1.0, -1.5)).norm() < 1e-12);
        let z = C::new(1.0, -0.3).powu(2);
        let opts = SteepestOptions {
            delta_plus: None,
            eps: 0.05,
            k0: 1.0,
        };
        let (_, path) = build_steepest(z, Side::Minus, &opts).unwrap();
        let k_path = path.shifted(-principal_sqrt(z));
        assert!(validate_in_region(&k_path, &strip).0);
    }

    #[test]
    fn csv_dump_has_header() {
        let p = build_c_pm(0.3, 4.0).unwrap();
        let csv = p.to_csv(4, 2.0);
        assert!(csv.starts_with("t,re_k,im_k\n"));
        assert_eq!(csv.lines().count(), 1 + 4 * 4);
    }
}
