//! Exponent-scaled complex arithmetic, the principal square root and the
//! complex error function.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive};

use crate::error::{Error, Result};

/// Floating point scalar accepted by the generic layers of the crate.
pub trait Real: Float + FloatConst + FromPrimitive + Debug + Send + Sync + 'static {}

impl Real for f32 {}
impl Real for f64 {}

#[inline]
pub(crate) fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).unwrap()
}

/// Scale differences above this many natural-log units drop the smaller addend.
pub const SHADOW_THRESHOLD: f64 = 800.0;

/// A complex number stored as `mantissa * exp(log_scale)`.
///
/// Nonzero values keep `|mantissa|` in `[1, e)`; zero is `0 * e^0`.
#[derive(Clone, Copy, Debug)]
pub struct ScaledComplex<T> {
    mantissa: Complex<T>,
    log_scale: T,
}

impl<T: Real> ScaledComplex<T> {
    pub fn zero() -> Self {
        Self {
            mantissa: Complex::new(T::zero(), T::zero()),
            log_scale: T::zero(),
        }
    }

    pub fn one() -> Self {
        Self {
            mantissa: Complex::new(T::one(), T::zero()),
            log_scale: T::zero(),
        }
    }

    /// Builds `m * exp(s)` and normalizes it.
    pub fn new(mantissa: Complex<T>, log_scale: T) -> Self {
        let r = mantissa.norm();
        if r == T::zero() {
            return Self::zero();
        }
        if !r.is_finite() || !log_scale.is_finite() {
            return Self {
                mantissa,
                log_scale,
            };
        }
        let mut n = r.ln().floor();
        let mut m = mantissa * (-n).exp();
        // rounding in ln/exp can leave |m| a hair outside [1, e)
        let a = m.norm();
        if a < T::one() {
            m = m * T::E();
            n = n - T::one();
        } else if a >= T::E() {
            m = m / T::E();
            n = n + T::one();
        }
        Self {
            mantissa: m,
            log_scale: log_scale + n,
        }
    }

    pub fn from_complex(c: Complex<T>) -> Self {
        Self::new(c, T::zero())
    }

    pub fn from_real(x: T) -> Self {
        Self::new(Complex::new(x, T::zero()), T::zero())
    }

    pub fn mantissa(&self) -> Complex<T> {
        self.mantissa
    }

    pub fn log_scale(&self) -> T {
        self.log_scale
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.re == T::zero() && self.mantissa.im == T::zero()
    }

    pub fn is_finite(&self) -> bool {
        self.mantissa.re.is_finite() && self.mantissa.im.is_finite() && self.log_scale.is_finite()
    }

    /// Plain complex value; overflows to infinity or underflows to zero when out of range.
    pub fn to_complex(&self) -> Complex<T> {
        if self.is_zero() {
            return self.mantissa;
        }
        self.mantissa * self.log_scale.exp()
    }

    /// `ln|x|`, or negative infinity for zero.
    pub fn ln_abs(&self) -> T {
        if self.is_zero() {
            T::neg_infinity()
        } else {
            self.mantissa.norm().ln() + self.log_scale
        }
    }

    /// `|x|` as a plain real; may overflow.
    pub fn abs(&self) -> T {
        if self.is_zero() {
            T::zero()
        } else {
            self.ln_abs().exp()
        }
    }

    pub fn arg(&self) -> T {
        self.mantissa.arg()
    }

    pub fn conj(&self) -> Self {
        Self {
            mantissa: self.mantissa.conj(),
            log_scale: self.log_scale,
        }
    }

    pub fn recip(&self) -> Self {
        Self::new(self.mantissa.inv(), -self.log_scale)
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        Self::new(self.mantissa * c, self.log_scale)
    }

    /// `|a - b| / max(|a|, |b|)`, zero when both vanish.
    pub fn relative_diff(&self, other: &Self) -> T {
        let d = *self - *other;
        if d.is_zero() {
            return T::zero();
        }
        let denom = self.ln_abs().max(other.ln_abs());
        (d.ln_abs() - denom).exp()
    }
}

/// Exact product of two scaled values.
pub fn scaled_mul<T: Real>(a: ScaledComplex<T>, b: ScaledComplex<T>) -> ScaledComplex<T> {
    if a.is_zero() || b.is_zero() {
        return ScaledComplex::zero();
    }
    ScaledComplex::new(a.mantissa * b.mantissa, a.log_scale + b.log_scale)
}

/// Sum of two scaled values; the flag reports that the smaller addend was shadowed.
pub fn scaled_add_flagged<T: Real>(
    a: ScaledComplex<T>,
    b: ScaledComplex<T>,
) -> (ScaledComplex<T>, bool) {
    if b.is_zero() {
        return (a, false);
    }
    if a.is_zero() {
        return (b, false);
    }
    let d = a.log_scale - b.log_scale;
    let limit = lit::<T>(SHADOW_THRESHOLD);
    if d > limit {
        return (a, true);
    }
    if d < -limit {
        return (b, true);
    }
    let s = a.log_scale.max(b.log_scale);
    let m = a.mantissa * (a.log_scale - s).exp() + b.mantissa * (b.log_scale - s).exp();
    (ScaledComplex::new(m, s), false)
}

pub fn scaled_add<T: Real>(a: ScaledComplex<T>, b: ScaledComplex<T>) -> ScaledComplex<T> {
    scaled_add_flagged(a, b).0
}

/// `exp(w)` without overflow: mantissa `e^{i Im w}`, scale `Re w`.
pub fn scaled_exp<T: Real>(w: Complex<T>) -> ScaledComplex<T> {
    ScaledComplex::new(Complex::new(w.im.cos(), w.im.sin()), w.re)
}

impl<T: Real> Add for ScaledComplex<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        scaled_add(self, rhs)
    }
}

impl<T: Real> Sub for ScaledComplex<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        scaled_add(self, -rhs)
    }
}

impl<T: Real> Neg for ScaledComplex<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            mantissa: -self.mantissa,
            log_scale: self.log_scale,
        }
    }
}

impl<T: Real> Mul for ScaledComplex<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        scaled_mul(self, rhs)
    }
}

impl<T: Real> Mul<Complex<T>> for ScaledComplex<T> {
    type Output = Self;
    fn mul(self, rhs: Complex<T>) -> Self {
        self.scale(rhs)
    }
}

impl<T: Real> Div for ScaledComplex<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        scaled_mul(self, rhs.recip())
    }
}

impl<T: Real> From<Complex<T>> for ScaledComplex<T> {
    fn from(c: Complex<T>) -> Self {
        Self::from_complex(c)
    }
}

/// Principal square root with cut on `(-inf, 0)`.
///
/// Points on the cut, including a negative real with a negative zero
/// imaginary part, return the limit from the upper half-plane.
pub fn principal_sqrt<T: Real>(z: Complex<T>) -> Complex<T> {
    let x = z.re;
    let y = z.im;
    if x == T::zero() && y == T::zero() {
        return Complex::new(T::zero(), T::zero());
    }
    let r = z.norm();
    let two = lit::<T>(2.0);
    let w = ((r + x.abs()) / two).sqrt();
    if x >= T::zero() {
        Complex::new(w, y / (two * w))
    } else if y == T::zero() {
        Complex::new(T::zero(), w)
    } else {
        Complex::new(y.abs() / (two * w), w.copysign(y))
    }
}

/// `principal_sqrt` that rejects the origin, for callers dividing by the root.
pub fn sqrt_nonzero<T: Real>(z: Complex<T>) -> Result<Complex<T>> {
    if z.re == T::zero() && z.im == T::zero() {
        return Err(Error::Domain(
            "square root of zero used as a divisor".into(),
        ));
    }
    Ok(principal_sqrt(z))
}

// Double-double arithmetic for the power series of erf.

#[derive(Clone, Copy, Debug)]
struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    Dd { hi: s, lo: e }
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd {
        hi: s,
        lo: b - (s - a),
    }
}

#[inline]
fn two_prod(a: f64, b: f64) -> Dd {
    let p = a * b;
    Dd {
        hi: p,
        lo: a.mul_add(b, -p),
    }
}

impl Dd {
    const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    fn from(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    fn add(self, o: Dd) -> Dd {
        let s = two_sum(self.hi, o.hi);
        let t = two_sum(self.lo, o.lo);
        let s = quick_two_sum(s.hi, s.lo + t.hi);
        quick_two_sum(s.hi, s.lo + t.lo)
    }

    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    fn mul(self, o: Dd) -> Dd {
        let p = two_prod(self.hi, o.hi);
        quick_two_sum(p.hi, p.lo + (self.hi * o.lo + self.lo * o.hi))
    }

    fn div_f64(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        let p = two_prod(q1, b);
        let s = two_sum(self.hi, -p.hi);
        let r = (s.hi + (s.lo - p.lo + self.lo)) / b;
        quick_two_sum(q1, r)
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

#[derive(Clone, Copy, Debug)]
struct DdComplex {
    re: Dd,
    im: Dd,
}

impl DdComplex {
    fn add(self, o: Self) -> Self {
        Self {
            re: self.re.add(o.re),
            im: self.im.add(o.im),
        }
    }

    fn mul(self, o: Self) -> Self {
        Self {
            re: self.re.mul(o.re).add(self.im.mul(o.im).neg()),
            im: self.re.mul(o.im).add(self.im.mul(o.re)),
        }
    }

    fn div_f64(self, b: f64) -> Self {
        Self {
            re: self.re.div_f64(b),
            im: self.im.div_f64(b),
        }
    }

    fn abs_approx(self) -> f64 {
        self.re.hi.hypot(self.im.hi)
    }
}

/// Radius inside which erf is summed from its power series.
pub const ERF_SERIES_RADIUS: f64 = 6.0;

const TWO_OVER_SQRT_PI: Dd = Dd {
    hi: 1.1283791670955126,
    lo: 1.533545961316588e-17,
};
const INV_SQRT_PI: f64 = 0.564_189_583_547_756_3;

fn erf_series(z: Complex<f64>) -> Complex<f64> {
    // erf z = 2/sqrt(pi) sum (-1)^n z^{2n+1} / (n! (2n+1)), summed in double-double so the
    // alternating cancellation for |z| up to the series radius stays below 1e-16 relative
    let zz = DdComplex {
        re: Dd::from(z.re),
        im: Dd::from(z.im),
    };
    let z2 = zz.mul(zz);
    let mz2 = DdComplex {
        re: z2.re.neg(),
        im: z2.im.neg(),
    };
    let mut t = zz;
    let mut sum = zz;
    let mut n = 1u32;
    let r2 = z.norm_sqr();
    loop {
        t = t.mul(mz2).div_f64(n as f64);
        let term = t.div_f64((2 * n + 1) as f64);
        sum = sum.add(term);
        let s = sum.abs_approx();
        if (n as f64) > r2 && term.abs_approx() <= 1e-34 * s.max(1e-300) {
            break;
        }
        n += 1;
        if n > 2000 {
            break;
        }
    }
    let c = DdComplex {
        re: TWO_OVER_SQRT_PI,
        im: Dd::ZERO,
    };
    let r = sum.mul(c);
    Complex::new(r.re.to_f64(), r.im.to_f64())
}

/// Faddeeva function `w(zeta) = e^{-zeta^2} erfc(-i zeta)` for `Im zeta >= 0` and
/// `|zeta| >= ERF_SERIES_RADIUS`, from the Laplace continued fraction.
fn faddeeva_cf(zeta: Complex<f64>) -> Complex<f64> {
    let terms = 80;
    let mut d = zeta;
    for n in (1..=terms).rev() {
        d = zeta - Complex::new(n as f64 * 0.5, 0.0) / d;
    }
    Complex::new(0.0, INV_SQRT_PI) / d
}

/// Entire extension of `(2/sqrt(pi)) int_0^z e^{-t^2} dt`.
///
/// May overflow for large `|z|` near the imaginary axis; see [`erf_complex_scaled`].
pub fn erf_complex<T: Real>(z: Complex<T>) -> Complex<T> {
    let zf = Complex::new(z.re.to_f64().unwrap(), z.im.to_f64().unwrap());
    let r = erf_f64(zf);
    Complex::new(lit(r.re), lit(r.im))
}

fn erf_f64(z: Complex<f64>) -> Complex<f64> {
    if z.norm() <= ERF_SERIES_RADIUS {
        return erf_series(z);
    }
    erf_large(z).to_complex()
}

fn erf_large(z: Complex<f64>) -> ScaledComplex<f64> {
    // erf z = 1 - e^{-z^2} w(iz) for Re z >= 0, odd symmetry otherwise
    let (zz, sign) = if z.re < 0.0 { (-z, -1.0) } else { (z, 1.0) };
    let w = faddeeva_cf(Complex::new(-zz.im, zz.re));
    let tail = scaled_exp(-zz * zz) * w;
    let v = ScaledComplex::one() - tail;
    v * Complex::new(sign, 0.0)
}

/// `erf` returned in scaled form, valid where `e^{-z^2}` overflows.
pub fn erf_complex_scaled<T: Real>(z: Complex<T>) -> ScaledComplex<T> {
    let zf = Complex::new(z.re.to_f64().unwrap(), z.im.to_f64().unwrap());
    let v = if zf.norm() <= ERF_SERIES_RADIUS {
        ScaledComplex::from_complex(erf_series(zf))
    } else {
        erf_large(zf)
    };
    ScaledComplex::new(
        Complex::new(lit(v.mantissa.re), lit(v.mantissa.im)),
        lit(v.log_scale),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;

    #[test]
    fn normalization_keeps_mantissa_in_range() {
        let x = ScaledComplex::new(C::new(123.0, -45.0), 2.5);
        let a = x.mantissa().norm();
        assert!((1.0..std::f64::consts::E).contains(&a));
        let back = x.to_complex();
        let want = C::new(123.0, -45.0) * 2.5f64.exp();
        assert!((back - want).norm() <= 1e-14 * want.norm());
    }

    #[test]
    fn zero_representation() {
        let z = ScaledComplex::<f64>::new(C::new(0.0, 0.0), 17.0);
        assert!(z.is_zero());
        assert_eq!(z.log_scale(), 0.0);
    }

    #[test]
    fn identity_and_inverse_products() {
        let one = ScaledComplex::<f64>::one();
        let p = scaled_mul(one, one);
        assert!(p.relative_diff(&one) < 1e-16);
        let two = ScaledComplex::new(C::new(1.0, 0.0), 2f64.ln());
        let half = ScaledComplex::new(C::new(1.0, 0.0), -(2f64.ln()));
        let p = scaled_mul(two, half);
        assert!((p.to_complex() - C::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn large_scales_multiply() {
        let a = ScaledComplex::new(C::from_polar(1.0, 0.3), 500.0);
        let b = ScaledComplex::new(C::from_polar(1.0, -1.1), 600.0);
        let p = a * b;
        assert!((p.ln_abs() - 1100.0).abs() < 1e-12);
        assert!((p.arg() - (-0.8)).abs() < 1e-14);
    }

    #[test]
    fn additive_identity_and_cancellation() {
        let x = ScaledComplex::new(C::new(1.5, 0.2), 30.0);
        assert!((x + ScaledComplex::zero()).relative_diff(&x) == 0.0);
        let a = ScaledComplex::new(C::new(1.0, 0.0), 100.0);
        let b = ScaledComplex::new(C::new(-1.0, 0.0), 100.0);
        assert!((a + b).is_zero());
    }

    #[test]
    fn sum_of_distant_scales() {
        let a = ScaledComplex::new(C::new(1.0, 0.0), 10.0);
        let b = ScaledComplex::<f64>::one();
        let s = a + b;
        let want = 10.0 + (1.0 + (-10f64).exp()).ln();
        assert!((s.ln_abs() - want).abs() < 1e-15);
    }

    #[test]
    fn shadowing_flag() {
        let a = ScaledComplex::new(C::new(1.0, 0.0), 1000.0);
        let b = ScaledComplex::new(C::new(1.0, 0.0), 100.0);
        let (s, shadowed) = scaled_add_flagged(a, b);
        assert!(shadowed);
        assert_eq!(s.log_scale(), a.log_scale());
        let (_, shadowed) = scaled_add_flagged(a, ScaledComplex::new(C::new(1.0, 0.0), 900.0));
        assert!(!shadowed);
    }

    #[test]
    fn exp_cases() {
        let e0 = scaled_exp(C::new(0.0, 0.0));
        assert!(e0.relative_diff(&ScaledComplex::one()) < 1e-16);
        let e1 = scaled_exp(C::new(0.0, std::f64::consts::PI));
        assert!((e1.to_complex() - C::new(-1.0, 0.0)).norm() < 1e-15);
        let e2 = scaled_exp(C::new(1000.0, 1.0));
        assert!((e2.ln_abs() - 1000.0).abs() < 1e-12);
        assert!((e2.arg() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sqrt_examples() {
        assert!((principal_sqrt(C::new(4.0, 0.0)) - C::new(2.0, 0.0)).norm() < 1e-15);
        assert!((principal_sqrt(C::new(0.0, 2.0)) - C::new(1.0, 1.0)).norm() < 1e-15);
        assert!((principal_sqrt(C::new(0.0, -2.0)) - C::new(1.0, -1.0)).norm() < 1e-15);
        assert!((principal_sqrt(C::new(-4.0, 0.0)) - C::new(0.0, 2.0)).norm() < 1e-15);
        assert!((principal_sqrt(C::new(-4.0, -0.0)) - C::new(0.0, 2.0)).norm() < 1e-15);
        assert!(sqrt_nonzero(C::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn erf_small_values() {
        assert_eq!(erf_complex(C::new(0.0, 0.0)), C::new(0.0, 0.0));
        let z = C::new(0.3, 0.7);
        assert!((erf_complex(-z) + erf_complex(z)).norm() < 1e-16);
        let v = erf_complex(C::new(0.0, 1.0));
        assert!(v.re.abs() < 1e-16);
        assert!((v.im - 1.650_425_758_797_542_8).abs() < 1e-15);
    }

    #[test]
    fn erf_known_points() {
        let v = erf_complex(C::new(1.0, 0.0));
        assert!((v.re - 0.842_700_792_949_714_9).abs() < 1e-15);
        let v = erf_complex(C::new(1.0, 1.0));
        let want = C::new(1.316_151_281_697_947_7, 0.190_453_469_237_834_7);
        assert!((v - want).norm() < 1e-14);
    }

    #[test]
    fn erf_branches_agree_at_switch() {
        for k in 0..24 {
            let th = k as f64 * std::f64::consts::PI / 12.0 + 0.05;
            let z = C::from_polar(ERF_SERIES_RADIUS, th);
            let a = erf_series(z);
            let b = erf_large(z).to_complex();
            assert!((a - b).norm() <= 2e-14 * a.norm(), "theta {th}: {a} vs {b}");
        }
    }

    #[test]
    fn erf_scaled_beyond_overflow() {
        let z = C::new(0.5, 30.0);
        let v = erf_complex_scaled(z);
        assert!(v.is_finite());
        // |erf(x+iy)| ~ e^{y^2 - x^2} / (sqrt(pi) |z|) far out
        let want = 30.0 * 30.0 - 0.25 - (std::f64::consts::PI.sqrt() * z.norm()).ln();
        assert!((v.ln_abs() - want).abs() < 1e-3);
    }

    #[test]
    fn f32_paths() {
        let s = ScaledComplex::<f32>::new(Complex::new(3.0, 4.0), 1.0);
        assert!((s.abs() - 5.0 * 1f32.exp()).abs() < 1e-4);
        let v = erf_complex(Complex::<f32>::new(0.0, 1.0));
        assert!((v.im - 1.650_425_8).abs() < 1e-6);
    }
}
