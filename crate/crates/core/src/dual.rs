//! Forward-mode dual number over `f64`.
//!
//! `Dual` carries a value and one directional derivative through every
//! operation of the pipeline. Seeding a single depth pixel with derivative 1
//! and running a loss yields the exact sensitivity of that loss to the pixel,
//! with no finite-difference step or cancellation. Order comparisons, `floor`
//! and friends act on the value part, so branch decisions (masks, per-pixel
//! minima, bilinear cells) match the plain `f64` evaluation everywhere the
//! function is differentiable.

use std::fmt;
use std::num::FpCategory;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, RemAssign, Sub, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, Num, NumCast, One, ToPrimitive, Zero};

use crate::scalar::Real;

/// Value plus one directional derivative.
#[derive(Clone, Copy, PartialEq, Default)]
pub struct Dual {
    /// Value part.
    pub v: f64,
    /// Derivative part.
    pub d: f64,
}

impl Dual {
    #[inline]
    pub fn new(v: f64, d: f64) -> Self {
        Dual { v, d }
    }

    /// A constant: derivative zero.
    #[inline]
    pub fn constant(v: f64) -> Self {
        Dual { v, d: 0.0 }
    }

    /// The seed variable: derivative one.
    #[inline]
    pub fn variable(v: f64) -> Self {
        Dual { v, d: 1.0 }
    }
}

impl fmt::Debug for Dual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+{}d", self.v, self.d)
    }
}

impl fmt::Display for Dual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.v)
    }
}

impl PartialOrd for Dual {
    #[inline]
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        self.v.partial_cmp(&other.v)
    }
}

impl Add for Dual {
    type Output = Dual;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Dual::new(self.v + rhs.v, self.d + rhs.d)
    }
}

impl Sub for Dual {
    type Output = Dual;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Dual::new(self.v - rhs.v, self.d - rhs.d)
    }
}

impl Mul for Dual {
    type Output = Dual;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        Dual::new(self.v * rhs.v, self.d * rhs.v + self.v * rhs.d)
    }
}

impl Div for Dual {
    type Output = Dual;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        Dual::new(
            self.v / rhs.v,
            (self.d * rhs.v - self.v * rhs.d) / (rhs.v * rhs.v),
        )
    }
}

impl Rem for Dual {
    type Output = Dual;
    #[inline]
    fn rem(self, rhs: Self) -> Self {
        // d(a mod b) = da - floor(a/b) db almost everywhere
        Dual::new(self.v % rhs.v, self.d - (self.v / rhs.v).floor() * rhs.d)
    }
}

impl Neg for Dual {
    type Output = Dual;
    #[inline]
    fn neg(self) -> Self {
        Dual::new(-self.v, -self.d)
    }
}

impl AddAssign for Dual {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}
impl SubAssign for Dual {
    #[inline]
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}
impl MulAssign for Dual {
    #[inline]
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}
impl DivAssign for Dual {
    #[inline]
    fn div_assign(&mut self, rhs: Self) {
        *self = *self / rhs;
    }
}
impl RemAssign for Dual {
    #[inline]
    fn rem_assign(&mut self, rhs: Self) {
        *self = *self % rhs;
    }
}

impl Zero for Dual {
    #[inline]
    fn zero() -> Self {
        Dual::constant(0.0)
    }
    #[inline]
    fn is_zero(&self) -> bool {
        self.v == 0.0 && self.d == 0.0
    }
}

impl One for Dual {
    #[inline]
    fn one() -> Self {
        Dual::constant(1.0)
    }
}

impl Num for Dual {
    type FromStrRadixErr = <f64 as Num>::FromStrRadixErr;
    fn from_str_radix(str: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        f64::from_str_radix(str, radix).map(Dual::constant)
    }
}

impl ToPrimitive for Dual {
    fn to_i64(&self) -> Option<i64> {
        self.v.to_i64()
    }
    fn to_u64(&self) -> Option<u64> {
        self.v.to_u64()
    }
    fn to_f64(&self) -> Option<f64> {
        Some(self.v)
    }
}

impl NumCast for Dual {
    fn from<T: ToPrimitive>(n: T) -> Option<Self> {
        n.to_f64().map(Dual::constant)
    }
}

impl FromPrimitive for Dual {
    fn from_i64(n: i64) -> Option<Self> {
        Some(Dual::constant(n as f64))
    }
    fn from_u64(n: u64) -> Option<Self> {
        Some(Dual::constant(n as f64))
    }
    fn from_f64(n: f64) -> Option<Self> {
        Some(Dual::constant(n))
    }
}

/// Unary chain rule helper: given value f(v) and f'(v), propagate.
#[inline]
fn chain(x: Dual, value: f64, deriv: f64) -> Dual {
    Dual::new(value, deriv * x.d)
}

impl Float for Dual {
    fn nan() -> Self {
        Dual::constant(f64::NAN)
    }
    fn infinity() -> Self {
        Dual::constant(f64::INFINITY)
    }
    fn neg_infinity() -> Self {
        Dual::constant(f64::NEG_INFINITY)
    }
    fn neg_zero() -> Self {
        Dual::constant(-0.0)
    }
    fn min_value() -> Self {
        Dual::constant(f64::MIN)
    }
    fn min_positive_value() -> Self {
        Dual::constant(f64::MIN_POSITIVE)
    }
    fn max_value() -> Self {
        Dual::constant(f64::MAX)
    }
    fn is_nan(self) -> bool {
        self.v.is_nan()
    }
    fn is_infinite(self) -> bool {
        self.v.is_infinite()
    }
    fn is_finite(self) -> bool {
        self.v.is_finite() && self.d.is_finite()
    }
    fn is_normal(self) -> bool {
        self.v.is_normal()
    }
    fn classify(self) -> FpCategory {
        self.v.classify()
    }
    fn floor(self) -> Self {
        Dual::constant(self.v.floor())
    }
    fn ceil(self) -> Self {
        Dual::constant(self.v.ceil())
    }
    fn round(self) -> Self {
        Dual::constant(self.v.round())
    }
    fn trunc(self) -> Self {
        Dual::constant(self.v.trunc())
    }
    fn fract(self) -> Self {
        Dual::new(self.v.fract(), self.d)
    }
    fn abs(self) -> Self {
        if self.v < 0.0 {
            -self
        } else {
            self
        }
    }
    fn signum(self) -> Self {
        Dual::constant(self.v.signum())
    }
    fn is_sign_positive(self) -> bool {
        self.v.is_sign_positive()
    }
    fn is_sign_negative(self) -> bool {
        self.v.is_sign_negative()
    }
    fn mul_add(self, a: Self, b: Self) -> Self {
        self * a + b
    }
    fn recip(self) -> Self {
        Dual::one() / self
    }
    fn powi(self, n: i32) -> Self {
        chain(self, self.v.powi(n), n as f64 * self.v.powi(n - 1))
    }
    fn powf(self, n: Self) -> Self {
        // general case: d(a^b) = a^b (b'·ln a + b a'/a)
        let value = self.v.powf(n.v);
        let dv = if n.d == 0.0 {
            n.v * self.v.powf(n.v - 1.0) * self.d
        } else {
            value * (n.d * self.v.ln() + n.v * self.d / self.v)
        };
        Dual::new(value, dv)
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        Dual::new(s, self.d / (2.0 * s))
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        chain(self, e, e)
    }
    fn exp2(self) -> Self {
        let e = self.v.exp2();
        chain(self, e, e * std::f64::consts::LN_2)
    }
    fn ln(self) -> Self {
        chain(self, self.v.ln(), 1.0 / self.v)
    }
    fn log(self, base: Self) -> Self {
        self.ln() / base.ln()
    }
    fn log2(self) -> Self {
        chain(self, self.v.log2(), 1.0 / (self.v * std::f64::consts::LN_2))
    }
    fn log10(self) -> Self {
        chain(self, self.v.log10(), 1.0 / (self.v * std::f64::consts::LN_10))
    }
    fn max(self, other: Self) -> Self {
        if self.v >= other.v {
            self
        } else {
            other
        }
    }
    fn min(self, other: Self) -> Self {
        if self.v <= other.v {
            self
        } else {
            other
        }
    }
    fn abs_sub(self, other: Self) -> Self {
        if self.v <= other.v {
            Dual::zero()
        } else {
            self - other
        }
    }
    fn cbrt(self) -> Self {
        let c = self.v.cbrt();
        chain(self, c, 1.0 / (3.0 * c * c))
    }
    fn hypot(self, other: Self) -> Self {
        (self * self + other * other).sqrt()
    }
    fn sin(self) -> Self {
        chain(self, self.v.sin(), self.v.cos())
    }
    fn cos(self) -> Self {
        chain(self, self.v.cos(), -self.v.sin())
    }
    fn tan(self) -> Self {
        let c = self.v.cos();
        chain(self, self.v.tan(), 1.0 / (c * c))
    }
    fn asin(self) -> Self {
        chain(self, self.v.asin(), 1.0 / (1.0 - self.v * self.v).sqrt())
    }
    fn acos(self) -> Self {
        chain(self, self.v.acos(), -1.0 / (1.0 - self.v * self.v).sqrt())
    }
    fn atan(self) -> Self {
        chain(self, self.v.atan(), 1.0 / (1.0 + self.v * self.v))
    }
    fn atan2(self, other: Self) -> Self {
        let denom = self.v * self.v + other.v * other.v;
        Dual::new(
            self.v.atan2(other.v),
            (other.v * self.d - self.v * other.d) / denom,
        )
    }
    fn sin_cos(self) -> (Self, Self) {
        (self.sin(), self.cos())
    }
    fn exp_m1(self) -> Self {
        chain(self, self.v.exp_m1(), self.v.exp())
    }
    fn ln_1p(self) -> Self {
        chain(self, self.v.ln_1p(), 1.0 / (1.0 + self.v))
    }
    fn sinh(self) -> Self {
        chain(self, self.v.sinh(), self.v.cosh())
    }
    fn cosh(self) -> Self {
        chain(self, self.v.cosh(), self.v.sinh())
    }
    fn tanh(self) -> Self {
        let t = self.v.tanh();
        chain(self, t, 1.0 - t * t)
    }
    fn asinh(self) -> Self {
        chain(self, self.v.asinh(), 1.0 / (self.v * self.v + 1.0).sqrt())
    }
    fn acosh(self) -> Self {
        chain(self, self.v.acosh(), 1.0 / (self.v * self.v - 1.0).sqrt())
    }
    fn atanh(self) -> Self {
        chain(self, self.v.atanh(), 1.0 / (1.0 - self.v * self.v))
    }
    fn integer_decode(self) -> (u64, i16, i8) {
        self.v.integer_decode()
    }
    fn to_degrees(self) -> Self {
        self * Dual::constant(180.0 / std::f64::consts::PI)
    }
    fn to_radians(self) -> Self {
        self * Dual::constant(std::f64::consts::PI / 180.0)
    }
}

macro_rules! dual_consts {
    ($($name:ident),* $(,)?) => {
        $(fn $name() -> Self { Dual::constant(f64::$name()) })*
    };
}

impl FloatConst for Dual {
    dual_consts!(
        E,
        FRAC_1_PI,
        FRAC_1_SQRT_2,
        FRAC_2_PI,
        FRAC_2_SQRT_PI,
        FRAC_PI_2,
        FRAC_PI_3,
        FRAC_PI_4,
        FRAC_PI_6,
        FRAC_PI_8,
        LN_10,
        LN_2,
        LOG10_E,
        LOG2_E,
        PI,
        SQRT_2,
    );
}

impl Real for Dual {
    #[inline]
    fn to_f64_value(self) -> f64 {
        self.v
    }
}
