//! Scalar abstraction shared by every expansion routine.
//!
//! Three scalar types implement [`Scalar`]:
//!
//! * [`rug::Rational`] for error-free arithmetic,
//! * [`rug::Float`] for arbitrary (but fixed) binary precision,
//! * `f64` for the Monte-Carlo and eigenvalue layers.
//!
//! Every constructor takes a context ([`Scalar::Ctx`]) so that constants such
//! as recurrence ratios are created at the working precision of the caller.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Smallest digit count accepted for [`ScalarMode::HighPrecisionFloat`].
pub const MIN_FLOAT_DIGITS: u32 = 16;

/// Default digit budget, used both for float mode and for rational weight
/// approximations.
pub const DEFAULT_DIGITS: u32 = 50;

#[derive(Debug, Error, PartialEq)]
pub enum ScalarError {
    #[error("high-precision mode needs at least {MIN_FLOAT_DIGITS} digits, got {0}")]
    TooFewDigits(u32),
    #[error("cannot parse {0:?} as an exact rational number")]
    Parse(String),
    #[error("value {0} is not finite")]
    NotFinite(f64),
}

/// Arithmetic mode for the algebraic pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ScalarMode {
    ExactRational,
    HighPrecisionFloat { digits: u32 },
}

impl Default for ScalarMode {
    fn default() -> Self {
        ScalarMode::HighPrecisionFloat { digits: DEFAULT_DIGITS }
    }
}

impl ScalarMode {
    pub fn float(digits: u32) -> Result<Self, ScalarError> {
        if digits < MIN_FLOAT_DIGITS {
            return Err(ScalarError::TooFewDigits(digits));
        }
        Ok(ScalarMode::HighPrecisionFloat { digits })
    }

    pub fn validate(&self) -> Result<(), ScalarError> {
        match *self {
            ScalarMode::HighPrecisionFloat { digits } if digits < MIN_FLOAT_DIGITS => {
                Err(ScalarError::TooFewDigits(digits))
            }
            _ => Ok(()),
        }
    }

    /// Decimal digits carried by the mode. Exact mode reports the digit
    /// budget used for irrational weights.
    pub fn digits(&self) -> u32 {
        match *self {
            ScalarMode::ExactRational => DEFAULT_DIGITS,
            ScalarMode::HighPrecisionFloat { digits } => digits,
        }
    }

    /// Relative noise floor below which a negative coefficient is treated
    /// as zero: `10^-(digits-20)` (so `1e-30` at 50 digits), zero when exact.
    pub fn default_noise_floor(&self) -> f64 {
        match *self {
            ScalarMode::ExactRational => 0.0,
            ScalarMode::HighPrecisionFloat { digits } => {
                let exponent = (digits.saturating_sub(20)).max(digits / 2);
                format!("1e-{exponent}").parse().expect("valid literal")
            }
        }
    }
}

/// Binary precision of a [`rug::Float`] context.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Precision(pub u32);

impl Precision {
    /// Bits needed for `digits` decimal digits plus a few guard bits.
    pub fn from_digits(digits: u32) -> Self {
        let bits = (f64::from(digits) * std::f64::consts::LOG2_10).ceil() as u32;
        Precision(bits + 8)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn digits(self) -> f64 {
        f64::from(self.0) * std::f64::consts::LOG10_2
    }
}

/// Ordered field element with the operations the recurrences need.
///
/// Arithmetic is expressed as owned-left, borrowed-right so that the
/// multiprecision types avoid needless copies.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialOrd
    + Send
    + Sync
    + Neg<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
    + for<'a> Div<&'a Self, Output = Self>
    + for<'a> AddAssign<&'a Self>
    + for<'a> SubAssign<&'a Self>
    + for<'a> MulAssign<&'a Self>
    + for<'a> DivAssign<&'a Self>
{
    type Ctx: Copy + fmt::Debug + Send + Sync;

    fn context(&self) -> Self::Ctx;

    fn from_rational(v: &Rational, ctx: Self::Ctx) -> Self;

    /// Exact binary value of `v` (rounded to the context in float modes).
    fn from_f64(v: f64, ctx: Self::Ctx) -> Self;

    fn from_mpfr(v: &Float, ctx: Self::Ctx) -> Self;

    fn to_mpfr(&self, prec: u32) -> Float;

    fn to_f64(&self) -> f64;

    /// Precision (bits) at which irrational inputs should be computed before
    /// being converted into this scalar type.
    fn working_precision(ctx: Self::Ctx) -> u32;

    /// Significant decimal digits the type can hold; `None` when exact.
    fn digit_budget(ctx: Self::Ctx) -> Option<f64>;

    fn to_decimal_string(&self) -> String;

    fn from_ratio(num: i64, den: i64, ctx: Self::Ctx) -> Self {
        Self::from_rational(&Rational::from((num, den)), ctx)
    }

    fn from_int(v: i64, ctx: Self::Ctx) -> Self {
        Self::from_rational(&Rational::from(v), ctx)
    }

    fn zero(ctx: Self::Ctx) -> Self {
        Self::from_int(0, ctx)
    }

    fn one(ctx: Self::Ctx) -> Self {
        Self::from_int(1, ctx)
    }

    fn is_zero(&self) -> bool;

    fn is_negative(&self) -> bool;

    fn abs(&self) -> Self;

    fn cmp_abs(&self, other: &Self) -> Ordering {
        self.abs().partial_cmp(&other.abs()).unwrap_or(Ordering::Equal)
    }

    /// `log10(|self|)`, `-inf` for zero.
    fn log10_abs(&self) -> f64 {
        self.to_mpfr(64).abs().log10().to_f64()
    }
}

/// Scalars with square roots, needed by the eigen-solvers.
pub trait Real: Scalar {
    fn sqrt(&self) -> Self;

    /// Unit round-off of the context.
    fn epsilon(ctx: Self::Ctx) -> Self;
}

impl Scalar for Rational {
    type Ctx = ();

    fn context(&self) {}

    fn from_rational(v: &Rational, _: ()) -> Self {
        v.clone()
    }

    fn from_f64(v: f64, _: ()) -> Self {
        Rational::from_f64(v).expect("finite f64")
    }

    fn from_mpfr(v: &Float, _: ()) -> Self {
        v.to_rational().expect("finite float")
    }

    fn to_mpfr(&self, prec: u32) -> Float {
        Float::with_val(prec, self)
    }

    fn to_f64(&self) -> f64 {
        Rational::to_f64(self)
    }

    fn working_precision(_: ()) -> u32 {
        Precision::from_digits(2 * DEFAULT_DIGITS).bits()
    }

    fn digit_budget(_: ()) -> Option<f64> {
        None
    }

    fn to_decimal_string(&self) -> String {
        self.to_string()
    }

    fn is_zero(&self) -> bool {
        self.cmp0() == Ordering::Equal
    }

    fn is_negative(&self) -> bool {
        self.cmp0() == Ordering::Less
    }

    fn abs(&self) -> Self {
        self.clone().abs()
    }

    fn cmp_abs(&self, other: &Self) -> Ordering {
        Rational::cmp_abs(self, other)
    }
}

impl Scalar for Float {
    type Ctx = Precision;

    fn context(&self) -> Precision {
        Precision(self.prec())
    }

    fn from_rational(v: &Rational, ctx: Precision) -> Self {
        Float::with_val(ctx.0, v)
    }

    fn from_f64(v: f64, ctx: Precision) -> Self {
        Float::with_val(ctx.0, v)
    }

    fn from_mpfr(v: &Float, ctx: Precision) -> Self {
        Float::with_val(ctx.0, v)
    }

    fn to_mpfr(&self, prec: u32) -> Float {
        Float::with_val(prec, self)
    }

    fn to_f64(&self) -> f64 {
        Float::to_f64(self)
    }

    fn working_precision(ctx: Precision) -> u32 {
        ctx.0
    }

    fn digit_budget(ctx: Precision) -> Option<f64> {
        Some(ctx.digits())
    }

    fn to_decimal_string(&self) -> String {
        let digits = (self.context().digits().floor() as usize).max(1);
        self.to_string_radix(10, Some(digits))
    }

    fn from_int(v: i64, ctx: Precision) -> Self {
        Float::with_val(ctx.0, v)
    }

    fn is_zero(&self) -> bool {
        Float::is_zero(self)
    }

    fn is_negative(&self) -> bool {
        self.cmp0() == Some(Ordering::Less)
    }

    fn abs(&self) -> Self {
        self.clone().abs()
    }

    fn cmp_abs(&self, other: &Self) -> Ordering {
        Float::cmp_abs(self, other).unwrap_or(Ordering::Equal)
    }

    fn log10_abs(&self) -> f64 {
        self.clone().abs().log10().to_f64()
    }
}

impl Real for Float {
    fn sqrt(&self) -> Self {
        self.clone().sqrt()
    }

    fn epsilon(ctx: Precision) -> Self {
        Float::with_val(ctx.0, Float::i_exp(1, 1 - ctx.0 as i32))
    }
}

impl Scalar for f64 {
    type Ctx = ();

    fn context(&self) {}

    fn from_rational(v: &Rational, _: ()) -> Self {
        v.to_f64()
    }

    fn from_f64(v: f64, _: ()) -> Self {
        v
    }

    fn from_mpfr(v: &Float, _: ()) -> Self {
        v.to_f64()
    }

    fn to_mpfr(&self, prec: u32) -> Float {
        Float::with_val(prec, *self)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn working_precision(_: ()) -> u32 {
        f64::MANTISSA_DIGITS
    }

    fn digit_budget(_: ()) -> Option<f64> {
        Some(f64::from(f64::MANTISSA_DIGITS) * std::f64::consts::LOG10_2)
    }

    fn to_decimal_string(&self) -> String {
        format!("{self:e}")
    }

    fn from_ratio(num: i64, den: i64, _: ()) -> Self {
        num as f64 / den as f64
    }

    fn from_int(v: i64, _: ()) -> Self {
        v as f64
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    fn is_negative(&self) -> bool {
        *self < 0.0
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn log10_abs(&self) -> f64 {
        f64::abs(*self).log10()
    }
}

impl Real for f64 {
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }

    fn epsilon(_: ()) -> Self {
        f64::EPSILON
    }
}

/// Parses `"p/q"`, integers and decimal literals such as `"0.4"` or
/// `"-1.25e-3"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational, ScalarError> {
    let err = || ScalarError::Parse(text.to_string());
    let s = text.trim();
    if s.is_empty() {
        return Err(err());
    }
    if s.contains('/') {
        return Rational::from_str(s).map_err(|_| err());
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp: i64 = s[pos + 1..].parse().map_err(|_| err())?;
            (&s[..pos], exp)
        }
        None => (s, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let digits = format!("{int_part}{frac_part}");
    let numer = Integer::from_str(&digits).map_err(|_| err())?;
    let scale = exponent - frac_part.len() as i64;
    let pow = Integer::from(Integer::u_pow_u(
        10,
        u32::try_from(scale.unsigned_abs()).map_err(|_| err())?,
    ));
    let mut value = if scale >= 0 {
        Rational::from(numer * pow)
    } else {
        Rational::from((numer, pow))
    };
    if negative {
        value = -value;
    }
    Ok(value)
}

/// Exact rational value of a finite `f64`.
pub fn rational_from_f64(v: f64) -> Result<Rational, ScalarError> {
    Rational::from_f64(v).ok_or(ScalarError::NotFinite(v))
}
