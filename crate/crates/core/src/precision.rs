//! Scalar types for the bound engine: plain `f64` and a double-double
//! extended type carrying about 32 significant decimal digits.
//!
//! The closed-form constants are written once against [`Real`] and
//! evaluated in either precision.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadratic::ratio_to_f64;

/// Numeric mode for reported constants and near-boundary comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    F64,
    Extended,
}

impl FromStr for Precision {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "f64" => Ok(Precision::F64),
            "extended" => Ok(Precision::Extended),
            other => Err(Error::Parse(format!(
                "precision must be f64 or extended, got {other:?}"
            ))),
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Precision::F64 => "f64",
            Precision::Extended => "extended",
        })
    }
}

pub trait Real:
    Copy
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn ln(self) -> Self;
    fn exp(self) -> Self;
    fn sqrt(self) -> Self;

    fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Real for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
}

/// Unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

const LN2: Dd = Dd {
    hi: std::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};
pub const DD_PI: Dd = Dd {
    hi: std::f64::consts::PI,
    lo: 1.224_646_799_147_353_2e-16,
};

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn renorm(a: f64, b: f64) -> Self {
        let (hi, lo) = quick_two_sum(a, b);
        Dd { hi, lo }
    }

    pub fn from_ratio(r: &BigRational) -> Self {
        let hi = ratio_to_f64(r);
        if !hi.is_finite() {
            return Dd::new(hi);
        }
        let rest = r - BigRational::from_float(hi).unwrap_or_else(BigRational::zero);
        Dd::renorm(hi, ratio_to_f64(&rest))
    }

    /// Exact rational value of `hi + lo`.
    pub fn to_ratio(self) -> BigRational {
        let h = BigRational::from_float(self.hi).unwrap_or_else(BigRational::zero);
        let l = BigRational::from_float(self.lo).unwrap_or_else(BigRational::zero);
        h + l
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    fn mul_pow2(self, k: i32) -> Self {
        let s = 2f64.powi(k);
        Dd {
            hi: self.hi * s,
            lo: self.lo * s,
        }
    }

    /// Decimal rendering with `digits` significant digits.
    pub fn to_sig_string(self, digits: usize) -> String {
        if !self.hi.is_finite() {
            return format!("{}", self.hi);
        }
        format_sig(&self.to_ratio(), digits)
    }
}

impl PartialEq for Dd {
    fn eq(&self, o: &Self) -> bool {
        self.hi == o.hi && self.lo == o.lo
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&o.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&o.lo),
            other => other,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        Dd::renorm(s, e + f)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        Dd::renorm(p, e + (self.hi * o.lo + self.lo * o.hi))
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self - o * Dd::new(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * Dd::new(q2);
        let q3 = r.hi / o.hi;
        Dd::renorm(q1, q2) + Dd::new(q3)
    }
}

impl Real for Dd {
    fn from_f64(x: f64) -> Self {
        Dd::new(x)
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Dd::new(self.hi.sqrt());
        }
        let a = self.hi.sqrt();
        let r = self - Dd::new(a) * Dd::new(a);
        Dd::renorm(a, r.hi * 0.5 / a)
    }

    fn exp(self) -> Self {
        if self.hi > 709.0 {
            return Dd::new(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Dd::ZERO;
        }
        let k = (self.hi / LN2.hi).round();
        let r = (self - LN2 * Dd::new(k)).mul_pow2(-10);
        // Taylor series of e^r − 1 for |r| ≤ 2^-11
        let mut term = r;
        let mut sum = r;
        for n in 2..=14 {
            term = term * r / Dd::new(n as f64);
            sum = sum + term;
        }
        // (1 + s)^2 − 1 = s(2 + s), keeps the small part exact
        for _ in 0..10 {
            sum = sum * (Dd::new(2.0) + sum);
        }
        (sum + Dd::ONE).mul_pow2(k as i32)
    }

    fn ln(self) -> Self {
        if self.hi <= 0.0 {
            return Dd::new(f64::NAN);
        }
        let mut y = Dd::new(self.hi.ln());
        for _ in 0..2 {
            y = y + self * (-y).exp() - Dd::ONE;
        }
        y
    }
}

impl fmt::Display for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_sig_string(30))
    }
}

/// Parses a decimal string (`-12.5e-3`, `3.14159`) or a fraction `p/q`
/// into an exact rational.
pub fn parse_decimal(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let err = || Error::Parse(format!("not a decimal number: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| err())?;
        let q: BigInt = q.trim().parse().map_err(|_| err())?;
        if q.is_zero() {
            return Err(err());
        }
        return Ok(BigRational::new(p, q));
    }
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| err())?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(err());
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let digits = format!("{int}{frac}");
    let mut num: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().map_err(|_| err())?
    };
    if neg {
        num = -num;
    }
    let e10 = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    Ok(if e10 >= 0 {
        BigRational::from_integer(num * ten.pow(e10 as u32))
    } else {
        BigRational::new(num, ten.pow((-e10) as u32))
    })
}

/// Formats a rational in scientific notation with `digits` significant digits.
pub fn format_sig(r: &BigRational, digits: usize) -> String {
    if r.is_zero() {
        return "0".into();
    }
    let neg = r.is_negative();
    let a = r.abs();
    let mut e10 = (crate::quadratic::ratio_ln_abs(&a) / std::f64::consts::LN_10).floor() as i32;
    let pow10 = |e: i32| -> BigRational {
        if e >= 0 {
            BigRational::from_integer(BigInt::from(10).pow(e as u32))
        } else {
            BigRational::new(BigInt::from(1), BigInt::from(10).pow((-e) as u32))
        }
    };
    // fix off-by-one from the float estimate
    while a >= pow10(e10 + 1) {
        e10 += 1;
    }
    while a < pow10(e10) {
        e10 -= 1;
    }
    let scaled = &a * pow10(digits as i32 - 1 - e10);
    let mut m = scaled.round().to_integer();
    if BigRational::from_integer(m.clone()) >= pow10(digits as i32) {
        m /= 10;
        e10 += 1;
    }
    let ds = m.to_string();
    let (lead, rest) = ds.split_at(1);
    let sign = if neg { "-" } else { "" };
    if rest.is_empty() {
        format!("{sign}{lead}e{e10}")
    } else {
        format!("{sign}{lead}.{rest}e{e10}")
    }
}
