//! Exact arithmetic in the ring of integers of an imaginary quadratic field.
//!
//! For squarefree `D > 0` the ring of integers of `Q(√−D)` is `Z + Zω` with
//! `ω = h + l√−D`, where `(h, l) = (0, 1)` when `D ≡ 1, 2 (mod 4)` and
//! `(h, l) = (1/2, 1/2)` when `D ≡ 3 (mod 4)`. The map
//! `u + vω ↦ (u + vh, v·l·√D)` identifies the ring with a planar lattice of
//! covolume `√D / 2^{2h}`.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An imaginary quadratic field `Q(√−D)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "FieldSpecRepr", into = "FieldSpecRepr")]
pub struct FieldSpec {
    d: u64,
}

#[derive(Serialize, Deserialize)]
struct FieldSpecRepr {
    #[serde(rename = "D")]
    d: u64,
    #[serde(default, skip_deserializing)]
    h: String,
    #[serde(default, skip_deserializing)]
    l: String,
}

impl TryFrom<FieldSpecRepr> for FieldSpec {
    type Error = Error;
    fn try_from(r: FieldSpecRepr) -> Result<Self> {
        FieldSpec::new(r.d)
    }
}

impl From<FieldSpec> for FieldSpecRepr {
    fn from(s: FieldSpec) -> Self {
        FieldSpecRepr {
            d: s.d,
            h: s.h().to_string(),
            l: s.l().to_string(),
        }
    }
}

fn is_squarefree(mut n: u64) -> bool {
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return false;
            }
        }
        p += 1;
    }
    true
}

impl FieldSpec {
    /// Validates `D` (positive, squarefree, hence `D ≢ 0 mod 4`).
    pub fn new(d: u64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParams("D must be a positive integer".into()));
        }
        if d.is_multiple_of(4) {
            return Err(Error::InvalidParams(format!(
                "D = {d} must satisfy D ≢ 0 (mod 4)"
            )));
        }
        if !is_squarefree(d) {
            return Err(Error::InvalidParams(format!("D = {d} must be squarefree")));
        }
        Ok(FieldSpec { d })
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    fn is_half(&self) -> bool {
        self.d % 4 == 3
    }

    pub fn h(&self) -> Rational64 {
        if self.is_half() {
            Rational64::new(1, 2)
        } else {
            Rational64::zero()
        }
    }

    pub fn l(&self) -> Rational64 {
        if self.is_half() {
            Rational64::new(1, 2)
        } else {
            Rational64::one()
        }
    }

    /// The exponent in the Minkowski radius, always `1 − h`.
    pub fn tau(&self) -> Rational64 {
        Rational64::one() - self.h()
    }

    pub fn h_f64(&self) -> f64 {
        if self.is_half() {
            0.5
        } else {
            0.0
        }
    }

    pub fn l_f64(&self) -> f64 {
        if self.is_half() {
            0.5
        } else {
            1.0
        }
    }

    pub fn tau_f64(&self) -> f64 {
        1.0 - self.h_f64()
    }

    /// Trace of ω (`2h`).
    fn trace(&self) -> i64 {
        if self.is_half() {
            1
        } else {
            0
        }
    }

    /// Norm of ω (`h² + l²D`), an integer for squarefree `D`.
    fn omega_norm(&self) -> i64 {
        if self.is_half() {
            ((self.d + 1) / 4) as i64
        } else {
            self.d as i64
        }
    }

    /// Imaginary part of ω, `l·√D`.
    pub fn omega_im(&self) -> f64 {
        self.l_f64() * (self.d as f64).sqrt()
    }

    pub fn omega(&self) -> Complex64 {
        Complex64::new(self.h_f64(), self.omega_im())
    }

    pub fn mul(&self, x: &RingInt, y: &RingInt) -> RingInt {
        let t = BigInt::from(self.trace());
        let n = BigInt::from(self.omega_norm());
        let vv = &x.v * &y.v;
        RingInt {
            u: &x.u * &y.u - &n * &vv,
            v: &x.u * &y.v + &y.u * &x.v + &t * &vv,
        }
    }

    /// Exact squared modulus `(u + vh)² + v²l²D`, an integer.
    pub fn norm(&self, x: &RingInt) -> BigInt {
        &x.u * &x.u
            + BigInt::from(self.trace()) * &x.u * &x.v
            + BigInt::from(self.omega_norm()) * &x.v * &x.v
    }

    pub fn conj(&self, x: &RingInt) -> RingInt {
        RingInt {
            u: &x.u + BigInt::from(self.trace()) * &x.v,
            v: -&x.v,
        }
    }

    /// Exact quotient `x / y`, or `None` when it does not lie in the ring.
    pub fn exact_div(&self, x: &RingInt, y: &RingInt) -> Option<RingInt> {
        let n = self.norm(y);
        if n.is_zero() {
            return None;
        }
        let p = self.mul(x, &self.conj(y));
        let (qu, ru) = p.u.div_rem(&n);
        let (qv, rv) = p.v.div_rem(&n);
        if ru.is_zero() && rv.is_zero() {
            Some(RingInt { u: qu, v: qv })
        } else {
            None
        }
    }

    pub fn mul_q(&self, x: &QuadRational, y: &QuadRational) -> QuadRational {
        let t = BigRational::from_integer(BigInt::from(self.trace()));
        let n = BigRational::from_integer(BigInt::from(self.omega_norm()));
        let yy = &x.y * &y.y;
        QuadRational {
            x: &x.x * &y.x - &n * &yy,
            y: &x.x * &y.y + &y.x * &x.y + &t * &yy,
        }
    }

    /// Lattice point of `u + vω` with small coordinates.
    pub fn embed_small(&self, u: i64, v: i64) -> Complex64 {
        Complex64::new(
            u as f64 + v as f64 * self.h_f64(),
            v as f64 * self.omega_im(),
        )
    }

    /// Covering radius bound `√(1 + l²D)/2` of the lattice.
    pub fn covering_radius_bound(&self) -> f64 {
        let l = self.l_f64();
        (1.0 + l * l * self.d as f64).sqrt() / 2.0
    }

    /// All `(u, v)` with `|u + vω|² ≤ r2`, in lexicographic `(v, u)` order.
    pub fn disk_points(&self, r2: i64) -> Vec<(i64, i64)> {
        let mut out = Vec::new();
        if r2 < 0 {
            return out;
        }
        let t = self.trace();
        let n = self.omega_norm();
        // 4·norm = (2u + tv)² + (4n − t²)v², with 4n − t² = 4D or D.
        let disc = 4 * n - t * t;
        let vmax = ((4 * r2) as f64 / disc as f64).sqrt() as i64 + 1;
        for v in -vmax..=vmax {
            let rest = 4 * r2 - disc * v * v;
            if rest < 0 {
                continue;
            }
            let s = (rest as f64).sqrt() as i64 + 1;
            // |2u + tv| ≤ √rest
            let lo = (-s - t * v).div_euclid(2) - 1;
            let hi = (s - t * v).div_euclid(2) + 1;
            for u in lo..=hi {
                if u * u + t * u * v + n * v * v <= r2 {
                    out.push((u, v));
                }
            }
        }
        out
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q(sqrt(-{}))", self.d)
    }
}

/// An element `u + vω` of the ring of integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct RingInt {
    pub u: BigInt,
    pub v: BigInt,
}

impl RingInt {
    pub fn new(u: impl Into<BigInt>, v: impl Into<BigInt>) -> Self {
        RingInt {
            u: u.into(),
            v: v.into(),
        }
    }

    pub fn zero() -> Self {
        RingInt::default()
    }

    pub fn one() -> Self {
        RingInt::new(1, 0)
    }

    pub fn omega() -> Self {
        RingInt::new(0, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.u.is_zero() && self.v.is_zero()
    }

    pub fn scale(&self, k: &BigInt) -> RingInt {
        RingInt {
            u: &self.u * k,
            v: &self.v * k,
        }
    }

    pub fn to_small(&self) -> Option<(i64, i64)> {
        Some((self.u.to_i64()?, self.v.to_i64()?))
    }
}

impl From<(i64, i64)> for RingInt {
    fn from((u, v): (i64, i64)) -> Self {
        RingInt::new(u, v)
    }
}

impl fmt::Display for RingInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.v.is_zero() {
            write!(f, "{}", self.u)
        } else if self.u.is_zero() {
            write!(f, "{}w", self.v)
        } else if self.v.is_negative() {
            write!(f, "{}-{}w", self.u, -&self.v)
        } else {
            write!(f, "{}+{}w", self.u, self.v)
        }
    }
}

impl Add for &RingInt {
    type Output = RingInt;
    fn add(self, o: &RingInt) -> RingInt {
        RingInt {
            u: &self.u + &o.u,
            v: &self.v + &o.v,
        }
    }
}

impl Sub for &RingInt {
    type Output = RingInt;
    fn sub(self, o: &RingInt) -> RingInt {
        RingInt {
            u: &self.u - &o.u,
            v: &self.v - &o.v,
        }
    }
}

impl Neg for &RingInt {
    type Output = RingInt;
    fn neg(self) -> RingInt {
        RingInt {
            u: -&self.u,
            v: -&self.v,
        }
    }
}

impl Add for RingInt {
    type Output = RingInt;
    fn add(self, o: RingInt) -> RingInt {
        &self + &o
    }
}

impl Sub for RingInt {
    type Output = RingInt;
    fn sub(self, o: RingInt) -> RingInt {
        &self - &o
    }
}

impl Neg for RingInt {
    type Output = RingInt;
    fn neg(self) -> RingInt {
        -&self
    }
}

/// An element `x + yω` of the field, with rational coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct QuadRational {
    pub x: BigRational,
    pub y: BigRational,
}

impl QuadRational {
    pub fn new(x: BigRational, y: BigRational) -> Self {
        QuadRational { x, y }
    }

    pub fn rational(x: BigRational) -> Self {
        QuadRational {
            x,
            y: BigRational::zero(),
        }
    }

    pub fn zero() -> Self {
        QuadRational::default()
    }

    pub fn one() -> Self {
        QuadRational::rational(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn scale(&self, k: &BigRational) -> QuadRational {
        QuadRational {
            x: &self.x * k,
            y: &self.y * k,
        }
    }

    /// Least common multiple of the coordinate denominators.
    pub fn denom_lcm(&self) -> BigInt {
        self.x.denom().lcm(self.y.denom())
    }

    pub fn to_complex(&self, spec: &FieldSpec) -> Complex64 {
        let x = ratio_to_f64(&self.x);
        let y = ratio_to_f64(&self.y);
        Complex64::new(x + y * spec.h_f64(), y * spec.omega_im())
    }

    /// Squared modulus as an exact rational.
    pub fn abs_squared(&self, spec: &FieldSpec) -> BigRational {
        let t = BigRational::from_integer(BigInt::from(spec.trace()));
        let n = BigRational::from_integer(BigInt::from(spec.omega_norm()));
        &self.x * &self.x + t * &self.x * &self.y + n * &self.y * &self.y
    }

    /// Returns the ring element when both coordinates are integers.
    pub fn to_ring_int(&self) -> Option<RingInt> {
        if self.x.is_integer() && self.y.is_integer() {
            Some(RingInt {
                u: self.x.to_integer(),
                v: self.y.to_integer(),
            })
        } else {
            None
        }
    }
}

impl From<&RingInt> for QuadRational {
    fn from(r: &RingInt) -> Self {
        QuadRational {
            x: BigRational::from_integer(r.u.clone()),
            y: BigRational::from_integer(r.v.clone()),
        }
    }
}

impl Add for &QuadRational {
    type Output = QuadRational;
    fn add(self, o: &QuadRational) -> QuadRational {
        QuadRational {
            x: &self.x + &o.x,
            y: &self.y + &o.y,
        }
    }
}

impl Sub for &QuadRational {
    type Output = QuadRational;
    fn sub(self, o: &QuadRational) -> QuadRational {
        QuadRational {
            x: &self.x - &o.x,
            y: &self.y - &o.y,
        }
    }
}

/// Converts a rational to the nearest representable `f64`, including
/// numerators and denominators far beyond the `f64` range.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    if let Some(x) = r.to_f64() {
        if x.is_finite() && x != 0.0 {
            return x;
        }
    }
    let (m, e) = ratio_log2_split(r);
    m * 2f64.powi(e.clamp(-1100, 1100) as i32)
}

/// Natural logarithm of `|r|` for a nonzero rational of any size.
pub fn ratio_ln_abs(r: &BigRational) -> f64 {
    let (m, e) = ratio_log2_split(r);
    m.abs().ln() + e as f64 * std::f64::consts::LN_2
}

/// Natural logarithm of `|n|` for a nonzero integer of any size.
pub fn bigint_ln_abs(n: &BigInt) -> f64 {
    ratio_ln_abs(&BigRational::from_integer(n.clone()))
}

// Splits r = m · 2^e with m carrying ~60 significant bits.
fn ratio_log2_split(r: &BigRational) -> (f64, i64) {
    let num = r.numer();
    let den = r.denom();
    let nb = num.bits() as i64;
    let db = den.bits() as i64;
    let shift = nb - db - 60;
    let q = if shift >= 0 {
        num / (den << shift as usize)
    } else {
        (num << (-shift) as usize) / den
    };
    (q.to_f64().unwrap_or(0.0), shift)
}

/// The complex value `(u + vh) + i·v·l·√D`.
pub fn embed(x: &RingInt, spec: &FieldSpec) -> Complex64 {
    let u = x.u.to_f64().unwrap_or(f64::NAN);
    let v = x.v.to_f64().unwrap_or(f64::NAN);
    Complex64::new(u + v * spec.h_f64(), v * spec.omega_im())
}

/// Covolume `√D / 2^{2h}` of the embedded lattice.
pub fn lattice_determinant(spec: &FieldSpec) -> f64 {
    (spec.d() as f64).sqrt() / 2f64.powf(2.0 * spec.h_f64())
}

/// Squared distance from `z` to the lattice point `(u, v)`.
fn dist2(spec: &FieldSpec, z: Complex64, u: i64, v: i64) -> f64 {
    (z - spec.embed_small(u, v)).norm_sqr()
}

fn tie_key(u: i64, v: i64) -> (u64, u64, bool, bool) {
    (v.unsigned_abs(), u.unsigned_abs(), v < 0, u < 0)
}

/// Nearest lattice point with small coordinates.
pub fn nearest_small(z: Complex64, spec: &FieldSpec) -> (i64, i64) {
    let vr = z.im / spec.omega_im();
    let v0 = vr.floor() as i64;
    let mut best = (0i64, 0i64);
    let mut best_d = f64::INFINITY;
    for v in (v0 - 1)..=(v0 + 2) {
        let ur = z.re - v as f64 * spec.h_f64();
        let u0 = ur.floor() as i64;
        for u in (u0 - 1)..=(u0 + 2) {
            let d = dist2(spec, z, u, v);
            if d < best_d || (d == best_d && tie_key(u, v) < tie_key(best.0, best.1)) {
                best_d = d;
                best = (u, v);
            }
        }
    }
    best
}

/// A ring element minimizing `|z − β|`. Ties go to the smallest `(|v|, |u|)`,
/// then nonnegative `v`, then nonnegative `u`.
pub fn nearest_ring_int(z: Complex64, spec: &FieldSpec) -> RingInt {
    nearest_small(z, spec).into()
}

/// `|x|`, the complex modulus of the embedding.
pub fn abs_value(x: &RingInt, spec: &FieldSpec) -> f64 {
    let n = spec.norm(x);
    match n.to_f64() {
        Some(v) if v.is_finite() => v.sqrt(),
        _ => (bigint_ln_abs(&n) / 2.0).exp(),
    }
}

/// Exact `|x|²` as a rational.
pub fn abs_squared(x: &RingInt, spec: &FieldSpec) -> BigRational {
    BigRational::from_integer(spec.norm(x))
}
