//! Simultaneous Hermite–Padé forms `L_{k,j} = A_{k,0}Θ_j + A_{k,j}` with ring-integer coefficients.

pub mod fit;
pub mod linalg;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadratic::{ratio_ln_abs, FieldSpec, QuadRational, RingInt};

pub use fit::{
    fit_axioms, samples_from_tables, validate_envelopes, EnvelopeReport, EnvelopeSample,
    FitOptions, FitReport,
};
pub use linalg::{det_bareiss, nullspace_vector};

pub const DEFAULT_MAX_N: u64 = 40;

/// Built-in power series `f_j(z) = Σ c_{j,ν} z^ν`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesKind {
    /// `c_{j,ν} = j^ν`, i.e. `1/(1 − jz)`.
    Geometric,
    /// `c_{j,ν} = 1/(ν + j)`.
    Log,
    /// `c_{j,ν} = j^ν/ν!`, i.e. `e^{jz}`.
    Exp,
}

impl FromStr for SeriesKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "geometric" => Ok(SeriesKind::Geometric),
            "log" => Ok(SeriesKind::Log),
            "exp" => Ok(SeriesKind::Exp),
            _ => Err(Error::Usage(format!(
                "unknown series system {s:?}; expected geometric, log or exp"
            ))),
        }
    }
}

impl fmt::Display for SeriesKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SeriesKind::Geometric => "geometric",
            SeriesKind::Log => "log",
            SeriesKind::Exp => "exp",
        })
    }
}

impl SeriesKind {
    /// Coefficients `c_{j,0..len}` for `j ≥ 1`.
    pub fn coefficients(self, j: u64, len: usize) -> Vec<BigRational> {
        let jj = BigInt::from(j);
        let mut out = Vec::with_capacity(len);
        match self {
            SeriesKind::Geometric => {
                let mut p = BigInt::one();
                for _ in 0..len {
                    out.push(BigRational::from_integer(p.clone()));
                    p *= &jj;
                }
            }
            SeriesKind::Log => {
                for nu in 0..len as u64 {
                    out.push(BigRational::new(BigInt::one(), BigInt::from(nu + j)));
                }
            }
            SeriesKind::Exp => {
                let mut c = BigRational::one();
                for nu in 0..len as u64 {
                    out.push(c.clone());
                    c = c * BigRational::from_integer(jj.clone())
                        / BigRational::from_integer(BigInt::from(nu + 1));
                }
            }
        }
        out
    }

    /// Radius of convergence of `f_j`.
    pub fn radius(self, j: u64) -> f64 {
        match self {
            SeriesKind::Geometric => 1.0 / j as f64,
            SeriesKind::Log => 1.0,
            SeriesKind::Exp => f64::INFINITY,
        }
    }
}

/// `m` series from a built-in family evaluated at a field point `z_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSystem {
    pub kind: SeriesKind,
    pub m: usize,
    pub eval_point: QuadRational,
    pub spec: FieldSpec,
}

impl SeriesSystem {
    pub fn new(
        kind: SeriesKind,
        m: usize,
        eval_point: QuadRational,
        spec: FieldSpec,
    ) -> Result<Self> {
        if m == 0 {
            return Err(Error::Domain("m must be positive".into()));
        }
        if eval_point.is_zero() {
            return Err(Error::Domain("the evaluation point must be nonzero".into()));
        }
        let r = eval_point.to_complex(&spec).norm();
        for j in 1..=m as u64 {
            if r >= kind.radius(j) {
                return Err(Error::Domain(format!(
                    "|z0| = {r} lies outside the disk of convergence of f_{j} (radius {})",
                    kind.radius(j)
                )));
            }
        }
        Ok(SeriesSystem {
            kind,
            m,
            eval_point,
            spec,
        })
    }

    /// Partial sum of `f_j(z_0)` with the tail below `tol` relative.
    pub fn theta_rational(&self, j: u64, tol: f64) -> QuadRational {
        let mut sum = QuadRational::zero();
        let mut power = QuadRational::one();
        let mut len = 64;
        let mut done = 0;
        loop {
            let coeffs = self.kind.coefficients(j, len);
            for c in &coeffs[done..] {
                let term = power.scale(c);
                sum = &sum + &term;
                power = self.spec.mul_q(&power, &self.eval_point);
                let t = term.to_complex(&self.spec).norm();
                let s = sum.to_complex(&self.spec).norm();
                if t <= tol * s && t > 0.0 || done > 20_000 {
                    return sum;
                }
                done += 1;
            }
            len *= 2;
        }
    }

    pub fn theta(&self, j: u64) -> Complex64 {
        self.theta_rational(j, 1e-30).to_complex(&self.spec)
    }
}

/// The `(m+1)×(m+1)` coefficient table for an index vector `n̄`.
#[derive(Debug, Clone, PartialEq)]
pub struct FormTable {
    pub spec: FieldSpec,
    pub kind: SeriesKind,
    pub eval_point: QuadRational,
    pub n: Vec<u64>,
    /// `entries[k][j] = A_{k,j}`.
    pub entries: Vec<Vec<RingInt>>,
    pub thetas: Vec<Complex64>,
    /// `|L_{k,j}|` for `j = 1..m` (index `j − 1`).
    pub remainders: Vec<Vec<f64>>,
    pub log_remainders: Vec<Vec<f64>>,
    pub determinant: RingInt,
}

impl FormTable {
    pub fn m(&self) -> usize {
        self.n.len()
    }

    pub fn big_n(&self) -> u64 {
        self.n.iter().sum()
    }

    /// `log |A_{k,0}|`; `-inf` for a zero entry.
    pub fn log_abs_a0(&self, k: usize) -> f64 {
        log_abs_ring(&self.entries[k][0], &self.spec)
    }
}

pub fn log_abs_ring(x: &RingInt, spec: &FieldSpec) -> f64 {
    let n = spec.norm(x);
    if n.is_zero() {
        f64::NEG_INFINITY
    } else {
        ratio_ln_abs(&BigRational::from_integer(n)) / 2.0
    }
}

fn poly_eval(coeffs: &[BigInt], z: &QuadRational, spec: &FieldSpec) -> QuadRational {
    let mut acc = QuadRational::zero();
    for c in coeffs.iter().rev() {
        acc = spec.mul_q(&acc, z);
        acc.x += BigRational::from_integer(c.clone());
    }
    acc
}

fn poly_eval_q(coeffs: &[BigRational], z: &QuadRational, spec: &FieldSpec) -> QuadRational {
    let mut acc = QuadRational::zero();
    for c in coeffs.iter().rev() {
        acc = spec.mul_q(&acc, z);
        acc.x += c;
    }
    acc
}

/// Coefficient of `z^ν` in `P_0(z) f_j(z)`.
fn product_coeff(p0: &[BigInt], c: &[BigRational], nu: usize) -> BigRational {
    p0.iter()
        .enumerate()
        .filter(|(i, _)| *i <= nu)
        .map(|(i, p)| &c[nu - i] * BigRational::from_integer(p.clone()))
        .fold(BigRational::zero(), |a, b| a + b)
}

struct Row {
    p0: Vec<BigInt>,
}

/// Order `ρ_j` to which `P_{k,0}f_j − P_{k,j}` vanishes at `0` (`j` is 1-based).
pub fn vanishing_order(n: &[u64], k: usize, j: usize) -> u64 {
    let big_n: u64 = n.iter().sum();
    big_n + n[j - 1] + 1 - u64::from(k == j)
}

/// Polynomials of row `k`: primitive integer `P_{k,0}` and the truncations `P_{k,j}` of `P_{k,0}f_j` to degree `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct PadeRow {
    pub p0: Vec<BigInt>,
    pub pj: Vec<Vec<BigRational>>,
}

pub fn pade_row(kind: SeriesKind, n: &[u64], k: usize) -> Result<PadeRow> {
    if k > n.len() || n.contains(&0) {
        return Err(Error::Domain(format!("row {k} is undefined for n = {n:?}")));
    }
    let big_n: u64 = n.iter().sum();
    let order = (2 * big_n + 2) as usize;
    let coeffs: Vec<Vec<BigRational>> = (1..=n.len() as u64)
        .map(|j| kind.coefficients(j, order))
        .collect();
    let row = solve_row(n, k, &coeffs)?;
    let pj = coeffs
        .iter()
        .map(|c| {
            (0..=big_n as usize)
                .map(|nu| product_coeff(&row.p0, c, nu))
                .collect()
        })
        .collect();
    Ok(PadeRow { p0: row.p0, pj })
}

fn solve_row(n: &[u64], k: usize, coeffs: &[Vec<BigRational>]) -> Result<Row> {
    let big_n: u64 = n.iter().sum();
    let deg0 = if k == 0 { big_n } else { big_n - 1 } as usize;
    let mut rows = Vec::new();
    for j in 0..n.len() {
        let rho = vanishing_order(n, k, j + 1);
        for nu in (big_n + 1) as usize..rho as usize {
            rows.push(
                (0..=deg0)
                    .map(|i| {
                        if i <= nu {
                            coeffs[j][nu - i].clone()
                        } else {
                            BigRational::zero()
                        }
                    })
                    .collect(),
            );
        }
    }
    let p0 = if rows.is_empty() {
        vec![BigInt::one()]
    } else {
        nullspace_vector(&rows, deg0 + 1).map_err(|e| match e {
            Error::SingularSystem(msg) => {
                Error::SingularSystem(format!("row {k} of n = {n:?}: {msg}"))
            }
            other => other,
        })?
    };
    Ok(Row { p0 })
}

/// Remainder `(P_0 f_j − P_j)(z_0)`, summed until the tail is negligible.
fn remainder(sys: &SeriesSystem, p0: &[BigInt], j: u64, start: usize) -> QuadRational {
    let spec = &sys.spec;
    let z = &sys.eval_point;
    let mut power = QuadRational::one();
    for _ in 0..start {
        power = spec.mul_q(&power, z);
    }
    let mut len = start + 64;
    let mut coeffs = sys.kind.coefficients(j, len);
    let mut sum = QuadRational::zero();
    let mut nu = start;
    let mut last_check = f64::NAN;
    loop {
        if nu >= len {
            len *= 2;
            coeffs = sys.kind.coefficients(j, len);
        }
        let r = product_coeff(p0, &coeffs, nu);
        if !r.is_zero() {
            sum = &sum + &power.scale(&r);
        }
        power = spec.mul_q(&power, z);
        nu += 1;
        if (nu - start) % 16 == 0 {
            let v = sum.to_complex(spec).norm();
            let rel = ((v - last_check) / v).abs();
            if (v > 0.0 && rel < 1e-15) || nu - start > 20_000 {
                return sum;
            }
            last_check = v;
        }
    }
}

fn ring_content(row: &[QuadRational]) -> (BigInt, BigInt) {
    let l = row
        .iter()
        .fold(BigInt::one(), |acc, q| acc.lcm(&q.denom_lcm()));
    let g = row.iter().fold(BigInt::zero(), |acc, q| {
        let x = (&q.x * BigRational::from_integer(l.clone())).to_integer();
        let y = (&q.y * BigRational::from_integer(l.clone())).to_integer();
        acc.gcd(&x).gcd(&y)
    });
    (l, if g.is_zero() { BigInt::one() } else { g })
}

/// Builds the table for `n̄` with `N = Σ n_j ≤ max_n`.
pub fn hermite_pade(sys: &SeriesSystem, n: &[u64], max_n: u64) -> Result<FormTable> {
    if n.len() != sys.m {
        return Err(Error::Domain(format!(
            "index vector has length {}, expected {}",
            n.len(),
            sys.m
        )));
    }
    if n.iter().any(|v| *v == 0) {
        return Err(Error::Domain("index entries must be positive".into()));
    }
    let big_n: u64 = n.iter().sum();
    if big_n > max_n {
        return Err(Error::CapExceeded {
            needed: big_n as u128,
            cap: max_n as u128,
        });
    }
    let spec = &sys.spec;
    let order = (2 * big_n + 2) as usize;
    let coeffs: Vec<Vec<BigRational>> = (1..=sys.m as u64)
        .map(|j| sys.kind.coefficients(j, order))
        .collect();

    let rows: Vec<(Vec<RingInt>, Vec<QuadRational>)> = (0..=sys.m)
        .into_par_iter()
        .map(|k| -> Result<_> {
            let row = solve_row(n, k, &coeffs)?;
            let a0 = poly_eval(&row.p0, &sys.eval_point, spec);
            let mut vals = vec![a0];
            let mut rems = Vec::new();
            for j in 0..sys.m {
                let pj: Vec<BigRational> = (0..=big_n as usize)
                    .map(|nu| product_coeff(&row.p0, &coeffs[j], nu))
                    .collect();
                let aj = poly_eval_q(&pj, &sys.eval_point, spec);
                vals.push(&QuadRational::zero() - &aj);
                rems.push(remainder(sys, &row.p0, j as u64 + 1, big_n as usize + 1));
            }
            let (l, g) = ring_content(&vals);
            let factor = BigRational::new(l, g);
            let entries = vals
                .iter()
                .map(|q| {
                    q.scale(&factor)
                        .to_ring_int()
                        .expect("scaled entries are ring integers")
                })
                .collect();
            let rems = rems.iter().map(|r| r.scale(&factor)).collect();
            Ok((entries, rems))
        })
        .collect::<Result<Vec<_>>>()?;

    let entries: Vec<Vec<RingInt>> = rows.iter().map(|r| r.0.clone()).collect();
    let mut remainders = Vec::new();
    let mut log_remainders = Vec::new();
    for (_, rems) in &rows {
        remainders.push(rems.iter().map(|r| r.to_complex(spec).norm()).collect());
        log_remainders.push(
            rems.iter()
                .map(|r| {
                    let a2 = r.abs_squared(spec);
                    if a2.is_zero() {
                        f64::NEG_INFINITY
                    } else {
                        ratio_ln_abs(&a2) / 2.0
                    }
                })
                .collect(),
        );
    }
    let determinant = det_bareiss(&entries, spec);
    if determinant.is_zero() {
        return Err(Error::SingularSystem(format!(
            "the table for n = {n:?} has zero determinant"
        )));
    }
    let thetas = (1..=sys.m as u64).map(|j| sys.theta(j)).collect();
    Ok(FormTable {
        spec: *spec,
        kind: sys.kind,
        eval_point: sys.eval_point.clone(),
        n: n.to_vec(),
        entries,
        thetas,
        remainders,
        log_remainders,
        determinant,
    })
}

/// Exact determinant test.
pub fn check_determinant(entries: &[Vec<RingInt>], spec: &FieldSpec) -> bool {
    !det_bareiss(entries, spec).is_zero()
}

/// `G_k = A_{k,0}β_0 − Σ_{j≥1} β_j A_{k,j}`.
pub fn compute_gk(t: &FormTable, beta: &[RingInt]) -> Result<Vec<RingInt>> {
    if beta.len() != t.m() + 1 {
        return Err(Error::Domain(format!(
            "beta has length {}, expected {}",
            beta.len(),
            t.m() + 1
        )));
    }
    Ok(t.entries
        .iter()
        .map(|row| {
            let mut g = t.spec.mul(&row[0], &beta[0]);
            for j in 1..row.len() {
                g = g - t.spec.mul(&beta[j], &row[j]);
            }
            g
        })
        .collect())
}

fn ratio_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn parse_ratio(s: &str) -> Result<BigRational> {
    crate::precision::parse_decimal(s)
}

fn parse_int(s: &str) -> Result<BigInt> {
    s.trim()
        .parse::<BigInt>()
        .map_err(|_| Error::Parse(format!("not an integer: {s:?}")))
}

#[derive(Serialize, Deserialize)]
struct FormTableJson {
    field: FieldSpec,
    system: SeriesKind,
    eval_point: [String; 2],
    n: Vec<u64>,
    entries: Vec<Vec<[String; 2]>>,
    determinant: [String; 2],
    thetas: Vec<[f64; 2]>,
    remainders: Vec<Vec<f64>>,
    log_remainders: Vec<Vec<Option<f64>>>,
}

fn ring_pair(r: &RingInt) -> [String; 2] {
    [r.u.to_string(), r.v.to_string()]
}

fn pair_ring(p: &[String; 2]) -> Result<RingInt> {
    Ok(RingInt {
        u: parse_int(&p[0])?,
        v: parse_int(&p[1])?,
    })
}

impl FormTable {
    pub fn to_json(&self) -> Result<String> {
        let j = FormTableJson {
            field: self.spec,
            system: self.kind,
            eval_point: [
                ratio_string(&self.eval_point.x),
                ratio_string(&self.eval_point.y),
            ],
            n: self.n.clone(),
            entries: self
                .entries
                .iter()
                .map(|r| r.iter().map(ring_pair).collect())
                .collect(),
            determinant: ring_pair(&self.determinant),
            thetas: self.thetas.iter().map(|z| [z.re, z.im]).collect(),
            remainders: self.remainders.clone(),
            log_remainders: self
                .log_remainders
                .iter()
                .map(|r| r.iter().map(|v| v.is_finite().then_some(*v)).collect())
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&j)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: FormTableJson = serde_json::from_str(s)?;
        let entries = j
            .entries
            .iter()
            .map(|r| r.iter().map(pair_ring).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let m = j.n.len();
        if entries.len() != m + 1 || entries.iter().any(|r| r.len() != m + 1) {
            return Err(Error::Parse(format!(
                "entries must form a {0}x{0} matrix",
                m + 1
            )));
        }
        Ok(FormTable {
            spec: j.field,
            kind: j.system,
            eval_point: QuadRational::new(
                parse_ratio(&j.eval_point[0])?,
                parse_ratio(&j.eval_point[1])?,
            ),
            n: j.n,
            entries,
            thetas: j
                .thetas
                .iter()
                .map(|p| Complex64::new(p[0], p[1]))
                .collect(),
            remainders: j.remainders,
            log_remainders: j
                .log_remainders
                .iter()
                .map(|r| r.iter().map(|v| v.unwrap_or(f64::NEG_INFINITY)).collect())
                .collect(),
            determinant: pair_ring(&j.determinant)?,
        })
    }
}

/// `|A_{k,0}Θ_j + A_{k,j}|` recomputed from a partial sum of `Θ_j` accurate to `tol`.
pub fn linear_form_value(sys: &SeriesSystem, t: &FormTable, k: usize, j: usize, tol: f64) -> f64 {
    let theta = sys.theta_rational(j as u64, tol);
    let a0 = QuadRational::from(&t.entries[k][0]);
    let aj = QuadRational::from(&t.entries[k][j]);
    let v = &sys.spec.mul_q(&a0, &theta) + &aj;
    let a2 = v.abs_squared(&sys.spec);
    if a2.is_zero() {
        0.0
    } else {
        (ratio_ln_abs(&a2) / 2.0).exp()
    }
}
