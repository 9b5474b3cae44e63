//! Exhaustive searches for small values of `β_0 + β_1Θ_1 + … + β_mΘ_m`.

use std::cmp::Ordering;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::precision::{parse_decimal, Dd, Precision, Real};
use crate::quadratic::{nearest_small, FieldSpec, RingInt};

pub const DEFAULT_CAP: u128 = 10_000_000;

/// `Θ_1..Θ_m`, the heights `H_j` and the field.
#[derive(Debug, Clone)]
pub struct SearchBox {
    pub theta: Vec<Complex64>,
    /// Double-double copy of `theta`, exact for decimal inputs to ~31 digits.
    pub theta_dd: Vec<(Dd, Dd)>,
    pub heights: Vec<u64>,
    pub spec: FieldSpec,
}

impl SearchBox {
    pub fn new(theta: Vec<Complex64>, heights: Vec<u64>, spec: FieldSpec) -> Result<Self> {
        let theta_dd = theta
            .iter()
            .map(|z| (Dd::new(z.re), Dd::new(z.im)))
            .collect();
        let b = SearchBox {
            theta,
            theta_dd,
            heights,
            spec,
        };
        b.validate()?;
        Ok(b)
    }

    /// Builds a box from decimal strings `(re, im)`, keeping double-double copies.
    pub fn from_decimals(
        theta: &[(String, String)],
        heights: Vec<u64>,
        spec: FieldSpec,
    ) -> Result<Self> {
        let mut t = Vec::new();
        let mut dd = Vec::new();
        for (re, im) in theta {
            let (re, im) = (
                Dd::from_ratio(&parse_decimal(re)?),
                Dd::from_ratio(&parse_decimal(im)?),
            );
            t.push(Complex64::new(re.to_f64(), im.to_f64()));
            dd.push((re, im));
        }
        let b = SearchBox {
            theta: t,
            theta_dd: dd,
            heights,
            spec,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn m(&self) -> usize {
        self.theta.len()
    }

    fn validate(&self) -> Result<()> {
        if self.theta.is_empty() {
            return Err(Error::Domain("need at least one theta".into()));
        }
        if self.theta.len() != self.heights.len() {
            return Err(Error::Domain(format!(
                "{} theta values but {} heights",
                self.theta.len(),
                self.heights.len()
            )));
        }
        if self
            .theta
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite() || z.norm() == 0.0)
        {
            return Err(Error::Domain(
                "theta values must be finite and nonzero".into(),
            ));
        }
        if self.heights.iter().any(|h| *h == 0 || *h > 3_000_000_000) {
            return Err(Error::Domain("heights must lie in 1..=3e9".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    #[serde(serialize_with = "ser_beta")]
    pub beta: Vec<RingInt>,
    pub value: f64,
    pub radius: f64,
}

fn ser_beta<S: serde::Serializer>(beta: &[RingInt], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(beta.len()))?;
    for b in beta {
        seq.serialize_element(&[b.u.to_string(), b.v.to_string()])?;
    }
    seq.end()
}

/// `R_0 = (2^τ D^{1/4}/√π)^{m+1} / ∏H_j`.
pub fn minkowski_radius(spec: &FieldSpec, heights: &[u64]) -> f64 {
    let m = heights.len() as i32;
    let base =
        2f64.powf(spec.tau_f64()) * (spec.d() as f64).powf(0.25) / std::f64::consts::PI.sqrt();
    let log_prod: f64 = heights.iter().map(|h| (*h as f64).ln()).sum();
    (base.ln() * (m + 1) as f64 - log_prod).exp()
}

type Point = (i64, i64);

/// Disk point lists and the mixed-radix enumeration over them.
struct Grid {
    disks: Vec<Vec<Point>>,
    count: u128,
}

impl Grid {
    fn new(spec: &FieldSpec, heights: &[u64], cap: u128) -> Result<Self> {
        let mut count: u128 = 1;
        let mut disks = Vec::new();
        for h in heights {
            let h = *h as i128;
            // Rough area estimate before materializing the disk.
            let approx = (std::f64::consts::PI * (h * h) as f64 / spec_det(spec)) as u128;
            if count.saturating_mul(approx.max(1)) > cap.saturating_mul(2) {
                return Err(Error::CapExceeded {
                    needed: count.saturating_mul(approx),
                    cap,
                });
            }
            let d = spec.disk_points((h * h) as i64);
            count = count.saturating_mul(d.len() as u128);
            disks.push(d);
        }
        if count > cap {
            return Err(Error::CapExceeded { needed: count, cap });
        }
        Ok(Grid { disks, count })
    }

    fn decode(&self, mut idx: u64, out: &mut [Point]) {
        for (slot, disk) in out.iter_mut().zip(&self.disks) {
            let n = disk.len() as u64;
            *slot = disk[(idx % n) as usize];
            idx /= n;
        }
    }
}

fn spec_det(spec: &FieldSpec) -> f64 {
    crate::quadratic::lattice_determinant(spec)
}

fn linear_part(spec: &FieldSpec, theta: &[Complex64], beta: &[Point]) -> Complex64 {
    beta.iter()
        .zip(theta)
        .map(|(&(u, v), t)| spec.embed_small(u, v) * t)
        .sum()
}

#[derive(Debug, Clone, Copy)]
struct Best {
    value: f64,
    idx: u64,
    b0: Point,
}

fn better(grid: &Grid, a: Best, b: Best) -> Best {
    match a.value.partial_cmp(&b.value) {
        Some(Ordering::Less) => a,
        Some(Ordering::Greater) => b,
        _ => {
            if a.idx == u64::MAX {
                return b;
            }
            if b.idx == u64::MAX {
                return a;
            }
            if key(grid, a) <= key(grid, b) {
                a
            } else {
                b
            }
        }
    }
}

fn key(grid: &Grid, c: Best) -> Vec<Point> {
    let mut v = vec![(0, 0); grid.disks.len()];
    if c.idx != u64::MAX {
        grid.decode(c.idx, &mut v);
    }
    v.insert(0, c.b0);
    v
}

/// The 3×3 block of lattice points around the point nearest to `-w`.
fn window(spec: &FieldSpec, w: Complex64) -> impl Iterator<Item = Point> {
    let (u0, v0) = nearest_small(-w, spec);
    (-1..=1).flat_map(move |dv| (-1..=1).map(move |du| (u0 + du, v0 + dv)))
}

fn to_witness(grid: &Grid, best: Best, radius: f64) -> Witness {
    let beta = key(grid, best).into_iter().map(RingInt::from).collect();
    Witness {
        beta,
        value: best.value,
        radius,
    }
}

/// Value of a candidate in double-double arithmetic.
fn value_dd(spec: &FieldSpec, theta: &[(Dd, Dd)], beta: &[Point]) -> Dd {
    let h = Dd::from_f64(spec.h_f64());
    let im = Dd::from_f64(spec.l_f64()) * Dd::from_f64(spec.d() as f64).sqrt();
    let emb = |(u, v): Point| {
        (
            Dd::from_f64(u as f64) + Dd::from_f64(v as f64) * h,
            Dd::from_f64(v as f64) * im,
        )
    };
    let (mut re, mut imag) = emb(beta[0]);
    for (b, (tr, ti)) in beta[1..].iter().zip(theta) {
        let (br, bi) = emb(*b);
        re = re + br * *tr - bi * *ti;
        imag = imag + br * *ti + bi * *tr;
    }
    (re * re + imag * imag).sqrt()
}

/// Among candidates within rounding distance of the binary64 minimum, picks the
/// smallest in double-double arithmetic.
fn refine_extended(
    sb: &SearchBox,
    grid: &Grid,
    best: Best,
    eval: impl Fn(u64) -> Vec<Best> + Sync,
) -> Best {
    let slack = 1e-12 * best.value.max(1e-300) + 1e-14;
    let near: Vec<Best> = (0..grid.count as u64)
        .into_par_iter()
        .flat_map_iter(|i| {
            eval(i)
                .into_iter()
                .filter(|c| c.value <= best.value + slack)
        })
        .collect();
    let mut out: Option<(Dd, Best)> = None;
    for c in near.into_iter().chain(std::iter::once(best)) {
        let beta = key(grid, c);
        let v = if c.idx == u64::MAX {
            Dd::ONE
        } else {
            value_dd(&sb.spec, &sb.theta_dd, &beta)
        };
        let c = Best {
            value: v.to_f64(),
            ..c
        };
        out = match out {
            None => Some((v, c)),
            Some((bv, bc)) => {
                if v < bv || (v == bv && key(grid, c) < key(grid, bc)) {
                    Some((v, c))
                } else {
                    Some((bv, bc))
                }
            }
        };
    }
    out.map(|(_, c)| c).unwrap_or(best)
}

/// A nonzero `β` with `|β_j| ≤ H_j` and `|Λ| ≤ R_0`; `β_0` is unconstrained.
pub fn find_witness(sb: &SearchBox, cap: u128, precision: Precision) -> Result<Witness> {
    let spec = &sb.spec;
    let grid = Grid::new(spec, &sb.heights, cap)?;
    let radius = minkowski_radius(spec, &sb.heights);
    let m = sb.m();
    let eval = |i: u64| -> Vec<Best> {
        let mut beta = vec![(0, 0); m];
        grid.decode(i, &mut beta);
        if beta.iter().all(|p| *p == (0, 0)) {
            return vec![];
        }
        let w = linear_part(spec, &sb.theta, &beta);
        window(spec, w)
            .map(|b0| Best {
                value: (spec.embed_small(b0.0, b0.1) + w).norm(),
                idx: i,
                b0,
            })
            .collect()
    };
    let unit = Best {
        value: 1.0,
        idx: u64::MAX,
        b0: (1, 0),
    };
    let best = (0..grid.count as u64)
        .into_par_iter()
        .map(|i| eval(i).into_iter().fold(unit, |a, b| better(&grid, a, b)))
        .reduce(|| unit, |a, b| better(&grid, a, b));
    let best = match precision {
        Precision::F64 => best,
        Precision::Extended => refine_extended(sb, &grid, best, eval),
    };
    let w = to_witness(&grid, best, radius);
    if !(w.value <= radius) {
        return Err(Error::WitnessNotFound(format!(
            "best value {} exceeds the guaranteed radius {radius}",
            w.value
        )));
    }
    Ok(w)
}

/// Exact minimum of `|Λ|` over nonzero `β` with `|β_0| ≤ h0` and `|β_j| ≤ H_j`.
pub fn brute_min(sb: &SearchBox, h0: u64, cap: u128, precision: Precision) -> Result<Witness> {
    let spec = &sb.spec;
    let grid = Grid::new(spec, &sb.heights, cap)?;
    let r2 = (h0 as i128 * h0 as i128) as i64;
    let disk0 = spec.disk_points(r2);
    let m = sb.m();
    let inside = |p: Point| {
        let norm = spec.norm(&RingInt::from(p));
        norm <= r2.into()
    };
    let eval = |i: u64| -> Vec<Best> {
        let mut beta = vec![(0, 0); m];
        grid.decode(i, &mut beta);
        let zero = beta.iter().all(|p| *p == (0, 0));
        let w = linear_part(spec, &sb.theta, &beta);
        let make = |b0: Point| Best {
            value: (spec.embed_small(b0.0, b0.1) + w).norm(),
            idx: i,
            b0,
        };
        let nearest = nearest_small(-w, spec);
        if !zero && inside(nearest) {
            window(spec, w).filter(|p| inside(*p)).map(make).collect()
        } else {
            disk0
                .iter()
                .copied()
                .filter(|p| !(zero && *p == (0, 0)))
                .map(make)
                .collect()
        }
    };
    let none = Best {
        value: f64::INFINITY,
        idx: u64::MAX,
        b0: (0, 0),
    };
    let best = (0..grid.count as u64)
        .into_par_iter()
        .map(|i| eval(i).into_iter().fold(none, |a, b| better(&grid, a, b)))
        .reduce(|| none, |a, b| better(&grid, a, b));
    if best.idx == u64::MAX {
        return Err(Error::Domain(
            "the search box contains no nonzero vector".into(),
        ));
    }
    let best = match precision {
        Precision::F64 => best,
        Precision::Extended => refine_extended(sb, &grid, best, eval),
    };
    Ok(to_witness(&grid, best, minkowski_radius(spec, &sb.heights)))
}

/// `√2(1 + Σ|Θ_j|)/H^{(m−1)/2}`.
pub fn shidlovskii_bound(theta: &[Complex64], h: u64) -> f64 {
    let m = theta.len() as f64;
    let c = std::f64::consts::SQRT_2 * (1.0 + theta.iter().map(|t| t.norm()).sum::<f64>());
    c / (h as f64).powf((m - 1.0) / 2.0)
}

/// Exhaustive search over rational integer vectors with `|β_j| ≤ H`.
pub fn shidlovskii_witness(theta: &[Complex64], h: u64, cap: u128) -> Result<Witness> {
    if theta.is_empty() || h == 0 {
        return Err(Error::Domain("need m >= 1 and H >= 1".into()));
    }
    let side = 2 * h as u128 + 1;
    let m = theta.len();
    let mut count: u128 = 1;
    for _ in 0..m {
        count = count.saturating_mul(side);
        if count > cap {
            return Err(Error::CapExceeded {
                needed: side.saturating_pow(m as u32 + 1),
                cap,
            });
        }
    }
    let hi = h as i64;
    let side = side as u64;
    let decode = |mut i: u64| -> Vec<i64> {
        (0..m)
            .map(|_| {
                let d = (i % side) as i64 - hi;
                i /= side;
                d
            })
            .collect()
    };
    let candidate = |i: u64| -> (f64, Vec<i64>) {
        let beta = decode(i);
        let w: Complex64 = beta.iter().zip(theta).map(|(b, t)| t * *b as f64).sum();
        let zero = beta.iter().all(|b| *b == 0);
        let target = (-w.re).round().clamp(-hi as f64, hi as f64) as i64;
        let mut best: Option<(f64, Vec<i64>)> = None;
        for b0 in [target - 1, target, target + 1, 1] {
            if b0.abs() > hi || (zero && b0 == 0) {
                continue;
            }
            let v = (w + b0 as f64).norm();
            let mut full = vec![b0];
            full.extend(&beta);
            best = match best {
                Some((bv, bb)) if bv < v || (bv == v && bb <= full) => Some((bv, bb)),
                _ => Some((v, full)),
            };
        }
        best.unwrap_or((f64::INFINITY, vec![]))
    };
    let pick = |a: (f64, Vec<i64>), b: (f64, Vec<i64>)| match a.0.partial_cmp(&b.0) {
        Some(Ordering::Less) => a,
        Some(Ordering::Greater) => b,
        _ => {
            if a.1 <= b.1 || b.1.is_empty() {
                a
            } else {
                b
            }
        }
    };
    let (value, beta) = (0..count as u64).into_par_iter().map(candidate).reduce(
        || (f64::INFINITY, vec![]),
        |a, b| {
            if a.1.is_empty() {
                b
            } else if b.1.is_empty() {
                a
            } else {
                pick(a, b)
            }
        },
    );
    let radius = shidlovskii_bound(theta, h);
    if beta.is_empty() || !(value <= radius) {
        return Err(Error::WitnessNotFound(format!(
            "best value {value} exceeds the bound {radius}"
        )));
    }
    Ok(Witness {
        beta: beta.into_iter().map(|b| RingInt::from((b, 0))).collect(),
        value,
        radius,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn field(d: u64) -> FieldSpec {
        FieldSpec::new(d).unwrap()
    }

    #[test]
    fn radius_examples() {
        assert_relative_eq!(
            minkowski_radius(&field(1), &[1]),
            4.0 / PI,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            minkowski_radius(&field(3), &[1]),
            2.0 * 3f64.sqrt() / PI,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            minkowski_radius(&field(1), &[10, 10]),
            0.014368,
            max_relative = 1e-4
        );
    }

    #[test]
    fn witness_for_pi() {
        let sb = SearchBox::new(vec![Complex64::new(PI, 0.0)], vec![1], field(1)).unwrap();
        let w = find_witness(&sb, DEFAULT_CAP, Precision::F64).unwrap();
        assert_relative_eq!(w.value, PI - 3.0, max_relative = 1e-12);
        let b = brute_min(&sb, 1, DEFAULT_CAP, Precision::F64).unwrap();
        // |β_0| ≤ 1 forbids β_0 = −3
        assert!(b.value > w.value);
        let b = brute_min(&sb, 3, DEFAULT_CAP, Precision::F64).unwrap();
        assert_relative_eq!(b.value, PI - 3.0, max_relative = 1e-12);
    }

    #[test]
    fn witness_for_half() {
        let sb = SearchBox::new(vec![Complex64::new(0.5, 0.0)], vec![1], field(1)).unwrap();
        let w = find_witness(&sb, DEFAULT_CAP, Precision::F64).unwrap();
        assert_relative_eq!(w.value, 0.5);
        let x = find_witness(&sb, DEFAULT_CAP, Precision::Extended).unwrap();
        assert_eq!(x.beta, w.beta);
    }

    #[test]
    fn ring_theta_gives_zero() {
        let spec = field(3);
        let sb = SearchBox::new(vec![spec.omega()], vec![2], spec).unwrap();
        let w = find_witness(&sb, DEFAULT_CAP, Precision::F64).unwrap();
        assert!(w.value < 1e-12);
        assert!(
            brute_min(&sb, 2, DEFAULT_CAP, Precision::F64)
                .unwrap()
                .value
                < 1e-12
        );
    }

    #[test]
    fn shidlovskii_examples() {
        let w = shidlovskii_witness(&[Complex64::new(0.0, 1.0)], 3, DEFAULT_CAP).unwrap();
        assert!(w.value <= 1.0);
        let t = [
            Complex64::new(2f64.sqrt(), 0.0),
            Complex64::new(3f64.sqrt(), 0.0),
        ];
        let w = shidlovskii_witness(&t, 10, DEFAULT_CAP).unwrap();
        assert!(w.value <= 1.855);
        let t = [Complex64::new(0.0, 1.0), Complex64::new(0.0, 2.0)];
        let w = shidlovskii_witness(&t, 5, DEFAULT_CAP).unwrap();
        assert_eq!(w.value, 0.0);
    }

    #[test]
    fn cap_is_enforced() {
        let sb = SearchBox::new(
            vec![Complex64::new(PI, 0.0); 3],
            vec![100, 100, 100],
            field(1),
        )
        .unwrap();
        assert!(matches!(
            find_witness(&sb, DEFAULT_CAP, Precision::F64),
            Err(Error::CapExceeded { .. })
        ));
    }
}
