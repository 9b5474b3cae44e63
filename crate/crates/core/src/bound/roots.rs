use crate::bound::params::{AxiomParams, GrowthCase};
use crate::error::{Error, Result};
use crate::precision::Real;

/// Largest root `S_l` of the case-1 or case-2 threshold equation and `x_l = max{S_l, 1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MasterThreshold {
    /// `None` when the equation has no root on the search domain.
    pub s: Option<f64>,
    pub x: f64,
}

/// LHS − RHS of the threshold equation for `p.case`.
pub fn threshold_gap<R: Real>(p: &AxiomParams, s: R) -> R {
    let r = |x: f64| R::from_f64(x);
    let m = r(p.mf());
    let f = r(2.0) / (r(p.c) - r(p.d) * m);
    match p.case {
        GrowthCase::Constant => s - f * (r(p.e2) * m * s.ln() + r(p.d) * m * m + r(p.e2) * m),
        GrowthCase::Log => {
            let ls = s.ln();
            let sq = if ls > r(0.0) { ls.sqrt() } else { r(0.0) };
            let rhs = r(p.e0) * m * s * sq
                + r(p.e1) * m * s
                + (r(p.d) * m * m + r(p.e2) * m) * ls
                + r(p.e0) * m * m * sq
                + r(2.0) * r(p.e0) * m * m
                + r(p.e1) * m * m
                + r(p.e2) * m
                + r(p.e3) * m;
            s * ls - f * rhs
        }
        GrowthCase::Linear => s - r(1.0),
    }
}

/// Solves for the threshold `x_l`: `max{S_1, 1}`, `max{S_2, 1}` or `1` in case 3.
pub fn solve_master_threshold(p: &AxiomParams) -> Result<MasterThreshold> {
    p.validate()?;
    let m = p.mf();
    let f = p.f();
    let s = match p.case {
        GrowthCase::Linear => {
            return Ok(MasterThreshold {
                s: Some(1.0),
                x: 1.0,
            })
        }
        GrowthCase::Constant if p.e2 == 0.0 => Some(f * p.d * m * m),
        GrowthCase::Constant => {
            // Convex in S with minimum at S* = f·e2·m: zero or two roots.
            let s_star = f * p.e2 * m;
            if threshold_gap(p, s_star) > 0.0 {
                None
            } else {
                let hi = grow_until_positive(p, s_star.max(1.0))?;
                Some(bisect(p, s_star, hi))
            }
        }
        GrowthCase::Log => Some(largest_root_scan(p, 1.0)?),
    };
    if let Some(root) = s {
        certify_above(p, root)?;
    }
    let x = s.map_or(1.0, |v| v.max(1.0));
    Ok(MasterThreshold { s, x })
}

/// Refines an f64 root in a higher-precision type.
pub fn refine_root<R: Real>(p: &AxiomParams, root: f64) -> R {
    if p.case == GrowthCase::Constant && p.e2 == 0.0 {
        let r = |x: f64| R::from_f64(x);
        let m = r(p.mf());
        return r(2.0) / (r(p.c) - r(p.d) * m) * r(p.d) * m * m;
    }
    if root <= 0.0 {
        return R::from_f64(root);
    }
    let zero = R::from_f64(0.0);
    let mut width = 1e-12 * root.max(1.0);
    let (mut lo, mut hi);
    loop {
        lo = R::from_f64((root - width).max(if p.case == GrowthCase::Log {
            1.0
        } else {
            1e-300
        }));
        hi = R::from_f64(root + width);
        if threshold_gap(p, lo) <= zero && threshold_gap(p, hi) > zero {
            break;
        }
        width *= 16.0;
        if width > root.max(1.0) {
            return R::from_f64(root);
        }
    }
    let half = R::from_f64(0.5);
    for _ in 0..120 {
        let mid = (lo + hi) * half;
        if threshold_gap(p, mid) > zero {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn grow_until_positive(p: &AxiomParams, start: f64) -> Result<f64> {
    let mut s = start;
    while threshold_gap(p, s) <= 0.0 {
        s *= 2.0;
        if !s.is_finite() || s > 1e300 {
            return Err(Error::NoAdmissibleS(
                "the largest root of the threshold equation lies beyond 1e300".into(),
            ));
        }
    }
    Ok(s)
}

/// Geometric scan from `lo`; stops once the gap has stayed positive for more than a decade.
fn largest_root_scan(p: &AxiomParams, lo: f64) -> Result<f64> {
    let ratio = 2f64.powf(1.0 / 16.0);
    let mut last_nonpos = lo;
    let mut positive_run = 0u32;
    let mut s = lo;
    loop {
        if threshold_gap(p, s) <= 0.0 {
            last_nonpos = s;
            positive_run = 0;
        } else {
            positive_run += 1;
            if positive_run > 64 {
                break;
            }
        }
        s *= ratio;
        if s > 1e300 {
            return Err(Error::NoAdmissibleS(
                "the largest root of the threshold equation lies beyond 1e300".into(),
            ));
        }
    }
    if threshold_gap(p, last_nonpos) > 0.0 {
        return Ok(last_nonpos);
    }
    Ok(bisect(p, last_nonpos, last_nonpos * ratio))
}

fn bisect(p: &AxiomParams, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if threshold_gap(p, mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if threshold_gap(p, lo) == 0.0 {
        lo
    } else {
        hi
    }
}

fn certify_above(p: &AxiomParams, root: f64) -> Result<()> {
    let base = root.max(1e-12);
    for k in 1..=200 {
        let s = base * (1.0 + 9.0 * k as f64 / 200.0);
        if threshold_gap(p, s) <= 0.0 {
            return Err(Error::NoAdmissibleS(format!(
                "root {root} is not the largest solution (gap nonpositive at {s})"
            )));
        }
    }
    Ok(())
}
