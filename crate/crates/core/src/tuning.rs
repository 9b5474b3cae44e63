//! Index schedule `σ̄` derived from the heights: frequencies, master equation, split and checks.

use serde::Serialize;

use crate::bound::certificate::log_height;
use crate::bound::params::{AxiomParams, GrowthCase};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Schedule {
    #[serde(rename = "S")]
    pub s_total: f64,
    /// Frequencies `B_j`.
    pub freq: Vec<f64>,
    /// Real split `s_j` with `Σ s_j = S`.
    pub split: Vec<f64>,
    /// `σ_j = ⌊s_j⌋`.
    pub sigma: Vec<u64>,
    /// `N(σ̄ + 1̄) = Σ (σ_j + 1)`.
    pub n_used: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HalfCheck {
    pub passed: bool,
    /// `Σ H_j e^{-r_j(σ̄+1̄)}`.
    pub sum: f64,
}

fn sqrt_log(s: f64) -> f64 {
    s.ln().max(0.0).sqrt()
}

/// Additive shift `dm·g(S) + e0·m(√log S + 2) + e1·m + e2` shared by every `B_j`.
pub fn frequency_shift(p: &AxiomParams, s: f64) -> f64 {
    let m = p.mf();
    p.d * m * p.case.g(s) + p.e0 * m * (sqrt_log(s) + 2.0) + p.e1 * m + p.e2
}

/// `B_j = log(2m·H_j) + frequency_shift(S)`.
pub fn frequencies(p: &AxiomParams, heights: &[f64], s: f64) -> Result<Vec<f64>> {
    if heights.len() != p.m as usize {
        return Err(Error::Domain(format!(
            "expected {} heights, got {}",
            p.m,
            heights.len()
        )));
    }
    if !(s >= p.mf()) {
        return Err(Error::Domain(format!(
            "S = {s} must be at least m = {}",
            p.m
        )));
    }
    if let Some(h) = heights.iter().find(|h| !(**h >= 1.0)) {
        return Err(Error::Domain(format!("heights must be >= 1, got {h}")));
    }
    let shift = frequency_shift(p, s);
    let two_m = 2.0 * p.mf();
    Ok(heights.iter().map(|h| (two_m * h).ln() + shift).collect())
}

/// Left side of the master equation; its value at the schedule's `S` equals `log H`.
pub fn master_lhs(p: &AxiomParams, s: f64) -> f64 {
    let m = p.mf();
    let ls = s.ln();
    let sq = sqrt_log(s);
    (p.gap() * s - p.d * m * m) * p.case.g(s)
        - p.e0 * m * s * sq
        - p.e1 * m * s
        - p.e2 * m * ls
        - p.e3 * m
        - p.e0 * m * m * (sq + 2.0)
        - p.e1 * m * m
        - p.e2 * m
}

/// Largest `S ≥ m` with `master_lhs(S) = log H`.
pub fn solve_master_log(p: &AxiomParams, log_h: f64) -> Result<f64> {
    p.validate()?;
    let m = p.mf();
    let gap = p.gap();
    let no_root = || {
        Error::NoAdmissibleS(format!(
            "the master equation has no root S >= m = {} for log H = {log_h}",
            p.m
        ))
    };
    let s = match p.case {
        GrowthCase::Linear => {
            let t = p.d * m * m + p.e1 * m;
            (t + (t * t + 4.0 * (p.e1 * m * m + log_h) * gap).sqrt()) / (2.0 * gap)
        }
        GrowthCase::Constant if p.e2 == 0.0 => (log_h + p.d * m * m) / gap,
        _ => largest_root(|s| master_lhs(p, s) - log_h, m).ok_or_else(no_root)?,
    };
    if !(s >= m * (1.0 - 1e-12)) || !s.is_finite() {
        return Err(no_root());
    }
    Ok(s.max(m))
}

/// Largest `S ≥ m` solving the master equation for `H = ∏(2m·H_j)`.
pub fn solve_master(p: &AxiomParams, heights: &[f64]) -> Result<f64> {
    solve_master_log(p, log_height(p.m, heights)?)
}

fn largest_root(gap: impl Fn(f64) -> f64, lo: f64) -> Option<f64> {
    let ratio = 2f64.powf(1.0 / 16.0);
    let mut last_nonpos = None;
    let mut positive_run = 0u32;
    let mut s = lo;
    loop {
        if gap(s) <= 0.0 {
            last_nonpos = Some(s);
            positive_run = 0;
        } else {
            positive_run += 1;
            if positive_run > 64 {
                break;
            }
        }
        s *= ratio;
        if s > 1e300 {
            return None;
        }
    }
    let mut lo = last_nonpos?;
    let mut hi = lo * ratio;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if gap(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(if gap(lo).abs() <= gap(hi).abs() {
        lo
    } else {
        hi
    })
}

/// Solves `r_j(s̄) = B_j` with `Σ s_j = S` and floors the result.
pub fn split(p: &AxiomParams, s: f64, freq: &[f64]) -> Result<Schedule> {
    if freq.len() != p.m as usize {
        return Err(Error::Domain(format!(
            "expected {} frequencies, got {}",
            p.m,
            freq.len()
        )));
    }
    if !(s >= p.mf()) {
        return Err(Error::Domain(format!(
            "S = {s} must be at least m = {}",
            p.m
        )));
    }
    let g = p.case.g(s);
    if !(g > 0.0) {
        return Err(Error::Domain(format!(
            "g(S) must be positive; S = {s} is too small"
        )));
    }
    let tail = p.e0 * s * sqrt_log(s) + p.e1 * s + p.e2 * s.ln() + p.e3;
    let parts: Vec<f64> = freq
        .iter()
        .map(|b| ((b + tail) / g + p.d * s) / p.c)
        .collect();
    if let Some((j, v)) = parts.iter().enumerate().find(|(_, v)| **v < 0.0) {
        return Err(Error::NegativeSplit(format!(
            "s_{} = {v} < 0 at S = {s}",
            j + 1
        )));
    }
    let sigma: Vec<u64> = parts.iter().map(|v| snapped_floor(*v)).collect();
    let n_used = sigma.iter().map(|v| v + 1).sum();
    Ok(Schedule {
        s_total: s,
        freq: freq.to_vec(),
        split: parts,
        sigma,
        n_used,
    })
}

/// Floor that treats values within rounding noise of an integer as that integer.
fn snapped_floor(v: f64) -> u64 {
    let r = v.round();
    if (v - r).abs() <= 1e-9 * v.abs().max(1.0) {
        r as u64
    } else {
        v.floor() as u64
    }
}

/// Full schedule for the given heights.
pub fn schedule(p: &AxiomParams, heights: &[f64]) -> Result<Schedule> {
    let s = solve_master(p, heights)?;
    let freq = frequencies(p, heights, s)?;
    split(p, s, &freq)
}

/// `Σ H_j e^{-r_j(σ̄+1̄)} ≤ 1/2`.
pub fn check_half(p: &AxiomParams, heights: &[f64], sched: &Schedule) -> HalfCheck {
    let n: Vec<f64> = sched.sigma.iter().map(|s| (*s + 1) as f64).collect();
    let sum: f64 = heights
        .iter()
        .enumerate()
        .map(|(j, h)| (h.ln() - p.r_at(&n, j)).exp())
        .sum();
    HalfCheck {
        passed: sum <= 0.5,
        sum,
    }
}

/// Majorant `aS·g(S) + Y(S)` of `q(S + m)`.
pub fn q_budget(p: &AxiomParams, s: f64) -> f64 {
    let m = p.mf();
    let a = p.a;
    let y = match p.case {
        GrowthCase::Constant => a * m + p.b * (s + m).ln(),
        GrowthCase::Log => {
            let sq = sqrt_log(s);
            let ls = s.ln();
            let lin = a + p.b0 + p.b1;
            p.b0 * s * sq + lin * s + (a * m + p.b2) * ls + p.b0 * m * sq + lin * m + p.b2 + p.b3
        }
        GrowthCase::Linear => 2.0 * a * m * s + a * m * m + p.b1 * (s + m),
    };
    a * s * p.case.g(s) + y
}
