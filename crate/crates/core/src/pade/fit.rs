//! Least-squares estimation of envelope constants from computed tables.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::bound::params::{AxiomParams, GrowthCase};
use crate::error::{Error, Result};
use crate::pade::FormTable;

/// Worst-case magnitudes at one index vector, maximized over the rows `k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeSample {
    pub n: Vec<u64>,
    /// `max_k log|A_{k,0}|`
    pub log_a0: f64,
    /// `max_k log|L_{k,j}|`, one per `j`.
    pub log_l: Vec<f64>,
}

impl EnvelopeSample {
    pub fn big_n(&self) -> u64 {
        self.n.iter().sum()
    }
}

pub fn samples_from_tables(tables: &[FormTable]) -> Vec<EnvelopeSample> {
    tables
        .iter()
        .map(|t| EnvelopeSample {
            n: t.n.clone(),
            log_a0: (0..=t.m())
                .map(|k| t.log_abs_a0(k))
                .fold(f64::NEG_INFINITY, f64::max),
            log_l: (0..t.m())
                .map(|j| {
                    t.log_remainders
                        .iter()
                        .map(|r| r[j])
                        .fold(f64::NEG_INFINITY, f64::max)
                })
                .collect(),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitOptions {
    pub case: GrowthCase,
    /// Largest accepted root-mean-square residual (natural-log units) before lifting.
    pub max_rms: f64,
}

impl FitOptions {
    pub fn new(case: GrowthCase) -> Self {
        FitOptions { case, max_rms: 3.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub params: AxiomParams,
    pub rms_q: f64,
    pub rms_r: f64,
    /// Amount added to the slack constant of each envelope so it majorizes every sample.
    pub lift_q: f64,
    pub lift_r: f64,
    pub samples: usize,
    pub n_max: u64,
}

struct Feature {
    name: &'static str,
    /// Whether the constant is required to be strictly positive.
    positive: bool,
}

/// Nonnegative least squares by repeatedly zeroing the most negative coefficient.
fn nnls(rows: &[Vec<f64>], rhs: &[f64], ncols: usize) -> Result<Vec<f64>> {
    let mut active: Vec<bool> = vec![true; ncols];
    loop {
        let cols: Vec<usize> = (0..ncols).filter(|c| active[*c]).collect();
        let mut coef = vec![0.0; ncols];
        if cols.is_empty() {
            return Ok(coef);
        }
        let a = DMatrix::from_fn(rows.len(), cols.len(), |i, j| rows[i][cols[j]]);
        let b = DVector::from_column_slice(rhs);
        let sol = a
            .svd(true, true)
            .solve(&b, 1e-12)
            .map_err(|e| Error::AxiomShapeRejected(format!("least squares failed: {e}")))?;
        for (j, c) in cols.iter().enumerate() {
            coef[*c] = sol[j];
        }
        match cols
            .iter()
            .copied()
            .filter(|c| coef[*c] < 0.0)
            .min_by(|x, y| coef[*x].total_cmp(&coef[*y]))
        {
            Some(worst) => active[worst] = false,
            None => return Ok(coef),
        }
    }
}

fn rms(rows: &[Vec<f64>], rhs: &[f64], coef: &[f64]) -> f64 {
    let ss: f64 = rows
        .iter()
        .zip(rhs)
        .map(|(r, y)| {
            let p: f64 = r.iter().zip(coef).map(|(a, b)| a * b).sum();
            (y - p) * (y - p)
        })
        .sum();
    (ss / rows.len().max(1) as f64).sqrt()
}

fn q_features(case: GrowthCase) -> Vec<Feature> {
    let f = |name, positive| Feature { name, positive };
    match case {
        GrowthCase::Constant => vec![f("a", true), f("b", false)],
        GrowthCase::Log => vec![
            f("a", true),
            f("b0", false),
            f("b1", false),
            f("b2", false),
            f("b3", false),
        ],
        GrowthCase::Linear => vec![f("a", true), f("b1", false)],
    }
}

fn q_row(case: GrowthCase, n: f64) -> Vec<f64> {
    let ln = n.ln();
    match case {
        GrowthCase::Constant => vec![n, ln],
        GrowthCase::Log => vec![n * ln, n * ln.sqrt(), n, ln, 1.0],
        GrowthCase::Linear => vec![n * n, n],
    }
}

fn r_names(case: GrowthCase) -> Vec<&'static str> {
    match case {
        GrowthCase::Constant => vec!["d", "c", "e2"],
        GrowthCase::Log => vec!["d", "c", "e0", "e1", "e2", "e3"],
        GrowthCase::Linear => vec!["d", "c", "e1"],
    }
}

/// Row for `log|L_j| ≈ (dN − c·n_j)g(N) + …`.
fn r_row(case: GrowthCase, n: f64, nj: f64) -> Vec<f64> {
    let ln = n.ln();
    let g = case.g(n);
    match case {
        GrowthCase::Constant => vec![n * g, -nj * g, ln],
        GrowthCase::Log => vec![n * g, -nj * g, n * ln.sqrt(), n, ln, 1.0],
        GrowthCase::Linear => vec![n * g, -nj * g, n],
    }
}

fn set(p: &mut AxiomParams, name: &str, v: f64) {
    let slot = match name {
        "a" => &mut p.a,
        "b" => &mut p.b,
        "c" => &mut p.c,
        "d" => &mut p.d,
        "b0" => &mut p.b0,
        "b1" => &mut p.b1,
        "b2" => &mut p.b2,
        "b3" => &mut p.b3,
        "e0" => &mut p.e0,
        "e1" => &mut p.e1,
        "e2" => &mut p.e2,
        "e3" => &mut p.e3,
        _ => unreachable!("unknown constant {name}"),
    };
    *slot = v;
}

/// Fits the envelope constants of `opts.case` and lifts one slack constant per
/// envelope so both majorize every sample.
pub fn fit_axioms(samples: &[EnvelopeSample], opts: &FitOptions) -> Result<FitReport> {
    let case = opts.case;
    let m = samples.first().map(|s| s.n.len()).unwrap_or(0);
    if m == 0 || samples.iter().any(|s| s.n.len() != m) {
        return Err(Error::AxiomShapeRejected(
            "samples must share a positive dimension m".into(),
        ));
    }
    // The case-1 lift runs through log N, which vanishes at N = 1.
    let used: Vec<&EnvelopeSample> = samples
        .iter()
        .filter(|s| case != GrowthCase::Constant || s.big_n() >= 2)
        .filter(|s| s.log_a0.is_finite() && s.log_l.iter().all(|v| v.is_finite()))
        .collect();
    let mut distinct: Vec<u64> = used.iter().map(|s| s.big_n()).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 4 {
        return Err(Error::AxiomShapeRejected(format!(
            "need at least 4 distinct N values with finite data, got {}",
            distinct.len()
        )));
    }

    let mut p = AxiomParams::base(case, m as u32);
    p.a = 0.0;
    p.c = 0.0;

    let qf = q_features(case);
    let q_rows: Vec<Vec<f64>> = used.iter().map(|s| q_row(case, s.big_n() as f64)).collect();
    let q_rhs: Vec<f64> = used.iter().map(|s| s.log_a0).collect();
    let q_coef = nnls(&q_rows, &q_rhs, qf.len())?;
    let rms_q = rms(&q_rows, &q_rhs, &q_coef);
    for (f, v) in qf.iter().zip(&q_coef) {
        if f.positive && *v <= 0.0 {
            return Err(Error::AxiomShapeRejected(format!(
                "fitted {} = {v} must be positive",
                f.name
            )));
        }
        set(&mut p, f.name, *v);
    }

    let rn = r_names(case);
    let mut r_rows = Vec::new();
    let mut r_rhs = Vec::new();
    for s in &used {
        let n = s.big_n() as f64;
        for (j, nj) in s.n.iter().enumerate() {
            let mut row = r_row(case, n, *nj as f64);
            if m == 1 {
                // d and c are not separable when n_1 = N.
                row[0] = 0.0;
            }
            r_rows.push(row);
            r_rhs.push(s.log_l[j]);
        }
    }
    let r_coef = nnls(&r_rows, &r_rhs, rn.len())?;
    let rms_r = rms(&r_rows, &r_rhs, &r_coef);
    for (name, v) in rn.iter().zip(&r_coef) {
        set(&mut p, name, *v);
    }

    if rms_q > opts.max_rms || rms_r > opts.max_rms {
        return Err(Error::AxiomShapeRejected(format!(
            "residuals too large for case {case}: rms(q) = {rms_q:.3}, rms(r) = {rms_r:.3}, limit {}",
            opts.max_rms
        )));
    }
    if p.c <= 0.0 || p.gap() <= 0.0 {
        return Err(Error::AxiomShapeRejected(format!(
            "fitted c - d*m = {} must be positive (c = {}, d = {})",
            p.gap(),
            p.c,
            p.d
        )));
    }

    // Lift so that every sample lies under both envelopes.
    let pad = 1e-9;
    let mut lift_q: f64 = 0.0;
    for s in &used {
        let n = s.big_n() as f64;
        let excess = s.log_a0 - p.q_at(n) + pad;
        let per_unit = match case {
            GrowthCase::Constant => excess / n.ln(),
            GrowthCase::Log => excess,
            GrowthCase::Linear => excess / n,
        };
        lift_q = lift_q.max(per_unit);
    }
    match case {
        GrowthCase::Constant => p.b += lift_q,
        GrowthCase::Log => p.b3 += lift_q,
        GrowthCase::Linear => p.b1 += lift_q,
    }
    let mut lift_r: f64 = 0.0;
    for s in &used {
        let nv: Vec<f64> = s.n.iter().map(|v| *v as f64).collect();
        let n = s.big_n() as f64;
        for j in 0..m {
            let excess = s.log_l[j] + p.r_at(&nv, j) + pad;
            let per_unit = match case {
                GrowthCase::Constant => excess / n.ln(),
                GrowthCase::Log => excess,
                GrowthCase::Linear => excess / n,
            };
            lift_r = lift_r.max(per_unit);
        }
    }
    match case {
        GrowthCase::Constant => p.e2 += lift_r,
        GrowthCase::Log => p.e3 += lift_r,
        GrowthCase::Linear => p.e1 += lift_r,
    }
    p.n_min = distinct[0];
    p.validate()
        .map_err(|e| Error::AxiomShapeRejected(e.to_string()))?;
    Ok(FitReport {
        params: p,
        rms_q,
        rms_r,
        lift_q,
        lift_r,
        samples: used.len(),
        n_max: *distinct.last().unwrap(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeEntry {
    pub k: usize,
    /// `0` for `A_{k,0}`, `j ≥ 1` for `L_{k,j}`.
    pub j: usize,
    pub log_value: f64,
    pub log_bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeReport {
    pub n: Vec<u64>,
    /// `N ≥ N_min`, where the envelopes are claimed.
    pub in_range: bool,
    pub entries: Vec<EnvelopeEntry>,
    /// Smallest `log_bound − log_value`.
    pub worst_slack: f64,
    pub all_pass: bool,
}

/// Checks `|A_{k,0}| ≤ e^{q(N)}` and `|L_{k,j}| ≤ e^{-r_j(n̄)}` entry by entry.
pub fn validate_envelopes(t: &FormTable, p: &AxiomParams) -> EnvelopeReport {
    let n = t.big_n() as f64;
    let nv: Vec<f64> = t.n.iter().map(|v| *v as f64).collect();
    let q = p.q_at(n);
    let mut entries = Vec::new();
    for k in 0..=t.m() {
        let a = t.log_abs_a0(k);
        entries.push(EnvelopeEntry {
            k,
            j: 0,
            log_value: a,
            log_bound: q,
            pass: a <= q,
        });
        for j in 0..t.m() {
            let v = t.log_remainders[k][j];
            let b = -p.r_at(&nv, j);
            entries.push(EnvelopeEntry {
                k,
                j: j + 1,
                log_value: v,
                log_bound: b,
                pass: v <= b,
            });
        }
    }
    let worst_slack = entries
        .iter()
        .map(|e| {
            if e.log_value == f64::NEG_INFINITY {
                f64::INFINITY
            } else {
                e.log_bound - e.log_value
            }
        })
        .fold(f64::INFINITY, f64::min);
    EnvelopeReport {
        n: t.n.clone(),
        in_range: t.big_n() >= p.n_min,
        all_pass: entries.iter().all(|e| e.pass),
        entries,
        worst_slack,
    }
}
