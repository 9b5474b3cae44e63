//! End-to-end consistency check: theorem bound against the exhaustive oracle on a height grid.

use num_complex::Complex64;
use serde::Serialize;

use crate::bound::certificate::{certificate, log_height, log_lower_bound_at, BoundCertificate};
use crate::bound::params::AxiomParams;
use crate::error::{Error, Result};
use crate::lattice::{brute_min, minkowski_radius, SearchBox, Witness};
use crate::pade::{
    compute_gk, hermite_pade, log_abs_ring, validate_envelopes, FormTable, SeriesSystem,
};
use crate::precision::Precision;
use crate::quadratic::{FieldSpec, RingInt};
use crate::tuning::{check_half, schedule};

/// Default grid `G·10^{k/2}`, `k = 0..=6`, spanning `[G, 10³G]`.
pub fn default_grid(cert: &BoundCertificate) -> Vec<f64> {
    (0..=6)
        .map(|k| cert.log_g + k as f64 * 0.5 * std::f64::consts::LN_10)
        .map(f64::exp)
        .collect()
}

#[derive(Debug, Clone)]
pub struct VerifyInput<'a> {
    pub params: AxiomParams,
    pub spec: FieldSpec,
    pub theta: Vec<Complex64>,
    /// Tables the axioms were validated on.
    pub tables: &'a [FormTable],
    /// Source of tables at the scheduled index, when available.
    pub system: Option<&'a SeriesSystem>,
    /// Combined heights `H = ∏ 2m·H_j`.
    pub grid: Vec<f64>,
    /// Largest oracle height per coordinate.
    pub height_cap: u64,
    pub unbalanced: bool,
    pub enum_cap: u128,
    pub precision: Precision,
    pub max_n: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RowStatus {
    Pass,
    /// The bound exceeds the oracle minimum.
    Fail,
    /// `H < G`: the theorem does not apply.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleDiag {
    #[serde(rename = "S")]
    pub s_total: f64,
    pub sigma: Vec<u64>,
    pub n_used: u64,
    pub half_sum: f64,
    pub half_passed: bool,
    /// The scheduled index lies inside the validated range.
    pub envelope_validated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GkDiag {
    pub n: Vec<u64>,
    pub gk: Vec<[String; 2]>,
    pub some_nonzero: bool,
    /// `1 ≤ |G_k| ≤ |A_{k,0}||Λ| + Σ|β_j||L_{k,j}|` for every nonzero `G_k`.
    pub chain_holds: bool,
    /// Largest `log|G_k| − log(|A_{k,0}||Λ| + Σ|β_j||L_{k,j}|)` over nonzero `G_k`.
    pub chain_worst: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyRow {
    /// Requested combined height.
    pub target_h: f64,
    /// Integer oracle heights `H_j`.
    pub heights: Vec<u64>,
    /// `log ∏ 2m·H_j` for the oracle heights.
    pub log_h: f64,
    pub status: RowStatus,
    pub log_bound: Option<f64>,
    pub bound: Option<f64>,
    pub oracle: Option<f64>,
    /// `log(oracle) − log(bound)`.
    pub margin: Option<f64>,
    pub witness: Option<Vec<[String; 2]>>,
    pub note: Option<String>,
    pub schedule: Option<ScheduleDiag>,
    pub gk: Option<GkDiag>,
    /// `bound ≤ R_0(H_1..H_m)`; informational.
    pub cross_bound_ok: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub params: AxiomParams,
    pub f: f64,
    pub exponent: f64,
    pub log_g: f64,
    pub theta: Vec<[f64; 2]>,
    pub validated_n: Option<(u64, u64)>,
    pub rows: Vec<ConsistencyRow>,
    pub warnings: Vec<String>,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

impl ConsistencyReport {
    pub fn ok(&self) -> bool {
        self.failed == 0
    }
}

fn pair(r: &RingInt) -> [String; 2] {
    [r.u.to_string(), r.v.to_string()]
}

/// Per-coordinate heights with `∏ 2m·H_j ≥ H` (up to rounding), clamped to `[1, cap]`.
pub fn oracle_heights(m: usize, log_h: f64, cap: u64, unbalanced: bool) -> Vec<u64> {
    let mf = m as f64;
    let budget = log_h - mf * (2.0 * mf).ln();
    (1..=m)
        .map(|j| {
            let w = if unbalanced {
                2.0 * j as f64 / (mf * (mf + 1.0))
            } else {
                1.0 / mf
            };
            let x = (budget * w).exp();
            let hj = (x * (1.0 - 1e-9)).ceil();
            if hj.is_finite() {
                (hj as u64).clamp(1, cap)
            } else {
                cap
            }
        })
        .collect()
}

fn gk_diag(t: &FormTable, w: &Witness) -> Result<GkDiag> {
    let spec = &t.spec;
    let gk = compute_gk(t, &w.beta)?;
    let log_lambda = w.value.ln();
    let mut worst = f64::NEG_INFINITY;
    for (k, g) in gk.iter().enumerate() {
        if g.is_zero() {
            continue;
        }
        let mut terms = vec![t.log_abs_a0(k) + log_lambda];
        for j in 1..=t.m() {
            if !w.beta[j].is_zero() {
                terms.push(log_abs_ring(&w.beta[j], spec) + t.log_remainders[k][j - 1]);
            }
        }
        let mx = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let log_rhs = mx + terms.iter().map(|v| (v - mx).exp()).sum::<f64>().ln();
        worst = worst.max(log_abs_ring(g, spec) - log_rhs);
    }
    let some_nonzero = gk.iter().any(|g| !g.is_zero());
    Ok(GkDiag {
        n: t.n.clone(),
        gk: gk.iter().map(pair).collect(),
        some_nonzero,
        chain_holds: some_nonzero && worst <= 1e-9,
        chain_worst: worst,
    })
}

/// Runs every grid row; rows with `H < G` are skipped, never failed.
pub fn verify_consistency(input: &VerifyInput) -> Result<ConsistencyReport> {
    let p = &input.params;
    let m = p.m as usize;
    if input.theta.len() != m {
        return Err(Error::Domain(format!(
            "{} theta values for m = {m}",
            input.theta.len()
        )));
    }
    let cert = certificate(p)?;
    let mut warnings = Vec::new();

    let validated: Vec<&FormTable> = input
        .tables
        .iter()
        .filter(|t| t.big_n() >= p.n_min)
        .collect();
    for t in &validated {
        let rep = validate_envelopes(t, p);
        if !rep.all_pass {
            warnings.push(format!(
                "envelope violated at n = {:?} (worst slack {:.3e})",
                t.n, rep.worst_slack
            ));
        }
    }
    let validated_n = validated
        .iter()
        .map(|t| t.big_n())
        .fold(None, |acc: Option<(u64, u64)>, n| {
            Some(acc.map_or((n, n), |(lo, hi)| (lo.min(n), hi.max(n))))
        });

    let theta_abs: f64 = input.theta.iter().map(|z| z.norm()).sum();
    let mut rows = Vec::new();
    let mut oracle_cache: Vec<(Vec<u64>, Witness)> = Vec::new();
    for &target in &input.grid {
        if !(target > 0.0) {
            return Err(Error::Domain(format!(
                "grid heights must be positive, got {target}"
            )));
        }
        let heights = oracle_heights(m, target.ln(), input.height_cap, input.unbalanced);
        let hf: Vec<f64> = heights.iter().map(|h| *h as f64).collect();
        let log_h = log_height(p.m, &hf)?;
        let mut row = ConsistencyRow {
            target_h: target,
            heights: heights.clone(),
            log_h,
            status: RowStatus::Skipped,
            log_bound: None,
            bound: None,
            oracle: None,
            margin: None,
            witness: None,
            note: None,
            schedule: None,
            gk: None,
            cross_bound_ok: None,
        };
        if log_h < cert.log_g {
            row.note = Some(format!(
                "inadmissible H: log H = {log_h:.4} below log G = {:.4}",
                cert.log_g
            ));
            rows.push(row);
            continue;
        }
        let log_bound = log_lower_bound_at(&cert, log_h)?;
        let sb = SearchBox::new(input.theta.clone(), heights.clone(), input.spec)?;
        let h0 = (hf.iter().sum::<f64>() * theta_abs + input.spec.covering_radius_bound() + 1.0)
            .ceil() as u64;
        let w = match oracle_cache.iter().find(|(h, _)| *h == heights) {
            Some((_, w)) => w.clone(),
            None => {
                let w = brute_min(&sb, h0, input.enum_cap, input.precision)?;
                oracle_cache.push((heights.clone(), w.clone()));
                w
            }
        };
        if heights.contains(&input.height_cap) {
            row.note = Some(format!("heights capped at {}", input.height_cap));
        }
        let pass = w.value > 0.0 && w.value.ln() >= log_bound;
        row.status = if pass {
            RowStatus::Pass
        } else {
            RowStatus::Fail
        };
        assert!(
            !(row.status == RowStatus::Pass && w.value < log_bound.exp()),
            "a row with oracle below the bound must not pass"
        );
        row.log_bound = Some(log_bound);
        row.bound = Some(log_bound.exp());
        row.oracle = Some(w.value);
        row.margin = Some(w.value.ln() - log_bound);
        row.witness = Some(w.beta.iter().map(pair).collect());
        row.cross_bound_ok = Some(log_bound <= minkowski_radius(&input.spec, &heights).ln());
        if row.cross_bound_ok == Some(false) {
            warnings.push(format!(
                "bound exceeds the Minkowski radius at heights {heights:?} (informational)"
            ));
        }

        match schedule(p, &hf) {
            Ok(s) => {
                let half = check_half(p, &hf, &s);
                let in_range = validated_n.is_some_and(|(lo, hi)| (lo..=hi).contains(&s.n_used));
                if !in_range {
                    warnings.push(format!(
                        "axiom envelope unverified at required n = {:?} (N = {})",
                        s.sigma.iter().map(|v| v + 1).collect::<Vec<_>>(),
                        s.n_used
                    ));
                }
                let idx: Vec<u64> = s.sigma.iter().map(|v| v + 1).collect();
                let table = match input.tables.iter().find(|t| t.n == idx) {
                    Some(t) => Some(t.clone()),
                    None => match input.system {
                        Some(sys) if s.n_used <= input.max_n => {
                            Some(hermite_pade(sys, &idx, input.max_n)?)
                        }
                        _ => None,
                    },
                };
                if let Some(t) = table {
                    let d = gk_diag(&t, &w)?;
                    if !d.some_nonzero {
                        warnings.push(format!("all G_k vanish at n = {:?}", t.n));
                    }
                    row.gk = Some(d);
                }
                row.schedule = Some(ScheduleDiag {
                    s_total: s.s_total,
                    sigma: s.sigma,
                    n_used: s.n_used,
                    half_sum: half.sum,
                    half_passed: half.passed,
                    envelope_validated: in_range,
                });
            }
            Err(e) => warnings.push(format!("no schedule at heights {heights:?}: {e}")),
        }
        rows.push(row);
    }

    let count = |s: RowStatus| rows.iter().filter(|r| r.status == s).count();
    Ok(ConsistencyReport {
        params: p.clone(),
        f: cert.f,
        exponent: cert.exponent,
        log_g: cert.log_g,
        theta: input.theta.iter().map(|z| [z.re, z.im]).collect(),
        validated_n,
        passed: count(RowStatus::Pass),
        failed: count(RowStatus::Fail),
        skipped: count(RowStatus::Skipped),
        rows,
        warnings,
    })
}
