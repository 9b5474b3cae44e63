#![allow(dead_code)]

use bakerbound::bound::{certificate, AxiomParams, BoundCertificate, GrowthCase};
use rand::Rng;

pub const CASES: [GrowthCase; 3] = [GrowthCase::Constant, GrowthCase::Log, GrowthCase::Linear];

fn maybe<R: Rng>(rng: &mut R, p: f64, hi: f64) -> f64 {
    if rng.gen_bool(p) {
        rng.gen_range(0.0..hi)
    } else {
        0.0
    }
}

/// Valid parameters for `case` with every constant the case admits drawn at random.
pub fn random_params<R: Rng>(rng: &mut R, case: GrowthCase, m: u32) -> AxiomParams {
    let mut p = AxiomParams::base(case, m);
    p.a = rng.gen_range(0.2..3.0);
    p.c = rng.gen_range(0.5..5.0);
    p.d = maybe(rng, 0.5, 0.8) * p.c / m as f64;
    p.n_min = rng.gen_range(1..=5);
    match case {
        GrowthCase::Constant => {
            p.b = maybe(rng, 0.7, 2.0);
            p.e2 = maybe(rng, 0.7, 2.0);
        }
        GrowthCase::Log => {
            p.b0 = maybe(rng, 0.6, 1.0);
            p.b1 = maybe(rng, 0.6, 1.0);
            p.b2 = maybe(rng, 0.6, 1.0);
            p.b3 = maybe(rng, 0.6, 1.0);
            p.e0 = maybe(rng, 0.6, 1.0);
            p.e1 = maybe(rng, 0.6, 1.0);
            p.e2 = maybe(rng, 0.6, 1.0);
            p.e3 = maybe(rng, 0.6, 1.0);
        }
        GrowthCase::Linear => {
            p.b1 = maybe(rng, 0.7, 2.0);
            p.e1 = maybe(rng, 0.7, 1.0);
        }
    }
    p.validate().expect("generator yields valid parameters");
    p
}

/// Random heights, shifted uniformly so that `H = ∏ 2m·H_j ≥ G`.
pub fn admissible_heights<R: Rng>(rng: &mut R, cert: &BoundCertificate, spread: f64) -> Vec<f64> {
    let m = cert.params.m as usize;
    let two_m = (2.0 * m as f64).ln();
    let mut logs: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..spread)).collect();
    let log_h: f64 = logs.iter().map(|l| l + two_m).sum();
    let target = cert.log_g + rng.gen_range(0.0..5.0);
    if log_h < target {
        let shift = (target - log_h) / m as f64;
        for l in logs.iter_mut() {
            *l += shift;
        }
    }
    logs.iter().map(|l| l.exp()).collect()
}

pub fn cert_for<R: Rng>(rng: &mut R, case: GrowthCase, m: u32) -> BoundCertificate {
    loop {
        let p = random_params(rng, case, m);
        if let Ok(c) = certificate(&p) {
            if c.log_g.is_finite() && c.log_g < 600.0 {
                return c;
            }
        }
    }
}
