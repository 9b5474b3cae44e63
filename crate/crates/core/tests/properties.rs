mod common;

use std::f64::consts::{E, PI};

use bakerbound::bound::{
    certificate, corollary_x0, epsilon_log, log_corollary_bound_at, log_height, log_lower_bound_at,
    rho2, z_chain, z_inverse, AxiomParams, GrowthCase,
};
use bakerbound::cli::{curve_row, run};
use bakerbound::harness::{verify_consistency, RowStatus, VerifyInput};
use bakerbound::lattice::{
    brute_min, find_witness, minkowski_radius, shidlovskii_bound, shidlovskii_witness, SearchBox,
};
use bakerbound::pade::{
    check_determinant, compute_gk, fit_axioms, hermite_pade, linear_form_value, pade_row,
    vanishing_order, EnvelopeSample, FitOptions, FormTable, SeriesKind, SeriesSystem,
};
use bakerbound::precision::Precision;
use bakerbound::quadratic::{
    embed, lattice_determinant, nearest_ring_int, FieldSpec, QuadRational, RingInt,
};
use bakerbound::tuning::{check_half, frequency_shift, q_budget, schedule, solve_master_log};
use common::{admissible_heights, cert_for, random_params};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FIELDS: [u64; 9] = [1, 2, 3, 5, 6, 7, 11, 15, 19];

fn spec_strategy() -> impl Strategy<Value = FieldSpec> {
    prop::sample::select(FIELDS.to_vec()).prop_map(|d| FieldSpec::new(d).unwrap())
}

fn ring_strategy(bound: i64) -> impl Strategy<Value = RingInt> {
    (-bound..=bound, -bound..=bound).prop_map(|(u, v)| RingInt::new(u, v))
}

fn case_strategy() -> impl Strategy<Value = GrowthCase> {
    prop::sample::select(common::CASES.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn embedding_is_multiplicative(spec in spec_strategy(), x in ring_strategy(1000), y in ring_strategy(1000)) {
        let xy = spec.mul(&x, &y);
        let lhs = embed(&xy, &spec);
        let rhs = embed(&x, &spec) * embed(&y, &spec);
        prop_assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm().max(1.0));
        prop_assert_eq!(spec.norm(&xy), spec.norm(&x) * spec.norm(&y));
    }

    #[test]
    fn tau_is_one_minus_h(spec in spec_strategy()) {
        prop_assert_eq!(spec.tau(), Rational64::one() - spec.h());
    }

    #[test]
    fn nearest_round_trip(spec in spec_strategy(), x in ring_strategy(100_000)) {
        prop_assert_eq!(nearest_ring_int(embed(&x, &spec), &spec), x);
    }

    #[test]
    fn nearest_within_covering_radius(spec in spec_strategy(), re in -50.0f64..50.0, im in -50.0f64..50.0) {
        let z = Complex64::new(re, im);
        let near = embed(&nearest_ring_int(z, &spec), &spec);
        let l = spec.l_f64();
        let bound = (1.0 + l * l * spec.d() as f64).sqrt() / 2.0;
        prop_assert!((z - near).norm() <= bound + 1e-12);
    }

    #[test]
    fn z_inverse_accuracy_and_interleaving(t in 0.0f64..1.0, u in 0.0f64..1.0) {
        let top = 1e9f64.ln();
        let y = (1.0 + t * (top - 1.0)).exp();
        prop_assume!(y > E);
        let z = z_inverse(y).unwrap();
        prop_assert!((z * z.ln() - y).abs() <= 1e-12 * y);
        let c: Vec<f64> = (0..4).map(|n| z_chain(y, n).unwrap()).collect();
        prop_assert!(c[1] < c[3] && c[3] < z && z < c[2] && c[2] < c[0]);
        let y2 = y * (1.0 + u);
        prop_assume!(y2 > y);
        prop_assert!(z_inverse(y2).unwrap() > z);
    }

    #[test]
    fn second_iterate_majorized_by_rho(t in 0.0f64..1.0, s in 0.0f64..1.0) {
        let x0 = E.powf(E) * (1.0 + 50.0 * t);
        let y = x0 * (1.0 + 1e6 * s);
        let lhs = z_chain(y, 2).unwrap();
        prop_assert!(lhs <= rho2(x0).unwrap() * y / y.ln() * (1.0 + 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn epsilon_nonincreasing(seed in any::<u64>(), case in case_strategy(), m in 1u32..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cert = cert_for(&mut rng, case, m);
        // Past log H = e the log-log term of case 1 decreases as well.
        let start = cert.log_g.max(E / cert.f + 1.0).max(E);
        let mut prev = f64::INFINITY;
        for k in 0..60 {
            let log_h = start * (1.0 + 0.25 * k as f64);
            let eps = epsilon_log(&cert, log_h).unwrap();
            prop_assert!(eps <= prev + 1e-15, "eps rose at log H = {}: {} > {}", log_h, eps, prev);
            prev = eps;
        }
    }

    #[test]
    fn corollary_below_lower_bound(seed in any::<u64>(), m in 1u32..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (cert, x0, floor) = loop {
            let mut p = random_params(&mut rng, GrowthCase::Log, m);
            // The simplified bound needs f = 2/(c − dm) ≥ 1.
            p.c = p.d * m as f64 + rng.gen_range(0.2..2.0);
            let Ok(cert) = certificate(&p) else { continue };
            let x0 = corollary_x0(&cert);
            let floor = cert.log_g.max(x0 / cert.f);
            if floor < 600.0 {
                break (cert, x0, floor);
            }
        };
        let heights = {
            let per = (floor + rng.gen_range(0.0..20.0)) / m as f64 - (2.0 * m as f64).ln();
            vec![per.max(0.0).exp(); m as usize]
        };
        let log_h = log_height(m, &heights).unwrap();
        let lb = log_lower_bound_at(&cert, log_h).unwrap();
        let cb = log_corollary_bound_at(&cert, log_h, x0).unwrap();
        prop_assert!(cb <= lb, "log corollary {} above log bound {}", cb, lb);
    }

    #[test]
    fn lower_bound_monotone_and_scaling(seed in any::<u64>(), case in case_strategy(), m in 1u32..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cert = cert_for(&mut rng, case, m);
        let heights = admissible_heights(&mut rng, &cert, 8.0);
        let log_lb = |h: &[f64]| log_lower_bound_at(&cert, log_height(cert.params.m, h).unwrap()).unwrap();
        let base = log_lb(&heights);
        for j in 0..m as usize {
            let mut h2 = heights.clone();
            h2[j] *= 2.0;
            let doubled = log_lb(&h2);
            prop_assert!(doubled < base);
            prop_assert!(doubled - base <= -cert.exponent * 2f64.ln() + 1e-9);
        }
    }

    #[test]
    fn master_root_below_f_log_h(seed in any::<u64>(), case in prop::sample::select(vec![GrowthCase::Constant, GrowthCase::Log]), m in 1u32..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cert = cert_for(&mut rng, case, m);
        let log_h = cert.log_g.max(m as f64 * (2.0 * m as f64).ln()) + rng.gen_range(0.0..30.0);
        let s = solve_master_log(&cert.params, log_h);
        prop_assume!(s.is_ok());
        let s = s.unwrap();
        let lhs = if case == GrowthCase::Constant { s } else { s * s.ln() };
        prop_assert!(lhs <= cert.f * log_h * (1.0 + 1e-9), "{} > {}", lhs, cert.f * log_h);
    }

    #[test]
    fn schedule_identities(seed in any::<u64>(), case in case_strategy(), m in 1u32..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cert = cert_for(&mut rng, case, m);
        let p = &cert.params;
        let heights = admissible_heights(&mut rng, &cert, 6.0);
        let s = schedule(p, &heights);
        prop_assume!(s.is_ok());
        let s = s.unwrap();
        let sum: f64 = s.split.iter().sum();
        prop_assert!((sum - s.s_total).abs() <= 1e-9 * s.s_total.max(1.0));
        let n1: Vec<f64> = s.sigma.iter().map(|v| (*v + 1) as f64).collect();
        let shift = frequency_shift(p, s.s_total);
        let (c, d, mf) = (p.c, p.d, m as f64);
        for j in 0..m as usize {
            let rs = p.r_at(&s.split, j);
            prop_assert!((rs - s.freq[j]).abs() <= 1e-9 * s.freq[j].abs().max(1.0));
            prop_assert!(rs < p.r_at(&n1, j) + shift);
            let mj = |n: &[f64]| -d * n.iter().sum::<f64>() + c * n[j];
            let mut prev = f64::NEG_INFINITY;
            for l in 0..5 {
                let nl: Vec<f64> = s.sigma.iter().map(|v| (*v + l) as f64).collect();
                let v = mj(&nl);
                prop_assert!(v > prev);
                prev = v;
            }
            prop_assert!(mj(&s.split) < mj(&n1) + d * mf);
        }
        prop_assert!(s.n_used as f64 <= s.s_total + mf + 1e-9);
        prop_assert!(check_half(p, &heights, &s).passed);
    }

    #[test]
    fn bound_within_schedule_guarantee(seed in any::<u64>(), case in case_strategy(), m in 1u32..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Regime where the closed-form constants dominate the schedule's budget.
        let in_regime = |c: &bakerbound::bound::BoundCertificate| {
            let p = &c.params;
            match case {
                GrowthCase::Log => true,
                GrowthCase::Constant => c.f >= 1.0 && p.e2 * p.mf() + p.b <= 1.0 && (c.exponent <= 1.0 || p.e2 == 0.0),
                GrowthCase::Linear => c.exponent <= 1.0 || p.e1 == 0.0,
            }
        };
        let cert = std::iter::repeat_with(|| cert_for(&mut rng, case, m)).find(in_regime).unwrap();
        let p = &cert.params;
        let heights = admissible_heights(&mut rng, &cert, 6.0);
        let log_h = log_height(p.m, &heights).unwrap();
        let s = solve_master_log(p, log_h);
        prop_assume!(s.is_ok());
        let log_lb = log_lower_bound_at(&cert, log_h).unwrap();
        let log_chain = 2f64.ln() + q_budget(p, s.unwrap()) + log_lb;
        prop_assert!(log_chain <= 1e-6, "log(2e^q * bound) = {}", log_chain);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn volume_identity(spec in spec_strategy(), hs in prop::collection::vec(1u64..=100, 1..=4)) {
        let m = hs.len() as i32;
        let r0 = minkowski_radius(&spec, &hs);
        let prod: f64 = hs.iter().map(|h| (*h as f64).powi(2)).product();
        let lhs = PI.powi(m + 1) * prod * r0 * r0;
        let rhs = 2f64.powi(2 * m + 2) * lattice_determinant(&spec).powi(m + 1);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs);
    }

    #[test]
    fn witness_matches_oracle(
        spec in spec_strategy(),
        theta in prop::collection::vec((0.1f64..3.0, 0.0f64..3.0), 1..=2),
        h in 1u64..=3,
    ) {
        let theta: Vec<Complex64> = theta.iter().map(|(a, b)| Complex64::new(*a, *b)).collect();
        let sb = SearchBox::new(theta.clone(), vec![h; theta.len()], spec).unwrap();
        let w = find_witness(&sb, 1_000_000, Precision::F64).unwrap();
        prop_assert!(w.value <= minkowski_radius(&spec, &sb.heights));
        let s: f64 = theta.iter().map(|t| t.norm() * h as f64).sum();
        let h0 = (s + spec.covering_radius_bound() + 1.0).ceil() as u64;
        let oracle = brute_min(&sb, h0, 1_000_000, Precision::F64).unwrap();
        prop_assert!((oracle.value - w.value).abs() <= 1e-12 * w.value.max(1e-300));
    }

    #[test]
    fn shidlovskii_within_bound(theta in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..=3), h in 1u64..=6) {
        let theta: Vec<Complex64> = theta.iter().map(|(a, b)| Complex64::new(*a, *b)).collect();
        let w = shidlovskii_witness(&theta, h, 10_000_000).unwrap();
        prop_assert!(w.value <= shidlovskii_bound(&theta, h));
    }
}

/// Coefficient `c_{j,ν}` of the built-in families.
fn series_coeff(kind: SeriesKind, j: u64, nu: u64) -> BigRational {
    let jj = BigInt::from(j);
    match kind {
        SeriesKind::Geometric => BigRational::from_integer(jj.pow(nu as u32)),
        SeriesKind::Log => BigRational::new(BigInt::one(), BigInt::from(nu + j)),
        SeriesKind::Exp => {
            let fact: BigInt = (1..=nu).map(BigInt::from).product();
            BigRational::new(jj.pow(nu as u32), fact)
        }
    }
}

fn kind_strategy() -> impl Strategy<Value = SeriesKind> {
    prop::sample::select(vec![
        SeriesKind::Geometric,
        SeriesKind::Log,
        SeriesKind::Exp,
    ])
}

fn complex_det(mut a: Vec<Vec<Complex64>>) -> Complex64 {
    let n = a.len();
    let mut det = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let p = (k..n)
            .max_by(|x, y| a[*x][k].norm().total_cmp(&a[*y][k].norm()))
            .unwrap();
        if a[p][k].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if p != k {
            a.swap(p, k);
            det = -det;
        }
        det *= a[k][k];
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                let t = a[k][j];
                a[i][j] -= f * t;
            }
        }
    }
    det
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn pade_order_conditions(kind in kind_strategy(), n in prop::collection::vec(1u64..=3, 1..=3)) {
        let big_n: u64 = n.iter().sum();
        for k in 0..=n.len() {
            let row = match pade_row(kind, &n, k) {
                Ok(r) => r,
                Err(_) => return Ok(()),
            };
            let deg_cap = if k == 0 { big_n } else { big_n - 1 };
            prop_assert!(row.p0.len() as u64 <= deg_cap + 1);
            prop_assert!(row.p0.iter().any(|c| !c.is_zero()));
            for j in 1..=n.len() {
                let rho = vanishing_order(&n, k, j);
                for nu in 0..rho {
                    let mut coeff = BigRational::zero();
                    for (i, p) in row.p0.iter().enumerate() {
                        if i as u64 <= nu {
                            coeff += BigRational::from_integer(p.clone()) * series_coeff(kind, j as u64, nu - i as u64);
                        }
                    }
                    if nu <= big_n {
                        coeff -= &row.pj[j - 1][nu as usize];
                    }
                    prop_assert!(coeff.is_zero(), "row {} j {} coefficient {} is {}", k, j, nu, coeff);
                }
            }
        }
    }

    #[test]
    fn tables_are_consistent(
        kind in prop::sample::select(vec![SeriesKind::Log, SeriesKind::Exp]),
        n in prop::collection::vec(1u64..=4, 1..=2),
        d in prop::sample::select(vec![1u64, 2, 3]),
    ) {
        let spec = FieldSpec::new(d).unwrap();
        let z0 = QuadRational::rational(BigRational::new(1.into(), 3.into()));
        let sys = SeriesSystem::new(kind, n.len(), z0, spec).unwrap();
        let t = match hermite_pade(&sys, &n, 40) {
            Ok(t) => t,
            Err(_) => return Ok(()),
        };
        let fm: Vec<Vec<Complex64>> = t.entries.iter().map(|r| r.iter().map(|x| embed(x, &spec)).collect()).collect();
        // Rounding error of elimination, scaled by the Hadamard bound.
        let hadamard: f64 = fm.iter().map(|r| r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).product();
        let err = 1e-12 * hadamard;
        let fd = complex_det(fm);
        let exact = embed(&t.determinant, &spec);
        prop_assert!((exact - fd).norm() <= err.max(1e-9 * exact.norm()));
        if fd.norm() > 1e-6 && fd.norm() > err {
            prop_assert!(check_determinant(&t.entries, &spec));
        }
        for k in 0..=t.m() {
            for j in 1..=t.m() {
                let direct = linear_form_value(&sys, &t, k, j, 1e-40);
                let stored = t.remainders[k][j - 1];
                prop_assert!((direct - stored).abs() <= 1e-10 * stored.max(direct), "{} vs {}", direct, stored);
            }
        }
    }

    #[test]
    fn fit_round_trip(seed in any::<u64>(), case in case_strategy(), m in 1u32..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut truth = AxiomParams::base(case, m);
        truth.a = rng.gen_range(0.5..3.0);
        truth.c = rng.gen_range(1.0..4.0);
        if m > 1 {
            truth.d = rng.gen_range(0.0..0.3);
        }
        let mut ns = Vec::new();
        for n in 2..=16u64 {
            let mut v = vec![1; m as usize];
            v[0] = n;
            ns.push(vec![n; m as usize]);
            if m > 1 {
                ns.push(v);
            }
        }
        let samples: Vec<EnvelopeSample> = ns
            .iter()
            .map(|n| {
                let nf: Vec<f64> = n.iter().map(|v| *v as f64).collect();
                EnvelopeSample {
                    n: n.clone(),
                    log_a0: truth.q_at(nf.iter().sum()),
                    log_l: (0..n.len()).map(|j| -truth.r_at(&nf, j)).collect(),
                }
            })
            .collect();
        let fit = fit_axioms(&samples, &FitOptions::new(case)).unwrap().params;
        prop_assert!((fit.a - truth.a).abs() <= 1e-6);
        prop_assert!((fit.c - truth.c).abs() <= 1e-6);
        prop_assert!((fit.d - truth.d).abs() <= 1e-6);
    }
}

fn identity_table(spec: FieldSpec, entries: Vec<Vec<RingInt>>) -> FormTable {
    let m = entries.len() - 1;
    FormTable {
        spec,
        kind: SeriesKind::Log,
        eval_point: QuadRational::one(),
        n: vec![1; m],
        determinant: bakerbound::pade::det_bareiss(&entries, &spec),
        entries,
        thetas: vec![Complex64::new(1.0, 0.0); m],
        remainders: vec![vec![1.0; m]; m + 1],
        log_remainders: vec![vec![0.0; m]; m + 1],
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn some_gk_nonzero(
        spec in spec_strategy(),
        entries in prop::collection::vec(prop::collection::vec(ring_strategy(20), 3), 3),
        beta in prop::collection::vec(ring_strategy(20), 3),
    ) {
        prop_assume!(beta.iter().any(|b| !b.is_zero()));
        let t = identity_table(spec, entries);
        prop_assume!(!t.determinant.is_zero());
        let g = compute_gk(&t, &beta).unwrap();
        prop_assert!(g.iter().any(|x| !x.is_zero()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn curve_csv_round_trip(seed in any::<u64>(), case in case_strategy()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cert = cert_for(&mut rng, case, 1);
        let p = &cert.params;
        let argv: Vec<String> = [
            "bakerbound", "epsilon-curve", "--case", &p.case.index().to_string(), "--m", "1",
            "--a", &p.a.to_string(), "--b", &p.b.to_string(), "--c", &p.c.to_string(), "--d", &p.d.to_string(),
            "--b0", &p.b0.to_string(), "--b1", &p.b1.to_string(), "--b2", &p.b2.to_string(), "--b3", &p.b3.to_string(),
            "--e0", &p.e0.to_string(), "--e1", &p.e1.to_string(), "--e2", &p.e2.to_string(), "--e3", &p.e3.to_string(),
            "--Nmin", &p.n_min.to_string(), "--points", "12",
        ].iter().map(|s| s.to_string()).collect();
        let mut buf = Vec::new();
        run(argv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        prop_assert!(!text.contains('\r'));
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        prop_assert_eq!(rd.headers().unwrap().iter().collect::<Vec<_>>(), vec!["H", "epsilon", "bound"]);
        let mut rows = 0;
        for rec in rd.records() {
            let rec = rec.unwrap();
            let h: f64 = rec[0].parse().unwrap();
            let (eps, bound) = curve_row(&cert, h).unwrap();
            let e2: f64 = rec[1].parse().unwrap();
            let b2: f64 = rec[2].parse().unwrap();
            prop_assert!((eps - e2).abs() <= 1e-12 * eps.abs().max(1e-300));
            prop_assert!((bound - b2).abs() <= 1e-12 * bound.abs().max(1e-300));
            rows += 1;
        }
        prop_assert_eq!(rows, 12);
    }

    #[test]
    fn verify_pass_implies_oracle_above_bound(seed in any::<u64>(), d in prop::sample::select(vec![1u64, 2, 3, 7])) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = FieldSpec::new(d).unwrap();
        let p = AxiomParams {
            a: rng.gen_range(0.1..1.5),
            c: rng.gen_range(1.0..3.0),
            ..AxiomParams::base(GrowthCase::Constant, 1)
        };
        let cert = certificate(&p).unwrap();
        let theta = vec![Complex64::new(rng.gen_range(0.1..3.0), rng.gen_range(0.0..3.0))];
        let grid = (0..4).map(|k| cert.log_g.exp() * 3f64.powi(k)).collect();
        let input = VerifyInput {
            params: p,
            spec,
            theta,
            tables: &[],
            system: None,
            grid,
            height_cap: 40,
            unbalanced: false,
            enum_cap: 10_000_000,
            precision: Precision::F64,
            max_n: 40,
        };
        let rep = verify_consistency(&input).unwrap();
        for r in &rep.rows {
            if r.status == RowStatus::Pass {
                prop_assert!(r.oracle.unwrap() >= r.bound.unwrap());
            }
            if r.status == RowStatus::Skipped {
                prop_assert!(r.log_h < cert.log_g);
            }
        }
    }
}
