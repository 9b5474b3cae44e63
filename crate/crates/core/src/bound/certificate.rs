use std::f64::consts::E;

use serde::Serialize;

use crate::bound::params::{AxiomParams, GrowthCase};
use crate::bound::roots::{refine_root, solve_master_threshold};
use crate::bound::zfun::{rho2, z_inverse};
use crate::error::{Error, Result};
use crate::precision::{Dd, Real};

/// Case-specific constants of the certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum CaseConstants<R> {
    Constant {
        a1: R,
        b1: R,
    },
    Log {
        a2: R,
        b2: R,
        c2: R,
        d2: R,
        e2: R,
    },
    Linear {
        v1: R,
        v2: R,
        w1: R,
        w2: R,
        a3: R,
        b3: R,
    },
}

impl<R: Real> CaseConstants<R> {
    pub fn named(&self) -> Vec<(&'static str, R)> {
        match *self {
            CaseConstants::Constant { a1, b1 } => vec![("A_1", a1), ("B_1", b1)],
            CaseConstants::Log { a2, b2, c2, d2, e2 } => {
                vec![
                    ("A_2", a2),
                    ("B_2", b2),
                    ("C_2", c2),
                    ("D_2", d2),
                    ("E_2", e2),
                ]
            }
            CaseConstants::Linear {
                v1,
                v2,
                w1,
                w2,
                a3,
                b3,
            } => vec![
                ("v_1", v1),
                ("v_2", v2),
                ("w_1", w1),
                ("w_2", w2),
                ("A_3", a3),
                ("B_3", b3),
            ],
        }
    }
}

/// Explicit constants of the lower bound `F·H^{-exponent-ε(H)}` for `H ≥ G`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCertificate {
    pub params: AxiomParams,
    /// `2/(c − dm)`
    pub f: f64,
    /// `a/(c − dm)`
    pub exponent: f64,
    /// Largest root of the threshold equation, when one exists.
    pub s_root: Option<f64>,
    /// `x_l`
    pub x: f64,
    /// Height threshold `G_l`; may be `inf` when only `log_g` is representable.
    pub g: f64,
    pub log_g: f64,
    /// Leading constant `F_l`; may underflow to `0` when only `log_leading` is representable.
    pub leading: f64,
    pub log_leading: f64,
    pub constants: CaseConstants<f64>,
}

/// Certificate constants in a generic real type.
#[derive(Debug, Clone, Copy)]
pub struct CertificateValues<R> {
    pub f: R,
    pub exponent: R,
    pub x: R,
    pub log_g: R,
    pub leading: R,
    pub log_leading: R,
    pub constants: CaseConstants<R>,
}

impl<R: Real> CertificateValues<R> {
    pub fn named(&self) -> Vec<(&'static str, R)> {
        let mut out = vec![
            ("f", self.f),
            ("exponent", self.exponent),
            ("x", self.x),
            ("log_G", self.log_g),
            ("G", self.log_g.exp()),
            ("F", self.leading),
            ("log_F", self.log_leading),
        ];
        out.extend(self.constants.named());
        out
    }
}

fn values<R: Real>(p: &AxiomParams, x: R) -> CertificateValues<R> {
    let r = |v: f64| R::from_f64(v);
    let m = r(p.mf());
    let (a, b, c, d) = (r(p.a), r(p.b), r(p.c), r(p.d));
    let (b0, b1, b2, b3) = (r(p.b0), r(p.b1), r(p.b2), r(p.b3));
    let (e0, e1, e2, e3) = (r(p.e0), r(p.e1), r(p.e2), r(p.e3));
    let gap = c - d * m;
    let f = r(2.0) / gap;
    let exponent = a / gap;
    let half = r(0.5);

    let floor = r(p.mf().ln()).max(r((p.n_min as f64).ln()));
    let (constants, exponent_part, log_g) = match p.case {
        GrowthCase::Constant => {
            let a1 = a * (d * m * m + e2 * m) / gap + a * m + b + f.ln();
            let b1 = e2 * m + b;
            (CaseConstants::Constant { a1, b1 }, -a1, floor.max(x / f))
        }
        GrowthCase::Log => {
            let a2 = b0 + a * e0 * m / gap;
            let bb2 = a + b0 + b1 + a * e1 * m / gap;
            let c2 = a * m + b2 + a * (d * m * m + e2 * m) / gap;
            let d2 = b0 * m + a * e0 * m * m / gap;
            let ee2 = (a + b0 + b1) * m
                + b2
                + b3
                + a * ((r(2.0) * e0 + e1) * m * m + (e2 + e3) * m) / gap;
            let e = r(1.0).exp();
            let log_g = floor.max(x * x.ln() / f).max(e / f);
            (
                CaseConstants::Log {
                    a2,
                    b2: bb2,
                    c2,
                    d2,
                    e2: ee2,
                },
                -ee2,
                log_g,
            )
        }
        GrowthCase::Linear => {
            let v2 = r(1.0) / gap.sqrt();
            let t = d * m * m + e1 * m;
            let v1 = (t + (t * t + r(4.0) * e1 * m * m * gap).sqrt()) / (r(2.0) * gap);
            let w1 = a * t / gap + r(2.0) * a * m + b1;
            let w2 = a * m * m + b1 * m + e1 * m * m;
            let a3 = v2 * w1;
            let b3 = v1 * w1 + w2;
            (
                CaseConstants::Linear {
                    v1,
                    v2,
                    w1,
                    w2,
                    a3,
                    b3,
                },
                -b3,
                floor.max(r(1.0)),
            )
        }
    };
    let log_leading = exponent_part - r(2.0).ln();
    let leading = half * exponent_part.exp();
    CertificateValues {
        f,
        exponent,
        x,
        log_g,
        leading,
        log_leading,
        constants,
    }
}

/// Computes the certificate in binary64.
pub fn certificate(p: &AxiomParams) -> Result<BoundCertificate> {
    p.validate()?;
    let t = solve_master_threshold(p)?;
    let v = values::<f64>(p, t.x);
    Ok(BoundCertificate {
        params: p.clone(),
        f: v.f,
        exponent: v.exponent,
        s_root: t.s,
        x: t.x,
        g: v.log_g.exp(),
        log_g: v.log_g,
        leading: v.leading,
        log_leading: v.log_leading,
        constants: v.constants,
    })
}

/// Certificate constants in double-double arithmetic.
pub fn certificate_extended(p: &AxiomParams) -> Result<CertificateValues<Dd>> {
    p.validate()?;
    let t = solve_master_threshold(p)?;
    let x = match t.s {
        Some(s) if s > 1.0 => refine_root::<Dd>(p, s).max(Dd::ONE),
        _ => Dd::ONE,
    };
    Ok(values::<Dd>(p, x))
}

/// `log H` for `H = ∏(2m·H_j)`.
pub fn log_height(m: u32, heights: &[f64]) -> Result<f64> {
    if heights.len() != m as usize {
        return Err(Error::Domain(format!(
            "expected {m} heights, got {}",
            heights.len()
        )));
    }
    if let Some(h) = heights.iter().find(|h| !(**h >= 1.0) || !h.is_finite()) {
        return Err(Error::Domain(format!(
            "heights must be finite and >= 1, got {h}"
        )));
    }
    let two_m = 2.0 * m as f64;
    Ok(heights.iter().map(|h| (two_m * h).ln()).sum())
}

fn check_admissible(cert: &BoundCertificate, log_h: f64) -> Result<()> {
    if !(log_h >= cert.log_g * (1.0 - 1e-15)) {
        return Err(Error::Domain(format!(
            "H = e^{log_h} is below the threshold G = e^{}",
            cert.log_g
        )));
    }
    Ok(())
}

/// `ε_l(H)` given `log H`.
pub fn epsilon_log(cert: &BoundCertificate, log_h: f64) -> Result<f64> {
    check_admissible(cert, log_h)?;
    Ok(match cert.constants {
        CaseConstants::Constant { b1, .. } => {
            if b1 == 0.0 || log_h <= 1.0 {
                0.0
            } else {
                b1 * log_h.ln() / log_h
            }
        }
        CaseConstants::Log { a2, b2, c2, d2, .. } => {
            let z = z_inverse(cert.f * log_h)?;
            let lz = z.ln();
            a2 * (cert.f * z / log_h).sqrt()
                + b2 * z / log_h
                + c2 * lz / log_h
                + d2 * lz.max(0.0).sqrt() / log_h
        }
        CaseConstants::Linear { a3, .. } => a3 / log_h.sqrt(),
    })
}

/// `ε_l(H)`.
pub fn epsilon(cert: &BoundCertificate, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::Domain(format!("H must be positive, got {h}")));
    }
    epsilon_log(cert, h.ln())
}

/// `log` of the lower bound at `log H`.
pub fn log_lower_bound_at(cert: &BoundCertificate, log_h: f64) -> Result<f64> {
    let eps = epsilon_log(cert, log_h)?;
    Ok(cert.log_leading - (cert.exponent + eps) * log_h)
}

/// `F_l·H^{-exponent-ε_l(H)}` with `H = ∏(2m·H_j)`.
pub fn lower_bound(cert: &BoundCertificate, heights: &[f64]) -> Result<f64> {
    let log_h = log_height(cert.params.m, heights)?;
    Ok(log_lower_bound_at(cert, log_h)?.exp())
}

/// Canonical `x_0 = max{f log m, f log N_2, x_2 log x_2, e^e}`.
pub fn corollary_x0(cert: &BoundCertificate) -> f64 {
    let p = &cert.params;
    (cert.f * p.mf().ln())
        .max(cert.f * (p.n_min as f64).ln())
        .max(cert.x * cert.x.ln())
        .max(E.powf(E))
}

/// `log` of the simplified case-2 bound at `log H`.
pub fn log_corollary_bound_at(cert: &BoundCertificate, log_h: f64, x0: f64) -> Result<f64> {
    let CaseConstants::Log { a2, b2, c2, d2, e2 } = cert.constants else {
        return Err(Error::Domain(
            "the simplified bound applies to case 2 only".into(),
        ));
    };
    let f = cert.f;
    if f < 1.0 {
        return Err(Error::Domain(format!(
            "the simplified bound needs f = 2/(c - d*m) >= 1, got {f}"
        )));
    }
    let rho = rho2(x0)?;
    if !(f * log_h >= x0) {
        return Err(Error::Domain(format!(
            "need f*log H >= x0, got {} < {x0}",
            f * log_h
        )));
    }
    check_admissible(cert, log_h)?;
    let ll = log_h.ln();
    let frho = f * rho;
    let log_prefactor = -(2f64.ln() + e2 + c2 * frho.ln()) + c2 * (ll.ln() - ll);
    let tail = cert.exponent
        + a2 * f * rho.sqrt() / ll.sqrt()
        + b2 * frho / ll
        + d2 / log_h * (frho * log_h / ll).ln().max(0.0).sqrt();
    Ok(log_prefactor - tail * log_h)
}

/// Simplified case-2 bound; never exceeds [`lower_bound`].
pub fn corollary_bound(cert: &BoundCertificate, heights: &[f64], x0: f64) -> Result<f64> {
    let log_h = log_height(cert.params.m, heights)?;
    Ok(log_corollary_bound_at(cert, log_h, x0)?.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn case1() -> BoundCertificate {
        certificate(&AxiomParams {
            c: 2.0,
            ..AxiomParams::base(GrowthCase::Constant, 1)
        })
        .unwrap()
    }

    fn case2() -> BoundCertificate {
        certificate(&AxiomParams {
            c: 2.0,
            ..AxiomParams::base(GrowthCase::Log, 1)
        })
        .unwrap()
    }

    fn case3() -> BoundCertificate {
        certificate(&AxiomParams::base(GrowthCase::Linear, 1)).unwrap()
    }

    #[test]
    fn case1_hand_values() {
        let c = case1();
        assert_eq!(c.f, 1.0);
        assert_eq!(c.x, 1.0);
        assert_eq!(c.exponent, 0.5);
        assert_eq!(c.constants, CaseConstants::Constant { a1: 1.0, b1: 0.0 });
        assert_relative_eq!(c.leading, 1.0 / (2.0 * E), max_relative = 1e-15);
        assert_relative_eq!(c.g, E, max_relative = 1e-15);
        assert_eq!(epsilon(&c, 1e6).unwrap(), 0.0);
        let lb = lower_bound(&c, &[100.0]).unwrap();
        assert_relative_eq!(lb, 0.013007, max_relative = 1e-4);
        assert_relative_eq!(lb, 1.0 / (2.0 * E) / 200f64.sqrt(), max_relative = 1e-13);
    }

    #[test]
    fn case2_hand_values() {
        let c = case2();
        assert_eq!(c.f, 1.0);
        assert_eq!(
            c.constants,
            CaseConstants::Log {
                a2: 0.0,
                b2: 1.0,
                c2: 1.0,
                d2: 0.0,
                e2: 1.0
            }
        );
        assert_relative_eq!(c.leading, 1.0 / (2.0 * E), max_relative = 1e-15);
        assert_relative_eq!(c.log_g, E, max_relative = 1e-15);
        let z = z_inverse(E * E).unwrap();
        let expect = z / (E * E) + z.ln() / (E * E);
        assert_relative_eq!(
            epsilon_log(&c, E * E).unwrap(),
            expect,
            max_relative = 1e-14
        );
    }

    #[test]
    fn case3_hand_values() {
        let c = case3();
        assert_eq!(
            c.constants,
            CaseConstants::Linear {
                v1: 0.0,
                v2: 1.0,
                w1: 2.0,
                w2: 1.0,
                a3: 2.0,
                b3: 1.0
            }
        );
        assert_relative_eq!(c.leading, 1.0 / (2.0 * E), max_relative = 1e-15);
        assert_relative_eq!(c.g, E, max_relative = 1e-15);
        assert_relative_eq!(epsilon_log(&c, 4.0).unwrap(), 1.0);
        let lb = lower_bound(&c, &[(8f64).exp() / 2.0]).unwrap();
        let expect = 1.0 / (2.0 * E) * (-8.0 * (1.0 + 2.0 / 8f64.sqrt())).exp();
        assert_relative_eq!(lb, expect, max_relative = 1e-12);
    }

    #[test]
    fn boundary_and_below_threshold() {
        let c = case3();
        assert!(epsilon_log(&c, c.log_g).is_ok());
        assert!(epsilon_log(&c, 0.5).is_err());
        assert!(lower_bound(&c, &[1.0]).is_err());
    }

    #[test]
    fn corollary_examples() {
        assert_relative_eq!(rho2(E.powf(E)).unwrap(), 1.58198, max_relative = 1e-5);
        let c = case2();
        let x0 = corollary_x0(&c);
        assert_relative_eq!(x0, E.powf(E));
        let rho = rho2(x0).unwrap();
        let log_h = E.powi(3);
        let got = log_corollary_bound_at(&c, log_h, x0).unwrap();
        let expect = (1.0 / (2.0 * E * rho) * (3.0 / log_h)).ln() - log_h * (0.5 + rho / 3.0);
        assert_relative_eq!(got, expect, max_relative = 1e-12);
        assert!(got <= log_lower_bound_at(&c, log_h).unwrap());
        let later = log_corollary_bound_at(&c, log_h * 1.5, x0).unwrap();
        assert!(later < got);
        assert!(log_corollary_bound_at(&case1(), log_h, x0).is_err());
    }

    #[test]
    fn extended_matches_binary64() {
        let p = AxiomParams {
            a: 1.3,
            c: 3.1,
            d: 0.4,
            e0: 0.2,
            e1: 0.7,
            e2: 0.1,
            b0: 0.3,
            ..AxiomParams::base(GrowthCase::Log, 2)
        };
        let c = certificate(&p).unwrap();
        let x = certificate_extended(&p).unwrap();
        assert_relative_eq!(x.leading.to_f64(), c.leading, max_relative = 1e-12);
        assert_relative_eq!(x.x.to_f64(), c.x, max_relative = 1e-12);
        assert_eq!(
            x.leading.to_sig_string(30).len(),
            "1.00000000000000000000000000000e-1".len()
        );
    }
}
