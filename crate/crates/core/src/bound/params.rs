use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Growth function `g(N)` of the envelope exponents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum GrowthCase {
    /// `g(N) = 1`
    Constant,
    /// `g(N) = log N`
    Log,
    /// `g(N) = N`
    Linear,
}

impl GrowthCase {
    pub fn index(self) -> u8 {
        match self {
            GrowthCase::Constant => 1,
            GrowthCase::Log => 2,
            GrowthCase::Linear => 3,
        }
    }

    pub fn g(self, x: f64) -> f64 {
        match self {
            GrowthCase::Constant => 1.0,
            GrowthCase::Log => x.ln(),
            GrowthCase::Linear => x,
        }
    }

    /// Upper bound for `g'` on `[s, s + m]`.
    pub fn v_max(self, s: f64) -> f64 {
        match self {
            GrowthCase::Constant => 0.0,
            GrowthCase::Log => 1.0 / s,
            GrowthCase::Linear => 1.0,
        }
    }
}

impl TryFrom<u8> for GrowthCase {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(GrowthCase::Constant),
            2 => Ok(GrowthCase::Log),
            3 => Ok(GrowthCase::Linear),
            _ => Err(Error::InvalidParams(format!(
                "case must be 1, 2 or 3, got {v}"
            ))),
        }
    }
}

impl From<GrowthCase> for u8 {
    fn from(c: GrowthCase) -> u8 {
        c.index()
    }
}

impl fmt::Display for GrowthCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

/// Constants of the envelope axioms
///
/// ```text
/// |A_{k,0}(n)| ≤ e^{q(N)},   q(N) = (aN + b log N)g(N) + b0·N√(log N) + b1·N + b2·log N + b3
/// |L_{k,j}(n)| ≤ e^{-r_j(n)}, -r_j(n) = (dN − c·n_j)g(N) + e0·N√(log N) + e1·N + e2·log N + e3
/// ```
///
/// valid for `N ≥ n_min`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomParams {
    pub case: GrowthCase,
    pub m: u32,
    pub a: f64,
    #[serde(default)]
    pub b: f64,
    pub c: f64,
    #[serde(default)]
    pub d: f64,
    #[serde(default)]
    pub b0: f64,
    #[serde(default)]
    pub b1: f64,
    #[serde(default)]
    pub b2: f64,
    #[serde(default)]
    pub b3: f64,
    #[serde(default)]
    pub e0: f64,
    #[serde(default)]
    pub e1: f64,
    #[serde(default)]
    pub e2: f64,
    #[serde(default)]
    pub e3: f64,
    #[serde(rename = "N_min", default = "one")]
    pub n_min: u64,
}

fn one() -> u64 {
    1
}

impl AxiomParams {
    /// All constants zero except `a = c = 1`; callers override fields.
    pub fn base(case: GrowthCase, m: u32) -> Self {
        AxiomParams {
            case,
            m,
            a: 1.0,
            b: 0.0,
            c: 1.0,
            d: 0.0,
            b0: 0.0,
            b1: 0.0,
            b2: 0.0,
            b3: 0.0,
            e0: 0.0,
            e1: 0.0,
            e2: 0.0,
            e3: 0.0,
            n_min: 1,
        }
    }

    pub fn mf(&self) -> f64 {
        self.m as f64
    }

    /// `c − dm`
    pub fn gap(&self) -> f64 {
        self.c - self.d * self.mf()
    }

    /// `f = 2/(c − dm)`
    pub fn f(&self) -> f64 {
        2.0 / self.gap()
    }

    /// `a/(c − dm)`
    pub fn exponent(&self) -> f64 {
        self.a / self.gap()
    }

    pub fn validate(&self) -> Result<()> {
        let named = [
            ("a", self.a),
            ("b", self.b),
            ("c", self.c),
            ("d", self.d),
            ("b0", self.b0),
            ("b1", self.b1),
            ("b2", self.b2),
            ("b3", self.b3),
            ("e0", self.e0),
            ("e1", self.e1),
            ("e2", self.e2),
            ("e3", self.e3),
        ];
        for (name, v) in named {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParams(format!(
                    "{name} = {v} must be a finite nonnegative real"
                )));
            }
        }
        if self.m == 0 {
            return Err(Error::InvalidParams("m must be a positive integer".into()));
        }
        if self.n_min == 0 {
            return Err(Error::InvalidParams(
                "N_min must be a positive integer".into(),
            ));
        }
        if self.a <= 0.0 {
            return Err(Error::InvalidParams("a must be positive".into()));
        }
        if self.c <= 0.0 {
            return Err(Error::InvalidParams("c must be positive".into()));
        }
        if self.gap() <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "c - d*m must be positive (c = {}, d = {}, m = {})",
                self.c, self.d, self.m
            )));
        }
        let nonzero = |names: &[(&str, f64)]| -> Option<String> {
            names
                .iter()
                .find(|(_, v)| *v != 0.0)
                .map(|(n, _)| n.to_string())
        };
        match self.case {
            GrowthCase::Constant => {
                let extra = [
                    ("b0", self.b0),
                    ("b1", self.b1),
                    ("b2", self.b2),
                    ("b3", self.b3),
                    ("e0", self.e0),
                    ("e1", self.e1),
                    ("e3", self.e3),
                ];
                if let Some(n) = nonzero(&extra) {
                    return Err(Error::InvalidParams(format!(
                        "case 1 uses q(N) = aN + b log N and -r_j = dN - c n_j + e2 log N; {n} must be 0"
                    )));
                }
            }
            GrowthCase::Log => {
                if self.b != 0.0 {
                    return Err(Error::InvalidParams("case 2 requires b = 0".into()));
                }
            }
            GrowthCase::Linear => {
                let extra = [
                    ("b", self.b),
                    ("b0", self.b0),
                    ("b2", self.b2),
                    ("b3", self.b3),
                    ("e0", self.e0),
                    ("e2", self.e2),
                    ("e3", self.e3),
                ];
                if let Some(n) = nonzero(&extra) {
                    return Err(Error::InvalidParams(format!(
                        "case 3 requires b = b0 = b2 = b3 = e0 = e2 = e3 = 0; {n} is nonzero"
                    )));
                }
            }
        }
        Ok(())
    }

    /// `q` evaluated at a real argument `x ≥ 1`.
    pub fn q_at(&self, x: f64) -> f64 {
        let lx = x.ln();
        (self.a * x + self.b * lx) * self.case.g(x)
            + self.b0 * x * lx.sqrt()
            + self.b1 * x
            + self.b2 * lx
            + self.b3
    }

    /// `r_j` for a real index vector with `N = Σ n_i ≥ 1`.
    pub fn r_at(&self, n: &[f64], j: usize) -> f64 {
        let big_n: f64 = n.iter().sum();
        let ln = big_n.ln();
        -((self.d * big_n - self.c * n[j]) * self.case.g(big_n)
            + self.e0 * big_n * ln.sqrt()
            + self.e1 * big_n
            + self.e2 * ln
            + self.e3)
    }
}

/// `q(N)`, the log of the envelope for `|A_{k,0}|`.
pub fn q_envelope(p: &AxiomParams, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("q(N) needs N >= 1".into()));
    }
    Ok(p.q_at(n as f64))
}

/// `r_j(n̄)` with `j` counted from 1; `e^{-r_j}` bounds `|L_{k,j}|`.
pub fn r_envelope(p: &AxiomParams, n: &[f64], j: usize) -> Result<f64> {
    if n.len() != p.m as usize {
        return Err(Error::Domain(format!(
            "index vector has length {}, expected m = {}",
            n.len(),
            p.m
        )));
    }
    if j == 0 || j > n.len() {
        return Err(Error::Domain(format!(
            "j = {j} must lie in 1..={}",
            n.len()
        )));
    }
    if n.iter().any(|&x| !(x >= 0.0)) || n.iter().sum::<f64>() < 1.0 {
        return Err(Error::Domain(
            "index vector needs n_j >= 0 and N >= 1".into(),
        ));
    }
    Ok(p.r_at(n, j - 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn q_examples() {
        let p = AxiomParams {
            a: 1.0,
            ..AxiomParams::base(GrowthCase::Constant, 1)
        };
        assert_relative_eq!(q_envelope(&p, 10).unwrap(), 10.0);
        let p = AxiomParams {
            a: 1.0,
            ..AxiomParams::base(GrowthCase::Log, 1)
        };
        assert_eq!(q_envelope(&p, 1).unwrap(), 0.0);
        let p = AxiomParams {
            a: 2.0,
            b1: 1.0,
            ..AxiomParams::base(GrowthCase::Linear, 1)
        };
        assert_relative_eq!(q_envelope(&p, 3).unwrap(), 21.0);
        assert!(q_envelope(&p, 0).is_err());
    }

    #[test]
    fn r_examples() {
        let p = AxiomParams {
            c: 2.0,
            ..AxiomParams::base(GrowthCase::Constant, 1)
        };
        assert_relative_eq!(r_envelope(&p, &[5.0], 1).unwrap(), 10.0);
        let p = AxiomParams {
            c: 1.0,
            ..AxiomParams::base(GrowthCase::Log, 1)
        };
        assert_eq!(r_envelope(&p, &[1.0], 1).unwrap(), 0.0);
        let p = AxiomParams {
            c: 3.0,
            d: 1.0,
            ..AxiomParams::base(GrowthCase::Linear, 2)
        };
        assert_relative_eq!(r_envelope(&p, &[2.0, 2.0], 1).unwrap(), 8.0);
        assert!(r_envelope(&p, &[2.0], 1).is_err());
        assert!(r_envelope(&p, &[2.0, 2.0], 3).is_err());
    }

    #[test]
    fn validation() {
        let ok = AxiomParams::base(GrowthCase::Log, 2);
        assert!(ok.validate().is_ok());
        assert!(AxiomParams {
            a: 0.0,
            ..ok.clone()
        }
        .validate()
        .is_err());
        assert!(AxiomParams {
            c: 1.0,
            d: 0.5,
            ..ok.clone()
        }
        .validate()
        .is_err());
        assert!(AxiomParams {
            b: 1.0,
            ..ok.clone()
        }
        .validate()
        .is_err());
        assert!(AxiomParams {
            e1: -1.0,
            ..ok.clone()
        }
        .validate()
        .is_err());
        let c3 = AxiomParams::base(GrowthCase::Linear, 1);
        assert!(AxiomParams {
            b1: 1.0,
            e1: 2.0,
            ..c3.clone()
        }
        .validate()
        .is_ok());
        assert!(AxiomParams { e2: 1.0, ..c3 }.validate().is_err());
        let c1 = AxiomParams::base(GrowthCase::Constant, 1);
        assert!(AxiomParams {
            b: 1.0,
            e2: 1.0,
            ..c1.clone()
        }
        .validate()
        .is_ok());
        assert!(AxiomParams { b1: 1.0, ..c1 }.validate().is_err());
    }

    #[test]
    fn json_shape() {
        let p = AxiomParams {
            n_min: 4,
            ..AxiomParams::base(GrowthCase::Log, 2)
        };
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"case\":2"));
        assert!(s.contains("\"N_min\":4"));
        let back: AxiomParams = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }
}
