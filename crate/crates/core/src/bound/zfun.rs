use std::f64::consts::E;

use crate::error::{Error, Result};

const INV_E: f64 = 1.0 / E;

/// Inverse of `z ↦ z log z` on `z ≥ 1/e`.
pub fn z_inverse(y: f64) -> Result<f64> {
    if !y.is_finite() {
        return Err(Error::Domain(format!(
            "z_inverse needs a finite argument, got {y}"
        )));
    }
    if y < -INV_E {
        return Err(Error::Domain(format!("z_inverse needs y >= -1/e, got {y}")));
    }
    if y <= -INV_E + 1e-300 {
        return Ok(INV_E);
    }
    let tol = 1e-13 * y.abs().max(1.0);
    let residual = |z: f64| z * z.ln() - y;

    let start = if y > E {
        z_chain(y, 2)?
    } else {
        // z log z is convex, so Newton from the right converges monotonically.
        E.max(y)
    };
    let mut z = start;
    for _ in 0..100 {
        let r = residual(z);
        if r.abs() <= tol {
            return Ok(z);
        }
        let next = z - r / (z.ln() + 1.0);
        if !next.is_finite() || next < INV_E {
            break;
        }
        if (next - z).abs() <= 4.0 * f64::EPSILON * z {
            return Ok(next);
        }
        z = next;
    }
    bisect(y, tol)
}

fn bisect(y: f64, tol: f64) -> Result<f64> {
    let mut lo = INV_E;
    let mut hi = E.max(y);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        let r = mid * mid.ln() - y;
        if r.abs() <= tol || hi - lo <= f64::EPSILON * mid {
            return Ok(mid);
        }
        if r < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Nested-log iterates `z_0 = y`, `z_n = y / log z_{n-1}`.
pub fn z_chain(y: f64, n: u32) -> Result<f64> {
    if !(y > E) {
        return Err(Error::Domain(format!("z_chain needs y > e, got {y}")));
    }
    let mut z = y;
    for _ in 0..n {
        z = y / z.ln();
    }
    Ok(z)
}

/// `log x / (log x − log log x)` for `x ≥ e^e`.
pub fn rho2(x0: f64) -> Result<f64> {
    if !(x0 >= E.powf(E) * (1.0 - 1e-15)) {
        return Err(Error::Domain(format!("rho needs x0 >= e^e, got {x0}")));
    }
    let l = x0.ln();
    Ok(l / (l - l.ln()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn fixed_points() {
        assert_relative_eq!(z_inverse(E).unwrap(), E, max_relative = 1e-14);
        assert_relative_eq!(
            z_inverse(2.0 * 2f64.ln()).unwrap(),
            2.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(z_inverse(0.0).unwrap(), 1.0, max_relative = 1e-12);
        assert_relative_eq!(z_inverse(-INV_E).unwrap(), INV_E);
        assert!(z_inverse(-0.5).is_err());
    }

    #[test]
    fn bisection_oracle_at_100() {
        let (mut lo, mut hi) = (1.0f64, 100.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid * mid.ln() < 100.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        let z = z_inverse(100.0).unwrap();
        assert_relative_eq!(z, lo, max_relative = 1e-13);
        assert!((z - 29.55).abs() < 0.02);
    }

    #[test]
    fn chain_examples() {
        assert_eq!(z_chain(10.0, 0).unwrap(), 10.0);
        assert_relative_eq!(z_chain(10.0, 1).unwrap(), 10.0 / 10f64.ln());
        assert_relative_eq!(z_chain(10.0, 2).unwrap(), 6.8096, max_relative = 1e-4);
        assert!(z_chain(E, 1).is_err());
    }

    #[test]
    fn rho_at_threshold() {
        assert_relative_eq!(
            rho2(E.powf(E)).unwrap(),
            E / (E - 1.0),
            max_relative = 1e-14
        );
        assert!(rho2(10.0).is_err());
    }

    #[test]
    fn value_at_e_squared() {
        // z log z = e² has z ≈ 4.7459
        let z = z_inverse(E * E).unwrap();
        assert_relative_eq!(z * z.ln(), E * E, max_relative = 1e-14);
        assert!((z - 4.7459).abs() < 1e-3);
    }
}
