//! Exact linear algebra: integer nullspaces and ring determinants.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::quadratic::{FieldSpec, RingInt};

fn content(row: &[BigInt]) -> BigInt {
    row.iter().fold(BigInt::zero(), |g, x| g.gcd(x))
}

fn primitive(row: &mut [BigInt]) {
    let g = content(row);
    if !g.is_zero() && !g.is_one() {
        for x in row.iter_mut() {
            *x = &*x / &g;
        }
    }
}

/// Clears denominators row by row.
pub fn integer_rows(rows: &[Vec<BigRational>]) -> Vec<Vec<BigInt>> {
    rows.iter()
        .map(|r| {
            let l = r.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            let mut out: Vec<BigInt> = r
                .iter()
                .map(|x| (x * BigRational::from_integer(l.clone())).to_integer())
                .collect();
            primitive(&mut out);
            out
        })
        .collect()
}

/// Fraction-free row echelon form; returns the pivot columns.
fn echelon(a: &mut [Vec<BigInt>], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        if r >= a.len() {
            break;
        }
        let Some(p) = (r..a.len())
            .filter(|&i| !a[i][col].is_zero())
            .min_by_key(|&i| a[i][col].abs())
        else {
            continue;
        };
        a.swap(r, p);
        for i in 0..a.len() {
            if i == r || a[i][col].is_zero() {
                continue;
            }
            let g = a[r][col].gcd(&a[i][col]);
            let mr = &a[i][col] / &g;
            let mi = &a[r][col] / &g;
            let (top, rest) = if i < r {
                let (lo, hi) = a.split_at_mut(r);
                (&hi[0], &mut lo[i])
            } else {
                let (lo, hi) = a.split_at_mut(i);
                (&lo[r], &mut hi[0])
            };
            for (x, t) in rest.iter_mut().zip(top.iter()) {
                *x = &*x * &mi - t * &mr;
            }
            primitive(rest);
        }
        pivots.push(col);
        r += 1;
    }
    pivots
}

/// The primitive integer vector spanning a one-dimensional nullspace.
pub fn nullspace_vector(rows: &[Vec<BigRational>], ncols: usize) -> Result<Vec<BigInt>> {
    let mut a = integer_rows(rows);
    let pivots = echelon(&mut a, ncols);
    let dim = ncols - pivots.len();
    if dim != 1 {
        return Err(Error::SingularSystem(format!(
            "expected a one-dimensional solution space, found dimension {dim}"
        )));
    }
    let free = (0..ncols)
        .find(|c| !pivots.contains(c))
        .expect("one free column");
    // Reduced form: each pivot row reads p·x_pc + q·x_free = 0.
    let denom_lcm = pivots
        .iter()
        .enumerate()
        .fold(BigInt::one(), |acc, (r, &pc)| acc.lcm(&a[r][pc].abs()));
    let mut x = vec![BigInt::zero(); ncols];
    x[free] = denom_lcm.clone();
    for (r, &pc) in pivots.iter().enumerate() {
        let p = &a[r][pc];
        x[pc] = -(&a[r][free] * &denom_lcm) / p;
    }
    primitive(&mut x);
    if let Some(lead) = x.iter().find(|v| !v.is_zero()) {
        if lead.is_negative() {
            for v in x.iter_mut() {
                *v = -&*v;
            }
        }
    }
    Ok(x)
}

/// Determinant over the ring of integers by Bareiss elimination.
pub fn det_bareiss(matrix: &[Vec<RingInt>], spec: &FieldSpec) -> RingInt {
    let n = matrix.len();
    if n == 0 {
        return RingInt::one();
    }
    let mut a: Vec<Vec<RingInt>> = matrix.to_vec();
    let mut negate = false;
    let mut prev = RingInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(p) => {
                    a.swap(k, p);
                    negate = !negate;
                }
                None => return RingInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = spec.mul(&a[i][j], &a[k][k]) - spec.mul(&a[i][k], &a[k][j]);
                a[i][j] = spec
                    .exact_div(&num, &prev)
                    .expect("Bareiss quotients are exact in an integral domain");
            }
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if negate {
        -d
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn nullspace_of_rank_deficient_row() {
        // x + 2y − z = 0, y + z/2 = 0 → (4, −1, 2) up to scale
        let rows = vec![
            vec![q(1, 1), q(2, 1), q(-1, 1)],
            vec![q(0, 1), q(1, 1), q(1, 2)],
        ];
        let v = nullspace_vector(&rows, 3).unwrap();
        let as_i: Vec<i64> = v.iter().map(|x| x.try_into().unwrap()).collect();
        assert_eq!(as_i, vec![4, -1, 2]);
        assert!(nullspace_vector(&rows[..1], 3).is_err());
    }

    #[test]
    fn bareiss_matches_expansion() {
        let spec = FieldSpec::new(1).unwrap();
        let m = |a: i64, b: i64| RingInt::new(a, b);
        let id = vec![vec![m(1, 0), m(0, 0)], vec![m(0, 0), m(1, 0)]];
        assert_eq!(det_bareiss(&id, &spec), m(1, 0));
        let same = vec![vec![m(1, 2), m(3, 0)], vec![m(1, 2), m(3, 0)]];
        assert!(det_bareiss(&same, &spec).is_zero());
        // [[i, 1], [2, 1+i]]: i(1+i) − 2 = −3 + i
        let g = vec![vec![m(0, 1), m(1, 0)], vec![m(2, 0), m(1, 1)]];
        assert_eq!(det_bareiss(&g, &spec), m(-3, 1));
        let s = vec![vec![m(0, 0), m(1, 0)], vec![m(1, 0), m(0, 0)]];
        assert_eq!(det_bareiss(&s, &spec), m(-1, 0));
    }
}
