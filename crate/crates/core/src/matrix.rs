//! Dense square matrices over exact scalars.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub type Matrix = Vec<Vec<Scalar>>;

pub fn check_square(m: &[Vec<Scalar>]) -> Result<usize> {
    let n = m.len();
    if m.iter().any(|row| row.len() != n) {
        return Err(Error::InputShape(format!("matrix with {n} rows is not square")));
    }
    Ok(n)
}

pub fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { Scalar::one() } else { Scalar::zero() }).collect())
        .collect()
}

/// Determinant by fraction-exact Gaussian elimination.
pub fn determinant(m: &[Vec<Scalar>]) -> Result<Scalar> {
    let n = check_square(m)?;
    let mut a: Matrix = m.to_vec();
    let mut det = Scalar::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Ok(Scalar::zero());
        };
        if p != col {
            a.swap(p, col);
            det = -det;
        }
        let pivot = a[col][col].clone();
        det *= &pivot;
        let inv = pivot.inv().expect("nonzero pivot");
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] * &inv;
            for c in col..n {
                let d = &f * &a[col][c];
                a[r][c] -= &d;
            }
        }
    }
    Ok(det)
}

/// Inverse by Gauss–Jordan elimination; `None` if singular.
pub fn inverse(m: &[Vec<Scalar>]) -> Result<Option<Matrix>> {
    let n = check_square(m)?;
    let mut a: Matrix = m.to_vec();
    let mut inv = identity(n);
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Ok(None);
        };
        a.swap(p, col);
        inv.swap(p, col);
        let s = a[col][col].inv().expect("nonzero pivot");
        for c in 0..n {
            a[col][c] *= &s;
            inv[col][c] *= &s;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for c in 0..n {
                let d = &f * &a[col][c];
                a[r][c] -= &d;
                let d = &f * &inv[col][c];
                inv[r][c] -= &d;
            }
        }
    }
    Ok(Some(inv))
}

pub fn is_symmetric(m: &[Vec<Scalar>]) -> bool {
    (0..m.len()).all(|i| (0..i).all(|j| m[i][j] == m[j][i]))
}

pub fn mul(a: &[Vec<Scalar>], b: &[Vec<Scalar>]) -> Matrix {
    let k = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| (0..cols).map(|j| (0..k).map(|t| &row[t] * &b[t][j]).sum()).collect())
        .collect()
}
