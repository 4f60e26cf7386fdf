// Copyright 2026 The stokescell authors
//
// Licensed under the Apache license, version 2.0 (the "license");
// you may not use this file except in compliance with the license.
// You may obtain a copy of the license at
//
//     http://www.apache.org/licenses/license-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the license is distributed on an "as is" basis,
// without warranties or conditions of any kind, either express or implied.
// See the license for the specific language governing permissions and
// limitations under the license.


//! Pivoted LU solves with a 1-norm condition estimate.

use super::{Density, OperatorMatrix};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector, LU};

/// Systems whose estimated 1-norm condition number exceeds this are rejected.
pub const COND_LIMIT: f64 = 1e14;

#[derive(Clone, Debug)]
pub struct Solution {
    pub x: DMatrix<f64>,
    /// max over columns of ‖Ax - b‖ / ‖b‖.
    pub residual: f64,
    pub cond: f64,
}

/// Hager-Higham estimate of ‖A⁻¹‖₁ from an LU factorisation.
fn inverse_norm1(lu: &LU<f64, nalgebra::Dyn, nalgebra::Dyn>) -> f64 {
    let n = lu.l().nrows();
    let l = lu.l();
    let u = lu.u();
    let p = lu.p();
    // A = P⁻¹ L U, so A⁻ᵀ b = P⁻¹ (L⁻ᵀ (U⁻ᵀ b))
    let solve_t = |b: &DVector<f64>| -> Option<DVector<f64>> {
        let w = u.tr_solve_upper_triangular(b)?;
        let mut v = l.tr_solve_lower_triangular(&w)?;
        p.inv_permute_rows(&mut v);
        Some(v)
    };
    let mut x = DVector::from_element(n, 1.0 / n as f64);
    let mut est = 0.0;
    for it in 0..5 {
        let Some(y) = lu.solve(&x) else {
            return f64::INFINITY;
        };
        let ny = vector_norm1(&y);
        if !ny.is_finite() {
            return f64::INFINITY;
        }
        if it > 0 && ny <= est {
            est = est.max(ny);
            break;
        }
        est = ny;
        let xi = y.map(|v| if v >= 0.0 { 1.0 } else { -1.0 });
        let Some(z) = solve_t(&xi) else {
            return f64::INFINITY;
        };
        let (jmax, zmax) = z.iter().enumerate().fold((0, 0.0f64), |acc, (j, v)| {
            if v.abs() > acc.1 {
                (j, v.abs())
            } else {
                acc
            }
        });
        if zmax <= z.dot(&x) {
            break;
        }
        x.fill(0.0);
        x[jmax] = 1.0;
    }
    est
}

fn vector_norm1(v: &DVector<f64>) -> f64 {
    v.iter().map(|v| v.abs()).sum()
}

fn matrix_norm1(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Estimated 1-norm condition number.
pub fn condition_estimate(a: &DMatrix<f64>) -> f64 {
    let lu = a.clone().lu();
    matrix_norm1(a) * inverse_norm1(&lu)
}

/// Solves A X = B; errors if A is numerically singular.
pub fn solve_system(tag: &str, a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<Solution> {
    if a.nrows() != a.ncols() || a.nrows() != b.nrows() {
        return Err(Error::Dimension(format!(
            "{tag}: system {}x{} with rhs {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let lu = a.clone().lu();
    let cond = matrix_norm1(a) * inverse_norm1(&lu);
    if !(cond <= COND_LIMIT) {
        return Err(Error::SingularMatrix {
            tag: tag.to_string(),
            cond,
        });
    }
    let x = lu.solve(b).ok_or_else(|| Error::SingularMatrix {
        tag: tag.to_string(),
        cond,
    })?;
    let r = a * &x - b;
    let residual = (0..b.ncols())
        .map(|j| {
            let nb = b.column(j).norm();
            let nr = r.column(j).norm();
            if nb > 0.0 {
                nr / nb
            } else {
                nr
            }
        })
        .fold(0.0, f64::max);
    Ok(Solution { x, residual, cond })
}

/// Solves op[x] = rhs for a density.
pub fn solve_dense(op: &OperatorMatrix, rhs: &Density) -> Result<(Density, f64)> {
    let b = DMatrix::from_column_slice(rhs.values.len(), 1, rhs.values.as_slice());
    let sol = solve_system(&op.tag.to_string(), &op.mat, &b)?;
    Ok((
        Density::from_vector(op.dim, sol.x.column(0).into_owned()),
        sol.residual,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_returns_rhs() {
        let a = DMatrix::<f64>::identity(5, 5);
        let b = DMatrix::from_fn(5, 2, |i, j| (i + 3 * j) as f64);
        let s = solve_system("I", &a, &b).unwrap();
        assert_eq!(s.x, b);
        assert!(s.residual == 0.0);
        assert!((s.cond - 1.0).abs() < 1e-15);
    }

    #[test]
    fn condition_estimate_matches_exact_small() {
        let a = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0]);
        let inv = a.clone().try_inverse().unwrap();
        let exact = matrix_norm1(&a) * matrix_norm1(&inv);
        let est = condition_estimate(&a);
        assert!(est <= exact * (1.0 + 1e-12) && est >= exact / 3.0);
    }

    #[test]
    fn singular_flagged() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]);
        let b = DMatrix::from_element(3, 1, 1.0);
        assert!(matches!(
            solve_system("test", &a, &b),
            Err(Error::SingularMatrix { .. })
        ));
    }
}
