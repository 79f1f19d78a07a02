//! Dense linear-algebra helpers with explicit rank tolerances.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative singular-value tolerance for full column rank.
pub const RANK_TOL: f64 = 1e-10;

fn is_rank_deficient(x: &DMatrix<f64>) -> bool {
    if x.ncols() == 0 {
        return false;
    }
    if x.nrows() < x.ncols() {
        return true;
    }
    let sv = x.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    !(max > 0.0 && min > RANK_TOL * max)
}

/// Index of the first column that is linearly dependent on the columns before
/// it, or `None` when `x` has full column rank.
pub fn first_dependent_column(x: &DMatrix<f64>) -> Option<usize> {
    if !is_rank_deficient(x) {
        return None;
    }
    (0..x.ncols()).find(|&j| is_rank_deficient(&x.columns(0, j + 1).into_owned()))
}

/// Errors with `RankDeficient` naming the first dependent column.
pub fn ensure_full_rank(x: &DMatrix<f64>, names: &[String]) -> Result<()> {
    match first_dependent_column(x) {
        None => Ok(()),
        Some(j) => Err(Error::RankDeficient {
            column: names.get(j).cloned().unwrap_or_else(|| format!("column {j}")),
        }),
    }
}

/// Least-squares fit of a full-column-rank design by Householder QR.
/// Returns the coefficients and `(XᵀX)⁻¹`.
pub fn least_squares(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let k = x.ncols();
    let qr = x.clone().qr();
    let r = qr.r();
    let qty = qr.q().transpose() * y;
    let q = qr.q();
    let solve = |rhs: &DVector<f64>| {
        r.solve_upper_triangular(&rhs.rows(0, k).into_owned())
            .ok_or_else(|| Error::SingularSystem("triangular factor is singular".into()))
    };
    let mut beta = solve(&qty)?;
    // One step of iterative refinement on the residual.
    let resid = y - x * &beta;
    beta += solve(&(q.transpose() * resid))?;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or_else(|| Error::SingularSystem("triangular factor is singular".into()))?;
    let xtx_inv = &r_inv * r_inv.transpose();
    Ok((beta, symmetrize(xtx_inv)))
}

/// Inverse of a symmetric positive-definite matrix via Cholesky.
pub fn spd_inverse(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    m.clone().cholesky().map(|c| symmetrize(c.inverse()))
}

pub fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.clone().symmetric_eigen().eigenvalues.min()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detects_dependent_column() {
        let x = DMatrix::from_row_slice(4, 3, &[1.0, 1.0, 2.0, 1.0, 2.0, 3.0, 1.0, 3.0, 4.0, 1.0, 4.0, 5.0]);
        assert_eq!(first_dependent_column(&x), Some(2));
        let names = vec!["const".to_string(), "a".into(), "b".into()];
        match ensure_full_rank(&x, &names) {
            Err(Error::RankDeficient { column }) => assert_eq!(column, "b"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn least_squares_exact_fit() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 1.0, 1.0, 1.0, 2.0]);
        let y = DVector::from_vec(vec![1.0, 3.0, 5.0]);
        let (b, _) = least_squares(&x, &y).unwrap();
        assert!((b[0] - 1.0).abs() < 1e-12 && (b[1] - 2.0).abs() < 1e-12);
    }
}
