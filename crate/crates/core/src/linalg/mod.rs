//! Direct solvers for the sparse structured systems produced by the
//! discretizations in this crate.

mod banded;
mod block_tridiag;
mod periodic;

pub use banded::BandedLu;
pub use block_tridiag::{PeriodicBlockTridiagonal, SparseBlock};
pub use periodic::PeriodicBlockMatrix;

use crate::error::{CcmtError, Result};

/// Solves a cyclic tridiagonal system.
///
/// `sub[i]`, `diag[i]`, `sup[i]` are the coefficients of `x[i-1]`, `x[i]`,
/// `x[i+1]` in equation `i`, with periodic index wrap. Uses the
/// Sherman-Morrison correction of the standard Thomas algorithm.
pub fn solve_cyclic_tridiagonal(
    sub: &[f64],
    diag: &[f64],
    sup: &[f64],
    rhs: &[f64],
) -> Result<Vec<f64>> {
    let n = diag.len();
    if n < 3 || sub.len() != n || sup.len() != n || rhs.len() != n {
        return Err(CcmtError::InvalidArgument(
            "cyclic tridiagonal system needs n >= 3 equally sized bands".into(),
        ));
    }
    // A = T + u v^T with u = (gamma, 0, .., 0, sub[0])^T? Use the classic
    // choice: perturb first and last diagonal entries.
    let gamma = -diag[0];
    let mut d = diag.to_vec();
    d[0] -= gamma;
    d[n - 1] -= sup[n - 1] * sub[0] / gamma;

    let solve_t = |d: &[f64], b: &[f64]| -> Result<Vec<f64>> {
        let mut c = vec![0.0; n];
        let mut x = vec![0.0; n];
        let mut beta = d[0];
        if beta == 0.0 {
            return Err(CcmtError::LinearSolve("tridiagonal pivot is zero".into()));
        }
        x[0] = b[0] / beta;
        for i in 1..n {
            c[i] = sup[i - 1] / beta;
            beta = d[i] - sub[i] * c[i];
            if beta == 0.0 {
                return Err(CcmtError::LinearSolve("tridiagonal pivot is zero".into()));
            }
            x[i] = (b[i] - sub[i] * x[i - 1]) / beta;
        }
        for i in (0..n - 1).rev() {
            let next = x[i + 1];
            x[i] -= c[i + 1] * next;
        }
        Ok(x)
    };

    let x = solve_t(&d, rhs)?;
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = sup[n - 1];
    let q = solve_t(&d, &u)?;
    // v = (1, 0, .., 0, sub[0]/gamma)
    let vx = x[0] + sub[0] * x[n - 1] / gamma;
    let vq = 1.0 + q[0] + sub[0] * q[n - 1] / gamma;
    if vq == 0.0 {
        return Err(CcmtError::LinearSolve(
            "singular cyclic tridiagonal correction".into(),
        ));
    }
    let factor = vx / vq;
    Ok(x.iter().zip(&q).map(|(xi, qi)| xi - factor * qi).collect())
}
