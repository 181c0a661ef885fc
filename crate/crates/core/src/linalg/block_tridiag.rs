//! Block cyclic tridiagonal solver with sparse coefficient blocks.
//!
//! Equation `j` reads `A_j x_{j-1} + B_j x_j + C_j x_{j+1} = b_j` with
//! periodic index wrap. The blocks are sparse (a few entries per row), but
//! block Gaussian elimination fills them in, so the elimination factors are
//! stored dense. The periodic wrap is handled by bordering on the last block
//! unknown: the chain `0..nblocks-1` is eliminated forward while the last
//! equation is reduced alongside, leaving one dense `bsize x bsize` system.

use nalgebra::{DMatrix, DVector};

use crate::error::{CcmtError, Result};

/// Row-wise sparse square block.
#[derive(Clone)]
pub struct SparseBlock {
    n: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseBlock {
    pub fn new(n: usize) -> Self {
        SparseBlock {
            n,
            rows: vec![Vec::new(); n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn add(&mut self, r: usize, c: usize, v: f64) {
        assert!(r < self.n && c < self.n);
        if v != 0.0 {
            self.rows[r].push((c, v));
        }
    }

    pub fn is_empty(&self) -> bool {
        self.rows.iter().all(|r| r.is_empty())
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                m[(r, c)] += v;
            }
        }
        m
    }

    /// `self * m` for dense `m` with `n` rows.
    pub fn mul_dense(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(m.nrows(), self.n);
        let mut out = DMatrix::zeros(self.n, m.ncols());
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                for k in 0..m.ncols() {
                    out[(r, k)] += v * m[(c, k)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut out = vec![0.0; self.n];
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                out[r] += v * x[c];
            }
        }
        out
    }
}

pub struct PeriodicBlockTridiagonal {
    nblocks: usize,
    bsize: usize,
    sub: Vec<SparseBlock>,
    diag: Vec<SparseBlock>,
    sup: Vec<SparseBlock>,
}

impl PeriodicBlockTridiagonal {
    pub fn new(nblocks: usize, bsize: usize) -> Result<Self> {
        if nblocks < 3 {
            return Err(CcmtError::InvalidArgument(format!(
                "periodic block tridiagonal system needs >= 3 blocks, got {nblocks}"
            )));
        }
        let z = SparseBlock::new(bsize);
        Ok(PeriodicBlockTridiagonal {
            nblocks,
            bsize,
            sub: vec![z.clone(); nblocks],
            diag: vec![z.clone(); nblocks],
            sup: vec![z; nblocks],
        })
    }

    pub fn dim(&self) -> usize {
        self.nblocks * self.bsize
    }

    /// Coefficient of `x_{j-1}` in block equation `j`.
    pub fn sub_mut(&mut self, j: usize) -> &mut SparseBlock {
        &mut self.sub[j]
    }

    /// Coefficient of `x_j` in block equation `j`.
    pub fn diag_mut(&mut self, j: usize) -> &mut SparseBlock {
        &mut self.diag[j]
    }

    /// Coefficient of `x_{j+1}` in block equation `j`.
    pub fn sup_mut(&mut self, j: usize) -> &mut SparseBlock {
        &mut self.sup[j]
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let (nb, s) = (self.nblocks, self.bsize);
        assert_eq!(x.len(), nb * s);
        let mut y = vec![0.0; nb * s];
        for j in 0..nb {
            let prev = (j + nb - 1) % nb;
            let next = (j + 1) % nb;
            let parts = [
                self.sub[j].mul_vec(&x[prev * s..(prev + 1) * s]),
                self.diag[j].mul_vec(&x[j * s..(j + 1) * s]),
                self.sup[j].mul_vec(&x[next * s..(next + 1) * s]),
            ];
            let ys = &mut y[j * s..(j + 1) * s];
            for p in &parts {
                for (yi, pi) in ys.iter_mut().zip(p) {
                    *yi += pi;
                }
            }
        }
        y
    }

    /// Solves `A x = rhs` by forward block elimination with a border on the
    /// last block. Stores two dense `bsize x bsize` factors per block.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let (nb, s) = (self.nblocks, self.bsize);
        assert_eq!(rhs.len(), nb * s);
        let last = nb - 1;
        let chain = nb - 1; // unknowns 0..chain are eliminated forward

        // x_j = d_j - G_j x_{j+1} - F_j x_last for j in 0..chain.
        let mut g_fac: Vec<DMatrix<f64>> = Vec::with_capacity(chain);
        let mut f_fac: Vec<DMatrix<f64>> = Vec::with_capacity(chain);
        let mut d_fac: Vec<DVector<f64>> = Vec::with_capacity(chain);

        // Border equation, reduced alongside: W x_j + S x_last = r.
        let mut w = self.sup[last].to_dense(); // coefficient of x_0
        let mut schur = self.diag[last].to_dense();
        let mut r_border = DVector::from_column_slice(&rhs[last * s..]);

        for j in 0..chain {
            // D_j = B_j - A_j G_{j-1}; border column R_j picks up A_0 at j=0
            // and C_{chain-1} at the end of the chain.
            let (dj, mut fj_rhs, mut dj_rhs) = if j == 0 {
                (
                    self.diag[0].to_dense(),
                    self.sub[0].to_dense(),
                    DVector::from_column_slice(&rhs[..s]),
                )
            } else {
                let aj = &self.sub[j];
                let dj = self.diag[j].to_dense() - aj.mul_dense(&g_fac[j - 1]);
                let fj = -aj.mul_dense(&f_fac[j - 1]);
                let prev_d = &d_fac[j - 1];
                let mut bj = DVector::from_column_slice(&rhs[j * s..(j + 1) * s]);
                let correction = aj.mul_vec(prev_d.as_slice());
                for i in 0..s {
                    bj[i] -= correction[i];
                }
                (dj, fj, bj)
            };
            let mut gj_rhs = if j + 1 == chain {
                // x_{j+1} is the border unknown: C_j joins the border column.
                fj_rhs += self.sup[j].to_dense();
                DMatrix::zeros(s, s)
            } else {
                self.sup[j].to_dense()
            };

            let lu = dj.lu();
            if !lu.solve_mut(&mut gj_rhs) || !lu.solve_mut(&mut fj_rhs) || !lu.solve_mut(&mut dj_rhs)
            {
                return Err(CcmtError::LinearSolve(format!(
                    "singular diagonal block {j} in block tridiagonal elimination"
                )));
            }

            // Substitute x_j into the border equation.
            r_border -= &w * &dj_rhs;
            schur -= &w * &fj_rhs;
            let mut w_next = -(&w * &gj_rhs);
            if j + 1 == chain - 1 {
                // the border equation couples x_{last-1} directly
                w_next += self.sub[last].to_dense();
            }
            w = w_next;

            g_fac.push(gj_rhs);
            f_fac.push(fj_rhs);
            d_fac.push(dj_rhs);
        }

        let x_last = schur
            .lu()
            .solve(&r_border)
            .ok_or_else(|| CcmtError::LinearSolve("singular border block".into()))?;

        let mut x = vec![0.0; nb * s];
        x[last * s..].copy_from_slice(x_last.as_slice());
        for j in (0..chain).rev() {
            let next = &x[(j + 1) * s..(j + 2) * s].to_vec();
            let mut xj = d_fac[j].clone();
            xj -= &f_fac[j] * &x_last;
            if j + 1 < chain {
                let nxt = DVector::from_column_slice(next);
                xj -= &g_fac[j] * nxt;
            }
            x[j * s..(j + 1) * s].copy_from_slice(xj.as_slice());
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn dense_of(m: &PeriodicBlockTridiagonal) -> DMatrix<f64> {
        let n = m.dim();
        let mut a = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            let col = m.matvec(&e);
            for i in 0..n {
                a[(i, j)] = col[i];
            }
        }
        a
    }

    fn filled(nb: usize, s: usize, seed: u64) -> PeriodicBlockTridiagonal {
        let mut m = PeriodicBlockTridiagonal::new(nb, s).unwrap();
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(99);
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for j in 0..nb {
            for r in 0..s {
                // Sparse fill: a couple of entries per row per block.
                m.sub_mut(j).add(r, (r + 1) % s, next());
                m.sub_mut(j).add(r, r, next());
                m.sup_mut(j).add(r, r, next());
                m.sup_mut(j).add(r, (r + s - 1) % s, next());
                m.diag_mut(j).add(r, r, 8.0 + next());
                m.diag_mut(j).add(r, (r + 1) % s, next());
                m.diag_mut(j).add(r, (r + s - 1) % s, next());
            }
        }
        m
    }

    #[test]
    fn matches_dense_solve() {
        for (nb, s) in [(3, 4), (5, 3), (9, 5), (4, 1)] {
            let m = filled(nb, s, 11 * nb as u64 + s as u64);
            let rhs: Vec<f64> = (0..m.dim()).map(|i| ((2 * i + 1) as f64).sin()).collect();
            let x = m.solve(&rhs).unwrap();
            let xd = dense_of(&m)
                .lu()
                .solve(&DVector::from_vec(rhs.clone()))
                .unwrap();
            for i in 0..m.dim() {
                assert_relative_eq!(x[i], xd[i], epsilon = 1e-9, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn residual_is_small() {
        let m = filled(16, 6, 3);
        let rhs: Vec<f64> = (0..m.dim()).map(|i| (0.3 * i as f64).cos()).collect();
        let x = m.solve(&rhs).unwrap();
        let ax = m.matvec(&x);
        let res = ax
            .iter()
            .zip(&rhs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        assert!(res < 1e-11, "residual {res}");
    }

    #[test]
    fn two_blocks_rejected() {
        assert!(PeriodicBlockTridiagonal::new(2, 4).is_err());
    }
}
