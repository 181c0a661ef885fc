//! Solver for periodic block-banded systems: `nblocks` stations, each an
//! `bsize x bsize` dense block row coupling stations within `hw` block
//! offsets, with periodic wrap. The wrap couplings are confined to the last
//! `hw` stations by a bordered reordering: the leading part is a scalar band
//! matrix, the trailing `hw * bsize` unknowns are eliminated through a dense
//! Schur complement.

use nalgebra::{DMatrix, DVector};

use super::banded::BandedLu;
use crate::error::{CcmtError, Result};

pub struct PeriodicBlockMatrix {
    nblocks: usize,
    bsize: usize,
    hw: usize,
    /// `blocks[j][o]` is the dense block coupling station `j` to station
    /// `(j + o - hw) mod nblocks`, row-major `bsize x bsize`.
    blocks: Vec<Vec<Vec<f64>>>,
}

impl PeriodicBlockMatrix {
    pub fn new(nblocks: usize, bsize: usize, hw: usize) -> Result<Self> {
        if nblocks < 2 * hw + 1 {
            return Err(CcmtError::InvalidArgument(format!(
                "periodic block system needs >= {} stations, got {nblocks}",
                2 * hw + 1
            )));
        }
        let zero = vec![0.0; bsize * bsize];
        Ok(PeriodicBlockMatrix {
            nblocks,
            bsize,
            hw,
            blocks: vec![vec![zero; 2 * hw + 1]; nblocks],
        })
    }

    /// Mutable access to the block coupling station `j` to station
    /// `(j + offset) mod nblocks`, `|offset| <= hw`, row-major.
    pub fn block_mut(&mut self, j: usize, offset: isize) -> &mut [f64] {
        assert!(offset.unsigned_abs() <= self.hw);
        &mut self.blocks[j][(offset + self.hw as isize) as usize]
    }

    pub fn dim(&self) -> usize {
        self.nblocks * self.bsize
    }

    /// Inf-norm (max absolute row sum).
    pub fn inf_norm(&self) -> f64 {
        let s = self.bsize;
        let mut worst = 0.0_f64;
        for blocks in &self.blocks {
            for r in 0..s {
                let row_sum: f64 = blocks
                    .iter()
                    .map(|b| b[r * s..(r + 1) * s].iter().map(|v| v.abs()).sum::<f64>())
                    .sum();
                worst = worst.max(row_sum);
            }
        }
        worst
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let (nb, s, hw) = (self.nblocks, self.bsize, self.hw);
        assert_eq!(x.len(), nb * s);
        let mut y = vec![0.0; nb * s];
        for j in 0..nb {
            for (oi, block) in self.blocks[j].iter().enumerate() {
                let col_station = (j + nb + oi - hw) % nb;
                let xs = &x[col_station * s..(col_station + 1) * s];
                let ys = &mut y[j * s..(j + 1) * s];
                for r in 0..s {
                    let row = &block[r * s..(r + 1) * s];
                    let mut acc = 0.0;
                    for (a, b) in row.iter().zip(xs) {
                        acc += a * b;
                    }
                    ys[r] += acc;
                }
            }
        }
        y
    }

    /// Factors the system and solves `A x = rhs`, with two steps of
    /// iterative refinement to push the forward error down to the level of
    /// the residual evaluation.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        assert_eq!(rhs.len(), self.dim());
        let f = self.factor()?;
        let mut x = f.solve(rhs);
        for _ in 0..2 {
            let ax = self.matvec(&x);
            let r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
            let dx = f.solve(&r);
            for (xi, di) in x.iter_mut().zip(&dx) {
                *xi += di;
            }
        }
        Ok(x)
    }

    /// Bordered factorization: banded LU of the leading stations plus a
    /// dense Schur complement for the trailing border stations.
    fn factor(&self) -> Result<PeriodicBlockFactors> {
        let (nb, s, hw) = (self.nblocks, self.bsize, self.hw);
        let band_stations = nb - hw;
        let n_band = band_stations * s;
        let n_border = hw * s;
        let half_bw = (hw + 1) * s - 1;

        // Scalar band part: stations 0..band_stations.
        let mut band = BandedLu::new(n_band, half_bw, half_bw);
        // Dense border column and sparse border-row triplets.
        let mut abr = DMatrix::<f64>::zeros(n_band, n_border);
        let mut arb: Vec<(usize, usize, f64)> = Vec::new();
        let mut arr = DMatrix::<f64>::zeros(n_border, n_border);

        for j in 0..nb {
            for (oi, block) in self.blocks[j].iter().enumerate() {
                let cj = (j + nb + oi - hw) % nb;
                let row_border = j >= band_stations;
                let col_border = cj >= band_stations;
                for r in 0..s {
                    for c in 0..s {
                        let v = block[r * s + c];
                        if v == 0.0 {
                            continue;
                        }
                        match (row_border, col_border) {
                            (false, false) => band.add(j * s + r, cj * s + c, v),
                            (false, true) => {
                                abr[(j * s + r, (cj - band_stations) * s + c)] += v
                            }
                            (true, false) => {
                                arb.push(((j - band_stations) * s + r, cj * s + c, v))
                            }
                            (true, true) => {
                                arr[(
                                    (j - band_stations) * s + r,
                                    (cj - band_stations) * s + c,
                                )] += v
                            }
                        }
                    }
                }
            }
        }

        band.factor()?;

        // X = Abb^{-1} Abr, column by column.
        let mut x_cols = DMatrix::<f64>::zeros(n_band, n_border);
        let mut work = vec![0.0; n_band];
        for c in 0..n_border {
            for r in 0..n_band {
                work[r] = abr[(r, c)];
            }
            band.solve_in_place(&mut work);
            for r in 0..n_band {
                x_cols[(r, c)] = work[r];
            }
        }

        // Schur complement S = Arr - Arb X.
        let mut schur = arr;
        for &(r, c, v) in &arb {
            for k in 0..n_border {
                schur[(r, k)] -= v * x_cols[(c, k)];
            }
        }
        let schur_lu = schur.lu();
        if !schur_lu.is_invertible() {
            return Err(CcmtError::LinearSolve("singular Schur complement".into()));
        }

        Ok(PeriodicBlockFactors {
            band,
            x_cols,
            arb,
            schur_lu,
            n_band,
            n_border,
        })
    }
}

struct PeriodicBlockFactors {
    band: BandedLu,
    x_cols: DMatrix<f64>,
    arb: Vec<(usize, usize, f64)>,
    schur_lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    n_band: usize,
    n_border: usize,
}

impl PeriodicBlockFactors {
    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let (n_band, n_border) = (self.n_band, self.n_border);
        let mut yb = rhs[..n_band].to_vec();
        self.band.solve_in_place(&mut yb);

        let mut rhs_r = DVector::<f64>::from_column_slice(&rhs[n_band..]);
        for &(r, c, v) in &self.arb {
            rhs_r[r] -= v * yb[c];
        }
        let xr = self
            .schur_lu
            .solve(&rhs_r)
            .expect("invertibility checked at factorization");

        let mut x = vec![0.0; n_band + n_border];
        for r in 0..n_band {
            let mut acc = yb[r];
            for c in 0..n_border {
                acc -= self.x_cols[(r, c)] * xr[c];
            }
            x[r] = acc;
        }
        x[n_band..].copy_from_slice(xr.as_slice());
        x
    }
}
