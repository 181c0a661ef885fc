//! Banded LU factorization with partial pivoting (LAPACK `dgbtrf`-style
//! storage and algorithm, unblocked).

use crate::error::{CcmtError, Result};

/// LU factorization of an `n x n` band matrix with `kl` sub- and `ku`
/// super-diagonals. Row interchanges widen the upper band to `kl + ku`.
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    /// Column-major, leading dimension `2*kl + ku + 1`. Entry `(i, j)` lives
    /// at row `kl + ku + i - j` of column `j`.
    ab: Vec<f64>,
    ipiv: Vec<usize>,
    factored: bool,
}

impl BandedLu {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        BandedLu {
            n,
            kl,
            ku,
            ab: vec![0.0; ldab * n],
            ipiv: vec![0; n],
            factored: false,
        }
    }

    #[inline]
    fn ldab(&self) -> usize {
        2 * self.kl + self.ku + 1
    }

    /// Adds `value` to entry `(i, j)`. Panics outside the original band.
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        assert!(!self.factored, "matrix already factored");
        assert!(i < self.n && j < self.n);
        assert!(
            i + self.ku >= j && j + self.kl >= i,
            "entry ({i}, {j}) outside band kl={}, ku={}",
            self.kl,
            self.ku
        );
        let ldab = self.ldab();
        self.ab[j * ldab + (self.kl + self.ku + i - j)] += value;
    }

    /// In-place LU factorization with partial pivoting.
    pub fn factor(&mut self) -> Result<()> {
        assert!(!self.factored, "matrix already factored");
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let ldab = self.ldab();
        let kv = kl + ku; // width of the (fill-extended) upper band
        for j in 0..n {
            let col_end = (j + kl).min(n - 1); // last row in column j
            // Pivot search in rows j..=col_end of column j.
            let diag_off = j * ldab + kv; // position of (j, j)
            let mut piv = j;
            let mut piv_val = self.ab[diag_off].abs();
            for i in (j + 1)..=col_end {
                let v = self.ab[diag_off + (i - j)].abs();
                if v > piv_val {
                    piv_val = v;
                    piv = i;
                }
            }
            self.ipiv[j] = piv;
            if piv_val == 0.0 {
                return Err(CcmtError::LinearSolve(format!(
                    "banded LU: zero pivot at column {j}"
                )));
            }
            let row_end = (j + kv).min(n - 1); // last column affected by row ops
            if piv != j {
                // Swap rows j and piv across columns j..=row_end.
                for c in j..=row_end {
                    let base = c * ldab + kv;
                    self.ab.swap(base + j - c, base + piv - c);
                }
            }
            // Scale multipliers.
            let pivot = self.ab[diag_off];
            for i in (j + 1)..=col_end {
                self.ab[diag_off + (i - j)] /= pivot;
            }
            // Rank-1 update of the trailing band.
            if j < n - 1 && col_end > j {
                let (lcol, rest) = self.ab.split_at_mut((j + 1) * ldab);
                let l = &lcol[diag_off + 1..diag_off + 1 + (col_end - j)];
                for c in (j + 1)..=row_end {
                    let base = (c - j - 1) * ldab + kv + j - c;
                    let ajc = rest[base];
                    if ajc != 0.0 {
                        let seg = &mut rest[base + 1..base + 1 + (col_end - j)];
                        for (s, &li) in seg.iter_mut().zip(l) {
                            *s -= li * ajc;
                        }
                    }
                }
            }
        }
        self.factored = true;
        Ok(())
    }

    /// Solves `A x = b` in place, overwriting `b` with the solution.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert!(self.factored, "factor() must be called first");
        assert_eq!(b.len(), self.n);
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let ldab = self.ldab();
        let kv = kl + ku;
        // Forward: apply pivots and L.
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                b.swap(j, p);
            }
            let col_end = (j + kl).min(n - 1);
            let bj = b[j];
            if bj != 0.0 {
                let base = j * ldab + kv;
                for i in (j + 1)..=col_end {
                    b[i] -= self.ab[base + (i - j)] * bj;
                }
            }
        }
        // Backward: solve U x = y.
        for j in (0..n).rev() {
            let base = j * ldab + kv;
            let xj = b[j] / self.ab[base];
            b[j] = xj;
            if xj != 0.0 {
                let top = j.saturating_sub(kv);
                for i in top..j {
                    b[i] -= self.ab[base + i - j] * xj;
                }
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn dense_from(entries: &[(usize, usize, f64)], n: usize) -> nalgebra::DMatrix<f64> {
        let mut a = nalgebra::DMatrix::zeros(n, n);
        for &(i, j, v) in entries {
            a[(i, j)] += v;
        }
        a
    }

    #[test]
    fn matches_dense_lu_on_fixed_system() {
        let n = 12;
        let (kl, ku) = (3, 2);
        let mut entries = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i + ku >= j && j + kl >= i {
                    let v = ((3 * i + 7 * j + 1) as f64).sin() + if i == j { 6.0 } else { 0.0 };
                    entries.push((i, j, v));
                }
            }
        }
        let mut band = BandedLu::new(n, kl, ku);
        for &(i, j, v) in &entries {
            band.add(i, j, v);
        }
        band.factor().unwrap();
        let b: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
        let mut x = b.clone();
        band.solve_in_place(&mut x);

        let xd = dense_from(&entries, n)
            .lu()
            .solve(&nalgebra::DVector::from_vec(b))
            .unwrap();
        for i in 0..n {
            assert_relative_eq!(x[i], xd[i], epsilon = 1e-11);
        }
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        // [[0, 1], [1, 0]] requires a row interchange.
        let mut band = BandedLu::new(2, 1, 1);
        band.add(0, 1, 1.0);
        band.add(1, 0, 1.0);
        band.factor().unwrap();
        let mut x = vec![2.0, 5.0];
        band.solve_in_place(&mut x);
        assert_relative_eq!(x[0], 5.0);
        assert_relative_eq!(x[1], 2.0);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let mut band = BandedLu::new(3, 1, 1);
        band.add(0, 0, 1.0);
        band.add(2, 2, 1.0);
        assert!(band.factor().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn random_banded_systems_match_dense(seed in 0u64..1000) {
            let n = 20;
            let (kl, ku) = (4, 3);
            // Simple deterministic pseudo-random fill from the seed.
            let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
            let mut next = || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            };
            let mut entries = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    if i + ku >= j && j + kl >= i {
                        let diag = if i == j { 8.0 } else { 0.0 };
                        entries.push((i, j, next() + diag));
                    }
                }
            }
            let mut band = BandedLu::new(n, kl, ku);
            for &(i, j, v) in &entries {
                band.add(i, j, v);
            }
            band.factor().unwrap();
            let b: Vec<f64> = (0..n).map(|_| next()).collect();
            let mut x = b.clone();
            band.solve_in_place(&mut x);
            let xd = dense_from(&entries, n).lu().solve(&nalgebra::DVector::from_vec(b)).unwrap();
            for i in 0..n {
                prop_assert!((x[i] - xd[i]).abs() < 1e-9);
            }
        }
    }
}
