//! The coupled-mode system: Galerkin projection of the Laplace problem on
//! the enhanced vertical basis, fourth-order periodic finite differences in
//! `x`, and a direct sparse solve for the modal amplitudes.
//!
//! Per station the projection produces three coefficient tables over basis
//! indices `m, n`:
//!
//! - `A_mn = int Zn Zm dz` (Gram matrix),
//! - `B_mn = 2 int (dx Zn) Zm dz + h' [Zm Zn] at z = -h`,
//! - `C_mn = int (dx2 Zn + dz2 Zn) Zm dz + (h' dx Zn + dz Zn) Zm at z = -h`,
//!
//! and the amplitudes satisfy `sum_n A phi'' + B phi' + C phi = 0` per test
//! mode plus the surface constraint `sum_n phi_n = psi`. Truncation keeps the
//! Galerkin rows of test modes `-2 .. M-1` and replaces the last one by the
//! constraint row.

use log::debug;
use rayon::prelude::*;

use crate::basis::eval_basis;
use crate::eigensystem::{ReferenceParams, Station};
use crate::error::{CcmtError, Result};
use crate::expansion::ModalField;
use crate::geometry::StripGeometry;
use crate::linalg::PeriodicBlockMatrix;
use crate::quadrature::GaussLegendre;
use crate::stencil::{D1_WEIGHTS, D2_WEIGHTS};

/// Per-station Galerkin tables at the maximal truncation, reusable for any
/// smaller truncation by taking leading sub-blocks.
pub struct CcmsCoefficients {
    pub params: ReferenceParams,
    pub length: f64,
    /// Full basis size (`max evanescent modes + 3`).
    pub n_basis: usize,
    pub stations: Vec<Station>,
    /// Row-major `n_basis x n_basis` per station.
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
}

impl CcmsCoefficients {
    /// Assembles the tables at `nx` uniform stations with `m_max` evanescent
    /// modes. `quad_nodes` defaults to `max(64, 4 m_max)`.
    pub fn assemble(
        params: &ReferenceParams,
        geometry: &StripGeometry,
        nx: usize,
        m_max: usize,
        quad_nodes: Option<usize>,
    ) -> Result<Self> {
        if nx < 5 {
            return Err(CcmtError::InvalidArgument(format!(
                "periodic fourth-order stencils need nx >= 5, got {nx}"
            )));
        }
        let nodes = quad_nodes.unwrap_or_else(|| 64.max(4 * m_max));
        let n_basis = m_max + 3;
        let per_station: Vec<(Station, Vec<f64>, Vec<f64>, Vec<f64>)> = (0..nx)
            .into_par_iter()
            .map(|j| {
                let x = geometry.length * j as f64 / nx as f64;
                let st = Station::build(params, geometry, x, m_max)?;
                let (a, b, c) = station_tables(params, &st, n_basis, nodes);
                Ok((st, a, b, c))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut stations = Vec::with_capacity(nx);
        let (mut a, mut b, mut c) = (Vec::new(), Vec::new(), Vec::new());
        for (st, aj, bj, cj) in per_station {
            stations.push(st);
            a.push(aj);
            b.push(bj);
            c.push(cj);
        }
        Ok(CcmsCoefficients {
            params: *params,
            length: geometry.length,
            n_basis,
            stations,
            a,
            b,
            c,
        })
    }

    pub fn nx(&self) -> usize {
        self.stations.len()
    }

    /// Re-assembles one station with doubled quadrature and reports the
    /// largest relative drift over all table entries.
    pub fn quadrature_drift(&self, station: usize, nodes: usize) -> f64 {
        let st = &self.stations[station];
        let (a1, b1, c1) = station_tables(&self.params, st, self.n_basis, nodes);
        let (a2, b2, c2) = station_tables(&self.params, st, self.n_basis, 2 * nodes);
        let mut drift = 0.0_f64;
        for (x, y) in a1
            .iter()
            .chain(&b1)
            .chain(&c1)
            .zip(a2.iter().chain(&b2).chain(&c2))
        {
            drift = drift.max((x - y).abs() / (1.0 + y.abs()));
        }
        drift
    }
}

fn station_tables(
    params: &ReferenceParams,
    st: &Station,
    n_basis: usize,
    nodes: usize,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let quad = GaussLegendre::new(nodes, -st.bottom.value, st.surface.value);
    // Basis samples at quadrature nodes: value, dx, dx2 + dz2.
    let mut val = vec![0.0; n_basis * nodes];
    let mut dx = vec![0.0; n_basis * nodes];
    let mut lap = vec![0.0; n_basis * nodes];
    for n in 0..n_basis {
        for (i, &z) in quad.nodes.iter().enumerate() {
            let e = eval_basis(params, st, n as i32 - 2, z);
            val[n * nodes + i] = e.value;
            dx[n * nodes + i] = e.dx;
            lap[n * nodes + i] = e.dx2 + e.dz2;
        }
    }
    // Bottom traces.
    let zb = -st.bottom.value;
    let hprime = st.bottom.dx;
    let bottom: Vec<(f64, f64, f64)> = (0..n_basis)
        .map(|n| {
            let e = eval_basis(params, st, n as i32 - 2, zb);
            (e.value, e.dx, e.dz)
        })
        .collect();

    let mut a = vec![0.0; n_basis * n_basis];
    let mut b = vec![0.0; n_basis * n_basis];
    let mut c = vec![0.0; n_basis * n_basis];
    for m in 0..n_basis {
        let vm = &val[m * nodes..(m + 1) * nodes];
        for n in 0..n_basis {
            let vn = &val[n * nodes..(n + 1) * nodes];
            let dn = &dx[n * nodes..(n + 1) * nodes];
            let ln = &lap[n * nodes..(n + 1) * nodes];
            let (mut sa, mut sb, mut sc) = (0.0, 0.0, 0.0);
            for i in 0..nodes {
                let w = quad.weights[i] * vm[i];
                sa += w * vn[i];
                sb += w * dn[i];
                sc += w * ln[i];
            }
            let (bvm, _, _) = bottom[m];
            let (bvn, bdxn, bdzn) = bottom[n];
            a[m * n_basis + n] = sa;
            b[m * n_basis + n] = 2.0 * sb + hprime * bvm * bvn;
            c[m * n_basis + n] = sc + (hprime * bdxn + bdzn) * bvm;
        }
    }
    (a, b, c)
}

/// The assembled sparse linear system at one truncation.
pub struct TruncatedSystem {
    pub nx: usize,
    /// Block size `N_tot = m + 3`.
    pub n_basis: usize,
    matrix: PeriodicBlockMatrix,
    pub rhs: Vec<f64>,
}

impl TruncatedSystem {
    /// Builds the discrete system for truncation `n_evanescent` from tables
    /// assembled at `n_evanescent` or higher, with surface data `psi` on the
    /// station grid.
    pub fn build(
        coeffs: &CcmsCoefficients,
        n_evanescent: usize,
        psi: &[f64],
    ) -> Result<TruncatedSystem> {
        let nx = coeffs.nx();
        let nb = n_evanescent + 3;
        if nb > coeffs.n_basis {
            return Err(CcmtError::InvalidArgument(format!(
                "truncation {nb} exceeds assembled basis size {}",
                coeffs.n_basis
            )));
        }
        if psi.len() != nx {
            return Err(CcmtError::InvalidArgument(format!(
                "surface data has {} samples, expected {nx}",
                psi.len()
            )));
        }
        let full = coeffs.n_basis;
        let dxh = coeffs.length / nx as f64;
        let mut matrix = PeriodicBlockMatrix::new(nx, nb, 2)?;
        for j in 0..nx {
            let (aj, bj, cj) = (&coeffs.a[j], &coeffs.b[j], &coeffs.c[j]);
            for (oi, off) in (-2isize..=2).enumerate() {
                // Galerkin rows are scaled by dx^2 so all blocks stay O(1);
                // this equilibration keeps the factorization well conditioned
                // on fine grids (the rows have zero right-hand side).
                let w1 = D1_WEIGHTS[oi] * dxh / 12.0;
                let w2 = D2_WEIGHTS[oi] / 12.0;
                let block = matrix.block_mut(j, off);
                // Galerkin rows: test modes -2 .. n_evanescent - 1.
                for r in 0..nb - 1 {
                    for ncol in 0..nb {
                        let mut v = aj[r * full + ncol] * w2 + bj[r * full + ncol] * w1;
                        if off == 0 {
                            v += cj[r * full + ncol] * dxh * dxh;
                        }
                        block[r * nb + ncol] += v;
                    }
                }
                // Constraint row: sum of amplitudes at the same station.
                if off == 0 {
                    for ncol in 0..nb {
                        block[(nb - 1) * nb + ncol] = 1.0;
                    }
                }
            }
        }
        let mut rhs = vec![0.0; nx * nb];
        for j in 0..nx {
            rhs[j * nb + nb - 1] = psi[j];
        }
        Ok(TruncatedSystem {
            nx,
            n_basis: nb,
            matrix,
            rhs,
        })
    }

    pub fn dim(&self) -> usize {
        self.nx * self.n_basis
    }

    /// Residual `max |A x - b|` of a candidate amplitude vector.
    pub fn residual(&self, x: &[f64]) -> f64 {
        self.matrix
            .matvec(x)
            .iter()
            .zip(&self.rhs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max)
    }

    /// Direct solve; returns the amplitudes and the residual relative to the
    /// data norm. The solve is rejected if the normwise backward error
    /// `|Ax - b| / (|A| |x| + |b|)` exceeds `1e-10`.
    pub fn solve(&self) -> Result<(Vec<f64>, f64)> {
        let x = self.matrix.solve(&self.rhs)?;
        let res = self.residual(&x);
        let bnorm = self.rhs.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
        let xnorm = x.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
        let rel = res / bnorm.max(f64::MIN_POSITIVE);
        let backward = res / (self.matrix.inf_norm() * xnorm + bnorm).max(f64::MIN_POSITIVE);
        debug!(
            "coupled-mode solve: {} unknowns ({} stations x {} modes), residual {rel:.3e} \
             relative to data, backward error {backward:.3e}",
            self.dim(),
            self.nx,
            self.n_basis
        );
        if !(backward <= 1e-10) {
            return Err(CcmtError::LinearSolve(format!(
                "solve backward error {backward} exceeds 1e-10"
            )));
        }
        Ok((x, rel))
    }
}

/// Assembles and solves the system at truncation `n_evanescent`, packaging
/// the amplitudes as a [`ModalField`].
pub fn solve_ccms(
    coeffs: &CcmsCoefficients,
    n_evanescent: usize,
    psi: &[f64],
) -> Result<ModalField> {
    let system = TruncatedSystem::build(coeffs, n_evanescent, psi)?;
    let (amps, _residual) = system.solve()?;
    ModalField::from_amplitudes(
        coeffs.params,
        coeffs.length,
        coeffs.stations.clone(),
        n_evanescent,
        amps,
    )
}
