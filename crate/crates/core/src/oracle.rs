//! Independent finite-difference solver used to cross-validate the modal
//! solver on geometries with no closed-form solution.
//!
//! The strip is mapped to a rectangle by the terrain-following coordinate
//! `sigma = (z + h(x)) / H(x)` with `H = eta + h`. In `(x, sigma)` Laplace's
//! equation becomes
//!
//! `u_xx + 2 s_x u_{x sigma} + (s_x^2 + 1/H^2) u_{sigma sigma} + s_xx u_sigma = 0`
//!
//! with metric terms `s_x = (h' - sigma H') / H` and
//! `s_xx = (h'' - sigma H'') / H - 2 s_x H' / H`. Second-order centered
//! differences give a periodic nine-point stencil, solved as a block cyclic
//! tridiagonal system with one block per station.

use crate::error::{CcmtError, Result};
use crate::geometry::StripGeometry;
use crate::linalg::PeriodicBlockTridiagonal;

/// Solution of the mapped Dirichlet problem on an `nx x (nz + 1)` grid.
///
/// Station-major storage; sigma index `0` is the bottom, `nz` the surface
/// (where the field equals the supplied Dirichlet data).
pub struct SigmaGridSolution {
    pub nx: usize,
    /// Number of sigma intervals; `nz + 1` grid levels per station.
    pub nz: usize,
    pub x: Vec<f64>,
    values: Vec<f64>,
    psi: Vec<f64>,
    /// Surface Dirichlet-to-Neumann trace `(-eta', 1) . grad u` on the grid.
    pub dtn: Vec<f64>,
    /// Max-norm residual of the discrete equations at the returned solution.
    pub residual: f64,
}

impl SigmaGridSolution {
    /// Field value at station `j`, sigma level `i` (`0..=nz`).
    pub fn value(&self, j: usize, i: usize) -> f64 {
        if i == self.nz {
            self.psi[j]
        } else {
            self.values[j * self.nz + i]
        }
    }
}

/// Solves the mapped Laplace problem with surface data `psi` (one value per
/// station of the uniform periodic grid) and a homogeneous flux condition on
/// the bottom.
pub fn sigma_fd_solve(
    geometry: &StripGeometry,
    psi: &[f64],
    nz: usize,
) -> Result<SigmaGridSolution> {
    let nx = psi.len();
    if nx < 3 {
        return Err(CcmtError::InvalidArgument(format!(
            "sigma-grid solver needs >= 3 stations, got {nx}"
        )));
    }
    if nz < 16 {
        return Err(CcmtError::InvalidArgument(format!(
            "sigma-grid solver needs >= 16 vertical intervals, got {nz}"
        )));
    }
    let x = geometry.grid(nx);
    let dx = geometry.length / nx as f64;
    let ds = 1.0 / nz as f64;

    let mut sys = PeriodicBlockTridiagonal::new(nx, nz)?;
    let mut rhs = vec![0.0; nx * nz];

    for j in 0..nx {
        let eta = geometry.surface(x[j]);
        let bot = geometry.bottom_depth(x[j]);
        let big_h = eta.value + bot.value;
        let dh = eta.dx + bot.dx;
        let dh2 = eta.dx2 + bot.dx2;
        let jp = (j + 1) % nx;
        let jm = (j + nx - 1) % nx;

        let diag = sys.diag_mut(j);
        // Interior stencil rows, sigma levels 1..nz-1.
        for i in 1..nz {
            let s = i as f64 * ds;
            let sx = (bot.dx - s * dh) / big_h;
            let sxx = (bot.dx2 - s * dh2) / big_h - 2.0 * sx * dh / big_h;
            let cxx = 1.0 / (dx * dx);
            let css = (sx * sx + 1.0 / (big_h * big_h)) / (ds * ds);
            let cs = sxx / (2.0 * ds);

            diag.add(i, i, -2.0 * cxx - 2.0 * css);
            diag.add(i, i - 1, css - cs);
            if i + 1 < nz {
                diag.add(i, i + 1, css + cs);
            } else {
                rhs[j * nz + i] -= (css + cs) * psi[j];
            }
        }
        // Bottom flux row at sigma = 0:
        // h' H u_x + (1 + h'^2) u_sigma = 0, with a one-sided u_sigma.
        let cbx = bot.dx * big_h / (2.0 * dx);
        let cbs = (1.0 + bot.dx * bot.dx) / (2.0 * ds);
        diag.add(0, 0, -3.0 * cbs);
        diag.add(0, 1, 4.0 * cbs);
        diag.add(0, 2, -cbs);

        let sup = sys.sup_mut(j);
        sup.add(0, 0, cbx);
        for i in 1..nz {
            let s = i as f64 * ds;
            let sx = (bot.dx - s * dh) / big_h;
            let cxs = sx / (2.0 * dx * ds);
            sup.add(i, i, 1.0 / (dx * dx));
            sup.add(i, i - 1, -cxs);
            if i + 1 < nz {
                sup.add(i, i + 1, cxs);
            } else {
                rhs[j * nz + i] -= cxs * psi[jp];
            }
        }

        let sub = sys.sub_mut(j);
        sub.add(0, 0, -cbx);
        for i in 1..nz {
            let s = i as f64 * ds;
            let sx = (bot.dx - s * dh) / big_h;
            let cxs = sx / (2.0 * dx * ds);
            sub.add(i, i, 1.0 / (dx * dx));
            sub.add(i, i - 1, cxs);
            if i + 1 < nz {
                sub.add(i, i + 1, -cxs);
            } else {
                rhs[j * nz + i] += cxs * psi[jm];
            }
        }
    }

    let values = sys.solve(&rhs)?;
    let residual = sys
        .matvec(&values)
        .iter()
        .zip(&rhs)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0_f64, f64::max);

    // Surface DtN: G = -eta' psi_x + (1 + eta'^2) u_sigma / H with one-sided
    // u_sigma at sigma = 1.
    let mut dtn = Vec::with_capacity(nx);
    for j in 0..nx {
        let eta = geometry.surface(x[j]);
        let bot = geometry.bottom_depth(x[j]);
        let big_h = eta.value + bot.value;
        let jp = (j + 1) % nx;
        let jm = (j + nx - 1) % nx;
        let psi_x = (psi[jp] - psi[jm]) / (2.0 * dx);
        let u_s = (3.0 * psi[j] - 4.0 * values[j * nz + nz - 1] + values[j * nz + nz - 2])
            / (2.0 * ds);
        dtn.push(-eta.dx * psi_x + (1.0 + eta.dx * eta.dx) * u_s / big_h);
    }

    Ok(SigmaGridSolution {
        nx,
        nz,
        x,
        values,
        psi: psi.to_vec(),
        dtn,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{relative_trace_error, PhiKappa};
    use crate::dtn::dtn_exact_benchmark;
    use crate::expansion::Field;
    use approx::assert_relative_eq;

    fn benchmark_error(eps: f64, kappa: f64, n: usize) -> f64 {
        let h0 = 1.0;
        let geo = StripGeometry::cosine_surface(h0, eps, 1, 0.0).unwrap();
        let field = PhiKappa::new(kappa, h0);
        let psi: Vec<f64> = geo
            .grid(n)
            .into_iter()
            .map(|x| field.surface_data(&geo, x))
            .collect();
        let sol = sigma_fd_solve(&geo, &psi, n).unwrap();
        assert!(sol.residual < 1e-8, "solver residual {}", sol.residual);
        let mut worst = 0.0_f64;
        for j in 0..n {
            let eta = geo.surface(sol.x[j]);
            let h = geo.bottom_depth(sol.x[j]).value;
            let big_h = eta.value + h;
            for i in 0..=n {
                let z = -h + i as f64 / n as f64 * big_h;
                worst = worst.max((sol.value(j, i) - field.eval(sol.x[j], z)).abs());
            }
        }
        worst
    }

    #[test]
    fn flat_strip_reproduces_the_benchmark_field() {
        let err = benchmark_error(0.0, 1.0, 64);
        assert!(err < 1e-3, "max error {err}");
    }

    #[test]
    fn refinement_shows_second_order() {
        let e1 = benchmark_error(0.4, 2.0, 32);
        let e2 = benchmark_error(0.4, 2.0, 64);
        let e3 = benchmark_error(0.4, 2.0, 128);
        let p12 = (e1 / e2).log2();
        let p23 = (e2 / e3).log2();
        assert!((p12 - 2.0).abs() < 0.2, "observed order {p12} ({e1} -> {e2})");
        assert!((p23 - 2.0).abs() < 0.2, "observed order {p23} ({e2} -> {e3})");
    }

    #[test]
    fn dtn_matches_the_closed_form_flux() {
        let h0 = 1.0;
        let kappa = 1.0;
        let n = 257;
        let geo = StripGeometry::cosine_surface(h0, 0.5, 1, 0.0).unwrap();
        let field = PhiKappa::new(kappa, h0);
        let psi: Vec<f64> = geo
            .grid(n)
            .into_iter()
            .map(|x| field.surface_data(&geo, x))
            .collect();
        let sol = sigma_fd_solve(&geo, &psi, n).unwrap();
        let exact = dtn_exact_benchmark(&geo, &field, n).unwrap();
        let err = relative_trace_error(&sol.dtn, &exact.values);
        assert!(err <= 1e-4, "relative trace error {err}");
    }

    #[test]
    fn zero_data_gives_the_zero_field() {
        let geo = StripGeometry::cosine_surface(1.0, 0.3, 1, 0.0).unwrap();
        let sol = sigma_fd_solve(&geo, &vec![0.0; 32], 32).unwrap();
        for j in 0..32 {
            for i in 0..=32 {
                assert_relative_eq!(sol.value(j, i), 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn undersized_grids_are_rejected()  {
        let geo = StripGeometry::cosine_surface(1.0, 0.3, 1, 0.0).unwrap();
        assert!(sigma_fd_solve(&geo, &[0.0, 0.0], 32).is_err());
        assert!(sigma_fd_solve(&geo, &vec![0.0; 32], 8).is_err());
    }
}
