//! Surface Dirichlet-to-Neumann traces.
//!
//! For the harmonic extension `Phi` of surface data `psi`, the DtN value at
//! a station is the scaled conormal derivative `(-eta', 1) . grad Phi` on
//! `z = eta(x)`. In the enhanced basis this collapses to a single boundary
//! amplitude:
//!
//! `G = -eta' psi_x + (1 + eta'^2) (phi_{-2} / h0 + mu0 psi)`.

use crate::basis::surface_gradient_trace;
use crate::benchmarks::PhiKappa;
use crate::error::{CcmtError, Result};
use crate::expansion::ModalField;
use crate::geometry::StripGeometry;
use crate::stencil::periodic_d1;

/// A periodic surface trace on the station grid.
#[derive(Clone, Debug)]
pub struct DtnTrace {
    pub x: Vec<f64>,
    pub values: Vec<f64>,
}

impl DtnTrace {
    /// Mean value over the period (trapezoid on the periodic grid).
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Evaluates the DtN trace of a solved modal field.
///
/// `psi` is the surface data on the station grid. Its derivative is taken
/// with the solver's fourth-order periodic stencil unless `psi_dx` supplies
/// analytic values.
pub fn dtn_from_solution(
    solution: &ModalField,
    psi: &[f64],
    psi_dx: Option<&[f64]>,
) -> Result<DtnTrace> {
    let nx = solution.nx;
    if psi.len() != nx || psi_dx.is_some_and(|d| d.len() != nx) {
        return Err(CcmtError::InvalidArgument(format!(
            "surface data length mismatch: expected {nx} samples"
        )));
    }
    let params = solution.params();
    let dpsi = match psi_dx {
        Some(d) => d.to_vec(),
        None => periodic_d1(psi, solution.grid_spacing()),
    };
    let mut x = Vec::with_capacity(nx);
    let mut values = Vec::with_capacity(nx);
    for j in 0..nx {
        let st = &solution.stations[j];
        let slope = st.surface.dx;
        let g = -slope * dpsi[j]
            + (1.0 + slope * slope)
                * (solution.amplitude(j, -2) / params.h0 + params.mu0 * psi[j]);
        x.push(st.x);
        values.push(g);
    }
    Ok(DtnTrace { x, values })
}

/// The same trace computed mode by mode from the surface gradient traces of
/// every basis function (the direct conormal-derivative route). Agrees with
/// [`dtn_from_solution`] to rounding; kept as an independent cross-check.
pub fn dtn_from_surface_traces(solution: &ModalField, psi_dx: Option<&[f64]>) -> DtnTrace {
    let nx = solution.nx;
    let params = solution.params();
    let h = solution.grid_spacing();
    // d/dx of each amplitude series with the solver stencil; the total
    // surface derivative is their sum unless supplied analytically.
    let dsum: Vec<f64> = match psi_dx {
        Some(d) => d.to_vec(),
        None => {
            let mut acc = vec![0.0; nx];
            for n in -2..=(solution.n_evanescent as i32) {
                for (a, d) in acc.iter_mut().zip(periodic_d1(&solution.mode_series(n), h)) {
                    *a += d;
                }
            }
            acc
        }
    };
    let mut x = Vec::with_capacity(nx);
    let mut values = Vec::with_capacity(nx);
    for j in 0..nx {
        let st = &solution.stations[j];
        let slope = st.surface.dx;
        // N . grad Phi with N = (-eta', 1): the horizontal part combines the
        // amplitude derivatives (surface values are all 1) with the fixed-z
        // traces of the basis gradient.
        let mut g = -slope * dsum[j];
        for n in -2..=(solution.n_evanescent as i32) {
            let (tx, tz) = surface_gradient_trace(params, n, slope);
            g += solution.amplitude(j, n) * (-slope * tx + tz);
        }
        x.push(st.x);
        values.push(g);
    }
    DtnTrace { x, values }
}

/// Closed-form DtN trace of the benchmark field on the station grid of a
/// flat-bottom geometry.
pub fn dtn_exact_benchmark(
    geometry: &StripGeometry,
    field: &PhiKappa,
    nx: usize,
) -> Result<DtnTrace> {
    if !geometry.has_flat_bottom() {
        return Err(CcmtError::InvalidArgument(
            "the benchmark field satisfies the bottom condition only on a flat bottom".into(),
        ));
    }
    let x: Vec<f64> = geometry.grid(nx);
    let values = x.iter().map(|&xj| field.surface_flux(geometry, xj)).collect();
    Ok(DtnTrace { x, values })
}
