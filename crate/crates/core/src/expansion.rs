//! Modal analysis and synthesis: projecting a field on the enhanced vertical
//! basis station by station, and rebuilding it from the amplitudes.
//!
//! The two boundary amplitudes are read off from the surface Robin trace and
//! the bottom Neumann trace of the field (the boundary modes carry unit
//! traces scaled by `1/h0`). The remainder then has homogeneous traces and
//! is projected on the eigenfunctions with Gauss-Legendre quadrature.

use crate::basis::eval_basis;
use crate::eigensystem::{ReferenceParams, Station};
use crate::error::{CcmtError, Result};
use crate::fit::loglog_slope;
use crate::geometry::StripGeometry;
use crate::quadrature::GaussLegendre;
use crate::stencil::{periodic_d1, periodic_d2};

/// A scalar field on the strip with a vertical derivative.
pub trait Field {
    fn eval(&self, x: f64, z: f64) -> f64;
    fn eval_dz(&self, x: f64, z: f64) -> f64;
}

/// Field built from a pair of closures `(value, dz)`.
pub struct FnField<F, G>(pub F, pub G);

impl<F: Fn(f64, f64) -> f64, G: Fn(f64, f64) -> f64> Field for FnField<F, G> {
    fn eval(&self, x: f64, z: f64) -> f64 {
        (self.0)(x, z)
    }
    fn eval_dz(&self, x: f64, z: f64) -> f64 {
        (self.1)(x, z)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct AnalysisOptions {
    /// Number of uniform stations on the period.
    pub nx: usize,
    /// Number of evanescent modes; the basis then has `n_evanescent + 3`
    /// functions per station.
    pub n_evanescent: usize,
    /// Gauss-Legendre nodes per vertical line; default `max(64, 4 n_ev)`.
    pub quad_nodes: Option<usize>,
    /// Re-integrate with twice the nodes and fail if projections move by
    /// more than `1e-10` (absolute, relative to the surface data scale).
    pub verify_quadrature: bool,
}

impl AnalysisOptions {
    pub fn new(nx: usize, n_evanescent: usize) -> Self {
        AnalysisOptions {
            nx,
            n_evanescent,
            quad_nodes: None,
            verify_quadrature: false,
        }
    }

    fn nodes(&self) -> usize {
        self.quad_nodes.unwrap_or_else(|| 64.max(4 * self.n_evanescent))
    }
}

/// Modal amplitudes of a field on a uniform station grid, together with the
/// per-station spectral data needed to evaluate the basis.
pub struct ModalField {
    pub length: f64,
    pub nx: usize,
    pub n_evanescent: usize,
    /// Row-major `(nx, n_evanescent + 3)`; column `n + 2` holds mode `n`.
    pub amps: Vec<f64>,
    pub stations: Vec<Station>,
    params: ReferenceParams,
}

impl ModalField {
    pub fn n_basis(&self) -> usize {
        self.n_evanescent + 3
    }

    pub fn col(n: i32) -> usize {
        (n + 2) as usize
    }

    pub fn amplitude(&self, station: usize, n: i32) -> f64 {
        self.amps[station * self.n_basis() + Self::col(n)]
    }

    /// All amplitudes of one mode along the grid.
    pub fn mode_series(&self, n: i32) -> Vec<f64> {
        (0..self.nx).map(|j| self.amplitude(j, n)).collect()
    }

    pub fn params(&self) -> &ReferenceParams {
        &self.params
    }

    pub fn grid_spacing(&self) -> f64 {
        self.length / self.nx as f64
    }

    /// Assembles a modal field from externally computed amplitudes.
    pub fn from_amplitudes(
        params: ReferenceParams,
        length: f64,
        stations: Vec<Station>,
        n_evanescent: usize,
        amps: Vec<f64>,
    ) -> Result<Self> {
        let nx = stations.len();
        if amps.len() != nx * (n_evanescent + 3) {
            return Err(CcmtError::InvalidArgument(format!(
                "amplitude array has length {}, expected {}",
                amps.len(),
                nx * (n_evanescent + 3)
            )));
        }
        Ok(ModalField {
            length,
            nx,
            n_evanescent,
            amps,
            stations,
            params,
        })
    }

    /// Evaluates the modal sum at station `j`, height `z`.
    pub fn reconstruct(&self, station: usize, z: f64) -> f64 {
        let st = &self.stations[station];
        let mut acc = 0.0;
        for n in -2..=(self.n_evanescent as i32) {
            let a = self.amplitude(station, n);
            if a != 0.0 {
                acc += a * eval_basis(&self.params, st, n, z).value;
            }
        }
        acc
    }

    /// Surface trace of the modal sum (all basis functions are 1 there).
    pub fn surface_trace(&self, station: usize) -> f64 {
        let b = self.n_basis();
        self.amps[station * b..(station + 1) * b].iter().sum()
    }

    /// Per-mode amplitude norms for the eigenfunction modes `n >= 1`:
    /// `(n, max|phi_n|, C2 norm)` where the C2 norm adds the maxima of the
    /// first two periodic finite-difference derivatives.
    pub fn decay_diagnostics(&self) -> Vec<(f64, f64, f64)> {
        let h = self.grid_spacing();
        (1..=self.n_evanescent as i32)
            .map(|n| {
                let s = self.mode_series(n);
                let sup = |v: &[f64]| v.iter().fold(0.0_f64, |m, &x| m.max(x.abs()));
                let c0 = sup(&s);
                let c2 = c0 + sup(&periodic_d1(&s, h)) + sup(&periodic_d2(&s, h));
                (n as f64, c0, c2)
            })
            .collect()
    }

    /// Log-log slope of the sup-norm amplitude decay over mode window
    /// `[lo, hi]`.
    pub fn amplitude_decay_slope(&self, lo: f64, hi: f64) -> Result<f64> {
        let pairs: Vec<(f64, f64)> = self
            .decay_diagnostics()
            .into_iter()
            .map(|(n, c0, _)| (n, c0))
            .collect();
        loglog_slope(&pairs, lo, hi)
    }

    /// Same for the C2 norms.
    pub fn c2_decay_slope(&self, lo: f64, hi: f64) -> Result<f64> {
        let pairs: Vec<(f64, f64)> = self
            .decay_diagnostics()
            .into_iter()
            .map(|(n, _, c2)| (n, c2))
            .collect();
        loglog_slope(&pairs, lo, hi)
    }
}

/// Projects `field` on the enhanced basis at `opts.nx` uniform stations.
pub fn analyze(
    params: &ReferenceParams,
    geometry: &StripGeometry,
    field: &dyn Field,
    opts: &AnalysisOptions,
) -> Result<ModalField> {
    let n_ev = opts.n_evanescent;
    let n_basis = n_ev + 3;
    let mut amps = vec![0.0; opts.nx * n_basis];
    let mut stations = Vec::with_capacity(opts.nx);
    for j in 0..opts.nx {
        let x = geometry.length * j as f64 / opts.nx as f64;
        let st = Station::build(params, geometry, x, n_ev)?;
        let row = &mut amps[j * n_basis..(j + 1) * n_basis];
        project_station(params, &st, field, opts.nodes(), opts.verify_quadrature, row)?;
        stations.push(st);
    }
    Ok(ModalField {
        length: geometry.length,
        nx: opts.nx,
        n_evanescent: n_ev,
        amps,
        stations,
        params: *params,
    })
}

fn project_station(
    params: &ReferenceParams,
    st: &Station,
    field: &dyn Field,
    nodes: usize,
    verify: bool,
    out: &mut [f64],
) -> Result<()> {
    let x = st.x;
    let eta = st.surface.value;
    let hb = st.bottom.value;
    // Boundary amplitudes from the traces.
    let robin = field.eval_dz(x, eta) - params.mu0 * field.eval(x, eta);
    let neumann = field.eval_dz(x, -hb);
    out[0] = params.h0 * robin;
    out[1] = params.h0 * neumann;

    let project = |nodes: usize, out: &mut [f64]| {
        let quad = GaussLegendre::new(nodes, -hb, eta);
        // Sample the remainder once per node.
        let remainders: Vec<(f64, f64)> = quad
            .nodes
            .iter()
            .map(|&z| {
                let r = field.eval(x, z)
                    - out[0] * eval_basis(params, st, -2, z).value
                    - out[1] * eval_basis(params, st, -1, z).value;
                (z, r)
            })
            .collect();
        for n in 0..st.modes.len() {
            let mut acc = 0.0;
            for (i, &(z, r)) in remainders.iter().enumerate() {
                acc += quad.weights[i] * r * eval_basis(params, st, n as i32, z).value;
            }
            out[2 + n] = st.modes[n].gamma * acc;
        }
    };
    project(nodes, out);
    if verify {
        let mut check = out.to_vec();
        project(2 * nodes, &mut check);
        let drift = out
            .iter()
            .zip(&check)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        if drift > 1e-10 {
            return Err(CcmtError::Quadrature(format!(
                "modal projection not converged: drift {drift} at x = {x}"
            )));
        }
    }
    Ok(())
}
