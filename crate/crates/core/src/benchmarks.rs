//! Exact-solution benchmark machinery.
//!
//! The reference field `cosh(kappa (z + h0)) cos(kappa x)` is harmonic, has a
//! vanishing bottom Neumann trace on the flat bottom `z = -h0`, and induces
//! closed-form modal amplitudes with respect to the enhanced basis at every
//! station of a wavy-surface geometry. Solving the Dirichlet problem with its
//! surface trace as data therefore comes with exact per-mode, field and DtN
//! errors.

use crate::eigensystem::{Branch, ReferenceParams, Station};
use crate::error::{CcmtError, Result};
use crate::expansion::{analyze, AnalysisOptions, Field, ModalField};
use crate::geometry::StripGeometry;
use crate::quadrature::GaussLegendre;

/// The harmonic reference field `cosh(kappa (z + h0)) cos(kappa x)`.
#[derive(Clone, Copy, Debug)]
pub struct PhiKappa {
    pub kappa: f64,
    pub h0: f64,
}

impl PhiKappa {
    pub fn new(kappa: f64, h0: f64) -> Self {
        PhiKappa { kappa, h0 }
    }

    /// Surface Dirichlet data `psi(x)` for a geometry with surface `eta`.
    pub fn surface_data(&self, geometry: &StripGeometry, x: f64) -> f64 {
        let big_h = geometry.total_depth(x).value;
        (self.kappa * big_h).cosh() * (self.kappa * x).cos()
    }

    /// Exact surface conormal trace `-eta' dx(Phi) + dz(Phi)` at `z = eta`.
    pub fn surface_flux(&self, geometry: &StripGeometry, x: f64) -> f64 {
        let eta = geometry.surface(x);
        let big_h = geometry.total_depth(x).value;
        let k = self.kappa;
        eta.dx * k * (k * big_h).cosh() * (k * x).sin()
            + k * (k * big_h).sinh() * (k * x).cos()
    }
}

impl Field for PhiKappa {
    fn eval(&self, x: f64, z: f64) -> f64 {
        (self.kappa * (z + self.h0)).cosh() * (self.kappa * x).cos()
    }
    fn eval_dz(&self, x: f64, z: f64) -> f64 {
        self.kappa * (self.kappa * (z + self.h0)).sinh() * (self.kappa * x).cos()
    }
}

/// Closed-form modal amplitudes of [`PhiKappa`] at one station. Fills
/// `out[0..]` with modes `-2, -1, 0, 1, ..` (length decides the truncation).
///
/// Requires the geometry bottom to be flat at depth `h0`.
pub fn exact_amplitudes(
    params: &ReferenceParams,
    field: &PhiKappa,
    station: &Station,
    out: &mut [f64],
) -> Result<()> {
    if (station.bottom.value - field.h0).abs() > 1e-12 || station.bottom.dx != 0.0 {
        return Err(CcmtError::InvalidArgument(
            "exact benchmark amplitudes require a flat bottom at the reference depth".into(),
        ));
    }
    let (kappa, mu0, h0) = (field.kappa, params.mu0, params.h0);
    let big_h = station.depth.value;
    let c = (kappa * station.x).cos();
    // Common factor: the surface Robin trace density of the field.
    let t = kappa * (kappa * big_h).sinh() - mu0 * (kappa * big_h).cosh();
    let s = mu0 * (mu0 * h0 + 1.0); // = 2 alpha mu0 h0

    if out.is_empty() {
        return Ok(());
    }
    out[0] = h0 * t * c; // mode -2
    if out.len() > 1 {
        out[1] = 0.0; // mode -1: bottom trace of the field vanishes
    }
    for (i, slot) in out.iter_mut().enumerate().skip(2) {
        let m = &station.modes[i - 2];
        let (k, gamma) = (m.k, m.gamma);
        *slot = match m.branch {
            Branch::Propagating => {
                let denom = kappa * kappa - k * k;
                if denom.abs() < 1e-6 * kappa * kappa {
                    // Removable singularity where the local propagating
                    // wavenumber crosses kappa: the limit of the full
                    // bracket times gamma is cosh(kappa H) exactly, with an
                    // O(denom) correction absorbed in the residual t-term.
                    (kappa * big_h).cosh() * c
                        - gamma * t * s / (big_h * k * k * k * k) * c
                } else {
                    gamma
                        * t
                        * (kappa * kappa / (k * k * denom) - s / (big_h * k * k * k * k))
                        * c
                }
            }
            Branch::Evanescent => {
                gamma
                    * t
                    * (-kappa * kappa / (k * k * (kappa * kappa + k * k))
                        - s / (big_h * k * k * k * k))
                    * c
            }
        };
    }
    Ok(())
}

/// Exact modal amplitudes of the benchmark field on a uniform station grid.
pub fn exact_modal_field(
    params: &ReferenceParams,
    geometry: &StripGeometry,
    field: &PhiKappa,
    nx: usize,
    n_evanescent: usize,
) -> Result<ModalField> {
    let n_basis = n_evanescent + 3;
    let mut amps = vec![0.0; nx * n_basis];
    let mut stations = Vec::with_capacity(nx);
    for j in 0..nx {
        let x = geometry.length * j as f64 / nx as f64;
        let st = Station::build(params, geometry, x, n_evanescent)?;
        exact_amplitudes(params, field, &st, &mut amps[j * n_basis..(j + 1) * n_basis])?;
        stations.push(st);
    }
    ModalField::from_amplitudes(*params, geometry.length, stations, n_evanescent, amps)
}

/// Relative L2 field error of a modal solution against the benchmark field,
/// trapezoid in `x` (periodic grid) times Gauss-Legendre in `z`.
pub fn relative_field_error(solution: &ModalField, field: &PhiKappa) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..solution.nx {
        let st = &solution.stations[j];
        let quad = GaussLegendre::new(64, -st.bottom.value, st.surface.value);
        for (i, &z) in quad.nodes.iter().enumerate() {
            let w = quad.weights[i];
            let exact = field.eval(st.x, z);
            let diff = solution.reconstruct(j, z) - exact;
            num += w * diff * diff;
            den += w * exact * exact;
        }
    }
    (num / den).sqrt()
}

/// Discrete L2 error of each modal amplitude series against the exact one:
/// `E[phi_n] = sqrt(mean_x (phi_n - phi_n_exact)^2)`, for `n = -2..`.
pub fn amplitude_errors(solution: &ModalField, exact: &ModalField) -> Vec<f64> {
    assert_eq!(solution.nx, exact.nx);
    let n_common = solution.n_evanescent.min(exact.n_evanescent);
    (-2..=(n_common as i32))
        .map(|n| {
            let s = solution.mode_series(n);
            let e = exact.mode_series(n);
            let mse: f64 = s
                .iter()
                .zip(&e)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                / s.len() as f64;
            mse.sqrt()
        })
        .collect()
}

/// Relative discrete L2 error between a computed DtN trace and the exact
/// benchmark flux on the same grid.
pub fn relative_trace_error(computed: &[f64], exact: &[f64]) -> f64 {
    assert_eq!(computed.len(), exact.len());
    let num: f64 = computed
        .iter()
        .zip(exact)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let den: f64 = exact.iter().map(|b| b * b).sum();
    (num / den).sqrt()
}

/// Projects the benchmark field numerically (quadrature analysis), mainly to
/// cross-check the closed-form amplitudes.
pub fn analyzed_modal_field(
    params: &ReferenceParams,
    geometry: &StripGeometry,
    field: &PhiKappa,
    nx: usize,
    n_evanescent: usize,
) -> Result<ModalField> {
    analyze(
        params,
        geometry,
        field,
        &AnalysisOptions::new(nx, n_evanescent),
    )
}

/// Boundary family of a benchmark case: an analytic cosine surface or the
/// piecewise-polynomial rough surface with a curvature seam.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SurfaceFamily {
    Smooth,
    Rough,
}

/// A truncation-convergence experiment on a wavy-surface, flat-bottom strip.
#[derive(Clone, Debug)]
pub struct BenchmarkCase {
    pub family: SurfaceFamily,
    /// Surface deformation amplitude relative to the reference depth.
    pub epsilon: f64,
    pub kappa: f64,
    pub h0: f64,
    /// Number of stations of the periodic grid.
    pub nx: usize,
    /// Truncation sizes to sweep (total modes, boundary modes included).
    pub n_tot: Vec<usize>,
    /// Relative improvement of the DtN error under which the sweep is
    /// declared converged (plateau detection).
    pub plateau_threshold: f64,
}

impl BenchmarkCase {
    pub fn new(family: SurfaceFamily, epsilon: f64) -> Self {
        BenchmarkCase {
            family,
            epsilon,
            kappa: 1.0,
            h0: 1.0,
            nx: 256,
            n_tot: (3..=30).collect(),
            plateau_threshold: 0.05,
        }
    }

    pub fn geometry(&self) -> Result<StripGeometry> {
        match self.family {
            SurfaceFamily::Smooth => {
                StripGeometry::cosine_surface(self.h0, self.epsilon * self.h0, 1, 0.0)
            }
            SurfaceFamily::Rough => StripGeometry::rough_surface(self.h0, self.epsilon * self.h0),
        }
    }
}

/// One truncation of the sweep with its error metrics.
#[derive(Clone, Copy, Debug)]
pub struct ConvergenceRow {
    pub n_tot: usize,
    /// Relative L2 field error over the strip.
    pub er_field: f64,
    /// Relative L2 error of the surface DtN trace.
    pub er_dtn: f64,
    /// L2 amplitude errors of the first boundary mode, the propagating mode
    /// and the highest retained mode.
    pub e_phi_minus2: f64,
    pub e_phi_0: f64,
    pub e_phi_last: f64,
    pub wall_ms: f64,
}

#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// Truncations whose solve failed, with the failure message.
    pub failures: Vec<(usize, String)>,
    /// First truncation at which the DtN error stopped improving by more
    /// than the case threshold.
    pub plateau: Option<usize>,
}

impl ConvergenceReport {
    /// Log-log slope of a metric against `n_tot` over `[lo, hi]`.
    pub fn slope(
        &self,
        metric: impl Fn(&ConvergenceRow) -> f64,
        lo: usize,
        hi: usize,
    ) -> Result<f64> {
        let pairs: Vec<(f64, f64)> = self
            .rows
            .iter()
            .map(|r| (r.n_tot as f64, metric(r)))
            .collect();
        crate::fit::loglog_slope(&pairs, lo as f64, hi as f64)
    }

    /// Like [`slope`](Self::slope), but the window is clipped where the
    /// metric stops improving: only rows whose value still exceeds ten times
    /// the smallest value of the sweep enter the fit. This isolates the
    /// transient decay regime from the discretization floor.
    pub fn pre_plateau_slope(
        &self,
        metric: impl Fn(&ConvergenceRow) -> f64,
        lo: usize,
        hi: usize,
    ) -> Result<f64> {
        let floor = self
            .rows
            .iter()
            .map(&metric)
            .fold(f64::INFINITY, f64::min);
        let pairs: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|r| metric(r) > 10.0 * floor)
            .map(|r| (r.n_tot as f64, metric(r)))
            .collect();
        crate::fit::loglog_slope(&pairs, lo as f64, hi as f64)
    }

    pub fn row(&self, n_tot: usize) -> Option<&ConvergenceRow> {
        self.rows.iter().find(|r| r.n_tot == n_tot)
    }
}

/// Runs the truncation sweep of a benchmark case: assembles the coupled-mode
/// tables once at the largest truncation, then solves, reconstructs and
/// measures every requested truncation (in parallel).
pub fn convergence_study(case: &BenchmarkCase) -> Result<ConvergenceReport> {
    use rayon::prelude::*;

    let geometry = case.geometry()?;
    let params = ReferenceParams::from_wavenumber(case.kappa, case.h0)?;
    let field = PhiKappa::new(case.kappa, case.h0);
    let mut n_tot = case.n_tot.clone();
    n_tot.sort_unstable();
    n_tot.dedup();
    let m_max = n_tot
        .iter()
        .max()
        .ok_or_else(|| CcmtError::InvalidArgument("empty truncation list".into()))?
        - 3;
    if n_tot[0] < 3 {
        return Err(CcmtError::InvalidArgument(
            "a truncation needs at least the 3 non-evanescent modes".into(),
        ));
    }

    let coeffs = crate::ccms::CcmsCoefficients::assemble(&params, &geometry, case.nx, m_max, None)?;
    let psi: Vec<f64> = coeffs
        .stations
        .iter()
        .map(|st| field.surface_data(&geometry, st.x))
        .collect();
    let exact = exact_modal_field(&params, &geometry, &field, case.nx, m_max)?;
    let exact_dtn = crate::dtn::dtn_exact_benchmark(&geometry, &field, case.nx)?;

    let results: Vec<(usize, std::result::Result<ConvergenceRow, String>)> = n_tot
        .par_iter()
        .map(|&nt| {
            let started = std::time::Instant::now();
            let solved = crate::ccms::solve_ccms(&coeffs, nt - 3, &psi);
            let row = solved
                .and_then(|mf| {
                    let g = crate::dtn::dtn_from_solution(&mf, &psi, None)?;
                    let e_phi = amplitude_errors(&mf, &exact);
                    Ok(ConvergenceRow {
                        n_tot: nt,
                        er_field: relative_field_error(&mf, &field),
                        er_dtn: relative_trace_error(&g.values, &exact_dtn.values),
                        e_phi_minus2: e_phi[0],
                        e_phi_0: e_phi[2],
                        e_phi_last: *e_phi.last().expect("at least three modes"),
                        wall_ms: started.elapsed().as_secs_f64() * 1e3,
                    })
                })
                .map_err(|e| e.to_string());
            (nt, row)
        })
        .collect();

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (nt, r) in results {
        match r {
            Ok(row) => rows.push(row),
            Err(msg) => failures.push((nt, msg)),
        }
    }

    let mut plateau = None;
    for w in rows.windows(2) {
        let improvement = (w[0].er_dtn - w[1].er_dtn) / w[0].er_dtn;
        if improvement < case.plateau_threshold {
            plateau = Some(w[1].n_tot);
            break;
        }
    }

    Ok(ConvergenceReport {
        rows,
        failures,
        plateau,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn setup(eps: f64) -> (ReferenceParams, StripGeometry, PhiKappa) {
        let h0 = 1.0;
        let kappa = 2.0;
        let p = ReferenceParams::from_wavenumber(kappa, h0).unwrap();
        let geo = StripGeometry::cosine_surface(h0, eps, 1, 0.0).unwrap();
        (p, geo, PhiKappa::new(kappa, h0))
    }

    #[test]
    fn closed_form_amplitudes_match_quadrature_projection() {
        let (p, geo, field) = setup(0.35);
        let nx = 9; // avoids stations exactly on the eta = 0 crossings
        let n_ev = 12;
        let exact = exact_modal_field(&p, &geo, &field, nx, n_ev).unwrap();
        let projected = analyzed_modal_field(&p, &geo, &field, nx, n_ev).unwrap();
        for j in 0..nx {
            for n in -2..=(n_ev as i32) {
                assert_relative_eq!(
                    exact.amplitude(j, n),
                    projected.amplitude(j, n),
                    epsilon = 1e-10,
                    max_relative = 1e-8
                );
            }
        }
    }

    #[test]
    fn near_resonant_station_is_stable() {
        // Stations at eta = 0 have local depth h0, where the propagating
        // wavenumber equals kappa and the naive mode-0 formula is 0/0.
        let (p, geo, field) = setup(0.35);
        let st = Station::build(&p, &geo, std::f64::consts::FRAC_PI_2, 3).unwrap();
        assert!((st.depth.value - 1.0).abs() < 1e-12);
        let mut amps = vec![0.0; 6];
        exact_amplitudes(&p, &field, &st, &mut amps).unwrap();
        // Boundary amplitude vanishes with the surface trace residual t.
        assert_relative_eq!(amps[0], 0.0, epsilon = 1e-10);
        // Mode 0 reduces to the flat-strip value at this station.
        let c = (field.kappa * st.x).cos();
        assert_relative_eq!(amps[2], (field.kappa * 1.0).cosh() * c, max_relative = 1e-10);
    }

    #[test]
    fn flat_strip_collapses_to_the_propagating_mode() {
        let h0 = 1.0;
        let kappa = 2.0;
        let p = ReferenceParams::from_wavenumber(kappa, h0).unwrap();
        let geo = StripGeometry::cosine_surface(h0, 1e-30, 1, 0.0).unwrap();
        let field = PhiKappa::new(kappa, h0);
        let mf = exact_modal_field(&p, &geo, &field, 8, 6).unwrap();
        for j in 0..8 {
            let x = mf.stations[j].x;
            let want = (kappa * h0).cosh() * (kappa * x).cos();
            assert_relative_eq!(mf.amplitude(j, 0), want, epsilon = 1e-10, max_relative = 1e-12);
            for n in [-2, -1, 1, 2, 3, 4, 5, 6] {
                assert_relative_eq!(mf.amplitude(j, n), 0.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn amplitudes_decay_at_fourth_order() {
        let (p, geo, field) = setup(0.5);
        let mf = exact_modal_field(&p, &geo, &field, 16, 60).unwrap();
        let slope = mf.amplitude_decay_slope(10.0, 60.0).unwrap();
        assert!(
            (slope + 4.0).abs() < 0.3,
            "sup-norm amplitude decay slope {slope}"
        );
    }

    #[test]
    fn flat_surface_flux_reduces_to_robin_data() {
        // With mu0 matched to kappa, the flat-strip DtN is multiplication by
        // mu0.
        let h0 = 1.0;
        let kappa = 1.5;
        let p = ReferenceParams::from_wavenumber(kappa, h0).unwrap();
        let geo = StripGeometry::cosine_surface(h0, 1e-30, 1, 0.0).unwrap();
        let field = PhiKappa::new(kappa, h0);
        for j in 0..7 {
            let x = 2.0 * std::f64::consts::PI * j as f64 / 7.0;
            let g = field.surface_flux(&geo, x);
            let psi = field.surface_data(&geo, x);
            assert_relative_eq!(g, p.mu0 * psi, epsilon = 1e-12, max_relative = 1e-12);
        }
    }

    #[test]
    fn identical_fields_have_zero_errors() {
        let (p, geo, field) = setup(0.3);
        let exact = exact_modal_field(&p, &geo, &field, 16, 8).unwrap();
        for e in amplitude_errors(&exact, &exact) {
            assert_relative_eq!(e, 0.0);
        }
        let g = crate::dtn::dtn_exact_benchmark(&geo, &field, 16).unwrap();
        assert_relative_eq!(relative_trace_error(&g.values, &g.values), 0.0);
    }

    #[test]
    fn truncation_sweep_converges_and_plateaus() {
        let mut case = BenchmarkCase::new(SurfaceFamily::Smooth, 0.5);
        case.nx = 128;
        case.n_tot = (3..=26).collect();
        let report = convergence_study(&case).unwrap();
        assert!(report.failures.is_empty(), "failures: {:?}", report.failures);
        assert_eq!(report.rows.len(), 24);
        for r in &report.rows {
            assert!(r.er_field.is_finite() && r.er_field >= 0.0);
            assert!(r.er_dtn.is_finite() && r.er_dtn >= 0.0);
        }
        let field_slope = report.slope(|r| r.er_field, 5, 25).unwrap();
        assert!(
            (field_slope + 3.5).abs() < 0.5,
            "field-error slope {field_slope}"
        );
        let dtn_slope = report.pre_plateau_slope(|r| r.er_dtn, 6, 25).unwrap();
        assert!(
            (-8.5..=-5.5).contains(&dtn_slope),
            "trace-error slope {dtn_slope}"
        );
        let plateau = report.plateau.expect("sweep should reach its floor");
        assert!(plateau <= 26, "plateau at {plateau}");
    }

    #[test]
    fn rough_surface_sweep_runs_to_completion() {
        let mut case = BenchmarkCase::new(SurfaceFamily::Rough, 0.5);
        case.nx = 128;
        case.n_tot = vec![3, 5, 7, 9, 12, 16, 20];
        let report = convergence_study(&case).unwrap();
        assert!(report.failures.is_empty(), "failures: {:?}", report.failures);
        // Errors shrink until the plateau.
        let hi = report.plateau.unwrap_or(20);
        let mut prev = f64::INFINITY;
        for r in report.rows.iter().filter(|r| r.n_tot <= hi) {
            assert!(r.er_dtn <= prev, "non-monotone trace error at {}", r.n_tot);
            prev = r.er_dtn;
        }
    }

    #[test]
    fn reconstruction_of_exact_amplitudes_matches_the_field() {
        let (p, geo, field) = setup(0.4);
        let mf = exact_modal_field(&p, &geo, &field, 7, 40).unwrap();
        let mut worst = 0.0_f64;
        for j in 0..7 {
            let st = &mf.stations[j];
            for i in 0..15 {
                let z = -st.bottom.value + st.depth.value * i as f64 / 14.0;
                worst = worst.max((mf.reconstruct(j, z) - field.eval(st.x, z)).abs());
            }
        }
        assert!(worst < 1e-5, "worst reconstruction error {worst}");
    }
}
