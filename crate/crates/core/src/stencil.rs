//! Fourth-order central finite-difference stencils on uniform periodic grids.
//!
//! The same stencils are used by the coupled-mode solver, the decay
//! diagnostics and the DtN post-processing, so that all discrete derivatives
//! are mutually consistent.

/// Weights of the fourth-order first-derivative stencil, offsets -2..=2,
/// to be divided by `12 h`.
pub const D1_WEIGHTS: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];

/// Weights of the fourth-order second-derivative stencil, offsets -2..=2,
/// to be divided by `12 h^2`.
pub const D2_WEIGHTS: [f64; 5] = [-1.0, 16.0, -30.0, 16.0, -1.0];

/// First derivative of periodic samples `f` with grid spacing `h`.
pub fn periodic_d1(f: &[f64], h: f64) -> Vec<f64> {
    apply(f, &D1_WEIGHTS, 12.0 * h)
}

/// Second derivative of periodic samples `f` with grid spacing `h`.
pub fn periodic_d2(f: &[f64], h: f64) -> Vec<f64> {
    apply(f, &D2_WEIGHTS, 12.0 * h * h)
}

fn apply(f: &[f64], w: &[f64; 5], scale: f64) -> Vec<f64> {
    let n = f.len();
    assert!(n >= 5, "periodic stencil needs at least 5 points");
    (0..n)
        .map(|j| {
            let mut acc = 0.0;
            for (o, &wk) in w.iter().enumerate() {
                let idx = (j + n + o - 2) % n;
                acc += wk * f[idx];
            }
            acc / scale
        })
        .collect()
}
