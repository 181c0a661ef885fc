//! Enhanced vertical basis: two quadratic boundary modes prepended to the
//! local eigenfunction family.
//!
//! The boundary modes absorb the inhomogeneous parts of the surface Robin
//! trace and the bottom Neumann trace of the expanded field, which upgrades
//! the plain eigenfunction series from L2 to H2 convergence and doubles the
//! algebraic decay rate of the modal amplitudes. With `u = z + h(x)` and
//! `H = eta + h`:
//!
//! - mode -2: `alpha u^2 / H - alpha H + 1`
//! - mode -1: `beta u^2 / H + u / h0 - alpha H + 1`
//!
//! where `alpha = (mu0 h0 + 1) / (2 h0)` and `beta = (mu0 h0 - 1) / (2 h0)`.
//! Both equal 1 at the surface; mode -2 carries unit surface Robin trace and
//! zero bottom Neumann trace, mode -1 the reverse (scaled by `1 / h0`).

use crate::eigensystem::{eval_mode, ReferenceParams, Station};

/// One basis function evaluated at a point, with derivatives.
#[derive(Clone, Copy, Debug)]
pub struct BasisEval {
    /// Basis index: -2 and -1 are boundary modes, 0 the propagating mode,
    /// positive indices the evanescent modes.
    pub n: i32,
    pub value: f64,
    pub dz: f64,
    pub dz2: f64,
    pub dx: f64,
    pub dx2: f64,
    /// Companion (`sin`/`sinh` partner) value for eigenfunction modes.
    pub companion: Option<f64>,
}

/// Evaluates basis function `n` of `station` at height `z`.
pub fn eval_basis(params: &ReferenceParams, station: &Station, n: i32, z: f64) -> BasisEval {
    if n >= 0 {
        let e = eval_mode(params, station, n as usize, z);
        return BasisEval {
            n,
            value: e.value,
            dz: e.dz,
            dz2: e.dz2,
            dx: e.dx,
            dx2: e.dx2,
            companion: Some(e.companion),
        };
    }
    let alpha = params.alpha();
    let coeff = match n {
        -2 => alpha,
        -1 => params.beta(),
        _ => panic!("basis index {n} out of range"),
    };
    let linear = if n == -1 { 1.0 / params.h0 } else { 0.0 };
    let bh = station.depth;
    let h = station.bottom;
    let big = bh.value;
    let u = z + h.value;

    let value = coeff * u * u / big - alpha * big + 1.0 + linear * u;
    let dz = 2.0 * coeff * u / big + linear;
    let dz2 = 2.0 * coeff / big;
    let dx = coeff * (2.0 * u * h.dx / big - u * u * bh.dx / (big * big)) - alpha * bh.dx
        + linear * h.dx;
    let dx2 = coeff
        * (2.0 * h.dx * h.dx / big + 2.0 * u * h.dx2 / big
            - 4.0 * u * h.dx * bh.dx / (big * big)
            - u * u * bh.dx2 / (big * big)
            + 2.0 * u * u * bh.dx * bh.dx / (big * big * big))
        - alpha * bh.dx2
        + linear * h.dx2;
    BasisEval {
        n,
        value,
        dz,
        dz2,
        dx,
        dx2,
        companion: None,
    }
}

/// Surface gradient trace `(d/dx, d/dz)` of basis function `n` along
/// `z = eta(x)`, given the local surface slope. Every basis function equals
/// 1 on the surface, so the horizontal trace is slaved to the vertical one.
pub fn surface_gradient_trace(params: &ReferenceParams, n: i32, surface_slope: f64) -> (f64, f64) {
    let dz = if n == -2 {
        params.mu0 + 1.0 / params.h0
    } else {
        params.mu0
    };
    (-dz * surface_slope, dz)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::StripGeometry;
    use crate::quadrature::GaussLegendre;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;
    use std::f64::consts::PI;

    fn setup() -> (ReferenceParams, StripGeometry) {
        (
            ReferenceParams::new(0.9, 1.0).unwrap(),
            StripGeometry::cosine_surface(1.0, 0.4, 2, 0.25).unwrap(),
        )
    }

    #[test]
    fn boundary_modes_carry_unit_traces() {
        let (p, geo) = setup();
        for xi in 0..7 {
            let x = 2.0 * PI * xi as f64 / 7.0;
            let st = crate::eigensystem::Station::build(&p, &geo, x, 0).unwrap();
            let eta = st.surface.value;
            let hb = st.bottom.value;
            for n in [-2, -1] {
                let top = eval_basis(&p, &st, n, eta);
                let bot = eval_basis(&p, &st, n, -hb);
                // Unit surface value.
                assert_relative_eq!(top.value, 1.0, epsilon = 1e-14);
                // Surface Robin trace: 1/h0 for mode -2, 0 for mode -1.
                let robin = top.dz - p.mu0 * top.value;
                let want = if n == -2 { 1.0 / p.h0 } else { 0.0 };
                assert_relative_eq!(robin, want, epsilon = 1e-13);
                // Bottom Neumann trace: 0 for mode -2, 1/h0 for mode -1.
                let want = if n == -2 { 0.0 } else { 1.0 / p.h0 };
                assert_relative_eq!(bot.dz, want, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn vertical_derivatives_are_consistent() {
        let (p, geo) = setup();
        let st = crate::eigensystem::Station::build(&p, &geo, 1.2, 0).unwrap();
        let d = 1e-5;
        for n in [-2, -1] {
            for z in [-0.8, -0.2, 0.1] {
                let e = eval_basis(&p, &st, n, z);
                let vp = eval_basis(&p, &st, n, z + d).value;
                let vm = eval_basis(&p, &st, n, z - d).value;
                assert_relative_eq!(e.dz, (vp - vm) / (2.0 * d), max_relative = 1e-8);
                let d2 = 1e-3;
                let vp = eval_basis(&p, &st, n, z + d2).value;
                let vm = eval_basis(&p, &st, n, z - d2).value;
                assert_relative_eq!(
                    e.dz2,
                    (vp - 2.0 * e.value + vm) / (d2 * d2),
                    max_relative = 1e-5
                );
            }
        }
    }

    #[test]
    fn horizontal_derivatives_match_finite_differences() {
        let (p, geo) = setup();
        let d = 1e-4;
        for xi in 0..5 {
            let x = 0.3 + 2.0 * PI * xi as f64 / 5.0;
            let st = crate::eigensystem::Station::build(&p, &geo, x, 0).unwrap();
            let sts: Vec<_> = [-2.0, -1.0, 1.0, 2.0]
                .iter()
                .map(|&o| crate::eigensystem::Station::build(&p, &geo, x + o * d, 0).unwrap())
                .collect();
            for n in [-2, -1] {
                for z in [-0.9, -0.4, 0.0] {
                    let e = eval_basis(&p, &st, n, z);
                    let vs: Vec<f64> = sts.iter().map(|s| eval_basis(&p, s, n, z).value).collect();
                    let fd1 = (vs[0] - 8.0 * vs[1] + 8.0 * vs[2] - vs[3]) / (12.0 * d);
                    let fd2 = (-vs[0] + 16.0 * vs[1] - 30.0 * e.value + 16.0 * vs[2] - vs[3])
                        / (12.0 * d * d);
                    assert_relative_eq!(e.dx, fd1, epsilon = 1e-9, max_relative = 1e-7);
                    assert_relative_eq!(e.dx2, fd2, epsilon = 1e-5, max_relative = 1e-5);
                }
            }
        }
    }

    #[test]
    fn surface_traces_match_pointwise_evaluation() {
        let (p, geo) = setup();
        let x = 2.7;
        let st = crate::eigensystem::Station::build(&p, &geo, x, 3).unwrap();
        let eta = st.surface;
        for n in -2..=3 {
            let e = eval_basis(&p, &st, n, eta.value);
            let (tx, tz) = surface_gradient_trace(&p, n, eta.dx);
            assert_relative_eq!(e.dz, tz, epsilon = 1e-12);
            // The surface value of every basis function is identically 1, so
            // the fixed-z horizontal derivative on the surface is -dz * eta'.
            assert_relative_eq!(e.dx, tx, epsilon = 1e-12);
        }
    }

    #[test]
    fn enhanced_family_is_linearly_independent() {
        // Gram matrix of {-2, -1, 0, 1, 2, 3} has comfortably positive
        // determinant after normalization.
        let (p, geo) = setup();
        let st = crate::eigensystem::Station::build(&p, &geo, 0.9, 4).unwrap();
        let quad = GaussLegendre::new(200, -st.bottom.value, st.surface.value);
        let idx: Vec<i32> = (-2..=3).collect();
        let mut gram = DMatrix::zeros(idx.len(), idx.len());
        for (i, &m) in idx.iter().enumerate() {
            for (j, &n) in idx.iter().enumerate() {
                gram[(i, j)] = quad
                    .integrate(|z| eval_basis(&p, &st, m, z).value * eval_basis(&p, &st, n, z).value);
            }
        }
        // Normalize to unit diagonal.
        let mut norm = gram.clone();
        for i in 0..idx.len() {
            for j in 0..idx.len() {
                norm[(i, j)] = gram[(i, j)] / (gram[(i, i)] * gram[(j, j)]).sqrt();
            }
        }
        // The boundary quadratics are close to the span of the first few
        // eigenfunctions, so the determinant is small but safely nonzero.
        let det = norm.determinant();
        assert!(det > 1e-10, "normalized Gram determinant {det}");
    }
}
