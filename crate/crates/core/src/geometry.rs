//! Periodic strip domains: a surface boundary `z = eta(x)` above a bottom
//! boundary `z = -h(x)`, both periodic in `x` with a common period.

use crate::error::{CcmtError, Result};
use crate::linalg::solve_cyclic_tridiagonal;
use std::f64::consts::PI;

/// A profile value together with its first two `x`-derivatives.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ProfileValue {
    pub value: f64,
    pub dx: f64,
    pub dx2: f64,
}

/// A periodic boundary profile on `[0, period)`.
#[derive(Clone, Debug)]
pub enum Profile {
    Constant(f64),
    /// `mean + amplitude * cos(wavenumber * (x + phase))`.
    Cosine {
        mean: f64,
        amplitude: f64,
        wavenumber: f64,
        phase: f64,
    },
    /// `amplitude * f(x)` with `f` the zero-mean polynomial bump
    /// `A x^4 (2 pi - x)^4 + B` on `[0, 2 pi]`, normalized to `f(pi) = 1`.
    /// The seam at `x = 0` is C^3 but not C^4.
    Rough { amplitude: f64 },
    Spline(PeriodicSpline),
}

impl Profile {
    pub fn eval(&self, x: f64) -> ProfileValue {
        match *self {
            Profile::Constant(c) => ProfileValue {
                value: c,
                dx: 0.0,
                dx2: 0.0,
            },
            Profile::Cosine {
                mean,
                amplitude,
                wavenumber: k,
                phase,
            } => {
                let arg = k * (x + phase);
                ProfileValue {
                    value: mean + amplitude * arg.cos(),
                    dx: -amplitude * k * arg.sin(),
                    dx2: -amplitude * k * k * arg.cos(),
                }
            }
            Profile::Rough { amplitude } => {
                let a = 315.0 / (187.0 * PI.powi(8));
                let b = -a * 128.0 * PI.powi(8) / 315.0;
                let two_pi = 2.0 * PI;
                let x = x.rem_euclid(two_pi);
                let u = x * x * x * x;
                let w = two_pi - x;
                let v = w * w * w * w;
                let g = u * v;
                let dg = 4.0 * x.powi(3) * w.powi(3) * (two_pi - 2.0 * x);
                let dg2 = 12.0 * x * x * v - 32.0 * x.powi(3) * w.powi(3)
                    + 12.0 * u * w * w;
                ProfileValue {
                    value: amplitude * (a * g + b),
                    dx: amplitude * a * dg,
                    dx2: amplitude * a * dg2,
                }
            }
            Profile::Spline(ref s) => s.eval(x),
        }
    }
}

/// Periodic cubic spline through uniformly spaced samples on `[0, period)`.
#[derive(Clone, Debug)]
pub struct PeriodicSpline {
    period: f64,
    values: Vec<f64>,
    /// Second derivatives at the nodes.
    moments: Vec<f64>,
}

impl PeriodicSpline {
    /// `values[i]` is the sample at `x = i * period / values.len()`; the
    /// profile wraps back to `values[0]` at `x = period`.
    pub fn new(values: Vec<f64>, period: f64) -> Result<Self> {
        let n = values.len();
        if n < 3 {
            return Err(CcmtError::Geometry(format!(
                "periodic spline needs >= 3 samples, got {n}"
            )));
        }
        if !(period > 0.0) {
            return Err(CcmtError::Geometry(format!("invalid period {period}")));
        }
        let h = period / n as f64;
        let sub = vec![h / 6.0; n];
        let diag = vec![2.0 * h / 3.0; n];
        let sup = vec![h / 6.0; n];
        let rhs: Vec<f64> = (0..n)
            .map(|i| {
                let prev = values[(i + n - 1) % n];
                let next = values[(i + 1) % n];
                (next - 2.0 * values[i] + prev) / h
            })
            .collect();
        let moments = solve_cyclic_tridiagonal(&sub, &diag, &sup, &rhs)
            .map_err(|e| CcmtError::Geometry(format!("spline moment solve: {e}")))?;
        Ok(PeriodicSpline {
            period,
            values,
            moments,
        })
    }

    pub fn eval(&self, x: f64) -> ProfileValue {
        let n = self.values.len();
        let h = self.period / n as f64;
        let x = x.rem_euclid(self.period);
        let mut i = (x / h) as usize;
        if i >= n {
            i = n - 1;
        }
        let ip = (i + 1) % n;
        let t = x - i as f64 * h; // in [0, h]
        let s = h - t;
        let (yi, yp) = (self.values[i], self.values[ip]);
        let (mi, mp) = (self.moments[i], self.moments[ip]);
        let value = mi * s * s * s / (6.0 * h)
            + mp * t * t * t / (6.0 * h)
            + (yi / h - mi * h / 6.0) * s
            + (yp / h - mp * h / 6.0) * t;
        let dx = -mi * s * s / (2.0 * h) + mp * t * t / (2.0 * h) - yi / h
            + mi * h / 6.0
            + yp / h
            - mp * h / 6.0;
        let dx2 = (mi * s + mp * t) / h;
        ProfileValue { value, dx, dx2 }
    }
}

/// A periodic strip domain `-h(x) <= z <= eta(x)`, `0 <= x < length`,
/// together with the reference depth `h0` of the comparison waveguide.
#[derive(Clone, Debug)]
pub struct StripGeometry {
    pub h0: f64,
    pub length: f64,
    surface: Profile,
    bottom_depth: Profile,
}

impl StripGeometry {
    /// General constructor. `bottom_depth` is the (positive-down) depth
    /// profile `h(x)`. Validates `eta + h > 0` on a fine sample grid.
    pub fn new(surface: Profile, bottom_depth: Profile, h0: f64, length: f64) -> Result<Self> {
        if !(h0 > 0.0) {
            return Err(CcmtError::Geometry(format!(
                "reference depth must be positive, got {h0}"
            )));
        }
        if !(length > 0.0) {
            return Err(CcmtError::Geometry(format!(
                "domain length must be positive, got {length}"
            )));
        }
        if let Profile::Cosine { wavenumber, .. } = surface {
            let cycles = wavenumber * length / (2.0 * PI);
            if wavenumber <= 0.0 || (cycles - cycles.round()).abs() > 1e-12 {
                return Err(CcmtError::Geometry(format!(
                    "cosine wavenumber {wavenumber} is not periodic on length {length}"
                )));
            }
        }
        let geo = StripGeometry {
            h0,
            length,
            surface,
            bottom_depth,
        };
        let samples = 10_000;
        for j in 0..samples {
            let x = length * j as f64 / samples as f64;
            let th = geo.total_depth(x).value;
            if !(th > 0.0) {
                return Err(CcmtError::Geometry(format!(
                    "boundaries intersect: total depth {th} at x = {x}"
                )));
            }
        }
        Ok(geo)
    }

    /// Cosine surface `eta = amplitude cos(wavenumber (x + phase))` over a
    /// flat bottom at depth `h0`; domain length `2 pi`.
    pub fn cosine_surface(
        h0: f64,
        amplitude: f64,
        wavenumber: u32,
        phase: f64,
    ) -> Result<Self> {
        if wavenumber == 0 {
            return Err(CcmtError::Geometry("cosine wavenumber must be >= 1".into()));
        }
        if amplitude.abs() >= h0 {
            return Err(CcmtError::Geometry(format!(
                "surface amplitude {amplitude} must stay below the bottom depth {h0}"
            )));
        }
        StripGeometry::new(
            Profile::Cosine {
                mean: 0.0,
                amplitude,
                wavenumber: wavenumber as f64,
                phase,
            },
            Profile::Constant(h0),
            h0,
            2.0 * PI,
        )
    }

    /// Zero-mean polynomial bump surface of height `amplitude` over a flat
    /// bottom at depth `h0`; domain length `2 pi`. C^3 but not C^4 at `x = 0`.
    pub fn rough_surface(h0: f64, amplitude: f64) -> Result<Self> {
        StripGeometry::new(
            Profile::Rough { amplitude },
            Profile::Constant(h0),
            h0,
            2.0 * PI,
        )
    }

    /// Spline surface through uniformly spaced samples over a flat bottom.
    pub fn sampled_surface(h0: f64, samples: Vec<f64>, length: f64) -> Result<Self> {
        StripGeometry::new(
            Profile::Spline(PeriodicSpline::new(samples, length)?),
            Profile::Constant(h0),
            h0,
            length,
        )
    }

    /// Surface elevation `eta(x)` and derivatives.
    pub fn surface(&self, x: f64) -> ProfileValue {
        self.surface.eval(x)
    }

    /// Bottom depth `h(x)` (positive down) and derivatives.
    pub fn bottom_depth(&self, x: f64) -> ProfileValue {
        self.bottom_depth.eval(x)
    }

    /// Local total depth `H(x) = eta(x) + h(x)` and derivatives.
    pub fn total_depth(&self, x: f64) -> ProfileValue {
        let e = self.surface.eval(x);
        let b = self.bottom_depth.eval(x);
        ProfileValue {
            value: e.value + b.value,
            dx: e.dx + b.dx,
            dx2: e.dx2 + b.dx2,
        }
    }

    pub fn has_flat_bottom(&self) -> bool {
        matches!(self.bottom_depth, Profile::Constant(_))
    }

    /// Uniform grid of `n` stations on `[0, length)`.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        (0..n).map(|j| self.length * j as f64 / n as f64).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::GaussLegendre;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn fd_check(p: &Profile, x: f64, tol: f64) {
        let d = 1e-5;
        let vm2 = p.eval(x - 2.0 * d).value;
        let vm1 = p.eval(x - d).value;
        let v0 = p.eval(x);
        let vp1 = p.eval(x + d).value;
        let vp2 = p.eval(x + 2.0 * d).value;
        let fd1 = (vm2 - 8.0 * vm1 + 8.0 * vp1 - vp2) / (12.0 * d);
        assert_relative_eq!(v0.dx, fd1, epsilon = tol, max_relative = tol);
        // Wider step for the second derivative: central differences lose
        // ~eps/d^2 to roundoff.
        let d = 1e-3;
        let fd2 = (-p.eval(x - 2.0 * d).value + 16.0 * p.eval(x - d).value - 30.0 * v0.value
            + 16.0 * p.eval(x + d).value
            - p.eval(x + 2.0 * d).value)
            / (12.0 * d * d);
        assert_relative_eq!(v0.dx2, fd2, epsilon = 100.0 * tol, max_relative = 100.0 * tol);
    }

    #[test]
    fn cosine_profile_derivatives() {
        let p = Profile::Cosine {
            mean: 0.3,
            amplitude: 0.5,
            wavenumber: 2.0,
            phase: 0.7,
        };
        for x in [0.0, 0.4, 1.9, 5.0] {
            fd_check(&p, x, 1e-8);
        }
    }

    #[test]
    fn bump_profile_normalization() {
        let p = Profile::Rough { amplitude: 1.0 };
        // Peak value 1 at the midpoint.
        assert_relative_eq!(p.eval(PI).value, 1.0, epsilon = 1e-13);
        // Zero mean over one period.
        let quad = GaussLegendre::new(200, 0.0, 2.0 * PI);
        let mean = quad.integrate(|x| p.eval(x).value) / (2.0 * PI);
        assert_relative_eq!(mean, 0.0, epsilon = 1e-12);
        // Negative trough at the seam.
        assert!(p.eval(0.0).value < -0.6 && p.eval(0.0).value > -0.7);
    }

    #[test]
    fn bump_profile_is_smooth_across_seam() {
        let p = Profile::Rough { amplitude: 0.4 };
        let eps = 1e-9;
        let left = p.eval(2.0 * PI - eps);
        let right = p.eval(eps);
        assert_relative_eq!(left.value, right.value, epsilon = 1e-7);
        assert_relative_eq!(left.dx, right.dx, epsilon = 1e-6);
        assert_relative_eq!(left.dx2, right.dx2, epsilon = 1e-4);
        for x in [0.3, 1.2, PI, 4.4] {
            fd_check(&p, x, 1e-8);
        }
    }

    #[test]
    fn spline_reproduces_smooth_profile() {
        let n = 256;
        let period = 2.0 * PI;
        let target = |x: f64| 0.4 * (x).cos() + 0.1 * (3.0 * x).sin();
        let samples: Vec<f64> = (0..n).map(|i| target(period * i as f64 / n as f64)).collect();
        let spline = PeriodicSpline::new(samples, period).unwrap();
        for j in 0..50 {
            let x = period * (j as f64 + 0.37) / 50.0;
            let v = spline.eval(x);
            assert_relative_eq!(v.value, target(x), epsilon = 1e-8);
            let d_exact = -0.4 * x.sin() + 0.3 * (3.0 * x).cos();
            assert_relative_eq!(v.dx, d_exact, epsilon = 1e-5);
        }
    }

    #[test]
    fn intersecting_boundaries_rejected() {
        assert!(StripGeometry::cosine_surface(1.0, 1.0, 1, 0.0).is_err());
        assert!(StripGeometry::cosine_surface(1.0, 0.9, 1, 0.0).is_ok());
        assert!(StripGeometry::new(
            Profile::Constant(0.5),
            Profile::Constant(-0.6),
            1.0,
            2.0 * PI
        )
        .is_err());
    }

    #[test]
    fn noninteger_wavenumber_rejected() {
        let r = StripGeometry::new(
            Profile::Cosine {
                mean: 0.0,
                amplitude: 0.1,
                wavenumber: 1.5,
                phase: 0.0,
            },
            Profile::Constant(1.0),
            1.0,
            2.0 * PI,
        );
        assert!(r.is_err());
    }

    #[test]
    fn total_depth_combines_both_boundaries() {
        let geo = StripGeometry::new(
            Profile::Cosine {
                mean: 0.0,
                amplitude: 0.2,
                wavenumber: 1.0,
                phase: 0.0,
            },
            Profile::Cosine {
                mean: 1.0,
                amplitude: 0.1,
                wavenumber: 2.0,
                phase: 0.3,
            },
            1.0,
            2.0 * PI,
        )
        .unwrap();
        let x = 0.9;
        let h = geo.total_depth(x);
        assert_relative_eq!(
            h.value,
            geo.surface(x).value + geo.bottom_depth(x).value,
            epsilon = 1e-14
        );
        assert_relative_eq!(h.dx, geo.surface(x).dx + geo.bottom_depth(x).dx, epsilon = 1e-14);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn accepted_geometries_have_positive_depth(
            amp in -0.89f64..0.89,
            kappa in 1u32..6,
            phase in 0.0f64..6.0,
        ) {
            let geo = StripGeometry::cosine_surface(1.0, amp, kappa, phase).unwrap();
            for j in 0..500 {
                let x = geo.length * j as f64 / 500.0;
                prop_assert!(geo.total_depth(x).value > 0.0);
            }
        }
    }
}
