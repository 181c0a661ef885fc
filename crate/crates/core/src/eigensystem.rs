//! Local Sturm-Liouville eigensystem of the reference vertical operator.
//!
//! At each horizontal station the vertical eigenfunctions are determined by
//! the local depth `H(x)` and the fixed Robin parameter `mu0` of the
//! reference waveguide. Mode 0 is the propagating (hyperbolic) branch with
//! wavenumber `k0` from `mu0 = k0 tanh(k0 H)`; modes `n >= 1` are evanescent
//! (trigonometric) with `mu0 + kn tan(kn H) = 0`, `kn` in the n-th branch
//! interval `((n - 1/2) pi / H, n pi / H)`.
//!
//! Depth- and `x`-derivatives of the eigenvalues are closed-form (implicit
//! differentiation of the dispersion relations); eigenfunction `x`-derivatives
//! are expressed through the companion function (`sin`/`sinh` partner) so no
//! numerically delicate cancellations appear.

use crate::error::{CcmtError, Result};
use crate::geometry::{ProfileValue, StripGeometry};

/// Parameters of the reference waveguide: the surface Robin coefficient
/// `mu0` and the reference depth `h0`.
#[derive(Clone, Copy, Debug)]
pub struct ReferenceParams {
    pub mu0: f64,
    pub h0: f64,
}

impl ReferenceParams {
    pub fn new(mu0: f64, h0: f64) -> Result<Self> {
        if !(mu0 > 0.0) {
            return Err(CcmtError::InvalidArgument(format!(
                "surface Robin coefficient must be positive, got {mu0}"
            )));
        }
        if !(h0 > 0.0) {
            return Err(CcmtError::InvalidArgument(format!(
                "reference depth must be positive, got {h0}"
            )));
        }
        Ok(ReferenceParams { mu0, h0 })
    }

    /// Matches `mu0` to the propagating wavenumber of the reference strip:
    /// `mu0 = kappa0 tanh(kappa0 h0)`.
    pub fn from_wavenumber(kappa0: f64, h0: f64) -> Result<Self> {
        if !(kappa0 > 0.0) {
            return Err(CcmtError::InvalidArgument(format!(
                "reference wavenumber must be positive, got {kappa0}"
            )));
        }
        ReferenceParams::new(kappa0 * (kappa0 * h0).tanh(), h0)
    }

    /// Coefficient of the surface boundary mode: `(mu0 h0 + 1) / (2 h0)`.
    pub fn alpha(&self) -> f64 {
        (self.mu0 * self.h0 + 1.0) / (2.0 * self.h0)
    }

    /// Coefficient of the bottom boundary mode: `(mu0 h0 - 1) / (2 h0)`.
    pub fn beta(&self) -> f64 {
        (self.mu0 * self.h0 - 1.0) / (2.0 * self.h0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Propagating,
    Evanescent,
}

/// Eigenvalues of the local vertical problem at one depth.
#[derive(Clone, Debug)]
pub struct LocalEigenvalues {
    /// Propagating wavenumber `k0`.
    pub k0: f64,
    /// Evanescent wavenumbers `k1..`, ascending.
    pub kn: Vec<f64>,
}

/// Solves both dispersion relations at depth `big_h` for `n_evanescent`
/// trigonometric modes.
pub fn solve_dispersion(mu0: f64, big_h: f64, n_evanescent: usize) -> Result<LocalEigenvalues> {
    if !(mu0 > 0.0 && big_h > 0.0) {
        return Err(CcmtError::InvalidArgument(format!(
            "dispersion solve needs mu0, H > 0, got {mu0}, {big_h}"
        )));
    }
    let k0 = solve_propagating(mu0, big_h)?;
    let kn = (1..=n_evanescent)
        .map(|n| solve_evanescent(mu0, big_h, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(LocalEigenvalues { k0, kn })
}

fn solve_propagating(mu0: f64, big_h: f64) -> Result<f64> {
    // g(k) = k tanh(kH) - mu0 is increasing and concave for k > 0, so Newton
    // from a point right of the root converges monotonically.
    let mut k = (mu0 / big_h).sqrt().max(mu0);
    for _ in 0..100 {
        let th = (k * big_h).tanh();
        let sech2 = 1.0 - th * th;
        let g = k * th - mu0;
        let dg = th + k * big_h * sech2;
        let step = g / dg;
        k -= step;
        if step.abs() <= 1e-16 * k {
            break;
        }
    }
    let residual = (k * (k * big_h).tanh() - mu0).abs();
    if !(residual <= 1e-12 * mu0.max(1.0)) {
        return Err(CcmtError::RootFinding(format!(
            "propagating dispersion root stalled: residual {residual}"
        )));
    }
    Ok(k)
}

fn solve_evanescent(mu0: f64, big_h: f64, n: usize) -> Result<f64> {
    // Roots of mu0 + k tan(kH) = 0 are located via the tangent-free form
    // g(k) = mu0 cos(kH) + k sin(kH), which changes sign across each branch
    // interval and has no poles there.
    let pi = std::f64::consts::PI;
    let mut lo = (n as f64 - 0.5) * pi / big_h;
    let mut hi = n as f64 * pi / big_h;
    let g = |k: f64| mu0 * (k * big_h).cos() + k * (k * big_h).sin();
    let dg = |k: f64| {
        let (s, c) = (k * big_h).sin_cos();
        -mu0 * big_h * s + s + k * big_h * c
    };
    let (mut glo, ghi) = (g(lo), g(hi));
    if glo * ghi > 0.0 {
        return Err(CcmtError::RootFinding(format!(
            "evanescent branch {n} not bracketed"
        )));
    }
    // Safeguarded Newton: fall back to bisection whenever the Newton step
    // leaves the bracket or fails to shrink it.
    let mut k = 0.5 * (lo + hi);
    for _ in 0..200 {
        let gk = g(k);
        if gk == 0.0 {
            break;
        }
        if gk * glo < 0.0 {
            hi = k;
        } else {
            lo = k;
            glo = gk;
        }
        let newton = k - gk / dg(k);
        k = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= 4.0 * f64::EPSILON * k {
            break;
        }
    }
    let residual = (mu0 + k * (k * big_h).tan()).abs();
    if !(residual <= 1e-10 * k) {
        return Err(CcmtError::RootFinding(format!(
            "evanescent dispersion root {n} stalled: residual {residual}"
        )));
    }
    Ok(k)
}

/// An eigenvalue with its first two derivatives in the local depth `H`.
#[derive(Clone, Copy, Debug)]
pub struct EigenDerivatives {
    pub k: f64,
    pub dk_dh: f64,
    pub d2k_dh2: f64,
}

/// Closed-form depth derivatives from implicit differentiation of the
/// dispersion relation. Both branches share the second-derivative form.
pub fn depth_derivatives(branch: Branch, k: f64, mu0: f64, big_h: f64) -> EigenDerivatives {
    let dk_dh = match branch {
        Branch::Propagating => {
            let q = k * k - mu0 * mu0;
            -k * q / (mu0 + big_h * q)
        }
        Branch::Evanescent => {
            let q = k * k + mu0 * mu0;
            -k * q / (-mu0 + big_h * q)
        }
    };
    let r = dk_dh / k;
    let d2k_dh2 = -2.0 * dk_dh * (mu0 + r * (big_h * mu0 - 1.0) * (2.0 + big_h * r));
    EigenDerivatives { k, dk_dh, d2k_dh2 }
}

/// Per-mode station data: eigenvalue, horizontal derivatives and norm.
#[derive(Clone, Copy, Debug)]
pub struct ModeData {
    pub branch: Branch,
    pub k: f64,
    pub dk_dx: f64,
    pub d2k_dx2: f64,
    /// Squared vertical L2 norm of the eigenfunction.
    pub norm_sq: f64,
    /// Inverse squared norm.
    pub gamma: f64,
}

/// All local spectral data at one horizontal position.
#[derive(Clone, Debug)]
pub struct Station {
    pub x: f64,
    pub surface: ProfileValue,
    pub bottom: ProfileValue,
    pub depth: ProfileValue,
    /// Mode 0 is propagating, modes `1..` evanescent.
    pub modes: Vec<ModeData>,
}

impl Station {
    /// Solves the local eigensystem at `x` with `n_evanescent` trigonometric
    /// modes.
    pub fn build(
        params: &ReferenceParams,
        geometry: &StripGeometry,
        x: f64,
        n_evanescent: usize,
    ) -> Result<Station> {
        let surface = geometry.surface(x);
        let bottom = geometry.bottom_depth(x);
        let depth = geometry.total_depth(x);
        let eig = solve_dispersion(params.mu0, depth.value, n_evanescent)?;
        let mut modes = Vec::with_capacity(n_evanescent + 1);
        let mut push = |branch: Branch, k: f64| {
            let d = depth_derivatives(branch, k, params.mu0, depth.value);
            let dk_dx = d.dk_dh * depth.dx;
            let d2k_dx2 = d.d2k_dh2 * depth.dx * depth.dx + d.dk_dh * depth.dx2;
            let norm_sq = match branch {
                Branch::Propagating => {
                    (depth.value * (k * k - params.mu0 * params.mu0) + params.mu0)
                        / (2.0 * k * k)
                }
                Branch::Evanescent => {
                    (depth.value * (k * k + params.mu0 * params.mu0) - params.mu0)
                        / (2.0 * k * k)
                }
            };
            modes.push(ModeData {
                branch,
                k,
                dk_dx,
                d2k_dx2,
                norm_sq,
                gamma: 1.0 / norm_sq,
            });
        };
        push(Branch::Propagating, eig.k0);
        for &k in &eig.kn {
            push(Branch::Evanescent, k);
        }
        Ok(Station {
            x,
            surface,
            bottom,
            depth,
            modes,
        })
    }

    pub fn n_evanescent(&self) -> usize {
        self.modes.len() - 1
    }
}

/// Eigenfunction value at a point, with vertical and horizontal derivatives.
#[derive(Clone, Copy, Debug, Default)]
pub struct EigenEval {
    pub value: f64,
    pub dz: f64,
    pub dz2: f64,
    pub dx: f64,
    pub dx2: f64,
    /// The companion function: `sin(k(z+h))/cos(kH)` for trigonometric modes,
    /// `sinh(k(z+h))/cosh(kH)` for the propagating mode.
    pub companion: f64,
}

/// Evaluates eigenfunction `mode_idx` of `station` at height `z`
/// (`-h(x) <= z <= eta(x)`).
pub fn eval_mode(
    params: &ReferenceParams,
    station: &Station,
    mode_idx: usize,
    z: f64,
) -> EigenEval {
    let m = &station.modes[mode_idx];
    let (k, mu0) = (m.k, params.mu0);
    let big_h = station.depth;
    let h = station.bottom;
    let u = z + h.value;

    // Shared x-derivative ingredients: a = d/dx of the argument k (z + h),
    // p = d/dx (k H), b = the logarithmic derivative of the normalization.
    let a = m.dk_dx * u + k * h.dx;
    let da = m.d2k_dx2 * u + 2.0 * m.dk_dx * h.dx + k * h.dx2;
    let p = m.dk_dx * big_h.value + k * big_h.dx;
    let dp = m.d2k_dx2 * big_h.value + 2.0 * m.dk_dx * big_h.dx + k * big_h.dx2;
    let b = mu0 * p / k;
    let db = mu0 * (dp / k - p * m.dk_dx / (k * k));

    match m.branch {
        Branch::Evanescent => {
            let sec = 1.0 / (k * big_h.value).cos();
            let (s, c) = (k * u).sin_cos();
            let value = c * sec;
            let w = s * sec;
            let czz = -a * a - db + b * b;
            let czw = -da + 2.0 * a * b;
            EigenEval {
                value,
                dz: -k * w,
                dz2: -k * k * value,
                dx: -a * w - b * value,
                dx2: czz * value + czw * w,
                companion: w,
            }
        }
        Branch::Propagating => {
            // cosh(ku)/cosh(kH) via decaying exponentials: u is in [0, H].
            let denom = 1.0 + (-2.0 * k * big_h.value).exp();
            let ep = (k * (u - big_h.value)).exp();
            let em = (-k * (u + big_h.value)).exp();
            let value = (ep + em) / denom;
            let s0 = (ep - em) / denom;
            let czz = a * a - db + b * b;
            let czw = da - 2.0 * a * b;
            EigenEval {
                value,
                dz: k * s0,
                dz2: k * k * value,
                dx: a * s0 - b * value,
                dx2: czz * value + czw * s0,
                companion: s0,
            }
        }
    }
}
