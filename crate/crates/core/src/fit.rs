//! Least-squares slope fits on log-log data, used for decay- and
//! convergence-rate diagnostics.

use crate::error::{CcmtError, Result};

/// Ordinary least-squares slope of `y` against `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(CcmtError::InvalidArgument(format!(
            "slope fit needs >= 2 paired samples, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
    }
    if sxx == 0.0 {
        return Err(CcmtError::InvalidArgument(
            "degenerate fit range: all abscissae equal".into(),
        ));
    }
    Ok(sxy / sxx)
}

/// Fitted slope of `log(value)` vs `log(index)` over `index` in
/// `[lo, hi]`. Pairs with non-positive values are skipped.
pub fn loglog_slope(pairs: &[(f64, f64)], lo: f64, hi: f64) -> Result<f64> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = pairs
        .iter()
        .filter(|(i, v)| *i >= lo && *i <= hi && *i > 0.0 && *v > 0.0)
        .map(|(i, v)| (i.ln(), v.ln()))
        .unzip();
    ols_slope(&xs, &ys)
}
