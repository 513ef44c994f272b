//! Least-squares slope fits over a tail window.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope from the residuals (zero for exact fits).
    pub slope_stderr: f64,
    pub rms: f64,
    /// Closed abscissa window `[lo, hi]` used by the fit.
    pub window: (f64, f64),
    /// Coefficient of the `ln x` correction when the fit includes one.
    pub log_coefficient: Option<f64>,
}

impl SlopeFit {
    /// Fails with `NonConvergentFit` when the residual RMS exceeds `threshold`.
    pub fn check(self, threshold: f64) -> Result<Self> {
        if !(self.rms <= threshold) {
            return Err(Error::NonConvergentFit { rms: self.rms, threshold });
        }
        Ok(self)
    }
}

fn least_squares(design: &Matrix, y: &Vector) -> Result<(Vector, f64, Vector)> {
    let n = design.nrows();
    let k = design.ncols();
    let svd = design.clone().svd(true, true);
    let coef = svd.solve(y, 1e-14).map_err(|e| Error::InvalidArgument(format!("least squares failed: {e}")))?;
    let resid = y - design * &coef;
    let rss = resid.norm_squared();
    let rms = (rss / n as f64).sqrt();
    let dof = n.saturating_sub(k).max(1) as f64;
    let cov = (design.transpose() * design)
        .try_inverse()
        .ok_or_else(|| Error::InvalidArgument("singular fit design".into()))?
        * (rss / dof);
    let se = Vector::from_fn(k, |i, _| cov[(i, i)].max(0.0).sqrt());
    Ok((coef, rms, se))
}

fn windowed(x: &[f64], y: &[f64], window: Option<(f64, f64)>) -> Result<(Vec<f64>, Vec<f64>, (f64, f64))> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    let (lo, hi) = window.unwrap_or_else(|| {
        (x.iter().copied().fold(f64::INFINITY, f64::min), x.iter().copied().fold(f64::NEG_INFINITY, f64::max))
    });
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        x.iter().zip(y).filter(|(a, _)| **a >= lo - 1e-12 && **a <= hi + 1e-12).map(|(a, b)| (*a, *b)).unzip();
    if xs.len() < 3 {
        return Err(Error::InvalidArgument(format!("fit window [{lo}, {hi}] holds {} points, need 3", xs.len())));
    }
    if ys.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite ordinate in fit".into()));
    }
    Ok((xs, ys, (lo, hi)))
}

/// Straight-line fit `y = slope x + intercept` over the points with `x` in `window`.
pub fn fit_slope(x: &[f64], y: &[f64], window: Option<(f64, f64)>) -> Result<SlopeFit> {
    let (xs, ys, window) = windowed(x, y, window)?;
    let design = Matrix::from_fn(xs.len(), 2, |i, j| if j == 0 { xs[i] } else { 1.0 });
    let (coef, rms, se) = least_squares(&design, &Vector::from_vec(ys.clone()))?;
    Ok(SlopeFit {
        x: xs,
        y: ys,
        slope: coef[0],
        intercept: coef[1],
        slope_stderr: se[0],
        rms,
        window,
        log_coefficient: None,
    })
}

/// Fit `y = slope x + b ln x + intercept`, separating exponential growth from polynomial factors.
pub fn fit_slope_with_log(x: &[f64], y: &[f64], window: Option<(f64, f64)>) -> Result<SlopeFit> {
    let (xs, ys, window) = windowed(x, y, window)?;
    if xs.len() < 4 || xs.iter().any(|&v| v <= 0.0) {
        return Err(Error::InvalidArgument("log-corrected fit needs at least 4 positive abscissae".into()));
    }
    let design = Matrix::from_fn(xs.len(), 3, |i, j| match j {
        0 => xs[i],
        1 => xs[i].ln(),
        _ => 1.0,
    });
    let (coef, rms, se) = least_squares(&design, &Vector::from_vec(ys.clone()))?;
    Ok(SlopeFit {
        x: xs,
        y: ys,
        slope: coef[0],
        intercept: coef[2],
        slope_stderr: se[0],
        rms,
        window,
        log_coefficient: Some(coef[1]),
    })
}

/// Extrapolation of `y(R) → A` from `y = A + B/R + C/R²` over the points with `R` in `window`;
/// returns `A` and the spread against the two-term model as an uncertainty.
pub fn richardson_limit(r: &[f64], y: &[f64], window: Option<(f64, f64)>) -> Result<(f64, f64)> {
    let (rs, ys, _) = windowed(r, y, window)?;
    let yv = Vector::from_vec(ys);
    let three = Matrix::from_fn(rs.len(), 3, |i, j| rs[i].powi(-(j as i32)));
    let two = Matrix::from_fn(rs.len(), 2, |i, j| rs[i].powi(-(j as i32)));
    let (c3, _, se3) = least_squares(&three, &yv)?;
    let (c2, _, _) = least_squares(&two, &yv)?;
    Ok((c3[0], (c3[0] - c2[0]).abs().max(se3[0])))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x: Vec<f64> = (0..10).map(|k| k as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v - 1.0).collect();
        let f = fit_slope(&x, &y, Some((3.0, 9.0))).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept + 1.0).abs() < 1e-12);
        assert_eq!(f.x.len(), 7);
        assert!(f.rms < 1e-12);
    }

    #[test]
    fn log_term_removes_polynomial_growth() {
        let r: Vec<f64> = (12..=20).map(|k| k as f64 * 0.5).collect();
        let quad: Vec<f64> = r.iter().map(|v| (std::f64::consts::PI * v * v).ln()).collect();
        let plain = fit_slope(&r, &quad, None).unwrap();
        assert!(plain.slope > 0.2);
        let f = fit_slope_with_log(&r, &quad, None).unwrap();
        assert!(f.slope.abs() < 1e-10);
        assert!((f.log_coefficient.unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn short_window_rejected() {
        assert!(fit_slope(&[1.0, 2.0], &[1.0, 2.0], None).is_err());
    }

    #[test]
    fn richardson_recovers_limit() {
        let r: Vec<f64> = (2..=18).map(|k| k as f64 * 0.5).collect();
        let y: Vec<f64> = r.iter().map(|v| 4.0 + 3.0 / v - 1.5 / (v * v)).collect();
        let (a, u) = richardson_limit(&r, &y, Some((4.5, 9.0))).unwrap();
        assert!((a - 4.0).abs() < 1e-10);
        assert!(u < 0.1);
    }

    #[test]
    fn nonconvergent_flagged() {
        let x: Vec<f64> = (0..8).map(|k| k as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| if (*v as i64) % 2 == 0 { 0.0 } else { 1.0 }).collect();
        let f = fit_slope(&x, &y, None).unwrap();
        assert!(matches!(f.check(0.1), Err(Error::NonConvergentFit { .. })));
    }
}
