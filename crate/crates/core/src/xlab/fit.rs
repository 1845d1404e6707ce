//! Power-law fits `y ≈ A x^b` by least squares on logarithms.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub exponent: f64,
    pub prefactor: f64,
    /// RMS of the log-space residuals.
    pub residual: f64,
    /// Range of `x` actually used.
    pub window: (f64, f64),
    pub n_points: usize,
    /// Standard error of the exponent.
    pub stderr: f64,
    /// 95% confidence interval of the exponent (Student t, `n - 2` dof).
    pub ci95: (f64, f64),
}

/// Fits `log y = log A + b log x` over the points with `x` inside `window`
/// (all points when `None`).
pub fn fit_power_law(xs: &[f64], ys: &[f64], window: Option<(f64, f64)>) -> Result<RateFit> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidInput(format!(
            "{} abscissae but {} ordinates",
            xs.len(),
            ys.len()
        )));
    }
    let mut pts = Vec::with_capacity(xs.len());
    for (i, (&x, &y)) in xs.iter().zip(ys).enumerate() {
        if let Some((lo, hi)) = window {
            if !(x >= lo && x <= hi) {
                continue;
            }
        }
        if !(x > 0.0) {
            return Err(Error::NonPositive { index: i, value: x });
        }
        if !(y > 0.0) {
            return Err(Error::NonPositive { index: i, value: y });
        }
        pts.push((x, y));
    }
    if pts.len() < 4 {
        return Err(Error::TooFewPoints(pts.len()));
    }
    let n = pts.len() as f64;
    let lx: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    // Centering on the first ordinate keeps constant data exactly flat.
    let y0 = ly[0];
    let my = ly.iter().map(|y| y - y0).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in lx.iter().zip(&ly) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - y0 - my);
    }
    if sxx == 0.0 {
        return Err(Error::InvalidInput("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = y0 + my - slope * mx;
    let ss: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let stderr = (ss / (n - 2.0) / sxx).sqrt();
    let tq = StudentsT::new(0.0, 1.0, n - 2.0)
        .map(|d| d.inverse_cdf(0.975))
        .unwrap_or(f64::NAN);
    let xmin = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let xmax = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    Ok(RateFit {
        exponent: slope,
        prefactor: intercept.exp(),
        residual: (ss / n).sqrt(),
        window: (xmin, xmax),
        n_points: pts.len(),
        stderr,
        ci95: (slope - tq * stderr, slope + tq * stderr),
    })
}

/// Least-squares slope of `log y` against `log x` with no window or
/// point-count requirement beyond two distinct abscissae (for short
/// sequences such as one value per level).
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::TooFewPoints(xs.len().min(ys.len())));
    }
    for (i, v) in xs.iter().chain(ys).enumerate() {
        if !(*v > 0.0) {
            return Err(Error::NonPositive { index: i % xs.len(), value: *v });
        }
    }
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("all abscissae coincide".into()));
    }
    Ok(lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_law() {
        let xs: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 1.0 / x).collect();
        let f = fit_power_law(&xs, &ys, None).unwrap();
        assert!((f.exponent + 1.0).abs() < 1e-14);
        assert!(f.residual < 1e-14);
        assert!((f.prefactor - 1.0).abs() < 1e-13);
    }

    #[test]
    fn noisy_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let xs: Vec<f64> = (0..50).map(|i| 10f64.powf(i as f64 / 25.0)).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|x| 3.0 * x.powi(-2) * (1.0 + 0.01 * rng.random_range(-1.0..1.0)))
            .collect();
        let f = fit_power_law(&xs, &ys, None).unwrap();
        assert!(f.exponent > -2.05 && f.exponent < -1.95);
        assert!(f.ci95.0 < -2.0 + 0.05 && f.ci95.1 > -2.0 - 0.05);
    }

    #[test]
    fn constant_data_and_errors() {
        let xs = [1.0, 2.0, 4.0, 8.0, 16.0];
        let ys = [3.0; 5];
        assert_eq!(fit_power_law(&xs, &ys, None).unwrap().exponent, 0.0);
        assert!(matches!(
            fit_power_law(&xs, &ys, Some((2.0, 8.0))),
            Err(Error::TooFewPoints(3))
        ));
        assert!((log_log_slope(&xs[..3], &[1.0, 0.25, 0.0625]).unwrap() + 2.0).abs() < 1e-14);
        let bad = [1.0, -2.0, 3.0, 4.0, 5.0];
        assert!(matches!(fit_power_law(&xs, &bad, None), Err(Error::NonPositive { index: 1, .. })));
    }
}
