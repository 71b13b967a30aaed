//! Weighted least-squares power-law fitting in log-log coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::estimate::Estimate;
use crate::scalar::Real;

/// Result of a weighted log-log regression.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub slope: f64,
    /// Intercept in log space; exp(intercept) is the prefactor.
    pub intercept: f64,
    pub slope_std_error: f64,
    pub r_squared: f64,
    pub points_used: usize,
}

/// Weighted least squares of y on x. Weights are inverse variances.
pub fn weighted_linear_fit<F: Real>(x: &[F], y: &[F], w: &[F]) -> (F, F, F, F) {
    assert!(x.len() == y.len() && y.len() == w.len() && x.len() >= 2);
    let mut sw = F::zero();
    let mut swx = F::zero();
    let mut swy = F::zero();
    for i in 0..x.len() {
        sw += w[i];
        swx += w[i] * x[i];
        swy += w[i] * y[i];
    }
    let xbar = swx / sw;
    let ybar = swy / sw;
    let mut sxx = F::zero();
    let mut sxy = F::zero();
    for i in 0..x.len() {
        let dx = x[i] - xbar;
        sxx += w[i] * dx * dx;
        sxy += w[i] * dx * (y[i] - ybar);
    }
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let slope_se = (F::one() / sxx).sqrt();
    // weighted R^2
    let mut ss_res = F::zero();
    let mut ss_tot = F::zero();
    for i in 0..x.len() {
        let fit = intercept + slope * x[i];
        let res = y[i] - fit;
        ss_res += w[i] * res * res;
        let dy = y[i] - ybar;
        ss_tot += w[i] * dy * dy;
    }
    let r2 = if ss_tot > F::zero() { F::one() - ss_res / ss_tot } else { F::one() };
    (slope, intercept, slope_se, r2)
}

/// Fit log(mean) against log(scale), weighting each point by the inverse
/// squared relative error. Requires positive means.
pub fn fit_power_law(points: &[(f64, Estimate)]) -> Result<PowerLawFit> {
    if points.len() < 3 {
        return Err(Error::FitUnderdetermined { needed: 3, got: points.len() });
    }
    let mut x = Vec::with_capacity(points.len());
    let mut y = Vec::with_capacity(points.len());
    let mut w = Vec::with_capacity(points.len());
    for (scale, est) in points {
        if est.mean <= 0.0 {
            return Err(Error::NonPositiveMean { scale: *scale });
        }
        x.push(scale.ln());
        y.push(est.mean.ln());
        let rel = est.log_std_error();
        // exact synthetic inputs carry zero error; give them unit weight
        let weight = if rel > 0.0 && rel.is_finite() { 1.0 / (rel * rel) } else { 1.0 };
        w.push(weight);
    }
    let (slope, intercept, slope_se, r2) = weighted_linear_fit(&x, &y, &w);
    Ok(PowerLawFit {
        slope,
        intercept,
        slope_std_error: slope_se,
        r_squared: r2,
        points_used: points.len(),
    })
}

/// Power-law fit with finite-size stabilization: drop the smallest scale
/// until the slope change falls within its standard error (or three points
/// remain). Reports both the raw and the stabilized fit.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StabilizedFit {
    pub raw: PowerLawFit,
    pub stabilized: PowerLawFit,
    pub dropped_scales: usize,
}

pub fn fit_power_law_stabilized(points: &[(f64, Estimate)]) -> Result<StabilizedFit> {
    let raw = fit_power_law(points)?;
    let mut dropped = 0usize;
    let mut current = raw.clone();
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    while pts.len() > 3 {
        let candidate = fit_power_law(&pts[1..])?;
        let tol = candidate.slope_std_error.max(raw.slope_std_error);
        if (candidate.slope - current.slope).abs() <= tol {
            break;
        }
        pts.remove(0);
        current = candidate;
        dropped += 1;
    }
    Ok(StabilizedFit { raw, stabilized: current, dropped_scales: dropped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::estimate::EstimatorKind;

    fn exact(mean: f64) -> Estimate {
        Estimate { mean, std_error: 0.0, n_samples: 1, kind: EstimatorKind::Binomial }
    }

    #[test]
    fn noiseless_power_law_recovered_exactly() {
        let pts: Vec<(f64, Estimate)> =
            [1.0f64, 2.0, 4.0, 8.0].iter().map(|&s| (s, exact(s.powf(-0.5)))).collect();
        let fit = fit_power_law(&pts).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12);
        assert!(fit.intercept.abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);

        let pts2: Vec<(f64, Estimate)> =
            [1.0f64, 3.0, 9.0, 27.0].iter().map(|&s| (s, exact(3.0 * s * s))).collect();
        let fit2 = fit_power_law(&pts2).unwrap();
        assert!((fit2.slope - 2.0).abs() < 1e-12);
        assert!((fit2.intercept - 3.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn rejects_degenerate_inputs() {
        let pts = vec![(1.0, exact(1.0)), (2.0, exact(0.5))];
        assert!(matches!(fit_power_law(&pts), Err(Error::FitUnderdetermined { .. })));
        let bad = vec![(1.0, exact(1.0)), (2.0, exact(0.0)), (4.0, exact(0.1))];
        assert!(matches!(fit_power_law(&bad), Err(Error::NonPositiveMean { .. })));
    }

    #[test]
    fn noisy_synthetic_calibration() {
        // known slope -5/24 with 1% noise: recovered within 2 fitted
        // standard errors in at least 95 of 100 seeds
        let slope_true = -5.0 / 24.0;
        let mut ok = 0;
        for seed in 0..100u64 {
            let mut s = seed.wrapping_mul(0x9e3779b97f4a7c15) + 1;
            let mut gauss = move || {
                // Box-Muller on a simple splitmix stream
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let u1 = ((s >> 11) as f64 + 0.5) / (1u64 << 53) as f64;
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let u2 = ((s >> 11) as f64 + 0.5) / (1u64 << 53) as f64;
                (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
            };
            let pts: Vec<(f64, Estimate)> = [8.0, 16.0, 32.0, 64.0, 128.0]
                .iter()
                .map(|&scale: &f64| {
                    let mean_true = 0.8 * scale.powf(slope_true);
                    let rel = 0.01;
                    let mean = mean_true * (1.0 + rel * gauss());
                    (
                        scale,
                        Estimate {
                            mean,
                            std_error: mean * rel,
                            n_samples: 1000,
                            kind: EstimatorKind::Binomial,
                        },
                    )
                })
                .collect();
            let fit = fit_power_law(&pts).unwrap();
            if (fit.slope - slope_true).abs() < 2.0 * fit.slope_std_error {
                ok += 1;
            }
        }
        assert!(ok >= 95, "only {ok}/100 seeds within 2 standard errors");
    }

    #[test]
    fn stabilization_drops_biased_small_scales() {
        // strong finite-size correction at the smallest scale
        let pts: Vec<(f64, Estimate)> = [4.0, 8.0, 16.0, 32.0, 64.0, 128.0]
            .iter()
            .map(|&s: &f64| {
                let mean = s.powf(-0.5) * (1.0 + 4.0 / s);
                (
                    s,
                    Estimate {
                        mean,
                        std_error: mean * 1e-4,
                        n_samples: 100_000,
                        kind: EstimatorKind::Binomial,
                    },
                )
            })
            .collect();
        let st = fit_power_law_stabilized(&pts).unwrap();
        assert!(st.dropped_scales >= 1);
        assert!(
            (st.stabilized.slope + 0.5).abs() < (st.raw.slope + 0.5).abs(),
            "stabilized {} raw {}",
            st.stabilized.slope,
            st.raw.slope
        );
    }

    #[test]
    fn generic_wls_in_f32() {
        let x = [1.0f32, 2.0, 3.0, 4.0];
        let y = [2.0f32, 4.0, 6.0, 8.0];
        let w = [1.0f32; 4];
        let (slope, intercept, _, r2) = weighted_linear_fit(&x, &y, &w);
        assert!((slope - 2.0).abs() < 1e-5);
        assert!(intercept.abs() < 1e-5);
        assert!((r2 - 1.0).abs() < 1e-6);
    }
}

/// Full weighted linear fit of y on x with standard errors for both
/// coefficients; weights are inverse variances.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_std_error: f64,
    pub intercept_std_error: f64,
    pub r_squared: f64,
}

pub fn weighted_linear_fit_full(x: &[f64], y: &[f64], w: &[f64]) -> LinearFit {
    let (slope, intercept, slope_se, r2) = weighted_linear_fit(x, y, w);
    let sw: f64 = w.iter().sum();
    let xbar: f64 = x.iter().zip(w).map(|(xi, wi)| xi * wi).sum::<f64>() / sw;
    let sxx: f64 = x.iter().zip(w).map(|(xi, wi)| wi * (xi - xbar).powi(2)).sum();
    let intercept_se = (1.0 / sw + xbar * xbar / sxx).sqrt();
    LinearFit { slope, intercept, slope_std_error: slope_se, intercept_std_error: intercept_se, r_squared: r2 }
}
