//! Large-size extrapolation of best-of-N ratios,
//! `alpha(N, n_shots) = alpha_sat + beta * sqrt(ln(n_shots) / (2 N))`.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{usage, Error, Result};

/// One observed best-of-`n_shots` ratio at `n_atoms`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtrapSample {
    pub n_atoms: f64,
    pub n_shots: u64,
    pub max_ratio: f64,
}

/// `sqrt(ln(n_shots) / (2 n_atoms))`.
pub fn regressor(n_atoms: f64, n_shots: u64) -> f64 {
    ((n_shots as f64).ln() / (2.0 * n_atoms)).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtrapFit {
    pub alpha_sat: f64,
    pub beta: f64,
    /// Residual standard deviation, `sqrt(SSR / (m - 1))`.
    pub sigma: f64,
    /// `sum x^2` over the samples.
    pub sxx: f64,
    pub samples: usize,
    /// Two-sided 97.5% Student-t quantile with `m - 1` degrees of freedom.
    pub t_quantile: f64,
    pub interval_method: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub n_atoms: f64,
    pub n_shots: u64,
    pub ratio: f64,
    pub half_width: f64,
    pub lower: f64,
    pub upper: f64,
}

impl ExtrapFit {
    pub fn predict(&self, n_atoms: f64, n_shots: u64) -> Result<Prediction> {
        if !(n_atoms > 0.0) || n_shots == 0 {
            return usage("prediction needs n_atoms > 0 and n_shots >= 1");
        }
        let x = regressor(n_atoms, n_shots);
        let ratio = self.alpha_sat + self.beta * x;
        let half_width = self.t_quantile * self.sigma * (1.0 + x * x / self.sxx).sqrt();
        Ok(Prediction {
            n_atoms,
            n_shots,
            ratio,
            half_width,
            lower: ratio - half_width,
            upper: ratio + half_width,
        })
    }
}

/// Zero-intercept least squares of `max_ratio - alpha_sat` on the regressor,
/// with a 95% prediction interval from the Student-t distribution.
pub fn fit_extrapolation(samples: &[ExtrapSample], alpha_sat: f64) -> Result<ExtrapFit> {
    if samples.len() < 3 {
        return usage(format!("need at least 3 samples, got {}", samples.len()));
    }
    if samples.iter().any(|s| !(s.n_atoms > 0.0) || s.n_shots == 0) {
        return usage("samples need n_atoms > 0 and n_shots >= 1");
    }
    let xy: Vec<(f64, f64)> = samples
        .iter()
        .map(|s| (regressor(s.n_atoms, s.n_shots), s.max_ratio - alpha_sat))
        .collect();
    let sxx: f64 = xy.iter().map(|(x, _)| x * x).sum();
    if sxx <= 0.0 {
        return Err(Error::Fit(
            "regressor is identically zero (all n_shots = 1)".into(),
        ));
    }
    let sxy: f64 = xy.iter().map(|(x, y)| x * y).sum();
    let beta = sxy / sxx;
    let dof = (samples.len() - 1) as f64;
    let ssr: f64 = xy.iter().map(|(x, y)| (y - beta * x).powi(2)).sum();
    let t = StudentsT::new(0.0, 1.0, dof)
        .map_err(|e| Error::Fit(e.to_string()))?
        .inverse_cdf(0.975);
    Ok(ExtrapFit {
        alpha_sat,
        beta,
        sigma: (ssr / dof).sqrt(),
        sxx,
        samples: samples.len(),
        t_quantile: t,
        interval_method:
            "single-regressor zero-intercept OLS, Student-t prediction interval, m-1 dof".into(),
    })
}
