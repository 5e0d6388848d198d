//! Best-of-N ratio of uniformly random bitstrings scored by Hamming weight,
//! against the Gaussian estimate `1/2 + sqrt(ln N / (2 S))`.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::maxima::EnergyCdf;
use crate::error::{usage, Result};

/// Allowance on top of the Gaussian estimate.
pub const BOUND_SLACK: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub size: usize,
    pub n_shots: u64,
    /// Exact expected best-of-N ratio.
    pub alpha: f64,
    /// `1/2 + sqrt(ln N / (2 S))`.
    pub gaussian: f64,
    pub holds: bool,
    /// `S (alpha - 1/2)^2`.
    pub scaled_excess: f64,
    /// `ln N / 2`.
    pub half_log_n: f64,
}

/// `P(k)` of Binomial(`size`, 1/2) for `k = 0..=size`.
pub fn binomial_half(size: usize) -> Vec<f64> {
    let s = size as f64;
    let ln_total = ln_gamma(s + 1.0) - s * std::f64::consts::LN_2;
    (0..=size)
        .map(|k| {
            let k = k as f64;
            (ln_total - ln_gamma(k + 1.0) - ln_gamma(s - k + 1.0)).exp()
        })
        .collect()
}

/// Exact expected best-of-`n_shots` of `k / size`, `k ~ Binomial(size, 1/2)`.
pub fn binomial_alpha(size: usize, n_shots: u64) -> Result<f64> {
    if size == 0 {
        return usage("size must be positive");
    }
    let values: Vec<f64> = (0..=size).map(|k| k as f64 / size as f64).collect();
    EnergyCdf::from_values(&values, &binomial_half(size))?.expected_max(n_shots)
}

pub fn gaussian_bound_check(n_shots: &[u64], sizes: &[usize]) -> Result<Vec<BoundRow>> {
    let mut rows = Vec::with_capacity(n_shots.len() * sizes.len());
    for &size in sizes {
        for &n in n_shots {
            let alpha = binomial_alpha(size, n)?;
            let ln_n = (n as f64).ln();
            let gaussian = 0.5 + (ln_n / (2.0 * size as f64)).sqrt();
            rows.push(BoundRow {
                size,
                n_shots: n,
                alpha,
                gaussian,
                holds: alpha <= gaussian + BOUND_SLACK,
                scaled_excess: size as f64 * (alpha - 0.5).powi(2),
                half_log_n: 0.5 * ln_n,
            });
        }
    }
    Ok(rows)
}

/// CSV rendering of [`gaussian_bound_check`] rows.
pub fn bound_rows_csv(rows: &[BoundRow]) -> String {
    let mut out = String::from("size,n_shots,alpha,gaussian,holds,scaled_excess,half_log_n\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{:.12},{:.12},{},{:.12},{:.12}\n",
            r.size, r.n_shots, r.alpha, r.gaussian, r.holds, r.scaled_excess, r.half_log_n
        ));
    }
    out
}
