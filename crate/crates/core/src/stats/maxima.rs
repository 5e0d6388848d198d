//! Expected best-of-N values of a discrete distribution.
//!
//! For a value `X` with step CDF `F` supported on `x_1 < ... < x_m`,
//! `E[max of N draws] = x_m - sum_{k<m} (x_{k+1} - x_k) F(x_k)^N`.

use serde::{Deserialize, Serialize};

use crate::cost::ratio_from_energy;
use crate::error::{usage, Result};
use crate::rydberg::ShotDistribution;

/// Step CDF of the normalised energy `x = E / E_MIS`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyCdf {
    /// Distinct support points, ascending.
    pub xs: Vec<f64>,
    /// `F(xs[k])`; the last entry is exactly 1.
    pub cum: Vec<f64>,
}

impl EnergyCdf {
    /// Build from `(value, probability)` pairs; probabilities are renormalised.
    pub fn from_values(values: &[f64], probs: &[f64]) -> Result<Self> {
        if values.len() != probs.len() || values.is_empty() {
            return usage("values and probabilities must be nonempty and equally long");
        }
        if probs.iter().any(|&p| !(p >= 0.0)) || values.iter().any(|v| !v.is_finite()) {
            return usage("probabilities must be non-negative and values finite");
        }
        let total: f64 = probs.iter().sum();
        if total <= 0.0 {
            return usage("distribution has zero mass");
        }
        let mut pairs: Vec<(f64, f64)> = values
            .iter()
            .copied()
            .zip(probs.iter().map(|p| p / total))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut xs: Vec<f64> = Vec::new();
        let mut mass: Vec<f64> = Vec::new();
        for (x, p) in pairs {
            match xs.last() {
                Some(&last) if last == x => *mass.last_mut().expect("parallel vectors") += p,
                _ => {
                    xs.push(x);
                    mass.push(p);
                }
            }
        }
        // Drop zero-probability support so the maximum is the largest reachable value.
        let keep: Vec<usize> = (0..xs.len()).filter(|&k| mass[k] > 0.0).collect();
        let xs: Vec<f64> = keep.iter().map(|&k| xs[k]).collect();
        let mut cum = Vec::with_capacity(xs.len());
        let mut acc = 0.0;
        for &k in &keep {
            acc += mass[k];
            cum.push(acc.min(1.0));
        }
        *cum.last_mut().expect("nonempty support") = 1.0;
        Ok(EnergyCdf { xs, cum })
    }

    /// CDF of the approximation ratio `E / (-exact_size)` of a distribution.
    pub fn from_distribution(dist: &ShotDistribution, exact_size: usize) -> Result<Self> {
        let xs = dist
            .energies
            .iter()
            .map(|&e| ratio_from_energy(e, exact_size))
            .collect::<Result<Vec<_>>>()?;
        Self::from_values(&xs, &dist.probs)
    }

    /// `F(x)`, right-continuous.
    pub fn cdf(&self, x: f64) -> f64 {
        let k = self.xs.partition_point(|&v| v <= x);
        if k == 0 {
            0.0
        } else {
            self.cum[k - 1]
        }
    }

    pub fn max_support(&self) -> f64 {
        *self.xs.last().expect("nonempty support")
    }

    pub fn min_support(&self) -> f64 {
        self.xs[0]
    }

    pub fn mean(&self) -> f64 {
        let mut prev = 0.0;
        self.xs
            .iter()
            .zip(&self.cum)
            .map(|(x, &c)| {
                let p = c - prev;
                prev = c;
                x * p
            })
            .sum()
    }

    /// Expected maximum of `n` independent draws, by the step-CDF closed form.
    pub fn expected_max(&self, n: u64) -> Result<f64> {
        check_shots(n)?;
        let m = self.xs.len();
        let mut s = 0.0;
        for k in 0..m - 1 {
            s += (self.xs[k + 1] - self.xs[k]) * pow(self.cum[k], n);
        }
        Ok(self.xs[m - 1] - s)
    }

    /// The same quantity as `sum_k x_k (F_k^n - F_{k-1}^n)`.
    pub fn expected_max_direct(&self, n: u64) -> Result<f64> {
        check_shots(n)?;
        let mut prev = 0.0;
        let mut s = 0.0;
        for (x, &c) in self.xs.iter().zip(&self.cum) {
            let cur = pow(c, n);
            s += x * (cur - prev);
            prev = cur;
        }
        Ok(s)
    }

    /// `1 - int_0^1 F(x)^n dx`, valid for support inside `[0, 1]`.
    pub fn expected_max_unit_interval(&self, n: u64) -> Result<f64> {
        check_shots(n)?;
        if self.min_support() < 0.0 || self.max_support() > 1.0 {
            return usage("support must lie in [0, 1]");
        }
        let mut integral = 0.0;
        for k in 0..self.xs.len() {
            let right = self.xs.get(k + 1).copied().unwrap_or(1.0);
            integral += (right - self.xs[k]) * pow(self.cum[k], n);
        }
        Ok(1.0 - integral)
    }
}

fn check_shots(n: u64) -> Result<()> {
    if n == 0 {
        return usage("n_shots must be at least 1");
    }
    Ok(())
}

fn pow(f: f64, n: u64) -> f64 {
    if n <= i32::MAX as u64 {
        f.powi(n as i32)
    } else {
        f.powf(n as f64)
    }
}

/// `M(N) = E_max - int_{E_min}^{E_max} F(e)^N de` over raw values, where
/// values are maximised (pass `-E_target` for energies).
pub fn expected_max_value(values: &[f64], probs: &[f64], n: u64) -> Result<f64> {
    let cdf = EnergyCdf::from_values(values, probs)?;
    let hi = cdf.max_support();
    check_shots(n)?;
    let mut integral = 0.0;
    for k in 0..cdf.xs.len() {
        let right = cdf.xs.get(k + 1).copied().unwrap_or(hi);
        integral += (right - cdf.xs[k]) * pow(cdf.cum[k], n);
    }
    Ok(hi - integral)
}

/// `sum_i p_i E_i / (-exact_size)`.
pub fn mean_ratio(dist: &ShotDistribution, exact_size: usize) -> Result<f64> {
    ratio_from_energy(dist.mean_energy(), exact_size)
}

/// Expected best-of-`n_shots` approximation ratio.
pub fn expected_max_ratio(dist: &ShotDistribution, n_shots: u64, exact_size: usize) -> Result<f64> {
    EnergyCdf::from_distribution(dist, exact_size)?.expected_max(n_shots)
}

/// Ratio-vs-shots curve for plotting.
pub fn best_of_curve(
    dist: &ShotDistribution,
    shots: &[u64],
    exact_size: usize,
) -> Result<Vec<(u64, f64)>> {
    let cdf = EnergyCdf::from_distribution(dist, exact_size)?;
    shots
        .iter()
        .map(|&n| Ok((n, cdf.expected_max(n)?)))
        .collect()
}
