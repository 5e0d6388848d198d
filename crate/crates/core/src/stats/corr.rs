//! Spin-spin correlations and the correlation length.
//!
//! Spins use `z = 1 - 2n`, so the all-ground state has `<z_i z_j> = +1`.

use serde::{Deserialize, Serialize};

use crate::error::{usage, Error, Result};
use crate::graph::Point;
use crate::rydberg::ShotDistribution;

/// Default bin width of the correlation histogram.
pub const DEFAULT_DELTA_R: f64 = 0.04;

/// `<z_i z_j>` for all atom pairs, row-major `n x n`.
pub fn spin_correlations(dist: &ShotDistribution) -> Vec<Vec<f64>> {
    let n = dist.n;
    let mut c = vec![vec![0.0; n]; n];
    for (&s, &p) in dist.states.iter().zip(&dist.probs) {
        for i in 0..n {
            let zi = if s >> i & 1 == 1 { -1.0 } else { 1.0 };
            for j in i..n {
                let zj = if s >> j & 1 == 1 { -1.0 } else { 1.0 };
                c[i][j] += p * zi * zj;
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            c[i][j] = c[j][i];
        }
    }
    c
}

/// Correlations of one graph together with its geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrSample {
    pub points: Vec<Point>,
    pub corr: Vec<Vec<f64>>,
}

impl CorrSample {
    pub fn from_distribution(points: Vec<Point>, dist: &ShotDistribution) -> Result<Self> {
        if points.len() != dist.n {
            return Err(Error::LengthMismatch {
                expected: dist.n,
                got: points.len(),
            });
        }
        Ok(CorrSample {
            points,
            corr: spin_correlations(dist),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregate {
    /// Largest `|<z_i z_j>|` in the bin.
    #[default]
    Max,
    /// Mean `|<z_i z_j>|` in the bin.
    Mean,
}

/// Binned `|<z_i z_j>|` against distance. Bin `k` covers
/// `[k * delta_r, (k + 1) * delta_r)`; empty bins are omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct G2Curve {
    pub delta_r: f64,
    pub centers: Vec<f64>,
    pub values: Vec<f64>,
    pub counts: Vec<usize>,
}

pub fn binned_g2(samples: &[CorrSample], delta_r: f64, agg: Aggregate) -> Result<G2Curve> {
    if !(delta_r > 0.0) {
        return usage(format!("bin width must be positive, got {delta_r}"));
    }
    let mut bins: Vec<(f64, f64, usize)> = Vec::new();
    for s in samples {
        let n = s.points.len();
        if s.corr.len() != n || s.corr.iter().any(|row| row.len() != n) {
            return Err(Error::LengthMismatch {
                expected: n,
                got: s.corr.len(),
            });
        }
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (s.points[i], s.points[j]);
                let r = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
                let k = (r / delta_r).floor() as usize;
                if bins.len() <= k {
                    bins.resize(k + 1, (0.0, 0.0, 0));
                }
                let v = s.corr[i][j].abs();
                let bin = &mut bins[k];
                bin.0 = bin.0.max(v);
                bin.1 += v;
                bin.2 += 1;
            }
        }
    }
    let mut curve = G2Curve {
        delta_r,
        centers: Vec::new(),
        values: Vec::new(),
        counts: Vec::new(),
    };
    for (k, &(max, sum, count)) in bins.iter().enumerate() {
        if count == 0 {
            continue;
        }
        curve.centers.push((k as f64 + 0.5) * delta_r);
        curve.values.push(match agg {
            Aggregate::Max => max,
            Aggregate::Mean => sum / count as f64,
        });
        curve.counts.push(count);
    }
    if curve.centers.is_empty() {
        return usage("no atom pairs to bin");
    }
    Ok(curve)
}

/// Fit of `g2(r) = exp(-r / xi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrFit {
    pub delta_r: f64,
    pub centers: Vec<f64>,
    pub g2: Vec<f64>,
    pub xi: f64,
    /// RMS residual of `ln g2` over the fitted bins.
    pub residual: f64,
    pub bins_used: usize,
    pub density: f64,
    /// `density * xi^2`.
    pub n_star: f64,
    /// `n_star` rounded to the nearest atom count.
    pub n_star_rounded: u64,
}

/// `nu * xi^2`.
pub fn n_star(density: f64, xi: f64) -> f64 {
    density * xi * xi
}

/// Least-squares fit of `ln g2 = -r / xi` through the origin. Bins with
/// non-positive `g2` are skipped; at least three must remain.
pub fn fit_xi(curve: &G2Curve, density: f64) -> Result<CorrFit> {
    let pts: Vec<(f64, f64)> = curve
        .centers
        .iter()
        .zip(&curve.values)
        .filter(|&(_, &g)| g > 0.0)
        .map(|(&r, &g)| (r, g.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::Fit(format!(
            "need at least 3 positive bins, got {}",
            pts.len()
        )));
    }
    let srr: f64 = pts.iter().map(|(r, _)| r * r).sum();
    let sry: f64 = pts.iter().map(|(r, y)| r * y).sum();
    let inv_xi = -sry / srr;
    if !(inv_xi > 0.0) {
        return Err(Error::Fit("correlations do not decay with distance".into()));
    }
    let xi = 1.0 / inv_xi;
    let residual = (pts
        .iter()
        .map(|(r, y)| (y + r * inv_xi).powi(2))
        .sum::<f64>()
        / pts.len() as f64)
        .sqrt();
    let ns = n_star(density, xi);
    Ok(CorrFit {
        delta_r: curve.delta_r,
        centers: curve.centers.clone(),
        g2: curve.values.clone(),
        xi,
        residual,
        bins_used: pts.len(),
        density,
        n_star: ns,
        n_star_rounded: ns.round() as u64,
    })
}
