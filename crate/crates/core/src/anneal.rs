//! One-dimensional optimisation of the annealing time `t_f`.
//!
//! Every evaluation reuses one basis and one seed, so the objective is a
//! deterministic function of `t_f` and repeated points are served from a cache.

use serde::{Deserialize, Serialize};

use crate::error::{usage, Result};
use crate::graph::UnitDiskGraph;
use crate::rydberg::{basis_for, simulate_basis, AnnealConfig, IsBasis, NoiseModel, SimOptions};

/// Search interval for `t_f` in microseconds; proposals are clamped into it.
pub const TF_BOUNDS: (f64, f64) = (0.1, 20.0);
pub const INITIAL_STEP: f64 = 0.3;
/// The search stops once the step falls below this.
pub const STEP_TOL: f64 = 0.02;
pub const DEFAULT_MAX_ITERS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub t_f: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfOptimum {
    pub tf_star: f64,
    pub e_star: f64,
    /// Every distinct evaluation in the order it was made.
    pub history: Vec<Evaluation>,
    /// The step shrank below [`STEP_TOL`] before the evaluation limit.
    pub converged: bool,
}

impl TfOptimum {
    /// Running minimum of the history, one entry per evaluation.
    pub fn best_so_far(&self) -> Vec<f64> {
        let mut best = f64::INFINITY;
        self.history
            .iter()
            .map(|e| {
                best = best.min(e.energy);
                best
            })
            .collect()
    }
}

/// Mean target energy of the anneal ending at `t_f` on a prebuilt basis.
pub fn energy_at(basis: &IsBasis, t_f: f64, gamma: f64, opts: &SimOptions) -> Result<f64> {
    let c = AnnealConfig::with_tf(t_f)?;
    Ok(simulate_basis(basis, &c, gamma, opts)?.mean_energy())
}

/// Energy of the uniform mixture over all basis states.
pub fn maximally_mixed_energy(basis: &IsBasis) -> f64 {
    let e = basis.target_energies();
    e.iter().sum::<f64>() / e.len() as f64
}

struct Objective<'a> {
    basis: &'a IsBasis,
    gamma: f64,
    opts: &'a SimOptions,
    history: Vec<Evaluation>,
    limit: usize,
}

impl Objective<'_> {
    fn exhausted(&self) -> bool {
        self.history.len() >= self.limit
    }

    fn eval(&mut self, t: f64) -> Result<f64> {
        let t = t.clamp(TF_BOUNDS.0, TF_BOUNDS.1);
        // Probes reached by different step sums can differ in the last bits.
        if let Some(e) = self.history.iter().find(|e| (e.t_f - t).abs() <= 1e-9 * t) {
            return Ok(e.energy);
        }
        let energy = energy_at(self.basis, t, self.gamma, self.opts)?;
        self.history.push(Evaluation { t_f: t, energy });
        Ok(energy)
    }
}

/// Vertex of the parabola through three points, if it opens upward.
fn parabola_vertex((a, fa): (f64, f64), (b, fb): (f64, f64), (c, fc): (f64, f64)) -> Option<f64> {
    let num = (b - a).powi(2) * (fb - fc) - (b - c).powi(2) * (fb - fa);
    let den = (b - a) * (fb - fc) - (b - c) * (fb - fa);
    if den.abs() < 1e-300 {
        return None;
    }
    let v = b - 0.5 * num / den;
    v.is_finite().then_some(v)
}

/// Minimise the mean target energy over `t_f` on a prebuilt basis.
///
/// A compass search that doubles the step after a success and halves it
/// after a failed pair of probes, with a parabolic step once the current
/// point is bracketed. `max_iters` caps the number of distinct evaluations.
pub fn optimize_tf_basis(
    basis: &IsBasis,
    gamma: f64,
    t0: f64,
    max_iters: usize,
    opts: &SimOptions,
) -> Result<TfOptimum> {
    if !(t0 > 0.0) {
        return usage(format!("t0 must be positive, got {t0}"));
    }
    if max_iters == 0 {
        return usage("max_iters must be at least 1");
    }
    let mut obj = Objective {
        basis,
        gamma,
        opts,
        history: Vec::new(),
        limit: max_iters,
    };
    let mut x = t0.clamp(TF_BOUNDS.0, TF_BOUNDS.1);
    let mut fx = obj.eval(x)?;
    let mut step = INITIAL_STEP;
    let mut dir = 1.0;
    while step >= STEP_TOL && !obj.exhausted() {
        let y = (x + dir * step).clamp(TF_BOUNDS.0, TF_BOUNDS.1);
        let fy = if y == x { f64::INFINITY } else { obj.eval(y)? };
        if fy < fx {
            (x, fx) = (y, fy);
            step *= 2.0;
            continue;
        }
        if obj.exhausted() {
            break;
        }
        let z = (x - dir * step).clamp(TF_BOUNDS.0, TF_BOUNDS.1);
        let fz = if z == x { f64::INFINITY } else { obj.eval(z)? };
        if fz < fx {
            (x, fx) = (z, fz);
            dir = -dir;
            step *= 2.0;
            continue;
        }
        if fy.is_finite() && fz.is_finite() && !obj.exhausted() {
            let (lo, hi) = if y < z {
                ((y, fy), (z, fz))
            } else {
                ((z, fz), (y, fy))
            };
            if let Some(p) = parabola_vertex(lo, (x, fx), hi) {
                if p > lo.0 && p < hi.0 && (p - x).abs() >= 0.5 * STEP_TOL {
                    let fp = obj.eval(p)?;
                    if fp < fx {
                        (x, fx) = (p, fp);
                    }
                }
            }
        }
        step *= 0.5;
    }
    let converged = step < STEP_TOL;
    let best = obj
        .history
        .iter()
        .copied()
        .min_by(|a, b| a.energy.total_cmp(&b.energy))
        .expect("at least one evaluation");
    debug_assert!(best.energy <= fx);
    Ok(TfOptimum {
        tf_star: best.t_f,
        e_star: best.energy,
        history: obj.history,
        converged,
    })
}

/// [`optimize_tf_basis`] on the basis selected by `opts`.
pub fn optimize_tf(
    g: &UnitDiskGraph,
    noise: &NoiseModel,
    t0: f64,
    max_iters: usize,
    opts: &SimOptions,
) -> Result<TfOptimum> {
    noise.validate()?;
    let basis = basis_for(g, &AnnealConfig::with_tf(1.0)?, opts)?;
    optimize_tf_basis(&basis, noise.gamma, t0, max_iters, opts)
}

/// Energy at each grid point.
pub fn tf_scan(
    g: &UnitDiskGraph,
    noise: &NoiseModel,
    grid: &[f64],
    opts: &SimOptions,
) -> Result<Vec<Evaluation>> {
    if grid.is_empty() {
        return usage("t_f grid is empty");
    }
    noise.validate()?;
    let basis = basis_for(g, &AnnealConfig::with_tf(1.0)?, opts)?;
    grid.iter()
        .map(|&t_f| {
            Ok(Evaluation {
                t_f,
                energy: energy_at(&basis, t_f, noise.gamma, opts)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfRow {
    pub n: usize,
    pub graphs: usize,
    pub mean_tf_star: f64,
    pub std_tf_star: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfTable {
    pub gamma: f64,
    /// One row per atom count, ascending.
    pub rows: Vec<TfRow>,
    /// Coefficient of variation of `mean_tf_star` across rows; zero for one row.
    pub cv: f64,
}

/// Optimal annealing time per atom count over a corpus.
pub fn tf_vs_natoms(
    corpus: &[UnitDiskGraph],
    noise: &NoiseModel,
    t0: f64,
    max_iters: usize,
    opts: &SimOptions,
) -> Result<TfTable> {
    if corpus.is_empty() {
        return usage("corpus is empty");
    }
    let mut by_n: std::collections::BTreeMap<usize, Vec<f64>> = Default::default();
    for g in corpus {
        let opt = optimize_tf(g, noise, t0, max_iters, opts)?;
        by_n.entry(g.n()).or_default().push(opt.tf_star);
    }
    let rows: Vec<TfRow> = by_n
        .into_iter()
        .map(|(n, ts)| {
            let (mean, std) = mean_std(&ts);
            TfRow {
                n,
                graphs: ts.len(),
                mean_tf_star: mean,
                std_tf_star: std,
            }
        })
        .collect();
    let means: Vec<f64> = rows.iter().map(|r| r.mean_tf_star).collect();
    let (m, s) = mean_std(&means);
    Ok(TfTable {
        gamma: noise.gamma,
        rows,
        cv: if m > 0.0 { s / m } else { 0.0 },
    })
}

/// Mean and sample standard deviation; the deviation of one value is zero.
pub(crate) fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
