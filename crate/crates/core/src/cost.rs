//! UD-MIS cost functions and the penalised target energy
//! `E(s) = -f(s) + u * h(s)`, where `f` counts selected vertices and `h`
//! counts edges with both endpoints selected.

use serde::{Deserialize, Serialize};

use crate::error::{usage, Error, Result};
use crate::graph::{Bitstring, UnitDiskGraph};

/// Lagrange multiplier used throughout.
pub const DEFAULT_U: f64 = 1.35;

/// Multipliers for which the bound test expects IS-only minimizers.
pub const U_ABOVE_ONE: [f64; 3] = [1.05, 1.35, 2.0];

/// Largest graph the enumeration-based bound check accepts.
pub const BOUND_CHECK_MAX_N: usize = 20;

/// Penalty weight `u` of the target energy. Always `> 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetModel {
    u: f64,
}

impl Default for TargetModel {
    fn default() -> Self {
        TargetModel { u: DEFAULT_U }
    }
}

impl TargetModel {
    pub fn new(u: f64) -> Result<Self> {
        if !(u > 1.0 && u.is_finite()) {
            return usage(format!("Lagrange multiplier must exceed 1, got {u}"));
        }
        Ok(TargetModel { u })
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn energy(&self, g: &UnitDiskGraph, s: &Bitstring) -> Result<f64> {
        target_energy(g, s, *self)
    }

    /// Energy of a packed basis state given its vertex and conflict counts.
    pub fn energy_of_counts(&self, selected: usize, conflicts: usize) -> f64 {
        -(selected as f64) + self.u * conflicts as f64
    }
}

fn check_len(g: &UnitDiskGraph, s: &Bitstring) -> Result<()> {
    if s.len() != g.n() {
        return Err(Error::LengthMismatch {
            expected: g.n(),
            got: s.len(),
        });
    }
    Ok(())
}

/// Number of selected vertices.
pub fn f(g: &UnitDiskGraph, s: &Bitstring) -> Result<usize> {
    check_len(g, s)?;
    Ok(s.hamming_weight())
}

/// Number of edges with both endpoints selected.
pub fn h(g: &UnitDiskGraph, s: &Bitstring) -> Result<usize> {
    check_len(g, s)?;
    Ok(g.edges().filter(|&(i, j)| s.get(i) && s.get(j)).count())
}

pub fn target_energy(g: &UnitDiskGraph, s: &Bitstring, model: TargetModel) -> Result<f64> {
    Ok(model.energy_of_counts(f(g, s)?, h(g, s)?))
}

/// `energy / (-exact_size)`: the ratio of an energy (or an expected energy)
/// to the energy of a maximum independent set.
pub fn ratio_from_energy(energy: f64, exact_size: usize) -> Result<f64> {
    if exact_size == 0 {
        return usage("approximation ratio needs a nonzero optimum");
    }
    Ok(energy / -(exact_size as f64))
}

/// Approximation ratio of a bitstring; equals `|s| / exact_size` for an IS.
pub fn approximation_ratio(
    g: &UnitDiskGraph,
    s: &Bitstring,
    model: TargetModel,
    exact_size: usize,
) -> Result<f64> {
    let ratio = ratio_from_energy(target_energy(g, s, model)?, exact_size)?;
    debug_assert!(ratio <= 1.0 + model.u() * g.n_edges() as f64);
    Ok(ratio)
}

/// All global minimizers of `-f + u*h`, as packed bitstrings.
pub fn global_minimizers(g: &UnitDiskGraph, u: f64) -> Result<Vec<u64>> {
    let n = g.n();
    if n > BOUND_CHECK_MAX_N {
        return usage(format!("enumeration limited to n <= {BOUND_CHECK_MAX_N}"));
    }
    let edges: Vec<(usize, usize)> = g.edges().collect();
    let mut best = f64::INFINITY;
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << n) {
        let conflicts = edges
            .iter()
            .filter(|&&(i, j)| mask >> i & mask >> j & 1 == 1)
            .count();
        let e = -(mask.count_ones() as f64) + u * conflicts as f64;
        if e < best - 1e-12 {
            best = e;
            out.clear();
        }
        if (e - best).abs() <= 1e-12 {
            out.push(mask);
        }
    }
    Ok(out)
}

fn packed_is_independent(g: &UnitDiskGraph, mask: u64) -> bool {
    g.edges().all(|(i, j)| mask >> i & mask >> j & 1 == 0)
}

/// Whether every global minimizer at multiplier `u` is an independent set.
pub fn minimizers_are_independent(g: &UnitDiskGraph, u: f64) -> Result<bool> {
    Ok(global_minimizers(g, u)?
        .into_iter()
        .all(|m| packed_is_independent(g, m)))
}

/// Enumeration check that every `u` in [`U_ABOVE_ONE`] only has independent
/// global minimizers on `g`.
pub fn u_bound_property_test(g: &UnitDiskGraph) -> Result<bool> {
    for u in U_ABOVE_ONE {
        if !minimizers_are_independent(g, u)? {
            return Ok(false);
        }
    }
    Ok(true)
}
