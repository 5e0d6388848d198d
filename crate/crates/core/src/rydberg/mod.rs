//! Noisy simulation of a Rydberg-atom annealer on unit-disk graphs.
//!
//! The resource Hamiltonian is
//! `H(t) = (omega/2) sum_i X_i - delta sum_i n_i + sum_{i<j} V/r_ij^6 n_i n_j`,
//! evolved from `|0...0>` through a three-stage schedule. Simulation runs
//! either in the independent-set subspace or in the full `2^n` space.

pub mod basis;
pub mod lindblad;
pub(crate) mod ode;
pub mod readout;
pub mod schedule;
pub mod trajectory;

use serde::{Deserialize, Serialize};

pub use basis::{build_full_basis, build_is_basis, hamiltonian_apply, IsBasis};
pub use lindblad::{lindblad_evolve, lindblad_exact, DensityMatrix};
pub use ode::Tolerances;
pub use readout::{apply_readout, compensated_shots, discard_and_renormalize, BitDistribution};
pub use schedule::{schedule_at, AnnealConfig, ConstantDrive, Drive, NoiseModel};
pub use trajectory::{evolve_trajectory, evolve_trajectory_with, Trajectory};

use crate::cost::TargetModel;
use crate::error::{usage, Error, Result};
use crate::exec::{derive_seed, pairwise_sum, Backend};
use crate::graph::UnitDiskGraph;

/// Trajectories per simulation unless overridden.
pub const DEFAULT_TRAJECTORIES: usize = 100;

/// How a distribution was produced.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub gamma: f64,
    pub t_f: f64,
    pub n_traj: usize,
    pub seed: u64,
    pub full_hilbert: bool,
    /// `(eps, eps_prime)` if the readout channel was applied.
    pub readout: Option<(f64, f64)>,
    /// Probability removed as non-independent after readout.
    pub discarded_mass: f64,
}

/// Probabilities over packed computational-basis states and their target
/// energies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotDistribution {
    pub n: usize,
    #[serde(with = "hex_states")]
    pub states: Vec<u64>,
    pub probs: Vec<f64>,
    pub energies: Vec<f64>,
    pub provenance: Provenance,
}

/// Sum-to-one tolerance of [`ShotDistribution`].
pub const PROB_TOL: f64 = 1e-9;

impl ShotDistribution {
    pub fn new(
        n: usize,
        states: Vec<u64>,
        probs: Vec<f64>,
        energies: Vec<f64>,
        provenance: Provenance,
    ) -> Result<Self> {
        let d = ShotDistribution {
            n,
            states,
            probs,
            energies,
            provenance,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.states.len() != self.probs.len() || self.states.len() != self.energies.len() {
            return Err(Error::LengthMismatch {
                expected: self.states.len(),
                got: self.probs.len().min(self.energies.len()),
            });
        }
        if self.states.is_empty() {
            return usage("distribution has no support");
        }
        if self.probs.iter().any(|&p| !(p >= -1e-15)) {
            return usage("negative probability");
        }
        let total: f64 = self.probs.iter().sum();
        if (total - 1.0).abs() > PROB_TOL {
            return usage(format!("probabilities sum to {total}"));
        }
        if self.energies.iter().any(|e| !e.is_finite()) {
            return usage("non-finite energy");
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// `sum_i p_i E_i`.
    pub fn mean_energy(&self) -> f64 {
        self.probs
            .iter()
            .zip(&self.energies)
            .map(|(p, e)| p * e)
            .sum()
    }

    pub fn min_energy(&self) -> f64 {
        self.energies.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Packed states serialised as hex strings.
pub mod hex_states {
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    use crate::graph::packed_hex;

    pub fn serialize<S: Serializer>(states: &[u64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(states.iter().map(|&x| packed_hex(x)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u64>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|h| u64::from_str_radix(h.trim_start_matches("0x"), 16).map_err(D::Error::custom))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub n_traj: usize,
    pub seed: u64,
    pub backend: Backend,
    /// Simulate in the full `2^n` space instead of the IS subspace.
    pub full_hilbert: bool,
    pub tol: Tolerances,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            n_traj: DEFAULT_TRAJECTORIES,
            seed: 0,
            backend: Backend::default(),
            full_hilbert: false,
            tol: Tolerances::default(),
        }
    }
}

/// Build the basis selected by `opts` for `g`.
pub fn basis_for(g: &UnitDiskGraph, c: &AnnealConfig, opts: &SimOptions) -> Result<IsBasis> {
    let model = c.target_model()?;
    if opts.full_hilbert {
        build_full_basis(g, c.v, model)
    } else {
        build_is_basis(g, c.v, model)
    }
}

/// Trajectory-averaged final distribution on a prebuilt basis.
///
/// Noiseless dynamics are deterministic, so `gamma = 0` runs one trajectory
/// whatever `n_traj` says.
pub fn simulate_basis(
    basis: &IsBasis,
    c: &AnnealConfig,
    gamma: f64,
    opts: &SimOptions,
) -> Result<ShotDistribution> {
    c.validate()?;
    if opts.n_traj == 0 {
        return usage("n_traj must be at least 1");
    }
    if !(gamma >= 0.0) {
        return usage(format!("gamma must be non-negative, got {gamma}"));
    }
    let runs = if gamma == 0.0 { 1 } else { opts.n_traj };
    let parts = opts.backend.map(runs, |k| {
        evolve_trajectory_with(basis, c, gamma, derive_seed(opts.seed, k as u64), opts.tol)
            .map(|t| t.probabilities())
    });
    let parts = parts.into_iter().collect::<Result<Vec<_>>>()?;
    let mut probs = pairwise_sum(&parts);
    for p in &mut probs {
        *p /= runs as f64;
    }
    let total: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= total;
    }
    ShotDistribution::new(
        basis.n(),
        basis.states().to_vec(),
        probs,
        basis.target_energies().to_vec(),
        Provenance {
            gamma,
            t_f: c.t_f,
            n_traj: opts.n_traj,
            seed: opts.seed,
            full_hilbert: basis.is_full(),
            readout: None,
            discarded_mass: 0.0,
        },
    )
}

/// Simulate the anneal on `g` and return the trajectory-averaged final
/// distribution, before readout errors.
pub fn simulate(
    g: &UnitDiskGraph,
    c: &AnnealConfig,
    noise: &NoiseModel,
    opts: &SimOptions,
) -> Result<ShotDistribution> {
    noise.validate()?;
    let basis = basis_for(g, c, opts)?;
    simulate_basis(&basis, c, noise.gamma, opts)
}

/// Apply the readout channel of `noise` and discard non-independent outcomes.
pub fn with_readout(
    dist: &ShotDistribution,
    g: &UnitDiskGraph,
    noise: &NoiseModel,
    model: TargetModel,
    seed: u64,
) -> Result<ShotDistribution> {
    let bits = apply_readout(dist, noise.eps, noise.eps_prime, seed)?;
    Ok(discard_and_renormalize(&bits, g, model)?.0)
}
