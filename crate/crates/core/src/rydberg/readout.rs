//! Per-atom readout errors and post-selection on independent sets.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{hex_states, Provenance, ShotDistribution};
use crate::cost::TargetModel;
use crate::error::{usage, Error, Result};
use crate::graph::UnitDiskGraph;

/// Largest atom count for which the channel is applied exactly.
pub const EXACT_READOUT_MAX_N: usize = 16;
/// Samples drawn when the channel is applied by Monte Carlo.
pub const READOUT_SAMPLES: usize = 1 << 20;

/// Probabilities over arbitrary bitstrings, as read out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BitDistribution {
    pub n: usize,
    #[serde(with = "hex_states")]
    pub states: Vec<u64>,
    pub probs: Vec<f64>,
    pub provenance: Provenance,
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return usage(format!("readout probability {p} outside [0, 1]"));
    }
    Ok(())
}

/// Apply the assignment channel `P(1|0) = eps`, `P(0|1) = eps_prime`
/// independently to every atom. Exact up to [`EXACT_READOUT_MAX_N`] atoms,
/// sampled beyond.
pub fn apply_readout(
    dist: &ShotDistribution,
    eps: f64,
    eps_prime: f64,
    seed: u64,
) -> Result<BitDistribution> {
    check_probability(eps)?;
    check_probability(eps_prime)?;
    let mut provenance = dist.provenance.clone();
    provenance.readout = Some((eps, eps_prime));
    let n = dist.n;
    let (states, probs) = if n <= EXACT_READOUT_MAX_N {
        let mut p = vec![0.0; 1 << n];
        for (&s, &q) in dist.states.iter().zip(&dist.probs) {
            p[s as usize] += q;
        }
        for i in 0..n {
            let bit = 1usize << i;
            for a in 0..p.len() {
                if a & bit == 0 {
                    let (p0, p1) = (p[a], p[a | bit]);
                    p[a] = (1.0 - eps) * p0 + eps_prime * p1;
                    p[a | bit] = eps * p0 + (1.0 - eps_prime) * p1;
                }
            }
        }
        p.into_iter()
            .enumerate()
            .filter(|&(_, q)| q > 0.0)
            .map(|(s, q)| (s as u64, q))
            .unzip()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cdf = Vec::with_capacity(dist.len());
        let mut acc = 0.0;
        for &q in &dist.probs {
            acc += q;
            cdf.push(acc);
        }
        let mut counts: HashMap<u64, usize> = HashMap::new();
        for _ in 0..READOUT_SAMPLES {
            let x = rng.gen::<f64>() * acc;
            let k = cdf.partition_point(|&c| c <= x).min(dist.len() - 1);
            let mut s = dist.states[k];
            for i in 0..n {
                let flip = if s >> i & 1 == 1 { eps_prime } else { eps };
                if flip > 0.0 && rng.gen::<f64>() < flip {
                    s ^= 1 << i;
                }
            }
            *counts.entry(s).or_default() += 1;
        }
        let mut out: Vec<(u64, usize)> = counts.into_iter().collect();
        out.sort_unstable();
        out.into_iter()
            .map(|(s, c)| (s, c as f64 / READOUT_SAMPLES as f64))
            .unzip()
    };
    Ok(BitDistribution {
        n,
        states,
        probs,
        provenance,
    })
}

/// Drop non-independent outcomes and renormalise. Returns the distribution
/// over independent sets and the discarded probability mass.
pub fn discard_and_renormalize(
    bits: &BitDistribution,
    g: &UnitDiskGraph,
    model: TargetModel,
) -> Result<(ShotDistribution, f64)> {
    if bits.n != g.n() {
        return Err(Error::LengthMismatch {
            expected: g.n(),
            got: bits.n,
        });
    }
    let nbr: Vec<u64> = (0..g.n())
        .map(|i| g.neighbors(i).iter().fold(0u64, |m, &j| m | 1 << j))
        .collect();
    let independent = |s: u64| {
        let mut rest = s;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            if nbr[i] & s != 0 {
                return false;
            }
            rest &= rest - 1;
        }
        true
    };
    let total: f64 = bits.probs.iter().sum();
    let mut states = Vec::new();
    let mut probs = Vec::new();
    let mut kept = 0.0;
    for (&s, &p) in bits.states.iter().zip(&bits.probs) {
        if independent(s) {
            states.push(s);
            probs.push(p);
            kept += p;
        }
    }
    if kept <= 0.0 {
        return Err(Error::DegenerateDistribution);
    }
    for p in &mut probs {
        *p /= kept;
    }
    let discarded = ((total - kept) / total).max(0.0);
    let energies = states
        .iter()
        .map(|s| model.energy_of_counts(s.count_ones() as usize, 0))
        .collect();
    let mut provenance = bits.provenance.clone();
    provenance.discarded_mass = discarded;
    Ok((
        ShotDistribution::new(bits.n, states, probs, energies, provenance)?,
        discarded,
    ))
}

/// Shots needed so that `n_shots` survive post-selection on average.
pub fn compensated_shots(n_shots: u64, discarded_mass: f64) -> Result<u64> {
    if !(0.0..1.0).contains(&discarded_mass) {
        return usage(format!("discarded mass {discarded_mass} outside [0, 1)"));
    }
    Ok((n_shots as f64 / (1.0 - discarded_mass)).ceil() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(n: usize, states: Vec<u64>, probs: Vec<f64>) -> ShotDistribution {
        let energies = states.iter().map(|s| -(s.count_ones() as f64)).collect();
        ShotDistribution::new(n, states, probs, energies, Provenance::default()).unwrap()
    }

    #[test]
    fn perfect_readout_is_identity() {
        let d = dist(3, vec![0, 1, 4], vec![0.2, 0.3, 0.5]);
        let r = apply_readout(&d, 0.0, 0.0, 0).unwrap();
        assert_eq!(r.states, d.states);
        assert_eq!(r.probs, d.probs);
    }

    #[test]
    fn single_atom_false_positive() {
        let d = dist(1, vec![0], vec![1.0]);
        let r = apply_readout(&d, 0.03, 0.03, 0).unwrap();
        assert_eq!(r.states, vec![0, 1]);
        assert!((r.probs[0] - 0.97).abs() < 1e-15 && (r.probs[1] - 0.03).abs() < 1e-15);
    }

    #[test]
    fn readout_conserves_probability() {
        let d = dist(5, vec![0, 3, 8, 17], vec![0.1, 0.2, 0.3, 0.4]);
        let r = apply_readout(&d, 0.07, 0.11, 0).unwrap();
        assert!((r.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(r.states.len(), 32);
    }

    #[test]
    fn sampled_channel_matches_exact_channel() {
        // n = 17 goes through sampling; compare a marginal with the exact value.
        let d = dist(17, vec![0, 1 << 16], vec![0.6, 0.4]);
        let r = apply_readout(&d, 0.05, 0.1, 3).unwrap();
        assert!((r.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let top: f64 = r
            .states
            .iter()
            .zip(&r.probs)
            .filter(|(s, _)| *s >> 16 & 1 == 1)
            .map(|(_, p)| p)
            .sum();
        let want = 0.6 * 0.05 + 0.4 * 0.9;
        let sd = (want * (1.0 - want) / READOUT_SAMPLES as f64).sqrt();
        assert!((top - want).abs() < 4.0 * sd, "{top} vs {want}");
    }

    #[test]
    fn discard_on_single_edge() {
        let g = UnitDiskGraph::from_points(vec![[0.0, 0.0], [0.5, 0.0]]);
        let bits = BitDistribution {
            n: 2,
            states: vec![0, 1, 2, 3],
            probs: vec![0.3, 0.3, 0.3, 0.1],
            provenance: Provenance::default(),
        };
        let (d, mass) = discard_and_renormalize(&bits, &g, TargetModel::default()).unwrap();
        assert!((mass - 0.1).abs() < 1e-15);
        assert_eq!(d.states, vec![0, 1, 2]);
        assert!(d.probs.iter().all(|p| (p - 1.0 / 3.0).abs() < 1e-15));
        assert_eq!(d.provenance.discarded_mass, mass);

        let all_bad = BitDistribution {
            n: 2,
            states: vec![3],
            probs: vec![1.0],
            provenance: Provenance::default(),
        };
        assert!(matches!(
            discard_and_renormalize(&all_bad, &g, TargetModel::default()),
            Err(Error::DegenerateDistribution)
        ));
    }

    #[test]
    fn shot_compensation() {
        assert_eq!(compensated_shots(10, 0.0).unwrap(), 10);
        assert_eq!(compensated_shots(10, 0.2).unwrap(), 13);
        assert!(compensated_shots(10, 1.0).is_err());
    }
}
