//! Randomized locality-based UD-MIS heuristic.
//!
//! Repeatedly pick a random remaining vertex `u`, solve MIS exactly on the
//! ball of hop radius `d` around it (within the remaining graph), keep that
//! local solution, and delete both the ball and every remaining vertex that
//! the local solution forces to zero. Each vertex is handled exactly once.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::max_independent_set;
use crate::graph::{Bitstring, UnitDiskGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeuristicConfig {
    /// Hop radius of the exactly solved patches.
    pub d: usize,
    pub seed: u64,
}

/// Step-by-step record of one run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HeuristicTrace {
    pub seeds_chosen: Vec<usize>,
    /// Vertices of each solved ball, ascending.
    pub spheres: Vec<Vec<usize>>,
    /// Vertices removed as border after each step, ascending.
    pub borders: Vec<Vec<usize>>,
    /// Seconds spent in the exact solver per step.
    pub solve_secs: Vec<f64>,
}

impl HeuristicTrace {
    pub fn subinstance_sizes(&self) -> Vec<usize> {
        self.spheres.iter().map(Vec::len).collect()
    }

    pub fn border_removed(&self) -> Vec<usize> {
        self.borders.iter().map(Vec::len).collect()
    }

    pub fn total_solve_secs(&self) -> f64 {
        self.solve_secs.iter().sum()
    }
}

/// Run the heuristic once.
pub fn run(g: &UnitDiskGraph, cfg: HeuristicConfig) -> (Bitstring, HeuristicTrace) {
    let n = g.n();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut active = vec![true; n];
    let mut pool: Vec<usize> = (0..n).collect();
    let mut pos: Vec<usize> = (0..n).collect();
    let mut dist = vec![usize::MAX; n];
    let mut local = vec![usize::MAX; n];
    let mut solution = Bitstring::zeros(n);
    let mut trace = HeuristicTrace::default();

    let mut remove = |v: usize, active: &mut [bool], pool: &mut Vec<usize>| {
        active[v] = false;
        let at = pos[v];
        let last = *pool.last().expect("vertex is pooled");
        pool.swap_remove(at);
        if last != v {
            pos[last] = at;
        }
    };

    while !pool.is_empty() {
        let u = pool[rng.gen_range(0..pool.len())];
        let mut sphere = Vec::new();
        g.bfs_into(u, cfg.d, &active, &mut dist, &mut sphere);
        sphere.sort_unstable();

        for (k, &v) in sphere.iter().enumerate() {
            local[v] = k;
        }
        let sub_adj: Vec<Vec<usize>> = sphere
            .iter()
            .map(|&v| {
                g.neighbors(v)
                    .iter()
                    .map(|&w| local[w])
                    .filter(|&i| i != usize::MAX)
                    .collect()
            })
            .collect();
        let started = Instant::now();
        let mis = max_independent_set(&sub_adj, None).expect("no deadline was set");
        trace.solve_secs.push(started.elapsed().as_secs_f64());

        let mut border = Vec::new();
        for &k in &mis {
            let v = sphere[k];
            solution.set(v, true);
            for &w in g.neighbors(v) {
                if active[w] && local[w] == usize::MAX {
                    // Mark so the vertex is not collected twice.
                    active[w] = false;
                    border.push(w);
                }
            }
        }
        for &w in &border {
            active[w] = true;
        }
        border.sort_unstable();
        for &v in &sphere {
            local[v] = usize::MAX;
            remove(v, &mut active, &mut pool);
        }
        for &w in &border {
            remove(w, &mut active, &mut pool);
        }
        trace.seeds_chosen.push(u);
        trace.spheres.push(sphere);
        trace.borders.push(border);
    }
    (solution, trace)
}

/// Vertices of `active` outside `sphere` that are adjacent to a vertex
/// selected by `local_mis` (indexed like `sphere`). Ascending.
pub fn constrained_border(
    g: &UnitDiskGraph,
    active: &[bool],
    sphere: &[usize],
    local_mis: &Bitstring,
) -> Result<Vec<usize>> {
    if local_mis.len() != sphere.len() {
        return Err(Error::LengthMismatch {
            expected: sphere.len(),
            got: local_mis.len(),
        });
    }
    if active.len() != g.n() {
        return Err(Error::LengthMismatch {
            expected: g.n(),
            got: active.len(),
        });
    }
    let mut inside = vec![false; g.n()];
    for &v in sphere {
        inside[v] = true;
    }
    let mut hit = vec![false; g.n()];
    for k in local_mis.ones() {
        for &w in g.neighbors(sphere[k]) {
            if active[w] && !inside[w] {
                hit[w] = true;
            }
        }
    }
    Ok((0..g.n()).filter(|&v| hit[v]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{is_independent, solve_exact};
    use proptest::prelude::*;

    fn triangle() -> UnitDiskGraph {
        UnitDiskGraph::from_points(vec![[0.0, 0.0], [0.5, 0.0], [0.25, 0.4]])
    }

    fn star() -> UnitDiskGraph {
        UnitDiskGraph::from_points(vec![
            [0.0, 0.0],
            [0.9, 0.0],
            [-0.9, 0.0],
            [0.0, 0.9],
            [0.0, -0.9],
        ])
    }

    fn check_partition(g: &UnitDiskGraph, trace: &HeuristicTrace) {
        let mut seen = vec![0usize; g.n()];
        for v in trace.spheres.iter().chain(&trace.borders).flatten() {
            seen[*v] += 1;
        }
        assert!(seen.iter().all(|&c| c == 1), "partition violated: {seen:?}");
    }

    #[test]
    fn triangle_with_zero_radius() {
        let g = triangle();
        let (s, trace) = run(&g, HeuristicConfig { d: 0, seed: 3 });
        assert_eq!(s.hamming_weight(), 1);
        assert_eq!(trace.spheres.len(), 1);
        assert_eq!(trace.border_removed(), vec![2]);
        check_partition(&g, &trace);
    }

    #[test]
    fn large_radius_is_exact() {
        for seed in 0..20 {
            let g = UnitDiskGraph::generate(40, 2.0, 0.3, seed).unwrap();
            let d = g.max_component_diameter();
            let (s, trace) = run(&g, HeuristicConfig { d, seed });
            assert_eq!(s.hamming_weight(), solve_exact(&g).0);
            check_partition(&g, &trace);
        }
    }

    #[test]
    fn zero_radius_gives_maximal_set() {
        let g = UnitDiskGraph::generate(150, 2.0, 0.3, 8).unwrap();
        let (s, _) = run(&g, HeuristicConfig { d: 0, seed: 1 });
        for v in 0..g.n() {
            if !s.get(v) {
                assert!(
                    g.neighbors(v).iter().any(|&w| s.get(w)),
                    "{v} could be added"
                );
            }
        }
    }

    #[test]
    fn border_cases() {
        let g = star();
        let active = vec![true; 5];
        let empty = Bitstring::zeros(1);
        assert!(constrained_border(&g, &active, &[0], &empty)
            .unwrap()
            .is_empty());
        let center = Bitstring::from_indices(1, [0]);
        assert_eq!(
            constrained_border(&g, &active, &[0], &center).unwrap(),
            vec![1, 2, 3, 4]
        );
        assert!(constrained_border(&g, &active, &[0, 1], &center).is_err());
    }

    #[test]
    fn trace_borders_match_constrained_border() {
        let g = UnitDiskGraph::generate(120, 2.0, 0.3, 21).unwrap();
        let (solution, trace) = run(&g, HeuristicConfig { d: 2, seed: 4 });
        let mut active = vec![true; g.n()];
        for (sphere, border) in trace.spheres.iter().zip(&trace.borders) {
            let local = Bitstring::from_bits(sphere.iter().map(|&v| solution.get(v)).collect());
            assert_eq!(
                &constrained_border(&g, &active, sphere, &local).unwrap(),
                border
            );
            for v in sphere.iter().chain(border) {
                active[*v] = false;
            }
        }
    }

    #[test]
    fn runs_are_deterministic_per_seed() {
        let g = UnitDiskGraph::generate(100, 2.0, 0.3, 2).unwrap();
        let cfg = HeuristicConfig { d: 3, seed: 99 };
        assert_eq!(run(&g, cfg).0, run(&g, cfg).0);
        assert_eq!(run(&g, cfg).1.seeds_chosen, run(&g, cfg).1.seeds_chosen);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn output_is_independent_and_partitions(
            n in 1usize..120,
            gseed in any::<u64>(),
            seed in any::<u64>(),
            d in 0usize..6,
        ) {
            let g = UnitDiskGraph::generate(n, 2.0, 0.3, gseed).unwrap();
            let (s, trace) = run(&g, HeuristicConfig { d, seed });
            prop_assert!(is_independent(&g, &s).unwrap());
            check_partition(&g, &trace);
        }
    }
}
