//! Exact maximum independent set: a bitset branch-and-bound solver and an
//! exhaustive enumeration oracle.
//!
//! The solver works on the candidate set `P` of still-undecided vertices.
//! Each node first applies the standard safe reductions (isolated and pendant
//! vertices are taken, dominated vertices are dropped), splits `P` into
//! connected components, bounds every component by a greedy clique cover,
//! and finally branches on a maximum-degree vertex.

use std::time::Instant;

use crate::error::{usage, Error, Result};
use crate::graph::{Bitstring, UnitDiskGraph};

/// Largest graph [`brute_force`] accepts.
pub const BRUTE_FORCE_MAX_N: usize = 24;

/// True iff no edge of `g` has both endpoints set in `s`.
pub fn is_independent(g: &UnitDiskGraph, s: &Bitstring) -> Result<bool> {
    if s.len() != g.n() {
        return Err(Error::LengthMismatch {
            expected: g.n(),
            got: s.len(),
        });
    }
    Ok(g.edges().all(|(i, j)| !(s.get(i) && s.get(j))))
}

/// Exhaustive enumeration over all `2^n` bitstrings. Ties go to the
/// numerically smallest packed bitstring.
pub fn brute_force(g: &UnitDiskGraph) -> Result<(usize, Bitstring)> {
    let n = g.n();
    if n > BRUTE_FORCE_MAX_N {
        return usage(format!(
            "brute force is limited to n <= {BRUTE_FORCE_MAX_N}, got {n}"
        ));
    }
    let masks: Vec<u32> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0u32, |m, &w| m | 1 << w))
        .collect();
    let (mut best, mut best_mask) = (0u32, 0u32);
    for mask in 0u32..(1u32 << n) {
        let weight = mask.count_ones();
        if weight <= best {
            continue;
        }
        let mut rest = mask;
        let mut ok = true;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if masks[v] & mask != 0 {
                ok = false;
                break;
            }
        }
        if ok {
            best = weight;
            best_mask = mask;
        }
    }
    Ok((best as usize, Bitstring::from_packed(n, best_mask as u64)))
}

/// Maximum independent set of `g` by branch and bound.
pub fn solve_exact(g: &UnitDiskGraph) -> (usize, Bitstring) {
    solve_exact_with_deadline(g, None).expect("no deadline was set")
}

/// As [`solve_exact`], giving up with [`Error::Timeout`] past `deadline`.
pub fn solve_exact_with_deadline(
    g: &UnitDiskGraph,
    deadline: Option<Instant>,
) -> Result<(usize, Bitstring)> {
    let set = max_independent_set(g.adjacency(), deadline)?;
    Ok((set.len(), Bitstring::from_indices(g.n(), set)))
}

/// Exact MIS on an adjacency-list graph; returned vertices are ascending.
pub(crate) fn max_independent_set(
    adjacency: &[Vec<usize>],
    deadline: Option<Instant>,
) -> Result<Vec<usize>> {
    let mut solver = Solver::new(adjacency, deadline);
    let mut all = vec![0u64; solver.words];
    for v in 0..adjacency.len() {
        set_bit(&mut all, v);
    }
    let greedy = solver.greedy(&all);
    let found = solver.solve(&all, greedy.len() as isize);
    if solver.timed_out {
        return Err(Error::Timeout);
    }
    let mut set = found.unwrap_or(greedy);
    set.sort_unstable();
    Ok(set)
}

#[inline]
fn set_bit(s: &mut [u64], v: usize) {
    s[v >> 6] |= 1 << (v & 63);
}

#[inline]
fn clear_bit(s: &mut [u64], v: usize) {
    s[v >> 6] &= !(1 << (v & 63));
}

#[inline]
fn has_bit(s: &[u64], v: usize) -> bool {
    s[v >> 6] >> (v & 63) & 1 == 1
}

fn count(s: &[u64]) -> usize {
    s.iter().map(|w| w.count_ones() as usize).sum()
}

fn is_empty(s: &[u64]) -> bool {
    s.iter().all(|&w| w == 0)
}

fn bits(s: &[u64]) -> impl Iterator<Item = usize> + '_ {
    s.iter().enumerate().flat_map(|(k, &w)| {
        let mut rest = w;
        std::iter::from_fn(move || {
            (rest != 0).then(|| {
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                k * 64 + b
            })
        })
    })
}

struct Solver {
    words: usize,
    /// Row `v` holds the open neighbourhood of `v`.
    adj: Vec<u64>,
    deadline: Option<Instant>,
    nodes: u64,
    timed_out: bool,
}

impl Solver {
    fn new(adjacency: &[Vec<usize>], deadline: Option<Instant>) -> Self {
        let n = adjacency.len();
        let words = n.div_ceil(64).max(1);
        let mut adj = vec![0u64; n * words];
        for (v, ns) in adjacency.iter().enumerate() {
            for &w in ns {
                set_bit(&mut adj[v * words..(v + 1) * words], w);
            }
        }
        Solver {
            words,
            adj,
            deadline,
            nodes: 0,
            timed_out: false,
        }
    }

    #[inline]
    fn row(&self, v: usize) -> &[u64] {
        &self.adj[v * self.words..(v + 1) * self.words]
    }

    fn degree_in(&self, v: usize, p: &[u64]) -> usize {
        self.row(v)
            .iter()
            .zip(p)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// Remove the closed neighbourhood of `v` from `p`.
    fn remove_closed(&self, p: &mut [u64], v: usize) {
        for (x, a) in p.iter_mut().zip(self.row(v)) {
            *x &= !a;
        }
        clear_bit(p, v);
    }

    /// N_p[v] ⊆ N_p[u] for adjacent u, v.
    fn dominated_by(&self, v: usize, u: usize, p: &[u64]) -> bool {
        let (rv, ru) = (self.row(v), self.row(u));
        for k in 0..self.words {
            let mut nv = rv[k] & p[k];
            let mut nu = ru[k] & p[k];
            if k == v >> 6 {
                nv |= 1 << (v & 63);
            }
            if k == u >> 6 {
                nu |= 1 << (u & 63);
            }
            if nv & !nu != 0 {
                return false;
            }
        }
        true
    }

    /// Min-degree greedy independent set of G[p].
    fn greedy(&self, p: &[u64]) -> Vec<usize> {
        let mut p = p.to_vec();
        let mut out = Vec::new();
        while !is_empty(&p) {
            let v = bits(&p)
                .min_by_key(|&v| self.degree_in(v, &p))
                .expect("nonempty");
            out.push(v);
            self.remove_closed(&mut p, v);
        }
        out
    }

    /// Number of cliques in a greedy clique partition of G[p].
    fn clique_cover(&self, p: &[u64]) -> usize {
        // Each class keeps the common neighbourhood of its members; a vertex
        // joins the first class that it is adjacent to entirely.
        let mut commons: Vec<Vec<u64>> = Vec::new();
        for v in bits(p) {
            match commons.iter_mut().find(|c| has_bit(c, v)) {
                Some(c) => {
                    for (x, a) in c.iter_mut().zip(self.row(v)) {
                        *x &= a;
                    }
                }
                None => commons.push(self.row(v).to_vec()),
            }
        }
        commons.len()
    }

    /// Connected components of G[p].
    fn components(&self, p: &[u64]) -> Vec<Vec<u64>> {
        let mut left = p.to_vec();
        let mut out = Vec::new();
        loop {
            let Some(s) = bits(&left).next() else { break };
            let mut comp = vec![0u64; self.words];
            let mut frontier = vec![0u64; self.words];
            set_bit(&mut comp, s);
            set_bit(&mut frontier, s);
            while !is_empty(&frontier) {
                let mut next = vec![0u64; self.words];
                for v in bits(&frontier) {
                    for (x, a) in next.iter_mut().zip(self.row(v)) {
                        *x |= a;
                    }
                }
                for k in 0..self.words {
                    next[k] &= left[k] & !comp[k];
                    comp[k] |= next[k];
                }
                frontier = next;
            }
            for (x, c) in left.iter_mut().zip(&comp) {
                *x &= !c;
            }
            out.push(comp);
        }
        out
    }

    fn check_deadline(&mut self) -> bool {
        self.nodes += 1;
        if self.timed_out {
            return true;
        }
        if self.nodes.is_multiple_of(1024) {
            if let Some(d) = self.deadline {
                if Instant::now() > d {
                    self.timed_out = true;
                }
            }
        }
        self.timed_out
    }

    /// Maximum independent set of G[p] if its size exceeds `target`.
    fn solve(&mut self, p: &[u64], target: isize) -> Option<Vec<usize>> {
        if self.check_deadline() {
            return None;
        }
        let mut p = p.to_vec();
        let mut forced = Vec::new();
        self.reduce(&mut p, &mut forced);
        let target = target - forced.len() as isize;

        let found = if is_empty(&p) {
            (0 > target).then(Vec::new)
        } else {
            let comps = self.components(&p);
            if comps.len() > 1 {
                self.solve_components(comps, target)
            } else {
                self.branch(&p, target)
            }
        };
        found.map(|mut s| {
            s.extend(forced);
            s
        })
    }

    fn reduce(&self, p: &mut [u64], forced: &mut Vec<usize>) {
        loop {
            let mut changed = false;
            let snapshot = p.to_vec();
            for v in bits(&snapshot) {
                if !has_bit(p, v) {
                    continue;
                }
                if self.degree_in(v, p) <= 1 {
                    forced.push(v);
                    self.remove_closed(p, v);
                    changed = true;
                }
            }
            if changed {
                continue;
            }
            let snapshot = p.to_vec();
            for v in bits(&snapshot) {
                if !has_bit(p, v) {
                    continue;
                }
                let ns: Vec<usize> = bits(self.row(v)).filter(|&u| has_bit(p, u)).collect();
                for u in ns {
                    if has_bit(p, u) && self.dominated_by(v, u, p) {
                        clear_bit(p, u);
                        changed = true;
                    }
                }
            }
            if !changed {
                return;
            }
        }
    }

    fn solve_components(&mut self, mut comps: Vec<Vec<u64>>, target: isize) -> Option<Vec<usize>> {
        comps.sort_by_key(|c| count(c));
        let ubs: Vec<isize> = comps
            .iter()
            .map(|c| self.clique_cover(c) as isize)
            .collect();
        let mut remaining: isize = ubs.iter().sum();
        if remaining <= target {
            return None;
        }
        let mut acc = Vec::new();
        for (c, ub) in comps.iter().zip(&ubs) {
            remaining -= ub;
            let need = target - acc.len() as isize - remaining;
            let greedy = self.greedy(c);
            let floor = greedy.len() as isize;
            match self.solve(c, need.max(floor)) {
                Some(s) => acc.extend(s),
                None if self.timed_out => return None,
                None if floor > need => acc.extend(greedy),
                None => return None,
            }
        }
        (acc.len() as isize > target).then_some(acc)
    }

    fn branch(&mut self, p: &[u64], mut target: isize) -> Option<Vec<usize>> {
        if self.clique_cover(p) as isize <= target {
            return None;
        }
        let v = bits(p)
            .max_by_key(|&v| (self.degree_in(v, p), std::cmp::Reverse(v)))
            .expect("nonempty");
        let mut best = None;

        let mut with = p.to_vec();
        self.remove_closed(&mut with, v);
        if let Some(mut s) = self.solve(&with, target - 1) {
            s.push(v);
            target = s.len() as isize;
            best = Some(s);
        }
        if self.timed_out {
            return None;
        }

        let mut without = p.to_vec();
        clear_bit(&mut without, v);
        if let Some(s) = self.solve(&without, target) {
            best = Some(s);
        }
        best
    }
}
