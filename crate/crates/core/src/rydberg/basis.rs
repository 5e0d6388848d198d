use num_complex::Complex64 as C;

use crate::cost::TargetModel;
use crate::error::{usage, Error, Result};
use crate::graph::UnitDiskGraph;

/// Guard on the number of basis states.
pub const MAX_BASIS_STATES: usize = 1 << 26;
/// Largest atom count for the unrestricted 2^n basis.
pub const FULL_HILBERT_MAX_N: usize = 12;
/// Packed states are `u64`.
pub const MAX_ATOMS: usize = 64;

/// Computational basis of the simulation with per-state diagonal data.
///
/// States are packed bitstrings in ascending order, so the all-zeros state
/// has index 0. `flip_*` is a CSR list of states reachable by one bit flip.
#[derive(Debug, Clone)]
pub struct IsBasis {
    n: usize,
    states: Vec<u64>,
    occupation: Vec<u32>,
    interaction: Vec<f64>,
    target: Vec<f64>,
    flip_ptr: Vec<usize>,
    flip_idx: Vec<u32>,
    full: bool,
    max_occ: f64,
    max_int: f64,
}

fn neighbor_masks(g: &UnitDiskGraph) -> Vec<u64> {
    (0..g.n())
        .map(|i| g.neighbors(i).iter().fold(0u64, |m, &j| m | 1 << j))
        .collect()
}

/// `v / r^6` for every vertex pair, row-major.
fn couplings(g: &UnitDiskGraph, v: f64) -> Vec<f64> {
    let n = g.n();
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let r2 = {
                let (a, b) = (g.points()[i], g.points()[j]);
                (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
            };
            let x = v / (r2 * r2 * r2);
            c[i * n + j] = x;
            c[j * n + i] = x;
        }
    }
    c
}

fn enumerate_independent_sets(nbr: &[u64]) -> Result<Vec<u64>> {
    // Depth-first over vertices; stack holds (next vertex, current set).
    let n = nbr.len();
    let mut out = Vec::new();
    let mut stack = vec![(0usize, 0u64)];
    while let Some((i, s)) = stack.pop() {
        if i == n {
            if out.len() == MAX_BASIS_STATES {
                return Err(Error::BasisTooLarge {
                    limit: MAX_BASIS_STATES,
                });
            }
            out.push(s);
            continue;
        }
        stack.push((i + 1, s));
        if nbr[i] & s == 0 {
            stack.push((i + 1, s | 1 << i));
        }
    }
    out.sort_unstable();
    Ok(out)
}

impl IsBasis {
    fn assemble(
        g: &UnitDiskGraph,
        states: Vec<u64>,
        v: f64,
        model: TargetModel,
        full: bool,
    ) -> Self {
        let n = g.n();
        let nbr = neighbor_masks(g);
        let cpl = couplings(g, v);
        let dim = states.len();
        let mut occupation = Vec::with_capacity(dim);
        let mut interaction = Vec::with_capacity(dim);
        let mut target = Vec::with_capacity(dim);
        let mut flip_ptr = Vec::with_capacity(dim + 1);
        let mut flip_idx = Vec::new();
        flip_ptr.push(0);
        for &s in &states {
            let mut e = 0.0;
            let mut conflicts = 0;
            let mut rest = s;
            while rest != 0 {
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                conflicts += (nbr[i] & rest).count_ones() as usize;
                let mut others = rest;
                while others != 0 {
                    let j = others.trailing_zeros() as usize;
                    others &= others - 1;
                    e += cpl[i * n + j];
                }
            }
            occupation.push(s.count_ones());
            interaction.push(e);
            target.push(model.energy_of_counts(s.count_ones() as usize, conflicts));
            for i in 0..n {
                let b = s ^ 1 << i;
                let idx = if full {
                    Some(b as usize)
                } else if s >> i & 1 == 1 || nbr[i] & s == 0 {
                    states.binary_search(&b).ok()
                } else {
                    None
                };
                if let Some(idx) = idx {
                    flip_idx.push(idx as u32);
                }
            }
            flip_ptr.push(flip_idx.len());
        }
        let max_occ = occupation.iter().copied().max().unwrap_or(0) as f64;
        let max_int = interaction.iter().copied().fold(0.0, f64::max);
        IsBasis {
            max_occ,
            max_int,
            n,
            states,
            occupation,
            interaction,
            target,
            flip_ptr,
            flip_idx,
            full,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn is_full(&self) -> bool {
        self.full
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn index_of(&self, state: u64) -> Option<usize> {
        if self.full {
            ((state as usize) < self.dim()).then_some(state as usize)
        } else {
            self.states.binary_search(&state).ok()
        }
    }

    /// Number of excited atoms per state.
    pub fn occupation(&self) -> &[u32] {
        &self.occupation
    }

    /// Van der Waals energy per state.
    pub fn interaction(&self) -> &[f64] {
        &self.interaction
    }

    /// Target energy `-f + u*h` per state.
    pub fn target_energies(&self) -> &[f64] {
        &self.target
    }

    /// Indices of states one flip away from state `a`.
    pub fn flips(&self, a: usize) -> &[u32] {
        &self.flip_idx[self.flip_ptr[a]..self.flip_ptr[a + 1]]
    }

    /// Resource-Hamiltonian diagonal of state `a` at detuning `delta`.
    pub fn diagonal(&self, a: usize, delta: f64) -> f64 {
        -delta * self.occupation[a] as f64 + self.interaction[a]
    }

    /// Rough midpoint of the diagonal range at `delta`. Subtracting it only
    /// changes a global phase but keeps the integrator's phases small.
    pub(crate) fn diagonal_center(&self, delta: f64) -> f64 {
        0.5 * (-delta * self.max_occ + if delta < 0.0 { self.max_int } else { 0.0 })
    }

    /// `out = -i (H - shift) psi - (half_gamma * occupation) psi`.
    pub(crate) fn rhs(
        &self,
        omega: f64,
        delta: f64,
        shift: f64,
        half_gamma: f64,
        psi: &[C],
        out: &mut [C],
    ) {
        let half_omega = 0.5 * omega;
        for a in 0..psi.len() {
            let occ = self.occupation[a] as f64;
            let d = -delta * occ + self.interaction[a] - shift;
            let mut off = C::new(0.0, 0.0);
            for &b in self.flips(a) {
                off += psi[b as usize];
            }
            let h = psi[a] * d + off * half_omega;
            out[a] = C::new(h.im, -h.re) - psi[a] * (half_gamma * occ);
        }
    }

    /// Excitation probability of each atom, unnormalised.
    pub fn site_occupations(&self, psi: &[C]) -> Vec<f64> {
        let mut occ = vec![0.0; self.n];
        for (a, &s) in self.states.iter().enumerate() {
            let p = psi[a].norm_sqr();
            let mut rest = s;
            while rest != 0 {
                occ[rest.trailing_zeros() as usize] += p;
                rest &= rest - 1;
            }
        }
        occ
    }

    /// Dense resource Hamiltonian, row-major.
    pub fn dense_hamiltonian(&self, omega: f64, delta: f64) -> Vec<f64> {
        let d = self.dim();
        let mut h = vec![0.0; d * d];
        for a in 0..d {
            h[a * d + a] = self.diagonal(a, delta);
            for &b in self.flips(a) {
                h[a * d + b as usize] += 0.5 * omega;
            }
        }
        h
    }
}

/// Basis of all independent sets of `g`.
pub fn build_is_basis(g: &UnitDiskGraph, v: f64, model: TargetModel) -> Result<IsBasis> {
    if g.n() > MAX_ATOMS {
        return usage(format!("packed states support at most {MAX_ATOMS} atoms"));
    }
    let states = enumerate_independent_sets(&neighbor_masks(g))?;
    Ok(IsBasis::assemble(g, states, v, model, false))
}

/// The unrestricted 2^n basis, for `n <= FULL_HILBERT_MAX_N`.
pub fn build_full_basis(g: &UnitDiskGraph, v: f64, model: TargetModel) -> Result<IsBasis> {
    if g.n() > FULL_HILBERT_MAX_N {
        return Err(Error::BasisTooLarge {
            limit: 1 << FULL_HILBERT_MAX_N,
        });
    }
    let states = (0..1u64 << g.n()).collect();
    Ok(IsBasis::assemble(g, states, v, model, true))
}

/// `H(omega, delta) psi` in the given basis.
pub fn hamiltonian_apply(basis: &IsBasis, omega: f64, delta: f64, psi: &[C]) -> Result<Vec<C>> {
    if psi.len() != basis.dim() {
        return Err(Error::LengthMismatch {
            expected: basis.dim(),
            got: psi.len(),
        });
    }
    let mut out = vec![C::new(0.0, 0.0); psi.len()];
    basis.rhs(omega, delta, 0.0, 0.0, psi, &mut out);
    // rhs returns -i H psi.
    for o in &mut out {
        *o = C::new(-o.im, o.re);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::is_independent;
    use crate::graph::Bitstring;
    use crate::rydberg::schedule::{OMEGA0, V_UNIT};

    fn triangle() -> UnitDiskGraph {
        UnitDiskGraph::from_points(vec![[0.0, 0.0], [0.5, 0.0], [0.25, 0.4]])
    }

    fn basis(g: &UnitDiskGraph) -> IsBasis {
        build_is_basis(g, V_UNIT, TargetModel::default()).unwrap()
    }

    #[test]
    fn small_bases() {
        assert_eq!(basis(&triangle()).states(), &[0, 1, 2, 4]);
        let edge = UnitDiskGraph::from_points(vec![[0.0, 0.0], [0.5, 0.0]]);
        assert_eq!(basis(&edge).dim(), 3);
        let full = build_full_basis(&edge, V_UNIT, TargetModel::default()).unwrap();
        assert_eq!(full.dim(), 4);
        assert_eq!(full.target_energies()[3], -2.0 + 1.35);
    }

    #[test]
    fn basis_invariants() {
        let g = UnitDiskGraph::generate(12, 2.0, 0.3, 5).unwrap();
        let b = basis(&g);
        assert_eq!(b.states()[0], 0);
        for (a, &s) in b.states().iter().enumerate() {
            assert!(is_independent(&g, &Bitstring::from_packed(12, s)).unwrap());
            assert_eq!(b.target_energies()[a], -(s.count_ones() as f64));
            for &c in b.flips(a) {
                assert_eq!((b.states()[c as usize] ^ s).count_ones(), 1);
                assert!(b.flips(c as usize).contains(&(a as u32)));
            }
        }
    }

    #[test]
    fn full_basis_is_guarded() {
        let g = UnitDiskGraph::generate(13, 2.0, 0.3, 1).unwrap();
        assert!(build_full_basis(&g, V_UNIT, TargetModel::default()).is_err());
    }

    #[test]
    fn single_atom_rabi_term() {
        let g = UnitDiskGraph::from_points(vec![[0.0, 0.0]]);
        let b = basis(&g);
        let out =
            hamiltonian_apply(&b, OMEGA0, 0.0, &[C::new(1.0, 0.0), C::new(0.0, 0.0)]).unwrap();
        assert!(out[0].norm() < 1e-15);
        assert!((out[1] - C::new(OMEGA0 / 2.0, 0.0)).norm() < 1e-12);
        assert!(hamiltonian_apply(&b, 1.0, 0.0, &[C::new(1.0, 0.0)]).is_err());
    }

    #[test]
    fn diagonal_when_rabi_is_off() {
        let g = UnitDiskGraph::generate(6, 2.0, 0.3, 2).unwrap();
        let b = basis(&g);
        for a in 0..b.dim() {
            let mut e = vec![C::new(0.0, 0.0); b.dim()];
            e[a] = C::new(1.0, 0.0);
            let out = hamiltonian_apply(&b, 0.0, 3.0, &e).unwrap();
            for (k, o) in out.iter().enumerate() {
                let want = if k == a { b.diagonal(a, 3.0) } else { 0.0 };
                assert!((o - C::new(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn dense_hamiltonian_is_symmetric() {
        let g = UnitDiskGraph::generate(9, 2.0, 0.3, 4).unwrap();
        let b = basis(&g);
        let d = b.dim();
        let h = b.dense_hamiltonian(OMEGA0, -2.0);
        for i in 0..d {
            for j in 0..d {
                assert_eq!(h[i * d + j], h[j * d + i]);
            }
        }
    }
}
