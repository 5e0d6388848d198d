//! Direct integration of the dephasing master equation on small bases.
//!
//! With `L_i = n_i` the dissipator acts elementwise:
//! `D[rho]_ab = -(gamma/2) * popcount(a XOR b) * rho_ab`.

use num_complex::Complex64 as C;

use super::basis::IsBasis;
use super::ode::{Control, Dopri5, Tolerances};
use super::schedule::Drive;
use super::trajectory::segments;
use crate::error::{usage, Error, Result};

/// Largest basis accepted by the density-matrix integrator.
pub const LINDBLAD_MAX_DIM: usize = 64;

/// Integrator tolerances for the density matrix.
pub const LINDBLAD_TOL: Tolerances = Tolerances {
    rtol: 1e-9,
    atol: 1e-12,
};

/// Row-major density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    data: Vec<C>,
}

impl DensityMatrix {
    pub fn pure(psi: &[C]) -> Self {
        let dim = psi.len();
        let mut data = Vec::with_capacity(dim * dim);
        for a in psi {
            for b in psi {
                data.push(a * b.conj());
            }
        }
        DensityMatrix { dim, data }
    }

    pub fn from_rows(dim: usize, data: Vec<C>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::LengthMismatch {
                expected: dim * dim,
                got: data.len(),
            });
        }
        Ok(DensityMatrix { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, a: usize, b: usize) -> C {
        self.data[a * self.dim + b]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|a| self.get(a, a).re).collect()
    }

    pub fn trace(&self) -> C {
        (0..self.dim).map(|a| self.get(a, a)).sum()
    }

    /// Largest `|rho_ab - conj(rho_ba)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..self.dim {
            for b in 0..self.dim {
                worst = worst.max((self.get(a, b) - self.get(b, a).conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue, by cyclic Jacobi on the real symmetric embedding
    /// `[[Re, -Im], [Im, Re]]` (each eigenvalue appears twice).
    pub fn min_eigenvalue(&self) -> f64 {
        let d = self.dim;
        let m = 2 * d;
        let mut a = vec![0.0; m * m];
        for i in 0..d {
            for j in 0..d {
                let z = 0.5 * (self.get(i, j) + self.get(j, i).conj());
                a[i * m + j] = z.re;
                a[(i + d) * m + (j + d)] = z.re;
                a[i * m + (j + d)] = -z.im;
                a[(i + d) * m + j] = z.im;
            }
        }
        for _sweep in 0..100 {
            let off: f64 = (0..m)
                .flat_map(|p| (0..m).filter(move |&q| q != p).map(move |q| (p, q)))
                .map(|(p, q)| a[p * m + q].powi(2))
                .sum();
            if off < 1e-24 {
                break;
            }
            for p in 0..m {
                for q in p + 1..m {
                    let apq = a[p * m + q];
                    if apq.abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q * m + q] - a[p * m + p]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..m {
                        let akp = a[k * m + p];
                        let akq = a[k * m + q];
                        a[k * m + p] = c * akp - s * akq;
                        a[k * m + q] = s * akp + c * akq;
                    }
                    for k in 0..m {
                        let apk = a[p * m + k];
                        let aqk = a[q * m + k];
                        a[p * m + k] = c * apk - s * aqk;
                        a[q * m + k] = s * apk + c * aqk;
                    }
                }
            }
        }
        (0..m).map(|i| a[i * m + i]).fold(f64::INFINITY, f64::min)
    }

    /// `Tr(rho E)` for a diagonal observable.
    pub fn expectation_diagonal(&self, values: &[f64]) -> f64 {
        (0..self.dim).map(|a| self.get(a, a).re * values[a]).sum()
    }
}

fn lindblad_rhs(basis: &IsBasis, omega: f64, delta: f64, gamma: f64, rho: &[C], out: &mut [C]) {
    let d = basis.dim();
    let half_omega = 0.5 * omega;
    let states = basis.states();
    for a in 0..d {
        let da = basis.diagonal(a, delta);
        for b in 0..d {
            let db = basis.diagonal(b, delta);
            let mut comm = rho[a * d + b] * (da - db);
            let mut acc = C::new(0.0, 0.0);
            for &c in basis.flips(a) {
                acc += rho[c as usize * d + b];
            }
            for &c in basis.flips(b) {
                acc -= rho[a * d + c as usize];
            }
            comm += acc * half_omega;
            let decay = 0.5 * gamma * (states[a] ^ states[b]).count_ones() as f64;
            out[a * d + b] = C::new(comm.im, -comm.re) - rho[a * d + b] * decay;
        }
    }
}

/// Evolve `rho0` under `drive` with dephasing `gamma`.
pub fn lindblad_evolve(
    basis: &IsBasis,
    drive: &dyn Drive,
    gamma: f64,
    rho0: DensityMatrix,
    tol: Tolerances,
) -> Result<DensityMatrix> {
    let d = basis.dim();
    if d > LINDBLAD_MAX_DIM {
        return usage(format!(
            "density-matrix integration limited to dimension {LINDBLAD_MAX_DIM}, got {d}"
        ));
    }
    if rho0.dim != d {
        return Err(Error::LengthMismatch {
            expected: d,
            got: rho0.dim,
        });
    }
    let mut rho = rho0.data;
    let mut ode = Dopri5::new(d * d, tol);
    for w in segments(drive).windows(2) {
        ode.integrate(
            |t, y, dy| {
                let (omega, delta) = drive.at(t);
                lindblad_rhs(basis, omega, delta, gamma, y, dy);
            },
            w[0],
            w[1],
            &mut rho,
            |_, _| Control::Continue,
        )?;
    }
    Ok(DensityMatrix { dim: d, data: rho })
}

/// Final density matrix starting from `|0...0>`.
pub fn lindblad_exact(basis: &IsBasis, drive: &dyn Drive, gamma: f64) -> Result<DensityMatrix> {
    let mut psi0 = vec![C::new(0.0, 0.0); basis.dim()];
    psi0[0] = C::new(1.0, 0.0);
    lindblad_evolve(
        basis,
        drive,
        gamma,
        DensityMatrix::pure(&psi0),
        LINDBLAD_TOL,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::TargetModel;
    use crate::graph::UnitDiskGraph;
    use crate::rydberg::basis::build_is_basis;
    use crate::rydberg::schedule::{AnnealConfig, ConstantDrive, OMEGA0, V_UNIT};
    use crate::rydberg::trajectory::evolve_trajectory_with;

    fn basis(g: &UnitDiskGraph) -> IsBasis {
        build_is_basis(g, V_UNIT, TargetModel::default()).unwrap()
    }

    #[test]
    fn closed_system_matches_schroedinger() {
        let g = UnitDiskGraph::generate(4, 2.0, 0.3, 6).unwrap();
        let b = basis(&g);
        let c = AnnealConfig::with_tf(2.0).unwrap();
        let rho = lindblad_exact(&b, &c, 0.0).unwrap();
        let psi = evolve_trajectory_with(
            &b,
            &c,
            0.0,
            0,
            Tolerances {
                rtol: 1e-10,
                atol: 1e-12,
            },
        )
        .unwrap()
        .psi;
        let want = DensityMatrix::pure(&psi);
        for a in 0..b.dim() {
            for z in 0..b.dim() {
                assert!((rho.get(a, z) - want.get(a, z)).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn pure_dephasing_kills_coherences_only() {
        let g = UnitDiskGraph::from_points(vec![[0.0, 0.0], [3.0, 0.0]]);
        let b = basis(&g);
        let d = b.dim();
        let psi: Vec<C> = (0..d).map(|_| C::new(0.5, 0.0)).collect();
        let drive = ConstantDrive {
            omega: 0.0,
            delta: 0.0,
            duration: 2.0,
        };
        let rho =
            lindblad_evolve(&b, &drive, 1.5, DensityMatrix::pure(&psi), LINDBLAD_TOL).unwrap();
        for a in 0..d {
            assert!((rho.get(a, a).re - 0.25).abs() < 1e-10);
            for z in 0..d {
                let k = (b.states()[a] ^ b.states()[z]).count_ones() as f64;
                // The two distant atoms carry no interaction energy.
                let want = 0.25 * (-0.5 * 1.5 * k * 2.0f64).exp();
                assert!((rho.get(a, z).norm() - want).abs() < 1e-9, "{a},{z}");
            }
        }
    }

    #[test]
    fn trace_and_positivity_hold() {
        let g = UnitDiskGraph::generate(4, 2.0, 0.3, 2).unwrap();
        let b = basis(&g);
        let c = AnnealConfig::with_tf(1.5).unwrap();
        let rho = lindblad_exact(&b, &c, 3.0).unwrap();
        assert!((rho.trace() - C::new(1.0, 0.0)).norm() < 1e-8);
        assert!(rho.hermiticity_error() < 1e-10);
        assert!(rho.min_eigenvalue() > -1e-8);
    }

    #[test]
    fn strong_dephasing_relaxes_to_maximally_mixed_energy() {
        let g = UnitDiskGraph::generate(4, 2.0, 0.3, 7).unwrap();
        let b = basis(&g);
        let drive = ConstantDrive {
            omega: OMEGA0,
            delta: 0.0,
            duration: 40.0,
        };
        let rho = lindblad_exact(&b, &drive, 30.0).unwrap();
        let e = rho.expectation_diagonal(b.target_energies());
        let mixed = b.target_energies().iter().sum::<f64>() / b.dim() as f64;
        assert!((e - mixed).abs() < 0.05 * mixed.abs(), "{e} vs {mixed}");
    }

    #[test]
    fn dimension_guard() {
        let g = UnitDiskGraph::from_points((0..7).map(|i| [2.0 * i as f64, 0.0]).collect());
        let b = basis(&g);
        assert_eq!(b.dim(), 128);
        let c = AnnealConfig::with_tf(1.0).unwrap();
        assert!(lindblad_exact(&b, &c, 0.3).is_err());
    }
}
