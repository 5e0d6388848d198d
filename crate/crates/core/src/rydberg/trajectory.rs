//! Monte-Carlo wave-function unravelling of the dephasing master equation.
//!
//! Between jumps the unnormalised state evolves under
//! `H_eff = H(t) - (i/2) gamma sum_i n_i`. A jump fires when the squared
//! norm falls to a uniform threshold; the channel is drawn proportionally to
//! `gamma <n_i>`, the state is projected with `n_i` and renormalised.

use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::basis::IsBasis;
use super::ode::{Control, Dopri5, Tolerances};
use super::schedule::Drive;
use crate::error::Result;

const BISECTION_STEPS: usize = 60;

/// Final state of one trajectory and its jump record.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Normalised final state.
    pub psi: Vec<C>,
    /// `(time, atom)` of every jump, in order.
    pub jumps: Vec<(f64, usize)>,
    /// Norm before the final renormalisation. With no dephasing its distance
    /// from 1 is the integrator drift.
    pub raw_norm: f64,
}

impl Trajectory {
    pub fn probabilities(&self) -> Vec<f64> {
        self.psi.iter().map(|a| a.norm_sqr()).collect()
    }
}

fn norm_sqr(psi: &[C]) -> f64 {
    psi.iter().map(|a| a.norm_sqr()).sum()
}

fn normalize(psi: &mut [C]) {
    let norm = norm_sqr(psi).sqrt();
    if norm > 0.0 {
        for a in psi.iter_mut() {
            *a /= norm;
        }
    }
}

/// Time interval boundaries: 0, drive kinks, duration.
pub(crate) fn segments(drive: &dyn Drive) -> Vec<f64> {
    let mut b = vec![0.0];
    b.extend(drive.breakpoints());
    b.push(drive.duration());
    b
}

/// Evolve `|0...0>` under `drive` with dephasing rate `gamma`.
pub fn evolve_trajectory(
    basis: &IsBasis,
    drive: &dyn Drive,
    gamma: f64,
    seed: u64,
) -> Result<Vec<C>> {
    Ok(evolve_trajectory_with(basis, drive, gamma, seed, Tolerances::default())?.psi)
}

pub fn evolve_trajectory_with(
    basis: &IsBasis,
    drive: &dyn Drive,
    gamma: f64,
    seed: u64,
    tol: Tolerances,
) -> Result<Trajectory> {
    let dim = basis.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut psi = vec![C::new(0.0, 0.0); dim];
    psi[0] = C::new(1.0, 0.0);
    let mut jumps = Vec::new();
    let mut ode = Dopri5::new(dim, tol);
    let mut buf = vec![C::new(0.0, 0.0); dim];
    let half_gamma = 0.5 * gamma;
    let mut threshold: f64 = rng.gen();

    let bounds = segments(drive);
    for w in bounds.windows(2) {
        let (mut t, end) = (w[0], w[1]);
        while t < end {
            let rhs = |t: f64, y: &[C], dy: &mut [C]| {
                let (omega, delta) = drive.at(t);
                basis.rhs(
                    omega,
                    delta,
                    basis.diagonal_center(delta),
                    half_gamma,
                    y,
                    dy,
                );
            };
            let reached = ode.integrate(rhs, t, end, &mut psi, |step, y_end| {
                if gamma == 0.0 || norm_sqr(y_end) > threshold {
                    return Control::Continue;
                }
                let (mut lo, mut hi) = (step.t, step.t_end());
                for _ in 0..BISECTION_STEPS {
                    let mid = 0.5 * (lo + hi);
                    step.eval(mid, &mut buf);
                    if norm_sqr(&buf) > threshold {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo < 1e-12 {
                        break;
                    }
                }
                Control::StopAt(hi)
            })?;
            if reached < end || (gamma > 0.0 && norm_sqr(&psi) <= threshold) {
                if let Some(atom) = jump(basis, &mut psi, &mut rng) {
                    jumps.push((reached, atom));
                }
                threshold = rng.gen();
            }
            t = reached;
        }
    }
    let raw_norm = norm_sqr(&psi).sqrt();
    normalize(&mut psi);
    Ok(Trajectory {
        psi,
        jumps,
        raw_norm,
    })
}

/// Apply a dephasing jump chosen proportionally to `<n_i>`. Returns the atom.
fn jump(basis: &IsBasis, psi: &mut [C], rng: &mut ChaCha8Rng) -> Option<usize> {
    let occ = basis.site_occupations(psi);
    let total: f64 = occ.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let mut x = rng.gen::<f64>() * total;
    let mut atom = occ.len() - 1;
    for (i, &p) in occ.iter().enumerate() {
        if x < p {
            atom = i;
            break;
        }
        x -= p;
    }
    for (a, &s) in basis.states().iter().enumerate() {
        if s >> atom & 1 == 0 {
            psi[a] = C::new(0.0, 0.0);
        }
    }
    normalize(psi);
    Some(atom)
}
