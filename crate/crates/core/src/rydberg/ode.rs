//! Dormand-Prince 5(4) with the standard fourth-order continuous extension,
//! specialised to complex state vectors.

use num_complex::Complex64 as C;

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Default tolerances of the state-vector integrator.
pub const RTOL: f64 = 1e-8;
pub const ATOL: f64 = 1e-10;

const MAX_STEPS: usize = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rtol: RTOL,
            atol: ATOL,
        }
    }
}

/// Interpolant over one accepted step `[t, t + h]`.
pub(crate) struct DenseStep<'a> {
    pub t: f64,
    pub h: f64,
    r: &'a [Vec<C>; 5],
}

impl DenseStep<'_> {
    pub fn t_end(&self) -> f64 {
        self.t + self.h
    }

    pub fn eval(&self, t: f64, out: &mut [C]) {
        let s = ((t - self.t) / self.h).clamp(0.0, 1.0);
        let s1 = 1.0 - s;
        let [r1, r2, r3, r4, r5] = self.r;
        for (k, o) in out.iter_mut().enumerate() {
            *o = r1[k] + (r2[k] + (r3[k] + (r4[k] + r5[k] * s1) * s) * s1) * s;
        }
    }
}

pub(crate) enum Control {
    Continue,
    /// Stop at a time inside the last step; the state is set from the interpolant.
    StopAt(f64),
}

/// Reusable integrator workspace.
pub(crate) struct Dopri5 {
    tol: Tolerances,
    k: [Vec<C>; 7],
    y1: Vec<C>,
    ytmp: Vec<C>,
    r: [Vec<C>; 5],
    /// Step size carried across calls.
    pub h: f64,
}

impl Dopri5 {
    pub fn new(dim: usize, tol: Tolerances) -> Self {
        let z = || vec![C::new(0.0, 0.0); dim];
        Dopri5 {
            tol,
            k: [z(), z(), z(), z(), z(), z(), z()],
            y1: z(),
            ytmp: z(),
            r: [z(), z(), z(), z(), z()],
            h: 0.0,
        }
    }

    fn stage(&mut self, y: &[C], h: f64, coeffs: &[(usize, f64)]) {
        for i in 0..y.len() {
            let mut acc = C::new(0.0, 0.0);
            for &(j, a) in coeffs {
                acc += self.k[j][i] * a;
            }
            self.ytmp[i] = y[i] + acc * h;
        }
    }

    fn initial_step(&self, y: &[C], f0: &[C], span: f64) -> f64 {
        let scale = |v: &C, yi: &C| v.norm() / (self.tol.atol + self.tol.rtol * yi.norm());
        let d0 = rms(y.iter().zip(y).map(|(a, b)| scale(a, b)));
        let d1 = rms(f0.iter().zip(y).map(|(a, b)| scale(a, b)));
        let h = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        h.min(span)
    }

    /// Integrate `y' = rhs(t, y)` from `t0` to `t1`. Returns the time reached,
    /// which is `t1` unless `observe` requested an early stop.
    pub fn integrate<F, O>(
        &mut self,
        mut rhs: F,
        t0: f64,
        t1: f64,
        y: &mut [C],
        mut observe: O,
    ) -> Result<f64>
    where
        F: FnMut(f64, &[C], &mut [C]),
        O: FnMut(&DenseStep<'_>, &[C]) -> Control,
    {
        let span = t1 - t0;
        if span <= 0.0 {
            return Ok(t0);
        }
        let dim = y.len();
        let mut t = t0;
        rhs(t, y, &mut self.k[0]);
        if self.h <= 0.0 {
            self.h = self.initial_step(y, &self.k[0], span);
        }
        let h_min = 1e-13 * t1.abs().max(1.0);
        for _ in 0..MAX_STEPS {
            let last = t + self.h >= t1 - h_min;
            let h = if last { t1 - t } else { self.h };

            self.stage(y, h, &[(0, A21)]);
            rhs(t + C2 * h, &self.ytmp, &mut self.k[1]);
            self.stage(y, h, &[(0, A31), (1, A32)]);
            rhs(t + C3 * h, &self.ytmp, &mut self.k[2]);
            self.stage(y, h, &[(0, A41), (1, A42), (2, A43)]);
            rhs(t + C4 * h, &self.ytmp, &mut self.k[3]);
            self.stage(y, h, &[(0, A51), (1, A52), (2, A53), (3, A54)]);
            rhs(t + C5 * h, &self.ytmp, &mut self.k[4]);
            self.stage(y, h, &[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)]);
            rhs(t + h, &self.ytmp, &mut self.k[5]);
            self.stage(y, h, &[(0, A71), (2, A73), (3, A74), (4, A75), (5, A76)]);
            std::mem::swap(&mut self.y1, &mut self.ytmp);
            rhs(t + h, &self.y1, &mut self.k[6]);

            let mut err2 = 0.0;
            for i in 0..dim {
                let e = (self.k[0][i] * E1
                    + self.k[2][i] * E3
                    + self.k[3][i] * E4
                    + self.k[4][i] * E5
                    + self.k[5][i] * E6
                    + self.k[6][i] * E7)
                    * h;
                let sc = self.tol.atol + self.tol.rtol * y[i].norm().max(self.y1[i].norm());
                err2 += (e.norm() / sc).powi(2);
            }
            let err = (err2 / dim.max(1) as f64).sqrt();
            if !err.is_finite() {
                return Err(Error::Integrator {
                    t,
                    reason: "non-finite error estimate".into(),
                });
            }

            if err <= 1.0 {
                for i in 0..dim {
                    let dy = self.y1[i] - y[i];
                    let bspl = self.k[0][i] * h - dy;
                    self.r[0][i] = y[i];
                    self.r[1][i] = dy;
                    self.r[2][i] = bspl;
                    self.r[3][i] = dy - self.k[6][i] * h - bspl;
                    self.r[4][i] = (self.k[0][i] * D1
                        + self.k[2][i] * D3
                        + self.k[3][i] * D4
                        + self.k[4][i] * D5
                        + self.k[5][i] * D6
                        + self.k[6][i] * D7)
                        * h;
                }
                let step = DenseStep { t, h, r: &self.r };
                let control = observe(&step, &self.y1);
                let fac = (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 10.0);
                if !last {
                    self.h = h * fac;
                }
                if let Control::StopAt(ts) = control {
                    let ts = ts.clamp(t, t + h);
                    step.eval(ts, y);
                    return Ok(ts);
                }
                y.copy_from_slice(&self.y1);
                t += h;
                if last {
                    return Ok(t1);
                }
                self.k.swap(0, 6);
            } else {
                self.h = h * (0.9 * err.powf(-0.2)).max(0.2);
                if self.h < h_min {
                    return Err(Error::Integrator {
                        t,
                        reason: format!("step size underflow (h = {:e})", self.h),
                    });
                }
            }
        }
        Err(Error::Integrator {
            t,
            reason: "step limit exceeded".into(),
        })
    }
}

fn rms(it: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut m) = (0.0, 0usize);
    for v in it {
        s += v * v;
        m += 1;
    }
    (s / m.max(1) as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn never(_: &DenseStep<'_>, _: &[C]) -> Control {
        Control::Continue
    }

    #[test]
    fn rotating_phase_is_accurate() {
        let mut ode = Dopri5::new(
            1,
            Tolerances {
                rtol: 1e-10,
                atol: 1e-12,
            },
        );
        let mut y = vec![C::new(1.0, 0.0)];
        let w = 7.0;
        let t = ode
            .integrate(
                |_, y, dy| dy[0] = C::new(0.0, -w) * y[0],
                0.0,
                3.0,
                &mut y,
                never,
            )
            .unwrap();
        assert_eq!(t, 3.0);
        let exact = C::new(0.0, -w * 3.0).exp();
        assert!((y[0] - exact).norm() < 1e-8);
    }

    #[test]
    fn dense_output_tracks_solution() {
        let mut ode = Dopri5::new(1, Tolerances::default());
        let mut y = vec![C::new(1.0, 0.0)];
        let mut worst: f64 = 0.0;
        let mut buf = vec![C::new(0.0, 0.0)];
        ode.integrate(
            |_, y, dy| dy[0] = -y[0],
            0.0,
            2.0,
            &mut y,
            |step, _| {
                for q in 0..=10 {
                    let t = step.t + step.h * q as f64 / 10.0;
                    step.eval(t, &mut buf);
                    worst = worst.max((buf[0].re - (-t).exp()).abs());
                }
                Control::Continue
            },
        )
        .unwrap();
        assert!(worst < 1e-5, "dense error {worst}");
    }

    #[test]
    fn early_stop_lands_on_requested_time() {
        let mut ode = Dopri5::new(1, Tolerances::default());
        let mut y = vec![C::new(1.0, 0.0)];
        let t = ode
            .integrate(
                |_, y, dy| dy[0] = -y[0],
                0.0,
                5.0,
                &mut y,
                |step, _| {
                    if step.t_end() > 1.0 {
                        Control::StopAt(1.0)
                    } else {
                        Control::Continue
                    }
                },
            )
            .unwrap();
        assert_eq!(t, 1.0);
        assert!((y[0].re - (-1.0f64).exp()).abs() < 1e-6);
    }

    #[test]
    fn blow_up_is_reported() {
        let mut ode = Dopri5::new(1, Tolerances::default());
        let mut y = vec![C::new(1.0, 0.0)];
        let r = ode.integrate(
            |_, y, dy| dy[0] = y[0] * y[0] * y[0].norm() * 1e3,
            0.0,
            10.0,
            &mut y,
            never,
        );
        assert!(r.is_err());
    }
}
