use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::cost::{TargetModel, DEFAULT_U};
use crate::error::{usage, Result};

/// Peak Rabi frequency, rad/µs.
pub const OMEGA0: f64 = TAU * 1.89;
/// Detuning at the start of the sweep, rad/µs.
pub const DELTA0: f64 = -TAU * 6.0;
/// Detuning at the end of the sweep, rad/µs.
pub const DELTA_MAX: f64 = TAU * 4.59;
/// Van der Waals coefficient at unit distance, rad/µs.
pub const V_UNIT: f64 = TAU * 2.7;
pub const RISE_FRACTION: f64 = 0.25;
pub const SWEEP_FRACTION: f64 = 0.44;

/// A time-dependent drive `(omega(t), delta(t))` on `[0, duration]`.
pub trait Drive: Sync {
    fn at(&self, t: f64) -> (f64, f64);
    fn duration(&self) -> f64;
    /// Interior times where the drive has a kink, ascending.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// Three-stage annealing schedule and Hamiltonian constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealConfig {
    pub omega0: f64,
    pub delta0: f64,
    pub delta_max: f64,
    pub t_rise: f64,
    pub t_sweep: f64,
    pub t_f: f64,
    pub v: f64,
    pub u: f64,
}

impl AnnealConfig {
    /// Standard schedule with the rise and sweep stages scaled to `t_f`.
    pub fn with_tf(t_f: f64) -> Result<Self> {
        let c = AnnealConfig {
            omega0: OMEGA0,
            delta0: DELTA0,
            delta_max: DELTA_MAX,
            t_rise: RISE_FRACTION * t_f,
            t_sweep: SWEEP_FRACTION * t_f,
            t_f,
            v: V_UNIT,
            u: DEFAULT_U,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_f > 0.0 && self.t_f.is_finite()) {
            return usage(format!("t_f must be positive, got {}", self.t_f));
        }
        if self.t_rise < 0.0 || self.t_sweep < 0.0 {
            return usage("stage durations must be non-negative");
        }
        if self.t_rise + self.t_sweep > self.t_f * (1.0 + 1e-12) {
            return usage("t_rise + t_sweep exceeds t_f");
        }
        TargetModel::new(self.u)?;
        Ok(())
    }

    pub fn target_model(&self) -> Result<TargetModel> {
        TargetModel::new(self.u)
    }

    fn eval(&self, t: f64) -> (f64, f64) {
        let t1 = self.t_rise;
        let t2 = self.t_rise + self.t_sweep;
        let lerp = |a: f64, b: f64, x: f64| a + (b - a) * x;
        if t <= t1 {
            let x = if t1 > 0.0 { t / t1 } else { 1.0 };
            (lerp(0.0, self.omega0, x.clamp(0.0, 1.0)), self.delta0)
        } else if t <= t2 {
            let x = (t - t1) / self.t_sweep;
            (self.omega0, lerp(self.delta0, self.delta_max, x))
        } else {
            let fall = self.t_f - t2;
            let x = if fall > 0.0 { (t - t2) / fall } else { 1.0 };
            (lerp(self.omega0, 0.0, x.clamp(0.0, 1.0)), self.delta_max)
        }
    }
}

impl Drive for AnnealConfig {
    fn at(&self, t: f64) -> (f64, f64) {
        self.eval(t.clamp(0.0, self.t_f))
    }

    fn duration(&self) -> f64 {
        self.t_f
    }

    fn breakpoints(&self) -> Vec<f64> {
        let t1 = self.t_rise;
        let t2 = self.t_rise + self.t_sweep;
        [t1, t2]
            .into_iter()
            .filter(|&t| t > 0.0 && t < self.t_f)
            .collect()
    }
}

/// `(omega, delta)` of the annealing schedule at time `t`.
pub fn schedule_at(t: f64, c: &AnnealConfig) -> Result<(f64, f64)> {
    if !(0.0..=c.t_f).contains(&t) {
        return usage(format!("t = {t} outside [0, {}]", c.t_f));
    }
    Ok(c.eval(t))
}

/// Time-independent drive, mainly for checks against closed-form limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantDrive {
    pub omega: f64,
    pub delta: f64,
    pub duration: f64,
}

impl Drive for ConstantDrive {
    fn at(&self, _t: f64) -> (f64, f64) {
        (self.omega, self.delta)
    }

    fn duration(&self) -> f64 {
        self.duration
    }
}

/// Dephasing rate and readout error probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Dephasing rate, 1/µs.
    pub gamma: f64,
    /// Probability of reading 1 for an atom in 0.
    pub eps: f64,
    /// Probability of reading 0 for an atom in 1.
    pub eps_prime: f64,
}

impl NoiseModel {
    pub fn new(gamma: f64, eps: f64, eps_prime: f64) -> Result<Self> {
        let m = NoiseModel {
            gamma,
            eps,
            eps_prime,
        };
        m.validate()?;
        Ok(m)
    }

    /// Dephasing only, perfect readout.
    pub fn dephasing(gamma: f64) -> Result<Self> {
        Self::new(gamma, 0.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return usage(format!("gamma must be non-negative, got {}", self.gamma));
        }
        for p in [self.eps, self.eps_prime] {
            if !(0.0..=1.0).contains(&p) {
                return usage(format!("readout probability {p} outside [0, 1]"));
            }
        }
        Ok(())
    }

    pub fn has_readout_error(&self) -> bool {
        self.eps > 0.0 || self.eps_prime > 0.0
    }
}
