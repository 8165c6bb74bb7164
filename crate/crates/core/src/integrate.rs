//! Fixed-step integration settings and a classical RK4 step for small
//! dense systems.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default fast-time step.
pub const DEFAULT_DT: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepSettings {
    pub dt: f64,
    pub t_final: f64,
    /// Record one row every `record_stride` steps.
    pub record_stride: usize,
    /// Worker threads for the network force evaluation; results do not
    /// depend on this value, so it is left out of serialized output.
    #[serde(default = "default_threads", skip_serializing)]
    pub threads: usize,
}

fn default_threads() -> usize {
    1
}

impl StepSettings {
    pub fn new(dt: f64, t_final: f64, record_stride: usize) -> Self {
        Self {
            dt,
            t_final,
            record_stride,
            threads: 1,
        }
    }

    pub fn validate(self) -> Result<Self> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid("integrator.dt", "dt must be positive"));
        }
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(Error::invalid("integrator.t_final", "t_final must be positive"));
        }
        if self.record_stride == 0 {
            return Err(Error::invalid(
                "integrator.record_stride",
                "record_stride must be at least 1",
            ));
        }
        if self.threads == 0 {
            return Err(Error::invalid("integrator.threads", "threads must be at least 1"));
        }
        Ok(self)
    }

    pub fn n_steps(&self) -> usize {
        (self.t_final / self.dt).round().max(1.0) as usize
    }

    /// Whether step index `k` (state after `k` steps) is recorded.
    pub fn records(&self, k: usize, n_steps: usize) -> bool {
        k % self.record_stride == 0 || k == n_steps
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }
}

impl Default for StepSettings {
    fn default() -> Self {
        Self::new(DEFAULT_DT, 100.0, 10)
    }
}

/// One classical RK4 step of `y' = f(t, y)` for an `N`-dimensional state.
pub fn rk4_step<const N: usize, F>(f: &mut F, t: f64, y: &[f64; N], dt: f64) -> [f64; N]
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let axpy = |a: &[f64; N], s: f64, b: &[f64; N]| {
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = a[i] + s * b[i];
        }
        out
    };
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * dt, &axpy(y, 0.5 * dt, &k1));
    let k3 = f(t + 0.5 * dt, &axpy(y, 0.5 * dt, &k2));
    let k4 = f(t + dt, &axpy(y, dt, &k3));
    let mut out = [0.0; N];
    for i in 0..N {
        out[i] = y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}
