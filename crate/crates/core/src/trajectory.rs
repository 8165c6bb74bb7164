use std::io::{self, Write};

use serde::{Deserialize, Serialize};

/// Column header of the trajectory CSV format.
pub const CSV_HEADER: &str = "t,R1,phi1,R2,phi2,psi,coupling";

/// Integration counters reported alongside a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    pub steps: u64,
    /// Times an order-parameter magnitude left `[0, 1 - 1e-12]` and was clamped.
    pub clamp_count: u64,
    /// RHS evaluations where the phase equation was frozen below the floor.
    pub floor_count: u64,
}

/// One recorded row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub r1: f64,
    pub phi1: f64,
    pub r2: f64,
    pub phi2: f64,
    pub psi: f64,
    pub coupling: f64,
}

/// Time-indexed record of order parameters and the adaptive coupling.
///
/// Phases follow the mean-field convention `z = ρ e^{-iφ}`, so `phi` is the
/// negated argument of the complex order parameter and `psi = phi2 - phi1`
/// (kept unwrapped). `phi1`/`phi2` are wrapped to `[0, 2π)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub r1: Vec<f64>,
    pub phi1: Vec<f64>,
    pub r2: Vec<f64>,
    pub phi2: Vec<f64>,
    pub psi: Vec<f64>,
    pub coupling: Vec<f64>,
    pub diagnostics: Diagnostics,
}

impl Trajectory {
    pub fn with_capacity(n: usize) -> Self {
        Self {
            times: Vec::with_capacity(n),
            r1: Vec::with_capacity(n),
            phi1: Vec::with_capacity(n),
            r2: Vec::with_capacity(n),
            phi2: Vec::with_capacity(n),
            psi: Vec::with_capacity(n),
            coupling: Vec::with_capacity(n),
            diagnostics: Diagnostics::default(),
        }
    }

    pub fn push(&mut self, s: Sample) {
        debug_assert!(self.times.last().map_or(true, |&t| s.t > t));
        self.times.push(s.t);
        self.r1.push(s.r1);
        self.phi1.push(s.phi1);
        self.r2.push(s.r2);
        self.phi2.push(s.phi2);
        self.psi.push(s.psi);
        self.coupling.push(s.coupling);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn sample(&self, i: usize) -> Sample {
        Sample {
            t: self.times[i],
            r1: self.r1[i],
            phi1: self.phi1[i],
            r2: self.r2[i],
            phi2: self.phi2[i],
            psi: self.psi[i],
            coupling: self.coupling[i],
        }
    }

    pub fn last(&self) -> Option<Sample> {
        (!self.is_empty()).then(|| self.sample(self.len() - 1))
    }

    /// Index of the first sample after discarding `fraction` of the record.
    pub fn transient_cut(&self, fraction: f64) -> usize {
        let n = self.len();
        ((n as f64 * fraction.clamp(0.0, 1.0)).floor() as usize).min(n.saturating_sub(1))
    }

    /// Keeps every `stride`-th row, starting with the first.
    pub fn subsample(&self, stride: usize) -> Self {
        let stride = stride.max(1);
        let mut out = Self::with_capacity(self.len() / stride + 1);
        for i in (0..self.len()).step_by(stride) {
            out.push(self.sample(i));
        }
        out.diagnostics = self.diagnostics;
        out
    }

    /// Writes the trajectory as CSV with 12 significant digits per value.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for i in 0..self.len() {
            let s = self.sample(i);
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                fmt_sig12(s.t),
                fmt_sig12(s.r1),
                fmt_sig12(s.phi1),
                fmt_sig12(s.r2),
                fmt_sig12(s.phi2),
                fmt_sig12(s.psi),
                fmt_sig12(s.coupling)
            )?;
        }
        Ok(())
    }
}

/// Scientific notation with 12 significant digits.
pub fn fmt_sig12(v: f64) -> String {
    format!("{v:.11e}")
}
