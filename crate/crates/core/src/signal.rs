//! Smoothing, oscillation measurement and pattern classification of
//! order-parameter traces.

use nalgebra::{DMatrix, DVector};
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trajectory::Trajectory;

pub const DEFAULT_SG_WINDOW: usize = 101;
pub const DEFAULT_SG_ORDER: usize = 3;
pub const DEFAULT_TRANSIENT_FRACTION: f64 = 0.2;

/// Weights that evaluate the least-squares polynomial fit through samples at
/// integer offsets `lo..lo+len` at offset `at`.
fn fit_weights(lo: isize, len: usize, order: usize, at: f64) -> Vec<f64> {
    // offsets scaled to O(1) keep the normal equations well conditioned
    let scale = (len as f64 - 1.0).max(1.0) / 2.0;
    let v = DMatrix::from_fn(len, order + 1, |i, j| ((lo + i as isize) as f64 / scale).powi(j as i32));
    let p = DVector::from_fn(order + 1, |j, _| (at / scale).powi(j as i32));
    let gram = v.transpose() * &v;
    let a = gram
        .lu()
        .solve(&p)
        .expect("Vandermonde normal matrix is nonsingular for distinct nodes");
    (v * a).iter().copied().collect()
}

/// Savitzky-Golay smoothing. Edge samples are taken from the polynomial
/// fitted to the first (last) `window` samples.
pub fn savitzky_golay(series: &[f64], window: usize, poly_order: usize) -> Result<Vec<f64>> {
    if window % 2 == 0 {
        return Err(Error::invalid("window", "window must be odd"));
    }
    if poly_order >= window {
        return Err(Error::invalid("poly_order", "poly_order must be below the window"));
    }
    if series.len() < window {
        return Err(Error::invalid("series", "series is shorter than the window"));
    }
    let n = series.len();
    let half = window / 2;
    let hi = half as isize;
    let dot = |w: &[f64], start: usize| w.iter().zip(&series[start..start + window]).map(|(a, b)| a * b).sum::<f64>();

    let mut out = vec![0.0; n];
    let centre = fit_weights(-hi, window, poly_order, 0.0);
    for i in half..n - half {
        out[i] = dot(&centre, i - half);
    }
    for i in 0..half {
        let w = fit_weights(-hi, window, poly_order, i as f64 - hi as f64);
        out[i] = dot(&w, 0);
        let w = fit_weights(-hi, window, poly_order, hi as f64 - i as f64);
        out[n - 1 - i] = dot(&w, n - window);
    }
    Ok(out)
}

/// Linear-interpolation quantile of sorted data.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillationMetrics {
    /// Half the inter-decile range.
    pub amplitude: f64,
    /// Period of the dominant spectral peak; `None` for flat series or when
    /// less than one full cycle fits in the segment.
    pub period: Option<f64>,
}

/// Amplitude and period after discarding the first `transient_fraction` of
/// the samples. Assumes a uniform time grid.
pub fn oscillation_metrics(series: &[f64], times: &[f64], transient_fraction: f64) -> Result<OscillationMetrics> {
    if series.len() != times.len() {
        return Err(Error::invalid("times", "series and times differ in length"));
    }
    if series.len() < 16 {
        return Err(Error::invalid("series", "at least 16 samples are needed"));
    }
    let start = ((series.len() as f64) * transient_fraction.clamp(0.0, 0.9)).floor() as usize;
    let seg = &series[start..];
    let ts = &times[start..];
    let n = seg.len();

    let mut sorted = seg.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let amplitude = 0.5 * (quantile_sorted(&sorted, 0.9) - quantile_sorted(&sorted, 0.1));

    let mean = seg.iter().sum::<f64>() / n as f64;
    let spread = sorted[n - 1] - sorted[0];
    if !(spread > 1e-12 * mean.abs().max(1.0)) {
        return Ok(OscillationMetrics { amplitude, period: None });
    }
    let span = ts[n - 1] - ts[0];
    let dt = span / (n - 1) as f64;

    let m = (8 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = seg
        .iter()
        .map(|v| Complex::new(v - mean, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(m)
        .collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let mag: Vec<f64> = buf[..m / 2 + 1].iter().map(|c| c.norm()).collect();
    let (k, _) = mag
        .iter()
        .enumerate()
        .skip(1)
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
    let mut kf = k as f64;
    if k + 1 < mag.len() {
        let (a, b, c) = (mag[k - 1], mag[k], mag[k + 1]);
        let denom = a - 2.0 * b + c;
        if denom != 0.0 {
            kf += 0.5 * (a - c) / denom;
        }
    }
    let period = m as f64 * dt / kf;
    let period = (period.is_finite() && period <= span).then_some(period);
    Ok(OscillationMetrics { amplitude, period })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternKind {
    Synchronized,
    Incoherent,
    StationaryChimera,
    BreathingChimera,
    Unclassified,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Smoothing {
    pub window: usize,
    pub order: usize,
}

impl Default for Smoothing {
    fn default() -> Self {
        Self {
            window: DEFAULT_SG_WINDOW,
            order: DEFAULT_SG_ORDER,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PatternThresholds {
    pub sync_r: f64,
    pub steady_amplitude: f64,
    pub incoherent_floor: f64,
    /// Finite-size floor `incoherent_scale / √N`.
    pub incoherent_scale: f64,
    pub chimera_r2: f64,
    /// Margin above the incoherence floor required of mean `R₁`.
    pub chimera_r1_margin: f64,
    pub chimera_r1_max: f64,
    pub breathing_r2: f64,
    pub transient_fraction: f64,
    /// Optional filter applied to `R₁` before measuring oscillations.
    pub smoothing: Option<Smoothing>,
}

impl Default for PatternThresholds {
    fn default() -> Self {
        Self {
            sync_r: 0.9,
            steady_amplitude: 0.05,
            incoherent_floor: 0.1,
            incoherent_scale: 1.5,
            chimera_r2: 0.9,
            chimera_r1_margin: 0.05,
            chimera_r1_max: 0.85,
            breathing_r2: 0.8,
            transient_fraction: DEFAULT_TRANSIENT_FRACTION,
            smoothing: None,
        }
    }
}

impl PatternThresholds {
    /// `max(incoherent_floor, incoherent_scale/√N)`; infinite populations use
    /// the constant floor.
    pub fn floor(&self, population: Option<usize>) -> f64 {
        match population {
            Some(n) if n > 0 => self.incoherent_floor.max(self.incoherent_scale / (n as f64).sqrt()),
            _ => self.incoherent_floor,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatternClass {
    pub kind: PatternKind,
    pub mean_r1: f64,
    pub mean_r2: f64,
    pub osc_amplitude: f64,
    pub osc_period: Option<f64>,
    pub thresholds: PatternThresholds,
}

/// Classifies the post-transient part of `traj`. `population` is the size
/// used for the incoherence floor (`None` for mean-field traces).
pub fn classify_pattern(traj: &Trajectory, population: Option<usize>, thresholds: &PatternThresholds) -> Result<PatternClass> {
    let th = *thresholds;
    let start = traj.transient_cut(th.transient_fraction);
    let r1 = &traj.r1[start..];
    let r2 = &traj.r2[start..];
    let times = &traj.times[start..];
    if r1.is_empty() {
        return Err(Error::EmptyInput("trajectory"));
    }
    let mean = |x: &[f64]| x.iter().sum::<f64>() / x.len() as f64;
    let mean_r1 = mean(r1);
    let mean_r2 = mean(r2);

    let smoothed;
    let r1_signal = match th.smoothing {
        Some(s) if r1.len() >= s.window => {
            smoothed = savitzky_golay(r1, s.window, s.order)?;
            &smoothed[..]
        }
        _ => r1,
    };
    let metrics = if r1_signal.len() >= 16 {
        oscillation_metrics(r1_signal, times, 0.0)?
    } else {
        let mut s = r1_signal.to_vec();
        s.sort_by(|a, b| a.total_cmp(b));
        OscillationMetrics {
            amplitude: 0.5 * (quantile_sorted(&s, 0.9) - quantile_sorted(&s, 0.1)),
            period: None,
        }
    };
    let amp = metrics.amplitude;
    let floor = th.floor(population);

    let kind = if mean_r1 > th.sync_r && mean_r2 > th.sync_r && amp < th.steady_amplitude {
        PatternKind::Synchronized
    } else if mean_r1 < floor && mean_r2 < floor {
        PatternKind::Incoherent
    } else if mean_r2 > th.chimera_r2
        && mean_r1 >= floor + th.chimera_r1_margin
        && mean_r1 <= th.chimera_r1_max
        && amp < th.steady_amplitude
    {
        PatternKind::StationaryChimera
    } else if mean_r2 > th.breathing_r2 && amp >= th.steady_amplitude && metrics.period.is_some() {
        PatternKind::BreathingChimera
    } else {
        PatternKind::Unclassified
    };
    Ok(PatternClass {
        kind,
        mean_r1,
        mean_r2,
        osc_amplitude: amp,
        osc_period: metrics.period,
        thresholds: th,
    })
}
