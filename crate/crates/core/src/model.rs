//! Shared domain types: population and coupling parameters, natural-frequency
//! and initial-phase synthesis, and the Kuramoto order parameter.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How natural frequencies are drawn from the Cauchy-Lorentz law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum SamplingMode {
    /// Quantiles at `(i - 1/2) / N`; a pure function of the spec.
    #[default]
    DeterministicQuantiles,
    /// `N` i.i.d. inverse-CDF draws from a seeded generator.
    SeededRandom { seed: u64 },
}

/// One oscillator layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationSpec {
    pub size: usize,
    /// Central natural frequency (radians per unit fast time).
    pub center_freq: f64,
    /// Cauchy-Lorentz half width.
    pub width: f64,
    #[serde(default)]
    pub sampling: SamplingMode,
}

impl PopulationSpec {
    pub fn new(size: usize, center_freq: f64, width: f64) -> Self {
        Self {
            size,
            center_freq,
            width,
            sampling: SamplingMode::DeterministicQuantiles,
        }
    }

    fn validate(&self, name: &str) -> Result<()> {
        if self.size < 2 {
            return Err(Error::invalid(
                format!("{name}.size"),
                "population size must be ≥ 2",
            ));
        }
        if !self.center_freq.is_finite() {
            return Err(Error::invalid(
                format!("{name}.center_freq"),
                "center frequency must be finite",
            ));
        }
        if !self.width.is_finite() {
            return Err(Error::invalid(format!("{name}.width"), "width must be finite"));
        }
        if self.width < 0.0 {
            return Err(Error::invalid(
                format!("{name}.width"),
                "width must be non-negative",
            ));
        }
        Ok(())
    }
}

/// Coupling strengths. `k1`/`k2` are the intracouplings, `mu` the
/// intercoupling, `phase_lag` the Sakaguchi lag applied to every pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingConfig {
    pub k1: f64,
    pub k2: f64,
    pub mu: f64,
    #[serde(default)]
    pub phase_lag: f64,
}

impl CouplingConfig {
    pub fn new(k1: f64, k2: f64, mu: f64) -> Self {
        Self {
            k1,
            k2,
            mu,
            phase_lag: 0.0,
        }
    }
}

/// Full parameter set of the two-population system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    pub pop1: PopulationSpec,
    pub pop2: PopulationSpec,
    pub coupling: CouplingConfig,
}

impl SystemParams {
    pub fn new(pop1: PopulationSpec, pop2: PopulationSpec, coupling: CouplingConfig) -> Self {
        Self {
            pop1,
            pop2,
            coupling,
        }
    }

    /// Detuning between the two frequency centers, `ω₂ − ω₁`.
    pub fn omega_diff(&self) -> f64 {
        self.pop2.center_freq - self.pop1.center_freq
    }

    /// Returns the parameters unchanged if every invariant holds.
    pub fn validate(self) -> Result<Self> {
        self.pop1.validate("pop1")?;
        self.pop2.validate("pop2")?;
        let c = &self.coupling;
        for (name, v) in [
            ("coupling.k1", c.k1),
            ("coupling.k2", c.k2),
            ("coupling.mu", c.mu),
            ("coupling.phase_lag", c.phase_lag),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(name, "coupling values must be finite"));
            }
        }
        Ok(self)
    }
}

/// Free-function form of [`SystemParams::validate`].
pub fn validate_config(params: SystemParams) -> Result<SystemParams> {
    params.validate()
}

/// Magnitude and phase of the complex centroid of a set of phasors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderParameter {
    pub magnitude: f64,
    /// Wrapped to `[0, 2π)`.
    pub phase: f64,
}

impl OrderParameter {
    pub fn from_complex(z: Complex64) -> Self {
        Self {
            magnitude: z.norm().min(1.0),
            phase: wrap_phase(z.arg()),
        }
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_phase(theta: f64) -> f64 {
    let w = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Inverse CDF of the Cauchy-Lorentz law with the given center and half width.
pub fn cauchy_quantile(p: f64, center: f64, width: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::ProbabilityOutOfRange(p));
    }
    Ok(center + width * (PI * (p - 0.5)).tan())
}

/// Natural frequencies for one population.
pub fn sample_frequencies(spec: &PopulationSpec) -> Result<Vec<f64>> {
    spec.validate("population")?;
    let n = spec.size;
    if spec.width == 0.0 {
        return Ok(vec![spec.center_freq; n]);
    }
    let freqs = match spec.sampling {
        SamplingMode::DeterministicQuantiles => {
            // (i - 1/2)/N - 1/2 written over an integer numerator so the grid is
            // exactly antisymmetric about the median.
            let denom = 2.0 * n as f64;
            (1..=n)
                .map(|i| {
                    let offset = (2 * i) as f64 - 1.0 - n as f64;
                    spec.center_freq + spec.width * (PI * offset / denom).tan()
                })
                .collect()
        }
        SamplingMode::SeededRandom { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n)
                .map(|_| {
                    let u = open_unit(&mut rng);
                    spec.center_freq + spec.width * (PI * (u - 0.5)).tan()
                })
                .collect()
        }
    };
    Ok(freqs)
}

fn open_unit<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// Draws `n` phases from the wrapped-Cauchy law whose order parameter has
/// magnitude `concentration` and phase `center`. Output wrapped to `[0, 2π)`.
pub fn sample_phases(n: usize, concentration: f64, center: f64, seed: u64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&concentration) {
        return Err(Error::invalid(
            "concentration",
            "concentration must lie in [0, 1]",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Möbius image of a uniform angle: tan(δ/2) = (1-r)/(1+r) tan(u/2).
    let contraction = (1.0 - concentration) / (1.0 + concentration);
    Ok((0..n)
        .map(|_| {
            let u = open_unit(&mut rng);
            let delta = 2.0 * (contraction * (PI * (u - 0.5)).tan()).atan();
            wrap_phase(center + delta)
        })
        .collect())
}

/// Complex order parameter `(1/N) Σ e^{iθ}`.
pub fn complex_order_parameter(phases: &[f64]) -> Result<Complex64> {
    if phases.is_empty() {
        return Err(Error::EmptyInput("phase list"));
    }
    let (re, im) = phases.iter().fold((0.0, 0.0), |(re, im), &th| {
        let (s, c) = th.sin_cos();
        (re + c, im + s)
    });
    let inv_n = 1.0 / phases.len() as f64;
    Ok(Complex64::new(re * inv_n, im * inv_n))
}

pub fn order_parameter(phases: &[f64]) -> Result<OrderParameter> {
    complex_order_parameter(phases).map(OrderParameter::from_complex)
}
