use std::path::{Path, PathBuf};

use chimera_core::gspt::{FastSlowSystem, RhoGrid, DEFAULT_TOL_H};
use chimera_core::laws::AdaptiveTarget;
use chimera_core::signal::{PatternThresholds, Smoothing};
use chimera_core::{AdaptiveLawSpec, MeanFieldSystem, StepSettings, SystemParams};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Mean-field initial condition; network phases are synthesized from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConditions {
    pub rho1: f64,
    pub psi: f64,
    /// Initial value of the adaptive coupling.
    pub coupling: f64,
    #[serde(default = "one")]
    pub rho2: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

fn default_tol_h() -> f64 {
    DEFAULT_TOL_H
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub params: SystemParams,
    pub law: AdaptiveLawSpec,
    pub initial: InitialConditions,
    /// Defaults to the reduced system matching the law's target.
    #[serde(default)]
    pub meanfield_system: Option<MeanFieldSystem>,
    #[serde(default)]
    pub integrator: StepSettings,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub filter: Smoothing,
    #[serde(default)]
    pub classifier: PatternThresholds,
    #[serde(default)]
    pub grid: RhoGrid,
    #[serde(default = "default_tol_h")]
    pub tol_h: f64,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub dt: Option<f64>,
    pub t_final: Option<f64>,
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str::<RunConfig>(text)
            .map_err(|e| CliError::Config(format!("config: {e}")))?
            .resolve()
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("reading {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn apply(mut self, o: &Overrides) -> Result<Self, CliError> {
        if let Some(out) = &o.out {
            self.output.dir = out.clone();
        }
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(dt) = o.dt {
            self.integrator.dt = dt;
        }
        if let Some(t) = o.t_final {
            self.integrator.t_final = t;
        }
        if let Some(n) = o.threads {
            self.integrator.threads = n;
        }
        self.resolve()
    }

    /// Validates every section and fills in derived defaults.
    pub fn resolve(mut self) -> Result<Self, CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.params = self.params.validate()?;
        self.law = self.law.validate()?;
        self.integrator = self.integrator.validate()?;
        self.grid = self.grid.validate()?;
        let sys = self.meanfield_system.unwrap_or(match self.law.target {
            AdaptiveTarget::Inter => MeanFieldSystem::ReducedInter,
            AdaptiveTarget::Intra1 => MeanFieldSystem::ReducedIntra,
        });
        if let Some(t) = sys.required_target() {
            if t != self.law.target {
                return Err(CliError::Config(format!(
                    "meanfield_system {sys:?} does not match law target {:?}",
                    self.law.target
                )));
            }
        }
        self.meanfield_system = Some(sys);
        let init = &self.initial;
        for (name, v) in [("initial.rho1", init.rho1), ("initial.rho2", init.rho2)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(CliError::Config(format!("{name} must lie in [0, 1]")));
            }
        }
        if !(init.psi.is_finite() && init.coupling.is_finite()) {
            return Err(CliError::Config("initial state must be finite".into()));
        }
        if self.filter.window % 2 == 0 || self.filter.order >= self.filter.window {
            return Err(CliError::Config(
                "filter.window must be odd and larger than filter.order".into(),
            ));
        }
        if !(self.tol_h.is_finite() && self.tol_h >= 0.0) {
            return Err(CliError::Config("tol_h must be non-negative".into()));
        }
        if !(0.0..1.0).contains(&self.classifier.transient_fraction) {
            return Err(CliError::Config("classifier.transient_fraction must lie in [0, 1)".into()));
        }
        Ok(self)
    }

    pub fn meanfield_system(&self) -> MeanFieldSystem {
        self.meanfield_system.unwrap_or(MeanFieldSystem::FullTwoPop)
    }

    pub fn fast_slow_system(&self) -> FastSlowSystem {
        match self.law.target {
            AdaptiveTarget::Inter => FastSlowSystem::Inter,
            AdaptiveTarget::Intra1 => FastSlowSystem::Intra,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

/// Maps short parameter names to dotted config paths.
pub fn axis_path(axis: &str) -> &str {
    match axis {
        "k1" => "params.coupling.k1",
        "k2" => "params.coupling.k2",
        "mu" => "params.coupling.mu",
        "phase_lag" => "params.coupling.phase_lag",
        "delta1" => "params.pop1.width",
        "delta2" => "params.pop2.width",
        "omega1" => "params.pop1.center_freq",
        "omega2" => "params.pop2.center_freq",
        "n1" => "params.pop1.size",
        "n2" => "params.pop2.size",
        "epsilon" => "law.epsilon",
        "gamma" => "law.kind.gamma",
        "eta" => "law.kind.eta",
        "dt" => "integrator.dt",
        "t_final" => "integrator.t_final",
        other => other,
    }
}

/// Copy of `base` with the numeric field at `axis` set to `value`.
pub fn with_axis_value(base: &RunConfig, axis: &str, value: f64) -> Result<RunConfig, CliError> {
    let path = axis_path(axis);
    let mut json = base.to_json();
    let mut slot = &mut json;
    for key in path.split('.') {
        slot = slot
            .get_mut(key)
            .ok_or_else(|| CliError::Config(format!("unknown sweep axis '{axis}'")))?;
    }
    *slot = match slot {
        serde_json::Value::Number(n) if n.is_u64() || n.is_i64() => {
            if value.fract() != 0.0 || value < 0.0 {
                return Err(CliError::Config(format!("axis '{axis}' needs a non-negative integer")));
            }
            serde_json::Value::from(value as u64)
        }
        serde_json::Value::Number(_) => serde_json::Number::from_f64(value)
            .map(serde_json::Value::Number)
            .ok_or_else(|| CliError::Config(format!("non-finite sweep value {value}")))?,
        _ => return Err(CliError::Config(format!("axis '{axis}' is not a numeric field"))),
    };
    serde_json::from_value::<RunConfig>(json)
        .map_err(|e| CliError::Config(format!("config: {e}")))?
        .resolve()
}
