//! Slow coevolution laws for the adaptive coupling.
//!
//! A law sees only macroscopic inputs: the order-parameter magnitude of the
//! first population, the phase difference between the two order parameters,
//! the current coupling value and fast time. The value returned by
//! [`eval_law`] already carries the time-scale factor `epsilon`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which coupling strength evolves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdaptiveTarget {
    /// Intercoupling `mu`.
    Inter,
    /// Intracoupling `k1` of the first population.
    Intra1,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum LawKind {
    Constant,
    /// `-c + gamma - eta * rho1`
    LinearFeedback { gamma: f64, eta: f64 },
    /// `amplitude_scale * cos(drive_freq * t)`
    PeriodicDrive { amplitude_scale: f64, drive_freq: f64 },
    /// `sign * cos(psi)`, `sign` is +1 or -1.
    PhaseFeedback { sign: i8 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptiveLawSpec {
    pub target: AdaptiveTarget,
    pub epsilon: f64,
    pub kind: LawKind,
}

impl AdaptiveLawSpec {
    pub fn new(target: AdaptiveTarget, epsilon: f64, kind: LawKind) -> Self {
        Self {
            target,
            epsilon,
            kind,
        }
    }

    pub fn linear_feedback(target: AdaptiveTarget, epsilon: f64, gamma: f64, eta: f64) -> Self {
        Self::new(target, epsilon, LawKind::LinearFeedback { gamma, eta })
    }

    pub fn validate(self) -> Result<Self> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::invalid("law.epsilon", "epsilon must be positive"));
        }
        let finite = match self.kind {
            LawKind::Constant => true,
            LawKind::LinearFeedback { gamma, eta } => gamma.is_finite() && eta.is_finite(),
            LawKind::PeriodicDrive {
                amplitude_scale,
                drive_freq,
            } => amplitude_scale.is_finite() && drive_freq.is_finite(),
            LawKind::PhaseFeedback { sign } => {
                if sign != 1 && sign != -1 {
                    return Err(Error::invalid("law.kind.sign", "sign must be +1 or -1"));
                }
                true
            }
        };
        if !finite {
            return Err(Error::invalid("law.kind", "law parameters must be finite"));
        }
        Ok(self)
    }

    /// Laws that do not depend on `t`.
    pub fn is_autonomous(&self) -> bool {
        !matches!(self.kind, LawKind::PeriodicDrive { .. })
    }
}

/// Time derivative of the adaptive coupling.
pub fn eval_law(spec: &AdaptiveLawSpec, rho1: f64, psi: f64, coupling: f64, t: f64) -> f64 {
    let f = match spec.kind {
        LawKind::Constant => 0.0,
        LawKind::LinearFeedback { gamma, eta } => -coupling + gamma - eta * rho1,
        LawKind::PeriodicDrive {
            amplitude_scale,
            drive_freq,
        } => amplitude_scale * (drive_freq * t).cos(),
        LawKind::PhaseFeedback { sign } => f64::from(sign) * psi.cos(),
    };
    spec.epsilon * f
}

/// Zero set of a law in the `(rho1, coupling)` plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Nullcline {
    /// `coupling = gamma - eta * rho1`
    Linear { gamma: f64, eta: f64 },
    /// The law vanishes everywhere.
    Flat,
    /// No autonomous curve in the `(rho1, coupling)` plane.
    Unavailable,
}

impl Nullcline {
    pub fn value(&self, rho1: f64) -> Option<f64> {
        match *self {
            Nullcline::Linear { gamma, eta } => Some(gamma - eta * rho1),
            _ => None,
        }
    }

    pub fn slope(&self) -> Option<f64> {
        match *self {
            Nullcline::Linear { eta, .. } => Some(-eta),
            _ => None,
        }
    }
}

pub fn nullcline(spec: &AdaptiveLawSpec) -> Nullcline {
    match spec.kind {
        LawKind::LinearFeedback { gamma, eta } => Nullcline::Linear { gamma, eta },
        LawKind::Constant => Nullcline::Flat,
        LawKind::PeriodicDrive { .. } | LawKind::PhaseFeedback { .. } => Nullcline::Unavailable,
    }
}
