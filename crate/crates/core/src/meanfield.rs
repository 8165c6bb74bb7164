//! Ott-Antonsen mean fields: the general `M`-population form, the full
//! two-population system in `(ρ₁, ρ₂, ψ)` and the reduced fast-slow systems
//! with the second population pinned at `ρ₂ = 1`.
//!
//! Phases follow the convention `z = ρ e^{-iφ}` and `ψ = φ₂ − φ₁`,
//! `Ω = ω₂ − ω₁`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{rk4_step, StepSettings};
use crate::laws::{eval_law, AdaptiveLawSpec, AdaptiveTarget};
use crate::model::{wrap_phase, SystemParams};
use crate::network::EffectiveCoupling;
use crate::trajectory::{Sample, Trajectory};

/// Below this magnitude the phase equation is frozen.
pub const RHO_FLOOR: f64 = 1e-6;
/// Upper clamp for `ρ₁` during integration.
pub const RHO_CEILING: f64 = 1.0 - 1e-12;

/// State of the two-population mean field. For the reduced systems `rho2`
/// is pinned at 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldState {
    pub rho1: f64,
    /// Unwrapped.
    pub psi: f64,
    pub rho2: f64,
    pub adaptive_value: f64,
    pub t: f64,
}

impl MeanFieldState {
    pub fn reduced(rho1: f64, psi: f64, adaptive_value: f64) -> Self {
        Self {
            rho1,
            psi,
            rho2: 1.0,
            adaptive_value,
            t: 0.0,
        }
    }
}

/// Time derivatives of a two-population mean-field state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFieldDerivs {
    pub rho1: f64,
    pub rho2: f64,
    pub psi: f64,
    pub coupling: f64,
    /// The `ψ` equation was frozen because a magnitude fell below
    /// [`RHO_FLOOR`].
    pub floored: bool,
}

/// Which two-population mean field to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeanFieldSystem {
    FullTwoPop,
    ReducedInter,
    ReducedIntra,
}

impl MeanFieldSystem {
    /// The adaptive target a reduced system is built around, if fixed.
    pub fn required_target(self) -> Option<AdaptiveTarget> {
        match self {
            MeanFieldSystem::FullTwoPop => None,
            MeanFieldSystem::ReducedInter => Some(AdaptiveTarget::Inter),
            MeanFieldSystem::ReducedIntra => Some(AdaptiveTarget::Intra1),
        }
    }
}

/// Full two-population system: both magnitudes and the phase difference,
/// with the law's target coupling taken from `state.adaptive_value`.
pub fn full_two_pop_rhs(state: &MeanFieldState, params: &SystemParams, law: &AdaptiveLawSpec) -> MeanFieldDerivs {
    let eff = EffectiveCoupling::resolve(params, Some(law.target), state.adaptive_value);
    let (r1, r2, psi) = (state.rho1, state.rho2, state.psi);
    let d1 = params.pop1.width;
    let d2 = params.pop2.width;
    let (s, c) = psi.sin_cos();
    let rho1 = -d1 * r1 + 0.5 * (1.0 - r1 * r1) * (eff.k1 * r1 + eff.mu * r2 * c);
    let rho2 = -d2 * r2 + 0.5 * (1.0 - r2 * r2) * (eff.k2 * r2 + eff.mu * r1 * c);
    let floored = r1 < RHO_FLOOR || r2 < RHO_FLOOR;
    let dpsi = if floored {
        0.0
    } else {
        let num = r1 * r1 + r2 * r2 + 2.0 * r1 * r1 * r2 * r2;
        -params.omega_diff() - 0.5 * eff.mu * num / (r1 * r2) * s
    };
    MeanFieldDerivs {
        rho1,
        rho2,
        psi: dpsi,
        coupling: eval_law(law, r1, psi, state.adaptive_value, state.t),
        floored,
    }
}

/// Fast field shared by both reduced systems: `(ρ̇₁, ψ̇)` for given `k1`, `mu`.
pub(crate) fn reduced_fast_field(rho1: f64, psi: f64, k1: f64, mu: f64, delta1: f64, omega: f64) -> (f64, f64) {
    let (s, c) = psi.sin_cos();
    let drho = -delta1 * rho1 + 0.5 * (1.0 - rho1 * rho1) * (k1 * rho1 + mu * c);
    // may be non-finite at rho1 = 0; callers apply the floor
    let dpsi = -omega - 0.5 * mu * (3.0 * rho1 * rho1 + 1.0) / rho1 * s;
    (drho, dpsi)
}

fn reduced_rhs(state: &MeanFieldState, params: &SystemParams, law: &AdaptiveLawSpec, target: AdaptiveTarget) -> MeanFieldDerivs {
    let eff = EffectiveCoupling::resolve(params, Some(target), state.adaptive_value);
    let floored = state.rho1 < RHO_FLOOR;
    let (drho, dpsi) = reduced_fast_field(
        state.rho1,
        state.psi,
        eff.k1,
        eff.mu,
        params.pop1.width,
        params.omega_diff(),
    );
    let dpsi = if floored { 0.0 } else { dpsi };
    MeanFieldDerivs {
        rho1: drho,
        rho2: 0.0,
        psi: dpsi,
        coupling: eval_law(law, state.rho1, state.psi, state.adaptive_value, state.t),
        floored,
    }
}

/// Reduced system with adaptive intercoupling; `state.adaptive_value` is `μ`.
pub fn reduced_inter_rhs(state: &MeanFieldState, params: &SystemParams, law: &AdaptiveLawSpec) -> MeanFieldDerivs {
    reduced_rhs(state, params, law, AdaptiveTarget::Inter)
}

/// Reduced system with adaptive intracoupling; `state.adaptive_value` is `k₁`.
pub fn reduced_intra_rhs(state: &MeanFieldState, params: &SystemParams, law: &AdaptiveLawSpec) -> MeanFieldDerivs {
    reduced_rhs(state, params, law, AdaptiveTarget::Intra1)
}

/// Dispatches to the right-hand side of `system`.
pub fn meanfield_rhs(
    system: MeanFieldSystem,
    state: &MeanFieldState,
    params: &SystemParams,
    law: &AdaptiveLawSpec,
) -> MeanFieldDerivs {
    match system {
        MeanFieldSystem::FullTwoPop => full_two_pop_rhs(state, params, law),
        MeanFieldSystem::ReducedInter => reduced_inter_rhs(state, params, law),
        MeanFieldSystem::ReducedIntra => reduced_intra_rhs(state, params, law),
    }
}

/// Integrates a two-population mean field with RK4.
///
/// `ρ₁` is clamped to `[0, 1 - 1e-12]` and `ρ₂` to `[0, 1]` after each step;
/// clamps and floor events are counted in the trajectory diagnostics. The
/// reduced systems record `R2 = 1`. Both record `phi1 = 0` (frame of the
/// first population) and `phi2 = ψ` wrapped.
pub fn integrate_meanfield(
    system: MeanFieldSystem,
    params: &SystemParams,
    law: &AdaptiveLawSpec,
    init: &MeanFieldState,
    settings: &StepSettings,
) -> Result<Trajectory> {
    let params = params.validate()?;
    let law = law.validate()?;
    let settings = settings.validate()?;
    if let Some(target) = system.required_target() {
        if law.target != target {
            return Err(Error::invalid(
                "law.target",
                format!("{system:?} requires target {target:?}"),
            ));
        }
    }
    let pinned = system != MeanFieldSystem::FullTwoPop;
    for (name, v) in [("initial.rho1", init.rho1), ("initial.rho2", init.rho2)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::invalid(name, "order parameter must lie in [0, 1]"));
        }
    }
    if !(init.psi.is_finite() && init.adaptive_value.is_finite()) {
        return Err(Error::invalid("initial", "initial state must be finite"));
    }

    let dt = settings.dt;
    let n_steps = settings.n_steps();
    let t0 = init.t;
    let mut y = [
        init.rho1.min(RHO_CEILING),
        if pinned { 1.0 } else { init.rho2 },
        init.psi,
        init.adaptive_value,
    ];
    let mut traj = Trajectory::with_capacity(n_steps / settings.record_stride + 2);
    let mut floor_count = 0u64;
    let mut clamp_count = 0u64;

    let mut field = |t: f64, y: &[f64; 4]| {
        let state = MeanFieldState {
            rho1: y[0],
            psi: y[2],
            rho2: y[1],
            adaptive_value: y[3],
            t,
        };
        let d = meanfield_rhs(system, &state, &params, &law);
        if d.floored {
            floor_count += 1;
        }
        [d.rho1, if pinned { 0.0 } else { d.rho2 }, d.psi, d.coupling]
    };

    for step in 0..=n_steps {
        let t = t0 + settings.time(step);
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                t,
                what: "mean-field state".into(),
            });
        }
        if settings.records(step, n_steps) {
            traj.push(Sample {
                t,
                r1: y[0],
                phi1: 0.0,
                r2: y[1],
                phi2: wrap_phase(y[2]),
                psi: y[2],
                coupling: y[3],
            });
        }
        if step == n_steps {
            break;
        }
        y = rk4_step(&mut field, t, &y, dt);
        if y[0] > RHO_CEILING || y[0] < 0.0 {
            y[0] = y[0].clamp(0.0, RHO_CEILING);
            clamp_count += 1;
        }
        if y[1] > 1.0 || y[1] < 0.0 {
            y[1] = y[1].clamp(0.0, 1.0);
            clamp_count += 1;
        }
        traj.diagnostics.steps += 1;
    }
    traj.diagnostics.floor_count = floor_count;
    traj.diagnostics.clamp_count = clamp_count;
    Ok(traj)
}

/// Per-population magnitudes and phases of the general `M`-population mean
/// field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralMeanFieldState {
    pub rho: Vec<f64>,
    pub phi: Vec<f64>,
}

/// Parameters of the general `M`-population mean field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralSystem {
    /// `coupling[σ][σ']` is `k_σσ'`.
    pub coupling: Vec<Vec<f64>>,
    pub widths: Vec<f64>,
    pub freqs: Vec<f64>,
}

impl GeneralSystem {
    fn check(&self, state: &GeneralMeanFieldState) -> Result<usize> {
        let m = self.widths.len();
        if m == 0 {
            return Err(Error::EmptyInput("population list"));
        }
        let ok = self.freqs.len() == m
            && self.coupling.len() == m
            && self.coupling.iter().all(|r| r.len() == m)
            && state.rho.len() == m
            && state.phi.len() == m;
        if !ok {
            return Err(Error::invalid("general mean field", "dimension mismatch"));
        }
        Ok(m)
    }
}

/// `(ρ̇, φ̇)` of the general form. Returns the derivatives and the number of
/// populations whose phase equation was frozen (`freeze`) or, without
/// `freeze`, an error for the first singular one.
fn general_rhs_inner(
    state: &GeneralMeanFieldState,
    sys: &GeneralSystem,
    freeze: bool,
) -> Result<(Vec<f64>, Vec<f64>, u64)> {
    let m = sys.check(state)?;
    let mut drho = vec![0.0; m];
    let mut dphi = vec![0.0; m];
    let mut frozen = 0;
    for s in 0..m {
        let rs = state.rho[s];
        let mut cos_sum = 0.0;
        let mut sin_sum = 0.0;
        for q in 0..m {
            let (sn, cs) = (state.phi[q] - state.phi[s]).sin_cos();
            cos_sum += sys.coupling[s][q] * state.rho[q] * cs;
            sin_sum += sys.coupling[s][q] * state.rho[q] * sn;
        }
        drho[s] = -sys.widths[s] * rs + 0.5 * (1.0 - rs * rs) * cos_sum;
        dphi[s] = -sys.freqs[s];
        if sin_sum == 0.0 {
            continue;
        }
        if rs < RHO_FLOOR {
            if freeze {
                frozen += 1;
                continue;
            }
            return Err(Error::PhaseSingularity {
                population: s + 1,
                rho: rs,
            });
        }
        dphi[s] += 0.5 * (rs * rs + 1.0) / rs * sin_sum;
    }
    Ok((drho, dphi, frozen))
}

/// Right-hand side of the general `M`-population real mean field.
pub fn general_meanfield_rhs(state: &GeneralMeanFieldState, sys: &GeneralSystem) -> Result<(Vec<f64>, Vec<f64>)> {
    general_rhs_inner(state, sys, false).map(|(r, p, _)| (r, p))
}

/// RK4 integration of the general mean field with constant couplings.
/// Records populations 1 and 2 (population 1 twice when `M = 1`); the
/// coupling column holds `k_12`.
pub fn integrate_general_meanfield(
    sys: &GeneralSystem,
    init: &GeneralMeanFieldState,
    settings: &StepSettings,
) -> Result<Trajectory> {
    let settings = settings.validate()?;
    let m = sys.check(init)?;
    let second = if m > 1 { 1 } else { 0 };
    let n_steps = settings.n_steps();
    let dt = settings.dt;
    let mut state = init.clone();
    let mut traj = Trajectory::with_capacity(n_steps / settings.record_stride + 2);

    let eval = |s: &GeneralMeanFieldState, frozen: &mut u64| -> Result<(Vec<f64>, Vec<f64>)> {
        let (r, p, f) = general_rhs_inner(s, sys, true)?;
        *frozen += f;
        Ok((r, p))
    };
    let shifted = |base: &GeneralMeanFieldState, h: f64, d: &(Vec<f64>, Vec<f64>)| GeneralMeanFieldState {
        rho: base.rho.iter().zip(&d.0).map(|(a, b)| a + h * b).collect(),
        phi: base.phi.iter().zip(&d.1).map(|(a, b)| a + h * b).collect(),
    };

    for step in 0..=n_steps {
        let t = settings.time(step);
        if state.rho.iter().chain(&state.phi).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                t,
                what: "general mean-field state".into(),
            });
        }
        if settings.records(step, n_steps) {
            traj.push(Sample {
                t,
                r1: state.rho[0],
                phi1: wrap_phase(state.phi[0]),
                r2: state.rho[second],
                phi2: wrap_phase(state.phi[second]),
                psi: state.phi[second] - state.phi[0],
                coupling: sys.coupling[0][second],
            });
        }
        if step == n_steps {
            break;
        }
        let mut frozen = 0;
        let k1 = eval(&state, &mut frozen)?;
        let k2 = eval(&shifted(&state, 0.5 * dt, &k1), &mut frozen)?;
        let k3 = eval(&shifted(&state, 0.5 * dt, &k2), &mut frozen)?;
        let k4 = eval(&shifted(&state, dt, &k3), &mut frozen)?;
        for i in 0..m {
            state.rho[i] += dt / 6.0 * (k1.0[i] + 2.0 * k2.0[i] + 2.0 * k3.0[i] + k4.0[i]);
            state.phi[i] += dt / 6.0 * (k1.1[i] + 2.0 * k2.1[i] + 2.0 * k3.1[i] + k4.1[i]);
            if state.rho[i] > RHO_CEILING || state.rho[i] < 0.0 {
                state.rho[i] = state.rho[i].clamp(0.0, RHO_CEILING);
                traj.diagnostics.clamp_count += 1;
            }
        }
        traj.diagnostics.floor_count += frozen;
        traj.diagnostics.steps += 1;
    }
    Ok(traj)
}
