//! Finite-N two-population Kuramoto network with one slowly coevolving
//! coupling, plus the general multilayer force law.
//!
//! Pairwise sums are never formed: `(1/N) Σⱼ sin(θⱼ − θᵢ + β)` equals
//! `Im(Z e^{iβ} e^{−iθᵢ})` with `Z` the complex order parameter, so one force
//! evaluation costs O(N). Phasor sums are reduced over fixed-size chunks in
//! index order, which keeps results bit-identical for any thread count.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::integrate::StepSettings;
use crate::laws::{eval_law, AdaptiveLawSpec, AdaptiveTarget};
use crate::model::{sample_frequencies, sample_phases, wrap_phase, SystemParams};
use crate::trajectory::{Sample, Trajectory};

const CHUNK: usize = 256;

/// Phases of both populations, the adaptive coupling value and fast time.
/// Phases are kept unwrapped.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    pub phases1: Vec<f64>,
    pub phases2: Vec<f64>,
    pub adaptive_value: f64,
    pub t: f64,
}

impl NetworkState {
    /// Wrapped-Cauchy initial phases matching a mean-field initial condition:
    /// order-parameter magnitudes `rho1`, `rho2` and phase difference `psi`
    /// (mean-field sign convention).
    pub fn from_mean_field(
        params: &SystemParams,
        rho1: f64,
        psi: f64,
        rho2: f64,
        adaptive_value: f64,
        seed: u64,
    ) -> Result<Self> {
        // arg Z1 = 0 and psi = arg Z1 - arg Z2
        let phases1 = sample_phases(params.pop1.size, rho1, 0.0, seed)?;
        let phases2 = sample_phases(params.pop2.size, rho2, -psi, seed.wrapping_add(1))?;
        Ok(Self {
            phases1,
            phases2,
            adaptive_value,
            t: 0.0,
        })
    }
}

/// Coupling strengths in effect once the adaptive value is substituted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveCoupling {
    pub k1: f64,
    pub k2: f64,
    pub mu: f64,
}

impl EffectiveCoupling {
    pub fn resolve(params: &SystemParams, target: Option<AdaptiveTarget>, value: f64) -> Self {
        let c = params.coupling;
        let mut eff = Self {
            k1: c.k1,
            k2: c.k2,
            mu: c.mu,
        };
        match target {
            Some(AdaptiveTarget::Inter) => eff.mu = value,
            Some(AdaptiveTarget::Intra1) => eff.k1 = value,
            None => {}
        }
        eff
    }
}

/// Network definition: parameters and the sampled natural frequencies.
#[derive(Debug, Clone)]
pub struct Network {
    pub params: SystemParams,
    pub freqs1: Vec<f64>,
    pub freqs2: Vec<f64>,
}

impl Network {
    pub fn new(params: SystemParams) -> Result<Self> {
        let params = params.validate()?;
        let freqs1 = sample_frequencies(&params.pop1)?;
        let freqs2 = sample_frequencies(&params.pop2)?;
        Ok(Self {
            params,
            freqs1,
            freqs2,
        })
    }

    pub fn with_frequencies(params: SystemParams, freqs1: Vec<f64>, freqs2: Vec<f64>) -> Result<Self> {
        let params = params.validate()?;
        if freqs1.len() != params.pop1.size || freqs2.len() != params.pop2.size {
            return Err(Error::invalid(
                "frequencies",
                "frequency arrays must match population sizes",
            ));
        }
        Ok(Self {
            params,
            freqs1,
            freqs2,
        })
    }

    fn check_state(&self, state: &NetworkState) -> Result<()> {
        if state.phases1.len() != self.freqs1.len() || state.phases2.len() != self.freqs2.len() {
            return Err(Error::invalid(
                "state",
                "phase arrays must match population sizes",
            ));
        }
        Ok(())
    }

    /// Phase velocities of both populations. With `target` set, the state's
    /// adaptive value replaces the corresponding coupling strength.
    pub fn rhs(&self, state: &NetworkState, target: Option<AdaptiveTarget>) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_state(state)?;
        let n1 = state.phases1.len();
        let n2 = state.phases2.len();
        let mut ws = Workspace::new(n1, n2);
        let eff = EffectiveCoupling::resolve(&self.params, target, state.adaptive_value);
        let mut d1 = vec![0.0; n1];
        let mut d2 = vec![0.0; n2];
        let (z1, z2) = ws.order_parameters(&state.phases1, &state.phases2, false);
        self.fill_velocities(&mut ws, eff, z1, z2, &mut d1, &mut d2, false);
        Ok((d1, d2))
    }

    #[allow(clippy::too_many_arguments)]
    fn fill_velocities(
        &self,
        ws: &mut Workspace,
        eff: EffectiveCoupling,
        z1: Complex64,
        z2: Complex64,
        d1: &mut [f64],
        d2: &mut [f64],
        parallel: bool,
    ) {
        let lag = Complex64::from_polar(1.0, self.params.coupling.phase_lag);
        let force1 = lag * (eff.k1 * z1 + eff.mu * z2);
        let force2 = lag * (eff.k2 * z2 + eff.mu * z1);
        velocities(&self.freqs1, &ws.cos1, &ws.sin1, force1, d1, parallel);
        velocities(&self.freqs2, &ws.cos2, &ws.sin2, force2, d2, parallel);
    }
}

/// `out[i] = ω[i] + Im(force · e^{-iθ[i]})` from cached cos/sin.
fn velocities(freqs: &[f64], cos: &[f64], sin: &[f64], force: Complex64, out: &mut [f64], parallel: bool) {
    let kernel = |(((o, &w), &c), &s): (((&mut f64, &f64), &f64), &f64)| {
        *o = w + force.im * c - force.re * s;
    };
    if parallel {
        out.par_iter_mut()
            .zip(freqs.par_iter())
            .zip(cos.par_iter())
            .zip(sin.par_iter())
            .with_min_len(CHUNK)
            .for_each(kernel);
    } else {
        out.iter_mut()
            .zip(freqs)
            .zip(cos)
            .zip(sin)
            .for_each(kernel);
    }
}

fn chunk_phasor_sum(phases: &[f64], cos: &mut [f64], sin: &mut [f64]) -> Complex64 {
    let mut re = 0.0;
    let mut im = 0.0;
    for ((&th, c), s) in phases.iter().zip(cos.iter_mut()).zip(sin.iter_mut()) {
        let (si, co) = th.sin_cos();
        *c = co;
        *s = si;
        re += co;
        im += si;
    }
    Complex64::new(re, im)
}

/// Order parameter of `phases`, caching cos/sin of every phase.
fn phasor_mean(phases: &[f64], cos: &mut [f64], sin: &mut [f64], parallel: bool) -> Complex64 {
    let total = if parallel {
        let partial: Vec<Complex64> = phases
            .par_chunks(CHUNK)
            .zip(cos.par_chunks_mut(CHUNK))
            .zip(sin.par_chunks_mut(CHUNK))
            .map(|((p, c), s)| chunk_phasor_sum(p, c, s))
            .collect();
        partial.into_iter().fold(Complex64::new(0.0, 0.0), |a, b| a + b)
    } else {
        phases
            .chunks(CHUNK)
            .zip(cos.chunks_mut(CHUNK))
            .zip(sin.chunks_mut(CHUNK))
            .map(|((p, c), s)| chunk_phasor_sum(p, c, s))
            .fold(Complex64::new(0.0, 0.0), |a, b| a + b)
    };
    total / phases.len() as f64
}

struct Workspace {
    cos1: Vec<f64>,
    sin1: Vec<f64>,
    cos2: Vec<f64>,
    sin2: Vec<f64>,
}

impl Workspace {
    fn new(n1: usize, n2: usize) -> Self {
        Self {
            cos1: vec![0.0; n1],
            sin1: vec![0.0; n1],
            cos2: vec![0.0; n2],
            sin2: vec![0.0; n2],
        }
    }

    fn order_parameters(&mut self, p1: &[f64], p2: &[f64], parallel: bool) -> (Complex64, Complex64) {
        (
            phasor_mean(p1, &mut self.cos1, &mut self.sin1, parallel),
            phasor_mean(p2, &mut self.cos2, &mut self.sin2, parallel),
        )
    }
}

/// Phase difference in the mean-field convention: `arg Z1 − arg Z2`.
fn raw_psi(z1: Complex64, z2: Complex64) -> f64 {
    (z1 * z2.conj()).arg()
}

fn wrap_to_pi(x: f64) -> f64 {
    let w = wrap_phase(x + std::f64::consts::PI) - std::f64::consts::PI;
    if w <= -std::f64::consts::PI {
        w + std::f64::consts::TAU
    } else {
        w
    }
}

struct Stage {
    d1: Vec<f64>,
    d2: Vec<f64>,
    dc: f64,
}

impl Stage {
    fn new(n1: usize, n2: usize) -> Self {
        Self {
            d1: vec![0.0; n1],
            d2: vec![0.0; n2],
            dc: 0.0,
        }
    }
}

struct Stepper<'a> {
    net: &'a Network,
    law: &'a AdaptiveLawSpec,
    ws: Workspace,
    parallel: bool,
}

impl Stepper<'_> {
    /// Evaluates the full vector field; returns the order parameters of the
    /// evaluated state.
    fn eval(&mut self, p1: &[f64], p2: &[f64], c: f64, t: f64, out: &mut Stage) -> (Complex64, Complex64) {
        let (z1, z2) = self.ws.order_parameters(p1, p2, self.parallel);
        let eff = EffectiveCoupling::resolve(&self.net.params, Some(self.law.target), c);
        self.net
            .fill_velocities(&mut self.ws, eff, z1, z2, &mut out.d1, &mut out.d2, self.parallel);
        out.dc = eval_law(self.law, z1.norm(), raw_psi(z1, z2), c, t);
        (z1, z2)
    }
}

fn axpy_into(out: &mut [f64], y: &[f64], h: f64, k: &[f64]) {
    for ((o, &a), &b) in out.iter_mut().zip(y).zip(k) {
        *o = a + h * b;
    }
}

fn network_sample(t: f64, z1: Complex64, z2: Complex64, psi: f64, c: f64) -> Sample {
    Sample {
        t,
        r1: z1.norm().min(1.0),
        phi1: wrap_phase(-z1.arg()),
        r2: z2.norm().min(1.0),
        phi2: wrap_phase(-z2.arg()),
        psi,
        coupling: c,
    }
}

/// Fixed-step RK4 integration of the phases together with the adaptive
/// coupling. The law sees `R1` and the order-parameter phase difference of
/// the network in place of the mean-field `rho1` and `psi`.
pub fn integrate_network(
    net: &Network,
    law: &AdaptiveLawSpec,
    init: &NetworkState,
    settings: &StepSettings,
) -> Result<Trajectory> {
    let settings = settings.validate()?;
    let law = law.validate()?;
    net.check_state(init)?;
    if settings.threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(settings.threads)
            .build()
            .map_err(|e| Error::invalid("integrator.threads", e.to_string()))?;
        pool.install(|| run_network(net, &law, init, &settings, true))
    } else {
        run_network(net, &law, init, &settings, false)
    }
}

fn run_network(
    net: &Network,
    law: &AdaptiveLawSpec,
    init: &NetworkState,
    settings: &StepSettings,
    parallel: bool,
) -> Result<Trajectory> {
    let n1 = init.phases1.len();
    let n2 = init.phases2.len();
    let dt = settings.dt;
    let n_steps = settings.n_steps();
    let t0 = init.t;

    let mut p1 = init.phases1.clone();
    let mut p2 = init.phases2.clone();
    let mut c = init.adaptive_value;
    let mut tmp1 = vec![0.0; n1];
    let mut tmp2 = vec![0.0; n2];
    let mut k = [
        Stage::new(n1, n2),
        Stage::new(n1, n2),
        Stage::new(n1, n2),
        Stage::new(n1, n2),
    ];
    let mut stepper = Stepper {
        net,
        law,
        ws: Workspace::new(n1, n2),
        parallel,
    };

    let mut traj = Trajectory::with_capacity(n_steps / settings.record_stride + 2);
    let mut psi_unwrapped = f64::NAN;

    for step in 0..=n_steps {
        let t = t0 + settings.time(step);
        let (z1, z2) = stepper.eval(&p1, &p2, c, t, &mut k[0]);
        if !(z1.re.is_finite() && z1.im.is_finite() && z2.re.is_finite() && z2.im.is_finite() && c.is_finite()) {
            return Err(Error::NonFinite {
                t,
                what: "network phases or coupling".into(),
            });
        }
        let raw = raw_psi(z1, z2);
        psi_unwrapped = if psi_unwrapped.is_nan() {
            wrap_to_pi(raw)
        } else {
            psi_unwrapped + wrap_to_pi(raw - psi_unwrapped)
        };
        if settings.records(step, n_steps) {
            traj.push(network_sample(t, z1, z2, psi_unwrapped, c));
        }
        if step == n_steps {
            break;
        }

        let (k1, rest) = k.split_at_mut(1);
        let (k2, rest) = rest.split_at_mut(1);
        let (k3, k4) = rest.split_at_mut(1);
        let (k1, k2, k3, k4) = (&k1[0], &mut k2[0], &mut k3[0], &mut k4[0]);

        axpy_into(&mut tmp1, &p1, 0.5 * dt, &k1.d1);
        axpy_into(&mut tmp2, &p2, 0.5 * dt, &k1.d2);
        stepper.eval(&tmp1, &tmp2, c + 0.5 * dt * k1.dc, t + 0.5 * dt, k2);

        axpy_into(&mut tmp1, &p1, 0.5 * dt, &k2.d1);
        axpy_into(&mut tmp2, &p2, 0.5 * dt, &k2.d2);
        stepper.eval(&tmp1, &tmp2, c + 0.5 * dt * k2.dc, t + 0.5 * dt, k3);

        axpy_into(&mut tmp1, &p1, dt, &k3.d1);
        axpy_into(&mut tmp2, &p2, dt, &k3.d2);
        stepper.eval(&tmp1, &tmp2, c + dt * k3.dc, t + dt, k4);

        let w = dt / 6.0;
        for (i, th) in p1.iter_mut().enumerate() {
            *th += w * (k1.d1[i] + 2.0 * k2.d1[i] + 2.0 * k3.d1[i] + k4.d1[i]);
        }
        for (i, th) in p2.iter_mut().enumerate() {
            *th += w * (k1.d2[i] + 2.0 * k2.d2[i] + 2.0 * k3.d2[i] + k4.d2[i]);
        }
        c += w * (k1.dc + 2.0 * k2.dc + 2.0 * k3.dc + k4.dc);
        traj.diagnostics.steps += 1;
    }
    Ok(traj)
}

/// Phase velocities of the general `M`-layer network
/// `θ̇ᵢ^σ = ωᵢ^σ + Σ_σ' (k_σσ'/N_σ') Σⱼ sin(θⱼ^σ' − θᵢ^σ + β_σσ')`, in O(ΣN).
pub fn multilayer_rhs(
    phases: &[Vec<f64>],
    freqs: &[Vec<f64>],
    coupling: &[Vec<f64>],
    lag: &[Vec<f64>],
) -> Result<Vec<Vec<f64>>> {
    let m = phases.len();
    if m == 0 {
        return Err(Error::EmptyInput("population list"));
    }
    let square = |mat: &[Vec<f64>]| mat.len() == m && mat.iter().all(|row| row.len() == m);
    if freqs.len() != m || !square(coupling) || !square(lag) {
        return Err(Error::invalid("multilayer", "dimension mismatch"));
    }
    let mut cos: Vec<Vec<f64>> = phases.iter().map(|p| vec![0.0; p.len()]).collect();
    let mut sin = cos.clone();
    let mut z = Vec::with_capacity(m);
    for s in 0..m {
        if phases[s].is_empty() || phases[s].len() != freqs[s].len() {
            return Err(Error::invalid("multilayer", "population size mismatch"));
        }
        z.push(phasor_mean(&phases[s], &mut cos[s], &mut sin[s], false));
    }
    Ok((0..m)
        .map(|s| {
            let force = (0..m).fold(Complex64::new(0.0, 0.0), |acc, q| {
                acc + coupling[s][q] * Complex64::from_polar(1.0, lag[s][q]) * z[q]
            });
            let mut out = vec![0.0; phases[s].len()];
            velocities(&freqs[s], &cos[s], &sin[s], force, &mut out, false);
            out
        })
        .collect())
}
