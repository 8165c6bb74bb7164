//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line for
//! each, and exits non-zero if any fails.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use chimera_cli::commands::{compare, run_meanfield, run_network, CompareSummary};
use chimera_cli::RunConfig;
use chimera_core::gspt::{
    chimera_equilibrium, classify, connectivity_check, fast_field, fold_points, inter_jacobian, inter_manifold,
    intra_jacobian, intra_manifold, stability_report, Branch, FastSlowSystem, RhoGrid, Stability, DEFAULT_TOL_H,
};
use chimera_core::laws::{AdaptiveTarget, LawKind};
use chimera_core::meanfield::{integrate_meanfield, MeanFieldState, MeanFieldSystem};
use chimera_core::signal::{oscillation_metrics, savitzky_golay, PatternKind};
use chimera_core::{
    AdaptiveLawSpec, CouplingConfig, Network, NetworkState, PopulationSpec, StepSettings, SystemParams, Trajectory,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// AC-1
const AC1_MF_TOL: f64 = 1e-3;
const AC1_NET_TOL: f64 = 0.05;
const R2_SYNC_MIN: f64 = 0.9;
// AC-2
const AC2_RHO: f64 = 0.196;
const AC2_MF_TOL: f64 = 2e-3;
const AC2_NET_TOL: f64 = 0.05;
// AC-3
const AC3_PERIOD: f64 = 2.0 * PI / 0.02;
const AC3_PERIOD_REL: f64 = 0.05;
const AC3_ENVELOPE: (f64, f64) = (0.09, 0.71);
const AC3_ENVELOPE_TOL: f64 = 0.05;
// AC-4
const AC4_FOLDS: [f64; 2] = [0.85823, 0.97980];
const AC4_FOLD_TOL: f64 = 1e-4;
const AC4_RANDOM_CASES: usize = 200;
// AC-5
const AC5_N: usize = 200;
const AC5_STATES: usize = 100;
const AC5_RHS_TOL: f64 = 1e-10;
const AC5_JAC_POINTS: usize = 1000;
const AC5_FD_STEP: f64 = 1e-5;
const AC5_JAC_TOL: f64 = 1e-6;
const AC5_RESIDUAL_TOL: f64 = 1e-10;
const AC5_PROP3_PAIRS: usize = 1000;
// AC-6
const AC6_PIN_DRIFT: f64 = 1e-9;
// AC-7
const AC7_T_FINAL: f64 = 5000.0;
const AC7_PERIOD_AGREE: f64 = 0.05;
const AC7_NETWORK_T: f64 = 300.0;

struct Gate {
    id: &'static str,
    title: &'static str,
    ok: bool,
    started: Instant,
}

impl Gate {
    fn new(id: &'static str, title: &'static str) -> Self {
        Self {
            id,
            title,
            ok: true,
            started: Instant::now(),
        }
    }

    fn check(&mut self, label: &str, ok: bool, detail: String) {
        println!("    [{}] {label}: {detail}", if ok { "ok" } else { "FAIL" });
        self.ok &= ok;
    }

    fn note(&self, text: String) {
        println!("    [info] {text}");
    }

    fn finish(self) -> bool {
        println!(
            "{} {} {} ({:.1} s)",
            self.id,
            if self.ok { "PASS" } else { "FAIL" },
            self.title,
            self.started.elapsed().as_secs_f64()
        );
        self.ok
    }
}

fn config(name: &str) -> RunConfig {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "configs", name].iter().collect();
    RunConfig::load(&path).expect("bundled config loads")
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa0 = f(a);
    assert!(fa0 * f(b) < 0.0, "oracle bracket does not straddle a root");
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (f(m) < 0.0) == (fa0 < 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn post(tr_len: usize, frac: f64) -> usize {
    (tr_len as f64 * frac).floor() as usize
}

/// Post-transient max |filtered R1 − target| of a comparison run.
fn network_band(filtered: &[f64], start: usize, target: f64) -> (f64, f64) {
    let seg = &filtered[start..];
    let max = seg.iter().fold(0.0f64, |m, v| m.max((v - target).abs()));
    let mean = seg.iter().sum::<f64>() / seg.len() as f64;
    (max, mean)
}

fn percentile(v: &[f64], q: f64) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    s[((s.len() - 1) as f64 * q).round() as usize]
}

struct StationaryRun {
    clamp_total: u64,
}

fn stationary_chimera(
    g: &mut Gate,
    cfg: &RunConfig,
    rho_star: f64,
    mf_target: f64,
    mf_tol: f64,
    net_tol: f64,
) -> StationaryRun {
    let (table, s): (_, CompareSummary) = compare(cfg).expect("compare run");
    let mf_final = s.meanfield_final.r1;
    g.check(
        "mean-field rho1(T)",
        (mf_final - mf_target).abs() <= mf_tol,
        format!("rho1({}) = {mf_final:.6}, target {mf_target:.6} ± {mf_tol:e}", s.meanfield_final.t),
    );
    let start = post(table.network.len(), cfg.classifier.transient_fraction);
    let (max_gap, mean_r1) = network_band(&table.network_r1_filtered, start, rho_star);
    let gaps: Vec<f64> = table.network_r1_filtered[start..].iter().map(|v| (v - rho_star).abs()).collect();
    g.check(
        "network filtered R1 band",
        max_gap < net_tol,
        format!(
            "post-transient max |R1_f − rho*| = {max_gap:.4} (mean R1_f {mean_r1:.4}, 99th pct gap {:.4}), tol {net_tol}",
            percentile(&gaps, 0.99)
        ),
    );
    g.check(
        "network mean R2",
        s.network_pattern.mean_r2 > R2_SYNC_MIN,
        format!("{:.4} > {R2_SYNC_MIN}", s.network_pattern.mean_r2),
    );
    g.check(
        "classification",
        s.network_pattern.kind == PatternKind::StationaryChimera && s.meanfield_pattern.kind == PatternKind::StationaryChimera,
        format!("network {:?}, mean field {:?}", s.network_pattern.kind, s.meanfield_pattern.kind),
    );
    StationaryRun {
        clamp_total: s.network_diagnostics.clamp_count + s.meanfield_diagnostics.clamp_count,
    }
}

fn ac1(clamps: &mut u64) -> bool {
    let mut g = Gate::new("AC-1", "stationary intercoupling chimera");
    let cfg = config("fig2.json");
    let p = cfg.params;
    let (d, k, om) = (p.pop1.width, p.coupling.k1, p.omega_diff());
    let manifold = |r: f64| r * ((2.0 * d / (1.0 - r * r) - k).powi(2) + (2.0 * om / (3.0 * r * r + 1.0)).powi(2)).sqrt();
    let LawKind::LinearFeedback { gamma, eta } = cfg.law.kind else { unreachable!() };
    let rho_star = bisect(|r| manifold(r) - (gamma - eta * r), 0.05, 0.5);
    g.note(format!("oracle equilibrium rho1* = {rho_star:.6}, mu* = {:.6}", gamma - eta * rho_star));
    let eq = chimera_equilibrium(&p, &cfg.law, FastSlowSystem::Inter, Branch::Plus, &cfg.grid)
        .unwrap()
        .unwrap_or_default();
    let found = eq.iter().find(|e| (e.rho1 - rho_star).abs() < 1e-6);
    g.check(
        "predicted equilibrium",
        found.is_some_and(|e| (e.rho1 - rho_star).abs() < 1e-9 && e.fast_stability == Stability::Attracting && e.slow_stable),
        format!("{found:?}"),
    );
    let run = stationary_chimera(&mut g, &cfg, rho_star, rho_star, AC1_MF_TOL, AC1_NET_TOL);
    *clamps += run.clamp_total;
    g.finish()
}

fn ac2(clamps: &mut u64) -> bool {
    let mut g = Gate::new("AC-2", "stationary intracoupling chimera");
    let cfg = config("intra.json");
    let p = cfg.params;
    let (d, mu, om) = (p.pop1.width, p.coupling.mu, p.omega_diff());
    let lower = |r: f64| 2.0 * d / (1.0 - r * r) - ((mu / r).powi(2) - (2.0 * om / (3.0 * r * r + 1.0)).powi(2)).sqrt();
    let LawKind::LinearFeedback { gamma, eta } = cfg.law.kind else { unreachable!() };
    let rho_star = bisect(|r| lower(r) - (gamma - eta * r), 0.05, 0.5);
    g.note(format!("oracle equilibrium rho1* = {rho_star:.6}, k1* = {:.6}", gamma - eta * rho_star));
    g.check(
        "oracle root near the figure value",
        (rho_star - AC2_RHO).abs() <= AC2_MF_TOL,
        format!("|{rho_star:.5} − {AC2_RHO}| ≤ {AC2_MF_TOL}"),
    );
    let run = stationary_chimera(&mut g, &cfg, rho_star, AC2_RHO, AC2_MF_TOL, AC2_NET_TOL);
    *clamps += run.clamp_total;
    g.finish()
}

fn ac3(clamps: &mut u64) -> bool {
    let mut g = Gate::new("AC-3", "breathing chimera");
    let cfg = config("fig3.json");
    let p = cfg.params;
    let (d, k, om) = (p.pop1.width, p.coupling.k1, p.omega_diff());
    let manifold = |r: f64| r * ((2.0 * d / (1.0 - r * r) - k).powi(2) + (2.0 * om / (3.0 * r * r + 1.0)).powi(2)).sqrt();
    let (mu_lo, mu_hi) = (cfg.initial.coupling - 1.0, cfg.initial.coupling + 1.0);
    let env_oracle = (bisect(|r| manifold(r) - mu_lo, 1e-3, 0.99), bisect(|r| manifold(r) - mu_hi, 1e-3, 0.99));
    g.note(format!(
        "quasi-static envelope from the manifold at mu = {mu_lo:.1}, {mu_hi:.1}: [{:.4}, {:.4}]",
        env_oracle.0, env_oracle.1
    ));
    let (table, s) = compare(&cfg).expect("compare run");
    let frac = cfg.classifier.transient_fraction;
    let start = post(table.network.len(), frac);
    let series = [
        ("mean field rho1", &table.meanfield.r1),
        ("network filtered R1", &table.network_r1_filtered),
    ];
    for (name, x) in series {
        let m = oscillation_metrics(x, &table.meanfield.times, frac).unwrap();
        let period_ok = m.period.is_some_and(|p| (p - AC3_PERIOD).abs() <= AC3_PERIOD_REL * AC3_PERIOD);
        g.check(
            &format!("{name} period"),
            period_ok,
            format!("{:?} vs {AC3_PERIOD:.2} ± {}%", m.period, AC3_PERIOD_REL * 100.0),
        );
        let seg = &x[start..];
        let lo = seg.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = seg.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        g.check(
            &format!("{name} envelope"),
            (lo - AC3_ENVELOPE.0).abs() <= AC3_ENVELOPE_TOL && (hi - AC3_ENVELOPE.1).abs() <= AC3_ENVELOPE_TOL,
            format!("[{lo:.4}, {hi:.4}] vs [{}, {}] ± {AC3_ENVELOPE_TOL}", AC3_ENVELOPE.0, AC3_ENVELOPE.1),
        );
    }
    g.check(
        "classification",
        s.network_pattern.kind == PatternKind::BreathingChimera && s.meanfield_pattern.kind == PatternKind::BreathingChimera,
        format!("network {:?}, mean field {:?}", s.network_pattern.kind, s.meanfield_pattern.kind),
    );
    *clamps += s.network_diagnostics.clamp_count + s.meanfield_diagnostics.clamp_count;
    g.finish()
}

fn params(delta1: f64, k1: f64, mu: f64, omega: f64) -> SystemParams {
    SystemParams::new(
        PopulationSpec::new(1000, 0.0, delta1),
        PopulationSpec::new(1000, omega, 0.1),
        CouplingConfig::new(k1, 9.0, mu),
    )
}

fn ac4() -> bool {
    let mut g = Gate::new("AC-4", "hyperbolicity atlas");
    let grid = RhoGrid::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let omegas = [0.0, 0.01, -0.01];

    let (mut below_bad, mut above_bad) = (0usize, 0usize);
    for i in 0..AC4_RANDOM_CASES {
        let d: f64 = rng.random_range(0.05..2.0);
        let k = loop {
            let k: f64 = rng.random_range(-2.0..6.0);
            if (k - 2.0 * d).abs() > 0.05 {
                break k;
            }
        };
        let p = params(d, k, 0.0, omegas[i % 3]);
        let rep = stability_report(&p, FastSlowSystem::Inter, &grid, DEFAULT_TOL_H).unwrap();
        let all_attracting = rep.grid.iter().all(|s| s.stability == Stability::Attracting);
        if k < 2.0 * d && !all_attracting {
            below_bad += 1;
        }
        if k > 2.0 * d && all_attracting {
            above_bad += 1;
        }
    }
    g.check(
        "k1 < 2 delta1 gives an attracting grid",
        below_bad == 0,
        format!("{below_bad} violations in {AC4_RANDOM_CASES} random cases"),
    );
    g.check(
        "k1 > 2 delta1 gives non-attracting samples",
        above_bad == 0,
        format!("{above_bad} violations"),
    );

    let p = params(0.1, 5.0, 0.0, 0.0);
    let folds = fold_points(&p, FastSlowSystem::Inter, &grid).unwrap();
    let c: f64 = 2.0 * 0.1 / 5.0;
    let oracle = [(0.5 * ((2.0 + c) - (c * c + 8.0 * c).sqrt())).sqrt(), (1.0 - c).sqrt()];
    g.note(format!("quadratic roots {:.6} {:.6}", oracle[0], oracle[1]));
    let ok = folds.rho1.len() == 2
        && folds.rho1.iter().zip(AC4_FOLDS).all(|(a, b)| (a - b).abs() <= AC4_FOLD_TOL)
        && folds.rho1.iter().zip(oracle).all(|(a, b)| (a - b).abs() < 1e-12);
    g.check("fold locations", ok, format!("{:?} vs {AC4_FOLDS:?} ± {AC4_FOLD_TOL:e}", folds.rho1));
    let rep = stability_report(&p, FastSlowSystem::Inter, &grid, DEFAULT_TOL_H).unwrap();
    let class_at = |r: f64| inter_manifold(r, &p, Branch::Plus).unwrap().stability;
    let bands = [class_at(0.5), class_at(0.9), class_at(0.99)];
    g.check(
        "classes between folds",
        bands == [Stability::Repelling, Stability::Saddle, Stability::Attracting] && !rep.hyperbolic_everywhere,
        format!("{bands:?}"),
    );

    let (mut minus_bad, mut plus_bad, mut points) = (0usize, 0usize, 0usize);
    for i in 0..AC4_RANDOM_CASES {
        let d: f64 = rng.random_range(0.05..2.0);
        let mu = rng.random_range(0.05..3.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let p = params(d, 0.0, mu, omegas[i % 3]);
        if !connectivity_check(mu, p.omega_diff()) {
            continue;
        }
        let rep = stability_report(&p, FastSlowSystem::Intra, &grid, DEFAULT_TOL_H).unwrap();
        for s in &rep.grid {
            points += 1;
            match s.branch {
                Branch::Minus if s.stability != Stability::Attracting => minus_bad += 1,
                Branch::Plus
                    if !matches!(s.stability, Stability::Saddle | Stability::Repelling)
                        && !rep.fold_points.iter().any(|f| (f - s.rho1).abs() < 1e-3) =>
                {
                    plus_bad += 1
                }
                _ => {}
            }
        }
    }
    g.check(
        "lower intracoupling branch attracting",
        minus_bad == 0,
        format!("{minus_bad} violations over {points} samples"),
    );
    g.check(
        "upper intracoupling branch saddle or repelling",
        plus_bad == 0,
        format!("{plus_bad} violations"),
    );
    g.finish()
}

fn pair_sum(target: &[f64], source: &[f64], i: usize, lag: f64) -> f64 {
    source.iter().map(|&th| (th - target[i] + lag).sin()).sum::<f64>() / source.len() as f64
}

/// Fourth-order central difference.
fn derivative(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
}

fn ac5() -> bool {
    let mut g = Gate::new("AC-5", "oracle equivalences");
    let mut rng = ChaCha8Rng::seed_from_u64(5);

    let mut worst = 0.0f64;
    for _ in 0..AC5_STATES {
        let mut p = params(0.5, rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), 0.0);
        p.pop1.size = AC5_N;
        p.pop2.size = AC5_N;
        p.coupling.k2 = rng.random_range(-3.0..3.0);
        p.coupling.phase_lag = rng.random_range(-PI / 2.0..PI / 2.0);
        let f1: Vec<f64> = (0..AC5_N).map(|_| rng.random_range(-2.0..2.0)).collect();
        let f2: Vec<f64> = (0..AC5_N).map(|_| rng.random_range(-2.0..2.0)).collect();
        let net = Network::with_frequencies(p, f1.clone(), f2.clone()).unwrap();
        let state = NetworkState {
            phases1: (0..AC5_N).map(|_| rng.random_range(-20.0..20.0)).collect(),
            phases2: (0..AC5_N).map(|_| rng.random_range(-20.0..20.0)).collect(),
            adaptive_value: rng.random_range(-3.0..3.0),
            t: 0.0,
        };
        let adaptive = rng.random_bool(0.5);
        let target = adaptive.then_some(AdaptiveTarget::Inter);
        let (d1, d2) = net.rhs(&state, target).unwrap();
        let c = p.coupling;
        let mu = if adaptive { state.adaptive_value } else { c.mu };
        let (a, b) = (&state.phases1, &state.phases2);
        for i in 0..AC5_N {
            let e1 = f1[i] + c.k1 * pair_sum(a, a, i, c.phase_lag) + mu * pair_sum(a, b, i, c.phase_lag);
            let e2 = f2[i] + c.k2 * pair_sum(b, b, i, c.phase_lag) + mu * pair_sum(b, a, i, c.phase_lag);
            worst = worst.max((d1[i] - e1).abs()).max((d2[i] - e2).abs());
        }
    }
    g.check(
        "O(N) network field vs pairwise sum",
        worst < AC5_RHS_TOL,
        format!("max error {worst:.2e} over {AC5_STATES} states, N = {AC5_N}"),
    );

    for system in [FastSlowSystem::Inter, FastSlowSystem::Intra] {
        let mut worst = 0.0f64;
        let mut done = 0;
        while done < AC5_JAC_POINTS {
            let d: f64 = rng.random_range(0.05..2.0);
            let om = rng.random_range(-0.05..0.05);
            let branch = if rng.random_bool(0.5) { Branch::Plus } else { Branch::Minus };
            let rho = rng.random_range(0.05..0.95);
            let (p, sample, jac) = match system {
                FastSlowSystem::Inter => {
                    let p = params(d, rng.random_range(-1.0..6.0), 0.0, om);
                    let Ok(s) = inter_manifold(rho, &p, branch) else { continue };
                    (p, s, inter_jacobian(rho, &p).unwrap())
                }
                FastSlowSystem::Intra => {
                    let mu = rng.random_range(0.05..3.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                    let p = params(d, 0.0, mu, om);
                    let Ok(s) = intra_manifold(rho, &p, branch) else { continue };
                    (p, s, intra_jacobian(rho, &p, branch).unwrap())
                }
            };
            let c = sample.coupling_value;
            let psi = sample.psi;
            let fd = [
                [
                    derivative(|r| fast_field(system, &p, r, psi, c).0, rho, AC5_FD_STEP),
                    derivative(|q| fast_field(system, &p, rho, q, c).0, psi, AC5_FD_STEP),
                ],
                [
                    derivative(|r| fast_field(system, &p, r, psi, c).1, rho, AC5_FD_STEP),
                    derivative(|q| fast_field(system, &p, rho, q, c).1, psi, AC5_FD_STEP),
                ],
            ];
            for i in 0..2 {
                for j in 0..2 {
                    worst = worst.max((fd[i][j] - jac.0[i][j]).abs());
                }
            }
            done += 1;
        }
        g.check(
            &format!("{system:?} Jacobian vs finite differences"),
            worst < AC5_JAC_TOL,
            format!("max error {worst:.2e} over {AC5_JAC_POINTS} manifold points, step {AC5_FD_STEP:e}"),
        );
    }

    let mut worst = 0.0f64;
    let mut samples = 0usize;
    for case in 0..10 {
        let om = [0.0, 0.01, -0.03][case % 3];
        let d: f64 = rng.random_range(0.05..2.0);
        for (system, p) in [
            (FastSlowSystem::Inter, params(d, rng.random_range(-1.0..6.0), 0.0, om)),
            (FastSlowSystem::Intra, params(d, 0.0, rng.random_range(0.05..3.0), om)),
        ] {
            let rep = stability_report(&p, system, &RhoGrid::default(), DEFAULT_TOL_H).unwrap();
            for s in &rep.grid {
                let (a, b) = fast_field(system, &p, s.rho1, s.psi, s.coupling_value);
                worst = worst.max(a.abs()).max(b.abs());
                samples += 1;
            }
        }
    }
    g.check(
        "manifold residuals",
        worst < AC5_RESIDUAL_TOL,
        format!("max |fast field| {worst:.2e} over {samples} grid samples"),
    );

    let grid: Vec<f64> = RhoGrid::default().values().chain([1.0 / 3f64.sqrt()]).collect();
    let mut disagree = 0;
    for _ in 0..AC5_PROP3_PAIRS {
        let mu: f64 = rng.random_range(-1.0..1.0);
        let om: f64 = rng.random_range(-1.0..1.0);
        let scan = grid
            .iter()
            .all(|&r| (mu / r).powi(2) - (2.0 * om / (3.0 * r * r + 1.0)).powi(2) >= 0.0);
        if scan != connectivity_check(mu, om) {
            disagree += 1;
        }
    }
    g.check(
        "connectivity predicate vs discriminant scan",
        disagree == 0,
        format!("{disagree} disagreements in {AC5_PROP3_PAIRS} pairs"),
    );
    g.finish()
}

fn ac6(clamps: u64) -> bool {
    let mut g = Gate::new("AC-6", "invariance suite");
    let mut p = config("fig2.json").params;
    p.pop2.width = 0.0;
    let law = AdaptiveLawSpec::linear_feedback(AdaptiveTarget::Inter, 0.02, 2.5, 10.0);
    let init = MeanFieldState {
        rho1: 0.7,
        psi: -0.5,
        rho2: 1.0,
        adaptive_value: 3.0,
        t: 0.0,
    };
    let tr = integrate_meanfield(MeanFieldSystem::FullTwoPop, &p, &law, &init, &StepSettings::new(0.01, 200.0, 10)).unwrap();
    let drift = tr
        .times
        .iter()
        .zip(&tr.r2)
        .skip(1)
        .map(|(t, r)| (1.0 - r).abs() / t)
        .fold(0.0f64, f64::max);
    g.check(
        "pinned synchronized set",
        drift < AC6_PIN_DRIFT,
        format!("max |rho2 − 1|/t = {drift:.2e} < {AC6_PIN_DRIFT:e}"),
    );
    g.check("forward invariance of [0, 1)", clamps == 0, format!("clamp count over AC-1..AC-3 runs = {clamps}"));

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for (window, order) in [(101, 3), (7, 2), (21, 3), (51, 4), (5, 1)] {
        for _ in 0..20 {
            let coeff: Vec<f64> = (0..=order).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..500)
                .map(|i| {
                    let t = i as f64 / 250.0 - 1.0;
                    coeff.iter().rev().fold(0.0, |acc, c| acc * t + c)
                })
                .collect();
            let s = savitzky_golay(&y, window, order).unwrap();
            worst = s.iter().zip(&y).fold(worst, |m, (a, b)| m.max((a - b).abs()));
        }
    }
    g.check("Savitzky-Golay polynomial exactness", worst < 1e-10, format!("max error {worst:.2e}"));

    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config("fig2.json");
    cfg.params.pop1.size = 300;
    cfg.params.pop2.size = 300;
    cfg.integrator.t_final = 20.0;
    cfg.filter.window = 21;
    let cfg_path = dir.path().join("small.json");
    std::fs::write(&cfg_path, serde_json::to_string(&cfg).unwrap()).unwrap();
    // same output dir each time: the summary echoes the resolved config
    let out = dir.path().join("out");
    let run = |threads: &str| {
        let status = Command::new(env!("CARGO_BIN_EXE_chimera"))
            .args(["simulate-network", "--config"])
            .arg(&cfg_path)
            .arg("--out")
            .arg(&out)
            .args(["--threads", threads])
            .status()
            .unwrap();
        assert!(status.success());
        (
            std::fs::read(out.join("network.csv")).unwrap(),
            std::fs::read(out.join("network_summary.json")).unwrap(),
        )
    };
    let a = run("1");
    let b = run("1");
    let c = run("3");
    g.check(
        "bit-identical replay",
        a == b && a == c,
        format!("repeat equal: {}, 1 vs 3 threads equal: {}", a == b, a == c),
    );
    g.finish()
}

fn classify_visits(cfg: &RunConfig, tr: &Trajectory, start: usize) -> (usize, usize) {
    let (mut attracting, mut other) = (0, 0);
    for &r in &tr.r1[start..] {
        let ev = inter_jacobian(r.clamp(1e-3, 1.0 - 1e-3), &cfg.params).unwrap().eigenvalues();
        if classify(&ev, cfg.tol_h) == Stability::Attracting {
            attracting += 1;
        } else {
            other += 1;
        }
    }
    (attracting, other)
}

fn ac7() -> bool {
    let mut g = Gate::new("AC-7", "canard exploration (property substitute)");
    let mut cfg = config("fig4.json");
    cfg.integrator.t_final = AC7_T_FINAL;
    let tr = run_meanfield(&cfg).unwrap();
    let half = tr.len() / 2;
    let quarter = half + (tr.len() - half) / 2;
    let p1 = oscillation_metrics(&tr.psi[half..quarter], &tr.times[half..quarter], 0.0).unwrap().period;
    let p2 = oscillation_metrics(&tr.psi[quarter..], &tr.times[quarter..], 0.0).unwrap().period;
    let stable = match (p1, p2) {
        (Some(a), Some(b)) => (a - b).abs() / (0.5 * (a + b)) <= AC7_PERIOD_AGREE,
        _ => false,
    };
    g.check(
        "periodic psi over the last half",
        stable,
        format!("periods {p1:?} and {p2:?}, agreement tol {}%", AC7_PERIOD_AGREE * 100.0),
    );
    let (att, other) = classify_visits(&cfg, &tr, half);
    g.check(
        "visits attracting and non-attracting manifold regions",
        att > 0 && other > 0,
        format!("{att} attracting, {other} non-attracting samples"),
    );
    let folds = fold_points(&cfg.params, FastSlowSystem::Inter, &cfg.grid).unwrap();
    let seg = &tr.r1[half..];
    g.note(format!(
        "rho1 range [{:.5}, {:.5}], folds at {:?}",
        seg.iter().cloned().fold(f64::INFINITY, f64::min),
        seg.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        folds.rho1
    ));

    let mut net_cfg = cfg.clone();
    net_cfg.integrator.t_final = AC7_NETWORK_T;
    match run_network(&net_cfg) {
        Ok(net) => {
            let start = net.len() / 2;
            let mean_r1 = net.r1[start..].iter().sum::<f64>() / (net.len() - start) as f64;
            let (att, other) = classify_visits(&cfg, &net, start);
            let mu_range = net.coupling.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, &c| (a.0.min(c), a.1.max(c)));
            g.note(format!(
                "network N = {} over t = {AC7_NETWORK_T} (not gated): mean R1 {mean_r1:.4}, coupling range [{:.3}, {:.3}], {att} attracting / {other} non-attracting samples",
                cfg.params.pop1.size, mu_range.0, mu_range.1
            ));
        }
        Err(e) => g.note(format!("network run failed (not gated): {e}")),
    }
    g.finish()
}

fn main() {
    // the harness passes its own flags; a filter argument that matches nothing
    // (as in `cargo test --lib`) is not expected here
    println!("acceptance gate");
    let mut clamps = 0u64;
    let results = [
        ac1(&mut clamps),
        ac2(&mut clamps),
        ac3(&mut clamps),
        ac4(),
        ac5(),
        ac6(clamps),
        ac7(),
    ];
    let passed = results.iter().filter(|&&r| r).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
