use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use chimera_core::gspt::{chimera_equilibrium, stability_report, Branch, Equilibrium, FastSlowSystem, StabilityReport};
use chimera_core::laws::LawKind;
use chimera_core::meanfield::MeanFieldState;
use chimera_core::signal::{classify_pattern, savitzky_golay, PatternClass, PatternThresholds, Smoothing};
use chimera_core::trajectory::fmt_sig12;
use chimera_core::{
    integrate_meanfield, integrate_network, Diagnostics, MeanFieldSystem, Network, NetworkState, Trajectory,
};
use serde::{Deserialize, Serialize};

use crate::config::{axis_path, with_axis_value, RunConfig};
use crate::error::{CliError, ErrorRecord};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FinalState {
    pub t: f64,
    pub r1: f64,
    pub r2: f64,
    pub psi: f64,
    pub coupling: f64,
}

impl FinalState {
    fn of(tr: &Trajectory) -> Self {
        let s = tr.last().expect("integrators record the initial state");
        Self {
            t: s.t,
            r1: s.r1,
            r2: s.r2,
            psi: s.psi,
            coupling: s.coupling,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub command: &'static str,
    pub system: String,
    pub records: usize,
    pub final_state: FinalState,
    pub diagnostics: Diagnostics,
    pub pattern: PatternClass,
    /// Equilibria predicted from the critical manifold, when the law has a
    /// linear nullcline.
    pub equilibria: Option<Vec<Equilibrium>>,
    pub config: RunConfig,
}

/// Intersections of the law's nullcline with both manifold branches.
pub fn predicted_equilibria(cfg: &RunConfig) -> Result<Option<Vec<Equilibrium>>, CliError> {
    if !matches!(cfg.law.kind, LawKind::LinearFeedback { .. }) {
        return Ok(None);
    }
    let mut all = Vec::new();
    for branch in Branch::BOTH {
        if let Some(found) = chimera_equilibrium(&cfg.params, &cfg.law, cfg.fast_slow_system(), branch, &cfg.grid)? {
            all.extend(found);
        }
    }
    Ok(Some(all))
}

fn network_thresholds(cfg: &RunConfig) -> PatternThresholds {
    PatternThresholds {
        smoothing: cfg.classifier.smoothing.or(Some(cfg.filter)),
        ..cfg.classifier
    }
}

pub fn run_network(cfg: &RunConfig) -> Result<Trajectory, CliError> {
    let net = Network::new(cfg.params)?;
    let init = NetworkState::from_mean_field(
        &cfg.params,
        cfg.initial.rho1,
        cfg.initial.psi,
        cfg.initial.rho2,
        cfg.initial.coupling,
        cfg.seed,
    )?;
    Ok(integrate_network(&net, &cfg.law, &init, &cfg.integrator)?)
}

pub fn run_meanfield(cfg: &RunConfig) -> Result<Trajectory, CliError> {
    let system = cfg.meanfield_system();
    let rho2 = if system == MeanFieldSystem::FullTwoPop {
        cfg.initial.rho2
    } else {
        1.0
    };
    let init = MeanFieldState {
        rho1: cfg.initial.rho1,
        psi: cfg.initial.psi,
        rho2,
        adaptive_value: cfg.initial.coupling,
        t: 0.0,
    };
    Ok(integrate_meanfield(system, &cfg.params, &cfg.law, &init, &cfg.integrator)?)
}

fn system_name(s: MeanFieldSystem) -> String {
    match s {
        MeanFieldSystem::FullTwoPop => "full_two_pop",
        MeanFieldSystem::ReducedInter => "reduced_inter",
        MeanFieldSystem::ReducedIntra => "reduced_intra",
    }
    .to_string()
}

pub fn simulate_network(cfg: &RunConfig) -> Result<(Trajectory, RunSummary), CliError> {
    let tr = run_network(cfg)?;
    let pattern = classify_pattern(&tr, Some(cfg.params.pop1.size), &network_thresholds(cfg))?;
    let summary = RunSummary {
        command: "simulate-network",
        system: "network".into(),
        records: tr.len(),
        final_state: FinalState::of(&tr),
        diagnostics: tr.diagnostics,
        pattern,
        equilibria: predicted_equilibria(cfg)?,
        config: cfg.clone(),
    };
    Ok((tr, summary))
}

pub fn simulate_meanfield(cfg: &RunConfig) -> Result<(Trajectory, RunSummary), CliError> {
    let tr = run_meanfield(cfg)?;
    let pattern = classify_pattern(&tr, None, &cfg.classifier)?;
    let summary = RunSummary {
        command: "simulate-meanfield",
        system: system_name(cfg.meanfield_system()),
        records: tr.len(),
        final_state: FinalState::of(&tr),
        diagnostics: tr.diagnostics,
        pattern,
        equilibria: predicted_equilibria(cfg)?,
        config: cfg.clone(),
    };
    Ok((tr, summary))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifoldSummary {
    pub command: &'static str,
    pub system: FastSlowSystem,
    pub fold_points: Vec<f64>,
    pub fold_note: Option<String>,
    pub hyperbolic_everywhere: bool,
    /// `branch/stability` → number of grid samples.
    pub class_counts: BTreeMap<String, usize>,
    pub no_real_branch_points: usize,
    pub equilibria: Option<Vec<Equilibrium>>,
    pub config: RunConfig,
}

fn snake<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        other => format!("{other:?}"),
    }
}

pub fn manifold(cfg: &RunConfig) -> Result<(StabilityReport, ManifoldSummary), CliError> {
    let system = cfg.fast_slow_system();
    let report = stability_report(&cfg.params, system, &cfg.grid, cfg.tol_h)?;
    let mut class_counts = BTreeMap::new();
    for s in &report.grid {
        *class_counts
            .entry(format!("{}/{}", snake(&s.branch), snake(&s.stability)))
            .or_insert(0) += 1;
    }
    let summary = ManifoldSummary {
        command: "manifold",
        system,
        fold_points: report.fold_points.clone(),
        fold_note: report.fold_note.clone(),
        hyperbolic_everywhere: report.hyperbolic_everywhere,
        class_counts,
        no_real_branch_points: report.no_real_branch.len(),
        equilibria: predicted_equilibria(cfg)?,
        config: cfg.clone(),
    };
    Ok((report, summary))
}

/// Network and mean-field traces on one time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareTable {
    pub network: Trajectory,
    pub network_r1_filtered: Vec<f64>,
    pub meanfield: Trajectory,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareSummary {
    pub command: &'static str,
    pub meanfield_system: String,
    pub transient_fraction: f64,
    /// Filter applied to the network `R1` before comparison; `None` when the
    /// record was shorter than the window.
    pub filter: Option<Smoothing>,
    /// Post-transient maximum of `|filtered R1 − ρ1|`.
    pub max_abs_r1_gap: f64,
    /// Post-transient mean of `|filtered R1 − ρ1|`.
    pub mean_abs_r1_gap: f64,
    pub network_pattern: PatternClass,
    pub meanfield_pattern: PatternClass,
    pub network_final: FinalState,
    pub meanfield_final: FinalState,
    pub network_diagnostics: Diagnostics,
    pub meanfield_diagnostics: Diagnostics,
    pub equilibria: Option<Vec<Equilibrium>>,
    pub config: RunConfig,
}

pub fn compare(cfg: &RunConfig) -> Result<(CompareTable, CompareSummary), CliError> {
    let net = run_network(cfg)?;
    let mf = run_meanfield(cfg)?;
    if net.times != mf.times {
        return Err(CliError::Numerical("network and mean-field time grids differ".into()));
    }
    let (filtered, filter) = if net.len() >= cfg.filter.window {
        (savitzky_golay(&net.r1, cfg.filter.window, cfg.filter.order)?, Some(cfg.filter))
    } else {
        (net.r1.clone(), None)
    };
    let start = net.transient_cut(cfg.classifier.transient_fraction);
    let gaps: Vec<f64> = filtered[start..]
        .iter()
        .zip(&mf.r1[start..])
        .map(|(a, b)| (a - b).abs())
        .collect();
    let max_abs_r1_gap = gaps.iter().fold(0.0f64, |m, &g| m.max(g));
    let mean_abs_r1_gap = gaps.iter().sum::<f64>() / gaps.len() as f64;
    let summary = CompareSummary {
        command: "compare",
        meanfield_system: system_name(cfg.meanfield_system()),
        transient_fraction: cfg.classifier.transient_fraction,
        filter,
        max_abs_r1_gap,
        mean_abs_r1_gap,
        network_pattern: classify_pattern(&net, Some(cfg.params.pop1.size), &network_thresholds(cfg))?,
        meanfield_pattern: classify_pattern(&mf, None, &cfg.classifier)?,
        network_final: FinalState::of(&net),
        meanfield_final: FinalState::of(&mf),
        network_diagnostics: net.diagnostics,
        meanfield_diagnostics: mf.diagnostics,
        equilibria: predicted_equilibria(cfg)?,
        config: cfg.clone(),
    };
    Ok((
        CompareTable {
            network: net,
            network_r1_filtered: filtered,
            meanfield: mf,
        },
        summary,
    ))
}

/// What each sweep row runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SweepRun {
    Manifold,
    Meanfield,
    Network,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub summary: Option<serde_json::Value>,
    pub error: Option<ErrorRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepOutput {
    pub command: &'static str,
    pub axis: String,
    pub path: String,
    pub run: SweepRun,
    pub rows: Vec<SweepRow>,
}

fn to_json<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("summaries serialize")
}

/// Independent runs, one per value, in input order. Failing rows carry an
/// error record and do not stop the sweep.
pub fn sweep(base: &RunConfig, axis: &str, values: &[f64], run: SweepRun) -> SweepOutput {
    let rows = values
        .iter()
        .map(|&value| {
            let result = with_axis_value(base, axis, value).and_then(|cfg| match run {
                SweepRun::Manifold => manifold(&cfg).map(|(_, s)| to_json(&s)),
                SweepRun::Meanfield => simulate_meanfield(&cfg).map(|(_, s)| to_json(&s)),
                SweepRun::Network => simulate_network(&cfg).map(|(_, s)| to_json(&s)),
            });
            match result {
                Ok(s) => SweepRow {
                    value,
                    summary: Some(s),
                    error: None,
                },
                Err(e) => SweepRow {
                    value,
                    summary: None,
                    error: Some(e.record()),
                },
            }
        })
        .collect();
    SweepOutput {
        command: "sweep",
        axis: axis.to_string(),
        path: axis_path(axis).to_string(),
        run,
        rows,
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn write_trajectory(path: &Path, tr: &Trajectory) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    tr.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

pub fn write_manifold_csv(path: &Path, report: &StabilityReport) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "rho1,branch,coupling,psi,eig1_re,eig1_im,eig2_re,eig2_im,stability")?;
    for s in &report.grid {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            fmt_sig12(s.rho1),
            snake(&s.branch),
            fmt_sig12(s.coupling_value),
            fmt_sig12(s.psi),
            fmt_sig12(s.eigenvalues[0].re),
            fmt_sig12(s.eigenvalues[0].im),
            fmt_sig12(s.eigenvalues[1].re),
            fmt_sig12(s.eigenvalues[1].im),
            snake(&s.stability)
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_compare_csv(path: &Path, table: &CompareTable) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "t,R1_network,R1_filtered,R1_meanfield,R2_network,R2_meanfield,psi_network,psi_meanfield,coupling_network,coupling_meanfield"
    )?;
    let (n, m) = (&table.network, &table.meanfield);
    for i in 0..n.len() {
        let row = [
            n.times[i],
            n.r1[i],
            table.network_r1_filtered[i],
            m.r1[i],
            n.r2[i],
            m.r2[i],
            n.psi[i],
            m.psi[i],
            n.coupling[i],
            m.coupling[i],
        ];
        let cells: Vec<String> = row.iter().map(|&v| fmt_sig12(v)).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Subcommand plus its file outputs under `cfg.output.dir`.
pub fn execute(cmd: &Command, cfg: &RunConfig) -> Result<(), CliError> {
    let dir = &cfg.output.dir;
    fs::create_dir_all(dir)?;
    match cmd {
        Command::SimulateNetwork => {
            let (tr, s) = simulate_network(cfg)?;
            write_trajectory(&dir.join("network.csv"), &tr)?;
            write_json(&dir.join("network_summary.json"), &s)
        }
        Command::SimulateMeanfield => {
            let (tr, s) = simulate_meanfield(cfg)?;
            write_trajectory(&dir.join("meanfield.csv"), &tr)?;
            write_json(&dir.join("meanfield_summary.json"), &s)
        }
        Command::Manifold => {
            let (report, s) = manifold(cfg)?;
            write_manifold_csv(&dir.join("manifold.csv"), &report)?;
            write_json(&dir.join("manifold_summary.json"), &s)
        }
        Command::Compare => {
            let (table, s) = compare(cfg)?;
            write_compare_csv(&dir.join("compare.csv"), &table)?;
            write_json(&dir.join("compare_summary.json"), &s)
        }
        Command::Sweep { axis, values, run } => {
            let out = sweep(cfg, axis, values, *run);
            write_json(&dir.join("sweep.json"), &out)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    SimulateNetwork,
    SimulateMeanfield,
    Manifold,
    Compare,
    Sweep { axis: String, values: Vec<f64>, run: SweepRun },
}
