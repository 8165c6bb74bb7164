//! Two-population Kuramoto networks whose couplings evolve on a slow time
//! scale.
//!
//! The crate provides a finite-`N` network integrator, the Ott-Antonsen mean
//! field of the same system, adaptive coupling laws, the critical-manifold
//! analysis of the reduced fast-slow systems, and tools for classifying the
//! resulting order-parameter traces.

pub mod error;
pub mod gspt;
pub mod integrate;
pub mod laws;
pub mod meanfield;
pub mod model;
pub mod network;
pub mod signal;
pub mod trajectory;

pub use error::{Error, Result};
pub use gspt::{
    chimera_equilibrium, classify, connectivity_check, fold_points, hyperbolicity_condition, inter_jacobian,
    inter_manifold, intra_jacobian, intra_manifold, stability_report, sync_coefficient, Branch, Equilibrium,
    FastSlowSystem, FoldSet, ManifoldSample, RhoGrid, Stability, StabilityReport,
};
pub use integrate::StepSettings;
pub use laws::{eval_law, nullcline, AdaptiveLawSpec, AdaptiveTarget, LawKind, Nullcline};
pub use meanfield::{
    integrate_general_meanfield, integrate_meanfield, meanfield_rhs, GeneralMeanFieldState, GeneralSystem,
    MeanFieldState, MeanFieldSystem,
};
pub use model::{
    order_parameter, sample_frequencies, sample_phases, CouplingConfig, OrderParameter, PopulationSpec,
    SamplingMode, SystemParams,
};
pub use network::{integrate_network, Network, NetworkState};
pub use signal::{
    classify_pattern, oscillation_metrics, savitzky_golay, OscillationMetrics, PatternClass, PatternKind,
    PatternThresholds, Smoothing,
};
pub use trajectory::{Diagnostics, Trajectory};
