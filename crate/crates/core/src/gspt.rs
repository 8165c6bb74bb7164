//! Critical manifolds of the reduced fast-slow systems and their normal
//! hyperbolicity.
//!
//! Both reduced systems share the fast field
//!
//! ```text
//! ρ̇₁ = −Δ₁ρ₁ + ½(1 − ρ₁²)(k₁ρ₁ + μ cos ψ)
//! ψ̇  = −Ω − ½μ((3ρ₁² + 1)/ρ₁) sin ψ
//! ```
//!
//! With the intercoupling `μ` slow, the critical manifold is a graph
//! `μ(ρ₁)`; with the intracoupling `k₁` slow it is a graph `k₁(ρ₁)`. Each has
//! a `Plus` and a `Minus` branch.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laws::{nullcline, AdaptiveLawSpec, Nullcline};
use crate::meanfield::{reduced_fast_field, RHO_FLOOR};
use crate::model::SystemParams;

/// Default hyperbolicity tolerance on eigenvalue real parts.
pub const DEFAULT_TOL_H: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::Plus, Branch::Minus];

    fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// Which coupling is the slow variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FastSlowSystem {
    /// `μ` slow, `k₁` fixed.
    Inter,
    /// `k₁` slow, `μ` fixed.
    Intra,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Attracting,
    Repelling,
    Saddle,
    NonHyperbolic,
}

/// A point of the critical manifold with its fast spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManifoldSample {
    pub rho1: f64,
    pub branch: Branch,
    /// `μ` (inter) or `k₁` (intra) on the manifold.
    pub coupling_value: f64,
    /// Principal value of the phase difference on the manifold.
    pub psi: f64,
    pub eigenvalues: [Complex64; 2],
    pub stability: Stability,
}

/// Uniform `ρ₁` grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RhoGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Default for RhoGrid {
    fn default() -> Self {
        Self {
            lo: 1e-3,
            hi: 1.0 - 1e-3,
            points: 1000,
        }
    }
}

impl RhoGrid {
    pub fn validate(self) -> Result<Self> {
        if !(self.lo > 0.0 && self.hi < 1.0 && self.lo < self.hi && self.points >= 2) {
            return Err(Error::invalid(
                "grid",
                "grid needs 0 < lo < hi < 1 and at least two points",
            ));
        }
        Ok(self)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        let step = (self.hi - self.lo) / (self.points - 1) as f64;
        (0..self.points).map(move |i| {
            if i + 1 == self.points {
                self.hi
            } else {
                self.lo + i as f64 * step
            }
        })
    }
}

/// Dense 2×2 real matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jacobian(pub [[f64; 2]; 2]);

impl Jacobian {
    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> f64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    /// Eigenvalues by the closed 2×2 formula. A triangular matrix returns its
    /// diagonal in order.
    pub fn eigenvalues(&self) -> [Complex64; 2] {
        let [[a, b], [c, d]] = self.0;
        if b == 0.0 || c == 0.0 {
            return [Complex64::new(a, 0.0), Complex64::new(d, 0.0)];
        }
        let half_tr = 0.5 * (a + d);
        // (a - d)²/4 + bc avoids cancellation in tr²/4 − det
        let disc = 0.25 * (a - d) * (a - d) + b * c;
        if disc >= 0.0 {
            let s = disc.sqrt();
            [Complex64::new(half_tr + s, 0.0), Complex64::new(half_tr - s, 0.0)]
        } else {
            let s = (-disc).sqrt();
            [Complex64::new(half_tr, s), Complex64::new(half_tr, -s)]
        }
    }
}

fn check_open_unit(rho1: f64) -> Result<()> {
    if rho1 > 0.0 && rho1 < 1.0 {
        Ok(())
    } else {
        Err(Error::RhoOutOfDomain(rho1))
    }
}

/// `2Δ₁/(1 − ρ₁²)`
fn width_term(delta1: f64, rho1: f64) -> f64 {
    2.0 * delta1 / (1.0 - rho1 * rho1)
}

/// `2Ω/(3ρ₁² + 1)`
fn detuning_term(omega: f64, rho1: f64) -> f64 {
    2.0 * omega / (3.0 * rho1 * rho1 + 1.0)
}

/// Angle whose `(μ cos ψ, μ sin ψ)` equals `(x, y)`.
fn manifold_angle(mu: f64, x: f64, y: f64) -> f64 {
    if mu == 0.0 {
        0.0
    } else {
        (y / mu).atan2(x / mu)
    }
}

/// Intercoupling critical manifold `μ(ρ₁)` on `branch`.
pub fn inter_manifold(rho1: f64, params: &SystemParams, branch: Branch) -> Result<ManifoldSample> {
    inter_manifold_tol(rho1, params, branch, DEFAULT_TOL_H)
}

fn inter_manifold_point(rho1: f64, params: &SystemParams, branch: Branch) -> (f64, f64) {
    let a = width_term(params.pop1.width, rho1) - params.coupling.k1;
    let b = detuning_term(params.omega_diff(), rho1);
    let mu = branch.sign() * rho1 * a.hypot(b);
    (mu, manifold_angle(mu, rho1 * a, -rho1 * b))
}

fn inter_manifold_tol(rho1: f64, params: &SystemParams, branch: Branch, tol_h: f64) -> Result<ManifoldSample> {
    check_open_unit(rho1)?;
    let (mu, psi) = inter_manifold_point(rho1, params, branch);
    let eigenvalues = inter_jacobian(rho1, params)?.eigenvalues();
    Ok(ManifoldSample {
        rho1,
        branch,
        coupling_value: mu,
        psi,
        eigenvalues,
        stability: classify(&eigenvalues, tol_h),
    })
}

/// `√((μ/ρ₁)² − (2Ω/(3ρ₁²+1))²)`, or `NoRealBranch`.
fn intra_root(rho1: f64, params: &SystemParams) -> Result<f64> {
    let m = params.coupling.mu / rho1;
    let b = detuning_term(params.omega_diff(), rho1);
    let disc = m * m - b * b;
    if disc < 0.0 {
        Err(Error::NoRealBranch { rho1 })
    } else {
        Ok(disc.sqrt())
    }
}

fn intra_manifold_point(rho1: f64, params: &SystemParams, branch: Branch) -> Result<(f64, f64)> {
    let h = intra_root(rho1, params)?;
    let k1 = width_term(params.pop1.width, rho1) + branch.sign() * h;
    let mu = params.coupling.mu;
    let b = detuning_term(params.omega_diff(), rho1);
    Ok((k1, manifold_angle(mu, -branch.sign() * rho1 * h, -rho1 * b)))
}

/// Intracoupling critical manifold `k₁(ρ₁)` on `branch`.
pub fn intra_manifold(rho1: f64, params: &SystemParams, branch: Branch) -> Result<ManifoldSample> {
    intra_manifold_tol(rho1, params, branch, DEFAULT_TOL_H)
}

fn intra_manifold_tol(rho1: f64, params: &SystemParams, branch: Branch, tol_h: f64) -> Result<ManifoldSample> {
    check_open_unit(rho1)?;
    let (k1, psi) = intra_manifold_point(rho1, params, branch)?;
    let eigenvalues = intra_jacobian(rho1, params, branch)?.eigenvalues();
    Ok(ManifoldSample {
        rho1,
        branch,
        coupling_value: k1,
        psi,
        eigenvalues,
        stability: classify(&eigenvalues, tol_h),
    })
}

pub fn manifold_sample(system: FastSlowSystem, rho1: f64, params: &SystemParams, branch: Branch) -> Result<ManifoldSample> {
    match system {
        FastSlowSystem::Inter => inter_manifold(rho1, params, branch),
        FastSlowSystem::Intra => intra_manifold(rho1, params, branch),
    }
}

/// Fast vector field `(ρ̇₁, ψ̇)` of the reduced system with the slow coupling
/// set to `coupling`.
pub fn fast_field(system: FastSlowSystem, params: &SystemParams, rho1: f64, psi: f64, coupling: f64) -> (f64, f64) {
    let (k1, mu) = match system {
        FastSlowSystem::Inter => (params.coupling.k1, coupling),
        FastSlowSystem::Intra => (coupling, params.coupling.mu),
    };
    reduced_fast_field(rho1, psi, k1, mu, params.pop1.width, params.omega_diff())
}

/// Fast Jacobian on the intercoupling manifold (identical on both
/// branches). `ρ₁ = 0` is accepted as a limit point only when `Ω = 0`.
pub fn inter_jacobian(rho1: f64, params: &SystemParams) -> Result<Jacobian> {
    let omega = params.omega_diff();
    if !(0.0..1.0).contains(&rho1) {
        return Err(Error::RhoOutOfDomain(rho1));
    }
    if omega != 0.0 && rho1 <= RHO_FLOOR {
        return Err(Error::invalid(
            "rho1",
            "fast Jacobian is singular at rho1 = 0 unless the detuning vanishes",
        ));
    }
    let d = params.pop1.width;
    let k = params.coupling.k1;
    let r2 = rho1 * rho1;
    let a11 = -d * (1.0 + r2) / (1.0 - r2) + 0.5 * k * (1.0 - r2);
    let a12 = omega * rho1 * (1.0 - r2) / (1.0 + 3.0 * r2);
    let a21 = if omega == 0.0 {
        0.0
    } else {
        omega / rho1 * (3.0 * r2 - 1.0) / (3.0 * r2 + 1.0)
    };
    let a22 = -0.5 * (1.0 + 3.0 * r2) / (1.0 - r2) * (2.0 * d - k * (1.0 - r2));
    Ok(Jacobian([[a11, a12], [a21, a22]]))
}

/// Fast Jacobian on the intracoupling manifold branch.
pub fn intra_jacobian(rho1: f64, params: &SystemParams, branch: Branch) -> Result<Jacobian> {
    check_open_unit(rho1)?;
    let h = intra_root(rho1, params)?;
    let omega = params.omega_diff();
    let d = params.pop1.width;
    let s = branch.sign();
    let r2 = rho1 * rho1;
    let a11 = -2.0 * d * r2 / (1.0 - r2) + s * 0.5 * (1.0 - r2) * h;
    let a12 = omega * rho1 * (1.0 - r2) / (3.0 * r2 + 1.0);
    let a21 = omega / rho1 * (3.0 * r2 - 1.0) / (3.0 * r2 + 1.0);
    let a22 = s * 0.5 * (3.0 * r2 + 1.0) * h;
    Ok(Jacobian([[a11, a12], [a21, a22]]))
}

/// Stability class from a pair of eigenvalues.
pub fn classify(eigenvalues: &[Complex64; 2], tol_h: f64) -> Stability {
    let [a, b] = [eigenvalues[0].re, eigenvalues[1].re];
    if a.abs() <= tol_h || b.abs() <= tol_h {
        Stability::NonHyperbolic
    } else if a < 0.0 && b < 0.0 {
        Stability::Attracting
    } else if a > 0.0 && b > 0.0 {
        Stability::Repelling
    } else {
        Stability::Saddle
    }
}

/// Normal hyperbolicity of the intercoupling manifold at zero detuning:
/// `k₁ < 2Δ₁`.
pub fn hyperbolicity_condition(k1: f64, delta1: f64) -> bool {
    k1 < 2.0 * delta1
}

/// The intracoupling manifold is real on all of `(0, 1)` iff
/// `|μ| ≥ |Ω|/√3`.
pub fn connectivity_check(mu: f64, omega_diff: f64) -> bool {
    mu.abs() >= omega_diff.abs() / 3f64.sqrt()
}

/// Zero-eigenvalue loci of a fast Jacobian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldSet {
    /// Sorted ascending.
    pub rho1: Vec<f64>,
    /// Set when the crossing degenerates onto the boundary `ρ₁ = 0` or the
    /// whole manifold is non-hyperbolic.
    pub note: Option<String>,
}

/// Bisection on a bracketing interval `[a, b]` with `f(a) f(b) ≤ 0`.
fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Numeric fold search: sign changes of the largest and smallest eigenvalue
/// real parts between adjacent grid points, refined by bisection. Points
/// where `jac` fails (no real branch) break the bracket.
fn scan_folds<J: Fn(f64) -> Result<Jacobian>>(jac: J, grid: &RhoGrid) -> Vec<f64> {
    let re_parts = |r: f64| {
        jac(r).ok().map(|j| {
            let [a, b] = j.eigenvalues();
            (a.re.max(b.re), a.re.min(b.re))
        })
    };
    let mut roots = Vec::new();
    let pts: Vec<f64> = grid.values().collect();
    for w in pts.windows(2) {
        let (Some(left), Some(right)) = (re_parts(w[0]), re_parts(w[1])) else {
            continue;
        };
        for pick in [0usize, 1] {
            let sel = |p: (f64, f64)| if pick == 0 { p.0 } else { p.1 };
            let (fl, fr) = (sel(left), sel(right));
            if fl == 0.0 {
                roots.push(w[0]);
            } else if (fl < 0.0) != (fr < 0.0) && fr != 0.0 {
                let g = |r: f64| re_parts(r).map_or(f64::NAN, sel);
                roots.push(bisect(g, w[0], w[1]));
            }
        }
    }
    roots.sort_by(|a, b| a.total_cmp(b));
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    roots
}

/// All `ρ₁ ∈ (0, 1)` where a fast eigenvalue real part crosses zero.
///
/// Closed forms at `Ω = 0`; otherwise a bracketing scan of `grid`.
pub fn fold_points(params: &SystemParams, system: FastSlowSystem, grid: &RhoGrid) -> Result<FoldSet> {
    let grid = grid.validate()?;
    let omega = params.omega_diff();
    let delta = params.pop1.width;
    if omega != 0.0 {
        let roots = match system {
            FastSlowSystem::Inter => scan_folds(|r| inter_jacobian(r, params), &grid),
            FastSlowSystem::Intra => {
                let mut all = scan_folds(|r| intra_jacobian(r, params, Branch::Plus), &grid);
                all.extend(scan_folds(|r| intra_jacobian(r, params, Branch::Minus), &grid));
                all.sort_by(|a, b| a.total_cmp(b));
                all
            }
        };
        return Ok(FoldSet { rho1: roots, note: None });
    }
    match system {
        FastSlowSystem::Inter => {
            let k = params.coupling.k1;
            if k <= 0.0 {
                return Ok(FoldSet { rho1: vec![], note: None });
            }
            let c = 2.0 * delta / k;
            if c > 1.0 {
                return Ok(FoldSet { rho1: vec![], note: None });
            }
            if c == 1.0 {
                return Ok(FoldSet {
                    rho1: vec![],
                    note: Some("k1 = 2*delta1: both eigenvalues vanish at the boundary rho1 = 0".into()),
                });
            }
            // λ₁ = 0: (1 − u)² = c(1 + u), u = ρ₁²;  λ₂ = 0: u = 1 − c
            let u1 = 0.5 * ((2.0 + c) - (c * c + 8.0 * c).sqrt());
            let u2 = 1.0 - c;
            let mut roots: Vec<f64> = [u1, u2]
                .into_iter()
                .filter(|u| *u > 0.0 && *u < 1.0)
                .map(f64::sqrt)
                .collect();
            roots.sort_by(|a, b| a.total_cmp(b));
            Ok(FoldSet { rho1: roots, note: None })
        }
        FastSlowSystem::Intra => {
            let mu = params.coupling.mu.abs();
            if mu == 0.0 {
                return Ok(FoldSet {
                    rho1: vec![],
                    note: Some("mu = 0: branches coincide and the manifold is non-hyperbolic everywhere".into()),
                });
            }
            if delta == 0.0 {
                return Ok(FoldSet { rho1: vec![], note: None });
            }
            // λ₁⁺ = 0 ⇔ 4Δ₁ρ³ = (1 − ρ²)²|μ|; left side increasing, right decreasing
            let g = |r: f64| 4.0 * delta * r * r * r - (1.0 - r * r).powi(2) * mu;
            Ok(FoldSet {
                rho1: vec![bisect(g, 0.0, 1.0)],
                note: None,
            })
        }
    }
}

/// Grid classification of a critical manifold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub system: FastSlowSystem,
    pub grid: Vec<ManifoldSample>,
    /// Sorted ascending.
    pub fold_points: Vec<f64>,
    pub fold_note: Option<String>,
    pub hyperbolic_everywhere: bool,
    /// Grid points without a real intracoupling branch.
    pub no_real_branch: Vec<f64>,
}

/// Samples both branches on `grid` and locates folds.
pub fn stability_report(params: &SystemParams, system: FastSlowSystem, grid: &RhoGrid, tol_h: f64) -> Result<StabilityReport> {
    let params = params.validate()?;
    let grid = grid.validate()?;
    let mut samples = Vec::with_capacity(2 * grid.points);
    let mut missing = Vec::new();
    for rho in grid.values() {
        for branch in Branch::BOTH {
            let s = match system {
                FastSlowSystem::Inter => inter_manifold_tol(rho, &params, branch, tol_h),
                FastSlowSystem::Intra => intra_manifold_tol(rho, &params, branch, tol_h),
            };
            match s {
                Ok(s) => samples.push(s),
                Err(Error::NoRealBranch { rho1 }) => {
                    if branch == Branch::Plus {
                        missing.push(rho1)
                    }
                }
                Err(e) => return Err(e),
            }
        }
    }
    let folds = fold_points(&params, system, &grid)?;
    let hyperbolic_everywhere = folds.rho1.is_empty()
        && folds.note.is_none()
        && missing.is_empty()
        && samples.iter().all(|s| s.stability != Stability::NonHyperbolic);
    Ok(StabilityReport {
        system,
        grid: samples,
        fold_points: folds.rho1,
        fold_note: folds.note,
        hyperbolic_everywhere,
        no_real_branch: missing,
    })
}

/// Intersection of the slow nullcline with a manifold branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub rho1: f64,
    pub coupling: f64,
    pub psi: f64,
    pub branch: Branch,
    pub fast_stability: Stability,
    /// `d/dρ₁ [nullcline − manifold]` at the intersection.
    pub slow_slope: f64,
    /// Stability of the one-dimensional slow flow on the manifold.
    pub slow_stable: bool,
}

/// Manifold value `μ(ρ₁)` or `k₁(ρ₁)`; `None` where no real branch exists.
fn manifold_value(system: FastSlowSystem, rho1: f64, params: &SystemParams, branch: Branch) -> Option<f64> {
    match system {
        FastSlowSystem::Inter => Some(inter_manifold_point(rho1, params, branch).0),
        FastSlowSystem::Intra => intra_manifold_point(rho1, params, branch).ok().map(|p| p.0),
    }
}

/// Predicts the chimera equilibria produced by a linear-feedback law: roots
/// of `manifold(ρ₁) − nullcline(ρ₁)` bracketed on `grid`. Returns `None`
/// when no sign change is found.
///
/// On the manifold the slow flow reads `M'(ρ₁) ρ̇₁ = ε (N(ρ₁) − M(ρ₁))`, so
/// an equilibrium is slow-stable when `(N' − M')/M' < 0`.
pub fn chimera_equilibrium(
    params: &SystemParams,
    law: &AdaptiveLawSpec,
    system: FastSlowSystem,
    branch: Branch,
    grid: &RhoGrid,
) -> Result<Option<Vec<Equilibrium>>> {
    let grid = grid.validate()?;
    let null = nullcline(law);
    let Nullcline::Linear { .. } = null else {
        return Err(Error::invalid(
            "law.kind",
            "equilibrium prediction needs a linear-feedback law",
        ));
    };
    let gap = |r: f64| -> Option<f64> { Some(manifold_value(system, r, params, branch)? - null.value(r)?) };
    let pts: Vec<f64> = grid.values().collect();
    let mut roots = Vec::new();
    for w in pts.windows(2) {
        let (Some(gl), Some(gr)) = (gap(w[0]), gap(w[1])) else {
            continue;
        };
        if gl == 0.0 {
            roots.push(w[0]);
        } else if (gl < 0.0) != (gr < 0.0) && gr != 0.0 {
            roots.push(bisect(|r| gap(r).unwrap_or(f64::NAN), w[0], w[1]));
        }
    }
    if gap(pts[pts.len() - 1]) == Some(0.0) {
        roots.push(pts[pts.len() - 1]);
    }
    if roots.is_empty() {
        return Ok(None);
    }
    let slope_n = null.slope().unwrap_or(0.0);
    let mut out = Vec::with_capacity(roots.len());
    for rho in roots {
        let sample = manifold_sample(system, rho, params, branch)?;
        let h = 1e-6 * rho.min(1.0 - rho);
        let dm = match (
            manifold_value(system, rho + h, params, branch),
            manifold_value(system, rho - h, params, branch),
        ) {
            (Some(a), Some(b)) => (a - b) / (2.0 * h),
            _ => f64::NAN,
        };
        let slow_slope = slope_n - dm;
        out.push(Equilibrium {
            rho1: rho,
            coupling: sample.coupling_value,
            psi: sample.psi,
            branch,
            fast_stability: sample.stability,
            slow_slope,
            slow_stable: dm != 0.0 && slow_slope / dm < 0.0,
        });
    }
    Ok(Some(out))
}

/// Coefficient `a = (k₂ + μρ₁ cos ψ)⁻¹` of the first-order shift
/// `ρ₂ ≈ 1 − aΔ₂` of the near-synchronized population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyncCoefficient {
    pub value: f64,
    /// `|k₂| ≥ |μ|`, which guarantees `a > 0` on `ρ₁ ∈ (0, 1)`.
    pub positivity_guaranteed: bool,
}

pub fn sync_coefficient(k2: f64, mu: f64, rho1: f64, psi: f64) -> Result<SyncCoefficient> {
    let denom = k2 + mu * rho1 * psi.cos();
    if denom == 0.0 || !denom.is_finite() {
        return Err(Error::VanishingDenominator("k2 + mu rho1 cos(psi)"));
    }
    Ok(SyncCoefficient {
        value: 1.0 / denom,
        positivity_guaranteed: k2.abs() >= mu.abs(),
    })
}

/// `ψ` on the manifold folded into `(−π, π]`.
pub fn principal_angle(psi: f64) -> f64 {
    let w = (psi + PI).rem_euclid(2.0 * PI) - PI;
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}
