//! Roots of the three-state equations of state, equilibrium selection,
//! parameter sweeps and catastrophe detection.

mod catastrophe;
mod sweep;

pub use catastrophe::{detect_catastrophe, line_fold_points, CatastropheOnset, LineFold};
pub use sweep::{sweep_profile, FoldEndpoint, SweepResult, SweepSample};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PottsError, Result};
use crate::exact::{convergence_table, ConvergenceTable};
use crate::model::{
    eos_jacobian_q3, eos_residual_q3, free_energy_q3, MomentVector, ThermoPoint,
};
use crate::numeric::{solve2, sym_eigenvalues2};

/// Numerical settings for the multi-start Newton solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Starting points per axis of the simplex grid.
    pub grid: usize,
    /// Newton stops once the residual norm is at or below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Smallest damping factor tried before a start is abandoned.
    pub damping_floor: f64,
    /// Roots closer than this in moment space are merged.
    pub dedupe_radius: f64,
    /// Iterates must keep every probability above this.
    pub domain_margin: f64,
    /// Largest moment-space jump when matching branches along a sweep.
    pub continuation_radius: f64,
    /// Maxima whose free energies differ by less than this coexist.
    pub coexistence_tol: f64,
    /// Hessian eigenvalues within this of zero count as degenerate.
    pub classification_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            grid: 41,
            tolerance: 1e-12,
            max_iterations: 100,
            damping_floor: 1e-6,
            dedupe_radius: 1e-8,
            domain_margin: 1e-9,
            continuation_radius: 0.05,
            coexistence_tol: 1e-10,
            classification_tol: 1e-9,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tolerance", self.tolerance),
            ("damping_floor", self.damping_floor),
            ("dedupe_radius", self.dedupe_radius),
            ("domain_margin", self.domain_margin),
            ("continuation_radius", self.continuation_radius),
            ("coexistence_tol", self.coexistence_tol),
            ("classification_tol", self.classification_tol),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(PottsError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.grid == 0 || self.max_iterations == 0 {
            return Err(PottsError::Config("grid and max_iterations must be positive".into()));
        }
        if self.damping_floor >= 1.0 {
            return Err(PottsError::Config("damping_floor must be below 1".into()));
        }
        if self.dedupe_radius <= self.tolerance {
            return Err(PottsError::Config(
                "dedupe_radius must exceed the Newton tolerance".into(),
            ));
        }
        Ok(())
    }
}

/// Stationary-point type from the eigenvalues of the Hessian of `F`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Maximum,
    Saddle,
    Minimum,
}

impl Classification {
    /// Degenerate Hessians (an eigenvalue within `tol` of zero) count as saddles.
    pub fn from_hessian(h: [[f64; 2]; 2], tol: f64) -> Self {
        let [lo, hi] = sym_eigenvalues2(h);
        if hi < -tol {
            Classification::Maximum
        } else if lo > tol {
            Classification::Minimum
        } else {
            Classification::Saddle
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::Maximum => "maximum",
            Classification::Saddle => "saddle",
            Classification::Minimum => "minimum",
        }
    }
}

/// A converged stationary point of the free energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumBranch {
    pub m: MomentVector,
    pub free_energy: f64,
    pub classification: Classification,
    /// Euclidean norm of `(psi1, psi2)` at `m`.
    pub residual: f64,
    pub iterations: usize,
    /// Hessian determinant; zero on a fold.
    pub hessian_det: f64,
}

/// Why a Newton start was abandoned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NewtonFailure {
    /// The start point is not strictly inside the simplex.
    InvalidStart,
    /// Iteration budget exhausted; carries the last residual norm.
    NotConverged { residual: f64 },
    /// Damping fell below the floor because every step left the domain.
    BoundaryTrap { residual: f64 },
    /// Damping fell below the floor without reducing the residual.
    Stalled { residual: f64 },
    /// Jacobian could not be inverted.
    Singular { residual: f64 },
}

fn norm(r: [f64; 2]) -> f64 {
    r[0].hypot(r[1])
}

fn interior(m: MomentVector, margin: f64) -> bool {
    m.min_probability() > margin
}

/// Newton's method on `psi = 0`, halving the step whenever it would leave
/// the domain or fail to reduce the residual norm.
pub fn damped_newton(
    m0: MomentVector,
    pt: ThermoPoint,
    cfg: &SolverConfig,
) -> std::result::Result<EquilibriumBranch, NewtonFailure> {
    if !(m0.m1.is_finite() && m0.m2.is_finite()) || !interior(m0, cfg.domain_margin) {
        return Err(NewtonFailure::InvalidStart);
    }
    let mut m = m0;
    let mut r = eos_residual_q3(m, pt).map_err(|_| NewtonFailure::InvalidStart)?;
    let mut rn = norm(r);
    for it in 0..=cfg.max_iterations {
        if rn <= cfg.tolerance {
            let (m, rn) = polish(m, rn, pt);
            return Ok(finish(m, pt, rn, it, cfg));
        }
        if it == cfg.max_iterations {
            break;
        }
        let jac = eos_jacobian_q3(m, pt.t).map_err(|_| NewtonFailure::Singular { residual: rn })?;
        let step = solve2(jac, [-r[0], -r[1]]).ok_or(NewtonFailure::Singular { residual: rn })?;
        let mut lambda = 1.0;
        let mut left_domain = false;
        loop {
            let cand = MomentVector::new(m.m1 + lambda * step[0], m.m2 + lambda * step[1]);
            if interior(cand, cfg.domain_margin) {
                if let Ok(rc) = eos_residual_q3(cand, pt) {
                    let rcn = norm(rc);
                    if rcn < rn {
                        m = cand;
                        r = rc;
                        rn = rcn;
                        break;
                    }
                }
            } else {
                left_domain = true;
            }
            lambda *= 0.5;
            if lambda < cfg.damping_floor {
                return Err(if left_domain {
                    NewtonFailure::BoundaryTrap { residual: rn }
                } else {
                    NewtonFailure::Stalled { residual: rn }
                });
            }
        }
    }
    Err(NewtonFailure::NotConverged { residual: rn })
}

/// A few full Newton steps past the tolerance, kept only while the
/// residual keeps falling.
fn polish(mut m: MomentVector, mut rn: f64, pt: ThermoPoint) -> (MomentVector, f64) {
    for _ in 0..4 {
        let Ok(jac) = eos_jacobian_q3(m, pt.t) else { break };
        let Ok(r) = eos_residual_q3(m, pt) else { break };
        let Some(step) = solve2(jac, [-r[0], -r[1]]) else { break };
        let cand = MomentVector::new(m.m1 + step[0], m.m2 + step[1]);
        match eos_residual_q3(cand, pt) {
            Ok(rc) if cand.min_probability() > 0.0 && norm(rc) < rn => {
                m = cand;
                rn = norm(rc);
            }
            _ => break,
        }
    }
    (m, rn)
}

fn finish(m: MomentVector, pt: ThermoPoint, residual: f64, iterations: usize, cfg: &SolverConfig) -> EquilibriumBranch {
    let h = eos_jacobian_q3(m, pt.t).expect("converged iterate is interior");
    EquilibriumBranch {
        m,
        free_energy: free_energy_q3(m, pt).expect("converged iterate is interior"),
        classification: Classification::from_hessian(h, cfg.classification_tol),
        residual,
        iterations,
        hessian_det: h[0][0] * h[1][1] - h[0][1] * h[1][0],
    }
}

/// Start points: cell centres of an `n x n` grid over the open simplex
/// `|m1| < m2 < 1`, pulled inward by the domain margin.
pub fn start_grid(n: usize, margin: f64) -> Vec<MomentVector> {
    let nf = n as f64;
    let shrink = 1.0 - 4.0 * margin;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        let m2 = (i as f64 + 0.5) / nf;
        for j in 0..n {
            let s = -1.0 + 2.0 * (j as f64 + 0.5) / nf;
            let m = MomentVector::new(m2 * s * shrink, 2.0 / 3.0 + (m2 - 2.0 / 3.0) * shrink);
            out.push(m);
        }
    }
    out
}

/// Near a degenerate root the residual is quadratic in the distance, so
/// Newton stops anywhere within about `sqrt(tolerance)` of it. Roots this
/// close whose Hessians are both this singular are treated as one.
const DEGENERATE_RADIUS: f64 = 1e-5;
const DEGENERATE_DET: f64 = 1e-8;

fn same_root(a: &EquilibriumBranch, b: &EquilibriumBranch, radius: f64) -> bool {
    let d = a.m.distance(&b.m);
    d <= radius
        || (d <= DEGENERATE_RADIUS
            && a.hessian_det.abs() <= DEGENERATE_DET
            && b.hessian_det.abs() <= DEGENERATE_DET)
}

/// Merge roots of one cluster, keeping the member with the smallest
/// residual (earliest start on ties).
fn dedupe(found: impl IntoIterator<Item = EquilibriumBranch>, radius: f64) -> Vec<EquilibriumBranch> {
    let mut kept: Vec<EquilibriumBranch> = Vec::new();
    for b in found {
        match kept.iter_mut().find(|k| same_root(k, &b, radius)) {
            Some(k) => {
                if b.residual < k.residual {
                    *k = b;
                }
            }
            None => kept.push(b),
        }
    }
    kept
}

/// Sort by free energy, descending; ties fall back to the moments.
pub(crate) fn sort_branches(branches: &mut [EquilibriumBranch]) {
    branches.sort_by(|a, b| {
        b.free_energy
            .total_cmp(&a.free_energy)
            .then(a.m.m1.total_cmp(&b.m.m1))
            .then(a.m.m2.total_cmp(&b.m.m2))
    });
}

/// All stationary points reachable from the start grid, sorted by `F` descending.
pub fn solve_branches(pt: ThermoPoint, cfg: &SolverConfig) -> Result<Vec<EquilibriumBranch>> {
    pt.validate()?;
    cfg.validate()?;
    let starts = start_grid(cfg.grid, cfg.domain_margin);
    let results: Vec<Option<EquilibriumBranch>> = starts
        .par_iter()
        .map(|&m0| damped_newton(m0, pt, cfg).ok())
        .collect();
    let mut branches = dedupe(results.into_iter().flatten(), cfg.dedupe_radius);
    if branches.is_empty() {
        return Err(PottsError::SolverFailure);
    }
    sort_branches(&mut branches);
    Ok(branches)
}

/// The selected equilibrium and whether another maximum ties with it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub branch: EquilibriumBranch,
    /// Index of the selected branch in the input set.
    pub index: usize,
    pub coexistence: bool,
}

/// Highest-`F` local maximum; flags coexistence when the runner-up maximum
/// is within `coexistence_tol`.
pub fn select_equilibrium(branches: &[EquilibriumBranch], cfg: &SolverConfig) -> Result<Selection> {
    let mut maxima: Vec<(usize, &EquilibriumBranch)> = branches
        .iter()
        .enumerate()
        .filter(|(_, b)| b.classification == Classification::Maximum)
        .collect();
    if maxima.is_empty() {
        return Err(PottsError::DegenerateSet(branches.len()));
    }
    maxima.sort_by(|a, b| b.1.free_energy.total_cmp(&a.1.free_energy).then(a.0.cmp(&b.0)));
    let (index, top) = maxima[0];
    let coexistence = maxima
        .get(1)
        .is_some_and(|(_, b)| (top.free_energy - b.free_energy).abs() < cfg.coexistence_tol);
    Ok(Selection {
        branch: *top,
        index,
        coexistence,
    })
}

/// Solve and select in one call.
pub fn equilibrium(pt: ThermoPoint, cfg: &SolverConfig) -> Result<Selection> {
    select_equilibrium(&solve_branches(pt, cfg)?, cfg)
}

/// Free energy of the disordered branch `m = (0, 2/3)` at zero field.
pub fn symmetric_free_energy(t: f64) -> f64 {
    t / 3.0 + 3f64.ln()
}

/// `max F` over ordered maxima minus `F` of the disordered branch at
/// `x = y = 0`; `None` when no ordered maximum exists.
pub fn zero_field_gap(t: f64, cfg: &SolverConfig) -> Result<Option<f64>> {
    let pt = ThermoPoint::new(0.0, 0.0, t)?;
    let sym = MomentVector::uniform();
    let best = solve_branches(pt, cfg)?
        .into_iter()
        .filter(|b| b.classification == Classification::Maximum && b.m.distance(&sym) > 1e-6)
        .map(|b| b.free_energy)
        .reduce(f64::max);
    Ok(best.map(|f| f - symmetric_free_energy(t)))
}

/// Zero-field transition temperature, by bisection on the free-energy gap
/// between the ordered maxima and the disordered branch in `[t_lo, t_hi]`.
pub fn zero_field_transition(t_lo: f64, t_hi: f64, tol: f64, cfg: &SolverConfig) -> Result<f64> {
    let sign = |t: f64| -> Result<bool> { Ok(zero_field_gap(t, cfg)?.is_some_and(|g| g > 0.0)) };
    if sign(t_lo)? || !sign(t_hi)? {
        return Err(PottsError::Config(format!(
            "[{t_lo}, {t_hi}] does not bracket the zero-field transition"
        )));
    }
    let (mut lo, mut hi) = (t_lo, t_hi);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if sign(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Largest `|det H|` at which the limit free energy is refused as too
/// close to a fold.
pub const NEAR_FOLD_DET: f64 = 1e-6;

/// Thermodynamic limit of `log Z_N / N`: the equilibrium `F` minus `t`,
/// since the finite-N exponent carries `t (sum p^2 - 1)`.
pub fn limit_free_energy(pt: ThermoPoint, cfg: &SolverConfig) -> Result<f64> {
    let sel = equilibrium(pt, cfg)?;
    if sel.branch.hessian_det.abs() < NEAR_FOLD_DET {
        return Err(PottsError::NearFold(sel.branch.hessian_det.abs()));
    }
    Ok(sel.branch.free_energy - pt.t)
}

/// Finite-size convergence of `F_N` toward [`limit_free_energy`].
pub fn finite_size_table(ns: &[usize], pt: ThermoPoint, cfg: &SolverConfig) -> Result<ConvergenceTable> {
    let limit = limit_free_energy(pt, cfg)?;
    convergence_table(ns, pt, limit)
}
