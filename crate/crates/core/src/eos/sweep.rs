//! Profiles of the stationary points along `y = const` at fixed `t`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{select_equilibrium, solve_branches, EquilibriumBranch, SolverConfig};
use crate::error::{PottsError, Result};
use crate::model::{eos_jacobian_q3, eos_residual_q3, MomentVector, ThermoPoint};
use crate::numeric::{linspace, solve3};
use crate::singularity::{fold_gradient, fold_residual};

/// Branches found at one value of `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSample {
    pub x: f64,
    pub branches: Vec<EquilibriumBranch>,
    /// Continuation id of each branch, parallel to `branches`.
    pub ids: Vec<usize>,
    /// Index into `branches` of the selected equilibrium.
    pub equilibrium: Option<usize>,
    /// Solver error for this sample, if any.
    pub error: Option<String>,
}

/// Where two branches merge, refined onto the fold set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldEndpoint {
    pub x: f64,
    pub m: MomentVector,
    pub fold_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub y: f64,
    pub t: f64,
    pub samples: Vec<SweepSample>,
    /// Maximal runs of samples with more than one branch, as `(x_first, x_last)`.
    pub multivalued_intervals: Vec<(f64, f64)>,
    /// Fold points between adjacent samples whose branch count differs.
    pub fold_endpoints: Vec<FoldEndpoint>,
}

impl SweepResult {
    pub fn branch_counts(&self) -> Vec<usize> {
        self.samples.iter().map(|s| s.branches.len()).collect()
    }

    pub fn is_multivalued(&self) -> bool {
        !self.multivalued_intervals.is_empty()
    }
}

/// Solve at `samples` evenly spaced `x` in `[x_lo, x_hi]` and link branches
/// between neighbours by nearest moment-space distance.
pub fn sweep_profile(
    y: f64,
    x_lo: f64,
    x_hi: f64,
    samples: usize,
    t: f64,
    cfg: &SolverConfig,
) -> Result<SweepResult> {
    cfg.validate()?;
    if !(x_lo.is_finite() && x_hi.is_finite()) || x_lo > x_hi {
        return Err(PottsError::InvalidPoint(format!("x-range [{x_lo}, {x_hi}] is not ordered")));
    }
    if samples < 2 {
        return Err(PottsError::Config("a sweep needs at least two samples".into()));
    }
    ThermoPoint::new(x_lo, y, t)?;
    let xs = linspace(x_lo, x_hi, samples);
    let solved: Vec<SweepSample> = xs
        .par_iter()
        .map(|&x| {
            let pt = ThermoPoint { x, y, t };
            match solve_branches(pt, cfg) {
                Ok(branches) => {
                    let equilibrium = select_equilibrium(&branches, cfg).ok().map(|s| s.index);
                    SweepSample {
                        x,
                        branches,
                        ids: Vec::new(),
                        equilibrium,
                        error: None,
                    }
                }
                Err(e) => SweepSample {
                    x,
                    branches: Vec::new(),
                    ids: Vec::new(),
                    equilibrium: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let mut samples = solved;
    assign_ids(&mut samples, cfg.continuation_radius);
    let multivalued_intervals = multivalued_runs(&samples);
    let fold_endpoints = fold_endpoints(&samples, y, t);
    Ok(SweepResult {
        y,
        t,
        samples,
        multivalued_intervals,
        fold_endpoints,
    })
}

fn assign_ids(samples: &mut [SweepSample], radius: f64) {
    let mut next = 0;
    let mut prev: Vec<(usize, MomentVector)> = Vec::new();
    for s in samples.iter_mut() {
        let mut ids = vec![usize::MAX; s.branches.len()];
        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for (i, b) in s.branches.iter().enumerate() {
            for (k, (_, m)) in prev.iter().enumerate() {
                let d = b.m.distance(m);
                if d <= radius {
                    pairs.push((d, i, k));
                }
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut used = vec![false; prev.len()];
        for (_, i, k) in pairs {
            if ids[i] == usize::MAX && !used[k] {
                ids[i] = prev[k].0;
                used[k] = true;
            }
        }
        for id in ids.iter_mut() {
            if *id == usize::MAX {
                *id = next;
                next += 1;
            }
        }
        if s.error.is_none() {
            prev = ids.iter().copied().zip(s.branches.iter().map(|b| b.m)).collect();
        }
        s.ids = ids;
    }
}

fn multivalued_runs(samples: &[SweepSample]) -> Vec<(f64, f64)> {
    let mut runs = Vec::new();
    let mut start: Option<f64> = None;
    let mut last = 0.0;
    for s in samples {
        if s.branches.len() > 1 {
            if start.is_none() {
                start = Some(s.x);
            }
            last = s.x;
        } else if let Some(a) = start.take() {
            runs.push((a, last));
        }
    }
    if let Some(a) = start {
        runs.push((a, last));
    }
    runs
}

fn fold_endpoints(samples: &[SweepSample], y: f64, t: f64) -> Vec<FoldEndpoint> {
    let mut out = Vec::new();
    for w in samples.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.error.is_some() || b.error.is_some() || a.branches.len() == b.branches.len() {
            continue;
        }
        let (few, many) = if a.branches.len() < b.branches.len() { (a, b) } else { (b, a) };
        // branches on the richer side with no continuation partner merge at the fold
        let orphans: Vec<MomentVector> = many
            .ids
            .iter()
            .zip(&many.branches)
            .filter(|(id, _)| !few.ids.contains(id))
            .map(|(_, br)| br.m)
            .collect();
        let seeds = closest_pairs(&orphans);
        for (p, q) in seeds {
            let m0 = MomentVector::new(0.5 * (p.m1 + q.m1), 0.5 * (p.m2 + q.m2));
            let (lo, hi) = (a.x.min(b.x), a.x.max(b.x));
            if let Some(f) = refine_fold(m0, many.x, y, t) {
                let slack = 0.5 * (hi - lo);
                if f.x >= lo - slack && f.x <= hi + slack {
                    out.push(f);
                    continue;
                }
            }
            let fold = fold_residual(m0, t).unwrap_or(f64::NAN);
            out.push(FoldEndpoint {
                x: 0.5 * (lo + hi),
                m: m0,
                fold_residual: fold,
            });
        }
    }
    out
}

fn closest_pairs(ms: &[MomentVector]) -> Vec<(MomentVector, MomentVector)> {
    let mut left: Vec<MomentVector> = ms.to_vec();
    let mut out = Vec::new();
    while left.len() >= 2 {
        let mut best = (f64::INFINITY, 0, 1);
        for i in 0..left.len() {
            for j in i + 1..left.len() {
                let d = left[i].distance(&left[j]);
                if d < best.0 {
                    best = (d, i, j);
                }
            }
        }
        let (_, i, j) = best;
        out.push((left[i], left[j]));
        left.remove(j);
        left.remove(i);
    }
    out
}

/// Newton on `(psi1, psi2, J)` in `(m1, m2, x)` at fixed `(y, t)`.
fn refine_fold(m0: MomentVector, x0: f64, y: f64, t: f64) -> Option<FoldEndpoint> {
    let mut m = m0;
    let mut x = x0;
    for _ in 0..60 {
        let pt = ThermoPoint { x, y, t };
        let psi = eos_residual_q3(m, pt).ok()?;
        let j = fold_residual(m, t).ok()?;
        let r = [psi[0], psi[1], j];
        if r.iter().all(|v| v.abs() < 1e-13) {
            break;
        }
        let h = eos_jacobian_q3(m, t).ok()?;
        let g = fold_gradient(m, t).ok()?;
        let a = [[h[0][0], h[0][1], 1.0], [h[1][0], h[1][1], 0.0], [g[0], g[1], 0.0]];
        let step = solve3(a, [-r[0], -r[1], -r[2]])?;
        let mut lambda = 1.0;
        let rn = r.iter().map(|v| v * v).sum::<f64>();
        loop {
            let cand = MomentVector::new(m.m1 + lambda * step[0], m.m2 + lambda * step[1]);
            let xc = x + lambda * step[2];
            let ok = cand.min_probability() > 0.0
                && eos_residual_q3(cand, ThermoPoint { x: xc, y, t })
                    .ok()
                    .zip(fold_residual(cand, t).ok())
                    .is_some_and(|(p, jc)| p[0] * p[0] + p[1] * p[1] + jc * jc < rn);
            if ok {
                m = cand;
                x = xc;
                break;
            }
            lambda *= 0.5;
            if lambda < 1e-10 {
                break;
            }
        }
        if lambda < 1e-10 {
            break;
        }
    }
    let fold = fold_residual(m, t).ok()?;
    let psi = eos_residual_q3(m, ThermoPoint { x, y, t }).ok()?;
    (fold.abs() <= 1e-6 && psi.iter().all(|v| v.abs() <= 1e-9)).then_some(FoldEndpoint {
        x,
        m,
        fold_residual: fold,
    })
}
