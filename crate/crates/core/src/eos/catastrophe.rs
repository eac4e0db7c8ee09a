//! Onset of multivaluedness along a line of constant `y`.
//!
//! At fixed `(y, t)` the solutions of `psi2 = 0` form curves in moment space
//! which we parametrize by `r = m1 / m2`. Writing
//! `K(m2) = y + (3 m2 - 2) t - log(m2 / (2 (1 - m2)))`, the curve is
//! `K(m2) = log(1 - r^2) / 2` and `psi1 = 0` then reads
//! `x = atanh(r) - r m2 t`. Folds of the map along the line are the
//! stationary points of `x(r)`, and the fold count changes exactly when a
//! cusp crosses the line.

use serde::{Deserialize, Serialize};

use super::SolverConfig;
use crate::error::{PottsError, Result};
use crate::model::{MomentVector, ThermoPoint};
use crate::numeric::{bisect, solve3};
use crate::singularity::{cusp_residuals, fields_from_eos};

/// A fold point on the curve `psi2 = 0` at fixed `(y, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFold {
    pub r: f64,
    pub m: MomentVector,
    pub x: f64,
}

fn k_value(m2: f64, y: f64, t: f64) -> f64 {
    y + (3.0 * m2 - 2.0) * t - (m2 / (2.0 * (1.0 - m2))).ln()
}

fn k_slope(m2: f64, t: f64) -> f64 {
    3.0 * t - 1.0 / (m2 * (1.0 - m2))
}

/// Monotone pieces of `K` on `(0, 1)`.
fn monotone_pieces(t: f64) -> Vec<(f64, f64)> {
    let eps = 1e-14;
    if 3.0 * t <= 4.0 {
        return vec![(eps, 1.0 - eps)];
    }
    let s = (1.0 - 4.0 / (3.0 * t)).sqrt();
    let (a, b) = (0.5 * (1.0 - s), 0.5 * (1.0 + s));
    vec![(eps, a), (a, b), (b, 1.0 - eps)]
}

/// `m2` on one monotone piece with `K(m2) = c`, if any.
fn solve_piece(piece: (f64, f64), c: f64, y: f64, t: f64) -> Option<f64> {
    let f = |m2: f64| k_value(m2, y, t) - c;
    bisect(f, piece.0, piece.1, 1e-15)
}

/// `dx/dr` along the curve, up to a positive factor.
fn fold_function(r: f64, m2: f64, t: f64) -> f64 {
    let w = 1.0 - r * r;
    1.0 / w - t * m2 + t * r * r / (w * k_slope(m2, t))
}

fn x_of(r: f64, m2: f64, t: f64) -> f64 {
    r.atanh() - r * m2 * t
}

/// All fold points along the line at fixed `(y, t)`, found by scanning
/// `resolution` values of `r` per monotone piece and bisecting sign changes.
pub fn line_fold_points(y: f64, t: f64, resolution: usize) -> Vec<LineFold> {
    let r_max = 1.0 - 1e-9;
    let n = resolution.max(16);
    let mut folds = Vec::new();
    for piece in monotone_pieces(t) {
        let g_at = |r: f64| -> Option<(f64, f64)> {
            let m2 = solve_piece(piece, 0.5 * (1.0 - r * r).ln(), y, t)?;
            Some((fold_function(r, m2, t), m2))
        };
        let rs: Vec<f64> = (0..=n).map(|i| -r_max + 2.0 * r_max * i as f64 / n as f64).collect();
        let vals: Vec<Option<(f64, f64)>> = rs.iter().map(|&r| g_at(r)).collect();
        for i in 0..n {
            let (Some((ga, _)), Some((gb, _))) = (vals[i], vals[i + 1]) else {
                continue;
            };
            if ga == 0.0 || ga.signum() != gb.signum() {
                let g = |r: f64| g_at(r).map_or(f64::NAN, |v| v.0);
                let r = bisect(g, rs[i], rs[i + 1], 1e-15).unwrap_or(rs[i]);
                // reject sign flips through a pole or a gap in the piece
                let scale = ga.abs().max(gb.abs()).max(1.0);
                if let Some((gr, m2)) = g_at(r).filter(|v| v.0.abs() <= 1e-6 * scale) {
                    let _ = gr;
                    folds.push(LineFold {
                        r,
                        m: MomentVector::new(r * m2, m2),
                        x: x_of(r, m2, t),
                    });
                }
            }
        }
    }
    folds.sort_by(|a, b| a.x.total_cmp(&b.x));
    folds
}

/// Result of [`detect_catastrophe`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CatastropheOnset {
    pub y: f64,
    /// Onset time: the polished cusp time when the polish converged inside
    /// the bracket, otherwise the bracket midpoint.
    pub t_c: f64,
    /// Bisection bracket on the fold count change.
    pub bracket: (f64, f64),
    pub x_c: f64,
    pub m: MomentVector,
    /// `(J, tangency)` at `(m, t_c)`.
    pub cusp_residuals: [f64; 2],
    pub polished: bool,
    pub folds_before: usize,
    pub folds_after: usize,
}

/// Resolution of the `r` scan used by [`detect_catastrophe`].
pub const DEFAULT_PROFILE_RESOLUTION: usize = 4000;

/// First fold-count change along `y = const` for `t` in `[t_lo, t_hi]`.
///
/// Scans `t` in steps of at most `0.005`, bisects the first change to a
/// width of `1e-7` and then polishes the onset onto the cusp conditions.
/// Returns `Ok(None)` when the fold count never changes.
pub fn detect_catastrophe(y: f64, t_lo: f64, t_hi: f64, cfg: &SolverConfig) -> Result<Option<CatastropheOnset>> {
    cfg.validate()?;
    if !(y.is_finite() && t_lo.is_finite() && t_hi.is_finite()) || t_lo < 0.0 || t_hi <= t_lo {
        return Err(PottsError::InvalidPoint(format!(
            "need finite y and 0 <= t_lo < t_hi, got y = {y}, t in [{t_lo}, {t_hi}]"
        )));
    }
    let res = DEFAULT_PROFILE_RESOLUTION;
    let count = |t: f64| line_fold_points(y, t, res).len();
    let steps = ((t_hi - t_lo) / 0.005).ceil().max(1.0) as usize;
    let c0 = count(t_lo);
    let mut prev = t_lo;
    let mut bracket = None;
    for i in 1..=steps {
        let t = t_lo + (t_hi - t_lo) * i as f64 / steps as f64;
        if count(t) != c0 {
            bracket = Some((prev, t));
            break;
        }
        prev = t;
    }
    let Some((mut lo, mut hi)) = bracket else {
        return Ok(None);
    };
    while hi - lo > 1e-7 {
        let mid = 0.5 * (lo + hi);
        if count(mid) == c0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let after = line_fold_points(y, hi, res);
    let folds_after = after.len();
    // the newborn pair is the closest pair of folds just after onset
    let seed = closest_pair(&after)
        .map(|(a, b)| MomentVector::new(0.5 * (a.m.m1 + b.m.m1), 0.5 * (a.m.m2 + b.m.m2)))
        .or_else(|| after.first().map(|f| f.m))
        .ok_or(PottsError::SolverFailure)?;

    let mid = 0.5 * (lo + hi);
    let (m, t_c, polished) = match polish_cusp(seed, hi, y) {
        Some((m, t)) if (t - mid).abs() <= 1e-4 => (m, t, true),
        _ => (seed, mid, false),
    };
    let cusp = cusp_residuals(m, t_c)?;
    let (x_c, _) = fields_from_eos(m, t_c)?;
    Ok(Some(CatastropheOnset {
        y,
        t_c,
        bracket: (lo, hi),
        x_c,
        m,
        cusp_residuals: cusp,
        polished,
        folds_before: c0,
        folds_after,
    }))
}

fn closest_pair(folds: &[LineFold]) -> Option<(LineFold, LineFold)> {
    let mut best: Option<(f64, usize, usize)> = None;
    for i in 0..folds.len() {
        for j in i + 1..folds.len() {
            let d = folds[i].m.distance(&folds[j].m);
            if best.is_none_or(|b| d < b.0) {
                best = Some((d, i, j));
            }
        }
    }
    best.map(|(_, i, j)| (folds[i], folds[j]))
}

/// Newton on `(J, tangency, psi2)` in `(m1, m2, t)` at fixed `y`, with a
/// central-difference Jacobian.
fn polish_cusp(m0: MomentVector, t0: f64, y: f64) -> Option<(MomentVector, f64)> {
    let f = |v: [f64; 3]| -> Option<[f64; 3]> {
        let m = MomentVector::new(v[0], v[1]);
        let c = cusp_residuals(m, v[2]).ok()?;
        let p = ThermoPoint { x: 0.0, y, t: v[2] };
        let psi = crate::model::eos_residual_q3(m, p).ok()?;
        Some([c[0], c[1], psi[1]])
    };
    let mut v = [m0.m1, m0.m2, t0];
    for _ in 0..50 {
        let r = f(v)?;
        let rn = r.iter().map(|a| a * a).sum::<f64>().sqrt();
        if rn < 1e-13 {
            break;
        }
        let mut jac = [[0.0; 3]; 3];
        for k in 0..3 {
            let h = 1e-7 * v[k].abs().max(1e-3);
            let (mut a, mut b) = (v, v);
            a[k] += h;
            b[k] -= h;
            let (fa, fb) = (f(a)?, f(b)?);
            for i in 0..3 {
                jac[i][k] = (fa[i] - fb[i]) / (2.0 * h);
            }
        }
        let step = solve3(jac, [-r[0], -r[1], -r[2]])?;
        let mut lambda = 1.0;
        loop {
            let cand = [v[0] + lambda * step[0], v[1] + lambda * step[1], v[2] + lambda * step[2]];
            if let Some(rc) = f(cand) {
                if rc.iter().map(|a| a * a).sum::<f64>().sqrt() < rn {
                    v = cand;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < 1e-8 {
                return finalize(v, &f);
            }
        }
    }
    finalize(v, &f)
}

fn finalize(v: [f64; 3], f: &impl Fn([f64; 3]) -> Option<[f64; 3]>) -> Option<(MomentVector, f64)> {
    let r = f(v)?;
    (r.iter().all(|a| a.abs() <= 1e-8)).then(|| (MomentVector::new(v[0], v[1]), v[2]))
}
