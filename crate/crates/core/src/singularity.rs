//! Fold and cusp structure of the three-state equations of state.
//!
//! For fixed `t` the equations of state define a map of the plane
//! `(m1, m2) -> (psi1, psi2)`. Its fold set is `J = det(d psi / d m) = 0`
//! and cusps are the fold points where the gradient of the map is tangent
//! to the fold. In moment space the cusps lie on
//!
//! * line I:   `m1 - 3 m2 + 2 = 0`, critical time `1 / (2 (1 - m2))`, `m2 in [1/2, 1)`,
//! * line II:  `m1 + 3 m2 - 2 = 0`, same critical time,
//! * loop III: the quartic `2m1^4 + 18m2^4 + 12m1^2 m2^2 - 41m1^2 m2 - 23m2^3 + 25m1^2 + 7m2^2 = 0`,
//!   `m1 = +-beta/2`, critical time `4 / (3 (1 - m2)(5 - alpha))`, `m2 in [1/2, 7/9]`,
//!
//! with `alpha = sqrt(25 - 32 m2)` and
//! `beta = sqrt(41 m2 - 12 m2^2 - 25 + 5 alpha (1 - m2))`.
//! (`beta` here is unrelated to the inverse temperature.)

use serde::{Deserialize, Serialize};

use crate::error::{PottsError, Result};
use crate::model::{eos_jacobian_q3, MomentVector, DOMAIN_EPS};
use crate::numeric::{bisect, golden_section_min, linspace};

pub const LINE_M2_MIN: f64 = 0.5;
pub const LOOP_M2_MIN: f64 = 0.5;
pub const LOOP_M2_MAX: f64 = 7.0 / 9.0;

/// Which branch of the cusp locus a point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LocusId {
    #[serde(rename = "I")]
    LineI,
    #[serde(rename = "II")]
    LineII,
    /// Loop branch with `m1 = +beta/2`.
    #[serde(rename = "III+")]
    LoopPlus,
    /// Loop branch with `m1 = -beta/2`.
    #[serde(rename = "III-")]
    LoopMinus,
}

impl LocusId {
    pub const ALL: [LocusId; 4] = [LocusId::LineI, LocusId::LineII, LocusId::LoopPlus, LocusId::LoopMinus];

    pub fn label(&self) -> &'static str {
        match self {
            LocusId::LineI => "I",
            LocusId::LineII => "II",
            LocusId::LoopPlus => "III+",
            LocusId::LoopMinus => "III-",
        }
    }

    pub fn is_line(&self) -> bool {
        matches!(self, LocusId::LineI | LocusId::LineII)
    }

    /// Admissible `m2` interval; the upper end of the lines is open.
    pub fn m2_domain(&self) -> (f64, f64) {
        if self.is_line() {
            (LINE_M2_MIN, 1.0)
        } else {
            (LOOP_M2_MIN, LOOP_M2_MAX)
        }
    }
}

/// A cusp singularity: moment-space location, critical time, field image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CuspPoint {
    pub locus: LocusId,
    pub m: MomentVector,
    pub t_c: f64,
    pub x: f64,
    pub y: f64,
}

/// `J = dpsi1/dm1 dpsi2/dm2 - dpsi1/dm2 dpsi2/dm1`.
pub fn fold_residual(m: MomentVector, t: f64) -> Result<f64> {
    let j = eos_jacobian_q3(m, t)?;
    Ok(j[0][0] * j[1][1] - j[0][1] * j[1][0])
}

/// Analytic gradient `(dJ/dm1, dJ/dm2)`.
pub fn fold_gradient(m: MomentVector, t: f64) -> Result<[f64; 2]> {
    let j = eos_jacobian_q3(m, t)?;
    Ok(fold_gradient_unchecked(m.m1, m.m2, j))
}

fn fold_gradient_unchecked(m1: f64, m2: f64, j: [[f64; 2]; 2]) -> [f64; 2] {
    let d = (m2 - m1) * (m2 + m1);
    let d2 = d * d;
    // derivatives of m2/d and m1/d
    let s = (m1 * m1 + m2 * m2) / d2;
    let u = -2.0 * m1 * m2 / d2;
    let (a, c, b) = (j[0][0], j[0][1], j[1][1]);
    // d j11 = -d(m2/d), d j12 = d(m1/d), d j22 = -d(m2/d) + d(1/(m2-1))
    let (da1, da2) = (u, s);
    let (dc1, dc2) = (s, u);
    let (db1, db2) = (u, s - 1.0 / ((m2 - 1.0) * (m2 - 1.0)));
    [
        da1 * b + a * db1 - 2.0 * c * dc1,
        da2 * b + a * db2 - 2.0 * c * dc2,
    ]
}

/// Tangency conditions `dpsi_i/dm2 dJ/dm1 - dpsi_i/dm1 dJ/dm2` for `i = 1, 2`.
pub fn tangency_residuals(m: MomentVector, t: f64) -> Result<[f64; 2]> {
    let j = eos_jacobian_q3(m, t)?;
    let g = fold_gradient_unchecked(m.m1, m.m2, j);
    Ok([
        j[0][1] * g[0] - j[0][0] * g[1],
        j[1][1] * g[0] - j[1][0] * g[1],
    ])
}

/// `(J, tangency_1)`; both vanish at a cusp. The second tangency condition
/// is linearly dependent on the first wherever `J = 0`.
pub fn cusp_residuals(m: MomentVector, t: f64) -> Result<[f64; 2]> {
    let j = eos_jacobian_q3(m, t)?;
    let g = fold_gradient_unchecked(m.m1, m.m2, j);
    Ok([
        j[0][0] * j[1][1] - j[0][1] * j[1][0],
        j[0][1] * g[0] - j[0][0] * g[1],
    ])
}

/// Critical time on lines I and II.
pub fn critical_time_lines(m2: f64) -> f64 {
    1.0 / (2.0 * (1.0 - m2))
}

fn check_m2(m2: f64, lo: f64, hi: f64, hi_open: bool) -> Result<()> {
    let above = if hi_open { m2 >= hi } else { m2 > hi + DOMAIN_EPS };
    if !m2.is_finite() || m2 < lo - DOMAIN_EPS || above {
        return Err(PottsError::LocusDomain { m2, lo, hi });
    }
    Ok(())
}

/// `(m1, t_c)` on line I (`m1 = 3 m2 - 2`) or line II (`m1 = 2 - 3 m2`).
pub fn cusp_locus_lines(m2: f64, locus: LocusId) -> Result<(f64, f64)> {
    check_m2(m2, LINE_M2_MIN, 1.0, true)?;
    let m1 = match locus {
        LocusId::LineI => 3.0 * m2 - 2.0,
        LocusId::LineII => 2.0 - 3.0 * m2,
        _ => {
            return Err(PottsError::InvalidModel(format!(
                "{} is not a straight-line locus",
                locus.label()
            )))
        }
    };
    Ok((m1, critical_time_lines(m2)))
}

/// Loop auxiliaries `(alpha, beta)`; `beta^2` round-off below zero is clamped.
pub fn loop_auxiliaries(m2: f64) -> Result<(f64, f64)> {
    check_m2(m2, LOOP_M2_MIN, LOOP_M2_MAX, false)?;
    let m2 = m2.clamp(LOOP_M2_MIN, LOOP_M2_MAX);
    let alpha = (25.0 - 32.0 * m2).max(0.0).sqrt();
    let beta_sq = 41.0 * m2 - 12.0 * m2 * m2 - 25.0 + 5.0 * alpha * (1.0 - m2);
    if beta_sq < -1e-9 {
        return Err(PottsError::LocusDomain {
            m2,
            lo: LOOP_M2_MIN,
            hi: LOOP_M2_MAX,
        });
    }
    Ok((alpha, beta_sq.max(0.0).sqrt()))
}

/// Critical time on the loop, `4 / (3 (1 - m2)(5 - alpha))`.
pub fn critical_time_loop(m2: f64) -> Result<f64> {
    let (alpha, _) = loop_auxiliaries(m2)?;
    Ok(loop_time(m2, alpha))
}

fn loop_time(m2: f64, alpha: f64) -> f64 {
    4.0 / (3.0 * (1.0 - m2) * (5.0 - alpha))
}

/// `(m1, t_c)` on the loop, `m1 = +-beta/2`.
pub fn cusp_locus_loop(m2: f64, locus: LocusId) -> Result<(f64, f64)> {
    let (alpha, beta) = loop_auxiliaries(m2)?;
    let sign = match locus {
        LocusId::LoopPlus => 1.0,
        LocusId::LoopMinus => -1.0,
        _ => {
            return Err(PottsError::InvalidModel(format!(
                "{} is not a loop locus",
                locus.label()
            )))
        }
    };
    Ok((sign * 0.5 * beta, loop_time(m2, alpha)))
}

/// `(m1, t_c)` on any locus.
pub fn cusp_locus(m2: f64, locus: LocusId) -> Result<(f64, f64)> {
    if locus.is_line() {
        cusp_locus_lines(m2, locus)
    } else {
        cusp_locus_loop(m2, locus)
    }
}

/// The quartic defining the loop, evaluated as written.
pub fn quartic_residual(m1: f64, m2: f64) -> f64 {
    let (a, b) = (m1 * m1, m2 * m2);
    2.0 * a * a + 18.0 * b * b + 12.0 * a * b - 41.0 * a * m2 - 23.0 * b * m2 + 25.0 * a + 7.0 * b
}

/// Fields `(x, y)` for which `m` is a stationary point at coupling `t`.
pub fn fields_from_eos(m: MomentVector, t: f64) -> Result<(f64, f64)> {
    let p = m.raw_probabilities();
    for (index, &value) in p.iter().enumerate() {
        if value <= 0.0 {
            return Err(PottsError::SingularDomain { index, value });
        }
    }
    let (l1, l2, l3) = (p[0].ln(), p[1].ln(), p[2].ln());
    let x = -m.m1 * t + 0.5 * (l1 - l2);
    let y = -(3.0 * m.m2 - 2.0) * t + 0.5 * (l1 + l2) - l3;
    Ok((x, y))
}

/// Closed-form image of a cusp in the `(x, y)` plane.
///
/// Lines: `x = y = (2 - 3m2)/(2(1 - m2)) + log((2m2 - 1)/(1 - m2))/2` on I,
/// and `x = -y` with both terms negated on II. Loop:
/// `x = -+(2 beta/(3(1-m2)(5-alpha)) + log((2m2-beta)/(2m2+beta))/2)` for
/// `m1 = +-beta/2`, and
/// `y = -4(3m2-2)/(3(1-m2)(5-alpha)) + log((2m2-beta)(2m2+beta)/(16(1-m2)^2))/2`.
pub fn map_cusp_to_fields(locus: LocusId, m2: f64) -> Result<(f64, f64)> {
    if locus.is_line() {
        check_m2(m2, LINE_M2_MIN, 1.0, true)?;
        let arg = (2.0 * m2 - 1.0) / (1.0 - m2);
        if arg <= 0.0 {
            return Err(PottsError::InfiniteField { m2 });
        }
        let v = (2.0 - 3.0 * m2) / (2.0 * (1.0 - m2)) + 0.5 * arg.ln();
        Ok(match locus {
            LocusId::LineI => (v, v),
            _ => (-v, v),
        })
    } else {
        let (alpha, beta) = loop_auxiliaries(m2)?;
        let m2 = m2.clamp(LOOP_M2_MIN, LOOP_M2_MAX);
        let den = 3.0 * (1.0 - m2) * (5.0 - alpha);
        let (lo, hi) = (2.0 * m2 - beta, 2.0 * m2 + beta);
        let xabs = 2.0 * beta / den + 0.5 * (lo / hi).ln();
        let y = -4.0 * (3.0 * m2 - 2.0) / den
            + 0.5 * (lo * hi / (16.0 * (1.0 - m2) * (1.0 - m2))).ln();
        let x = if locus == LocusId::LoopPlus { -xabs } else { xabs };
        Ok((x, y))
    }
}

/// Full cusp record for a locus point.
pub fn cusp_point(locus: LocusId, m2: f64) -> Result<CuspPoint> {
    let (m1, t_c) = cusp_locus(m2, locus)?;
    let (x, y) = map_cusp_to_fields(locus, m2)?;
    Ok(CuspPoint {
        locus,
        m: MomentVector::new(m1, m2),
        t_c,
        x,
        y,
    })
}

/// Cusps of one locus whose field image has the given `y`, ascending in
/// `m2`. Sign changes of `y(m2) - y` are found on a grid of `samples`
/// points and refined by bisection. Lines are searched above
/// [`DEFAULT_LINE_M2_START`] up to `m2 = 0.999`.
pub fn locus_points_at_y(locus: LocusId, y: f64, samples: usize) -> Result<Vec<CuspPoint>> {
    if samples < 2 {
        return Err(PottsError::Config(format!("samples = {samples} < 2")));
    }
    let (lo, hi) = if locus.is_line() {
        (DEFAULT_LINE_M2_START, 0.999)
    } else {
        (LOOP_M2_MIN, LOOP_M2_MAX)
    };
    let g = |m2: f64| map_cusp_to_fields(locus, m2).map(|(_, v)| v - y).unwrap_or(f64::NAN);
    let grid = linspace(lo, hi, samples);
    let mut out = Vec::new();
    for w in grid.windows(2) {
        let (a, b) = (g(w[0]), g(w[1]));
        if a == 0.0 {
            out.push(cusp_point(locus, w[0])?);
        } else if a * b < 0.0 {
            if let Some(m2) = bisect(g, w[0], w[1], 1e-15) {
                out.push(cusp_point(locus, m2)?);
            }
        }
    }
    if g(hi) == 0.0 {
        out.push(cusp_point(locus, hi)?);
    }
    Ok(out)
}

/// One sampled point of a locus. Field coordinates are `None` where the
/// field map diverges, with the reason recorded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocusSample {
    pub locus: LocusId,
    pub m: MomentVector,
    pub t_c: f64,
    pub fields: Option<(f64, f64)>,
    /// `max(|J|, |tangency_1|)` at `(m, t_c)`; `None` on the simplex boundary.
    pub cusp_residual: Option<f64>,
    pub reason: Option<String>,
}

/// Largest `m2` sampled on the straight lines by default (`t_c = 10`).
pub const DEFAULT_LINE_M2_MAX: f64 = 0.95;

/// `n` samples uniform in `m2` over `[lo, hi]` of the given locus.
pub fn sample_locus(locus: LocusId, lo: f64, hi: f64, n: usize) -> Result<Vec<LocusSample>> {
    linspace(lo, hi, n)
        .into_iter()
        .map(|m2| {
            let (m1, t_c) = cusp_locus(m2, locus)?;
            let m = MomentVector::new(m1, m2);
            let cusp_residual = cusp_residuals(m, t_c)
                .ok()
                .map(|r| r[0].abs().max(r[1].abs()));
            let (fields, reason) = match map_cusp_to_fields(locus, m2) {
                Ok(f) => (Some(f), None),
                Err(PottsError::InfiniteField { .. }) => (
                    None,
                    Some(format!(
                        "field map diverges at m2 = {m2} (log singularity; cusp on the simplex boundary)"
                    )),
                ),
                Err(e) => return Err(e),
            };
            Ok(LocusSample {
                locus,
                m,
                t_c,
                fields,
                cusp_residual,
                reason,
            })
        })
        .collect()
}

/// Smallest interior `m2` sampled on the straight lines. Closer to the
/// simplex boundary the residuals lose accuracy like `(m2 - 1/2)^-4`.
pub const DEFAULT_LINE_M2_START: f64 = 0.51;

/// Default sampling of all four loci: `n` rows per locus. Each line starts
/// with its boundary point `m2 = 1/2`, which carries a reason instead of
/// field coordinates, followed by `n - 1` interior samples.
pub fn sample_all_loci(n: usize) -> Result<Vec<LocusSample>> {
    let mut out = Vec::with_capacity(4 * n);
    for locus in LocusId::ALL {
        if locus.is_line() {
            out.extend(sample_locus(locus, LINE_M2_MIN, LINE_M2_MIN, 1)?);
            out.extend(sample_locus(
                locus,
                DEFAULT_LINE_M2_START,
                DEFAULT_LINE_M2_MAX,
                n.saturating_sub(1),
            )?);
        } else {
            out.extend(sample_locus(locus, LOOP_M2_MIN, LOOP_M2_MAX, n)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CuspEventKind {
    Creation,
    Collision,
    Split,
    Annihilation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CuspEvent {
    pub kind: CuspEventKind,
    pub time: f64,
    pub locations: Vec<MomentVector>,
    pub description: String,
    /// Largest cusp residual over the event locations.
    pub residual: f64,
}

/// Residual offset used for events sitting on the simplex boundary, where
/// the residuals are evaluated along the line locus approaching the point.
const BOUNDARY_APPROACH: f64 = 1e-2;

fn event_residual(locations: &[(LocusId, f64)]) -> f64 {
    locations
        .iter()
        .map(|&(locus, m2)| {
            let m2 = if locus.is_line() && m2 <= LINE_M2_MIN {
                LINE_M2_MIN + BOUNDARY_APPROACH
            } else {
                m2
            };
            let (m1, t) = cusp_locus(m2, locus).expect("event on locus");
            let r = cusp_residuals(MomentVector::new(m1, m2), t).expect("interior event");
            r[0].abs().max(r[1].abs())
        })
        .fold(0.0, f64::max)
}

fn event(kind: CuspEventKind, time: f64, locations: &[(LocusId, f64)], description: &str) -> CuspEvent {
    CuspEvent {
        kind,
        time,
        locations: locations
            .iter()
            .map(|&(locus, m2)| {
                let (m1, _) = cusp_locus(m2, locus).expect("event on locus");
                MomentVector::new(m1, m2)
            })
            .collect(),
        description: description.to_string(),
        residual: event_residual(locations),
    }
}

/// Creation, motion and annihilation of cusps as `t` grows.
pub fn cusp_event_timeline() -> Vec<CuspEvent> {
    use CuspEventKind::*;
    use LocusId::*;
    let t_first = critical_time_lines(0.5);
    let m2_cross = 11.0 / 18.0;
    let m2_top = 7.0 / 9.0;
    let t_cross = critical_time_loop(m2_cross).unwrap();
    let t_top = critical_time_loop(m2_top).unwrap();
    let t_upper = critical_time_loop(0.75).unwrap();
    let t_bottom = critical_time_loop(0.5).unwrap();
    vec![
        event(
            Creation,
            t_first,
            &[(LineI, 0.5), (LineII, 0.5)],
            "two cusps created at the bottom of lines I and II",
        ),
        event(
            Collision,
            t_cross,
            &[(LineI, m2_cross), (LineII, m2_cross)],
            "line cusps reach the lower loop-line intersections",
        ),
        event(
            Creation,
            t_top,
            &[(LoopPlus, m2_top)],
            "extra cusp created at the top of the loop",
        ),
        event(
            Split,
            t_cross,
            &[(LoopPlus, m2_cross), (LoopMinus, m2_cross)],
            "each intersection cusp splits in three: one continues up the line, two run along the loop",
        ),
        event(
            Split,
            t_top,
            &[(LoopPlus, m2_top)],
            "top-of-loop cusp splits in two running in opposite directions",
        ),
        event(
            Annihilation,
            t_upper,
            &[(LoopPlus, 0.75), (LoopMinus, 0.75)],
            "loop cusps collide and annihilate at the upper loop-line intersections",
        ),
        event(
            Annihilation,
            t_bottom,
            &[(LoopPlus, 0.5)],
            "loop cusps collide and annihilate at the bottom of the loop",
        ),
    ]
}

/// Extremum of a critical-time function located numerically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeExtremum {
    pub m2: f64,
    pub t_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalTimeExtrema {
    /// Minimum of `t_c` along the straight lines.
    pub line_min: TimeExtremum,
    /// Local minima of `t_c` on the loop, ascending in `m2`.
    pub loop_min: Vec<TimeExtremum>,
    /// Local maxima of `t_c` on the loop, ascending in `m2`.
    pub loop_max: Vec<TimeExtremum>,
}

/// `d t_c / d m2` on the loop, vanishing where `3 alpha^2 - 10 alpha + 7 = 0`.
fn loop_time_derivative(m2: f64) -> f64 {
    let alpha = (25.0 - 32.0 * m2).sqrt();
    let g = (1.0 - m2) * (5.0 - alpha);
    let dg = -(5.0 - alpha) + (1.0 - m2) * 16.0 / alpha;
    -4.0 * dg / (3.0 * g * g)
}

/// Local minima of `f` on `[lo, hi]`: a coarse scan brackets each one, then
/// golden-section search refines it. Endpoint minima are reported as such.
fn local_minima<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, scan: usize, tol: f64) -> Vec<(f64, bool)> {
    let xs = linspace(lo, hi, scan);
    let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let n = xs.len();
    let mut out = Vec::new();
    if fs[0] <= fs[1] {
        let (x, _) = golden_section_min(&f, xs[0], xs[1], tol);
        out.push((if f(xs[0]) <= f(x) { xs[0] } else { x }, false));
    }
    for i in 1..n - 1 {
        if fs[i] < fs[i - 1] && fs[i] <= fs[i + 1] {
            let (x, _) = golden_section_min(&f, xs[i - 1], xs[i + 1], tol);
            out.push((x, true));
        }
    }
    if fs[n - 1] < fs[n - 2] {
        let (x, _) = golden_section_min(&f, xs[n - 2], xs[n - 1], tol);
        out.push((if f(xs[n - 1]) <= f(x) { xs[n - 1] } else { x }, false));
    }
    out
}

/// Interior extrema are polished by bisection on the analytic derivative,
/// since a flat extremum pins its location only to about `sqrt(eps)`.
fn polish_loop_extremum((m2, interior): (f64, bool)) -> TimeExtremum {
    let m2 = if interior {
        let w = 1e-4;
        let (lo, hi) = ((m2 - w).max(LOOP_M2_MIN), (m2 + w).min(LOOP_M2_MAX));
        bisect(loop_time_derivative, lo, hi, 1e-15).unwrap_or(m2)
    } else {
        m2
    };
    TimeExtremum {
        m2,
        t_c: critical_time_loop(m2).expect("extremum inside the loop domain"),
    }
}

/// Numerical extremization of the implemented critical-time functions.
pub fn critical_time_extrema() -> CriticalTimeExtrema {
    let tol = 1e-12;
    let scan = 64;
    let line = local_minima(critical_time_lines, LINE_M2_MIN, 0.99, scan, tol)[0].0;
    let tl = |m2: f64| critical_time_loop(m2).unwrap();
    let loop_min = local_minima(tl, LOOP_M2_MIN, LOOP_M2_MAX, scan, tol)
        .into_iter()
        .map(polish_loop_extremum)
        .collect();
    let loop_max = local_minima(|m| -tl(m), LOOP_M2_MIN, LOOP_M2_MAX, scan, tol)
        .into_iter()
        .map(polish_loop_extremum)
        .collect();
    CriticalTimeExtrema {
        line_min: TimeExtremum {
            m2: line,
            t_c: critical_time_lines(line),
        },
        loop_min,
        loop_max,
    }
}
