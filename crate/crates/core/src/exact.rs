//! Exact finite-N partition function of the three-state model.
//!
//! The Hamiltonian depends on a configuration only through the occupation
//! numbers `(n_plus, n_minus, n_zero)`, so
//!
//! ```text
//! Z_N = sum_classes  N! / (n+! n-! n0!)  exp(N [t(mu1^2/2 + 3 mu2^2/2 - 2 mu2) + x mu1 + y mu2])
//! ```
//!
//! with `mu1 = (n+ - n-)/N` and `mu2 = (n+ + n-)/N`. The sum has
//! `(N+1)(N+2)/2` terms and is evaluated in log space.
//!
//! Classes are visited row by row in `s = n+ + n-`; inside a row the
//! mirror classes `(n+, n-)` and `(n-, n+)` are folded into one term with a
//! commutative combination, so `log Z` is bit-for-bit even in `x` and the
//! first moment bit-for-bit odd. Rows may be evaluated in parallel; they
//! are always merged in ascending `s`, so results do not depend on the
//! thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PottsError, Result};
use crate::model::ThermoPoint;

/// Largest supported system size.
pub const MAX_N: usize = 20_000;

/// Rows below this size are summed on the calling thread.
const PARALLEL_MIN_N: usize = 256;

/// Occupation numbers of one class of configurations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OccupationClass {
    pub n_plus: usize,
    pub n_minus: usize,
    pub n_zero: usize,
    /// `log(N! / (n+! n-! n0!))`.
    pub log_multiplicity: f64,
}

impl OccupationClass {
    pub fn n(&self) -> usize {
        self.n_plus + self.n_minus + self.n_zero
    }

    pub fn mu1(&self) -> f64 {
        (self.n_plus as f64 - self.n_minus as f64) / self.n() as f64
    }

    pub fn mu2(&self) -> f64 {
        (self.n_plus + self.n_minus) as f64 / self.n() as f64
    }
}

/// Cumulative table of `log k!` for `k = 0..=n`, Kahan-summed.
#[derive(Debug, Clone)]
pub struct LogFactorial(Vec<f64>);

impl LogFactorial {
    pub fn new(n: usize) -> Self {
        let mut table = Vec::with_capacity(n + 1);
        table.push(0.0);
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for k in 1..=n {
            let y = (k as f64).ln() - comp;
            let next = sum + y;
            comp = (next - sum) - y;
            sum = next;
            table.push(sum);
        }
        Self(table)
    }

    #[inline]
    pub fn get(&self, k: usize) -> f64 {
        self.0[k]
    }

    pub fn multinomial(&self, a: usize, b: usize, c: usize) -> f64 {
        self.get(a + b + c) - self.get(a) - self.get(b) - self.get(c)
    }
}

/// Every occupation class of an `n`-spin system, in row order.
pub fn occupation_classes(n: usize) -> impl Iterator<Item = OccupationClass> {
    let lf = LogFactorial::new(n);
    (0..=n).flat_map(move |n_plus| {
        let lf = lf.clone();
        (0..=n - n_plus).map(move |n_minus| {
            let n_zero = n - n_plus - n_minus;
            OccupationClass {
                n_plus,
                n_minus,
                n_zero,
                log_multiplicity: lf.multinomial(n_plus, n_minus, n_zero),
            }
        })
    })
}

/// `N [t(mu1^2/2 + 3 mu2^2/2 - 2 mu2) + x mu1 + y mu2]`.
#[inline]
pub fn class_exponent(n: usize, mu1: f64, mu2: f64, pt: &ThermoPoint) -> f64 {
    let interaction = 0.5 * mu1 * mu1 + 1.5 * mu2 * mu2 - 2.0 * mu2;
    n as f64 * (pt.t * interaction + pt.x * mu1 + pt.y * mu2)
}

/// Streaming log-sum-exp with `K` weighted observables.
///
/// Holds `max` and `sum_i exp(l_i - max) * (1, v_i)`; the running maximum
/// keeps every exponential in `(0, 1]`.
#[derive(Debug, Clone, Copy)]
struct WeightedLse<const K: usize> {
    max: f64,
    weight: f64,
    obs: [f64; K],
}

impl<const K: usize> WeightedLse<K> {
    fn empty() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            weight: 0.0,
            obs: [0.0; K],
        }
    }

    #[inline]
    fn push(&mut self, logw: f64, values: [f64; K]) {
        if logw > self.max {
            let scale = (self.max - logw).exp();
            self.weight *= scale;
            for o in &mut self.obs {
                *o *= scale;
            }
            self.max = logw;
        }
        let w = (logw - self.max).exp();
        self.weight += w;
        for (o, v) in self.obs.iter_mut().zip(values) {
            *o += w * v;
        }
    }

    fn merge(&mut self, other: &Self) {
        if other.weight == 0.0 {
            return;
        }
        let (a, b) = if other.max > self.max {
            ((self.max - other.max).exp(), 1.0)
        } else {
            (1.0, (other.max - self.max).exp())
        };
        self.max = self.max.max(other.max);
        self.weight = self.weight * a + other.weight * b;
        for (o, p) in self.obs.iter_mut().zip(other.obs) {
            *o = *o * a + p * b;
        }
    }

    fn log_total(&self) -> f64 {
        self.max + self.weight.ln()
    }

    fn mean(&self, k: usize) -> f64 {
        self.obs[k] / self.weight
    }
}

/// Observables carried through the class sum. `odd` observables change sign
/// under `mu1 -> -mu1`, `even` ones do not.
trait ClassObservables<const K: usize>: Sync {
    fn even(&self, n: usize, mu1: f64, mu2: f64) -> [f64; K];
    fn odd_mask(&self) -> [bool; K];
}

struct NoObservables;

impl ClassObservables<0> for NoObservables {
    fn even(&self, _: usize, _: f64, _: f64) -> [f64; 0] {
        []
    }
    fn odd_mask(&self) -> [bool; 0] {
        []
    }
}

struct Moments;

impl ClassObservables<2> for Moments {
    fn even(&self, _: usize, mu1: f64, mu2: f64) -> [f64; 2] {
        [mu1, mu2]
    }
    fn odd_mask(&self) -> [bool; 2] {
        [true, false]
    }
}

/// Per-class derivatives of the Boltzmann factor divided by the factor:
/// `d/dt`, `d/dy`, `d2/dx2`, `d2/dy2`.
struct Derivatives;

impl ClassObservables<4> for Derivatives {
    fn even(&self, n: usize, mu1: f64, mu2: f64) -> [f64; 4] {
        let nf = n as f64;
        [
            nf * (0.5 * mu1 * mu1 + 1.5 * mu2 * mu2 - 2.0 * mu2),
            nf * mu2,
            nf * nf * mu1 * mu1,
            nf * nf * mu2 * mu2,
        ]
    }
    fn odd_mask(&self) -> [bool; 4] {
        [false; 4]
    }
}

fn check_size(n: usize) -> Result<()> {
    if n == 0 || n > MAX_N {
        return Err(PottsError::Size { n, max: MAX_N });
    }
    Ok(())
}

fn sum_row<const K: usize, O: ClassObservables<K>>(
    n: usize,
    s: usize,
    pt: &ThermoPoint,
    lf: &LogFactorial,
    obs: &O,
) -> WeightedLse<K> {
    let mut acc = WeightedLse::<K>::empty();
    let nf = n as f64;
    let mu2 = s as f64 / nf;
    let odd = obs.odd_mask();
    // d = n+ - n- runs over s, s-2, ..., > 0; d = 0 is handled last.
    for d in (1..=s).rev().step_by(2) {
        let n_plus = (s + d) / 2;
        let n_minus = s - n_plus;
        let mult = lf.multinomial(n_plus, n_minus, n - s);
        let mu1 = d as f64 / nf;
        let a = mult + class_exponent(n, mu1, mu2, pt);
        let b = mult + class_exponent(n, -mu1, mu2, pt);
        let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
        let pair = hi + (lo - hi).exp().ln_1p();
        let (fa, fb) = ((a - pair).exp(), (b - pair).exp());
        let base = obs.even(n, mu1, mu2);
        let mut values = [0.0; K];
        for k in 0..K {
            values[k] = if odd[k] {
                base[k] * (fa - fb)
            } else {
                base[k] * (fa + fb)
            };
        }
        acc.push(pair, values);
    }
    if s.is_multiple_of(2) {
        let half = s / 2;
        let mult = lf.multinomial(half, half, n - s);
        acc.push(mult + class_exponent(n, 0.0, mu2, pt), obs.even(n, 0.0, mu2));
    }
    acc
}

fn class_sum<const K: usize, O: ClassObservables<K>>(
    n: usize,
    pt: &ThermoPoint,
    obs: &O,
) -> Result<WeightedLse<K>> {
    check_size(n)?;
    pt.validate()?;
    let lf = LogFactorial::new(n);
    let rows: Vec<WeightedLse<K>> = if n >= PARALLEL_MIN_N {
        (0..=n)
            .into_par_iter()
            .map(|s| sum_row(n, s, pt, &lf, obs))
            .collect()
    } else {
        (0..=n).map(|s| sum_row(n, s, pt, &lf, obs)).collect()
    };
    let mut total = WeightedLse::<K>::empty();
    for row in &rows {
        total.merge(row);
    }
    Ok(total)
}

/// `log Z_N(x, y, t)` by exact enumeration of occupation classes.
pub fn exact_log_partition(n: usize, pt: ThermoPoint) -> Result<f64> {
    Ok(class_sum(n, &pt, &NoObservables)?.log_total())
}

/// `N log(1 + 2 e^y cosh x)`, the non-interacting (`t = 0`) partition function.
pub fn initial_partition_closed(n: usize, x: f64, y: f64) -> f64 {
    // log(1 + e^{y+x} + e^{y-x}) without overflow
    let (a, b) = (y + x, y - x);
    let m = a.max(b).max(0.0);
    let single = m + ((-m).exp() + (a - m).exp() + (b - m).exp()).ln();
    n as f64 * single
}

/// Finite-N free energy and expected moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiniteNResult {
    pub n: usize,
    pub log_z: f64,
    /// `log Z_N / N`.
    pub free_energy: f64,
    pub m1: f64,
    pub m2: f64,
}

/// `log Z_N` and `<mu1>`, `<mu2>` in a single pass.
pub fn finite_n(n: usize, pt: ThermoPoint) -> Result<FiniteNResult> {
    let acc = class_sum(n, &pt, &Moments)?;
    let log_z = acc.log_total();
    Ok(FiniteNResult {
        n,
        log_z,
        free_energy: log_z / n as f64,
        m1: acc.mean(0),
        m2: acc.mean(1),
    })
}

/// `(m1N, m2N) = (dF_N/dx, dF_N/dy)`, computed as class averages.
pub fn exact_moments(n: usize, pt: ThermoPoint) -> Result<(f64, f64)> {
    let r = finite_n(n, pt)?;
    Ok((r.m1, r.m2))
}

/// Coefficients of `Z_t + c_y Z_y = (1/N)(c_xx Z_xx + c_yy Z_yy)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffusionCoefficients {
    pub drift_y: f64,
    pub xx: f64,
    pub yy: f64,
}

impl Default for DiffusionCoefficients {
    fn default() -> Self {
        Self {
            drift_y: 2.0,
            xx: 0.5,
            yy: 1.5,
        }
    }
}

/// Relative residual `|Z_t + 2 Z_y - (Z_xx/2 + 3 Z_yy/2)/N| / Z`.
pub fn diffusion_residual(n: usize, pt: ThermoPoint) -> Result<f64> {
    diffusion_residual_with(n, pt, DiffusionCoefficients::default())
}

/// Same as [`diffusion_residual`] with caller-supplied coefficients.
pub fn diffusion_residual_with(
    n: usize,
    pt: ThermoPoint,
    coeffs: DiffusionCoefficients,
) -> Result<f64> {
    let acc = class_sum(n, &pt, &Derivatives)?;
    let (zt, zy, zxx, zyy) = (acc.mean(0), acc.mean(1), acc.mean(2), acc.mean(3));
    let lhs = zt + coeffs.drift_y * zy;
    let rhs = (coeffs.xx * zxx + coeffs.yy * zyy) / n as f64;
    Ok((lhs - rhs).abs())
}

/// One row of a finite-size convergence table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub free_energy: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub point: ThermoPoint,
    pub limit: f64,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].error < w[0].error)
    }

    /// Least-squares slope of `log(N |F_N - F|)` against `log N`.
    ///
    /// An `O(log N / N)` error gives a slope well below one. Returns `None`
    /// with fewer than two nonzero errors.
    pub fn growth_exponent(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|r| r.error > 0.0)
            .map(|r| {
                let ln_n = (r.n as f64).ln();
                (ln_n, ln_n + r.error.ln())
            })
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        Some(sxy / sxx)
    }
}

/// `F_N` for each `N` together with `|F_N - limit|`.
///
/// The caller supplies the thermodynamic limit in the same normalization as
/// `log Z_N / N`; see [`crate::eos::limit_free_energy`].
pub fn convergence_table(ns: &[usize], pt: ThermoPoint, limit: f64) -> Result<ConvergenceTable> {
    let rows = ns
        .iter()
        .map(|&n| {
            let f = exact_log_partition(n, pt)? / n as f64;
            Ok(ConvergenceRow {
                n,
                free_energy: f,
                error: (f - limit).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceTable {
        point: pt,
        limit,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn pt(x: f64, y: f64, t: f64) -> ThermoPoint {
        ThermoPoint::new(x, y, t).unwrap()
    }

    #[test]
    fn single_spin_is_t_independent() {
        for &t in &[0.0, 0.5, 3.0] {
            let (x, y) = (0.4, -0.3);
            let lz = exact_log_partition(1, pt(x, y, t)).unwrap();
            assert_relative_eq!(lz, (1.0 + 2.0 * y.exp() * x.cosh()).ln(), max_relative = 1e-14);
        }
    }

    #[test]
    fn zero_field_zero_coupling() {
        let lz = exact_log_partition(3, pt(0.0, 0.0, 0.0)).unwrap();
        assert_relative_eq!(lz, 3.0 * 3f64.ln(), max_relative = 1e-14);
    }

    #[test]
    fn initial_condition_examples() {
        assert_relative_eq!(initial_partition_closed(100, 0.0, 0.0), 100.0 * 3f64.ln());
        let closed = initial_partition_closed(50, 1.0, -1.0);
        assert_relative_eq!(closed, 50.0 * (1.0 + 2.0 * (-1f64).exp() * 1f64.cosh()).ln(), max_relative = 1e-14);
        assert_relative_eq!(
            exact_log_partition(50, pt(1.0, -1.0, 0.0)).unwrap(),
            closed,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            initial_partition_closed(1, 2.0, 0.3),
            (1.0 + 2.0 * 0.3f64.exp() * 2f64.cosh()).ln(),
            max_relative = 1e-14
        );
        // large fields do not overflow
        assert!(initial_partition_closed(10, 800.0, 1.0).is_finite());
    }

    #[test]
    fn single_spin_moments() {
        let (x, y, t) = (0.7, -0.4, 1.9);
        let (m1, m2) = exact_moments(1, pt(x, y, t)).unwrap();
        let den = 1.0 + 2.0 * y.exp() * x.cosh();
        assert_relative_eq!(m1, 2.0 * y.exp() * x.sinh() / den, max_relative = 1e-13);
        assert_relative_eq!(m2, 2.0 * y.exp() * x.cosh() / den, max_relative = 1e-13);
    }

    #[test]
    fn moments_match_finite_differences() {
        let n = 40;
        let p = pt(0.2, -0.3, 1.2);
        let (m1, m2) = exact_moments(n, p).unwrap();
        let h = 1e-5;
        let f = |x: f64, y: f64| exact_log_partition(n, pt(x, y, p.t)).unwrap() / n as f64;
        let d1 = (f(p.x + h, p.y) - f(p.x - h, p.y)) / (2.0 * h);
        let d2 = (f(p.x, p.y + h) - f(p.x, p.y - h)) / (2.0 * h);
        assert_abs_diff_eq!(m1, d1, epsilon = 1e-6);
        assert_abs_diff_eq!(m2, d2, epsilon = 1e-6);
    }

    #[test]
    fn exact_symmetry_in_x() {
        for &n in &[7, 64, 300] {
            let a = finite_n(n, pt(0.37, 0.2, 1.4)).unwrap();
            let b = finite_n(n, pt(-0.37, 0.2, 1.4)).unwrap();
            assert_eq!(a.log_z, b.log_z);
            assert_eq!(a.m1, -b.m1);
            assert_eq!(a.m2, b.m2);
            let c = finite_n(n, pt(0.0, -0.5, 2.0)).unwrap();
            assert_eq!(c.m1, 0.0);
        }
    }

    #[test]
    fn diffusion_identity_examples() {
        assert!(diffusion_residual(1, pt(0.3, 0.7, 1.1)).unwrap() <= 1e-12);
        assert!(diffusion_residual(50, pt(-0.5, 0.2, 2.0)).unwrap() <= 1e-10);
        let wrong = DiffusionCoefficients {
            yy: 1.0,
            ..Default::default()
        };
        assert!(diffusion_residual_with(50, pt(-0.5, 0.2, 2.0), wrong).unwrap() > 1e-3);
    }

    #[test]
    fn size_errors() {
        assert!(matches!(exact_log_partition(0, pt(0.0, 0.0, 0.0)), Err(PottsError::Size { .. })));
        assert!(matches!(
            exact_log_partition(MAX_N + 1, pt(0.0, 0.0, 0.0)),
            Err(PottsError::Size { .. })
        ));
    }

    #[test]
    fn class_iterator_counts_configurations() {
        let n = 6;
        let total: f64 = occupation_classes(n).map(|c| c.log_multiplicity.exp()).sum();
        assert_relative_eq!(total, 3f64.powi(n as i32), max_relative = 1e-13);
        assert_eq!(occupation_classes(n).count(), (n + 1) * (n + 2) / 2);
    }

    #[test]
    fn zero_point_table_has_no_error() {
        let table = convergence_table(&[10, 100, 1000], pt(0.0, 0.0, 0.0), 3f64.ln()).unwrap();
        for row in &table.rows {
            assert!(row.error <= 1e-13, "{row:?}");
        }
    }
}
