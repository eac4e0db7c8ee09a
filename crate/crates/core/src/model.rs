//! Domain types and closed-form expressions of the mean-field Potts model.
//!
//! Spins take one of `q` distinct levels `a_1..a_q`. The thermodynamic
//! limit is described in terms of the moments `m_k = <sigma^k>`, which are
//! linear images of the state probabilities through the Vandermonde matrix
//! of the levels. For `q = 3` the levels are ordered `(+1, -1, 0)` so that
//!
//! ```text
//! p1 = (m1 + m2) / 2,   p2 = (m2 - m1) / 2,   p3 = 1 - m2.
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{PottsError, Result};

/// Tolerance used for clamping probabilities and membership tests.
pub const DOMAIN_EPS: f64 = 1e-12;

/// Number of states and their spin levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    levels: Vec<f64>,
}

impl ModelSpec {
    pub fn new(levels: Vec<f64>) -> Result<Self> {
        if levels.len() < 2 {
            return Err(PottsError::InvalidModel(format!(
                "need at least two levels, got {}",
                levels.len()
            )));
        }
        if let Some(v) = levels.iter().find(|v| !v.is_finite()) {
            return Err(PottsError::InvalidModel(format!("non-finite level {v}")));
        }
        for (i, a) in levels.iter().enumerate() {
            for b in &levels[i + 1..] {
                if a == b {
                    return Err(PottsError::InvalidModel(format!("repeated level {a}")));
                }
            }
        }
        Ok(Self { levels })
    }

    /// The three-state model with levels `(+1, -1, 0)`.
    pub fn q3() -> Self {
        Self {
            levels: vec![1.0, -1.0, 0.0],
        }
    }

    pub fn q(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn level_index(&self, value: f64) -> Option<usize> {
        self.levels
            .iter()
            .position(|a| (a - value).abs() <= DOMAIN_EPS * (1.0 + a.abs()))
    }

    pub fn vandermonde(&self) -> VandermondeMap {
        VandermondeMap::new(&self.levels)
    }
}

/// Rescaled thermodynamic coordinates: `x = beta h1`, `y = beta h2`,
/// `t = beta J / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermoPoint {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

impl ThermoPoint {
    pub fn new(x: f64, y: f64, t: f64) -> Result<Self> {
        let pt = Self { x, y, t };
        pt.validate()?;
        Ok(pt)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x.is_finite() && self.y.is_finite() && self.t.is_finite()) {
            return Err(PottsError::InvalidPoint(format!(
                "non-finite coordinate in ({}, {}, {})",
                self.x, self.y, self.t
            )));
        }
        if self.t < 0.0 {
            return Err(PottsError::InvalidPoint(format!("t = {} < 0", self.t)));
        }
        Ok(())
    }
}

/// Order parameters `(m1, m2)` of the three-state model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentVector {
    pub m1: f64,
    pub m2: f64,
}

impl MomentVector {
    pub const fn new(m1: f64, m2: f64) -> Self {
        Self { m1, m2 }
    }

    /// The uniform (disordered) state `p = (1/3, 1/3, 1/3)`.
    pub const fn uniform() -> Self {
        Self::new(0.0, 2.0 / 3.0)
    }

    /// Raw probabilities `(p1, p2, p3)` with no domain checks.
    #[inline]
    pub fn raw_probabilities(&self) -> [f64; 3] {
        [
            0.5 * (self.m1 + self.m2),
            0.5 * (self.m2 - self.m1),
            1.0 - self.m2,
        ]
    }

    pub fn as_slice(&self) -> [f64; 2] {
        [self.m1, self.m2]
    }

    pub fn distance(&self, other: &MomentVector) -> f64 {
        (self.m1 - other.m1).hypot(self.m2 - other.m2)
    }

    /// Smallest state probability; positive exactly in the open simplex.
    pub fn min_probability(&self) -> f64 {
        let p = self.raw_probabilities();
        p[0].min(p[1]).min(p[2])
    }
}

impl From<[f64; 2]> for MomentVector {
    fn from(v: [f64; 2]) -> Self {
        Self::new(v[0], v[1])
    }
}

/// State probabilities `p_1..p_q`, nonnegative and summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        for (index, &value) in p.iter().enumerate() {
            if value.is_nan() || value < 0.0 {
                return Err(PottsError::OutOfDomain { index, value });
            }
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(PottsError::InvalidModel(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self(p))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Forward Vandermonde map `p -> (1, m_1, .., m_{q-1})` and its inverse.
///
/// The inverse is assembled from the Lagrange basis of the levels: row `k`
/// holds the monomial coefficients of `L_k(s) = prod_{j != k} (s - a_j)/(a_k - a_j)`,
/// so `p_k = L_k` applied to the moment vector. Column 0 is the offset `d_k`
/// and columns `1..q` are the linear coefficients `c_{kl}`.
#[derive(Debug, Clone, PartialEq)]
pub struct VandermondeMap {
    levels: Vec<f64>,
    forward: Vec<Vec<f64>>,
    inverse: Vec<Vec<f64>>,
}

impl VandermondeMap {
    pub fn new(levels: &[f64]) -> Self {
        let q = levels.len();
        let forward = (0..q)
            .map(|k| levels.iter().map(|a| a.powi(k as i32)).collect())
            .collect();
        let inverse = (0..q)
            .map(|k| lagrange_coefficients(levels, k))
            .collect();
        Self {
            levels: levels.to_vec(),
            forward,
            inverse,
        }
    }

    pub fn q(&self) -> usize {
        self.levels.len()
    }

    /// `W[k][j] = a_j^k`.
    pub fn forward(&self) -> &[Vec<f64>] {
        &self.forward
    }

    /// `W^{-1}`, equivalently the packed `(d | c)` coefficient table.
    pub fn inverse(&self) -> &[Vec<f64>] {
        &self.inverse
    }

    pub fn offset(&self, k: usize) -> f64 {
        self.inverse[k][0]
    }

    /// Coefficient `c_{kl}` of `m_l` (`l` in `1..q`) in `p_k`.
    pub fn coefficient(&self, k: usize, l: usize) -> f64 {
        self.inverse[k][l]
    }

    pub fn apply_forward(&self, v: &[f64]) -> Vec<f64> {
        mat_vec(&self.forward, v)
    }

    pub fn apply_inverse(&self, v: &[f64]) -> Vec<f64> {
        mat_vec(&self.inverse, v)
    }
}

fn mat_vec(a: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(r, x)| r * x).sum())
        .collect()
}

/// Monomial coefficients (ascending powers) of the `k`-th Lagrange basis
/// polynomial on `levels`.
fn lagrange_coefficients(levels: &[f64], k: usize) -> Vec<f64> {
    let q = levels.len();
    let mut poly = vec![0.0; q];
    poly[0] = 1.0;
    let mut degree = 0;
    let mut denom = 1.0;
    for (j, &a) in levels.iter().enumerate() {
        if j == k {
            continue;
        }
        // poly <- poly * (s - a)
        for i in (0..=degree).rev() {
            poly[i + 1] += poly[i];
            poly[i] *= -a;
        }
        degree += 1;
        denom *= levels[k] - a;
    }
    poly.iter().map(|c| c / denom).collect()
}

/// Kronecker delta of two spin values written as a polynomial in the levels.
pub fn kronecker_poly(spec: &ModelSpec, si: f64, sj: f64) -> Result<f64> {
    for v in [si, sj] {
        if spec.level_index(v).is_none() {
            return Err(PottsError::UnknownLevel { value: v });
        }
    }
    let a = spec.levels();
    let mut sum = 0.0;
    for (l, &al) in a.iter().enumerate() {
        let mut prod = 1.0;
        for (k, &ak) in a.iter().enumerate() {
            if k != l {
                let d = al - ak;
                prod *= (si - ak) * (sj - ak) / (d * d);
            }
        }
        sum += prod;
    }
    Ok(sum)
}

/// Expanded three-state form of the Kronecker delta on `{-1, 0, 1}`.
pub fn kronecker_q3(si: f64, sj: f64) -> f64 {
    let (si2, sj2) = (si * si, sj * sj);
    1.5 * si2 * sj2 + 0.5 * si * sj - (si2 + sj2) + 1.0
}

/// Clamp round-off negatives and reject anything further outside.
fn checked_probabilities(mut p: Vec<f64>) -> Result<ProbabilityVector> {
    for (index, v) in p.iter_mut().enumerate() {
        if !v.is_finite() || *v < -DOMAIN_EPS {
            return Err(PottsError::OutOfDomain { index, value: *v });
        }
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok(ProbabilityVector(p))
}

fn strictly_interior(p: &[f64]) -> Result<()> {
    for (index, &value) in p.iter().enumerate() {
        if !value.is_finite() || value < -DOMAIN_EPS {
            return Err(PottsError::OutOfDomain { index, value });
        }
        if value <= 0.0 {
            return Err(PottsError::SingularDomain { index, value });
        }
    }
    Ok(())
}

/// Three-state closed form `p = ((m1+m2)/2, (m2-m1)/2, 1-m2)`.
pub fn probabilities_q3(m: MomentVector) -> Result<ProbabilityVector> {
    checked_probabilities(m.raw_probabilities().to_vec())
}

/// `p = W^{-1} (1, m_1, .., m_{q-1})` for any number of states.
pub fn probabilities_from_moments(spec: &ModelSpec, m: &[f64]) -> Result<ProbabilityVector> {
    let q = spec.q();
    if m.len() != q - 1 {
        return Err(PottsError::Dimension {
            expected: q - 1,
            got: m.len(),
        });
    }
    let mut full = Vec::with_capacity(q);
    full.push(1.0);
    full.extend_from_slice(m);
    checked_probabilities(spec.vandermonde().apply_inverse(&full))
}

/// `m_k = sum_j p_j a_j^k` for `k = 1..q-1`.
pub fn moments_from_probabilities(spec: &ModelSpec, p: &ProbabilityVector) -> Result<Vec<f64>> {
    let q = spec.q();
    if p.as_slice().len() != q {
        return Err(PottsError::Dimension {
            expected: q,
            got: p.as_slice().len(),
        });
    }
    let full = spec.vandermonde().apply_forward(p.as_slice());
    Ok(full[1..].to_vec())
}

#[inline]
fn xlogx(p: f64) -> f64 {
    if p > 0.0 {
        p * p.ln()
    } else {
        0.0
    }
}

/// `F = sum_k x_k m_k + t sum_k p_k^2 - sum_k p_k log p_k` with `p = W^{-1} m`.
pub fn free_energy(spec: &ModelSpec, m: &[f64], fields: &[f64], t: f64) -> Result<f64> {
    if fields.len() != m.len() {
        return Err(PottsError::Dimension {
            expected: m.len(),
            got: fields.len(),
        });
    }
    let p = probabilities_from_moments(spec, m)?;
    let linear: f64 = fields.iter().zip(m).map(|(x, m)| x * m).sum();
    let p = p.as_slice();
    let quad: f64 = p.iter().map(|v| v * v).sum();
    let ent: f64 = p.iter().map(|&v| xlogx(v)).sum();
    Ok(linear + t * quad - ent)
}

/// Three-state free energy `F = x m1 + y m2 + t sum p_k^2 - sum p_k log p_k`.
pub fn free_energy_q3(m: MomentVector, pt: ThermoPoint) -> Result<f64> {
    let p = probabilities_q3(m)?;
    let p = p.as_slice();
    let quad: f64 = p.iter().map(|v| v * v).sum();
    let ent: f64 = p.iter().map(|&v| xlogx(v)).sum();
    Ok(pt.x * m.m1 + pt.y * m.m2 + pt.t * quad - ent)
}

/// Equations of state `(psi1, psi2)`, the gradient of [`free_energy_q3`]
/// in `(m1, m2)`.
pub fn eos_residual_q3(m: MomentVector, pt: ThermoPoint) -> Result<[f64; 2]> {
    let p = m.raw_probabilities();
    strictly_interior(&p)?;
    let (l1, l2, l3) = (p[0].ln(), p[1].ln(), p[2].ln());
    let psi1 = pt.x + m.m1 * pt.t - 0.5 * (l1 - l2);
    let psi2 = pt.y + (3.0 * m.m2 - 2.0) * pt.t - 0.5 * (l1 + l2) + l3;
    Ok([psi1, psi2])
}

/// Jacobian `d psi_i / d m_j`, which is also the Hessian of the free energy.
pub fn eos_jacobian_q3(m: MomentVector, t: f64) -> Result<[[f64; 2]; 2]> {
    let p = m.raw_probabilities();
    strictly_interior(&p)?;
    Ok(jacobian_entries(m.m1, m.m2, t))
}

/// Jacobian entries without domain checks; `m2^2 - m1^2 = 4 p1 p2`.
#[inline]
pub(crate) fn jacobian_entries(m1: f64, m2: f64, t: f64) -> [[f64; 2]; 2] {
    let d = (m2 - m1) * (m2 + m1);
    let off = m1 / d;
    let j11 = t - m2 / d;
    let j22 = 3.0 * t - m2 / d + 1.0 / (m2 - 1.0);
    [[j11, off], [off, j22]]
}

/// Stationarity conditions of [`free_energy`] for any number of states:
/// `dF/dm_j = x_j + sum_k c_{kj} (2 t p_k - log p_k - 1)`.
pub fn eos_residual_general(
    spec: &ModelSpec,
    m: &[f64],
    fields: &[f64],
    t: f64,
) -> Result<Vec<f64>> {
    let q = spec.q();
    if m.len() != q - 1 || fields.len() != q - 1 {
        return Err(PottsError::Dimension {
            expected: q - 1,
            got: if m.len() != q - 1 { m.len() } else { fields.len() },
        });
    }
    let vm = spec.vandermonde();
    let mut full = Vec::with_capacity(q);
    full.push(1.0);
    full.extend_from_slice(m);
    let p = vm.apply_inverse(&full);
    strictly_interior(&p)?;
    let g: Vec<f64> = p.iter().map(|&pk| 2.0 * t * pk - pk.ln() - 1.0).collect();
    Ok((1..q)
        .map(|j| fields[j - 1] + (0..q).map(|k| vm.coefficient(k, j) * g[k]).sum::<f64>())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn kronecker_q3_forms_agree() {
        let spec = ModelSpec::new(vec![-1.0, 0.0, 1.0]).unwrap();
        for &a in &[-1.0, 0.0, 1.0] {
            for &b in &[-1.0, 0.0, 1.0] {
                let expect = if a == b { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(kronecker_poly(&spec, a, b).unwrap(), expect, epsilon = 1e-12);
                assert_abs_diff_eq!(kronecker_q3(a, b), expect, epsilon = 1e-12);
            }
        }
        assert_abs_diff_eq!(kronecker_poly(&spec, 1.0, 0.0).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn kronecker_q4_identity_pattern() {
        let spec = ModelSpec::new(vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let v = kronecker_poly(&spec, i as f64, j as f64).unwrap();
                assert_abs_diff_eq!(v, if i == j { 1.0 } else { 0.0 }, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn kronecker_rejects_foreign_level() {
        let spec = ModelSpec::q3();
        assert!(matches!(
            kronecker_poly(&spec, 0.5, 1.0),
            Err(PottsError::UnknownLevel { .. })
        ));
    }

    #[test]
    fn model_spec_validation() {
        assert!(ModelSpec::new(vec![1.0]).is_err());
        assert!(ModelSpec::new(vec![1.0, 2.0, 1.0]).is_err());
        assert!(ModelSpec::new(vec![1.0, f64::NAN]).is_err());
        assert!(ThermoPoint::new(0.0, 0.0, -0.1).is_err());
    }

    #[test]
    fn q3_probability_examples() {
        let p = probabilities_q3(MomentVector::uniform()).unwrap();
        for v in p.as_slice() {
            assert_abs_diff_eq!(*v, 1.0 / 3.0, epsilon = 1e-15);
        }
        let p = probabilities_q3(MomentVector::new(1.0, 1.0)).unwrap();
        assert_eq!(p.as_slice(), &[1.0, 0.0, 0.0]);

        let spec = ModelSpec::q3();
        let general = probabilities_from_moments(&spec, &[0.0, 2.0 / 3.0]).unwrap();
        for (a, b) in general.as_slice().iter().zip(p_uniform()) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
    }

    fn p_uniform() -> [f64; 3] {
        [1.0 / 3.0; 3]
    }

    #[test]
    fn general_path_matches_closed_form() {
        let spec = ModelSpec::q3();
        for &(m1, m2) in &[(0.1, 0.5), (-0.3, 0.4), (0.6, 0.9), (0.0, 0.0)] {
            let g = probabilities_from_moments(&spec, &[m1, m2]).unwrap();
            let c = probabilities_q3(MomentVector::new(m1, m2)).unwrap();
            for (a, b) in g.as_slice().iter().zip(c.as_slice()) {
                assert_abs_diff_eq!(*a, *b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn out_of_domain_reports_index() {
        let err = probabilities_q3(MomentVector::new(0.5, 0.2)).unwrap_err();
        match err {
            PottsError::OutOfDomain { index, value } => {
                assert_eq!(index, 1);
                assert_abs_diff_eq!(value, -0.15, epsilon = 1e-15);
            }
            other => panic!("unexpected {other:?}"),
        }
        // round-off negatives are clamped
        let p = probabilities_q3(MomentVector::new(1.0, 1.0 + 5e-13)).unwrap();
        assert_eq!(p.as_slice()[2], 0.0);
    }

    #[test]
    fn moments_from_probabilities_examples() {
        let spec = ModelSpec::q3();
        let m = moments_from_probabilities(&spec, &ProbabilityVector::new(vec![1.0 / 3.0; 3]).unwrap())
            .unwrap();
        assert_abs_diff_eq!(m[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m[1], 2.0 / 3.0, epsilon = 1e-15);
        let m = moments_from_probabilities(&spec, &ProbabilityVector::new(vec![1.0, 0.0, 0.0]).unwrap())
            .unwrap();
        assert_eq!(m, vec![1.0, 1.0]);
    }

    #[test]
    fn vandermonde_inverse_is_left_inverse() {
        let vm = VandermondeMap::new(&[1.0, -1.0, 0.0, 2.5, -0.5]);
        let q = vm.q();
        for i in 0..q {
            for j in 0..q {
                let v: f64 = (0..q).map(|k| vm.inverse()[i][k] * vm.forward()[k][j]).sum();
                assert_abs_diff_eq!(v, if i == j { 1.0 } else { 0.0 }, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn free_energy_examples() {
        let t = 0.7;
        let f = free_energy_q3(MomentVector::uniform(), ThermoPoint::new(0.0, 0.0, t).unwrap())
            .unwrap();
        assert_abs_diff_eq!(f, t / 3.0 + 3f64.ln(), epsilon = 1e-14);
        let pt = ThermoPoint::new(0.3, -0.2, 1.1).unwrap();
        let f = free_energy_q3(MomentVector::new(1.0, 1.0), pt).unwrap();
        assert_abs_diff_eq!(f, 0.3 - 0.2 + 1.1, epsilon = 1e-14);
        let f = free_energy_q3(MomentVector::uniform(), ThermoPoint::new(0.0, 0.0, 0.0).unwrap())
            .unwrap();
        assert_abs_diff_eq!(f, 3f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn free_energy_general_matches_q3() {
        let spec = ModelSpec::q3();
        let pt = ThermoPoint::new(0.4, -0.3, 1.7).unwrap();
        for &(m1, m2) in &[(0.1, 0.5), (-0.3, 0.4), (0.6, 0.9), (1.0, 1.0)] {
            let a = free_energy_q3(MomentVector::new(m1, m2), pt).unwrap();
            let b = free_energy(&spec, &[m1, m2], &[pt.x, pt.y], pt.t).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-13);
        }
    }

    #[test]
    fn symmetric_state_is_always_stationary() {
        for &t in &[0.0, 0.5, 1.5, 4.0] {
            let r = eos_residual_q3(MomentVector::uniform(), ThermoPoint::new(0.0, 0.0, t).unwrap())
                .unwrap();
            assert_abs_diff_eq!(r[0], 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!(r[1], 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn residual_vanishes_at_inverted_fields() {
        // fields obtained by solving psi = 0 for (x, y) at m = (1/4, 3/4), t = 2
        let m = MomentVector::new(0.25, 0.75);
        let t = 2.0;
        let x = -0.5 + 0.5 * 2f64.ln();
        let y = -(3.0 * m.m2 - 2.0) * t + 0.5 * ((m.m2 * m.m2 - m.m1 * m.m1) / (4.0 * 0.0625)).ln();
        let r = eos_residual_q3(m, ThermoPoint::new(x, y, t).unwrap()).unwrap();
        assert_abs_diff_eq!(r[0], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r[1], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn boundary_is_singular() {
        let pt = ThermoPoint::new(0.0, 0.0, 1.0).unwrap();
        assert!(matches!(
            eos_residual_q3(MomentVector::new(0.5, 0.5), pt),
            Err(PottsError::SingularDomain { index: 1, .. })
        ));
        assert!(matches!(
            eos_jacobian_q3(MomentVector::new(0.0, 1.0), 1.0),
            Err(PottsError::SingularDomain { index: 2, .. })
        ));
    }

    #[test]
    fn jacobian_examples() {
        let j = eos_jacobian_q3(MomentVector::uniform(), 0.0).unwrap();
        assert_abs_diff_eq!(j[0][0], -1.5, epsilon = 1e-14);
        assert_abs_diff_eq!(j[0][1], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(j[1][1], -4.5, epsilon = 1e-14);
        let j = eos_jacobian_q3(MomentVector::new(0.25, 0.75), 2.0).unwrap();
        for row in j {
            for v in row {
                assert_abs_diff_eq!(v, 0.5, epsilon = 1e-14);
            }
        }
        assert_abs_diff_eq!(j[0][0] * j[1][1] - j[0][1] * j[1][0], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn general_residual_vanishes_at_uniform_state() {
        for levels in [vec![0.0, 1.0, 2.0, 3.0], vec![1.0, -1.0, 0.0], vec![-2.0, 0.5, 1.0, 3.0, 4.0]] {
            let spec = ModelSpec::new(levels).unwrap();
            let q = spec.q();
            let p = ProbabilityVector::new(vec![1.0 / q as f64; q]).unwrap();
            let m = moments_from_probabilities(&spec, &p).unwrap();
            let r = eos_residual_general(&spec, &m, &vec![0.0; q - 1], 1.3).unwrap();
            for v in r {
                assert_abs_diff_eq!(v, 0.0, epsilon = 1e-10);
            }
        }
    }
}
