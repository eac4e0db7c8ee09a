//! Identity battery behind `mfpotts verify`.

use mfpotts::exact::{
    diffusion_residual_with, exact_log_partition, exact_moments, initial_partition_closed, DiffusionCoefficients,
};
use mfpotts::model::{eos_jacobian_q3, eos_residual_q3, free_energy_q3};
use mfpotts::numeric::linspace;
use mfpotts::singularity::{critical_time_extrema, fields_from_eos, sample_all_loci};
use mfpotts::{MomentVector, ThermoPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::VerifyConfig;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// Worst residual over all cases.
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub cases: usize,
}

impl Check {
    fn new(name: &str, residuals: &[f64], tolerance: f64) -> Self {
        // NaN poisons the maximum so that a broken evaluation fails
        let residual = residuals
            .iter()
            .fold(0.0f64, |a, &b| if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b) });
        Self {
            name: name.to_string(),
            residual,
            tolerance,
            passed: residual <= tolerance,
            cases: residuals.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub max_n: usize,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn failing(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect()
    }
}

/// Options that only tests touch.
#[derive(Debug, Clone, Copy, Default)]
pub struct Hooks {
    /// Coefficient of `Z_yy` in the diffusion identity (correct value 3/2).
    pub diffusion_yy: Option<f64>,
}

fn random_point(rng: &mut ChaCha8Rng) -> ThermoPoint {
    ThermoPoint {
        x: rng.gen_range(-1.0..=1.0),
        y: rng.gen_range(-1.0..=1.0),
        t: rng.gen_range(0.0..=3.0),
    }
}

fn random_interior(rng: &mut ChaCha8Rng) -> MomentVector {
    let w: [f64; 3] = [rng.gen_range(0.05..1.0), rng.gen_range(0.05..1.0), rng.gen_range(0.05..1.0)];
    let s: f64 = w.iter().sum();
    MomentVector::new((w[0] - w[1]) / s, (w[0] + w[1]) / s)
}

fn diffusion_check(cfg: &VerifyConfig, rng: &mut ChaCha8Rng, hooks: Hooks) -> Result<Check> {
    let coeffs = DiffusionCoefficients {
        yy: hooks.diffusion_yy.unwrap_or(1.5),
        ..Default::default()
    };
    let mut cases: Vec<(usize, ThermoPoint)> = Vec::new();
    for n in [1, 5, 50, 500].into_iter().filter(|&n| n <= cfg.max_n) {
        cases.extend((0..cfg.points).map(|_| (n, random_point(rng))));
    }
    if cfg.max_n > 500 {
        cases.extend((0..2).map(|_| (cfg.max_n, random_point(rng))));
    }
    let res = cases
        .par_iter()
        .map(|&(n, p)| diffusion_residual_with(n, p, coeffs))
        .collect::<mfpotts::Result<Vec<_>>>()?;
    Ok(Check::new("diffusion_identity", &res, 1e-10))
}

fn initial_condition_check(rng: &mut ChaCha8Rng) -> Result<Check> {
    let fields: Vec<(f64, f64)> = (0..20)
        .map(|_| (rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)))
        .collect();
    let res = (1..=200usize)
        .into_par_iter()
        .flat_map_iter(|n| {
            fields.iter().map(move |&(x, y)| {
                let got = exact_log_partition(n, ThermoPoint { x, y, t: 0.0 })?;
                let want = initial_partition_closed(n, x, y);
                Ok((got - want).abs() / want.abs().max(f64::MIN_POSITIVE))
            })
        })
        .collect::<mfpotts::Result<Vec<_>>>()?;
    Ok(Check::new("initial_condition", &res, 1e-12))
}

fn gradient_checks(rng: &mut ChaCha8Rng) -> Result<[Check; 2]> {
    let h = 1e-6;
    let mut grad = Vec::new();
    let mut jac = Vec::new();
    for _ in 0..50 {
        let m = random_interior(rng);
        let p = random_point(rng);
        let f = |a: f64, b: f64| free_energy_q3(MomentVector::new(a, b), p);
        let r = eos_residual_q3(m, p)?;
        let d1 = (f(m.m1 + h, m.m2)? - f(m.m1 - h, m.m2)?) / (2.0 * h);
        let d2 = (f(m.m1, m.m2 + h)? - f(m.m1, m.m2 - h)?) / (2.0 * h);
        grad.push((r[0] - d1).abs().max((r[1] - d2).abs()));

        let psi = |a: f64, b: f64| eos_residual_q3(MomentVector::new(a, b), p);
        let j = eos_jacobian_q3(m, p.t)?;
        let (a, b) = (psi(m.m1 + h, m.m2)?, psi(m.m1 - h, m.m2)?);
        let (c, d) = (psi(m.m1, m.m2 + h)?, psi(m.m1, m.m2 - h)?);
        let mut worst = 0.0f64;
        for i in 0..2 {
            let fd = [(a[i] - b[i]) / (2.0 * h), (c[i] - d[i]) / (2.0 * h)];
            for k in 0..2 {
                worst = worst.max((j[i][k] - fd[k]).abs() / j[i][k].abs().max(1.0));
            }
        }
        jac.push(worst);
    }
    Ok([
        Check::new("free_energy_gradient", &grad, 1e-6),
        Check::new("eos_jacobian", &jac, 1e-6),
    ])
}

fn parity_check(rng: &mut ChaCha8Rng) -> Result<Check> {
    let mut res = Vec::new();
    for n in [1, 7, 60] {
        for _ in 0..5 {
            let p = random_point(rng);
            let q = ThermoPoint { x: -p.x, ..p };
            let (a, b) = (exact_log_partition(n, p)?, exact_log_partition(n, q)?);
            let (ma, mb) = (exact_moments(n, p)?, exact_moments(n, q)?);
            res.push((a - b).abs() / a.abs().max(1.0));
            res.push((ma.0 + mb.0).abs().max((ma.1 - mb.1).abs()));
        }
    }
    Ok(Check::new("field_reversal_parity", &res, 1e-12))
}

/// Direct sum over all `3^n` configurations.
fn brute_force(n: usize, p: ThermoPoint) -> (f64, f64, f64) {
    let levels = [1i32, -1, 0];
    let mut terms = Vec::with_capacity(3usize.pow(n as u32));
    let mut idx = vec![0usize; n];
    loop {
        let (mut s1, mut s2, mut occ) = (0.0, 0.0, [0.0f64; 3]);
        for &k in &idx {
            s1 += levels[k] as f64;
            s2 += (levels[k] * levels[k]) as f64;
            occ[k] += 1.0;
        }
        let pairs: f64 = occ.iter().map(|c| c * c).sum();
        let e = p.t / n as f64 * pairs + p.x * s1 + p.y * s2 - p.t * n as f64;
        terms.push((e, s1 / n as f64, s2 / n as f64));
        let mut i = 0;
        while i < n && idx[i] == 2 {
            idx[i] = 0;
            i += 1;
        }
        if i == n {
            break;
        }
        idx[i] += 1;
    }
    let top = terms.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
    let (mut z, mut a, mut b) = (0.0, 0.0, 0.0);
    for (e, m1, m2) in terms {
        let w = (e - top).exp();
        z += w;
        a += w * m1;
        b += w * m2;
    }
    (top + z.ln(), a / z, b / z)
}

fn brute_force_check(rng: &mut ChaCha8Rng) -> Result<Check> {
    let mut res = Vec::new();
    for n in 1..=6 {
        for _ in 0..3 {
            let p = random_point(rng);
            let (lz, m1, m2) = brute_force(n, p);
            let got = exact_log_partition(n, p)?;
            let (g1, g2) = exact_moments(n, p)?;
            res.push(((got - lz).abs() / lz.abs().max(1.0)).max((g1 - m1).abs()).max((g2 - m2).abs()));
        }
    }
    Ok(Check::new("brute_force_oracle", &res, 1e-12))
}

fn symmetric_branch_check() -> Result<Check> {
    let res = linspace(0.0, 4.0, 41)
        .into_iter()
        .map(|t| {
            let r = eos_residual_q3(MomentVector::uniform(), ThermoPoint { x: 0.0, y: 0.0, t })?;
            Ok(r[0].hypot(r[1]))
        })
        .collect::<mfpotts::Result<Vec<_>>>()?;
    Ok(Check::new("symmetric_branch_stationary", &res, 1e-12))
}

fn cusp_checks(resolution: usize) -> Result<[Check; 3]> {
    let rows = sample_all_loci(resolution)?;
    let residuals: Vec<f64> = rows.iter().filter_map(|r| r.cusp_residual).collect();
    let mut field = Vec::new();
    for r in &rows {
        if let Some((x, y)) = r.fields {
            let (u, v) = fields_from_eos(r.m, r.t_c)?;
            field.push((u - x).abs().max((v - y).abs()));
        }
    }
    let e = critical_time_extrema();
    let mut ext = vec![(e.line_min.t_c - 1.0).abs(), (e.line_min.m2 - 0.5).abs()];
    let want_min = [11.0 / 18.0, 7.0 / 9.0];
    let want_max = [0.5, 0.75];
    if e.loop_min.len() != 2 || e.loop_max.len() != 2 {
        ext.push(f64::INFINITY);
    }
    for (x, m2) in e.loop_min.iter().zip(want_min) {
        ext.push((x.t_c - 9.0 / 7.0).abs().max((x.m2 - m2).abs()));
    }
    for (x, m2) in e.loop_max.iter().zip(want_max) {
        ext.push((x.t_c - 4.0 / 3.0).abs().max((x.m2 - m2).abs()));
    }
    Ok([
        Check::new("cusp_residuals", &residuals, 1e-8),
        Check::new("cusp_field_map", &field, 1e-9),
        Check::new("critical_time_extrema", &ext, 1e-9),
    ])
}

/// Runs every check. Random points come from a ChaCha8 stream seeded with
/// `seed`, so the report depends only on the arguments.
pub fn run_battery(cfg: &VerifyConfig, seed: u64, hooks: Hooks) -> Result<VerifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = vec![diffusion_check(cfg, &mut rng, hooks)?, initial_condition_check(&mut rng)?];
    checks.extend(gradient_checks(&mut rng)?);
    checks.push(parity_check(&mut rng)?);
    checks.push(brute_force_check(&mut rng)?);
    checks.push(symmetric_branch_check()?);
    checks.extend(cusp_checks(cfg.resolution)?);
    Ok(VerifyReport {
        seed,
        max_n: cfg.max_n,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brute_force_matches_single_spin() {
        let p = ThermoPoint { x: 0.3, y: -0.2, t: 1.1 };
        let (lz, m1, _) = brute_force(1, p);
        let want = (p.x + p.y).exp() + (p.y - p.x).exp() + 1.0;
        assert!((lz - want.ln()).abs() < 1e-14);
        assert!((m1 - ((p.x + p.y).exp() - (p.y - p.x).exp()) / want).abs() < 1e-14);
    }

    #[test]
    fn nan_fails_a_check() {
        assert!(!Check::new("c", &[0.0, f64::NAN, 0.0], 1.0).passed);
        assert!(Check::new("c", &[], 1.0).passed);
    }

    #[test]
    fn small_battery_passes() {
        let cfg = VerifyConfig {
            max_n: 50,
            points: 2,
            resolution: 20,
        };
        let rep = run_battery(&cfg, 1, Hooks::default()).unwrap();
        assert!(rep.passed, "{:?}", rep.failing());
        let bad = run_battery(&cfg, 1, Hooks { diffusion_yy: Some(1.0) }).unwrap();
        assert_eq!(bad.failing(), vec!["diffusion_identity"]);
    }
}
