//! Single-spin-flip Metropolis sampling of the complete-graph model.
//!
//! The log-weight of a configuration with `S1 = sum sigma`, `S2 = sum sigma^2`
//! is `t (S1^2/(2N) + 3 S2^2/(2N) - 2 S2) + x S1 + y S2`, so a flip changes
//! it by an amount that depends only on the running sums.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PottsError, Result};
use crate::exact::{exact_moments, MAX_N};
use crate::model::ThermoPoint;

/// Number of batches used for batch-means error bars.
pub const BATCHES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct McConfig {
    pub n: usize,
    /// Total sweeps per chain, burn-in included. One sweep is `n` proposals.
    pub sweeps: usize,
    pub burn_in: usize,
    /// Record every `thinning`-th sweep after burn-in.
    pub thinning: usize,
    pub seed: u64,
    pub chains: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n: 100,
            sweeps: 10_000,
            burn_in: 1_000,
            thinning: 1,
            seed: 12_345,
            chains: 3,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.sweeps == 0 || self.burn_in == 0 || self.thinning == 0 || self.chains == 0 {
            return Err(PottsError::Config(
                "n, sweeps, burn_in, thinning and chains must be positive".into(),
            ));
        }
        if self.burn_in >= self.sweeps {
            return Err(PottsError::Config(format!(
                "burn_in ({}) must be smaller than sweeps ({})",
                self.burn_in, self.sweeps
            )));
        }
        if (self.sweeps - self.burn_in) / self.thinning < BATCHES {
            return Err(PottsError::Config(format!(
                "need at least {BATCHES} recorded sweeps per chain for batch means"
            )));
        }
        Ok(())
    }
}

/// Initial configuration of a chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainStart {
    AllZero,
    AllPlus,
    UniformRandom,
}

impl ChainStart {
    /// Starts cycle through all-zero, all-plus and uniform-random.
    pub fn for_chain(index: usize) -> Self {
        match index % 3 {
            0 => ChainStart::AllZero,
            1 => ChainStart::AllPlus,
            _ => ChainStart::UniformRandom,
        }
    }
}

/// Log-weight of a configuration computed from scratch.
pub fn log_weight(spins: &[i8], pt: &ThermoPoint) -> f64 {
    let n = spins.len() as f64;
    let s1: f64 = spins.iter().map(|&s| s as f64).sum();
    let s2: f64 = spins.iter().map(|&s| (s * s) as f64).sum();
    pt.t * (s1 * s1 / (2.0 * n) + 3.0 * s2 * s2 / (2.0 * n) - 2.0 * s2) + pt.x * s1 + pt.y * s2
}

/// Change in log-weight when one spin moves from `from` to `to`.
#[inline]
pub fn delta_log_weight(s1: i64, s2: i64, n: usize, from: i8, to: i8, pt: &ThermoPoint) -> f64 {
    let d1 = (to - from) as f64;
    let d2 = (to * to - from * from) as f64;
    let (s1, s2, n) = (s1 as f64, s2 as f64, n as f64);
    pt.t * ((2.0 * s1 * d1 + d1 * d1) / (2.0 * n) + 3.0 * (2.0 * s2 * d2 + d2 * d2) / (2.0 * n) - 2.0 * d2)
        + pt.x * d1
        + pt.y * d2
}

/// One Markov chain with its running sums.
#[derive(Debug, Clone)]
pub struct Chain {
    spins: Vec<i8>,
    s1: i64,
    s2: i64,
    pt: ThermoPoint,
    rng: ChaCha8Rng,
    proposed: u64,
    accepted: u64,
}

const LEVELS: [i8; 3] = [1, -1, 0];

impl Chain {
    /// Chain `index` draws from its own ChaCha stream keyed by `(seed, index)`.
    pub fn new(n: usize, pt: ThermoPoint, start: ChainStart, seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let spins: Vec<i8> = match start {
            ChainStart::AllZero => vec![0; n],
            ChainStart::AllPlus => vec![1; n],
            ChainStart::UniformRandom => (0..n).map(|_| LEVELS[rng.gen_range(0..3)]).collect(),
        };
        let s1 = spins.iter().map(|&s| s as i64).sum();
        let s2 = spins.iter().map(|&s| (s * s) as i64).sum();
        Self {
            spins,
            s1,
            s2,
            pt,
            rng,
            proposed: 0,
            accepted: 0,
        }
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn sums(&self) -> (i64, i64) {
        (self.s1, self.s2)
    }

    /// `(mu1, mu2)` of the current configuration.
    pub fn moments(&self) -> (f64, f64) {
        let n = self.spins.len() as f64;
        (self.s1 as f64 / n, self.s2 as f64 / n)
    }

    /// `(n_plus, n_minus, n_zero)`.
    pub fn occupations(&self) -> (usize, usize, usize) {
        let n = self.spins.len() as i64;
        let n_plus = ((self.s2 + self.s1) / 2) as usize;
        let n_minus = ((self.s2 - self.s1) / 2) as usize;
        (n_plus, n_minus, (n - self.s2) as usize)
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    /// One Metropolis proposal; returns whether it was accepted.
    pub fn step(&mut self) -> bool {
        let n = self.spins.len();
        let site = self.rng.gen_range(0..n);
        let from = self.spins[site];
        let to = match (from, self.rng.gen_bool(0.5)) {
            (1, true) => -1,
            (1, false) => 0,
            (-1, true) => 1,
            (-1, false) => 0,
            (_, true) => 1,
            (_, false) => -1,
        };
        let dw = delta_log_weight(self.s1, self.s2, n, from, to, &self.pt);
        self.proposed += 1;
        let accept = dw >= 0.0 || self.rng.gen::<f64>() < dw.exp();
        if accept {
            self.spins[site] = to;
            self.s1 += (to - from) as i64;
            self.s2 += (to * to - from * from) as i64;
            self.accepted += 1;
        }
        accept
    }

    pub fn sweep(&mut self) {
        for _ in 0..self.spins.len() {
            self.step();
        }
    }
}

/// Summary of one chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSummary {
    pub start: ChainStart,
    pub mean_m1: f64,
    pub mean_m2: f64,
    pub acceptance_rate: f64,
    pub batch_means_m1: Vec<f64>,
    pub batch_means_m2: Vec<f64>,
    /// Statistical inefficiency of `mu1` and `mu2` estimated from the batches.
    pub inefficiency: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub n: usize,
    pub point: ThermoPoint,
    pub mean_m1: f64,
    pub mean_m2: f64,
    pub stderr_m1: f64,
    pub stderr_m2: f64,
    pub acceptance_rate: f64,
    pub chains: Vec<ChainSummary>,
    /// Largest gap between chain means of `mu1`, in units of the pooled
    /// standard error of a single chain; large values signal metastability.
    pub chain_disagreement: f64,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn variance(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|a| (a - m).powi(2)).sum::<f64>() / (v.len() as f64 - 1.0)
}

fn batch_means(v: &[f64]) -> Vec<f64> {
    let size = v.len() / BATCHES;
    // trailing samples that do not fill a batch are dropped
    (0..BATCHES).map(|b| mean(&v[b * size..(b + 1) * size])).collect()
}

fn run_chain(pt: ThermoPoint, cfg: &McConfig, index: usize) -> ChainSummary {
    let start = ChainStart::for_chain(index);
    let mut chain = Chain::new(cfg.n, pt, start, cfg.seed, index as u64);
    let recorded = (cfg.sweeps - cfg.burn_in) / cfg.thinning;
    let mut m1 = Vec::with_capacity(recorded);
    let mut m2 = Vec::with_capacity(recorded);
    for s in 0..cfg.sweeps {
        chain.sweep();
        if s >= cfg.burn_in && (s - cfg.burn_in).is_multiple_of(cfg.thinning) {
            let (a, b) = chain.moments();
            m1.push(a);
            m2.push(b);
        }
    }
    let bm1 = batch_means(&m1);
    let bm2 = batch_means(&m2);
    let size = (m1.len() / BATCHES) as f64;
    let ineff = |b: &[f64], all: &[f64]| {
        let v = variance(all);
        if v > 0.0 {
            size * variance(b) / v
        } else {
            1.0
        }
    };
    ChainSummary {
        start,
        mean_m1: mean(&bm1),
        mean_m2: mean(&bm2),
        acceptance_rate: chain.acceptance_rate(),
        inefficiency: [ineff(&bm1, &m1), ineff(&bm2, &m2)],
        batch_means_m1: bm1,
        batch_means_m2: bm2,
    }
}

/// Run `cfg.chains` independent chains in parallel and pool their batches.
pub fn mc_run(pt: ThermoPoint, cfg: &McConfig) -> Result<McEstimate> {
    pt.validate()?;
    cfg.validate()?;
    let chains: Vec<ChainSummary> = (0..cfg.chains)
        .into_par_iter()
        .map(|c| run_chain(pt, cfg, c))
        .collect();
    let all1: Vec<f64> = chains.iter().flat_map(|c| c.batch_means_m1.iter().copied()).collect();
    let all2: Vec<f64> = chains.iter().flat_map(|c| c.batch_means_m2.iter().copied()).collect();
    let b = all1.len() as f64;
    let stderr_m1 = (variance(&all1) / b).sqrt();
    let stderr_m2 = (variance(&all2) / b).sqrt();
    let acceptance_rate = mean(&chains.iter().map(|c| c.acceptance_rate).collect::<Vec<_>>());
    let within = chains
        .iter()
        .map(|c| variance(&c.batch_means_m1) / BATCHES as f64)
        .sum::<f64>()
        / chains.len() as f64;
    let spread = chains.iter().map(|c| c.mean_m1).fold(f64::NEG_INFINITY, f64::max)
        - chains.iter().map(|c| c.mean_m1).fold(f64::INFINITY, f64::min);
    let chain_disagreement = if within > 0.0 {
        spread / within.sqrt()
    } else if spread > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    Ok(McEstimate {
        n: cfg.n,
        point: pt,
        mean_m1: mean(&all1),
        mean_m2: mean(&all2),
        stderr_m1,
        stderr_m2,
        acceptance_rate,
        chains,
        chain_disagreement,
    })
}

/// MC estimate compared with exact enumeration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McComparison {
    pub estimate: McEstimate,
    pub exact_m1: f64,
    pub exact_m2: f64,
    pub z_m1: f64,
    pub z_m2: f64,
    /// Set for points whose autocorrelation makes the z-scores unreliable;
    /// such points are excluded from pass/fail.
    pub note: Option<String>,
}

impl McComparison {
    pub fn within(&self, z: f64) -> [bool; 2] {
        [self.z_m1.abs() <= z, self.z_m2.abs() <= z]
    }

    pub fn diagnostic_only(&self) -> bool {
        self.note.is_some()
    }
}

fn z_score(est: f64, exact: f64, se: f64) -> f64 {
    let d = est - exact;
    if se > 0.0 {
        d / se
    } else if d == 0.0 {
        0.0
    } else {
        f64::INFINITY.copysign(d)
    }
}

/// Points this close to the zero-field transition are flagged.
fn near_transition(pt: &ThermoPoint) -> bool {
    pt.x.abs() < 0.05 && pt.y.abs() < 0.05 && (pt.t - 2.0 * 2f64.ln()).abs() < 0.1
}

pub fn mc_vs_exact(pt: ThermoPoint, cfg: &McConfig) -> Result<McComparison> {
    if cfg.n > MAX_N {
        return Err(PottsError::Size { n: cfg.n, max: MAX_N });
    }
    let estimate = mc_run(pt, cfg)?;
    let (exact_m1, exact_m2) = exact_moments(cfg.n, pt)?;
    let z_m1 = z_score(estimate.mean_m1, exact_m1, estimate.stderr_m1);
    let z_m2 = z_score(estimate.mean_m2, exact_m2, estimate.stderr_m2);
    let note = near_transition(&pt).then(|| {
        let tau = estimate
            .chains
            .iter()
            .map(|c| c.inefficiency[0].max(c.inefficiency[1]))
            .fold(0.0, f64::max);
        format!("near the zero-field transition: autocorrelation inflated (inefficiency up to {tau:.1}); diagnostic only")
    });
    Ok(McComparison {
        estimate,
        exact_m1,
        exact_m2,
        z_m1,
        z_m2,
        note,
    })
}

/// Ten single-phase points with `t <= 0.9`.
pub fn standard_battery() -> Vec<ThermoPoint> {
    [
        (0.0, 0.0, 0.0),
        (0.1, -0.2, 0.5),
        (-0.3, 0.4, 0.2),
        (0.5, 0.5, 0.9),
        (-0.8, -0.5, 0.7),
        (0.2, 1.0, 0.4),
        (1.0, -1.0, 0.6),
        (0.0, 0.3, 0.9),
        (-0.4, 0.0, 0.8),
        (0.6, -0.7, 0.3),
    ]
    .into_iter()
    .map(|(x, y, t)| ThermoPoint { x, y, t })
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryReport {
    pub comparisons: Vec<McComparison>,
    /// Fraction of `(point, moment)` pairs with `|z| <= 3`, diagnostic points excluded.
    pub pass_fraction: f64,
    pub passed: bool,
}

/// [`mc_vs_exact`] over a list of points; passes when at least 95% of the
/// scored `(point, moment)` pairs have `|z| <= 3`.
pub fn run_battery(points: &[ThermoPoint], cfg: &McConfig) -> Result<BatteryReport> {
    let comparisons = points
        .iter()
        .map(|&p| mc_vs_exact(p, cfg))
        .collect::<Result<Vec<_>>>()?;
    let scored: Vec<bool> = comparisons
        .iter()
        .filter(|c| !c.diagnostic_only())
        .flat_map(|c| c.within(3.0))
        .collect();
    let pass_fraction = if scored.is_empty() {
        1.0
    } else {
        scored.iter().filter(|&&b| b).count() as f64 / scored.len() as f64
    };
    Ok(BatteryReport {
        comparisons,
        pass_fraction,
        passed: pass_fraction >= 0.95,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(McConfig::default().validate().is_ok());
        let bad = McConfig {
            burn_in: 10_000,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = McConfig {
            chains: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn incremental_weights_match_recomputation() {
        let pt = ThermoPoint::new(0.37, -0.81, 1.7).unwrap();
        let mut chain = Chain::new(40, pt, ChainStart::UniformRandom, 9, 0);
        let mut w = log_weight(chain.spins(), &pt);
        for _ in 0..5000 {
            let before = chain.spins().to_vec();
            let (s1, s2) = chain.sums();
            if chain.step() {
                let site = (0..40).find(|&i| before[i] != chain.spins()[i]).unwrap();
                let dw = delta_log_weight(s1, s2, 40, before[site], chain.spins()[site], &pt);
                w += dw;
            }
            let full = log_weight(chain.spins(), &pt);
            assert!((w - full).abs() <= 1e-12 * full.abs().max(1.0), "{w} vs {full}");
        }
    }

    #[test]
    fn occupations_track_spins() {
        let pt = ThermoPoint::new(0.0, 0.0, 0.5).unwrap();
        let mut chain = Chain::new(17, pt, ChainStart::AllPlus, 3, 1);
        for _ in 0..20 {
            chain.sweep();
        }
        let (a, b, c) = chain.occupations();
        let s = chain.spins();
        assert_eq!(a, s.iter().filter(|&&v| v == 1).count());
        assert_eq!(b, s.iter().filter(|&&v| v == -1).count());
        assert_eq!(c, s.iter().filter(|&&v| v == 0).count());
    }

    #[test]
    fn deterministic_given_seed() {
        let pt = ThermoPoint::new(0.1, -0.2, 0.5).unwrap();
        let cfg = McConfig {
            n: 30,
            sweeps: 400,
            burn_in: 50,
            ..Default::default()
        };
        let a = mc_run(pt, &cfg).unwrap();
        let b = mc_run(pt, &cfg).unwrap();
        assert_eq!(a, b);
        let c = mc_run(pt, &McConfig { seed: 1, ..cfg }).unwrap();
        assert_ne!(a.mean_m1, c.mean_m1);
    }

    #[test]
    fn estimate_invariants() {
        let pt = ThermoPoint::new(0.3, 0.2, 0.4).unwrap();
        let cfg = McConfig {
            n: 20,
            sweeps: 500,
            burn_in: 100,
            ..Default::default()
        };
        let e = mc_run(pt, &cfg).unwrap();
        assert!(e.mean_m1.abs() <= e.mean_m2 && e.mean_m2 <= 1.0);
        assert!(e.stderr_m1 > 0.0 && e.stderr_m2 > 0.0);
        assert!((0.0..=1.0).contains(&e.acceptance_rate));
        assert_eq!(e.chains.len(), 3);
        assert_eq!(e.chains[0].start, ChainStart::AllZero);
    }
}
