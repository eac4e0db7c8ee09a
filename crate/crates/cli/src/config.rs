//! Run configuration: a JSON file with one section per command, overridden
//! by command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use mfpotts::eos::SolverConfig;
use mfpotts::mc::McConfig;
use mfpotts::ThermoPoint;
use serde::{Deserialize, Serialize};

use crate::args::{Cli, Command, CommonArgs, Format, PointArgs};
use crate::error::{CliError, Result};

/// Seed used when neither the config nor `--seed` sets one.
pub const DEFAULT_SEED: u64 = 12_345;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PointConfig {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

impl Default for PointConfig {
    fn default() -> Self {
        Self::new(0.0, 0.0, 0.5)
    }
}

impl PointConfig {
    pub const fn new(x: f64, y: f64, t: f64) -> Self {
        Self { x, y, t }
    }

    pub(crate) fn apply(&mut self, a: &PointArgs) {
        if let Some(v) = a.x {
            self.x = v;
        }
        if let Some(v) = a.y {
            self.y = v;
        }
        if let Some(v) = a.t {
            self.t = v;
        }
    }

    pub fn point(&self) -> Result<ThermoPoint> {
        Ok(ThermoPoint::new(self.x, self.y, self.t)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub max_n: usize,
    pub points: usize,
    pub resolution: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            max_n: 5000,
            points: 10,
            resolution: 400,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TRange {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub y: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub samples: usize,
    pub t: Option<f64>,
    pub t_range: Option<TRange>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            y: -0.068,
            x_min: -0.2,
            x_max: 0.2,
            samples: 201,
            t: Some(1.3),
            t_range: None,
        }
    }
}

impl SweepConfig {
    /// Coupling values to sweep, in ascending order.
    pub fn t_values(&self) -> Vec<f64> {
        match (self.t_range, self.t) {
            (Some(r), _) => mfpotts::numeric::linspace(r.min, r.max, r.steps),
            (None, Some(t)) => vec![t],
            (None, None) => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CuspConfig {
    pub resolution: usize,
    pub events: Option<PathBuf>,
}

impl Default for CuspConfig {
    fn default() -> Self {
        Self {
            resolution: 400,
            events: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FiniteNConfig {
    pub x: f64,
    pub y: f64,
    pub t: f64,
    pub ns: Vec<usize>,
}

impl Default for FiniteNConfig {
    fn default() -> Self {
        Self {
            x: 0.3,
            y: 0.1,
            t: 0.5,
            ns: vec![100, 1000, 10_000],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McSection {
    pub x: f64,
    pub y: f64,
    pub t: f64,
    pub battery: bool,
}

impl Default for McSection {
    fn default() -> Self {
        Self {
            x: 0.1,
            y: -0.2,
            t: 0.5,
            battery: false,
        }
    }
}

macro_rules! point_fields {
    ($($ty:ty),*) => {$(
        impl $ty {
            pub fn point(&self) -> Result<ThermoPoint> {
                Ok(ThermoPoint::new(self.x, self.y, self.t)?)
            }

            fn apply_point(&mut self, a: &PointArgs) {
                let mut p = PointConfig::new(self.x, self.y, self.t);
                p.apply(a);
                (self.x, self.y, self.t) = (p.x, p.y, p.t);
            }
        }
    )*};
}

point_fields!(FiniteNConfig, McSection);

/// Everything a run can be configured with. Every field has a default, so
/// a config file only lists what it changes.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub solver: SolverConfig,
    /// Chain settings; `mc.seed` is replaced by the run seed when one is set.
    pub mc: McConfig,
    pub verify: VerifyConfig,
    pub eos: PointConfig,
    pub sweep: SweepConfig,
    pub cusp: CuspConfig,
    pub finite_n: FiniteNConfig,
    pub mc_point: McSection,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| CliError::ConfigRead {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| CliError::ConfigParse {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Config file (if any) with the flags of `cli` applied on top.
    pub fn resolve(cli: &Cli) -> Result<Self> {
        let mut cfg = match &cli.common.config {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        cfg.apply_common(&cli.common);
        cfg.apply_command(&cli.command);
        cfg.validate(&cli.command)?;
        Ok(cfg)
    }

    fn apply_common(&mut self, c: &CommonArgs) {
        if c.format.is_some() {
            self.format = c.format;
        }
        if c.out.is_some() {
            self.out.clone_from(&c.out);
        }
        if c.seed.is_some() {
            self.seed = c.seed;
        }
        if c.threads.is_some() {
            self.threads = c.threads;
        }
        if let Some(s) = self.seed {
            self.mc.seed = s;
        }
    }

    fn apply_command(&mut self, cmd: &Command) {
        match cmd {
            Command::Verify(a) => {
                let v = &mut self.verify;
                v.max_n = a.max_n.unwrap_or(v.max_n);
                v.points = a.points.unwrap_or(v.points);
                v.resolution = a.resolution.unwrap_or(v.resolution);
            }
            Command::Eos(a) => self.eos.apply(a),
            Command::Sweep(a) => {
                let s = &mut self.sweep;
                s.y = a.y.unwrap_or(s.y);
                s.x_min = a.x_min.unwrap_or(s.x_min);
                s.x_max = a.x_max.unwrap_or(s.x_max);
                s.samples = a.samples.unwrap_or(s.samples);
                if let Some(t) = a.t {
                    s.t = Some(t);
                    s.t_range = None;
                }
                if let (Some(min), Some(max), Some(steps)) = (a.t_min, a.t_max, a.t_steps) {
                    s.t_range = Some(TRange { min, max, steps });
                }
            }
            Command::Cusp(a) => {
                self.cusp.resolution = a.resolution.unwrap_or(self.cusp.resolution);
                if a.events.is_some() {
                    self.cusp.events.clone_from(&a.events);
                }
            }
            Command::FiniteN(a) => {
                self.finite_n.apply_point(&a.point);
                if let Some(ns) = &a.ns {
                    self.finite_n.ns.clone_from(ns);
                }
            }
            Command::Mc(a) => {
                self.mc_point.apply_point(&a.point);
                self.mc_point.battery |= a.battery;
                let m = &mut self.mc;
                m.n = a.n.unwrap_or(m.n);
                m.sweeps = a.sweeps.unwrap_or(m.sweeps);
                m.burn_in = a.burn_in.unwrap_or(m.burn_in);
                m.thinning = a.thinning.unwrap_or(m.thinning);
                m.chains = a.chains.unwrap_or(m.chains);
            }
        }
    }

    /// Checks the parts of the config the given command uses: ordered
    /// ranges, resolutions of at least 2, and a writable output location.
    // negated comparisons so that NaN bounds are rejected
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self, cmd: &Command) -> Result<()> {
        let usage = |m: String| Err(CliError::Usage(m));
        if self.threads == Some(0) {
            return usage("--threads must be at least 1".into());
        }
        self.solver.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        if let Some(p) = &self.out {
            check_writable(p)?;
        }
        match cmd {
            Command::Verify(_) => {
                let v = &self.verify;
                if v.max_n == 0 || v.points == 0 {
                    return usage("verify: max_n and points must be positive".into());
                }
                if v.resolution < 2 {
                    return usage(format!("verify: resolution {} < 2", v.resolution));
                }
            }
            Command::Sweep(_) => {
                let s = &self.sweep;
                if !(s.x_min < s.x_max) {
                    return usage(format!("sweep: x range [{}, {}] is not ordered", s.x_min, s.x_max));
                }
                if s.samples < 2 {
                    return usage(format!("sweep: samples {} < 2", s.samples));
                }
                match (s.t, s.t_range) {
                    (_, Some(r)) => {
                        if !(r.min <= r.max) {
                            return usage(format!("sweep: t range [{}, {}] is not ordered", r.min, r.max));
                        }
                        if r.steps < 2 {
                            return usage(format!("sweep: t steps {} < 2", r.steps));
                        }
                    }
                    (None, None) => return usage("sweep: set t or t_range".into()),
                    _ => {}
                }
            }
            Command::Cusp(_) => {
                if self.cusp.resolution < 2 {
                    return usage(format!("cusp: resolution {} < 2", self.cusp.resolution));
                }
                if let Some(p) = &self.cusp.events {
                    check_writable(p)?;
                }
            }
            Command::FiniteN(_) => {
                if self.finite_n.ns.is_empty() {
                    return usage("finite-n: empty N list".into());
                }
                if self.finite_n.ns.windows(2).any(|w| w[1] <= w[0]) {
                    return usage("finite-n: N list must be strictly increasing".into());
                }
            }
            Command::Mc(_) => {
                self.mc.validate().map_err(|e| CliError::Usage(e.to_string()))?;
            }
            Command::Eos(_) => {}
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    /// Requested format, else JSON for the report commands (`verify`,
    /// `mc`) and CSV for the tables.
    pub fn format_for(&self, cmd: &Command) -> Format {
        self.format.unwrap_or(match cmd {
            Command::Verify(_) | Command::Mc(_) => Format::Json,
            _ => Format::Csv,
        })
    }
}

/// The target must not be a directory and its parent must exist.
fn check_writable(p: &Path) -> Result<()> {
    if p.is_dir() {
        return Err(CliError::Usage(format!("{} is a directory", p.display())));
    }
    let parent = match p.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    if !parent.is_dir() {
        return Err(CliError::Usage(format!("directory {} does not exist", parent.display())));
    }
    if fs::metadata(parent).map(|m| m.permissions().readonly()).unwrap_or(true) {
        return Err(CliError::Usage(format!("directory {} is not writable", parent.display())));
    }
    Ok(())
}
