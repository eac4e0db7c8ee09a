//! One function per subcommand computing its result, and the renderers
//! that turn results into CSV or JSON text.

use mfpotts::eos::{
    finite_size_table, select_equilibrium, solve_branches, sweep_profile, EquilibriumBranch, SolverConfig,
    SweepResult,
};
use mfpotts::exact::ConvergenceTable;
use mfpotts::mc::{run_battery as mc_battery, standard_battery, mc_vs_exact, BatteryReport, McComparison, McConfig};
use mfpotts::singularity::{cusp_event_timeline, sample_all_loci, CuspEvent, LocusId, LocusSample};
use mfpotts::ThermoPoint;
use serde::{Deserialize, Serialize};

use crate::args::Format;
use crate::config::SweepConfig;
use crate::emit::{float, json, opt_float, Table};
use crate::error::Result;
use crate::verify::VerifyReport;

/// Largest cusp residual accepted for an emitted loci row.
pub const CUSP_ROW_TOLERANCE: f64 = 1e-8;

pub fn render_verify(rep: &VerifyReport, format: Format) -> Result<String> {
    match format {
        Format::Json => json(rep),
        Format::Csv => {
            let mut t = Table::new(&["name", "residual", "tolerance", "passed", "cases"]);
            for c in &rep.checks {
                t.push(vec![
                    c.name.clone(),
                    float(c.residual),
                    float(c.tolerance),
                    c.passed.to_string(),
                    c.cases.to_string(),
                ]);
            }
            t.to_csv()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EosRow {
    pub branch_id: usize,
    pub m1: f64,
    pub m2: f64,
    #[serde(rename = "F")]
    pub free_energy: f64,
    pub classification: String,
    pub residual: f64,
    pub hessian_det: f64,
    pub is_equilibrium: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EosTable {
    pub point: ThermoPoint,
    /// Stationary points sorted by `F` descending.
    pub branches: Vec<EosRow>,
    /// `branch_id` of the selected equilibrium; `None` without a maximum.
    pub equilibrium: Option<usize>,
    pub coexistence: bool,
}

fn eos_row(id: usize, b: &EquilibriumBranch, is_equilibrium: bool) -> EosRow {
    EosRow {
        branch_id: id,
        m1: b.m.m1,
        m2: b.m.m2,
        free_energy: b.free_energy,
        classification: b.classification.as_str().to_string(),
        residual: b.residual,
        hessian_det: b.hessian_det,
        is_equilibrium,
    }
}

pub fn cmd_eos(pt: ThermoPoint, cfg: &SolverConfig) -> Result<EosTable> {
    let branches = solve_branches(pt, cfg)?;
    let sel = select_equilibrium(&branches, cfg).ok();
    let equilibrium = sel.map(|s| s.index);
    Ok(EosTable {
        point: pt,
        branches: branches
            .iter()
            .enumerate()
            .map(|(i, b)| eos_row(i, b, equilibrium == Some(i)))
            .collect(),
        equilibrium,
        coexistence: sel.is_some_and(|s| s.coexistence),
    })
}

pub fn render_eos(tab: &EosTable, format: Format) -> Result<String> {
    match format {
        Format::Json => json(tab),
        Format::Csv => {
            let mut t = Table::new(&["branch_id", "m1", "m2", "F", "classification", "residual", "is_equilibrium"]);
            for r in &tab.branches {
                t.push(vec![
                    r.branch_id.to_string(),
                    float(r.m1),
                    float(r.m2),
                    float(r.free_energy),
                    r.classification.clone(),
                    float(r.residual),
                    r.is_equilibrium.to_string(),
                ]);
            }
            t.to_csv()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub profiles: Vec<SweepResult>,
}

pub fn cmd_sweep(s: &SweepConfig, cfg: &SolverConfig) -> Result<SweepReport> {
    let profiles = s
        .t_values()
        .into_iter()
        .map(|t| sweep_profile(s.y, s.x_min, s.x_max, s.samples, t, cfg))
        .collect::<mfpotts::Result<Vec<_>>>()?;
    Ok(SweepReport { profiles })
}

pub const SWEEP_COLUMNS: [&str; 10] = [
    "x",
    "y",
    "t",
    "branch_id",
    "m1",
    "m2",
    "F",
    "classification",
    "is_equilibrium",
    "note",
];

/// One row per `(t, x, branch)`; a sample where the solver failed gives a
/// single row with empty branch cells and the error in `note`.
pub fn render_sweep(rep: &SweepReport, format: Format) -> Result<String> {
    if format == Format::Json {
        return json(rep);
    }
    let mut t = Table::new(&SWEEP_COLUMNS);
    for p in &rep.profiles {
        for s in &p.samples {
            let head = [float(s.x), float(p.y), float(p.t)];
            if s.branches.is_empty() {
                let mut row = head.to_vec();
                row.extend(["", "", "", "", "", "false"].map(String::from));
                row.push(s.error.clone().unwrap_or_else(|| "no branches".into()));
                t.push(row);
                continue;
            }
            for (k, b) in s.branches.iter().enumerate() {
                let mut row = head.to_vec();
                row.extend([
                    s.ids[k].to_string(),
                    float(b.m.m1),
                    float(b.m.m2),
                    float(b.free_energy),
                    b.classification.as_str().to_string(),
                    (s.equilibrium == Some(k)).to_string(),
                    String::new(),
                ]);
                t.push(row);
            }
        }
    }
    t.to_csv()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LociRow {
    pub locus_id: LocusId,
    pub m1: f64,
    pub m2: f64,
    pub t_c: f64,
    pub x: Option<f64>,
    pub y: Option<f64>,
    pub cusp_residual: Option<f64>,
    pub reason: Option<String>,
}

impl From<&LocusSample> for LociRow {
    fn from(s: &LocusSample) -> Self {
        Self {
            locus_id: s.locus,
            m1: s.m.m1,
            m2: s.m.m2,
            t_c: s.t_c,
            x: s.fields.map(|f| f.0),
            y: s.fields.map(|f| f.1),
            cusp_residual: s.cusp_residual,
            reason: s.reason.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CuspReport {
    pub loci: Vec<LociRow>,
    pub events: Vec<CuspEvent>,
}

impl CuspReport {
    /// Rows whose cusp residual exceeds [`CUSP_ROW_TOLERANCE`].
    pub fn bad_rows(&self) -> usize {
        self.loci
            .iter()
            .filter(|r| r.cusp_residual.is_some_and(|v| v.is_nan() || v > CUSP_ROW_TOLERANCE))
            .count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventsDoc<'a> {
    pub events: &'a [CuspEvent],
}

pub fn cmd_cusp(resolution: usize) -> Result<CuspReport> {
    Ok(CuspReport {
        loci: sample_all_loci(resolution)?.iter().map(LociRow::from).collect(),
        events: cusp_event_timeline(),
    })
}

pub fn render_loci_csv(rep: &CuspReport) -> Result<String> {
    let mut t = Table::new(&["locus_id", "m1", "m2", "t_c", "x", "y", "cusp_residual", "reason"]);
    for r in &rep.loci {
        t.push(vec![
            r.locus_id.label().to_string(),
            float(r.m1),
            float(r.m2),
            float(r.t_c),
            opt_float(r.x),
            opt_float(r.y),
            opt_float(r.cusp_residual),
            r.reason.clone().unwrap_or_default(),
        ]);
    }
    t.to_csv()
}

pub fn render_events(rep: &CuspReport) -> Result<String> {
    json(&EventsDoc { events: &rep.events })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteNReport {
    pub table: ConvergenceTable,
    pub strictly_decreasing: bool,
    /// Slope of `log(N |F_N - F|)` against `log N`.
    pub growth_exponent: Option<f64>,
}

pub fn cmd_finite_n(pt: ThermoPoint, ns: &[usize], cfg: &SolverConfig) -> Result<FiniteNReport> {
    let table = finite_size_table(ns, pt, cfg)?;
    Ok(FiniteNReport {
        strictly_decreasing: table.strictly_decreasing(),
        growth_exponent: table.growth_exponent(),
        table,
    })
}

pub fn render_finite_n(rep: &FiniteNReport, format: Format) -> Result<String> {
    if format == Format::Json {
        return json(rep);
    }
    let mut t = Table::new(&["n", "F_N", "F_limit", "error"]);
    for r in &rep.table.rows {
        t.push(vec![r.n.to_string(), float(r.free_energy), float(rep.table.limit), float(r.error)]);
    }
    t.to_csv()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum McReport {
    Point(McComparison),
    Battery(BatteryReport),
}

impl McReport {
    pub fn comparisons(&self) -> Vec<&McComparison> {
        match self {
            McReport::Point(c) => vec![c],
            McReport::Battery(b) => b.comparisons.iter().collect(),
        }
    }
}

pub fn cmd_mc(pt: ThermoPoint, cfg: &McConfig) -> Result<McReport> {
    Ok(McReport::Point(mc_vs_exact(pt, cfg)?))
}

pub fn cmd_mc_battery(cfg: &McConfig) -> Result<McReport> {
    Ok(McReport::Battery(mc_battery(&standard_battery(), cfg)?))
}

pub fn render_mc(rep: &McReport, format: Format) -> Result<String> {
    if format == Format::Json {
        return json(rep);
    }
    let mut t = Table::new(&[
        "x",
        "y",
        "t",
        "n",
        "mean_m1",
        "stderr_m1",
        "exact_m1",
        "z_m1",
        "mean_m2",
        "stderr_m2",
        "exact_m2",
        "z_m2",
        "acceptance_rate",
        "note",
    ]);
    for c in rep.comparisons() {
        let e = &c.estimate;
        t.push(vec![
            float(e.point.x),
            float(e.point.y),
            float(e.point.t),
            e.n.to_string(),
            float(e.mean_m1),
            float(e.stderr_m1),
            float(c.exact_m1),
            float(c.z_m1),
            float(e.mean_m2),
            float(e.stderr_m2),
            float(c.exact_m2),
            float(c.z_m2),
            float(e.acceptance_rate),
            c.note.clone().unwrap_or_default(),
        ]);
    }
    t.to_csv()
}
