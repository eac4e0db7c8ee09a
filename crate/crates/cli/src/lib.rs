//! Command-line front end for `mfpotts`: configuration, subcommands and
//! CSV/JSON emitters.
//!
//! [`execute`] turns parsed arguments into an [`Outcome`] without touching
//! the file system; [`Outcome::write`] performs the output. Exit codes: 0
//! success, 1 verification failure, 2 usage error, 3 numeric or domain
//! failure.

pub mod args;
pub mod commands;
pub mod config;
pub mod emit;
pub mod error;
pub mod verify;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

pub use args::{Cli, Command, Format};
pub use config::RunConfig;
pub use error::{CliError, Result};

use commands::*;
use verify::{run_battery, Hooks};

/// Rendered output of one command.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    /// Written to `--out`, or stdout.
    pub primary: String,
    pub out: Option<PathBuf>,
    /// Additional files, such as the cusp events JSON.
    pub files: Vec<(PathBuf, String)>,
    /// Messages for stderr.
    pub notes: Vec<String>,
    /// Set when a verification step failed; names what failed.
    pub failure: Option<String>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.failure.is_some() {
            1
        } else {
            0
        }
    }

    pub fn write(&self) -> Result<()> {
        match &self.out {
            Some(p) => write_file(p, &self.primary)?,
            None => {
                let mut so = std::io::stdout().lock();
                so.write_all(self.primary.as_bytes())
                    .and_then(|_| so.flush())
                    .map_err(|source| CliError::Write {
                        path: PathBuf::from("<stdout>"),
                        source,
                    })?;
            }
        }
        for (p, text) in &self.files {
            write_file(p, text)?;
        }
        Ok(())
    }
}

fn write_file(p: &Path, text: &str) -> Result<()> {
    fs::write(p, text).map_err(|source| CliError::Write {
        path: p.to_path_buf(),
        source,
    })
}

/// Resolves the configuration and runs the command, on a dedicated pool
/// when a thread count is given.
pub fn execute(cli: &Cli) -> Result<Outcome> {
    let cfg = RunConfig::resolve(cli)?;
    match cfg.threads {
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| CliError::Usage(format!("cannot start {k} threads: {e}")))?;
            pool.install(|| run(&cli.command, &cfg))
        }
        None => run(&cli.command, &cfg),
    }
}

fn run(cmd: &Command, cfg: &RunConfig) -> Result<Outcome> {
    let format = cfg.format_for(cmd);
    let mut o = Outcome {
        out: cfg.out.clone(),
        ..Default::default()
    };
    match cmd {
        Command::Verify(a) => {
            let hooks = Hooks {
                diffusion_yy: a.inject_diffusion_yy,
            };
            let rep = run_battery(&cfg.verify, cfg.seed(), hooks)?;
            o.primary = render_verify(&rep, format)?;
            if !rep.passed {
                o.failure = Some(format!("verification failed: {}", rep.failing().join(", ")));
            }
        }
        Command::Eos(_) => {
            let tab = cmd_eos(cfg.eos.point()?, &cfg.solver)?;
            o.primary = render_eos(&tab, format)?;
        }
        Command::Sweep(_) => {
            let rep = cmd_sweep(&cfg.sweep, &cfg.solver)?;
            o.primary = render_sweep(&rep, format)?;
        }
        Command::Cusp(_) => {
            let rep = cmd_cusp(cfg.cusp.resolution)?;
            match format {
                Format::Json => o.primary = emit::json(&rep)?,
                Format::Csv => {
                    o.primary = render_loci_csv(&rep)?;
                    let events = cfg
                        .cusp
                        .events
                        .clone()
                        .or_else(|| cfg.out.as_ref().map(|p| p.with_extension("events.json")));
                    match events {
                        Some(p) => o.files.push((p, render_events(&rep)?)),
                        None => o.notes.push("events JSON not written: pass --events or --out".into()),
                    }
                }
            }
            let bad = rep.bad_rows();
            if bad > 0 {
                o.failure = Some(format!(
                    "verification failed: cusp_residuals ({bad} rows above {CUSP_ROW_TOLERANCE:e})"
                ));
            }
        }
        Command::FiniteN(_) => {
            let f = &cfg.finite_n;
            let rep = cmd_finite_n(f.point()?, &f.ns, &cfg.solver)?;
            o.primary = render_finite_n(&rep, format)?;
        }
        Command::Mc(_) => {
            let rep = if cfg.mc_point.battery {
                cmd_mc_battery(&cfg.mc)?
            } else {
                cmd_mc(cfg.mc_point.point()?, &cfg.mc)?
            };
            o.primary = render_mc(&rep, format)?;
            if let McReport::Battery(b) = &rep {
                if !b.passed {
                    o.failure = Some(format!("verification failed: mc_battery (pass fraction {})", b.pass_fraction));
                }
            }
        }
    }
    Ok(o)
}
