//! Dispatch from a [`RunConfig`] to the solver paths and trajectory output.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use multirabi::dyson::{self, DysonConfig};
use multirabi::exact;
use multirabi::io as traj_io;
use multirabi::model;
use multirabi::propagate::{integrate, IntegratorConfig, Trajectory};
use serde_json::{json, Value};

use crate::config::{Format, RunConfig, Solver};
use crate::error::{solver_model_error, CliError};

/// Integrator step budget for the numerical solvers.
const MAX_STEPS: usize = 200_000_000;

pub fn run_solver(cfg: &RunConfig, solver: Solver) -> Result<Trajectory<f64>, CliError> {
    let times = cfg.times();
    let levels = &cfg.levels;
    let psi0 = &cfg.initial;
    let rwa = cfg.drive.clone().to_mode(true);
    let states = match solver {
        Solver::Exact => exact::exact_states(levels, &rwa, psi0, &times)?,
        Solver::Dyson1 if levels.n() == 3 && cfg.basis_index() == Some(0) => {
            dyson::approximate_states_3(levels, &rwa, &times)?
        }
        Solver::Dyson1 | Solver::Dyson2 => {
            let order = if solver == Solver::Dyson1 { 1 } else { 2 };
            let dcfg = DysonConfig::new(order, cfg.quadrature_step)?;
            dyson::dyson_lab_states(levels, &rwa, psi0, &times, &dcfg)?
        }
        Solver::NumericRwa => {
            let h = model::full_hamiltonian(levels, &rwa).map_err(solver_model_error)?;
            return Ok(integrate(&h, psi0, &times, &integrator(cfg)?)?);
        }
        Solver::NumericFull => {
            let full = cfg.drive.clone().to_mode(false);
            let h = model::full_hamiltonian_nonrwa(levels, &full).map_err(solver_model_error)?;
            return Ok(integrate(&h, psi0, &times, &integrator(cfg)?)?);
        }
    };
    Ok(Trajectory::new(times, states))
}

fn integrator(cfg: &RunConfig) -> Result<IntegratorConfig<f64>, CliError> {
    Ok(IntegratorConfig::new(cfg.step, cfg.tol, MAX_STEPS)?)
}

/// Echo of every input parameter plus run diagnostics.
pub fn provenance(cfg: &RunConfig, traj: &Trajectory<f64>) -> Value {
    json!({
        "tool": "multirabi",
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg.to_file(),
        "max_norm_drift": traj.max_norm_drift(),
    })
}

pub fn write_trajectory<W: Write>(cfg: &RunConfig, traj: &Trajectory<f64>, format: Format, out: W) -> io::Result<()> {
    match format {
        Format::Csv => traj_io::write_csv(traj, out),
        Format::Json => {
            let mut out = out;
            traj_io::write_json(traj, provenance(cfg, traj), &mut out)?;
            writeln!(out)
        }
    }
}

/// Writes to `path`, or stdout when `None`.
pub fn with_output<F>(path: Option<&Path>, f: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| CliError::Io(format!("cannot create {}: {e}", p.display())))?;
            let mut w = BufWriter::new(file);
            f(&mut w)?;
            w.flush()?;
        }
        None => {
            let mut w = Stdout::default();
            f(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

/// Locked stdout that treats a closed pipe (e.g. `| head`) as end of
/// output rather than an error.
#[derive(Default)]
pub struct Stdout {
    closed: bool,
}

impl Write for Stdout {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        if self.closed {
            return Ok(buf.len());
        }
        match io::stdout().lock().write(buf) {
            Err(e) if e.kind() == io::ErrorKind::BrokenPipe => {
                self.closed = true;
                Ok(buf.len())
            }
            other => other,
        }
    }

    fn flush(&mut self) -> io::Result<()> {
        if self.closed {
            return Ok(());
        }
        match io::stdout().lock().flush() {
            Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
            other => other,
        }
    }
}
