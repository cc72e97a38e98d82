use std::io::Write;
use std::path::{Path, PathBuf};

use multirabi::exact::check_consistency;
use multirabi::linalg::max_abs_diff_real;
use multirabi::model;
use multirabi::propagate::{compare, DeviationReport};
use multirabi::spectral;
use ndarray::{Array1, Array2};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{ConfigFile, Format, Overrides, RunConfig, Solver};
use crate::error::CliError;
use crate::solve::{run_solver, with_output, write_trajectory};

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn load(path: &Path, overrides: &Overrides) -> Result<RunConfig, CliError> {
    RunConfig::resolve(&overrides.apply(ConfigFile::load(path)?))
}

pub fn spectrum(n: usize, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
    if n < 2 {
        return Err(CliError::Config(format!("spectrum needs n >= 2, got {n}")));
    }
    let d = spectral::decompose::<f64>(n);
    let o = d.basis();
    let c = model::coupling_matrix(n).mapv(|x| x as f64);
    let lam = Array2::from_diag(&Array1::from(d.eigenvalues().to_vec()));
    let residual = max_abs_diff_real(&c.dot(o), &o.dot(&lam));
    let orthogonality = max_abs_diff_real(&o.dot(&o.t()), &Array2::eye(n));
    match format {
        Format::Csv => {
            writeln!(out, "# eigenvalues of the {n}x{n} coupling matrix")?;
            writeln!(out, "j,lambda")?;
            for (j, l) in d.eigenvalues().iter().enumerate() {
                writeln!(out, "{},{}", j + 1, num(*l))?;
            }
            writeln!(out, "# eigenbasis O, row k lists component k of each eigenvector")?;
            for row in o.rows() {
                writeln!(out, "{}", row.iter().map(|x| num(*x)).collect::<Vec<_>>().join(","))?;
            }
            writeln!(out, "# max residual |CO - OD| = {residual:.3e}")?;
            writeln!(out, "# max orthogonality defect |OO^T - 1| = {orthogonality:.3e}")?;
        }
        Format::Json => {
            let basis: Vec<Vec<f64>> = o.rows().into_iter().map(|r| r.to_vec()).collect();
            let v = json!({
                "n": n,
                "eigenvalues": d.eigenvalues(),
                "basis": basis,
                "max_residual": residual,
                "max_orthogonality_defect": orthogonality,
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("serialisable"))?;
        }
    }
    Ok(())
}

pub fn evolve(cfg: &RunConfig) -> Result<(), CliError> {
    let traj = run_solver(cfg, cfg.solver)?;
    with_output(cfg.output.as_deref(), |w| write_trajectory(cfg, &traj, cfg.format, w))
}

/// Consistency and resonance report; a violation is a precondition failure.
pub fn exact_check(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let drive = cfg.drive.clone().to_mode(true);
    let tol = drive.default_tolerance();
    let report = check_consistency(&drive.detunings(), tol);
    let offsets = model::resonance_offsets(&cfg.levels, &drive);
    let resonant = offsets.iter().all(|o| o.abs() <= tol);
    let violations: Vec<Value> =
        report.violations.iter().map(|((i, j), e)| json!({ "i": i, "j": j, "epsilon": e })).collect();
    let v = json!({
        "n": cfg.levels.n(),
        "tolerance": tol,
        "consistent": report.satisfied,
        "violations": violations,
        "resonant": resonant,
        "rotating_frame_diagonal": offsets,
    });
    writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("serialisable"))?;
    if report.satisfied && resonant {
        Ok(())
    } else {
        let message = if report.satisfied {
            "resonance condition violated".to_string()
        } else {
            format!("consistency condition violated for {} pair(s)", violations.len())
        };
        Err(CliError::Precondition { message, details: v })
    }
}

pub fn report_json(a: Solver, b: Solver, r: &DeviationReport<f64>) -> Value {
    let rows: Vec<Value> = r
        .rows
        .iter()
        .map(|x| json!({ "t": x.t, "amplitude": x.amplitude, "aligned": x.aligned, "population": x.population }))
        .collect();
    json!({
        "solver_a": a.to_string(),
        "solver_b": b.to_string(),
        "max_amplitude": r.max_amplitude,
        "max_aligned": r.max_aligned,
        "max_population": r.max_population,
        "rows": rows,
    })
}

pub fn compare_solvers(
    cfg_a: &RunConfig,
    cfg_b: &RunConfig,
    a: Solver,
    b: Solver,
) -> Result<DeviationReport<f64>, CliError> {
    if cfg_a.times() != cfg_b.times() {
        return Err(CliError::precondition("configurations use different time grids"));
    }
    let ta = run_solver(cfg_a, a)?;
    let tb = run_solver(cfg_b, b)?;
    Ok(compare(&ta, &tb)?)
}

pub fn write_report(
    a: Solver,
    b: Solver,
    report: &DeviationReport<f64>,
    format: Format,
    out: &mut dyn Write,
) -> std::io::Result<()> {
    match format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&report_json(a, b, report)).expect("serialisable")),
        Format::Csv => {
            writeln!(out, "# {a} vs {b}")?;
            writeln!(out, "t,amplitude,aligned,population")?;
            for r in &report.rows {
                writeln!(out, "{},{},{},{}", num(r.t), num(r.amplitude), num(r.aligned), num(r.population))?;
            }
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepParam {
    G,
    Epsilon,
    TMax,
}

impl SweepParam {
    fn name(self) -> &'static str {
        match self {
            SweepParam::G => "g",
            SweepParam::Epsilon => "epsilon",
            SweepParam::TMax => "t_max",
        }
    }

    fn apply(self, base: &Overrides, value: f64) -> Overrides {
        let mut o = base.clone();
        match self {
            SweepParam::G => o.g = Some(value),
            SweepParam::Epsilon => o.epsilon = Some(value),
            SweepParam::TMax => o.t_max = Some(value),
        }
        o
    }
}

/// Runs one configuration per value in parallel, one output file each, then
/// writes `manifest.json`. Returns the first failure after the manifest is
/// written.
pub fn sweep(
    file: &ConfigFile,
    base: &Overrides,
    param: SweepParam,
    values: &[f64],
    out_dir: &Path,
) -> Result<Value, CliError> {
    if values.is_empty() {
        return Err(CliError::Config("sweep needs at least one value".into()));
    }
    let configs: Vec<RunConfig> = values
        .iter()
        .map(|&v| RunConfig::resolve(&param.apply(base, v).apply(file.clone())))
        .collect::<Result<_, _>>()?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", out_dir.display())))?;

    let results: Vec<(PathBuf, Result<f64, CliError>)> = configs
        .par_iter()
        .enumerate()
        .map(|(k, cfg)| {
            let path = out_dir.join(format!("run_{k:04}.{}", cfg.format.extension()));
            let outcome = run_solver(cfg, cfg.solver).and_then(|traj| {
                with_output(Some(&path), |w| write_trajectory(cfg, &traj, cfg.format, w))?;
                Ok(traj.max_norm_drift())
            });
            (path, outcome)
        })
        .collect();

    let runs: Vec<Value> = results
        .iter()
        .zip(values)
        .enumerate()
        .map(|(k, ((path, outcome), value))| {
            let file = path.file_name().map(|f| f.to_string_lossy().into_owned());
            match outcome {
                Ok(drift) => json!({ "index": k, "value": value, "file": file, "status": "ok", "max_norm_drift": drift }),
                Err(e) => json!({ "index": k, "value": value, "file": Value::Null, "status": "error", "error": e.record() }),
            }
        })
        .collect();
    let manifest = json!({
        "tool": "multirabi",
        "version": env!("CARGO_PKG_VERSION"),
        "param": param.name(),
        "base_config": configs[0].to_file(),
        "runs": runs,
    });
    let manifest_path = out_dir.join("manifest.json");
    with_output(Some(&manifest_path), |w| {
        writeln!(w, "{}", serde_json::to_string_pretty(&manifest).expect("serialisable"))
    })?;
    if let Some((_, Err(e))) = results.into_iter().find(|(_, r)| r.is_err()) {
        return Err(e);
    }
    Ok(manifest)
}
