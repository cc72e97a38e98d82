//! Trajectory serialisation.
//!
//! CSV rows are `t, re_0, im_0, …, re_{n−1}, im_{n−1}, p_0, …, p_{n−1}` with
//! every number printed to 17 significant digits, so output is bit-exact and
//! deterministic. The JSON form carries the same columns plus an arbitrary
//! provenance object (typically the resolved run configuration).

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::model::StateVector;
use crate::propagate::Trajectory;
use crate::scalar::Real;

/// Header line without trailing newline.
pub fn csv_header(n: usize) -> String {
    let mut cols = vec!["t".to_string()];
    for k in 0..n {
        cols.push(format!("re_{k}"));
        cols.push(format!("im_{k}"));
    }
    cols.extend((0..n).map(|k| format!("p_{k}")));
    cols.join(",")
}

fn fmt<T: Real>(x: T) -> String {
    format!("{:.16e}", x.to_f64().unwrap_or(f64::NAN))
}

fn csv_row<T: Real>(t: T, s: &StateVector<T>) -> String {
    let mut cols = vec![fmt(t)];
    for z in s.amplitudes() {
        cols.push(fmt(z.re));
        cols.push(fmt(z.im));
    }
    cols.extend(s.populations().into_iter().map(fmt));
    cols.join(",")
}

pub fn write_csv<T: Real, W: Write>(traj: &Trajectory<T>, mut out: W) -> io::Result<()> {
    writeln!(out, "{}", csv_header(traj.dim()))?;
    for (&t, s) in traj.times().iter().zip(traj.states()) {
        writeln!(out, "{}", csv_row(t, s))?;
    }
    Ok(())
}

pub fn to_csv<T: Real>(traj: &Trajectory<T>) -> String {
    let mut buf = Vec::new();
    write_csv(traj, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("CSV is ASCII")
}

/// JSON document for a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub n: usize,
    pub times: Vec<f64>,
    /// `[re, im]` per level, per time.
    pub amplitudes: Vec<Vec<[f64; 2]>>,
    pub populations: Vec<Vec<f64>>,
    pub provenance: serde_json::Value,
}

impl TrajectoryRecord {
    pub fn from_trajectory<T: Real>(traj: &Trajectory<T>, provenance: serde_json::Value) -> Self {
        let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
        Self {
            n: traj.dim(),
            times: traj.times().iter().map(|&t| f(t)).collect(),
            amplitudes: traj
                .states()
                .iter()
                .map(|s| s.amplitudes().iter().map(|z| [f(z.re), f(z.im)]).collect())
                .collect(),
            populations: traj.populations().into_iter().map(|p| p.into_iter().map(f).collect()).collect(),
            provenance,
        }
    }
}

pub fn write_json<T: Real, W: Write>(traj: &Trajectory<T>, provenance: serde_json::Value, out: W) -> io::Result<()> {
    serde_json::to_writer(out, &TrajectoryRecord::from_trajectory(traj, provenance)).map_err(io::Error::other)
}
