//! Exact evolution under the consistency condition.
//!
//! When every detuning `ε_{ij}` (`j − i ≥ 2`) vanishes and the adjacent
//! frequencies are resonant, the rotating-frame Hamiltonian is the constant
//! `gQ` with `Q = |1⟩⟨1| − 1ₙ` (`|1⟩` the all-ones vector). Because
//! `(|1⟩⟨1|)^k = n^{k−1}|1⟩⟨1|`,
//!
//! ```text
//! exp(−igtQ) = e^{igt} (1ₙ + (e^{−ingt} − 1)/n · J),   J = |1⟩⟨1|,
//! ```
//!
//! and the lab-frame state is `Ψ(t) = U(t)† exp(−igtQ) Ψ(0)`.

use ndarray::Array2;
use num_complex::Complex;
use thiserror::Error;

use crate::linalg::CMatrix;
use crate::model::{self, Detunings, DriveSpec, LevelSpec, ModelError, StateVector};
use crate::scalar::{cis, from_usize, re, Real};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExactError {
    #[error("consistency condition violated: {}", format_violations(.violations))]
    Inconsistent { violations: Vec<((usize, usize), f64)> },
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn format_violations(v: &[((usize, usize), f64)]) -> String {
    v.iter()
        .map(|((i, j), e)| format!("ε_({i},{j}) = {e}"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Outcome of checking `ε_{ij} = 0` for all `j − i ≥ 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport<T> {
    pub satisfied: bool,
    pub violations: Vec<((usize, usize), T)>,
}

/// Collects every pair with `|ε_{ij}| > tol`.
pub fn check_consistency<T: Real>(det: &Detunings<T>, tol: T) -> ConsistencyReport<T> {
    assert!(tol > T::zero(), "consistency tolerance must be positive");
    let violations: Vec<_> = det.iter().filter(|(_, e)| e.abs() > tol).collect();
    ConsistencyReport { satisfied: violations.is_empty(), violations }
}

/// `exp(−igtQ)` from the closed form.
pub fn exp_q<T: Real>(n: usize, g: T, t: T) -> CMatrix<T> {
    assert!(n >= 2, "n-level system needs n >= 2, got {n}");
    let nf = from_usize::<T>(n);
    let global = cis(g * t);
    let rank_one = (cis(-nf * g * t) - re(T::one())) / re(nf);
    let diag = global * (re(T::one()) + rank_one);
    let off = global * rank_one;
    Array2::from_shape_fn((n, n), |(i, j)| if i == j { diag } else { off })
}

/// `Ψ(t) = U(t)† exp(−igtQ) Ψ(0)`.
///
/// Requires resonant adjacent frequencies and the consistency condition, both
/// at [`DriveSpec::default_tolerance`]. A drive that fails the consistency
/// check is rejected with the list of offending detunings; such drives need
/// the Dyson or numerical paths.
pub fn exact_evolution<T: Real>(
    levels: &LevelSpec<T>,
    drive: &DriveSpec<T>,
    psi0: &StateVector<T>,
    t: T,
) -> Result<StateVector<T>, ExactError> {
    check_preconditions(levels, drive, psi0)?;
    Ok(evolve_unchecked(drive, psi0, t))
}

/// Lab-frame states at each time in `times`; preconditions are checked once.
pub fn exact_states<T: Real>(
    levels: &LevelSpec<T>,
    drive: &DriveSpec<T>,
    psi0: &StateVector<T>,
    times: &[T],
) -> Result<Vec<StateVector<T>>, ExactError> {
    check_preconditions(levels, drive, psi0)?;
    Ok(times.iter().map(|&t| evolve_unchecked(drive, psi0, t)).collect())
}

fn check_preconditions<T: Real>(
    levels: &LevelSpec<T>,
    drive: &DriveSpec<T>,
    psi0: &StateVector<T>,
) -> Result<(), ExactError> {
    if !drive.is_rwa() {
        return Err(ModelError::ModeMismatch { expected_rwa: true }.into());
    }
    if psi0.dim() != levels.n() {
        return Err(ModelError::StateDimension { expected: levels.n(), got: psi0.dim() }.into());
    }
    let tol = drive.default_tolerance();
    model::check_resonance(levels, drive, tol)?;
    let report = check_consistency(&drive.detunings(), tol);
    if !report.satisfied {
        let violations = report
            .violations
            .into_iter()
            .map(|(p, e)| (p, e.to_f64().unwrap_or(f64::NAN)))
            .collect();
        return Err(ExactError::Inconsistent { violations });
    }
    Ok(())
}

fn evolve_unchecked<T: Real>(drive: &DriveSpec<T>, psi0: &StateVector<T>, t: T) -> StateVector<T> {
    let rotating = exp_q(drive.n(), drive.g(), t).dot(psi0.amplitudes());
    let lab = model::to_lab_frame(drive, t, &rotating);
    StateVector::unchecked(lab)
}

/// Closed-form ground-state solution written out for `n = 3`.
pub fn ground_state_solution_3<T: Real>(g: T, omega1: T, omega2: T, t: T) -> [Complex<T>; 3] {
    let three = from_usize::<T>(3);
    let e = cis(-three * g * t);
    let one = re(T::one());
    let two = re(from_usize::<T>(2));
    [
        cis(g * t) * (e + two) / re(three),
        cis((g - omega1) * t) * (e - one) / re(three),
        cis((g - omega1 - omega2) * t) * (e - one) / re(three),
    ]
}
