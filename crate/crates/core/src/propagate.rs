//! Numerical oracle: direct integration of `iΨ' = H(t)Ψ`, a generic matrix
//! exponential, and trajectory comparison.
//!
//! Nothing here uses the closed forms from [`crate::spectral`],
//! [`crate::exact`] or [`crate::dyson`]; the integrator only sees a
//! [`HamiltonianFn`].

use ndarray::Array1;
use num_complex::Complex;
use thiserror::Error;

use crate::linalg::{self, scale, CMatrix};
use crate::model::{HamiltonianFn, StateVector};
use crate::scalar::{from_usize, im, lit, re, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepControl {
    /// Constant step, clipped only at grid points.
    Fixed,
    /// Step doubling: a step is accepted when one full step and two half
    /// steps agree to `tol · h`; otherwise the step is halved.
    #[default]
    Halving,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig<T> {
    pub step: T,
    pub tol: T,
    pub max_steps: usize,
    pub control: StepControl,
}

impl<T: Real> IntegratorConfig<T> {
    pub fn new(step: T, tol: T, max_steps: usize) -> Result<Self, PropagateError<T>> {
        let cfg = Self { step, tol, max_steps, control: StepControl::Halving };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Fixed-step RK4 with the given step.
    pub fn fixed(step: T, max_steps: usize) -> Result<Self, PropagateError<T>> {
        let cfg = Self { step, tol: lit(1e-3), max_steps, control: StepControl::Fixed };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), PropagateError<T>> {
        if !(self.step.is_finite() && self.step > T::zero()) {
            return Err(PropagateError::InvalidConfig(format!("step must be positive, got {}", self.step)));
        }
        if !(self.tol > T::zero() && self.tol <= lit(1e-3)) {
            return Err(PropagateError::InvalidConfig(format!("tol must lie in (0, 1e-3], got {}", self.tol)));
        }
        if self.max_steps == 0 {
            return Err(PropagateError::InvalidConfig("max_steps must be positive".into()));
        }
        Ok(())
    }
}

impl<T: Real> Default for IntegratorConfig<T> {
    fn default() -> Self {
        Self { step: lit(1e-2), tol: lit(1e-10), max_steps: 50_000_000, control: StepControl::Halving }
    }
}

#[derive(Debug, Clone, Error)]
pub enum PropagateError<T: Real> {
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    #[error("time grid must start at 0 and be strictly increasing")]
    InvalidGrid,
    #[error("dimension mismatch: Hamiltonian is {hamiltonian}×{hamiltonian}, state has {state} amplitudes")]
    DimensionMismatch { hamiltonian: usize, state: usize },
    #[error("step budget of {steps} exhausted at t = {t}")]
    Divergence { t: f64, steps: usize, partial: Trajectory<T> },
    #[error("non-finite amplitudes at t = {t}")]
    NumericFailure { t: f64 },
    #[error("matrix 1-norm {norm} exceeds expm limit {limit}")]
    RangeError { norm: f64, limit: f64 },
    #[error("trajectories do not share a time grid")]
    GridMismatch,
}

/// Time grid with the state and populations at each time.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    times: Vec<T>,
    states: Vec<StateVector<T>>,
}

impl<T: Real> Trajectory<T> {
    /// # Panics
    /// If the lengths differ or the states have different dimensions.
    pub fn new(times: Vec<T>, states: Vec<StateVector<T>>) -> Self {
        assert_eq!(times.len(), states.len(), "one state per time");
        if let Some(first) = states.first() {
            assert!(states.iter().all(|s| s.dim() == first.dim()), "states of mixed dimension");
        }
        Self { times, states }
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn states(&self) -> &[StateVector<T>] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, StateVector::dim)
    }

    /// `|amp_k|²` per time.
    pub fn populations(&self) -> Vec<Vec<T>> {
        self.states.iter().map(StateVector::populations).collect()
    }

    /// `max_k |‖Ψ(t_k)‖ − 1|`.
    pub fn max_norm_drift(&self) -> T {
        self.states.iter().map(|s| (s.norm() - T::one()).abs()).fold(T::zero(), T::max)
    }

    /// Applies `f(t, amplitudes)` to every state.
    pub fn map_states(&self, mut f: impl FnMut(T, &Array1<Complex<T>>) -> Array1<Complex<T>>) -> Self {
        let states = self
            .times
            .iter()
            .zip(&self.states)
            .map(|(&t, s)| StateVector::unchecked(f(t, s.amplitudes())))
            .collect();
        Self { times: self.times.clone(), states }
    }
}

/// `i dΨ/dt = HΨ` ⇒ `dΨ/dt = −iHΨ`.
fn rhs<T: Real>(h: &CMatrix<T>, y: &Array1<Complex<T>>) -> Array1<Complex<T>> {
    h.dot(y).mapv(|z| Complex::new(z.im, -z.re))
}

/// One classic RK4 step with the Hamiltonian pre-evaluated at `t`, `t + h/2`
/// and `t + h`.
fn rk4<T: Real>(
    y: &Array1<Complex<T>>,
    h: T,
    h_start: &CMatrix<T>,
    h_mid: &CMatrix<T>,
    h_end: &CMatrix<T>,
) -> Array1<Complex<T>> {
    let half = re(h * lit(0.5));
    let k1 = rhs(h_start, y);
    let k2 = rhs(h_mid, &(y + &scale(&k1, half)));
    let k3 = rhs(h_mid, &(y + &scale(&k2, half)));
    let k4 = rhs(h_end, &(y + &scale(&k3, re(h))));
    let two = re(lit::<T>(2.0));
    y + &scale(&(k1 + &scale(&k2, two) + &scale(&k3, two) + k4), re(h / lit(6.0)))
}

fn all_finite<T: Real>(y: &Array1<Complex<T>>) -> bool {
    y.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Integrates `iΨ' = H(t)Ψ` from `Ψ(0) = psi0`, landing exactly on each point
/// of `t_grid` (which must start at 0 and increase strictly).
///
/// The norm is never renormalised, so its drift is a direct error meter.
pub fn integrate<T: Real, H: HamiltonianFn<T> + ?Sized>(
    hamiltonian: &H,
    psi0: &StateVector<T>,
    t_grid: &[T],
    cfg: &IntegratorConfig<T>,
) -> Result<Trajectory<T>, PropagateError<T>> {
    cfg.validate()?;
    if hamiltonian.dim() != psi0.dim() {
        return Err(PropagateError::DimensionMismatch { hamiltonian: hamiltonian.dim(), state: psi0.dim() });
    }
    let grid_ok = t_grid.first().is_some_and(|t0| *t0 == T::zero())
        && t_grid.windows(2).all(|w| w[1] > w[0])
        && t_grid.iter().all(|t| t.is_finite());
    if !grid_ok {
        return Err(PropagateError::InvalidGrid);
    }

    let mut y = psi0.amplitudes().clone();
    let mut t = T::zero();
    let mut h = cfg.step;
    let mut steps = 0usize;
    let mut times = vec![T::zero()];
    let mut states = vec![psi0.clone()];
    let half = lit::<T>(0.5);
    let quarter = lit::<T>(0.25);

    for &target in &t_grid[1..] {
        while t < target {
            if steps >= cfg.max_steps {
                return Err(PropagateError::Divergence {
                    t: t.to_f64().unwrap_or(f64::NAN),
                    steps,
                    partial: Trajectory::new(times, states),
                });
            }
            steps += 1;
            let remaining = target - t;
            // a sliver left before the grid point is merged into this step
            let (h_try, lands) =
                if h >= remaining || remaining - h < h * lit(1e-6) { (remaining, true) } else { (h, false) };

            let h_start = hamiltonian.at(t);
            let h_mid = hamiltonian.at(t + h_try * half);
            let h_end = hamiltonian.at(t + h_try);
            let next = match cfg.control {
                StepControl::Fixed => rk4(&y, h_try, &h_start, &h_mid, &h_end),
                StepControl::Halving => {
                    let full = rk4(&y, h_try, &h_start, &h_mid, &h_end);
                    let hh = h_try * half;
                    let q1 = hamiltonian.at(t + h_try * quarter);
                    let q3 = hamiltonian.at(t + h_try * (half + quarter));
                    let first = rk4(&y, hh, &h_start, &q1, &h_mid);
                    let second = rk4(&first, hh, &h_mid, &q3, &h_end);
                    let err = linalg::vec_max_abs_diff(&full, &second);
                    // differences at rounding level cannot be reduced by halving
                    let floor = T::epsilon() * lit(64.0);
                    if !(err <= cfg.tol * h_try || err <= floor) {
                        if !err.is_finite() {
                            return Err(PropagateError::NumericFailure { t: t.to_f64().unwrap_or(f64::NAN) });
                        }
                        h = hh;
                        continue;
                    }
                    if err < cfg.tol * h_try / lit(32.0) && !lands {
                        h = h + h;
                    }
                    second
                }
            };
            if !all_finite(&next) {
                return Err(PropagateError::NumericFailure { t: t.to_f64().unwrap_or(f64::NAN) });
            }
            y = next;
            t = if lands { target } else { t + h_try };
        }
        times.push(target);
        states.push(StateVector::unchecked(y.clone()));
    }
    Ok(Trajectory::new(times, states))
}

/// Inputs with a larger 1-norm are rejected by [`expm_generic`].
pub const EXPM_MAX_NORM: f64 = 1.0e3;

/// Matrix exponential by scaling and squaring with a truncated Taylor series.
pub fn expm_generic<T: Real>(m: &CMatrix<T>) -> Result<CMatrix<T>, PropagateError<T>> {
    assert_eq!(m.nrows(), m.ncols(), "expm of a non-square matrix");
    let n = m.nrows();
    let norm = linalg::norm_1(m);
    if !norm.is_finite() || norm > lit(EXPM_MAX_NORM) {
        return Err(PropagateError::RangeError { norm: norm.to_f64().unwrap_or(f64::NAN), limit: EXPM_MAX_NORM });
    }
    let mut squarings = 0u32;
    let mut scaled_norm = norm;
    while scaled_norm > lit(0.5) {
        scaled_norm = scaled_norm * lit(0.5);
        squarings += 1;
    }
    let scale = re(lit::<T>(0.5).powi(squarings as i32));
    let a = m.mapv(|z| z * scale);

    let mut sum = linalg::identity::<T>(n);
    let mut term = linalg::identity::<T>(n);
    for k in 1..=40usize {
        term = term.dot(&a).mapv(|z| z / re(from_usize::<T>(k)));
        sum = sum + &term;
        if linalg::norm_1(&term) <= T::epsilon() * linalg::norm_1(&sum) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum.dot(&sum);
    }
    Ok(sum)
}

/// Propagator `exp(−iMt)` of a constant Hamiltonian.
pub fn constant_propagator<T: Real>(h: &CMatrix<T>, t: T) -> Result<CMatrix<T>, PropagateError<T>> {
    expm_generic(&h.mapv(|z| z * im(-t)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationRow<T> {
    pub t: T,
    /// `max_k |a_k − b_k|`.
    pub amplitude: T,
    /// `max_k |a_k − e^{iθ} b_k|` with `θ` minimising the Euclidean distance.
    pub aligned: T,
    pub population: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationReport<T> {
    pub max_amplitude: T,
    pub max_aligned: T,
    pub max_population: T,
    pub rows: Vec<DeviationRow<T>>,
}

/// Aligns `b` to `a` by the global phase `e^{iθ} = ⟨b|a⟩/|⟨b|a⟩|`.
fn phase_aligned<T: Real>(a: &Array1<Complex<T>>, b: &Array1<Complex<T>>) -> Array1<Complex<T>> {
    let overlap = b.iter().zip(a.iter()).fold(Complex::new(T::zero(), T::zero()), |s, (x, y)| s + x.conj() * *y);
    let mag = overlap.norm();
    if mag > T::zero() {
        let phase = overlap / re(mag);
        b.mapv(|z| z * phase)
    } else {
        b.clone()
    }
}

/// Per-time raw, phase-aligned and population deviations.
pub fn compare<T: Real>(a: &Trajectory<T>, b: &Trajectory<T>) -> Result<DeviationReport<T>, PropagateError<T>> {
    if a.len() != b.len() || a.dim() != b.dim() {
        return Err(PropagateError::GridMismatch);
    }
    let grid_tol = lit::<T>(1e-12);
    for (&ta, &tb) in a.times().iter().zip(b.times()) {
        if (ta - tb).abs() > grid_tol * T::one().max(ta.abs()) {
            return Err(PropagateError::GridMismatch);
        }
    }
    let mut rows = Vec::with_capacity(a.len());
    for ((&t, sa), sb) in a.times().iter().zip(a.states()).zip(b.states()) {
        let (va, vb) = (sa.amplitudes(), sb.amplitudes());
        let amplitude = linalg::vec_max_abs_diff(va, vb);
        let aligned = linalg::vec_max_abs_diff(va, &phase_aligned(va, vb));
        let population = sa
            .populations()
            .iter()
            .zip(sb.populations())
            .map(|(p, q)| (*p - q).abs())
            .fold(T::zero(), T::max);
        rows.push(DeviationRow { t, amplitude, aligned, population });
    }
    let max = |f: fn(&DeviationRow<T>) -> T| rows.iter().map(f).fold(T::zero(), T::max);
    Ok(DeviationReport {
        max_amplitude: max(|r| r.amplitude),
        max_aligned: max(|r| r.aligned),
        max_population: max(|r| r.population),
        rows,
    })
}

/// `n` equally spaced points from 0 to `t_max` inclusive.
pub fn uniform_grid<T: Real>(t_max: T, samples: usize) -> Vec<T> {
    assert!(samples >= 2, "a grid needs at least two samples");
    let last = from_usize::<T>(samples - 1);
    (0..samples)
        .map(|k| if k + 1 == samples { t_max } else { t_max * from_usize::<T>(k) / last })
        .collect()
}
