//! Interaction-picture Dyson truncations.
//!
//! On resonance the rotating-frame state is written `Ψ̃(t) = exp(−igtC) φ(t)`
//! with `iφ' = g A(t) φ` and `A(t) = exp(igtC) R(t) exp(−igtC)`. Truncating the
//! time-ordered exponential gives
//!
//! ```text
//! φ(t) ≈ [1 − ig ∫₀ᵗ A(s) ds − g² ∫₀ᵗ A(s) ∫₀ˢ A(u) du ds] φ(0).
//! ```
//!
//! [`dyson_states`] evaluates the truncation for any `n` by composite
//! Simpson quadrature. For `n = 3`, [`a_matrix_3`] and [`first_order_state_3`]
//! are the closed forms of `A(t)` and of `exp(−igtC)φ(t)` at first order from
//! the ground state.

use ndarray::Array1;
use num_complex::Complex;
use thiserror::Error;

use crate::linalg::{scale, CMatrix};
use crate::model::{self, Detunings, DriveSpec, HamiltonianFn, LevelSpec, ModelError, Remainder, StateVector};
use crate::scalar::{from_usize, im, lit, re, sinc, Real};
use crate::spectral::{self, SpectralDecomp};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DysonError {
    #[error("Dyson truncation order must be 1 or 2, got {0}")]
    InvalidOrder(usize),
    #[error("quadrature step {step} must be positive and at most {limit} to resolve the coupling and detuning scales")]
    InvalidStep { step: f64, limit: f64 },
    #[error("evaluation times must be finite, non-negative and non-decreasing")]
    InvalidTimes,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Truncation order and quadrature resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DysonConfig<T> {
    pub order: usize,
    /// Upper bound on the Simpson sub-interval length.
    pub quadrature_step: T,
}

impl<T: Real> DysonConfig<T> {
    pub fn new(order: usize, quadrature_step: T) -> Result<Self, DysonError> {
        if !(1..=2).contains(&order) {
            return Err(DysonError::InvalidOrder(order));
        }
        if !(quadrature_step.is_finite() && quadrature_step > T::zero()) {
            return Err(DysonError::InvalidStep {
                step: quadrature_step.to_f64().unwrap_or(f64::NAN),
                limit: f64::INFINITY,
            });
        }
        Ok(Self { order, quadrature_step })
    }

    /// Largest admissible step: `min(1/(10g), 2π/(10 max|ε|))`, ignoring
    /// scales that are zero.
    pub fn step_limit(g: T, det: &Detunings<T>) -> T {
        let ten = lit::<T>(10.0);
        let mut limit = T::infinity();
        if g > T::zero() {
            limit = limit.min(T::one() / (ten * g));
        }
        let e = det.max_abs();
        if e > T::zero() {
            limit = limit.min(T::TAU() / (ten * e));
        }
        limit
    }

    pub fn validate(&self, g: T, det: &Detunings<T>) -> Result<(), DysonError> {
        if !(1..=2).contains(&self.order) {
            return Err(DysonError::InvalidOrder(self.order));
        }
        let limit = Self::step_limit(g, det);
        if !(self.quadrature_step > T::zero() && self.quadrature_step <= limit) {
            return Err(DysonError::InvalidStep {
                step: self.quadrature_step.to_f64().unwrap_or(f64::NAN),
                limit: limit.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(())
    }
}

/// `A(t) = exp(igtC) R(t) exp(−igtC)` with the eigenbasis computed once.
#[derive(Debug, Clone)]
pub struct InteractionPicture<T> {
    decomp: SpectralDecomp<T>,
    g: T,
    remainder: Remainder<T>,
}

impl<T: Real> InteractionPicture<T> {
    pub fn new(n: usize, g: T, det: &Detunings<T>) -> Self {
        assert_eq!(det.n(), n, "detunings are for n = {}, expected {n}", det.n());
        Self { decomp: spectral::decompose(n), g, remainder: Remainder::new(det.clone()) }
    }

    pub fn n(&self) -> usize {
        self.decomp.n()
    }

    pub fn a_matrix(&self, t: T) -> CMatrix<T> {
        let forward = self.decomp.propagator(self.g, t);
        let backward = self.decomp.propagator(-self.g, t);
        backward.dot(&self.remainder.at(t)).dot(&forward)
    }

    /// `exp(−igtC)`.
    pub fn free_propagator(&self, t: T) -> CMatrix<T> {
        self.decomp.propagator(self.g, t)
    }
}

pub fn a_matrix<T: Real>(n: usize, g: T, det: &Detunings<T>, t: T) -> CMatrix<T> {
    InteractionPicture::new(n, g, det).a_matrix(t)
}

/// Closed-form `A(t)` for `n = 3`, `A = ½[a_jk]`.
pub fn a_matrix_3<T: Real>(g: T, eps: T, t: T) -> CMatrix<T> {
    let sqrt2 = T::SQRT_2();
    let (s, c) = (sqrt2 * g * t).sin_cos();
    let (se, ce) = (eps * t).sin_cos();
    let two = lit::<T>(2.0);
    let half = lit::<T>(0.5);

    let a11 = re(-s * s * ce);
    let a12 = Complex::new(sqrt2 * s * se, -sqrt2 * s * c * ce);
    let a13 = Complex::new((T::one() + c * c) * ce, two * c * se);
    let a21 = Complex::new(sqrt2 * s * se, sqrt2 * s * c * ce);
    let a22 = re(two * s * s * ce);
    let a23 = Complex::new(-sqrt2 * s * se, sqrt2 * s * c * ce);
    let a31 = Complex::new((T::one() + c * c) * ce, -two * c * se);
    let a32 = Complex::new(-sqrt2 * s * se, -sqrt2 * s * c * ce);
    let a33 = re(-s * s * ce);

    let m = ndarray::array![[a11, a12, a13], [a21, a22, a23], [a31, a32, a33]];
    m.mapv(|z| z * half)
}

/// Simpson nodes for `[a, b]`: an even number of sub-intervals of length ≤ `h`.
fn simpson_intervals<T: Real>(a: T, b: T, h: T) -> usize {
    let raw = ((b - a) / h).ceil().to_usize().unwrap_or(usize::MAX).max(1);
    raw + raw % 2
}

/// Running first- and second-order integrals of the truncated series.
struct DysonAccumulator<T: Real> {
    picture: InteractionPicture<T>,
    psi0: Array1<Complex<T>>,
    order: usize,
    step: T,
    t: T,
    a_prev: CMatrix<T>,
    // ∫₀ᵗ A(s) ψ₀ ds
    first: Array1<Complex<T>>,
    // ∫₀ᵗ A(s) ∫₀ˢ A(u) ψ₀ du ds
    second: Array1<Complex<T>>,
}

impl<T: Real> DysonAccumulator<T> {
    fn new(picture: InteractionPicture<T>, psi0: Array1<Complex<T>>, cfg: &DysonConfig<T>) -> Self {
        let n = psi0.len();
        let a_prev = picture.a_matrix(T::zero());
        Self {
            picture,
            psi0,
            order: cfg.order,
            step: cfg.quadrature_step,
            t: T::zero(),
            a_prev,
            first: Array1::zeros(n),
            second: Array1::zeros(n),
        }
    }

    fn advance_to(&mut self, b: T) {
        let a = self.t;
        if b <= a {
            return;
        }
        let m = simpson_intervals(a, b, self.step);
        let h = (b - a) / from_usize::<T>(m);
        let mut mats = Vec::with_capacity(m + 1);
        mats.push(self.a_prev.clone());
        for k in 1..m {
            mats.push(self.picture.a_matrix(a + h * from_usize::<T>(k)));
        }
        mats.push(self.picture.a_matrix(b));

        let f: Vec<Array1<Complex<T>>> = mats.iter().map(|am| am.dot(&self.psi0)).collect();
        let third = re(h / lit::<T>(3.0));
        let twelfth = re(h / lit::<T>(12.0));
        let (four, five, eight) = (re(lit::<T>(4.0)), re(lit::<T>(5.0)), re(lit::<T>(8.0)));

        // cumulative inner integral at every node, fourth order at odd nodes too
        let mut inner = Vec::with_capacity(m + 1);
        inner.push(self.first.clone());
        for k in 1..=m {
            let next = if k % 2 == 0 {
                &inner[k - 2] + &scale(&(&f[k - 2] + &scale(&f[k - 1], four) + &f[k]), third)
            } else {
                &inner[k - 1] + &scale(&(&scale(&f[k - 1], five) + &scale(&f[k], eight) - &f[k + 1]), twelfth)
            };
            inner.push(next);
        }

        if self.order >= 2 {
            let outer: Vec<Array1<Complex<T>>> = mats.iter().zip(&inner).map(|(am, v)| am.dot(v)).collect();
            let mut acc: Array1<Complex<T>> = Array1::zeros(self.psi0.len());
            for k in (0..m).step_by(2) {
                acc = acc + scale(&(&outer[k] + &scale(&outer[k + 1], four) + &outer[k + 2]), third);
            }
            self.second = &self.second + &acc;
        }

        self.first = inner.pop().expect("at least one node");
        self.a_prev = mats.pop().expect("at least one node");
        self.t = b;
    }

    /// `exp(−igtC) φ(t)` at the current time.
    fn rotating_state(&self) -> Array1<Complex<T>> {
        let g = self.picture.g;
        let mut phi = &self.psi0 - &scale(&self.first, im(g));
        if self.order >= 2 {
            phi = phi - scale(&self.second, re(g * g));
        }
        self.picture.free_propagator(self.t).dot(&phi)
    }
}

/// Rotating-frame truncated Dyson states `Ψ̃(t)` at each of `times`.
///
/// The quadrature integrals are carried forward between consecutive times,
/// so a whole trajectory costs one pass. The returned states are not
/// normalised: at order `k` the norm deviates from 1 by `O(g^{k+1})`.
pub fn dyson_states<T: Real>(
    n: usize,
    g: T,
    det: &Detunings<T>,
    psi0: &StateVector<T>,
    times: &[T],
    cfg: &DysonConfig<T>,
) -> Result<Vec<StateVector<T>>, DysonError> {
    cfg.validate(g, det)?;
    if det.n() != n {
        return Err(ModelError::LevelCountMismatch { levels: n, drive: det.n() }.into());
    }
    if psi0.dim() != n {
        return Err(ModelError::StateDimension { expected: n, got: psi0.dim() }.into());
    }
    let ordered = times.windows(2).all(|w| w[0] <= w[1]);
    if !ordered || times.iter().any(|t| !t.is_finite() || *t < T::zero()) {
        return Err(DysonError::InvalidTimes);
    }
    let mut acc = DysonAccumulator::new(InteractionPicture::new(n, g, det), psi0.amplitudes().clone(), cfg);
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        acc.advance_to(t);
        out.push(StateVector::unchecked(acc.rotating_state()));
    }
    Ok(out)
}

/// Rotating-frame truncated Dyson state at a single time.
pub fn dyson_state<T: Real>(
    n: usize,
    g: T,
    det: &Detunings<T>,
    psi0: &StateVector<T>,
    t: T,
    cfg: &DysonConfig<T>,
) -> Result<StateVector<T>, DysonError> {
    let mut v = dyson_states(n, g, det, psi0, &[t], cfg)?;
    Ok(v.pop().expect("one time requested"))
}

/// Lab-frame truncated Dyson states for a resonant RWA configuration.
pub fn dyson_lab_states<T: Real>(
    levels: &LevelSpec<T>,
    drive: &DriveSpec<T>,
    psi0: &StateVector<T>,
    times: &[T],
    cfg: &DysonConfig<T>,
) -> Result<Vec<StateVector<T>>, DysonError> {
    check_rwa_resonant(levels, drive)?;
    let rotating = dyson_states(levels.n(), drive.g(), &drive.detunings(), psi0, times, cfg)?;
    Ok(times
        .iter()
        .zip(rotating)
        .map(|(&t, s)| StateVector::unchecked(model::to_lab_frame(drive, t, s.amplitudes())))
        .collect())
}

fn check_rwa_resonant<T: Real>(levels: &LevelSpec<T>, drive: &DriveSpec<T>) -> Result<(), ModelError> {
    if !drive.is_rwa() {
        return Err(ModelError::ModeMismatch { expected_rwa: true });
    }
    model::check_resonance(levels, drive, drive.default_tolerance())
}

/// `num/den`, or the removable-singularity rewrite when `den` is tiny.
fn quotient<T: Real>(num: impl FnOnce() -> T, den: T, limit: impl FnOnce() -> T, tol: T) -> T {
    if den == T::zero() || den.abs() < tol {
        limit()
    } else {
        num() / den
    }
}

/// The ten quotients that appear in the first-order three-level state,
/// each with its sinc rewrite.
struct FirstOrderTerms<T> {
    t: T,
    eps: T,
    s: T,
    tol: T,
}

impl<T: Real> FirstOrderTerms<T> {
    fn half(&self) -> T {
        lit(0.5)
    }

    /// `sin(εt)/ε`
    fn sin_eps(&self) -> T {
        let (t, e) = (self.t, self.eps);
        quotient(|| (e * t).sin(), e, || t * sinc(e * t), self.tol)
    }

    /// `(sin(kt) + sin((k ± ε)t)) / (2k ± ε)` for `k ∈ {s, q}` with `2q = s`:
    /// always `t cos(εt/2) sinc((2k ± ε)t/2)`.
    fn sin_pair(&self, k: T, sign: T, den: T) -> T {
        let (t, e, h) = (self.t, self.eps, self.half());
        quotient(
            || (k * t).sin() + ((k + sign * e) * t).sin(),
            den,
            || t * (e * t * h).cos() * sinc(den * t * h),
            self.tol,
        )
    }

    /// `(cos((k ± ε)t) − cos(kt)) / (2k ± ε)`: `∓t sin(εt/2) sinc((2k ± ε)t/2)`.
    fn cos_pair(&self, k: T, sign: T, den: T) -> T {
        let (t, e, h) = (self.t, self.eps, self.half());
        quotient(
            || ((k + sign * e) * t).cos() - (k * t).cos(),
            den,
            || -sign * t * (e * t * h).sin() * sinc(den * t * h),
            self.tol,
        )
    }

    /// `(sin(εt) + sin(st)) / (s + ε)`: `t cos((ε − s)t/2) sinc((s + ε)t/2)`.
    fn sin_mixed_plus(&self) -> T {
        let (t, e, s, h) = (self.t, self.eps, self.s, self.half());
        let den = s + e;
        quotient(|| (e * t).sin() + (s * t).sin(), den, || t * ((e - s) * t * h).cos() * sinc(den * t * h), self.tol)
    }

    /// `(sin(εt) − sin(st)) / (s − ε)`: `−t cos((ε + s)t/2) sinc((s − ε)t/2)`.
    fn sin_mixed_minus(&self) -> T {
        let (t, e, s, h) = (self.t, self.eps, self.s, self.half());
        let den = s - e;
        quotient(|| (e * t).sin() - (s * t).sin(), den, || -t * ((e + s) * t * h).cos() * sinc(den * t * h), self.tol)
    }
}

/// Closed-form `exp(−igtC) φ(t)` at first order from the ground state, `n = 3`.
///
/// Quotients whose denominator (`ε`, `√2g ± ε` or `2√2g ± ε`) falls below
/// `1e-6 · max(√2g, |ε|)` switch to their sinc form, which is exact and
/// regular through the singular point.
pub fn first_order_state_3<T: Real>(g: T, eps: T, t: T) -> [Complex<T>; 3] {
    let sqrt2 = T::SQRT_2();
    let s = sqrt2 * g;
    let q = g / sqrt2;
    let tol = lit::<T>(1e-6) * s.max(eps.abs());
    let terms = FirstOrderTerms { t, eps, s, tol };
    let two = lit::<T>(2.0);
    let (one, neg) = (T::one(), -T::one());
    let (sin_st, cos_st) = (s * t).sin_cos();
    let (sin_qt, cos_qt) = (q * t).sin_cos();

    let q1 = terms.sin_eps();
    let q2 = terms.sin_pair(s, one, two * s + eps);
    let q3 = terms.sin_pair(s, neg, two * s - eps);
    let q4 = terms.sin_pair(q, one, s + eps);
    let q5 = terms.sin_pair(q, neg, s - eps);
    let p2 = terms.sin_mixed_plus();
    let p3 = terms.sin_mixed_minus();
    let p4 = terms.cos_pair(s, one, two * s + eps);
    let p5 = terms.cos_pair(s, neg, two * s - eps);
    let k4 = terms.cos_pair(q, one, s + eps);
    let k5 = terms.cos_pair(q, neg, s - eps);

    let four = lit::<T>(4.0);
    let eight = lit::<T>(8.0);

    let x1 = re((one + cos_st) / two) - im(g / four * (-two + cos_st) * q1) - im(g / eight * (q2 + q3))
        + re(g / two * sin_qt * (q4 - q5));
    let x2 = im(-sin_st / sqrt2) - re(s / four * sin_st * q1) + im(s / four * (p2 + p3)) - re(s / eight * (p4 + p5));
    let x3 = re((-one + cos_st) / two) - im(g / four * (two + cos_st) * q1) - im(g / eight * (q2 + q3))
        + re(g / two * cos_qt * (k4 - k5));
    [x1, x2, x3]
}

/// Lab-frame first-order three-level solution from the ground state,
/// `(x₁, e^{−iω₁t} x₂, e^{−i(ω₁+ω₂)t} x₃)`.
pub fn approximate_solution_3<T: Real>(
    levels: &LevelSpec<T>,
    drive: &DriveSpec<T>,
    t: T,
) -> Result<StateVector<T>, DysonError> {
    let eps = three_level_epsilon(levels, drive)?;
    Ok(lab_from_first_order(drive, eps, t))
}

/// [`approximate_solution_3`] at each of `times`.
pub fn approximate_states_3<T: Real>(
    levels: &LevelSpec<T>,
    drive: &DriveSpec<T>,
    times: &[T],
) -> Result<Vec<StateVector<T>>, DysonError> {
    let eps = three_level_epsilon(levels, drive)?;
    Ok(times.iter().map(|&t| lab_from_first_order(drive, eps, t)).collect())
}

fn three_level_epsilon<T: Real>(levels: &LevelSpec<T>, drive: &DriveSpec<T>) -> Result<T, DysonError> {
    if levels.n() != 3 {
        return Err(ModelError::WrongDimension { expected: 3, got: levels.n() }.into());
    }
    check_rwa_resonant(levels, drive)?;
    Ok(drive.detunings().get(0, 2).expect("n = 3 has the (0,2) detuning"))
}

fn lab_from_first_order<T: Real>(drive: &DriveSpec<T>, eps: T, t: T) -> StateVector<T> {
    let x = first_order_state_3(drive.g(), eps, t);
    let rotating = Array1::from(x.to_vec());
    StateVector::unchecked(model::to_lab_frame(drive, t, &rotating))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermiticity_defect, max_abs_diff, vec_max_abs_diff};

    type C = Complex<f64>;

    fn ground() -> StateVector<f64> {
        StateVector::ground(3)
    }

    fn quadrature_first_order(g: f64, eps: f64, t: f64, step: f64) -> Array1<C> {
        let cfg = DysonConfig::new(1, step).unwrap();
        dyson_state(3, g, &Detunings::three_level(eps), &ground(), t, &cfg).unwrap().into_amplitudes()
    }

    #[test]
    fn config_validation() {
        assert_eq!(DysonConfig::new(3, 0.1), Err(DysonError::InvalidOrder(3)));
        assert!(matches!(DysonConfig::new(1, 0.0), Err(DysonError::InvalidStep { .. })));
        let cfg = DysonConfig::new(1, 0.5).unwrap();
        // 1/(10 g) = 1 is fine, 2π/(10·20) ≈ 0.031 is not
        assert!(cfg.validate(0.1, &Detunings::three_level(0.0)).is_ok());
        assert!(matches!(cfg.validate(0.1, &Detunings::three_level(20.0)), Err(DysonError::InvalidStep { .. })));
        assert!(matches!(cfg.validate(1.0, &Detunings::three_level(0.0)), Err(DysonError::InvalidStep { .. })));
        assert!(cfg.validate(0.0, &Detunings::zero(4)).is_ok());
    }

    #[test]
    fn two_level_a_vanishes() {
        for &t in &[0.0, 1.0, 7.3] {
            assert_eq!(a_matrix(2, 0.4, &Detunings::zero(2), t), CMatrix::zeros((2, 2)));
        }
    }

    #[test]
    fn a3_at_zero_is_r() {
        let z = C::new(0.0, 0.0);
        let o = C::new(1.0, 0.0);
        assert_eq!(a_matrix_3(0.3, 0.7, 0.0), ndarray::array![[z, z, o], [z, z, z], [o, z, z]]);
    }

    #[test]
    fn a3_entry_relations() {
        for &(g, e, t) in &[(0.3, 0.7, 1.1), (1.2, -0.4, 5.0), (0.05, 2.0, 33.0)] {
            let a = a_matrix_3(g, e, t);
            assert!((a[[1, 1]] + a[[0, 0]] * 2.0).norm() < 1e-15);
            assert!(hermiticity_defect(&a) < 1e-15);
            let am = a_matrix_3(g, -e, t);
            assert!((am[[0, 2]] - a[[2, 0]]).norm() < 1e-15);
            assert!((am[[0, 2]] - a[[0, 2]].conj()).norm() < 1e-15);
        }
    }

    #[test]
    fn a3_matches_conjugation() {
        for &(g, e, t) in &[(0.3, 0.7, 1.1), (1.2, -0.4, 5.0), (0.05, 2.0, 33.0)] {
            let direct = a_matrix(3, g, &Detunings::three_level(e), t);
            assert!(max_abs_diff(&direct, &a_matrix_3(g, e, t)) < 1e-12);
            assert!(hermiticity_defect(&direct) < 1e-14);
        }
    }

    #[test]
    fn first_order_at_zero_time() {
        let x = first_order_state_3(0.1, 0.4, 0.0);
        assert_eq!(x[0], C::new(1.0, 0.0));
        assert!(x[1].norm() < 1e-16 && x[2].norm() < 1e-16);
    }

    #[test]
    fn first_order_collapses_to_free_column() {
        // g-proportional corrections vanish as g → 0 with √2gt fixed
        let theta = 0.9;
        let mut last = f64::INFINITY;
        for &g in &[1e-2, 1e-3, 1e-4] {
            let t = theta / (2f64.sqrt() * g);
            let x = first_order_state_3(g, 1.0, t);
            let col = spectral::exp_c3(g, t);
            let dev = (0..3).map(|k| (x[k] - col[[k, 0]]).norm()).fold(0.0, f64::max);
            assert!(dev < last);
            last = dev;
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn sinc_rewrites_match_direct_quotients() {
        // at a generic point every quotient can be evaluated both ways
        let (g, e, t) = (0.21, 0.37, 4.3);
        let s = 2f64.sqrt() * g;
        let direct = FirstOrderTerms { t, eps: e, s, tol: 0.0 };
        let forced = FirstOrderTerms { t, eps: e, s, tol: f64::INFINITY };
        let pairs = [
            (direct.sin_eps(), forced.sin_eps()),
            (direct.sin_pair(s, 1.0, 2.0 * s + e), forced.sin_pair(s, 1.0, 2.0 * s + e)),
            (direct.sin_pair(s, -1.0, 2.0 * s - e), forced.sin_pair(s, -1.0, 2.0 * s - e)),
            (direct.sin_pair(s / 2.0, 1.0, s + e), forced.sin_pair(s / 2.0, 1.0, s + e)),
            (direct.sin_pair(s / 2.0, -1.0, s - e), forced.sin_pair(s / 2.0, -1.0, s - e)),
            (direct.cos_pair(s, 1.0, 2.0 * s + e), forced.cos_pair(s, 1.0, 2.0 * s + e)),
            (direct.cos_pair(s, -1.0, 2.0 * s - e), forced.cos_pair(s, -1.0, 2.0 * s - e)),
            (direct.cos_pair(s / 2.0, 1.0, s + e), forced.cos_pair(s / 2.0, 1.0, s + e)),
            (direct.cos_pair(s / 2.0, -1.0, s - e), forced.cos_pair(s / 2.0, -1.0, s - e)),
            (direct.sin_mixed_plus(), forced.sin_mixed_plus()),
            (direct.sin_mixed_minus(), forced.sin_mixed_minus()),
        ];
        for (k, (a, b)) in pairs.iter().enumerate() {
            assert!((a - b).abs() < 1e-13, "term {k}: {a} vs {b}");
        }
    }

    #[test]
    fn singular_detunings_match_quadrature() {
        let g = 0.05;
        let s = 2f64.sqrt() * g;
        // ε = 0 hits sin(εt)/ε; ±√2g the q-terms and mixed terms; ±2√2g the s-terms
        for &eps in &[0.0, s, -s, 2.0 * s, -2.0 * s] {
            for &t in &[3.0, 17.0] {
                let x = first_order_state_3(g, eps, t);
                let quad = quadrature_first_order(g, eps, t, 2e-3);
                let dev = (0..3).map(|k| (x[k] - quad[k]).norm()).fold(0.0, f64::max);
                assert!(dev < 1e-9, "ε = {eps}, t = {t}: {dev}");
                assert!(x.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
            }
        }
    }

    #[test]
    fn near_singular_detuning_is_smooth() {
        let g = 0.05;
        let s = 2f64.sqrt() * g;
        let t = 9.0;
        let at = first_order_state_3(g, s, t);
        for &d in &[1e-9, 1e-7, 1e-5] {
            let x = first_order_state_3(g, s + d, t);
            let dev = (0..3).map(|k| (x[k] - at[k]).norm()).fold(0.0, f64::max);
            // Lipschitz in ε with a constant of order g t², no spike
            assert!(dev < 10.0 * d, "δ = {d}: {dev}");
        }
    }

    #[test]
    fn first_order_matches_quadrature_example() {
        let (g, e, t) = (0.01, 1.0, 5.0);
        let x = first_order_state_3(g, e, t);
        let quad = quadrature_first_order(g, e, t, 1e-3);
        for k in 0..3 {
            assert!((x[k] - quad[k]).norm() < 1e-8);
        }
    }

    #[test]
    fn zero_coupling_is_free_rotating_state() {
        let cfg = DysonConfig::new(2, 0.05).unwrap();
        let psi0 = StateVector::normalized(ndarray::arr1(&[C::new(1.0, 0.0), C::new(0.0, 1.0), C::new(0.5, 0.0)])).unwrap();
        let out = dyson_state(3, 0.0, &Detunings::three_level(0.8), &psi0, 4.0, &cfg).unwrap();
        assert!(vec_max_abs_diff(out.amplitudes(), psi0.amplitudes()) < 1e-15);
    }

    #[test]
    fn order_two_on_consistency_manifold() {
        // ε = 0: the exact rotating-frame state is exp(−igtQ)ψ₀
        let cfg = DysonConfig::new(2, 0.01).unwrap();
        let psi0 = ground();
        let mut prev = None;
        for &g in &[0.04, 0.02] {
            let t = 5.0;
            let approx = dyson_state(3, g, &Detunings::three_level(0.0), &psi0, t, &cfg).unwrap();
            let exact = crate::exact::exp_q(3, g, t).dot(psi0.amplitudes());
            let dev = vec_max_abs_diff(approx.amplitudes(), &exact);
            assert!(dev < 2.0 * (g * t).powi(3), "g = {g}: {dev}");
            if let Some(p) = prev {
                let ratio: f64 = p / dev;
                assert!((6.0..=10.0).contains(&ratio), "ratio {ratio}");
            }
            prev = Some(dev);
        }
    }

    #[test]
    fn quadrature_is_fourth_order() {
        let det = Detunings::three_level(0.9);
        let psi0 = ground();
        let run = |order: usize, h: f64| {
            let cfg = DysonConfig::new(order, h).unwrap();
            dyson_state(3, 0.3, &det, &psi0, 6.0, &cfg).unwrap().into_amplitudes()
        };
        for order in [1, 2] {
            let (a, b, c) = (run(order, 0.2), run(order, 0.1), run(order, 0.05));
            let ratio = vec_max_abs_diff(&a, &b) / vec_max_abs_diff(&b, &c);
            assert!((12.0..=20.0).contains(&ratio), "order {order}: ratio {ratio}");
        }
    }

    #[test]
    fn cumulative_matches_pointwise() {
        let cfg = DysonConfig::new(2, 0.01).unwrap();
        let det = Detunings::three_level(0.6);
        let times = [0.0, 0.3, 1.7, 1.7, 4.0];
        let all = dyson_states(3, 0.1, &det, &ground(), &times, &cfg).unwrap();
        for (k, &t) in times.iter().enumerate() {
            let single = dyson_state(3, 0.1, &det, &ground(), t, &cfg).unwrap();
            assert!(vec_max_abs_diff(all[k].amplitudes(), single.amplitudes()) < 1e-10);
        }
        assert!(matches!(dyson_states(3, 0.1, &det, &ground(), &[1.0, 0.5], &cfg), Err(DysonError::InvalidTimes)));
    }

    #[test]
    fn norm_deviation_is_quadratic_in_g() {
        // ‖(1 − ig∫A)φ₀‖² − 1 = g²‖∫Aφ₀‖² since ∫A is Hermitian
        let worst = |g: f64| {
            (1..=200)
                .map(|k| {
                    let t = 10.0 * k as f64 / 200.0;
                    let x = first_order_state_3(g, 0.5, t);
                    (x.iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0).abs()
                })
                .fold(0.0, f64::max)
        };
        let ratio = worst(0.02) / worst(0.01);
        assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn approximate_solution_preconditions() {
        let l = LevelSpec::new(vec![0.0, 1.0, 2.5]).unwrap();
        let d = DriveSpec::resonant(&l, 0.02).unwrap().with_epsilon(0.5).unwrap();
        let psi = approximate_solution_3(&l, &d, 0.0).unwrap();
        assert_eq!(psi.amplitudes()[0], C::new(1.0, 0.0));

        let l4 = LevelSpec::new(vec![0.0, 1.0, 2.5, 3.0]).unwrap();
        let d4 = DriveSpec::resonant(&l4, 0.02).unwrap();
        assert!(matches!(
            approximate_solution_3(&l4, &d4, 1.0),
            Err(DysonError::Model(ModelError::WrongDimension { .. }))
        ));
        let off = DriveSpec::from_adjacent(&[1.0, 1.2], 0.02, true).unwrap();
        assert!(matches!(approximate_solution_3(&l, &off, 1.0), Err(DysonError::Model(ModelError::NotResonant { .. }))));
    }
}
