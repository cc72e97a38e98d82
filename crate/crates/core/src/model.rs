//! Physical configuration of the driven n-level atom and every Hamiltonian
//! built from it.
//!
//! Conventions (ħ = 1):
//!
//! * energies are shifted so that the ground level sits at zero; the constant
//!   `E₀·1ₙ` never enters the dynamics;
//! * drive phases are fixed to zero;
//! * in RWA mode `g` is the coupling after absorbing the factor ½ of the
//!   rotating term, so each field contributes `g e^{±iω_{ij}t}`;
//! * in full (non-RWA) mode each field contributes `g cos(ω_{ij}t)`. The same
//!   physical field therefore has cosine amplitude `2g` when its RWA coupling
//!   is `g`; [`DriveSpec::to_mode`] applies that factor.
//!
//! The non-RWA three-level equation is sometimes printed with `cos(iω t)`
//! entries. Taken literally that is `cosh(ωt)`, which is neither bounded nor
//! consistent with a real cosine drive, so the builder here uses `cos(ωt)`.
//!
//! The rotating frame is `Ψ̃ = U(t)Ψ` with `U = diag(1, e^{iω₁t},
//! e^{i(ω₁+ω₂)t}, …)`. In that frame `iΨ̃' = H̃_U Ψ̃` with
//! `H̃_U = U H U† − i U U̇†`.

use std::collections::BTreeMap;

use ndarray::{Array1, Array2};
use num_complex::Complex;
use thiserror::Error;

use crate::linalg::{self, CMatrix};
use crate::scalar::{cis, default_norm_tol, lit, re, Real};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("an n-level system needs n >= 2, got {0}")]
    TooFewLevels(usize),
    #[error("energies must be finite and strictly increasing: E_{index} = {value} does not exceed E_{prev_index} = {prev}", prev_index = .index - 1)]
    EnergiesNotIncreasing { index: usize, value: f64, prev: f64 },
    #[error("frequency ω_({i},{j}) = {value} must be finite and positive")]
    InvalidFrequency { i: usize, j: usize, value: f64 },
    #[error("pair ({i},{j}) is not a valid level pair for n = {n}")]
    InvalidPair { i: usize, j: usize, n: usize },
    #[error("frequency for pair ({i},{j}) given more than once")]
    DuplicatePair { i: usize, j: usize },
    #[error("frequency for pair ({i},{j}) is missing")]
    MissingPair { i: usize, j: usize },
    #[error("coupling g = {0} must be finite and non-negative")]
    InvalidCoupling(f64),
    #[error("level count mismatch: levels have n = {levels}, drive has n = {drive}")]
    LevelCountMismatch { levels: usize, drive: usize },
    #[error("this construction requires {} mode", if *.expected_rwa { "RWA" } else { "full (non-RWA)" })]
    ModeMismatch { expected_rwa: bool },
    #[error("resonance condition violated at level {level}: rotating-frame diagonal is {offset}")]
    NotResonant { level: usize, offset: f64 },
    #[error("operation only defined for n = {expected}, got n = {got}")]
    WrongDimension { expected: usize, got: usize },
    #[error("state has {got} amplitudes, expected {expected}")]
    StateDimension { expected: usize, got: usize },
    #[error("state norm {norm} differs from 1 by more than {tol}")]
    NotNormalized { norm: f64, tol: f64 },
    #[error("state has zero or non-finite norm")]
    ZeroState,
}

fn f64_of<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Level structure of the atom.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSpec<T> {
    energies: Vec<T>,
}

impl<T: Real> LevelSpec<T> {
    pub fn new(energies: Vec<T>) -> Result<Self, ModelError> {
        if energies.len() < 2 {
            return Err(ModelError::TooFewLevels(energies.len()));
        }
        if let Some(e) = energies.iter().find(|e| !e.is_finite()) {
            return Err(ModelError::EnergiesNotIncreasing { index: 0, value: f64_of(*e), prev: f64::NAN });
        }
        for k in 1..energies.len() {
            if !(energies[k] > energies[k - 1]) {
                return Err(ModelError::EnergiesNotIncreasing {
                    index: k,
                    value: f64_of(energies[k]),
                    prev: f64_of(energies[k - 1]),
                });
            }
        }
        Ok(Self { energies })
    }

    pub fn n(&self) -> usize {
        self.energies.len()
    }

    /// Energies as given, including the ground-state offset.
    pub fn energies(&self) -> &[T] {
        &self.energies
    }

    /// `Δ_j = E_j − E₀`.
    pub fn delta(&self, j: usize) -> T {
        self.energies[j] - self.energies[0]
    }

    /// Gap `E_j − E_{j−1}` for `1 ≤ j < n`.
    pub fn gap(&self, j: usize) -> T {
        self.energies[j] - self.energies[j - 1]
    }
}

/// Drive fields: one frequency per level pair, common coupling and mode.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveSpec<T> {
    n: usize,
    // packed upper triangle, row-major over i < j
    omega: Vec<T>,
    g: T,
    rwa: bool,
}

fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    // rows 0..i hold (n-1) + (n-2) + ... + (n-i) entries
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

fn check_coupling<T: Real>(g: T) -> Result<(), ModelError> {
    if g.is_finite() && g >= T::zero() {
        Ok(())
    } else {
        Err(ModelError::InvalidCoupling(f64_of(g)))
    }
}

fn check_frequency<T: Real>(i: usize, j: usize, w: T) -> Result<(), ModelError> {
    if w.is_finite() && w > T::zero() {
        Ok(())
    } else {
        Err(ModelError::InvalidFrequency { i, j, value: f64_of(w) })
    }
}

impl<T: Real> DriveSpec<T> {
    /// Builds a drive from an explicit frequency for every pair `i < j`.
    pub fn new(
        n: usize,
        pairs: impl IntoIterator<Item = ((usize, usize), T)>,
        g: T,
        rwa: bool,
    ) -> Result<Self, ModelError> {
        if n < 2 {
            return Err(ModelError::TooFewLevels(n));
        }
        check_coupling(g)?;
        let mut slots: Vec<Option<T>> = vec![None; n * (n - 1) / 2];
        for ((i, j), w) in pairs {
            if !(i < j && j < n) {
                return Err(ModelError::InvalidPair { i, j, n });
            }
            check_frequency(i, j, w)?;
            let slot = &mut slots[pair_index(n, i, j)];
            if slot.is_some() {
                return Err(ModelError::DuplicatePair { i, j });
            }
            *slot = Some(w);
        }
        let mut omega = Vec::with_capacity(slots.len());
        for i in 0..n {
            for j in i + 1..n {
                match slots[pair_index(n, i, j)] {
                    Some(w) => omega.push(w),
                    None => return Err(ModelError::MissingPair { i, j }),
                }
            }
        }
        Ok(Self { n, omega, g, rwa })
    }

    /// Builds a drive from the adjacent frequencies `ω₁ … ω_{n−1}`. Every
    /// non-adjacent pair gets the sum of the adjacent frequencies it spans, so
    /// all detunings `ε_{ij}` vanish.
    pub fn from_adjacent(adjacent: &[T], g: T, rwa: bool) -> Result<Self, ModelError> {
        let n = adjacent.len() + 1;
        if n < 2 {
            return Err(ModelError::TooFewLevels(n));
        }
        for (k, &w) in adjacent.iter().enumerate() {
            check_frequency(k, k + 1, w)?;
        }
        let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            let mut sum = T::zero();
            for j in i + 1..n {
                sum = sum + adjacent[j - 1];
                pairs.push(((i, j), sum));
            }
        }
        Self::new(n, pairs, g, rwa)
    }

    /// RWA drive on resonance with `levels`, consistency condition satisfied.
    pub fn resonant(levels: &LevelSpec<T>, g: T) -> Result<Self, ModelError> {
        Self::from_adjacent(&apply_resonance(levels), g, true)
    }

    /// Overrides a single pair frequency.
    pub fn with_omega(mut self, i: usize, j: usize, w: T) -> Result<Self, ModelError> {
        if !(i < j && j < self.n) {
            return Err(ModelError::InvalidPair { i, j, n: self.n });
        }
        check_frequency(i, j, w)?;
        self.omega[pair_index(self.n, i, j)] = w;
        Ok(self)
    }

    /// Sets `ω_{ij} = ω_{i+1} + … + ω_j + eps` for a pair with `j − i ≥ 2`.
    pub fn with_detuning(self, i: usize, j: usize, eps: T) -> Result<Self, ModelError> {
        if !(i + 2 <= j && j < self.n) {
            return Err(ModelError::InvalidPair { i, j, n: self.n });
        }
        let w = self.adjacent_sum(i, j) + eps;
        self.with_omega(i, j, w)
    }

    /// Three-level shorthand: `ω₀₂ = ω₁ + ω₂ + eps`.
    pub fn with_epsilon(self, eps: T) -> Result<Self, ModelError> {
        if self.n != 3 {
            return Err(ModelError::WrongDimension { expected: 3, got: self.n });
        }
        self.with_detuning(0, 2, eps)
    }

    /// Sets every adjacent frequency to the level gap `E_j − E_{j−1}`;
    /// non-adjacent frequencies are kept as they are.
    pub fn apply_resonance(mut self, levels: &LevelSpec<T>) -> Result<Self, ModelError> {
        check_dims(levels, &self)?;
        for (k, w) in apply_resonance(levels).into_iter().enumerate() {
            self = self.with_omega(k, k + 1, w)?;
        }
        Ok(self)
    }

    /// Switches mode, rescaling `g` so that the same physical field is
    /// described: a cosine amplitude `A` corresponds to RWA coupling `A/2`.
    pub fn to_mode(mut self, rwa: bool) -> Self {
        if rwa != self.rwa {
            let two = lit::<T>(2.0);
            self.g = if rwa { self.g / two } else { self.g * two };
            self.rwa = rwa;
        }
        self
    }

    pub fn with_coupling(mut self, g: T) -> Result<Self, ModelError> {
        check_coupling(g)?;
        self.g = g;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn g(&self) -> T {
        self.g
    }

    pub fn is_rwa(&self) -> bool {
        self.rwa
    }

    /// `ω_{ij}` for `i < j`.
    pub fn omega(&self, i: usize, j: usize) -> T {
        assert!(i < j && j < self.n, "invalid pair ({i},{j}) for n = {}", self.n);
        self.omega[pair_index(self.n, i, j)]
    }

    /// Adjacent frequency `ω_k = ω_{k−1,k}`, `1 ≤ k < n`.
    pub fn adjacent(&self, k: usize) -> T {
        self.omega(k - 1, k)
    }

    /// `ω_{i+1} + … + ω_j`.
    pub fn adjacent_sum(&self, i: usize, j: usize) -> T {
        (i + 1..=j).fold(T::zero(), |s, k| s + self.adjacent(k))
    }

    /// Phase rate of the k-th rotating-frame entry, `ω₁ + … + ω_k`.
    pub fn frame_rate(&self, k: usize) -> T {
        self.adjacent_sum(0, k)
    }

    /// All pairs in row-major order.
    pub fn pairs(&self) -> impl Iterator<Item = ((usize, usize), T)> + '_ {
        let n = self.n;
        (0..n).flat_map(move |i| (i + 1..n).map(move |j| ((i, j), self.omega(i, j))))
    }

    pub fn max_frequency(&self) -> T {
        self.omega.iter().copied().fold(T::zero(), T::max)
    }

    /// Tolerance separating deliberate detuning from rounding noise:
    /// `1e-9 · max ω`.
    pub fn default_tolerance(&self) -> T {
        lit::<T>(1e-9) * self.max_frequency()
    }

    pub fn detunings(&self) -> Detunings<T> {
        Detunings::from_drive(self)
    }
}

/// `ε_{ij} = ω_{ij} − (ω_{i+1} + … + ω_j)` for every pair with `j − i ≥ 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Detunings<T> {
    n: usize,
    eps: BTreeMap<(usize, usize), T>,
}

impl<T: Real> Detunings<T> {
    pub fn from_drive(drive: &DriveSpec<T>) -> Self {
        let n = drive.n();
        let eps = (0..n)
            .flat_map(|i| (i + 2..n).map(move |j| (i, j)))
            .map(|(i, j)| ((i, j), drive.omega(i, j) - drive.adjacent_sum(i, j)))
            .collect();
        Self { n, eps }
    }

    /// All detunings zero.
    pub fn zero(n: usize) -> Self {
        let eps = (0..n)
            .flat_map(|i| (i + 2..n).map(move |j| ((i, j), T::zero())))
            .collect();
        Self { n, eps }
    }

    /// The single three-level detuning `ε = ε₀₂`.
    pub fn three_level(eps: T) -> Self {
        let mut d = Self::zero(3);
        d.eps.insert((0, 2), eps);
        d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Option<T> {
        self.eps.get(&(i, j)).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), T)> + '_ {
        self.eps.iter().map(|(&k, &v)| (k, v))
    }

    pub fn max_abs(&self) -> T {
        self.eps.values().map(|e| e.abs()).fold(T::zero(), T::max)
    }
}

/// Complex amplitude vector.
///
/// [`StateVector::new`] enforces unit norm. Approximate solutions and
/// integrator output carry drift or truncation error in their norm; those
/// are built with [`StateVector::unchecked`] so the deviation stays visible.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T> {
    amp: Array1<Complex<T>>,
}

impl<T: Real> StateVector<T> {
    pub fn new(amp: Array1<Complex<T>>) -> Result<Self, ModelError> {
        Self::with_tolerance(amp, default_norm_tol())
    }

    pub fn with_tolerance(amp: Array1<Complex<T>>, tol: T) -> Result<Self, ModelError> {
        let norm = linalg::vec_norm(&amp);
        if !norm.is_finite() || (norm - T::one()).abs() > tol {
            return Err(ModelError::NotNormalized { norm: f64_of(norm), tol: f64_of(tol) });
        }
        Ok(Self { amp })
    }

    /// Rescales `amp` to unit norm.
    pub fn normalized(amp: Array1<Complex<T>>) -> Result<Self, ModelError> {
        let norm = linalg::vec_norm(&amp);
        if !(norm.is_finite() && norm > T::zero()) {
            return Err(ModelError::ZeroState);
        }
        Ok(Self { amp: amp.mapv(|z| z / norm) })
    }

    /// Wraps amplitudes without a norm check.
    pub fn unchecked(amp: Array1<Complex<T>>) -> Self {
        Self { amp }
    }

    /// Level `k` of an `n`-level system.
    pub fn basis(n: usize, k: usize) -> Self {
        assert!(k < n, "basis index {k} out of range for n = {n}");
        let mut amp = Array1::from_elem(n, Complex::new(T::zero(), T::zero()));
        amp[k] = Complex::new(T::one(), T::zero());
        Self { amp }
    }

    pub fn ground(n: usize) -> Self {
        Self::basis(n, 0)
    }

    pub fn dim(&self) -> usize {
        self.amp.len()
    }

    pub fn amplitudes(&self) -> &Array1<Complex<T>> {
        &self.amp
    }

    pub fn into_amplitudes(self) -> Array1<Complex<T>> {
        self.amp
    }

    pub fn norm(&self) -> T {
        linalg::vec_norm(&self.amp)
    }

    /// `|amp_k|²`.
    pub fn populations(&self) -> Vec<T> {
        self.amp.iter().map(|z| z.norm_sqr()).collect()
    }
}

/// Time-dependent Hamiltonian `t ↦ H(t)`.
pub trait HamiltonianFn<T: Real>: Send + Sync {
    fn dim(&self) -> usize;
    fn at(&self, t: T) -> CMatrix<T>;
}

impl<T: Real, H: HamiltonianFn<T> + ?Sized> HamiltonianFn<T> for &H {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn at(&self, t: T) -> CMatrix<T> {
        (**self).at(t)
    }
}

impl<T: Real, H: HamiltonianFn<T> + ?Sized> HamiltonianFn<T> for Box<H> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn at(&self, t: T) -> CMatrix<T> {
        (**self).at(t)
    }
}

/// Hamiltonian defined by a closure.
pub struct FnHamiltonian<F> {
    dim: usize,
    f: F,
}

impl<F> FnHamiltonian<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<T: Real, F: Fn(T) -> CMatrix<T> + Send + Sync> HamiltonianFn<T> for FnHamiltonian<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn at(&self, t: T) -> CMatrix<T> {
        (self.f)(t)
    }
}

/// Time-independent Hamiltonian.
#[derive(Debug, Clone)]
pub struct ConstantHamiltonian<T> {
    matrix: CMatrix<T>,
}

impl<T: Real> ConstantHamiltonian<T> {
    pub fn new(matrix: CMatrix<T>) -> Self {
        assert_eq!(matrix.nrows(), matrix.ncols(), "Hamiltonian must be square");
        Self { matrix }
    }
}

impl<T: Real> HamiltonianFn<T> for ConstantHamiltonian<T> {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }
    fn at(&self, _t: T) -> CMatrix<T> {
        self.matrix.clone()
    }
}

fn check_dims<T: Real>(levels: &LevelSpec<T>, drive: &DriveSpec<T>) -> Result<(), ModelError> {
    if levels.n() != drive.n() {
        return Err(ModelError::LevelCountMismatch { levels: levels.n(), drive: drive.n() });
    }
    Ok(())
}

fn check_mode<T: Real>(drive: &DriveSpec<T>, rwa: bool) -> Result<(), ModelError> {
    if drive.is_rwa() != rwa {
        return Err(ModelError::ModeMismatch { expected_rwa: rwa });
    }
    Ok(())
}

/// `diag(0, Δ₁, …, Δ_{n−1})`.
pub fn build_h0<T: Real>(levels: &LevelSpec<T>) -> Array2<T> {
    let d: Array1<T> = (0..levels.n()).map(|j| levels.delta(j)).collect();
    Array2::from_diag(&d)
}

/// RWA interaction `V(t)`: `V_{ij} = e^{iω_{ij}t}` above the diagonal,
/// conjugates below. Only the frequencies of `drive` are used.
pub fn build_interaction_rwa<T: Real>(drive: &DriveSpec<T>, t: T) -> CMatrix<T> {
    let n = drive.n();
    let mut v = CMatrix::zeros((n, n));
    for ((i, j), w) in drive.pairs() {
        let z = cis(w * t);
        v[[i, j]] = z;
        v[[j, i]] = z.conj();
    }
    v
}

/// Lab-frame RWA Hamiltonian `H(t) = H₀ + g V(t)`.
#[derive(Debug, Clone)]
pub struct LabHamiltonian<T> {
    deltas: Vec<T>,
    drive: DriveSpec<T>,
}

impl<T: Real> HamiltonianFn<T> for LabHamiltonian<T> {
    fn dim(&self) -> usize {
        self.deltas.len()
    }
    fn at(&self, t: T) -> CMatrix<T> {
        let g = re(self.drive.g());
        let mut h = build_interaction_rwa(&self.drive, t).mapv(|z| g * z);
        for (k, &d) in self.deltas.iter().enumerate() {
            h[[k, k]] = re(d);
        }
        h
    }
}

pub fn full_hamiltonian<T: Real>(
    levels: &LevelSpec<T>,
    drive: &DriveSpec<T>,
) -> Result<LabHamiltonian<T>, ModelError> {
    check_dims(levels, drive)?;
    check_mode(drive, true)?;
    Ok(LabHamiltonian { deltas: (0..levels.n()).map(|j| levels.delta(j)).collect(), drive: drive.clone() })
}

/// Lab-frame cosine-drive Hamiltonian without the RWA: off-diagonal entries
/// `g cos(ω_{ij}t)`, real symmetric at every `t`.
#[derive(Debug, Clone)]
pub struct CosineHamiltonian<T> {
    deltas: Vec<T>,
    drive: DriveSpec<T>,
}

impl<T: Real> HamiltonianFn<T> for CosineHamiltonian<T> {
    fn dim(&self) -> usize {
        self.deltas.len()
    }
    fn at(&self, t: T) -> CMatrix<T> {
        let n = self.deltas.len();
        let g = self.drive.g();
        let mut h = CMatrix::zeros((n, n));
        for (k, &d) in self.deltas.iter().enumerate() {
            h[[k, k]] = re(d);
        }
        for ((i, j), w) in self.drive.pairs() {
            let z = re(g * (w * t).cos());
            h[[i, j]] = z;
            h[[j, i]] = z;
        }
        h
    }
}

pub fn full_hamiltonian_nonrwa<T: Real>(
    levels: &LevelSpec<T>,
    drive: &DriveSpec<T>,
) -> Result<CosineHamiltonian<T>, ModelError> {
    check_dims(levels, drive)?;
    check_mode(drive, false)?;
    Ok(CosineHamiltonian { deltas: (0..levels.n()).map(|j| levels.delta(j)).collect(), drive: drive.clone() })
}

/// Diagonal phases of `U(t) = diag(1, e^{iω₁t}, e^{i(ω₁+ω₂)t}, …)`.
pub fn rotating_frame_phases<T: Real>(drive: &DriveSpec<T>, t: T) -> Vec<Complex<T>> {
    let mut rate = T::zero();
    let mut out = Vec::with_capacity(drive.n());
    out.push(cis(T::zero()));
    for k in 1..drive.n() {
        rate = rate + drive.adjacent(k);
        out.push(cis(rate * t));
    }
    out
}

/// `U(t)` as a dense matrix.
pub fn rotating_frame<T: Real>(drive: &DriveSpec<T>, t: T) -> CMatrix<T> {
    linalg::diag(&rotating_frame_phases(drive, t))
}

/// `Ψ = U(t)† Ψ̃`.
pub fn to_lab_frame<T: Real>(drive: &DriveSpec<T>, t: T, rotating: &Array1<Complex<T>>) -> Array1<Complex<T>> {
    let phases = rotating_frame_phases(drive, t);
    rotating.iter().zip(phases).map(|(a, p)| *a * p.conj()).collect()
}

/// `Ψ̃ = U(t) Ψ`.
pub fn to_rotating_frame<T: Real>(drive: &DriveSpec<T>, t: T, lab: &Array1<Complex<T>>) -> Array1<Complex<T>> {
    let phases = rotating_frame_phases(drive, t);
    lab.iter().zip(phases).map(|(a, p)| *a * p).collect()
}

/// Rotating-frame Hamiltonian `H̃_U(t)`.
///
/// Diagonal `Δ_k − (ω₁ + … + ω_k)`, `g` on the first off-diagonals and
/// `g e^{±iε_{ij}t}` further out.
#[derive(Debug, Clone)]
pub struct RotatingHamiltonian<T> {
    offsets: Vec<T>,
    g: T,
    detunings: Detunings<T>,
}

impl<T: Real> RotatingHamiltonian<T> {
    /// Diagonal of `H̃_U`.
    pub fn offsets(&self) -> &[T] {
        &self.offsets
    }
}

impl<T: Real> HamiltonianFn<T> for RotatingHamiltonian<T> {
    fn dim(&self) -> usize {
        self.offsets.len()
    }
    fn at(&self, t: T) -> CMatrix<T> {
        let n = self.offsets.len();
        let g = re(self.g);
        let mut h = CMatrix::zeros((n, n));
        for (k, &d) in self.offsets.iter().enumerate() {
            h[[k, k]] = re(d);
        }
        for k in 0..n - 1 {
            h[[k, k + 1]] = g;
            h[[k + 1, k]] = g;
        }
        for ((i, j), e) in self.detunings.iter() {
            let z = g * cis(e * t);
            h[[i, j]] = z;
            h[[j, i]] = z.conj();
        }
        h
    }
}

/// Diagonal of `H̃_U`, accumulated as `Σ_{l≤k} ((E_l − E_{l−1}) − ω_l)` so it is
/// exactly zero once [`apply_resonance`] has set the adjacent frequencies.
pub fn resonance_offsets<T: Real>(levels: &LevelSpec<T>, drive: &DriveSpec<T>) -> Vec<T> {
    let mut acc = T::zero();
    let mut out = vec![T::zero()];
    for k in 1..levels.n() {
        acc = acc + (levels.gap(k) - drive.adjacent(k));
        out.push(acc);
    }
    out
}

pub fn transformed_hamiltonian<T: Real>(
    levels: &LevelSpec<T>,
    drive: &DriveSpec<T>,
) -> Result<RotatingHamiltonian<T>, ModelError> {
    check_dims(levels, drive)?;
    check_mode(drive, true)?;
    Ok(RotatingHamiltonian {
        offsets: resonance_offsets(levels, drive),
        g: drive.g(),
        detunings: drive.detunings(),
    })
}

/// Resonant adjacent frequencies `ω_j = E_j − E_{j−1}`, `j = 1 … n−1`.
pub fn apply_resonance<T: Real>(levels: &LevelSpec<T>) -> Vec<T> {
    (1..levels.n()).map(|j| levels.gap(j)).collect()
}

/// Fails unless every rotating-frame diagonal entry is within `tol` of zero.
pub fn check_resonance<T: Real>(levels: &LevelSpec<T>, drive: &DriveSpec<T>, tol: T) -> Result<(), ModelError> {
    check_dims(levels, drive)?;
    for (k, off) in resonance_offsets(levels, drive).into_iter().enumerate() {
        if off.abs() > tol {
            return Err(ModelError::NotResonant { level: k, offset: f64_of(off) });
        }
    }
    Ok(())
}

/// Tridiagonal 0/1 nearest-neighbour coupling matrix `C`.
pub fn coupling_matrix(n: usize) -> Array2<i64> {
    Array2::from_shape_fn((n, n), |(i, j)| i64::from(i.abs_diff(j) == 1))
}

/// The non-tridiagonal part `R(t)`: `e^{±iε_{ij}t}` for `|i − j| ≥ 2`.
#[derive(Debug, Clone)]
pub struct Remainder<T> {
    detunings: Detunings<T>,
}

impl<T: Real> Remainder<T> {
    pub fn new(detunings: Detunings<T>) -> Self {
        Self { detunings }
    }

    pub fn detunings(&self) -> &Detunings<T> {
        &self.detunings
    }
}

impl<T: Real> HamiltonianFn<T> for Remainder<T> {
    fn dim(&self) -> usize {
        self.detunings.n()
    }
    fn at(&self, t: T) -> CMatrix<T> {
        let n = self.detunings.n();
        let mut r = CMatrix::zeros((n, n));
        for ((i, j), e) in self.detunings.iter() {
            let z = cis(e * t);
            r[[i, j]] = z;
            r[[j, i]] = z.conj();
        }
        r
    }
}

/// `H̃_U = g C + g R(t)` on resonance. Fails if the adjacent frequencies are
/// off resonance by more than [`DriveSpec::default_tolerance`].
pub fn split_c_r<T: Real>(
    levels: &LevelSpec<T>,
    drive: &DriveSpec<T>,
) -> Result<(Array2<i64>, Remainder<T>), ModelError> {
    check_resonance(levels, drive, drive.default_tolerance())?;
    Ok((coupling_matrix(levels.n()), Remainder::new(drive.detunings())))
}
