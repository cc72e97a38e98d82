//! Closed-form spectral theory of the nearest-neighbour coupling matrix `C`.
//!
//! `C` (zeros on the diagonal, ones on the first off-diagonals) has
//! eigenvalues `λ_j = 2cos(πj/(n+1))` for `j = 1 … n` and the orthogonal sine
//! eigenbasis `O_{jk} = √(2/(n+1)) sin(πjk/(n+1))`, so
//! `exp(−igtC) = O exp(−igtD) Oᵀ` needs no numerical diagonalisation.
//!
//! Eigenvalues are kept in the index order `j = 1 … n`, i.e. decreasing.

use ndarray::Array2;
use num_complex::Complex;

use crate::linalg::CMatrix;
use crate::scalar::{cis, from_usize, im, lit, Real};

/// Characteristic polynomial `f_n(λ) = det(λ1ₙ − C)` via the three-term
/// recurrence `f_n = λ f_{n−1} − f_{n−2}` with `f₀ = 1`, `f₁ = λ`.
pub fn char_poly<T: Real>(n: usize, lambda: T) -> T {
    let (mut prev, mut cur) = (T::one(), lambda);
    for _ in 1..n {
        let next = lambda * cur - prev;
        prev = cur;
        cur = next;
    }
    if n == 0 {
        T::one()
    } else {
        cur
    }
}

/// `sin(π m/(n+1))` with the integer `m` reduced mod `2(n+1)` first.
fn sin_pi_frac<T: Real>(m: usize, n: usize) -> T {
    let period = 2 * (n + 1);
    let r = m % period;
    (T::PI() * from_usize::<T>(r) / from_usize::<T>(n + 1)).sin()
}

fn cos_pi_frac<T: Real>(m: usize, n: usize) -> T {
    let period = 2 * (n + 1);
    let r = m % period;
    (T::PI() * from_usize::<T>(r) / from_usize::<T>(n + 1)).cos()
}

/// Eigenvalues and orthogonal eigenbasis of `C`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomp<T> {
    n: usize,
    eigenvalues: Vec<T>,
    basis: Array2<T>,
}

impl<T: Real> SpectralDecomp<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `λ_j`, `j = 1 … n` stored at index `j − 1`.
    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    /// Orthogonal `O`; column `j − 1` is the eigenvector `|j⟩`.
    pub fn basis(&self) -> &Array2<T> {
        &self.basis
    }

    /// `O exp(−igtD) Oᵀ`.
    pub fn propagator(&self, g: T, t: T) -> CMatrix<T> {
        let n = self.n;
        let phases: Vec<Complex<T>> = self.eigenvalues.iter().map(|&l| cis(-g * t * l)).collect();
        let o = &self.basis;
        Array2::from_shape_fn((n, n), |(j, k)| {
            (0..n).fold(Complex::new(T::zero(), T::zero()), |acc, l| {
                acc + phases[l] * (o[[j, l]] * o[[k, l]])
            })
        })
    }
}

/// Closed-form decomposition of the `n × n` coupling matrix.
///
/// # Panics
/// If `n < 2`.
pub fn decompose<T: Real>(n: usize) -> SpectralDecomp<T> {
    assert!(n >= 2, "coupling matrix needs n >= 2, got {n}");
    let eigenvalues = (1..=n).map(|j| lit::<T>(2.0) * cos_pi_frac::<T>(j, n)).collect();
    let scale = (lit::<T>(2.0) / from_usize::<T>(n + 1)).sqrt();
    let basis = Array2::from_shape_fn((n, n), |(j, k)| scale * sin_pi_frac::<T>((j + 1) * (k + 1), n));
    SpectralDecomp { n, eigenvalues, basis }
}

/// `exp(−igtC)` through the eigenbasis.
pub fn exp_c<T: Real>(n: usize, g: T, t: T) -> CMatrix<T> {
    decompose::<T>(n).propagator(g, t)
}

/// `exp(−igtC)` through the component sum
/// `(2/(n+1)) Σ_l e^{−2igt cos(πl/(n+1))} sin(πjl/(n+1)) sin(πkl/(n+1))`.
pub fn exp_c_by_components<T: Real>(n: usize, g: T, t: T) -> CMatrix<T> {
    assert!(n >= 2, "coupling matrix needs n >= 2, got {n}");
    let two = lit::<T>(2.0);
    let pref = two / from_usize::<T>(n + 1);
    Array2::from_shape_fn((n, n), |(j, k)| {
        let sum = (1..=n).fold(Complex::new(T::zero(), T::zero()), |acc, l| {
            let phase = cis(-two * g * t * cos_pi_frac::<T>(l, n));
            acc + phase * (sin_pi_frac::<T>((j + 1) * l, n) * sin_pi_frac::<T>((k + 1) * l, n))
        });
        sum * pref
    })
}

/// Explicit three-level propagator
/// `½[[1+c, −i√2 s, −1+c], [−i√2 s, 2c, −i√2 s], [−1+c, −i√2 s, 1+c]]`
/// with `c = cos(√2gt)`, `s = sin(√2gt)`.
pub fn exp_c3<T: Real>(g: T, t: T) -> CMatrix<T> {
    let sqrt2 = T::SQRT_2();
    let half = lit::<T>(0.5);
    let (s, c) = (sqrt2 * g * t).sin_cos();
    let r = |x: T| Complex::new(x * half, T::zero());
    let off = im(-sqrt2 * s * half);
    let one = T::one();
    ndarray::array![
        [r(one + c), off, r(-one + c)],
        [off, r(lit::<T>(2.0) * c), off],
        [r(-one + c), off, r(one + c)]
    ]
}
