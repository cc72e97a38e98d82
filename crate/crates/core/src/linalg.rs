//! Small dense complex linear algebra on `ndarray` matrices.

use ndarray::{Array1, Array2};
use num_complex::Complex;
use num_traits::{One, Zero};

use crate::scalar::Real;

/// Dense complex matrix.
pub type CMatrix<T> = Array2<Complex<T>>;

pub fn identity<T: Real>(n: usize) -> CMatrix<T> {
    Array2::from_diag_elem(n, Complex::one())
}

/// Complex matrix with the given diagonal.
pub fn diag<T: Real>(d: &[Complex<T>]) -> CMatrix<T> {
    Array2::from_diag(&Array1::from(d.to_vec()))
}

pub fn to_complex<T: Real>(m: &Array2<T>) -> CMatrix<T> {
    m.mapv(|x| Complex::new(x, T::zero()))
}

/// Conjugate transpose.
pub fn adjoint<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    m.t().mapv(|z| z.conj())
}

/// `max_{ij} |a_ij − b_ij|`.
pub fn max_abs_diff<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> T {
    assert_eq!(a.dim(), b.dim(), "shape mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (*x - *y).norm())
        .fold(T::zero(), T::max)
}

/// Real-matrix variant of [`max_abs_diff`].
pub fn max_abs_diff_real<T: Real>(a: &Array2<T>, b: &Array2<T>) -> T {
    assert_eq!(a.dim(), b.dim(), "shape mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (*x - *y).abs())
        .fold(T::zero(), T::max)
}

/// `‖H − H†‖_max`.
pub fn hermiticity_defect<T: Real>(h: &CMatrix<T>) -> T {
    max_abs_diff(h, &adjoint(h))
}

/// `‖M M† − 1‖_max`.
pub fn unitarity_defect<T: Real>(m: &CMatrix<T>) -> T {
    max_abs_diff(&m.dot(&adjoint(m)), &identity(m.nrows()))
}

/// Induced 1-norm (max column sum).
pub fn norm_1<T: Real>(m: &CMatrix<T>) -> T {
    m.columns()
        .into_iter()
        .map(|c| c.iter().fold(T::zero(), |s, z| s + z.norm()))
        .fold(T::zero(), T::max)
}

/// Euclidean norm of a complex vector.
pub fn vec_norm<T: Real>(v: &Array1<Complex<T>>) -> T {
    v.iter().fold(T::zero(), |s, z| s + z.norm_sqr()).sqrt()
}

/// `max_k |a_k − b_k|`.
pub fn vec_max_abs_diff<T: Real>(a: &Array1<Complex<T>>, b: &Array1<Complex<T>>) -> T {
    assert_eq!(a.len(), b.len(), "length mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (*x - *y).norm())
        .fold(T::zero(), T::max)
}

/// Determinant by LU factorisation with partial pivoting.
pub fn determinant<T: Real>(m: &CMatrix<T>) -> Complex<T> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "determinant of a non-square matrix");
    let mut a = m.clone();
    let mut det = Complex::<T>::one();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| {
                a[[i, col]]
                    .norm()
                    .partial_cmp(&a[[j, col]].norm())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(col);
        if a[[pivot_row, col]].is_zero() {
            return Complex::zero();
        }
        if pivot_row != col {
            for k in 0..n {
                a.swap([col, k], [pivot_row, k]);
            }
            det = -det;
        }
        let pivot = a[[col, col]];
        det = det * pivot;
        for row in col + 1..n {
            let factor = a[[row, col]] / pivot;
            for k in col..n {
                let upper = a[[col, k]];
                a[[row, k]] = a[[row, k]] - factor * upper;
            }
        }
    }
    det
}

/// `s · v` elementwise; ndarray's scalar operators need a concrete scalar type.
pub fn scale<T: Real>(v: &Array1<Complex<T>>, s: Complex<T>) -> Array1<Complex<T>> {
    v.mapv(|z| z * s)
}
