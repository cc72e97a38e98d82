//! Dynamics of an n-level atom driven by n(n−1)/2 external fields under the
//! rotating wave approximation.
//!
//! The crate builds every Hamiltonian and frame change of the model
//! ([`model`]), the closed-form spectral theory of the nearest-neighbour
//! coupling matrix ([`spectral`]), the exact solution on the consistency
//! manifold ([`exact`]), interaction-picture Dyson truncations including the
//! closed-form three-level first-order state ([`dyson`]), and an independent
//! Runge–Kutta integrator used as the numerical oracle ([`propagate`]).
//!
//! All math is generic over the real scalar ([`Real`], implemented for `f32`
//! and `f64`). The `*64` aliases below fix the scalar to `f64`, which is what
//! the stated tolerances assume.

pub mod dyson;
pub mod exact;
pub mod io;
pub mod linalg;
pub mod model;
pub mod propagate;
pub mod scalar;
pub mod spectral;

pub use num_complex::Complex;
pub use scalar::Real;

pub use dyson::{DysonConfig, DysonError};
pub use exact::{ConsistencyReport, ExactError};
pub use linalg::CMatrix;
pub use model::{Detunings, DriveSpec, HamiltonianFn, LevelSpec, ModelError, StateVector};
pub use propagate::{DeviationReport, IntegratorConfig, PropagateError, StepControl, Trajectory};
pub use spectral::SpectralDecomp;

/// Double-precision complex scalar.
pub type C64 = Complex<f64>;
/// Dense complex matrix over `f64`.
pub type CMatrix64 = CMatrix<f64>;
pub type LevelSpec64 = LevelSpec<f64>;
pub type DriveSpec64 = DriveSpec<f64>;
pub type Detunings64 = Detunings<f64>;
pub type StateVector64 = StateVector<f64>;
pub type SpectralDecomp64 = SpectralDecomp<f64>;
pub type Trajectory64 = Trajectory<f64>;
pub type IntegratorConfig64 = IntegratorConfig<f64>;
pub type DysonConfig64 = DysonConfig<f64>;
pub type ConsistencyReport64 = ConsistencyReport<f64>;
