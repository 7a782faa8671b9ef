//! Forward and inverse spectral solver for the quadratic Sturm–Liouville pencil
//!
//! ```text
//! -y'' + [2λ p(x) + q(x)] y = λ² δ(x) y,      x ∈ [0, π] \ {p₁, p₂}
//! y'(0) = 0,  y(π) = 0
//! y(pᵢ+0)  = αᵢ y(pᵢ-0)
//! y'(pᵢ+0) = αᵢ⁻¹ y'(pᵢ-0) + iλγᵢ y(pᵢ-0)
//! ```
//!
//! with a three-level piecewise-constant density `δ = 1, α², β²`.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: problem data, validation and the positivity screen.
//! * [`propagator`]: adaptive Dormand–Prince shooting for φ, ψ and S.
//! * [`oracle`]: closed-form transfer matrices for `p ≡ 0` with piecewise-constant `q`.
//! * [`spectral`]: characteristic function, its leading-order model, eigenvalues,
//!   normalizing numbers and asymptotics.
//! * [`weyl`]: Weyl function and Weyl solution.
//! * [`inverse`]: finite-dimensional parameter recovery from Weyl samples.
//! * [`formats`]: JSON/CSV readers and writers shared with the CLI.

pub mod error;
pub mod fixtures;
pub mod formats;
pub mod inverse;
pub mod model;
pub mod optim;
pub mod oracle;
pub mod propagator;
pub mod quadrature;
pub mod roots;
pub mod spectral;
pub mod weyl;

pub use error::{PencilError, Result};
pub use model::{
    CoefficientFunction, DensityProfile, JumpParameters, PencilProblem, ValidationReport,
    Violation,
};
pub use num_complex::Complex64;
pub use propagator::{MeshHint, Shooter, ShootingState, SolutionTrace, StepControl};
