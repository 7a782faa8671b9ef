use num_complex::Complex64;
use thiserror::Error;

use crate::inverse::FitResult;
use crate::model::ValidationReport;

pub type Result<T, E = PencilError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum PencilError {
    #[error("invalid problem: {0}")]
    InvalidProblem(ValidationReport),

    #[error("density undefined at jump point x = {x}")]
    DensityAtJump { x: f64 },

    #[error("solution overflow at x = {x} (lambda = {lambda})")]
    SolutionOverflow { x: f64, lambda: Complex64 },

    #[error("stiffness failure: step size {step:e} underflowed at x = {x}")]
    StiffnessFailure { x: f64, step: f64 },

    #[error("cluster unresolved: roots near {lambda} closer than {separation:e}")]
    ClusterUnresolved { lambda: Complex64, separation: f64 },

    #[error("root refinement did not converge near lambda = {lambda}")]
    RootNotConverged { lambda: Complex64 },

    #[error("at pole: lambda = {lambda} is within the degeneracy floor; nearest eigenvalue estimate {nearest}")]
    AtPole { lambda: Complex64, nearest: Complex64 },

    #[error("empty grid after exclusion")]
    EmptyGrid,

    #[error("pole collision at lambda = {lambda}")]
    PoleCollision { lambda: Complex64 },

    #[error("no convergence after {} iterations (best objective {:e})", best.iterations, best.objective)]
    NoConvergence { best: Box<FitResult> },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl PencilError {
    /// Whether the failure came from the numerics rather than from the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            PencilError::SolutionOverflow { .. }
                | PencilError::StiffnessFailure { .. }
                | PencilError::ClusterUnresolved { .. }
                | PencilError::RootNotConverged { .. }
                | PencilError::AtPole { .. }
                | PencilError::PoleCollision { .. }
                | PencilError::NoConvergence { .. }
                | PencilError::EmptyGrid
        )
    }
}
