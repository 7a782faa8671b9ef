//! Weyl function `M(λ) = −ψ(0,λ)/Δ(λ)` and Weyl solution `Φ = −ψ/Δ`.
//!
//! Since `φ(0) = 1`, `φ'(0) = 0`, the Wronskian at `x = 0` gives
//! `Δ = −ψ'(0)`, so both need only the backward solve for ψ.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{PencilError, Result};
use crate::model::PencilProblem;
use crate::propagator::{MeshHint, Shooter, ShootingState, SolutionTrace, StepControl};

pub const DEFAULT_EXCLUSION_RADIUS: f64 = 0.05;
/// `|Δ|` below this fraction of `|ψ(0)| + |ψ'(0)|` counts as a pole.
pub const DEGENERACY_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeylSample {
    pub lambda: Complex64,
    pub m: Complex64,
    /// Distance to the nearest listed eigenvalue (infinite when none given).
    pub pole_distance: f64,
}

fn psi_at_zero(sh: &Shooter<'_>, lambda: Complex64) -> Result<ShootingState> {
    sh.backward_to(lambda, ShootingState::new(std::f64::consts::PI, 0.0, 1.0), 0.0)
}

fn pole_error(sh: &Shooter<'_>, lambda: Complex64, delta: Complex64) -> PencilError {
    // One Newton step on Δ = −ψ'(0) gives the nearby eigenvalue.
    let h = 1e-6 * lambda.norm().max(1.0);
    let nearest = match (psi_at_zero(sh, lambda + h), psi_at_zero(sh, lambda - h)) {
        (Ok(a), Ok(b)) => {
            let slope = -(a.yprime - b.yprime) / (2.0 * h);
            if slope.norm() > 0.0 {
                lambda - delta / slope
            } else {
                lambda
            }
        }
        _ => lambda,
    };
    PencilError::AtPole { lambda, nearest }
}

fn checked_delta(sh: &Shooter<'_>, lambda: Complex64, psi0: &ShootingState) -> Result<Complex64> {
    let delta = -psi0.yprime;
    let scale = psi0.y.norm() + psi0.yprime.norm();
    // NaN counts as degenerate
    if delta.norm().is_nan() || delta.norm() <= DEGENERACY_FLOOR * scale {
        return Err(pole_error(sh, lambda, delta));
    }
    Ok(delta)
}

pub fn weyl_function(problem: &PencilProblem, lambda: Complex64) -> Result<Complex64> {
    weyl_function_with(problem, lambda, &StepControl::default())
}

pub fn weyl_function_with(problem: &PencilProblem, lambda: Complex64, control: &StepControl) -> Result<Complex64> {
    let sh = Shooter::with_control(problem, *control)?;
    weyl_from_shooter(&sh, lambda)
}

pub(crate) fn weyl_from_shooter(sh: &Shooter<'_>, lambda: Complex64) -> Result<Complex64> {
    let psi0 = psi_at_zero(sh, lambda)?;
    let delta = checked_delta(sh, lambda, &psi0)?;
    Ok(-psi0.y / delta)
}

/// Trace of `Φ(x, λ) = −ψ(x, λ)/Δ(λ)`.
pub fn weyl_solution(problem: &PencilProblem, lambda: Complex64, mesh: &MeshHint) -> Result<SolutionTrace> {
    weyl_solution_with(problem, lambda, mesh, &StepControl::default())
}

pub fn weyl_solution_with(
    problem: &PencilProblem,
    lambda: Complex64,
    mesh: &MeshHint,
    control: &StepControl,
) -> Result<SolutionTrace> {
    let sh = Shooter::with_control(problem, *control)?;
    let psi = sh.solve_psi(lambda, mesh)?;
    let delta = checked_delta(&sh, lambda, psi.first())?;
    Ok(psi.scaled(-1.0 / delta))
}

/// Evaluates M on every grid point farther than `radius` from all
/// `eigenvalues`.
pub fn sample_weyl_grid(
    problem: &PencilProblem,
    grid: &[Complex64],
    eigenvalues: &[Complex64],
    radius: f64,
    control: &StepControl,
) -> Result<Vec<WeylSample>> {
    let kept: Vec<(Complex64, f64)> = grid
        .iter()
        .map(|&l| {
            let d = eigenvalues
                .iter()
                .map(|&e| (l - e).norm())
                .fold(f64::INFINITY, f64::min);
            (l, d)
        })
        .filter(|&(_, d)| d > radius)
        .collect();
    if kept.is_empty() {
        return Err(PencilError::EmptyGrid);
    }
    let sh = Shooter::with_control(problem, *control)?;
    kept.par_iter()
        .map(|&(lambda, pole_distance)| {
            Ok(WeylSample {
                lambda,
                m: weyl_from_shooter(&sh, lambda)?,
                pole_distance,
            })
        })
        .collect()
}

/// `n` points on `[re0, re1]` shifted by `i·im`.
pub fn line_grid(re0: f64, re1: f64, n: usize, im: f64) -> Vec<Complex64> {
    match n {
        0 => Vec::new(),
        1 => vec![Complex64::new(re0, im)],
        _ => (0..n)
            .map(|k| Complex64::new(re0 + (re1 - re0) * k as f64 / (n - 1) as f64, im))
            .collect(),
    }
}

/// 16 points on `Re λ ∈ [0.5, 8]` at `Im λ = 0.2`; clear of every real pole.
pub fn default_grid() -> Vec<Complex64> {
    line_grid(0.5, 8.0, 16, 0.2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::oracle;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn trivial_weyl_values() {
        let p = fixtures::trivial();
        assert!((weyl_function(&p, c(0.25)).unwrap() - c(-4.0)).norm() < 1e-8);
        assert!(weyl_function(&p, c(1.0)).unwrap().norm() < 1e-8);
    }

    #[test]
    fn pole_is_reported_with_estimate() {
        let p = fixtures::trivial();
        match weyl_function(&p, c(0.5)) {
            Err(PencilError::AtPole { nearest, .. }) => assert!((nearest - c(0.5)).norm() < 1e-6),
            other => panic!("expected pole, got {other:?}"),
        }
    }

    #[test]
    fn off_axis_value_matches_oracle() {
        let p = fixtures::jump_fixture();
        let lam = Complex64::new(1.7, 0.3);
        let o = oracle::oracle_weyl(&p.density, &p.jumps, lam, [0.0; 3]);
        assert!((weyl_function(&p, lam).unwrap() - o).norm() < 1e-8 * o.norm().max(1.0));
    }

    #[test]
    fn weyl_solution_endpoints() {
        let p = fixtures::trivial();
        let tr = weyl_solution(&p, c(0.25), &MeshHint::none()).unwrap();
        assert!((tr.first().y - c(-4.0)).norm() < 1e-8);
        assert!((tr.first().yprime - c(1.0)).norm() < 1e-9);
        assert!(tr.last().y.norm() < 1e-15);
        let _ = PI;
    }

    #[test]
    fn grid_exclusion() {
        let p = fixtures::trivial();
        let eig = [c(0.5), c(1.5)];
        let grid = [c(0.25), c(0.5), c(0.75)];
        let s = sample_weyl_grid(&p, &grid, &eig, DEFAULT_EXCLUSION_RADIUS, &StepControl::default()).unwrap();
        let kept: Vec<f64> = s.iter().map(|w| w.lambda.re).collect();
        assert_eq!(kept, [0.25, 0.75]);
        assert!((s[0].pole_distance - 0.25).abs() < 1e-15);

        let close = [c(0.49), c(0.51)];
        assert!(matches!(
            sample_weyl_grid(&p, &close, &eig, DEFAULT_EXCLUSION_RADIUS, &StepControl::default()),
            Err(PencilError::EmptyGrid)
        ));
    }

    #[test]
    fn line_grid_shape() {
        let g = line_grid(0.1, 8.0, 64, 0.2);
        assert_eq!(g.len(), 64);
        assert_eq!(g[0], Complex64::new(0.1, 0.2));
        assert!((g[63].re - 8.0).abs() < 1e-15);
        assert_eq!(default_grid().len(), 16);
    }
}
