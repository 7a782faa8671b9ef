//! Recovery of a few operator parameters from Weyl-function samples.
//!
//! A [`ParameterFamily`] names which scalars of a base problem vary and
//! within which bounds. [`fit`] minimises `Σ|M_model(λⱼ) − M_target(λⱼ)|²`
//! with bounded Nelder–Mead from several seeded starting points.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{PencilError, Result};
use crate::model::{CoefficientFunction, PencilProblem};
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::propagator::{Shooter, StepControl};
use crate::weyl::{weyl_from_shooter, WeylSample};

/// Margin kept between bounds and the excluded values `0` (for `αᵢ`) and
/// `1` (for `α`, `β`).
pub const BOUND_MARGIN: f64 = 0.05;
/// Maximum `|M_a − M_b|` at or below which two problems count as
/// indistinguishable.
pub const SEPARABILITY_THRESHOLD: f64 = 1e-6;
/// Offset applied to a grid point that lands on a pole of the model.
pub const POLE_RETRY_OFFSET: f64 = 1e-9;

pub const PARAMETER_NAMES: &[&str] = &[
    "q_const",
    "q_const_region1",
    "q_const_region2",
    "q_const_region3",
    "p_const",
    "p_const_region1",
    "p_const_region2",
    "p_const_region3",
    "alpha1",
    "gamma1",
    "alpha2",
    "gamma2",
    "alpha",
    "beta",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ParameterFamily {
    names: Vec<String>,
    bounds: Vec<(f64, f64)>,
    base: PencilProblem,
}

fn region_index(name: &str) -> Option<usize> {
    name.strip_suffix(|c: char| c.is_ascii_digit())
        .filter(|rest| rest.ends_with("_region"))
        .and_then(|_| name.chars().last())
        .and_then(|c| c.to_digit(10))
        .map(|d| d as usize - 1)
}

impl ParameterFamily {
    pub fn new(names: Vec<String>, bounds: Vec<(f64, f64)>, base: PencilProblem) -> Result<Self> {
        if names.is_empty() {
            return Err(PencilError::Precondition("family has no parameters".into()));
        }
        if names.len() != bounds.len() {
            return Err(PencilError::Precondition(format!(
                "{} names but {} bounds",
                names.len(),
                bounds.len()
            )));
        }
        for (i, name) in names.iter().enumerate() {
            if !PARAMETER_NAMES.contains(&name.as_str()) {
                return Err(PencilError::Precondition(format!("unknown parameter `{name}`")));
            }
            if names[..i].contains(name) {
                return Err(PencilError::Precondition(format!("parameter `{name}` listed twice")));
            }
        }
        for whole in ["q_const", "p_const"] {
            let regional = format!("{whole}_region");
            if names.iter().any(|n| n == whole) && names.iter().any(|n| n.starts_with(&regional)) {
                return Err(PencilError::Precondition(format!(
                    "{whole} cannot be combined with {regional}N"
                )));
            }
        }
        let d = &base.density;
        if names.iter().any(|n| n.starts_with("q_const_region")) && base.q.region_constants(d.p1, d.p2).is_none() {
            return Err(PencilError::Precondition(
                "per-region q needs a base q that is constant on each density region".into(),
            ));
        }
        if names.iter().any(|n| n.starts_with("p_const_region")) && base.p.region_constants(d.p1, d.p2).is_none() {
            return Err(PencilError::Precondition(
                "per-region p needs a base p that is constant on each density region".into(),
            ));
        }
        for (name, &(lo, hi)) in names.iter().zip(&bounds) {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(PencilError::Precondition(format!("bounds for `{name}` must satisfy lo < hi")));
            }
            let excludes = |v: f64| v < lo - BOUND_MARGIN || v > hi + BOUND_MARGIN;
            match name.as_str() {
                "alpha1" | "alpha2" if !excludes(0.0) => {
                    return Err(PencilError::Precondition(format!(
                        "bounds for `{name}` must stay {BOUND_MARGIN} away from 0"
                    )))
                }
                "alpha" | "beta" if lo < BOUND_MARGIN || !excludes(1.0) => {
                    return Err(PencilError::Precondition(format!(
                        "bounds for `{name}` must be positive and stay {BOUND_MARGIN} away from 1"
                    )))
                }
                _ => {}
            }
        }
        base.ensure_valid()?;
        Ok(Self { names, bounds, base })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn base(&self) -> &PencilProblem {
        &self.base
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// The base problem with `params` substituted.
    pub fn apply(&self, params: &[f64]) -> Result<PencilProblem> {
        if params.len() != self.names.len() {
            return Err(PencilError::Precondition(format!(
                "expected {} parameters, got {}",
                self.names.len(),
                params.len()
            )));
        }
        let mut p = self.base.clone();
        let (p1, p2) = (p.density.p1, p.density.p2);
        let mut q_regions = p.q.region_constants(p1, p2);
        let mut p_regions = p.p.region_constants(p1, p2);
        for (name, &v) in self.names.iter().zip(params) {
            match name.as_str() {
                "q_const" => p.q = CoefficientFunction::constant(v),
                "p_const" => p.p = CoefficientFunction::constant(v),
                "alpha1" => p.jumps.alpha1 = v,
                "gamma1" => p.jumps.gamma1 = v,
                "alpha2" => p.jumps.alpha2 = v,
                "gamma2" => p.jumps.gamma2 = v,
                "alpha" => p.density.alpha = v,
                "beta" => p.density.beta = v,
                other => {
                    let r = region_index(other).expect("names are checked at construction");
                    if other.starts_with('q') {
                        q_regions.as_mut().expect("checked at construction")[r] = v;
                    } else {
                        p_regions.as_mut().expect("checked at construction")[r] = v;
                    }
                }
            }
        }
        if self.names.iter().any(|n| n.starts_with("q_const_region")) {
            p.q = CoefficientFunction::piecewise_constant(vec![p1, p2], q_regions.unwrap().to_vec());
        }
        if self.names.iter().any(|n| n.starts_with("p_const_region")) {
            p.p = CoefficientFunction::piecewise_constant(vec![p1, p2], p_regions.unwrap().to_vec());
        }
        p.ensure_valid()?;
        Ok(p)
    }
}

/// M at `lambda`, retried once at `lambda + 1e-9(1+i)` if it sits on a pole.
fn weyl_with_retry(sh: &Shooter<'_>, lambda: Complex64) -> Result<Complex64> {
    match weyl_from_shooter(sh, lambda) {
        Err(PencilError::AtPole { .. }) => {
            let moved = lambda + Complex64::new(POLE_RETRY_OFFSET, POLE_RETRY_OFFSET);
            match weyl_from_shooter(sh, moved) {
                Err(PencilError::AtPole { .. }) => Err(PencilError::PoleCollision { lambda }),
                other => other,
            }
        }
        other => other,
    }
}

/// `M_model(λⱼ) − M_target(λⱼ)` for every sample.
pub fn residuals(
    family: &ParameterFamily,
    params: &[f64],
    targets: &[WeylSample],
    control: &StepControl,
) -> Result<Vec<Complex64>> {
    if targets.is_empty() {
        return Err(PencilError::EmptyGrid);
    }
    let problem = family.apply(params)?;
    let sh = Shooter::with_control(&problem, *control)?;
    targets
        .par_iter()
        .map(|t| Ok(weyl_with_retry(&sh, t.lambda)? - t.m))
        .collect()
}

/// `Σ|M_model(λⱼ) − M_target(λⱼ)|²`.
pub fn misfit(family: &ParameterFamily, params: &[f64], targets: &[WeylSample], control: &StepControl) -> Result<f64> {
    Ok(residuals(family, params, targets, control)?
        .iter()
        .map(|r| r.norm_sqr())
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub seed: u64,
    pub restarts: usize,
    pub nelder_mead: NelderMeadOptions,
    pub control: StepControl,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            restarts: 8,
            nelder_mead: NelderMeadOptions::default(),
            control: StepControl::with_tolerance(1e-11),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    /// Recovered values in family order.
    pub params: Vec<(String, f64)>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub residuals: Vec<Complex64>,
    /// Restart that produced this result.
    pub restart: usize,
}

impl FitResult {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|(n, _)| n == name).map(|&(_, v)| v)
    }
}

/// Best of `restarts` bounded Nelder–Mead runs from uniformly drawn starts.
/// Ties in the objective go to the lower restart index.
pub fn fit(family: &ParameterFamily, targets: &[WeylSample], opts: &FitOptions) -> Result<FitResult> {
    let k = family.len();
    if targets.len() < 2 * k {
        return Err(PencilError::Precondition(format!(
            "need at least {} samples for {} parameters, got {}",
            2 * k,
            k,
            targets.len()
        )));
    }
    if opts.restarts == 0 {
        return Err(PencilError::Precondition("at least one restart is needed".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let starts: Vec<Vec<f64>> = (0..opts.restarts)
        .map(|_| family.bounds.iter().map(|&(lo, hi)| rng.random_range(lo..=hi)).collect())
        .collect();
    let runs = starts
        .par_iter()
        .enumerate()
        .map(|(i, x0)| {
            let f = |x: &[f64]| misfit(family, x, targets, &opts.control);
            nelder_mead(f, x0, &family.bounds, &opts.nelder_mead).map(|r| (i, r))
        })
        .collect::<Result<Vec<_>>>()?;
    let (restart, best) = runs
        .into_iter()
        .min_by(|(ia, a), (ib, b)| a.value.total_cmp(&b.value).then(ia.cmp(ib)))
        .expect("at least one restart");
    let result = FitResult {
        params: family.names.iter().cloned().zip(best.x.iter().copied()).collect(),
        objective: best.value,
        iterations: best.iterations,
        converged: best.converged,
        residuals: residuals(family, &best.x, targets, &opts.control)?,
        restart,
    };
    if result.converged {
        Ok(result)
    } else {
        Err(PencilError::NoConvergence { best: Box::new(result) })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distinguishability {
    pub max_gap: f64,
    pub separable: bool,
}

/// `max |M_a − M_b|` over `grid`.
pub fn distinguishability(
    a: &PencilProblem,
    b: &PencilProblem,
    grid: &[Complex64],
    control: &StepControl,
) -> Result<Distinguishability> {
    if grid.is_empty() {
        return Err(PencilError::EmptyGrid);
    }
    let sa = Shooter::with_control(a, *control)?;
    let sb = Shooter::with_control(b, *control)?;
    let gaps = grid
        .par_iter()
        .map(|&l| Ok((weyl_with_retry(&sa, l)? - weyl_with_retry(&sb, l)?).norm()))
        .collect::<Result<Vec<f64>>>()?;
    let max_gap = gaps.into_iter().fold(0.0, f64::max);
    Ok(Distinguishability {
        max_gap,
        separable: max_gap > SEPARABILITY_THRESHOLD,
    })
}
