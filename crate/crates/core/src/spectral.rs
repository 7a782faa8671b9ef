//! Characteristic function `Δ(λ) = W[ψ, φ]`, its leading-order model `Δ₀`,
//! eigenvalues with their normalizing data, and the identities tying them
//! together.
//!
//! When either `γᵢ ≠ 0` the jump term `iλγᵢ` breaks the symmetry that keeps
//! the spectrum on the real axis, and eigenvalues move off it by an amount
//! set by `γᵢ`. Records therefore carry complex values throughout, and the
//! normalizing number and orthogonality relation include the jump
//! contribution `iΣ αᵢγᵢ y(pᵢ−0)²`. With `γ = 0` those terms vanish.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{PencilError, Result};
use crate::model::{positivity_screen, JumpSite, PencilProblem, PositivityScreen};
use crate::propagator::{MeshHint, Shooter, ShootingState, StepControl};
use crate::quadrature::{CompositeRule, GaussLegendre};
use crate::roots::{brent, complex_secant};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralOptions {
    /// Integrator settings for Δ during scanning and refinement.
    pub control: StepControl,
    /// Tighter settings for Δ̇, βₙ and αₙ.
    pub derivative_control: StepControl,
    /// Scan spacing as a fraction of the mean eigenvalue gap `π/D`.
    pub grid_factor: f64,
    /// Roots are accepted when `|Δ| ≤ root_tol · max|Δ|` over the scan.
    pub root_tol: f64,
    /// Central-difference step for Δ̇, relative to `max(1, |λ|)`.
    pub fd_step: f64,
    pub quadrature_order: usize,
    pub positivity_trials: usize,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            control: StepControl::with_tolerance(1e-11),
            derivative_control: StepControl::with_tolerance(1e-12),
            grid_factor: 0.25,
            root_tol: 1e-10,
            fd_step: 1e-5,
            quadrature_order: 16,
            positivity_trials: 8,
        }
    }
}

impl SpectralOptions {
    pub fn with_tolerance(tol: f64) -> Self {
        Self {
            control: StepControl::with_tolerance(tol),
            derivative_control: StepControl::with_tolerance(tol * 0.1),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicSample {
    pub lambda: Complex64,
    pub delta: Complex64,
    pub delta0: Complex64,
}

/// `Δ(λ)` evaluated at `x* = p1/2`.
pub fn delta(problem: &PencilProblem, lambda: Complex64) -> Result<Complex64> {
    delta_with(problem, lambda, &SpectralOptions::default().control)
}

pub fn delta_with(problem: &PencilProblem, lambda: Complex64, control: &StepControl) -> Result<Complex64> {
    delta_at(problem, lambda, 0.5 * problem.density.p1, control)
}

/// `Δ(λ) = ψφ' − ψ'φ` at `x_star`, with φ shot forward and ψ backward.
pub fn delta_at(
    problem: &PencilProblem,
    lambda: Complex64,
    x_star: f64,
    control: &StepControl,
) -> Result<Complex64> {
    if x_star == problem.density.p1 || x_star == problem.density.p2 {
        return Err(PencilError::DensityAtJump { x: x_star });
    }
    if !(0.0..=PI).contains(&x_star) {
        return Err(PencilError::Precondition(format!("x* = {x_star} lies outside [0,π]")));
    }
    let sh = Shooter::with_control(problem, *control)?;
    wronskian_at(&sh, lambda, x_star)
}

fn wronskian_at(sh: &Shooter<'_>, lambda: Complex64, x_star: f64) -> Result<Complex64> {
    let phi = sh.forward_to(lambda, ShootingState::new(0.0, 1.0, 0.0), x_star)?;
    let psi = sh.backward_to(lambda, ShootingState::new(PI, 0.0, 1.0), x_star)?;
    Ok(psi.wronskian(&phi))
}

/// Δ and Δ₀ on a list of points.
pub fn det_scan(problem: &PencilProblem, lambdas: &[Complex64], control: &StepControl) -> Result<Vec<CharacteristicSample>> {
    let sh = Shooter::with_control(problem, *control)?;
    let x_star = 0.5 * problem.density.p1;
    lambdas
        .par_iter()
        .map(|&lambda| {
            Ok(CharacteristicSample {
                lambda,
                delta: wronskian_at(&sh, lambda, x_star)?,
                delta0: delta0(problem, lambda),
            })
        })
        .collect()
}

/// One term `R(x)·e^{iλ g(x)}` of the leading-order expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wave {
    pub amplitude: Complex64,
    pub phase: f64,
}

/// Leading-order waves at `x`. With `mirrored` the amplitudes are those of
/// the family with `γ → −γ`, `p → −p`, which multiplies `e^{−iλ g}` in the
/// symmetrised model.
///
/// On `(0,p1)` the single wave is `R₀ = e^{−i∫₀ˣp}` with phase `x`. On
/// `(p1,p2)` the jump at `p1` splits it into `R₁`, `R₂` with phases `ς±`,
/// and on `(p2,π)` each of those splits again into `R₃…R₆` with phases
/// `b±`, `s±`.
pub fn leading_waves(problem: &PencilProblem, x: f64, mirrored: bool) -> Vec<Wave> {
    let s = if mirrored { -1.0 } else { 1.0 };
    let d = &problem.density;
    let j = &problem.jumps;
    let (a, b, p1, p2) = (d.alpha, d.beta, d.p1, d.p2);
    let (g1, g2) = (s * j.gamma1, s * j.gamma2);
    let pint = |lo: f64, hi: f64| s * problem.p.integral(lo, hi);
    let expi = |t: f64| Complex64::new(0.0, t).exp();

    let beta1_plus = 0.5 * (j.alpha1 + j.beta1() / a);
    let beta1_minus = 0.5 * (j.alpha1 - j.beta1() / a);
    let beta2_plus = 0.5 * (j.alpha2 + a * j.beta2() / b);
    let beta2_minus = 0.5 * (j.alpha2 - a * j.beta2() / b);

    let varsigma_plus = |x: f64| a * x - a * p1 + p1;
    let varsigma_minus = |x: f64| -a * x + a * p1 + p1;

    let region = d.region_of(x);
    if region == 0 {
        return vec![Wave {
            amplitude: expi(-pint(0.0, x)),
            phase: x,
        }];
    }
    let r0_p1 = expi(-pint(0.0, p1));
    let r1 = |x: f64| (beta1_plus + g1 / (2.0 * a)) * r0_p1 * expi(-pint(p1, x) / a);
    let r2 = |x: f64| (beta1_minus - g1 / (2.0 * a)) * r0_p1 * expi(pint(p1, x) / a);
    if region == 1 {
        return vec![
            Wave {
                amplitude: r1(x),
                phase: varsigma_plus(x),
            },
            Wave {
                amplitude: r2(x),
                phase: varsigma_minus(x),
            },
        ];
    }
    let (r1_p2, r2_p2) = (r1(p2), r2(p2));
    let fwd = expi(-pint(p2, x) / b);
    let bwd = expi(pint(p2, x) / b);
    let b_plus = b * x - b * p2 + varsigma_plus(p2);
    let b_minus = b * x - b * p2 + varsigma_minus(p2);
    let s_plus = -b * x + b * p2 + varsigma_plus(p2);
    let s_minus = -b * x + b * p2 + varsigma_minus(p2);
    vec![
        Wave {
            amplitude: (beta2_plus + g2 / (2.0 * b)) * r1_p2 * fwd,
            phase: b_plus,
        },
        Wave {
            amplitude: (beta2_minus + g2 / (2.0 * b)) * r2_p2 * fwd,
            phase: b_minus,
        },
        Wave {
            amplitude: (beta2_minus - g2 / (2.0 * b)) * r1_p2 * bwd,
            phase: s_plus,
        },
        Wave {
            amplitude: (beta2_plus - g2 / (2.0 * b)) * r2_p2 * bwd,
            phase: s_minus,
        },
    ]
}

/// Leading-order model `y₀(x, λ)` of `φ(x, λ)`; exact when `p = q = 0`.
/// Jump points take the right limit.
pub fn leading_order_phi(problem: &PencilProblem, x: f64, lambda: Complex64) -> Complex64 {
    let fwd: Complex64 = leading_waves(problem, x, false)
        .iter()
        .map(|w| w.amplitude * (I * lambda * w.phase).exp())
        .sum();
    let bwd: Complex64 = leading_waves(problem, x, true)
        .iter()
        .map(|w| w.amplitude * (-I * lambda * w.phase).exp())
        .sum();
    0.5 * (fwd + bwd)
}

/// `Δ₀(λ) = −y₀(π, λ)`, the leading-order counterpart of `Δ = −φ(π)`.
pub fn delta0(problem: &PencilProblem, lambda: Complex64) -> Complex64 {
    -leading_order_phi(problem, PI, lambda)
}

/// One eigenvalue with its normalizing data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenRecord {
    pub n: usize,
    pub lambda_n: Complex64,
    /// `ψ(x, λₙ) = βₙ φ(x, λₙ)`.
    pub beta_n: Complex64,
    pub alpha_n: Complex64,
    /// Nearest zero of Δ₀; the main asymptotic term.
    pub lambda_n0: Complex64,
    /// `nπ/D`.
    pub optical_term: f64,
    /// `λₙ − λₙ⁰`.
    pub residual: Complex64,
    /// Δ̇(λₙ) by central difference.
    pub ddelta: Complex64,
    /// `|Δ(λₙ)|` at the accepted root.
    pub delta_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenSpectrum {
    pub records: Vec<EigenRecord>,
    pub screen: PositivityScreen,
    pub warnings: Vec<String>,
    /// `max |Δ|` over the scan grid; the scale for root acceptance.
    pub scale: f64,
}

impl EigenSpectrum {
    pub fn lambdas(&self) -> Vec<Complex64> {
        self.records.iter().map(|r| r.lambda_n).collect()
    }
}

struct Scan {
    grid: Vec<f64>,
    values: Vec<Complex64>,
    step: f64,
    scale: f64,
}

fn scan_real_axis(sh: &Shooter<'_>, lambda_max: f64, opts: &SpectralOptions) -> Result<Scan> {
    let d = sh.problem().density.optical_length();
    let target = opts.grid_factor * PI / d;
    // one extra cell so roots just below lambda_max are bracketed
    let cells = (lambda_max / target).ceil().max(1.0) as usize;
    let step = lambda_max / cells as f64;
    let grid: Vec<f64> = (0..=cells + 1).map(|k| k as f64 * step).collect();
    let x_star = 0.5 * sh.problem().density.p1;
    let values = grid
        .par_iter()
        .map(|&l| wronskian_at(sh, Complex64::new(l, 0.0), x_star))
        .collect::<Result<Vec<_>>>()?;
    let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    Ok(Scan {
        grid,
        values,
        step,
        scale,
    })
}

/// Zeros of Δ with `0 ≤ Re λ ≤ lambda_max`, sorted by real part.
///
/// With `γ = 0` the function is real on the real axis: sign changes of Δ on a
/// grid of spacing `grid_factor·π/D` are refined by Brent's method. Otherwise
/// each local minimum of `|Δ|` on the grid seeds a complex secant iteration.
pub fn find_eigenvalues(problem: &PencilProblem, lambda_max: f64, opts: &SpectralOptions) -> Result<EigenSpectrum> {
    if !(lambda_max > 0.0 && lambda_max.is_finite()) {
        return Err(PencilError::Precondition("lambda_max must be positive".into()));
    }
    let screen = positivity_screen(&problem.q, opts.positivity_trials)?;
    let mut warnings = Vec::new();
    if !screen.passed {
        warnings.push(format!(
            "positivity screen failed (min quotient {:.6e}); real eigenvalues are not guaranteed",
            screen.min_quotient
        ));
    }
    let sh = Shooter::with_control(problem, opts.control)?;
    let scan = scan_real_axis(&sh, lambda_max, opts)?;
    let roots = if problem.jumps.has_gamma() {
        complex_roots(&sh, &scan, opts, &mut warnings)?
    } else {
        real_roots(&sh, &scan, opts, &mut warnings)?
    };
    let mut roots: Vec<Complex64> = roots
        .into_iter()
        .filter(|r| r.re >= 0.0 && r.re <= lambda_max)
        .collect();
    roots.sort_by(|a, b| a.re.total_cmp(&b.re));
    for w in roots.windows(2) {
        let sep = (w[1] - w[0]).norm();
        if sep <= 1e-8 * w[0].norm().max(1.0) {
            return Err(PencilError::ClusterUnresolved {
                lambda: w[0],
                separation: sep,
            });
        }
    }
    let d = problem.density.optical_length();
    let records = roots
        .par_iter()
        .enumerate()
        .map(|(n, &lambda)| build_record(problem, n, lambda, d, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(EigenSpectrum {
        records,
        screen,
        warnings,
        scale: scan.scale,
    })
}

fn real_roots(sh: &Shooter<'_>, scan: &Scan, opts: &SpectralOptions, warnings: &mut Vec<String>) -> Result<Vec<Complex64>> {
    let x_star = 0.5 * sh.problem().density.p1;
    let f: Vec<f64> = scan.values.iter().map(|v| v.re).collect();
    let mut brackets = Vec::new();
    let mut roots = Vec::new();
    for k in 0..f.len() {
        if f[k] == 0.0 {
            roots.push(Complex64::new(scan.grid[k], 0.0));
        } else if k + 1 < f.len() && f[k] * f[k + 1] < 0.0 {
            brackets.push(k);
        }
    }
    for k in 1..f.len().saturating_sub(1) {
        let (l, m, r) = (f[k - 1].abs(), f[k].abs(), f[k + 1].abs());
        let crosses = f[k - 1] * f[k] <= 0.0 || f[k] * f[k + 1] <= 0.0;
        if m < l && m < r && !crosses && m < 0.1 * l.min(r) {
            warnings.push(format!(
                "|Δ| has a deep minimum without sign change near λ = {:.6}; possible complex pair or double root",
                scan.grid[k]
            ));
        }
    }
    let refined = brackets
        .par_iter()
        .map(|&k| {
            let (a, b) = (scan.grid[k], scan.grid[k + 1]);
            let g = |l: f64| Ok(wronskian_at(sh, Complex64::new(l, 0.0), x_star)?.re);
            let xtol = 1e-14 * b.max(1.0);
            match brent(g, a, b, f[k], f[k + 1], xtol, 200)? {
                Some(r) => Ok(Complex64::new(r, 0.0)),
                None => Err(PencilError::RootNotConverged {
                    lambda: Complex64::new(0.5 * (a + b), 0.0),
                }),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    roots.extend(refined);
    for &r in &roots {
        let v = wronskian_at(sh, r, x_star)?;
        if v.norm() > opts.root_tol * scan.scale {
            return Err(PencilError::RootNotConverged { lambda: r });
        }
    }
    Ok(roots)
}

fn complex_roots(sh: &Shooter<'_>, scan: &Scan, opts: &SpectralOptions, warnings: &mut Vec<String>) -> Result<Vec<Complex64>> {
    let x_star = 0.5 * sh.problem().density.p1;
    let mag: Vec<f64> = scan.values.iter().map(|v| v.norm()).collect();
    let n = mag.len();
    let seeds: Vec<f64> = (0..n)
        .filter(|&k| {
            let left = k == 0 || mag[k] < mag[k - 1];
            let right = k + 1 == n || mag[k] <= mag[k + 1];
            left && right
        })
        .map(|k| scan.grid[k])
        .collect();
    let gap = PI / sh.problem().density.optical_length();
    let ftol = 1e-3 * opts.root_tol * scan.scale;
    let refine = |seed: f64, deflate: &[Complex64]| -> Result<Option<Complex64>> {
        let g = |l: Complex64| {
            let mut v = wronskian_at(sh, l, x_star)?;
            for &r in deflate {
                v /= l - r;
            }
            Ok(v)
        };
        let z0 = Complex64::new(seed, 0.0);
        let z1 = Complex64::new(seed + 0.25 * scan.step, 1e-3 * scan.step);
        let found = complex_secant(g, z0, z1, ftol, 1e-14, 100)?;
        Ok(found
            .map(|c| c.root)
            .filter(|r| (r - z0).norm() <= 2.0 * gap))
    };
    let first = seeds
        .par_iter()
        .map(|&s| refine(s, &[]))
        .collect::<Result<Vec<_>>>()?;

    let same = |a: Complex64, b: Complex64| (a - b).norm() <= 1e-8 * a.norm().max(1.0);
    let mut roots: Vec<Complex64> = Vec::new();
    for (seed, found) in seeds.iter().zip(first) {
        let Some(r) = found else {
            warnings.push(format!("|Δ| minimum near λ = {seed:.6} did not lead to a root"));
            continue;
        };
        if let Some(&prev) = roots.iter().find(|&&p| same(p, r)) {
            // Two seeds reached the same zero; deflate it and look again.
            match refine(*seed, &[prev])? {
                Some(r2) if same(r2, prev) => {
                    return Err(PencilError::ClusterUnresolved {
                        lambda: prev,
                        separation: (r2 - prev).norm(),
                    })
                }
                Some(r2) if !roots.iter().any(|&p| same(p, r2)) => roots.push(r2),
                _ => warnings.push(format!("duplicate |Δ| minimum near λ = {seed:.6} discarded")),
            }
        } else {
            roots.push(r);
        }
    }
    for &r in &roots {
        let v = wronskian_at(sh, r, x_star)?;
        if v.norm() > opts.root_tol * scan.scale {
            return Err(PencilError::RootNotConverged { lambda: r });
        }
    }
    Ok(roots)
}

fn build_record(problem: &PencilProblem, n: usize, lambda: Complex64, d: f64, opts: &SpectralOptions) -> Result<EigenRecord> {
    let sh = Shooter::with_control(problem, opts.derivative_control)?;
    let x_star = 0.5 * problem.density.p1;
    let delta_residual = wronskian_at(&sh, lambda, x_star)?.norm();
    let h = opts.fd_step * lambda.norm().max(1.0);
    let ddelta = (wronskian_at(&sh, lambda + h, x_star)? - wronskian_at(&sh, lambda - h, x_star)?) / (2.0 * h);
    let beta_n = sh
        .backward_to(lambda, ShootingState::new(PI, 0.0, 1.0), 0.0)?
        .y;
    let samples = EigenfunctionSamples::new(&sh, lambda, lambda.norm(), opts.quadrature_order)?;
    let alpha_n = samples.normalizing_number(problem)?;
    let lambda_n0 = nearest_delta0_root(problem, lambda).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
    Ok(EigenRecord {
        n,
        lambda_n: lambda,
        beta_n,
        alpha_n,
        lambda_n0,
        optical_term: n as f64 * PI / d,
        residual: lambda - lambda_n0,
        ddelta,
        delta_residual,
    })
}

/// Zero of Δ₀ reached by a secant iteration seeded at `seed`.
pub fn nearest_delta0_root(problem: &PencilProblem, seed: Complex64) -> Option<Complex64> {
    let h = 1e-3 * seed.norm().max(1.0);
    let f = |l: Complex64| Ok(delta0(problem, l));
    complex_secant(f, seed, seed + h, 0.0, 1e-15, 200)
        .ok()
        .flatten()
        .map(|r| r.root)
}

/// φ(·, λ) at composite Gauss nodes, plus its left limits at the jumps.
struct EigenfunctionSamples {
    lambda: Complex64,
    points: Vec<f64>,
    weights: Vec<f64>,
    values: Vec<Complex64>,
    pre_jump: [Complex64; 2],
}

impl EigenfunctionSamples {
    /// `freq` sets the panel width so each panel spans about one wavelength.
    fn new(sh: &Shooter<'_>, lambda: Complex64, freq: f64, order: usize) -> Result<Self> {
        let problem = sh.problem();
        let d = &problem.density;
        let kmax = freq * d.alpha.max(d.beta).max(1.0);
        let panel = (4.0 / (1.0 + kmax)).min(0.25);
        let rule = CompositeRule::new(&GaussLegendre::new(order), &problem.smooth_breaks(), panel);
        let trace = sh.solve_phi(lambda, &MeshHint::points(rule.points.iter().copied()))?;
        let values: Vec<Complex64> = trace
            .nodes
            .iter()
            .filter(|n| n.state.x > 0.0 && n.state.x < PI && n.state.x != d.p1 && n.state.x != d.p2)
            .map(|n| n.state.y)
            .collect();
        if values.len() != rule.points.len() {
            return Err(PencilError::Precondition(format!(
                "quadrature mesh mismatch: {} nodes for {} points",
                values.len(),
                rule.points.len()
            )));
        }
        let pre = |site| trace.pre_jump(site).map(|s| s.y).unwrap_or_default();
        Ok(Self {
            lambda,
            points: rule.points,
            weights: rule.weights,
            values,
            pre_jump: [pre(JumpSite::First), pre(JumpSite::Second)],
        })
    }

    fn weighted(&self, problem: &PencilProblem, other: &Self) -> (Complex64, Complex64, f64, f64) {
        let d = &problem.density;
        let mut dens = Complex64::new(0.0, 0.0);
        let mut pot = Complex64::new(0.0, 0.0);
        let (mut na, mut nb) = (0.0, 0.0);
        for (i, (&x, &w)) in self.points.iter().zip(&self.weights).enumerate() {
            let eta = d.eta(d.region_of(x));
            let p = problem.p.value(x);
            let (a, b) = (self.values[i], other.values[i]);
            dens += w * eta * a * b;
            pot += w * p * a * b;
            na += w * eta * a.norm_sqr();
            nb += w * eta * b.norm_sqr();
        }
        (dens, pot, na.sqrt(), nb.sqrt())
    }

    /// `iΣ αᵢγᵢ u(pᵢ−0) v(pᵢ−0)`.
    fn jump_term(&self, problem: &PencilProblem, other: &Self) -> Complex64 {
        let j = &problem.jumps;
        I * (j.alpha1 * j.gamma1 * self.pre_jump[0] * other.pre_jump[0]
            + j.alpha2 * j.gamma2 * self.pre_jump[1] * other.pre_jump[1])
    }

    /// `αₙ = ∫δφ² − (1/λ)∫pφ² − (i/2λ)Σ αᵢγᵢ φ(pᵢ−0)²`.
    fn normalizing_number(&self, problem: &PencilProblem) -> Result<Complex64> {
        if self.lambda.norm() == 0.0 {
            return Err(PencilError::Precondition("normalizing number needs λ ≠ 0".into()));
        }
        let (dens, pot, _, _) = self.weighted(problem, self);
        Ok(dens - pot / self.lambda - self.jump_term(problem, self) / (2.0 * self.lambda))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma4Check {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub relative_error: f64,
}

/// Compares `Δ̇(λₙ)` with `−2λₙβₙαₙ`.
pub fn check_lemma4(record: &EigenRecord) -> Lemma4Check {
    let lhs = record.ddelta;
    let rhs = -2.0 * record.lambda_n * record.beta_n * record.alpha_n;
    let denom = lhs.norm().max(rhs.norm());
    Lemma4Check {
        lhs,
        rhs,
        relative_error: if denom > 0.0 { (lhs - rhs).norm() / denom } else { 0.0 },
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrthogonalityCheck {
    /// `(λₙ+λₖ)∫δ yₙyₖ − 2∫p yₙyₖ − iΣ αᵢγᵢ yₙ(pᵢ−0) yₖ(pᵢ−0)`.
    pub lhs: Complex64,
    /// `|lhs| / (|λₙ+λₖ|·‖yₙ‖·‖yₖ‖)` with δ-weighted norms.
    pub residual: f64,
}

/// Orthogonality of `φ(·,λₙ)` and `φ(·,λₖ)`. For `n = k` the left-hand side
/// is the diagonal value `2λₙαₙ`.
pub fn check_orthogonality(
    problem: &PencilProblem,
    rec_n: &EigenRecord,
    rec_k: &EigenRecord,
    opts: &SpectralOptions,
) -> Result<OrthogonalityCheck> {
    let sh = Shooter::with_control(problem, opts.derivative_control)?;
    let freq = rec_n.lambda_n.norm().max(rec_k.lambda_n.norm());
    let a = EigenfunctionSamples::new(&sh, rec_n.lambda_n, freq, opts.quadrature_order)?;
    let b = EigenfunctionSamples::new(&sh, rec_k.lambda_n, freq, opts.quadrature_order)?;
    let (dens, pot, na, nb) = a.weighted(problem, &b);
    let sum = rec_n.lambda_n + rec_k.lambda_n;
    let lhs = sum * dens - 2.0 * pot - a.jump_term(problem, &b);
    let norm = sum.norm() * na * nb;
    Ok(OrthogonalityCheck {
        lhs,
        residual: if norm > 0.0 { lhs.norm() / norm } else { lhs.norm() },
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticRow {
    pub n: usize,
    pub lambda_n: Complex64,
    pub lambda_n0: Complex64,
    pub optical_term: f64,
    pub difference: Complex64,
    /// `(λₙ − λₙ⁰)·λₙ⁰`; bounded in `n`.
    pub scaled: Complex64,
}

/// Rows `n = 0..=big_n`.
pub fn asymptotic_table(problem: &PencilProblem, big_n: usize, opts: &SpectralOptions) -> Result<Vec<AsymptoticRow>> {
    if big_n < 5 {
        return Err(PencilError::Precondition(format!("N must be at least 5, got {big_n}")));
    }
    let d = problem.density.optical_length();
    let mut lambda_max = (big_n as f64 + 3.0) * PI / d + 1.0;
    let spectrum = loop {
        let s = find_eigenvalues(problem, lambda_max, opts)?;
        if s.records.len() > big_n + 1 {
            break s;
        }
        lambda_max *= 1.25;
    };
    Ok(spectrum
        .records
        .iter()
        .take(big_n + 1)
        .map(|r| AsymptoticRow {
            n: r.n,
            lambda_n: r.lambda_n,
            lambda_n0: r.lambda_n0,
            optical_term: r.optical_term,
            difference: r.residual,
            scaled: r.residual * r.lambda_n0,
        })
        .collect())
}

/// `max |scaled|` over `n ∈ [lo, hi]`.
pub fn scaled_max(rows: &[AsymptoticRow], lo: usize, hi: usize) -> f64 {
    rows.iter()
        .filter(|r| r.n >= lo && r.n <= hi)
        .map(|r| r.scaled.norm())
        .fold(0.0, f64::max)
}

/// `count − DΛ/π` for the eigenvalues with real part in `[0, Λ]`.
pub fn count_defect(problem: &PencilProblem, spectrum: &EigenSpectrum, big_lambda: f64) -> f64 {
    let count = spectrum
        .records
        .iter()
        .filter(|r| r.lambda_n.re <= big_lambda)
        .count();
    count as f64 - problem.density.optical_length() * big_lambda / PI
}
