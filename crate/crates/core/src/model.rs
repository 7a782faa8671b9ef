//! Problem data: coefficients `p`, `q`, the density profile and the jump
//! parameters, together with validation and the positivity screen on `q`.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{PencilError, Result};
use crate::quadrature::{CompositeRule, GaussLegendre};

/// A real coefficient on `[0, π]`.
///
/// Piecewise kinds split `[0, π]` at `breakpoints` into `breakpoints.len() + 1`
/// pieces; evaluation is right-continuous, with [`value_left`] giving the
/// other one-sided limit. Polynomial coefficients are in powers of
/// `(x - piece_start)`. Grid-sampled coefficients are values on a uniform mesh
/// over `[0, π]` (including both ends) with linear interpolation.
///
/// [`value_left`]: CoefficientFunction::value_left
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CoefficientFunction {
    PiecewiseConstant {
        #[serde(default)]
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
    PiecewisePolynomial {
        #[serde(default)]
        breakpoints: Vec<f64>,
        values: Vec<Vec<f64>>,
    },
    GridSampled {
        #[serde(default)]
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
}

impl CoefficientFunction {
    pub fn constant(c: f64) -> Self {
        CoefficientFunction::PiecewiseConstant {
            breakpoints: Vec::new(),
            values: vec![c],
        }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn piecewise_constant(breakpoints: Vec<f64>, values: Vec<f64>) -> Self {
        CoefficientFunction::PiecewiseConstant {
            breakpoints,
            values,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            CoefficientFunction::PiecewiseConstant { .. } => "piecewise-constant",
            CoefficientFunction::PiecewisePolynomial { .. } => "piecewise-polynomial",
            CoefficientFunction::GridSampled { .. } => "grid-sampled",
        }
    }

    fn grid_step(n: usize) -> f64 {
        PI / (n - 1) as f64
    }

    /// Number of smooth pieces.
    pub fn piece_count(&self) -> usize {
        match self {
            CoefficientFunction::PiecewiseConstant { breakpoints, .. }
            | CoefficientFunction::PiecewisePolynomial { breakpoints, .. } => breakpoints.len() + 1,
            CoefficientFunction::GridSampled { values, .. } => values.len().saturating_sub(1).max(1),
        }
    }

    /// Points in `(0, π)` where the coefficient (or its derivative) may jump.
    pub fn breaks(&self) -> Vec<f64> {
        match self {
            CoefficientFunction::PiecewiseConstant { breakpoints, .. }
            | CoefficientFunction::PiecewisePolynomial { breakpoints, .. } => breakpoints
                .iter()
                .copied()
                .filter(|&b| b > 0.0 && b < PI)
                .collect(),
            CoefficientFunction::GridSampled { values, .. } => {
                if values.len() < 3 {
                    return Vec::new();
                }
                let h = Self::grid_step(values.len());
                (1..values.len() - 1).map(|j| j as f64 * h).collect()
            }
        }
    }

    /// Start of piece `idx`.
    fn piece_start(&self, idx: usize) -> f64 {
        match self {
            CoefficientFunction::PiecewiseConstant { breakpoints, .. }
            | CoefficientFunction::PiecewisePolynomial { breakpoints, .. } => {
                if idx == 0 {
                    0.0
                } else {
                    breakpoints[idx - 1]
                }
            }
            CoefficientFunction::GridSampled { values, .. } => {
                idx as f64 * Self::grid_step(values.len())
            }
        }
    }

    fn piece_end(&self, idx: usize) -> f64 {
        match self {
            CoefficientFunction::PiecewiseConstant { breakpoints, .. }
            | CoefficientFunction::PiecewisePolynomial { breakpoints, .. } => {
                breakpoints.get(idx).copied().unwrap_or(PI)
            }
            CoefficientFunction::GridSampled { values, .. } => {
                (idx + 1) as f64 * Self::grid_step(values.len())
            }
        }
    }

    /// Index of the piece containing `x` (right-continuous).
    pub fn piece_at(&self, x: f64) -> usize {
        match self {
            CoefficientFunction::PiecewiseConstant { breakpoints, .. }
            | CoefficientFunction::PiecewisePolynomial { breakpoints, .. } => {
                breakpoints.partition_point(|&b| b <= x)
            }
            CoefficientFunction::GridSampled { values, .. } => {
                if values.len() < 2 {
                    return 0;
                }
                let h = Self::grid_step(values.len());
                ((x / h).floor().max(0.0) as usize).min(values.len() - 2)
            }
        }
    }

    /// Evaluates the analytic expression of piece `idx` at `x`, even when `x`
    /// lies at (or slightly beyond) the piece boundary.
    pub fn eval_piece(&self, idx: usize, x: f64) -> f64 {
        match self {
            CoefficientFunction::PiecewiseConstant { values, .. } => values[idx],
            CoefficientFunction::PiecewisePolynomial { values, .. } => {
                let t = x - self.piece_start(idx);
                values[idx].iter().rev().fold(0.0, |acc, &c| acc * t + c)
            }
            CoefficientFunction::GridSampled { values, .. } => {
                if values.len() == 1 {
                    return values[0];
                }
                let h = Self::grid_step(values.len());
                let t = (x - idx as f64 * h) / h;
                values[idx] * (1.0 - t) + values[idx + 1] * t
            }
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.eval_piece(self.piece_at(x), x)
    }

    /// Left limit at `x`.
    pub fn value_left(&self, x: f64) -> f64 {
        let mut idx = self.piece_at(x);
        if idx > 0 && self.piece_start(idx) == x {
            idx -= 1;
        }
        self.eval_piece(idx, x)
    }

    /// Exact integral over `[a, b]` (either orientation).
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        if b < a {
            return -self.integral(b, a);
        }
        let mut total = 0.0;
        let first = self.piece_at(a);
        let last = self.piece_at(b).min(self.piece_count() - 1);
        for idx in first..=last {
            let lo = a.max(self.piece_start(idx));
            let hi = if idx == last { b } else { b.min(self.piece_end(idx)) };
            if hi <= lo {
                continue;
            }
            total += match self {
                CoefficientFunction::PiecewiseConstant { values, .. } => values[idx] * (hi - lo),
                CoefficientFunction::PiecewisePolynomial { values, .. } => {
                    let s = self.piece_start(idx);
                    values[idx]
                        .iter()
                        .enumerate()
                        .map(|(k, c)| {
                            let e = (k + 1) as i32;
                            c * ((hi - s).powi(e) - (lo - s).powi(e)) / e as f64
                        })
                        .sum::<f64>()
                }
                CoefficientFunction::GridSampled { .. } => {
                    0.5 * (hi - lo) * (self.eval_piece(idx, lo) + self.eval_piece(idx, hi))
                }
            };
        }
        total
    }

    pub fn is_zero(&self) -> bool {
        match self {
            CoefficientFunction::PiecewiseConstant { values, .. }
            | CoefficientFunction::GridSampled { values, .. } => values.iter().all(|&v| v == 0.0),
            CoefficientFunction::PiecewisePolynomial { values, .. } => {
                values.iter().flatten().all(|&v| v == 0.0)
            }
        }
    }

    /// Per-region constants when the coefficient is piecewise constant and
    /// does not vary inside `(0,p1)`, `(p1,p2)`, `(p2,π)`.
    pub fn region_constants(&self, p1: f64, p2: f64) -> Option<[f64; 3]> {
        let CoefficientFunction::PiecewiseConstant { breakpoints, values } = self else {
            return None;
        };
        let bounds = [(0.0, p1), (p1, p2), (p2, PI)];
        let mut out = [0.0; 3];
        for (r, &(lo, hi)) in bounds.iter().enumerate() {
            let inside = breakpoints.iter().any(|&b| b > lo && b < hi);
            if inside {
                return None;
            }
            out[r] = values[breakpoints.partition_point(|&b| b <= 0.5 * (lo + hi))];
        }
        Some(out)
    }

    fn check(&self, path: &str, report: &mut ValidationReport) {
        let (breakpoints, kind) = match self {
            CoefficientFunction::PiecewiseConstant { breakpoints, .. } => (breakpoints, 0),
            CoefficientFunction::PiecewisePolynomial { breakpoints, .. } => (breakpoints, 1),
            CoefficientFunction::GridSampled { breakpoints, .. } => (breakpoints, 2),
        };
        if breakpoints.iter().any(|b| !b.is_finite()) {
            report.push(format!("{path}.breakpoints"), "breakpoints must be finite");
        }
        if breakpoints.iter().any(|&b| !(0.0..=PI).contains(&b)) {
            report.push(format!("{path}.breakpoints"), "breakpoints must lie in [0,π]");
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            report.push(
                format!("{path}.breakpoints"),
                "breakpoints must be strictly increasing",
            );
        }
        match self {
            CoefficientFunction::PiecewiseConstant { values, .. } => {
                if values.len() != breakpoints.len() + 1 {
                    report.push(
                        format!("{path}.values"),
                        format!(
                            "expected {} values for {} breakpoints, found {}",
                            breakpoints.len() + 1,
                            breakpoints.len(),
                            values.len()
                        ),
                    );
                }
                if values.iter().any(|v| !v.is_finite()) {
                    report.push(format!("{path}.values"), "values must be finite");
                }
            }
            CoefficientFunction::PiecewisePolynomial { values, .. } => {
                if values.len() != breakpoints.len() + 1 {
                    report.push(
                        format!("{path}.values"),
                        format!(
                            "expected {} coefficient lists for {} breakpoints, found {}",
                            breakpoints.len() + 1,
                            breakpoints.len(),
                            values.len()
                        ),
                    );
                }
                for (i, piece) in values.iter().enumerate() {
                    if piece.is_empty() {
                        report.push(format!("{path}.values[{i}]"), "empty coefficient list");
                    }
                    if piece.iter().any(|v| !v.is_finite()) {
                        report.push(format!("{path}.values[{i}]"), "values must be finite");
                    }
                }
            }
            CoefficientFunction::GridSampled { values, .. } => {
                debug_assert_eq!(kind, 2);
                if !breakpoints.is_empty() {
                    report.push(
                        format!("{path}.breakpoints"),
                        "grid-sampled coefficients use a uniform mesh; breakpoints must be empty",
                    );
                }
                if values.len() < 2 {
                    report.push(format!("{path}.values"), "grid needs at least 2 samples");
                }
                if values.iter().any(|v| !v.is_finite()) {
                    report.push(format!("{path}.values"), "values must be finite");
                }
            }
        }
    }
}

/// The piecewise-constant density `δ(x) = 1, α², β²` on `(0,p1)`, `(p1,p2)`,
/// `(p2,π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityProfile {
    pub alpha: f64,
    pub beta: f64,
    pub p1: f64,
    pub p2: f64,
}

impl DensityProfile {
    /// Region index (0, 1 or 2) of an interior point. Jump points belong to
    /// the region on their right.
    pub fn region_of(&self, x: f64) -> usize {
        if x < self.p1 {
            0
        } else if x < self.p2 {
            1
        } else {
            2
        }
    }

    pub fn region_bounds(&self, region: usize) -> (f64, f64) {
        match region {
            0 => (0.0, self.p1),
            1 => (self.p1, self.p2),
            _ => (self.p2, PI),
        }
    }

    /// `√δ` on a region.
    pub fn sqrt_eta(&self, region: usize) -> f64 {
        match region {
            0 => 1.0,
            1 => self.alpha,
            _ => self.beta,
        }
    }

    /// `δ` on a region.
    pub fn eta(&self, region: usize) -> f64 {
        self.sqrt_eta(region).powi(2)
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        if x == self.p1 || x == self.p2 {
            return Err(PencilError::DensityAtJump { x });
        }
        if !(0.0..=PI).contains(&x) {
            return Err(PencilError::Precondition(format!(
                "x = {x} lies outside [0,π]"
            )));
        }
        Ok(self.eta(self.region_of(x)))
    }

    /// Optical length `∫₀^π √δ = βπ − βp₂ + αp₂ − αp₁ + p₁`.
    pub fn optical_length(&self) -> f64 {
        self.beta * PI - self.beta * self.p2 + self.alpha * self.p2 - self.alpha * self.p1 + self.p1
    }
}

/// Jump data at `p1` and `p2`. The derivative factors `βᵢ = 1/αᵢ` are derived
/// on demand and never stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpParameters {
    pub alpha1: f64,
    pub gamma1: f64,
    pub alpha2: f64,
    pub gamma2: f64,
}

/// Which interior jump.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpSite {
    First,
    Second,
}

impl JumpSite {
    pub fn index(self) -> usize {
        match self {
            JumpSite::First => 1,
            JumpSite::Second => 2,
        }
    }
}

impl JumpParameters {
    pub fn identity() -> Self {
        Self {
            alpha1: 1.0,
            gamma1: 0.0,
            alpha2: 1.0,
            gamma2: 0.0,
        }
    }

    pub fn alpha(&self, site: JumpSite) -> f64 {
        match site {
            JumpSite::First => self.alpha1,
            JumpSite::Second => self.alpha2,
        }
    }

    pub fn gamma(&self, site: JumpSite) -> f64 {
        match site {
            JumpSite::First => self.gamma1,
            JumpSite::Second => self.gamma2,
        }
    }

    pub fn beta(&self, site: JumpSite) -> f64 {
        1.0 / self.alpha(site)
    }

    pub fn beta1(&self) -> f64 {
        self.beta(JumpSite::First)
    }

    pub fn beta2(&self) -> f64 {
        self.beta(JumpSite::Second)
    }

    pub fn has_gamma(&self) -> bool {
        self.gamma1 != 0.0 || self.gamma2 != 0.0
    }

    /// Transfer matrix `[[αᵢ, 0], [iλγᵢ, 1/αᵢ]]` acting on `(y, y')`.
    pub fn transfer(&self, site: JumpSite, lambda: Complex64) -> [[Complex64; 2]; 2] {
        let a = self.alpha(site);
        [
            [Complex64::new(a, 0.0), Complex64::new(0.0, 0.0)],
            [Complex64::i() * lambda * self.gamma(site), Complex64::new(1.0 / a, 0.0)],
        ]
    }
}

/// Full description of one boundary value problem. Boundary conditions
/// `y'(0) = 0`, `y(π) = 0` are fixed; jumps sit at the density breakpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PencilProblem {
    pub p: CoefficientFunction,
    pub q: CoefficientFunction,
    pub density: DensityProfile,
    pub jumps: JumpParameters,
    /// Lifts the `α ≠ 1`, `β ≠ 1` and jump non-degeneracy rules so reference
    /// problems without any discontinuity can run through the same code.
    #[serde(skip)]
    pub allow_identity: bool,
}

impl PencilProblem {
    pub fn new(
        p: CoefficientFunction,
        q: CoefficientFunction,
        density: DensityProfile,
        jumps: JumpParameters,
    ) -> Self {
        Self {
            p,
            q,
            density,
            jumps,
            allow_identity: false,
        }
    }

    pub fn with_identity_allowed(mut self) -> Self {
        self.allow_identity = true;
        self
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let d = &self.density;
        for (name, v) in [("alpha", d.alpha), ("beta", d.beta)] {
            if !v.is_finite() || v <= 0.0 {
                report.push(format!("density.{name}"), format!("{name} must be positive"));
            } else if v == 1.0 && !self.allow_identity {
                report.push(format!("density.{name}"), format!("{name} must differ from 1"));
            }
        }
        if !(d.p1.is_finite() && d.p2.is_finite() && 0.0 < d.p1 && d.p1 < d.p2 && d.p2 < PI) {
            report.push("density.p1", "0<p1<p2<π");
        }
        let j = &self.jumps;
        for (i, a, g) in [(1, j.alpha1, j.gamma1), (2, j.alpha2, j.gamma2)] {
            if !a.is_finite() || !g.is_finite() {
                report.push(format!("jumps.alpha{i}"), "jump parameters must be finite");
                continue;
            }
            if a == 0.0 {
                report.push(format!("jumps.alpha{i}"), format!("alpha{i} must be nonzero"));
            }
            let sub = if i == 1 { "₁" } else { "₂" };
            if (a - 1.0).powi(2) + g * g == 0.0 && !self.allow_identity {
                report.push(
                    format!("jumps.alpha{i}"),
                    format!("|α{sub}−1|²+γ{sub}²≠0 fails"),
                );
            }
        }
        self.p.check("p", &mut report);
        self.q.check("q", &mut report);
        report
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.is_valid() {
            Ok(())
        } else {
            Err(PencilError::InvalidProblem(report))
        }
    }

    pub fn evaluate_delta(&self, x: f64) -> Result<f64> {
        self.density.value(x)
    }

    /// Sorted list of every point in `[0, π]` where some coefficient is
    /// nonsmooth, including both ends and both jumps.
    pub fn smooth_breaks(&self) -> Vec<f64> {
        let mut pts = vec![0.0, self.density.p1, self.density.p2, PI];
        pts.extend(self.p.breaks());
        pts.extend(self.q.breaks());
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            path: path.into(),
            message: message.into(),
        });
    }

    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn mentions(&self, needle: &str) -> bool {
        self.violations.iter().any(|v| v.message.contains(needle))
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .violations
            .iter()
            .map(|v| format!("{}: {}", v.path, v.message))
            .collect();
        write!(f, "{}", parts.join("; "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositivityScreen {
    pub passed: bool,
    /// Smallest Rayleigh quotient `∫(|y'|² + q|y|²) / ∫|y|²` over the span of
    /// the trial family.
    pub min_quotient: f64,
}

/// Necessary-condition screen for positivity of `∫(|y'|² + q|y|²)`.
///
/// The trial family is `cos((k − ½)x)`, `k = 1..=trial_count`, which meets
/// `y'(0) = 0`, `y(π) = 0`. The quadratic form is minimised over the span of
/// the family (Rayleigh–Ritz), so the result is never larger than the value for
/// any single trial function.
pub fn positivity_screen(q: &CoefficientFunction, trial_count: usize) -> Result<PositivityScreen> {
    if trial_count < 4 {
        return Err(PencilError::Precondition(format!(
            "trial_count must be at least 4, got {trial_count}"
        )));
    }
    let freqs: Vec<f64> = (1..=trial_count).map(|k| k as f64 - 0.5).collect();
    let mut breaks = vec![0.0];
    breaks.extend(q.breaks());
    breaks.push(PI);
    let gl = GaussLegendre::new(16);
    let rule = CompositeRule::new(&gl, &breaks, (PI / trial_count as f64).min(0.5));
    let qv: Vec<f64> = rule
        .points
        .iter()
        .map(|&x| {
            let idx = q.piece_at(x);
            q.eval_piece(idx, x)
        })
        .collect();
    let n = trial_count;
    let mut k = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut s = 0.0;
            for ((&x, &w), &qx) in rule.points.iter().zip(&rule.weights).zip(&qv) {
                s += w * qx * (freqs[i] * x).cos() * (freqs[j] * x).cos();
            }
            if i == j {
                s += freqs[i] * freqs[i] * PI / 2.0;
            }
            k[(i, j)] = s;
            k[(j, i)] = s;
        }
    }
    // All trial functions have ∫cos² = π/2 and are mutually orthogonal.
    let k = k / (PI / 2.0);
    let eig = SymmetricEigen::new(k);
    let min_quotient = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(PositivityScreen {
        passed: min_quotient > 0.0,
        min_quotient,
    })
}
