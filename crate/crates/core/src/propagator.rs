//! Shooting solutions of `y'' = [2λp(x) + q(x) − λ²δ(x)] y` across the three
//! density regions, with the jump transfer applied at `p1` and `p2`.
//!
//! Inside a region the system `(y, y')` is integrated by an adaptive
//! Dormand–Prince 5(4) pair. Steps never straddle a jump or a breakpoint of
//! `p`/`q`, and coefficients are always evaluated on the piece being crossed,
//! so one-sided values at breakpoints are exact.

use num_complex::Complex64;

use crate::error::{PencilError, Result};
use crate::model::{JumpParameters, JumpSite, PencilProblem};

/// `(y, y')` at a position `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingState {
    pub x: f64,
    pub y: Complex64,
    pub yprime: Complex64,
}

impl ShootingState {
    pub fn new(x: f64, y: impl Into<Complex64>, yprime: impl Into<Complex64>) -> Self {
        Self {
            x,
            y: y.into(),
            yprime: yprime.into(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.y.is_finite() && self.yprime.is_finite()
    }

    /// `W[self, other] = y·other' − y'·other`.
    pub fn wronskian(&self, other: &ShootingState) -> Complex64 {
        self.y * other.yprime - self.yprime * other.y
    }

    /// Magnitude of the two products that make up the Wronskian; the natural
    /// scale for judging cancellation in it.
    pub fn wronskian_scale(&self, other: &ShootingState) -> f64 {
        (self.y * other.yprime).norm() + (self.yprime * other.y).norm()
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            x: self.x,
            y: self.y * c,
            yprime: self.yprime * c,
        }
    }
}

/// Integrator settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    /// The maximum step is the region length divided by this.
    pub max_step_divisions: usize,
    pub min_step: f64,
    pub overflow_guard: f64,
    pub max_steps: usize,
    /// Fixed step length; disables error control when set.
    pub fixed_step: Option<f64>,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-10,
            max_step_divisions: 16,
            min_step: 1e-13,
            overflow_guard: 1e300,
            max_steps: 2_000_000,
            fixed_step: None,
        }
    }
}

impl StepControl {
    pub fn with_tolerance(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            ..Self::default()
        }
    }

    pub fn fixed(step: f64) -> Self {
        Self {
            fixed_step: Some(step),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Interior,
    /// Left limit at a jump point.
    Pre,
    /// Right limit at a jump point.
    Post,
}

impl Side {
    pub fn label(self) -> &'static str {
        match self {
            Side::Interior => "interior",
            Side::Pre => "pre",
            Side::Post => "post",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceNode {
    pub state: ShootingState,
    pub region: usize,
    pub side: Side,
}

/// A solution sampled on an ascending mesh. Each jump point appears twice,
/// first with its left limit and then with its right limit.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionTrace {
    pub lambda: Complex64,
    pub nodes: Vec<TraceNode>,
}

impl SolutionTrace {
    pub fn mesh(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.state.x).collect()
    }

    pub fn states(&self) -> impl Iterator<Item = &ShootingState> {
        self.nodes.iter().map(|n| &n.state)
    }

    pub fn first(&self) -> &ShootingState {
        &self.nodes[0].state
    }

    pub fn last(&self) -> &ShootingState {
        &self.nodes[self.nodes.len() - 1].state
    }

    /// First node at exactly `x` (the left limit at a jump point).
    pub fn state_at(&self, x: f64) -> Option<&ShootingState> {
        self.nodes.iter().find(|n| n.state.x == x).map(|n| &n.state)
    }

    /// Left limit at jump `site`.
    pub fn pre_jump(&self, site: JumpSite) -> Option<&ShootingState> {
        self.nodes
            .iter()
            .filter(|n| n.side == Side::Pre)
            .nth(site.index() - 1)
            .map(|n| &n.state)
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            lambda: self.lambda,
            nodes: self
                .nodes
                .iter()
                .map(|n| TraceNode {
                    state: n.state.scaled(c),
                    ..*n
                })
                .collect(),
        }
    }

    /// Pointwise Wronskian `W[self, other]`; the traces must share a mesh.
    pub fn wronskian_with(&self, other: &SolutionTrace) -> Result<Vec<Complex64>> {
        if self.nodes.len() != other.nodes.len()
            || self
                .nodes
                .iter()
                .zip(&other.nodes)
                .any(|(a, b)| a.state.x != b.state.x || a.side != b.side)
        {
            return Err(PencilError::Precondition(
                "traces do not share a mesh".into(),
            ));
        }
        Ok(self
            .nodes
            .iter()
            .zip(&other.nodes)
            .map(|(a, b)| a.state.wronskian(&b.state))
            .collect())
    }

    /// `max |W(x) − W(0)|` over the mesh, relative to the largest Wronskian
    /// product magnitude seen.
    pub fn wronskian_variation(&self, other: &SolutionTrace) -> Result<f64> {
        let w = self.wronskian_with(other)?;
        let scale = self
            .nodes
            .iter()
            .zip(&other.nodes)
            .map(|(a, b)| a.state.wronskian_scale(&b.state))
            .fold(0.0, f64::max);
        let w0 = w[0];
        let spread = w.iter().map(|v| (v - w0).norm()).fold(0.0, f64::max);
        Ok(if scale > 0.0 { spread / scale } else { 0.0 })
    }
}

/// Requested interior output points, in addition to the endpoints and the
/// jump points that every trace carries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MeshHint {
    points: Vec<f64>,
}

impl MeshHint {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn points(points: impl IntoIterator<Item = f64>) -> Self {
        let mut pts: Vec<f64> = points
            .into_iter()
            .filter(|x| x.is_finite() && *x > 0.0 && *x < std::f64::consts::PI)
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        Self { points: pts }
    }

    /// `per_region` equally spaced interior points in each density region.
    pub fn uniform(problem: &PencilProblem, per_region: usize) -> Self {
        let d = &problem.density;
        let pts = (0..3).flat_map(|r| {
            let (lo, hi) = d.region_bounds(r);
            (1..=per_region).map(move |k| lo + (hi - lo) * k as f64 / (per_region + 1) as f64)
        });
        Self::points(pts)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.points
    }
}

/// `y(p+0) = α y(p−0)`, `y'(p+0) = y'(p−0)/α + iλγ y(p−0)`.
pub fn apply_jump(
    state: ShootingState,
    site: JumpSite,
    jumps: &JumpParameters,
    lambda: Complex64,
) -> ShootingState {
    let a = jumps.alpha(site);
    let g = jumps.gamma(site);
    ShootingState {
        x: state.x,
        y: state.y * a,
        yprime: state.yprime / a + Complex64::i() * lambda * g * state.y,
    }
}

/// Closed-form inverse of [`apply_jump`]; the transfer has unit determinant.
pub fn apply_inverse_jump(
    state: ShootingState,
    site: JumpSite,
    jumps: &JumpParameters,
    lambda: Complex64,
) -> ShootingState {
    let a = jumps.alpha(site);
    let g = jumps.gamma(site);
    let y = state.y / a;
    ShootingState {
        x: state.x,
        y,
        yprime: a * (state.yprime - Complex64::i() * lambda * g * y),
    }
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

type Vec2 = [Complex64; 2];

#[inline]
fn axpy(u: &Vec2, terms: &[(f64, &Vec2)], h: f64) -> Vec2 {
    let mut out = *u;
    for (c, k) in terms {
        out[0] += k[0] * (h * c);
        out[1] += k[1] * (h * c);
    }
    out
}

/// Right-hand side on one smooth piece of one region.
struct Piece<'a> {
    problem: &'a PencilProblem,
    p_piece: usize,
    q_piece: usize,
    two_lambda: Complex64,
    lambda2_eta: Complex64,
}

impl Piece<'_> {
    #[inline]
    fn rhs(&self, x: f64, u: &Vec2) -> Vec2 {
        let p = self.problem.p.eval_piece(self.p_piece, x);
        let q = self.problem.q.eval_piece(self.q_piece, x);
        let v = self.two_lambda * p + q - self.lambda2_eta;
        [u[1], v * u[0]]
    }
}

/// Computes φ, ψ and S for one problem.
#[derive(Debug, Clone, Copy)]
pub struct Shooter<'a> {
    problem: &'a PencilProblem,
    control: StepControl,
}

impl<'a> Shooter<'a> {
    pub fn new(problem: &'a PencilProblem) -> Result<Self> {
        Self::with_control(problem, StepControl::default())
    }

    pub fn with_control(problem: &'a PencilProblem, control: StepControl) -> Result<Self> {
        problem.ensure_valid()?;
        if !(control.rtol > 0.0 && control.atol > 0.0) {
            return Err(PencilError::Precondition("tolerances must be positive".into()));
        }
        Ok(Self { problem, control })
    }

    pub fn problem(&self) -> &'a PencilProblem {
        self.problem
    }

    pub fn control(&self) -> &StepControl {
        &self.control
    }

    /// Integrates from `state` to `x_end` inside a single density region
    /// (jump points are allowed as endpoints). Direction follows the sign of
    /// `x_end − state.x`.
    pub fn integrate_region(
        &self,
        lambda: Complex64,
        state: ShootingState,
        x_end: f64,
    ) -> Result<ShootingState> {
        let d = &self.problem.density;
        let region = d.region_of(0.5 * (state.x + x_end));
        let (lo, hi) = d.region_bounds(region);
        let inside = |x: f64| x >= lo && x <= hi;
        if !inside(state.x) || !inside(x_end) {
            return Err(PencilError::Precondition(format!(
                "[{}, {}] is not contained in one density region",
                state.x.min(x_end),
                state.x.max(x_end)
            )));
        }
        let mut h = 0.0;
        let out = self.advance(lambda, state, region, &[x_end], &mut h)?;
        Ok(out[0])
    }

    /// φ with `φ(0) = 1`, `φ'(0) = 0`.
    pub fn solve_phi(&self, lambda: Complex64, mesh: &MeshHint) -> Result<SolutionTrace> {
        self.sweep_forward(lambda, ShootingState::new(0.0, 1.0, 0.0), mesh.as_slice(), std::f64::consts::PI)
    }

    /// S with `S(0) = 0`, `S'(0) = 1`.
    pub fn solve_s(&self, lambda: Complex64, mesh: &MeshHint) -> Result<SolutionTrace> {
        self.sweep_forward(lambda, ShootingState::new(0.0, 0.0, 1.0), mesh.as_slice(), std::f64::consts::PI)
    }

    /// ψ with `ψ(π) = 0`, `ψ'(π) = 1`.
    pub fn solve_psi(&self, lambda: Complex64, mesh: &MeshHint) -> Result<SolutionTrace> {
        self.sweep_backward(
            lambda,
            ShootingState::new(std::f64::consts::PI, 0.0, 1.0),
            mesh.as_slice(),
            0.0,
        )
    }

    /// State at `x` of the solution with initial data `init` at `x = 0`.
    /// At a jump point the left limit is returned.
    pub fn forward_to(&self, lambda: Complex64, init: ShootingState, x: f64) -> Result<ShootingState> {
        let trace = self.sweep_forward(lambda, init, &[], x)?;
        Ok(trace
            .nodes
            .iter()
            .rev()
            .find(|n| n.side != Side::Post)
            .map(|n| n.state)
            .unwrap_or(init))
    }

    /// State at `x` of the solution with data `init` at `x = π`, propagated
    /// backwards. At a jump point the right limit is returned.
    pub fn backward_to(&self, lambda: Complex64, init: ShootingState, x: f64) -> Result<ShootingState> {
        let trace = self.sweep_backward(lambda, init, &[], x)?;
        Ok(trace
            .nodes
            .iter()
            .find(|n| n.side != Side::Pre)
            .map(|n| n.state)
            .unwrap_or(init))
    }

    fn sweep_forward(
        &self,
        lambda: Complex64,
        init: ShootingState,
        mesh: &[f64],
        stop: f64,
    ) -> Result<SolutionTrace> {
        let d = &self.problem.density;
        let mut nodes = vec![TraceNode {
            state: init,
            region: 0,
            side: Side::Interior,
        }];
        let mut state = init;
        let mut h = 0.0;
        for region in 0..3 {
            let (lo, hi) = d.region_bounds(region);
            let end = hi.min(stop);
            if end <= state.x && !(end == hi && region < 2 && state.x == hi) {
                break;
            }
            let mut targets: Vec<f64> = mesh.iter().copied().filter(|&x| x > lo && x < end).collect();
            targets.push(end);
            let states = if end > state.x {
                self.advance(lambda, state, region, &targets, &mut h)?
            } else {
                vec![state]
            };
            let (last, interior) = states.split_last().expect("at least one target");
            nodes.extend(interior.iter().map(|&s| TraceNode {
                state: s,
                region,
                side: Side::Interior,
            }));
            if end == hi && region < 2 {
                let site = if region == 0 { JumpSite::First } else { JumpSite::Second };
                nodes.push(TraceNode {
                    state: *last,
                    region,
                    side: Side::Pre,
                });
                if stop == hi {
                    break;
                }
                state = apply_jump(*last, site, &self.problem.jumps, lambda);
                nodes.push(TraceNode {
                    state,
                    region: region + 1,
                    side: Side::Post,
                });
            } else {
                nodes.push(TraceNode {
                    state: *last,
                    region,
                    side: Side::Interior,
                });
                break;
            }
        }
        Ok(SolutionTrace { lambda, nodes })
    }

    fn sweep_backward(
        &self,
        lambda: Complex64,
        init: ShootingState,
        mesh: &[f64],
        stop: f64,
    ) -> Result<SolutionTrace> {
        let d = &self.problem.density;
        let mut nodes = vec![TraceNode {
            state: init,
            region: 2,
            side: Side::Interior,
        }];
        let mut state = init;
        let mut h = 0.0;
        for region in (0..3).rev() {
            let (lo, hi) = d.region_bounds(region);
            let end = lo.max(stop);
            let mut targets: Vec<f64> = mesh
                .iter()
                .rev()
                .copied()
                .filter(|&x| x > end && x < hi)
                .collect();
            targets.push(end);
            let states = if end < state.x {
                self.advance(lambda, state, region, &targets, &mut h)?
            } else {
                vec![state]
            };
            let (last, interior) = states.split_last().expect("at least one target");
            nodes.extend(interior.iter().map(|&s| TraceNode {
                state: s,
                region,
                side: Side::Interior,
            }));
            if end == lo && region > 0 {
                let site = if region == 1 { JumpSite::First } else { JumpSite::Second };
                nodes.push(TraceNode {
                    state: *last,
                    region,
                    side: Side::Post,
                });
                if stop == lo {
                    break;
                }
                state = apply_inverse_jump(*last, site, &self.problem.jumps, lambda);
                nodes.push(TraceNode {
                    state,
                    region: region - 1,
                    side: Side::Pre,
                });
            } else {
                nodes.push(TraceNode {
                    state: *last,
                    region,
                    side: Side::Interior,
                });
                break;
            }
        }
        nodes.reverse();
        Ok(SolutionTrace { lambda, nodes })
    }

    /// Integrates through the monotone list `targets` inside `region`,
    /// returning the state at each. Breakpoints of `p` and `q` are crossed as
    /// hard stops.
    fn advance(
        &self,
        lambda: Complex64,
        start: ShootingState,
        region: usize,
        targets: &[f64],
        h: &mut f64,
    ) -> Result<Vec<ShootingState>> {
        let d = &self.problem.density;
        let (lo, hi) = d.region_bounds(region);
        let max_step = (hi - lo) / self.control.max_step_divisions as f64;
        let eta = d.eta(region);
        let lambda2_eta = lambda * lambda * eta;
        let two_lambda = lambda * 2.0;
        if *h == 0.0 {
            *h = max_step.min(0.05 / (1.0 + lambda.norm() * eta.sqrt()));
        }
        let mut breaks: Vec<f64> = self
            .problem
            .p
            .breaks()
            .into_iter()
            .chain(self.problem.q.breaks())
            .filter(|&b| b > lo && b < hi)
            .collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();

        let mut out = Vec::with_capacity(targets.len());
        let mut state = start;
        for &target in targets {
            let forward = target >= state.x;
            let mut stops: Vec<f64> = breaks
                .iter()
                .copied()
                .filter(|&b| if forward { b > state.x && b < target } else { b < state.x && b > target })
                .collect();
            if !forward {
                stops.reverse();
            }
            stops.push(target);
            for stop in stops {
                if stop == state.x {
                    continue;
                }
                let mid = 0.5 * (state.x + stop);
                let piece = Piece {
                    problem: self.problem,
                    p_piece: self.problem.p.piece_at(mid),
                    q_piece: self.problem.q.piece_at(mid),
                    two_lambda,
                    lambda2_eta,
                };
                state = self.integrate_piece(&piece, lambda, state, stop, max_step, h)?;
            }
            out.push(state);
        }
        Ok(out)
    }

    fn integrate_piece(
        &self,
        piece: &Piece<'_>,
        lambda: Complex64,
        start: ShootingState,
        x_end: f64,
        max_step: f64,
        h: &mut f64,
    ) -> Result<ShootingState> {
        let dir = if x_end >= start.x { 1.0 } else { -1.0 };
        let mut x = start.x;
        let mut u: Vec2 = [start.y, start.yprime];
        let guard = self.control.overflow_guard;
        let overflowed = |u: &Vec2| {
            !(u[0].norm() <= guard && u[1].norm() <= guard)
        };

        if let Some(hf) = self.control.fixed_step {
            let n = ((x_end - x).abs() / hf).ceil().max(1.0) as usize;
            let step = (x_end - x) / n as f64;
            for i in 0..n {
                let (u5, _, _) = dp5_step(piece, x, &u, step, None);
                u = u5;
                x = if i + 1 == n { x_end } else { x + step };
                if overflowed(&u) {
                    return Err(PencilError::SolutionOverflow { x, lambda });
                }
            }
            return Ok(ShootingState { x, y: u[0], yprime: u[1] });
        }

        let mut k1: Option<Vec2> = None;
        let mut steps = 0usize;
        let span = (x_end - start.x).abs();
        loop {
            let remaining = (x_end - x).abs();
            if remaining <= 1e-15 * span.max(1.0) {
                break;
            }
            let h_abs = h.abs().min(max_step);
            let clipped = h_abs >= remaining;
            let step = dir * if clipped { remaining } else { h_abs };
            let (u5, err_vec, k7) = dp5_step(piece, x, &u, step, k1);
            let mut err2 = 0.0;
            for i in 0..2 {
                let sc = self.control.atol + self.control.rtol * u[i].norm().max(u5[i].norm());
                err2 += (err_vec[i].norm() / sc).powi(2);
            }
            let err = (0.5 * err2).sqrt();
            if err <= 1.0 {
                x = if clipped { x_end } else { x + step };
                u = u5;
                k1 = Some(k7);
                if overflowed(&u) {
                    return Err(PencilError::SolutionOverflow { x, lambda });
                }
                let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                let proposed = step.abs() * factor;
                *h = if clipped { proposed.max(h.abs()) } else { proposed };
            } else {
                let factor = (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                *h = step.abs() * factor;
                if !err.is_finite() {
                    *h = step.abs() * 0.1;
                }
                if *h < self.control.min_step {
                    return Err(PencilError::StiffnessFailure { x, step: *h });
                }
            }
            steps += 1;
            if steps > self.control.max_steps {
                return Err(PencilError::StiffnessFailure { x, step: *h });
            }
        }
        Ok(ShootingState { x: x_end, y: u[0], yprime: u[1] })
    }
}

/// One Dormand–Prince step; returns the 5th-order solution, the embedded
/// error estimate and the derivative at the new point (FSAL).
#[inline]
fn dp5_step(piece: &Piece<'_>, x: f64, u: &Vec2, h: f64, k1: Option<Vec2>) -> (Vec2, Vec2, Vec2) {
    let k1 = k1.unwrap_or_else(|| piece.rhs(x, u));
    let k2 = piece.rhs(x + C2 * h, &axpy(u, &[(A21, &k1)], h));
    let k3 = piece.rhs(x + C3 * h, &axpy(u, &[(A31, &k1), (A32, &k2)], h));
    let k4 = piece.rhs(x + C4 * h, &axpy(u, &[(A41, &k1), (A42, &k2), (A43, &k3)], h));
    let k5 = piece.rhs(
        x + C5 * h,
        &axpy(u, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h),
    );
    let k6 = piece.rhs(
        x + h,
        &axpy(u, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], h),
    );
    let u5 = axpy(u, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], h);
    let k7 = piece.rhs(x + h, &u5);
    let mut err = [Complex64::new(0.0, 0.0); 2];
    for i in 0..2 {
        err[i] = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
    }
    (u5, err, k7)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn free_region_reproduces_cosine() {
        let prob = fixtures::trivial();
        let sh = Shooter::new(&prob).unwrap();
        let s = sh
            .integrate_region(c(1.0), ShootingState::new(0.0, 1.0, 0.0), PI / 2.0)
            .unwrap_err();
        // π/2 crosses p1 = 1 on the trivial layout
        assert!(matches!(s, PencilError::Precondition(_)));

        let s = sh
            .integrate_region(c(1.0), ShootingState::new(0.0, 1.0, 0.0), 0.9)
            .unwrap();
        assert!((s.y - c(0.9f64.cos())).norm() < 1e-9);
        assert!((s.yprime + c(0.9f64.sin())).norm() < 1e-9);
    }

    #[test]
    fn quarter_period_on_single_region_layout() {
        // A layout whose first region covers [0, π/2] exactly.
        let mut prob = fixtures::trivial();
        prob.density.p1 = PI / 2.0;
        prob.density.p2 = 2.0;
        let sh = Shooter::new(&prob).unwrap();
        let s = sh
            .integrate_region(c(1.0), ShootingState::new(0.0, 1.0, 0.0), PI / 2.0)
            .unwrap();
        assert!(s.y.norm() < 1e-9);
        assert!((s.yprime + c(1.0)).norm() < 1e-9);
    }

    #[test]
    fn dense_region_closed_form() {
        // η = 4 on (1, 2): y = cos(λ·2·(x − 1))
        let prob = fixtures::jump_fixture();
        let sh = Shooter::new(&prob).unwrap();
        let s = sh
            .integrate_region(c(1.0), ShootingState::new(1.0, 1.0, 0.0), 1.5)
            .unwrap();
        assert!((s.y - c(1.0f64.cos())).norm() < 1e-9);
        assert!((s.yprime + c(2.0 * 1.0f64.sin())).norm() < 1e-9);
    }

    #[test]
    fn zero_lambda_is_constant() {
        let prob = fixtures::trivial();
        let sh = Shooter::new(&prob).unwrap();
        let tr = sh.solve_phi(c(0.0), &MeshHint::none()).unwrap();
        assert!((tr.last().y - c(1.0)).norm() < 1e-12);
        assert!(tr.last().yprime.norm() < 1e-12);
    }

    #[test]
    fn jump_examples() {
        let jumps = JumpParameters {
            alpha1: 2.0,
            gamma1: 0.5,
            alpha2: 1.0,
            gamma2: 0.0,
        };
        let s = apply_jump(ShootingState::new(1.0, 1.0, 0.0), JumpSite::First, &jumps, c(1.0));
        assert_eq!(s.y, c(2.0));
        assert_eq!(s.yprime, Complex64::new(0.0, 0.5));

        let st = ShootingState::new(2.0, Complex64::new(0.3, -1.0), Complex64::new(2.0, 0.1));
        assert_eq!(apply_jump(st, JumpSite::Second, &jumps, Complex64::new(3.0, 1.0)), st);

        let mut j0 = jumps;
        j0.gamma1 = 0.0;
        let s = apply_jump(ShootingState::new(1.0, 0.0, 1.0), JumpSite::First, &j0, c(7.0));
        assert_eq!(s.y, c(0.0));
        assert_eq!(s.yprime, c(0.5));
    }

    #[test]
    fn inverse_jump_round_trips() {
        let jumps = fixtures::jump_fixture().jumps;
        let lam = Complex64::new(2.3, -0.7);
        let st = ShootingState::new(1.0, Complex64::new(0.3, -1.0), Complex64::new(2.0, 0.1));
        for site in [JumpSite::First, JumpSite::Second] {
            let back = apply_inverse_jump(apply_jump(st, site, &jumps, lam), site, &jumps, lam);
            assert!((back.y - st.y).norm() < 1e-15);
            assert!((back.yprime - st.yprime).norm() < 1e-14);
        }
    }

    #[test]
    fn trivial_closed_forms() {
        let prob = fixtures::trivial();
        let sh = Shooter::new(&prob).unwrap();
        let phi = sh.solve_phi(c(1.0), &MeshHint::none()).unwrap();
        assert!((phi.last().y + c(1.0)).norm() < 1e-9);

        let psi = sh.solve_psi(c(1.0), &MeshHint::none()).unwrap();
        assert!(psi.first().y.norm() < 1e-9);
        let psi = sh.solve_psi(c(0.5), &MeshHint::none()).unwrap();
        assert!((psi.first().y + c(2.0)).norm() < 1e-9);

        let mesh = MeshHint::points([PI / 2.0]);
        let s = sh.solve_s(c(1.0), &mesh).unwrap();
        assert!((s.state_at(PI / 2.0).unwrap().y - c(1.0)).norm() < 1e-9);
        let s0 = sh.solve_s(c(0.0), &MeshHint::none()).unwrap();
        assert!((s0.last().y - c(PI)).norm() < 1e-9);
        assert_eq!(s0.first().y, c(0.0));
        assert_eq!(s0.first().yprime, c(1.0));
    }

    #[test]
    fn trace_carries_both_jump_limits() {
        let prob = fixtures::jump_fixture();
        let sh = Shooter::new(&prob).unwrap();
        let lam = c(1.3);
        let tr = sh.solve_phi(lam, &MeshHint::uniform(&prob, 3)).unwrap();
        let mesh = tr.mesh();
        assert!(mesh.windows(2).all(|w| w[0] <= w[1]));
        for (site, x) in [(JumpSite::First, 1.0), (JumpSite::Second, 2.0)] {
            let idx = tr.nodes.iter().position(|n| n.state.x == x).unwrap();
            assert_eq!(tr.nodes[idx].side, Side::Pre);
            assert_eq!(tr.nodes[idx + 1].side, Side::Post);
            assert_eq!(tr.nodes[idx + 1].state.x, x);
            let expect = apply_jump(tr.nodes[idx].state, site, &prob.jumps, lam);
            assert_eq!(tr.nodes[idx + 1].state, expect);
        }
        // φ(p1+0) = α₁ cos(λ p1) for p = q = 0
        let post = tr.nodes.iter().find(|n| n.side == Side::Post).unwrap();
        assert!((post.state.y - c(1.5 * 1.3f64.cos())).norm() < 1e-9);

        let psi = sh.solve_psi(lam, &MeshHint::uniform(&prob, 3)).unwrap();
        assert_eq!(psi.mesh(), mesh);
    }

    #[test]
    fn phi_is_one_before_first_jump_at_zero_lambda() {
        let prob = fixtures::jump_fixture();
        let sh = Shooter::new(&prob).unwrap();
        let tr = sh.solve_phi(c(0.0), &MeshHint::uniform(&prob, 4)).unwrap();
        for n in tr.nodes.iter().filter(|n| n.region == 0 && n.side != Side::Post) {
            assert!((n.state.y - c(1.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn overflow_is_reported() {
        let prob = fixtures::jump_fixture();
        let ctl = StepControl {
            overflow_guard: 1e10,
            ..StepControl::default()
        };
        let sh = Shooter::with_control(&prob, ctl).unwrap();
        let err = sh
            .solve_phi(Complex64::new(1.0, 8.0), &MeshHint::none())
            .unwrap_err();
        assert!(matches!(err, PencilError::SolutionOverflow { .. }));
    }

    #[test]
    fn stiffness_failure_on_step_underflow() {
        let prob = fixtures::jump_fixture();
        let mut ctl = StepControl::with_tolerance(1e-16);
        ctl.min_step = 1e-3;
        let sh = Shooter::with_control(&prob, ctl).unwrap();
        let err = sh.solve_phi(c(30.0), &MeshHint::none()).unwrap_err();
        assert!(matches!(err, PencilError::StiffnessFailure { .. }));
    }

    #[test]
    fn fixed_step_fallback_agrees() {
        let prob = fixtures::jump_fixture();
        let adaptive = Shooter::new(&prob).unwrap();
        let fixed = Shooter::with_control(&prob, StepControl::fixed(1e-3)).unwrap();
        let lam = c(2.5);
        let a = adaptive.solve_phi(lam, &MeshHint::none()).unwrap();
        let b = fixed.solve_phi(lam, &MeshHint::none()).unwrap();
        assert!((a.last().y - b.last().y).norm() < 1e-9);
    }

    #[test]
    fn invalid_problem_is_refused() {
        let mut prob = fixtures::jump_fixture();
        prob.density.alpha = 1.0;
        assert!(matches!(
            Shooter::new(&prob),
            Err(PencilError::InvalidProblem(_))
        ));
    }
}
