//! Closed-form transfer matrices for `p ≡ 0` and region-wise constant `q`.
//!
//! On a region with density `η` and potential `q` the equation is
//! `y'' = (q − λ²η) y`, solved by `cos ω(x−x₀)`, `sin ω(x−x₀)/ω` with
//! `ω² = λ²η − q`. The total matrix maps `(y, y')(0)` to `(y, y')(π)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::model::{DensityProfile, JumpParameters, JumpSite, PencilProblem};

pub type Mat2 = [[Complex64; 2]; 2];

pub fn identity() -> Mat2 {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    [[one, zero], [zero, one]]
}

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn det(m: &Mat2) -> Complex64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

pub fn apply(m: &Mat2, v: [Complex64; 2]) -> [Complex64; 2] {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionMatrix {
    pub matrix: Mat2,
    pub x0: f64,
    pub x1: f64,
}

/// Propagator of `y'' = (q − λ²η) y` from `x0` to `x1` (either direction).
pub fn region_matrix(lambda: Complex64, eta: f64, q: f64, x0: f64, x1: f64) -> RegionMatrix {
    let h = x1 - x0;
    let w2 = lambda * lambda * eta - q;
    let w = w2.sqrt();
    let wh = w * h;
    let (c, s_over_w, minus_w_s) = if wh.norm() < 1e-4 {
        let z = w2 * h * h;
        (
            1.0 - z / 2.0 + z * z / 24.0,
            h * (1.0 - z / 6.0 + z * z / 120.0),
            -w2 * h * (1.0 - z / 6.0),
        )
    } else {
        let s = wh.sin();
        (wh.cos(), s / w, -w * s)
    };
    RegionMatrix {
        matrix: [[c, s_over_w], [minus_w_s, c]],
        x0,
        x1,
    }
}

pub fn jump_matrix(jumps: &JumpParameters, site: JumpSite, lambda: Complex64) -> Mat2 {
    jumps.transfer(site, lambda)
}

/// Transfer from `x = 0` to `x`; at a jump point the left limit.
pub fn oracle_propagate_to(
    profile: &DensityProfile,
    jumps: &JumpParameters,
    lambda: Complex64,
    q_values: [f64; 3],
    x: f64,
) -> Mat2 {
    let mut total = identity();
    for (region, &q) in q_values.iter().enumerate() {
        let (lo, hi) = profile.region_bounds(region);
        let end = hi.min(x);
        let r = region_matrix(lambda, profile.eta(region), q, lo, end);
        total = mat_mul(&r.matrix, &total);
        if x <= hi || region == 2 {
            break;
        }
        let site = if region == 0 { JumpSite::First } else { JumpSite::Second };
        total = mat_mul(&jump_matrix(jumps, site, lambda), &total);
    }
    total
}

/// Total matrix mapping `(y, y')(0)` to `(y, y')(π)`.
pub fn oracle_propagate(
    profile: &DensityProfile,
    jumps: &JumpParameters,
    lambda: Complex64,
    q_values: [f64; 3],
) -> Mat2 {
    oracle_propagate_to(profile, jumps, lambda, q_values, PI)
}

/// `Δ(λ) = −φ(π, λ)`, the `(0, 0)` entry of the total matrix negated.
pub fn oracle_delta(
    profile: &DensityProfile,
    jumps: &JumpParameters,
    lambda: Complex64,
    q_values: [f64; 3],
) -> Complex64 {
    -oracle_propagate(profile, jumps, lambda, q_values)[0][0]
}

/// `M(λ) = ψ(0)/ψ'(0)`. Inverting the total matrix gives
/// `(ψ, ψ')(0) = (−T₀₁, T₀₀)`.
pub fn oracle_weyl(
    profile: &DensityProfile,
    jumps: &JumpParameters,
    lambda: Complex64,
    q_values: [f64; 3],
) -> Complex64 {
    let t = oracle_propagate(profile, jumps, lambda, q_values);
    -t[0][1] / t[0][0]
}

/// Region constants of `q` when `p ≡ 0` and `q` does not vary inside any
/// density region.
pub fn region_constants(problem: &PencilProblem) -> Option<[f64; 3]> {
    if !problem.p.is_zero() {
        return None;
    }
    problem
        .q
        .region_constants(problem.density.p1, problem.density.p2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn trivial_profile_is_a_rotation() {
        let p = fixtures::trivial();
        let t = oracle_propagate(&p.density, &p.jumps, c(1.0), [0.0; 3]);
        assert!(close(t[0][0], c(-1.0), 1e-14));
        assert!(close(t[0][1], c(0.0), 1e-14));
        assert!(close(t[1][0], c(0.0), 1e-14));
        assert!(close(t[1][1], c(-1.0), 1e-14));
        assert!(close(oracle_delta(&p.density, &p.jumps, c(1.0), [0.0; 3]), c(1.0), 1e-14));
        assert!(oracle_delta(&p.density, &p.jumps, c(0.5), [0.0; 3]).norm() < 1e-15);
    }

    #[test]
    fn zero_lambda_scales_constants() {
        let p = fixtures::real_jump();
        let t = oracle_propagate(&p.density, &p.jumps, c(0.0), [0.0; 3]);
        assert!(close(t[0][0], c(1.5 * 0.8), 1e-14));
        assert!(close(t[1][0], c(0.0), 1e-14));
        assert!(close(t[1][1], c(1.0 / 1.2), 1e-14));
    }

    #[test]
    fn two_level_density_hand_expansion() {
        // δ = 1 on (0, 1), 4 on (1, π), identity jumps:
        // φ(π) = cos θ₁ cos θ₂ − sin θ₁ sin θ₂ / α, θ₁ = λ, θ₂ = 2λ(π − 1)
        let mut p = fixtures::trivial();
        p.density.alpha = 2.0;
        p.density.beta = 2.0;
        let lam = 1.3;
        let (t1, t2) = (lam, 2.0 * lam * (PI - 1.0));
        let expect = -(t1.cos() * t2.cos() - t1.sin() * t2.sin() / 2.0);
        let got = oracle_delta(&p.density, &p.jumps, c(lam), [0.0; 3]);
        assert!(close(got, c(expect), 1e-13), "{got} vs {expect}");
    }

    #[test]
    fn determinants_are_one() {
        for (_, p) in fixtures::oracle_compatible() {
            let q = region_constants(&p).unwrap();
            for lam in [c(0.0), c(2.5), Complex64::new(3.0, 0.7), c(40.0)] {
                let d = det(&oracle_propagate(&p.density, &p.jumps, lam, q));
                assert!(close(d, c(1.0), 1e-12), "{d}");
            }
        }
    }

    #[test]
    fn degenerate_frequency_uses_series() {
        // ω² = λ²η − q = 0 exactly on the first region
        let r = region_matrix(c(1.0), 1.0, 1.0, 0.0, 0.7);
        assert!(close(r.matrix[0][0], c(1.0), 1e-15));
        assert!(close(r.matrix[0][1], c(0.7), 1e-15));
        let near = region_matrix(c(1.0 + 1e-12), 1.0, 1.0, 0.0, 0.7);
        assert!(close(near.matrix[0][1], c(0.7), 1e-10));
        let d = det(&near.matrix);
        assert!(close(d, c(1.0), 1e-12));
    }

    #[test]
    fn negative_frequency_square_grows() {
        // ω² = −1: cosh
        let r = region_matrix(c(0.0), 1.0, 1.0, 0.0, 1.0);
        assert!(close(r.matrix[0][0], c(1f64.cosh()), 1e-14));
        assert!(close(r.matrix[0][1], c(1f64.sinh()), 1e-14));
    }

    #[test]
    fn trivial_weyl_is_minus_tangent() {
        let p = fixtures::trivial();
        let m = oracle_weyl(&p.density, &p.jumps, c(0.25), [0.0; 3]);
        assert!(close(m, c(-4.0), 1e-13), "{m}");
    }

    #[test]
    fn partial_propagation_stops_before_jump() {
        let p = fixtures::jump_fixture();
        let lam = c(1.3);
        let t = oracle_propagate_to(&p.density, &p.jumps, lam, [0.0; 3], 1.0);
        assert!(close(t[0][0], c(1.3f64.cos()), 1e-14));
    }
}
