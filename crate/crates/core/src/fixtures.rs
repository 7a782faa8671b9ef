//! Reference problems shared by tests, the acceptance suite and `selfcheck`.

use crate::model::{CoefficientFunction, DensityProfile, JumpParameters, PencilProblem};

fn jump_layout() -> DensityProfile {
    DensityProfile {
        alpha: 2.0,
        beta: 3.0,
        p1: 1.0,
        p2: 2.0,
    }
}

fn jump_data() -> JumpParameters {
    JumpParameters {
        alpha1: 1.5,
        gamma1: 0.2,
        alpha2: 0.8,
        gamma2: -0.1,
    }
}

/// `δ ≡ 1`, identity jumps, `p = q = 0`: `Δ(λ) = −cos λπ`. Needs the
/// identity relaxation.
pub fn trivial() -> PencilProblem {
    PencilProblem::new(
        CoefficientFunction::zero(),
        CoefficientFunction::zero(),
        DensityProfile {
            alpha: 1.0,
            beta: 1.0,
            p1: 1.0,
            p2: 2.0,
        },
        JumpParameters::identity(),
    )
    .with_identity_allowed()
}

/// `α = 2, β = 3, p1 = 1, p2 = 2`, jumps `(1.5, 0.2, 0.8, −0.1)`, `p = q = 0`.
pub fn jump_fixture() -> PencilProblem {
    PencilProblem::new(
        CoefficientFunction::zero(),
        CoefficientFunction::zero(),
        jump_layout(),
        jump_data(),
    )
}

/// [`jump_fixture`] with `γ₁ = γ₂ = 0`.
pub fn real_jump() -> PencilProblem {
    let mut p = jump_fixture();
    p.jumps.gamma1 = 0.0;
    p.jumps.gamma2 = 0.0;
    p
}

/// [`real_jump`] with `q ≡ 1`.
pub fn q_fixture() -> PencilProblem {
    let mut p = real_jump();
    p.q = CoefficientFunction::constant(1.0);
    p
}

/// [`jump_fixture`] with region-wise `q = 0.5, −0.3, 1.2`.
pub fn q_gamma() -> PencilProblem {
    let mut p = jump_fixture();
    p.q = CoefficientFunction::piecewise_constant(vec![1.0, 2.0], vec![0.5, -0.3, 1.2]);
    p
}

/// [`real_jump`] with `p(x) = 0.2 + 0.1x` and a step in `q`.
pub fn p_fixture() -> PencilProblem {
    let mut p = real_jump();
    p.p = CoefficientFunction::PiecewisePolynomial {
        breakpoints: vec![],
        values: vec![vec![0.2, 0.1]],
    };
    p.q = CoefficientFunction::piecewise_constant(vec![1.5], vec![1.0, 0.5]);
    p
}

/// Impedance-matched jumps `α₁ = 1/√α`, `α₂ = √(α/β)`, `γ = 0`, with `q ≡ 1`.
/// No wave is reflected at either jump, so the leading-order solution is a
/// single travelling pair and its `1/λ` correction has no beating.
pub fn matched() -> PencilProblem {
    let mut p = real_jump();
    p.jumps.alpha1 = 1.0 / p.density.alpha.sqrt();
    p.jumps.alpha2 = (p.density.alpha / p.density.beta).sqrt();
    p.q = CoefficientFunction::constant(1.0);
    p
}

/// Every fixture, by id.
pub fn all() -> Vec<(&'static str, PencilProblem)> {
    vec![
        ("trivial", trivial()),
        ("jump", jump_fixture()),
        ("real-jump", real_jump()),
        ("q-const", q_fixture()),
        ("q-gamma", q_gamma()),
        ("p-linear", p_fixture()),
        ("matched", matched()),
    ]
}

/// Fixtures with `p ≡ 0` and region-wise constant `q`, which the oracle covers.
pub fn oracle_compatible() -> Vec<(&'static str, PencilProblem)> {
    all()
        .into_iter()
        .filter(|(_, p)| crate::oracle::region_constants(p).is_some())
        .collect()
}

pub fn by_id(id: &str) -> Option<PencilProblem> {
    all().into_iter().find(|(k, _)| *k == id).map(|(_, p)| p)
}
