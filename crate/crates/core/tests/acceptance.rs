//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p pencil-core --test acceptance`.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use pencil_core::inverse::{distinguishability, fit, FitOptions, ParameterFamily};
use pencil_core::quadrature::GaussLegendre;
use pencil_core::spectral::*;
use pencil_core::weyl::*;
use pencil_core::propagator::Side;
use pencil_core::{fixtures, oracle, MeshHint, PencilProblem, Result, Shooter, StepControl};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        pass,
        detail: detail.into(),
    })
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn trivial_roots() -> Result<Outcome> {
    let s = find_eigenvalues(&fixtures::trivial(), 10.0, &SpectralOptions::default())?;
    let worst = s
        .records
        .iter()
        .enumerate()
        .map(|(n, r)| (r.lambda_n - c(n as f64 + 0.5)).norm())
        .fold(0.0, f64::max);
    verdict(
        s.records.len() == 10 && worst <= 1e-8,
        format!("{} roots, max |λₙ − (n+½)| = {worst:.2e}", s.records.len()),
    )
}

fn oracle_equivalence() -> Result<Outcome> {
    let ctl = SpectralOptions::default().control;
    let grid: Vec<Complex64> = (0..500).map(|k| c(0.1 * (k + 1) as f64)).collect();
    let mut worst = 0.0f64;
    for p in [fixtures::jump_fixture(), fixtures::real_jump(), fixtures::q_gamma()] {
        let q = oracle::region_constants(&p).expect("oracle fixture");
        let samples = det_scan(&p, &grid, &ctl)?;
        for s in samples {
            let o = oracle::oracle_delta(&p.density, &p.jumps, s.lambda, q);
            worst = worst.max((s.delta - o).norm() / 1e-8_f64.max(1e-8 * o.norm()));
        }
    }
    verdict(worst <= 1.0, format!("3 fixtures × 500 points on (0, 50], worst error / tolerance = {worst:.3}"))
}

fn wronskian_constancy() -> Result<Outcome> {
    let all = fixtures::all();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let (_, p) = &all[rng.random_range(0..all.len())];
        let lam = Complex64::new(rng.random_range(0.1..30.0), rng.random_range(-1.0..1.0));
        let sh = Shooter::with_control(p, StepControl::with_tolerance(1e-11))?;
        let mesh = MeshHint::uniform(p, 6);
        let phi = sh.solve_phi(lam, &mesh)?;
        let psi = sh.solve_psi(lam, &mesh)?;
        worst = worst.max(psi.wronskian_variation(&phi)?);
    }
    verdict(worst <= 1e-8, format!("20 random pairs, max relative variation {worst:.2e}"))
}

fn derivative_identity() -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut short = Vec::new();
    for (id, p) in fixtures::all() {
        let s = find_eigenvalues(&p, 14.0, &SpectralOptions::default())?;
        if s.records.len() < 10 {
            short.push(id);
        }
        for r in s.records.iter().take(10) {
            worst = worst.max(check_lemma4(r).relative_error);
        }
    }
    let s = find_eigenvalues(&fixtures::trivial(), 1.0, &SpectralOptions::default())?;
    let hand = (s.records[0].ddelta - c(PI)).norm();
    verdict(
        short.is_empty() && worst <= 1e-5 && hand <= 1e-6,
        format!("max relative error {worst:.2e}; trivial |Δ̇(λ₀) − π| = {hand:.2e}; short spectra {short:?}"),
    )
}

fn orthogonality() -> Result<Outcome> {
    let opts = SpectralOptions::default();
    let mut worst = 0.0f64;
    for (_, p) in fixtures::all() {
        let s = find_eigenvalues(&p, 14.0, &opts)?;
        let recs = &s.records[..9];
        for n in 0..recs.len() {
            for k in n + 1..recs.len() {
                worst = worst.max(check_orthogonality(&p, &recs[n], &recs[k], &opts)?.residual);
            }
        }
    }
    verdict(worst <= 1e-6, format!("all fixtures, pairs n<k≤8, max residual {worst:.2e}"))
}

fn asymptotics() -> Result<Outcome> {
    let opts = SpectralOptions::default();
    let gl = GaussLegendre::new(16);
    let mut d_err = 0.0f64;
    for (_, p) in fixtures::all() {
        let d: f64 = (0..3)
            .map(|r| {
                let (a, b) = p.density.region_bounds(r);
                gl.integrate(a, b, |x| p.evaluate_delta(x).unwrap().sqrt())
            })
            .sum();
        d_err = d_err.max((d - p.density.optical_length()).abs());
    }
    let mut pass = d_err <= 1e-12;
    let mut parts = vec![format!("|D − ∫√δ| ≤ {d_err:.1e}")];
    for id in ["q-const", "q-gamma", "p-linear"] {
        let p = fixtures::by_id(id).unwrap();
        let rows = asymptotic_table(&p, 60, &opts)?;
        let ratio = scaled_max(&rows, 45, 60) / scaled_max(&rows, 30, 45);
        pass &= ratio <= 1.2;
        parts.push(format!("{id} growth {ratio:.3}"));
        let d = p.density.optical_length();
        let literal = |lo: usize, hi: usize| {
            rows.iter()
                .filter(|r| r.n >= lo && r.n <= hi)
                .map(|r| ((r.lambda_n - c(r.n as f64 * PI / d)) * r.lambda_n0).norm())
                .fold(0.0, f64::max)
        };
        println!(
            "INFO  asymptotics {id}: max|(λₙ−nπ/D)·λₙ⁰| grows {:.3} (the bounded offset ψ₁(n) is not subtracted)",
            literal(45, 60) / literal(30, 45)
        );
    }
    verdict(pass, parts.join("; "))
}

fn weyl_identities() -> Result<Outcome> {
    let ctl = StepControl::with_tolerance(1e-11);
    let (mut decomp, mut wr, mut ends) = (0.0f64, 0.0f64, 0.0f64);
    for (_, p) in fixtures::all() {
        let sh = Shooter::with_control(&p, ctl)?;
        let mesh = MeshHint::uniform(&p, 8);
        for lam in [Complex64::new(1.3, 0.2), Complex64::new(4.6, -0.3), c(2.05), Complex64::new(9.0, 0.5)] {
            let m = weyl_function_with(&p, lam, &ctl)?;
            let big = weyl_solution_with(&p, lam, &mesh, &ctl)?;
            let phi = sh.solve_phi(lam, &mesh)?;
            let s = sh.solve_s(lam, &mesh)?;
            for ((f, a), b) in big.states().zip(phi.states()).zip(s.states()) {
                decomp = decomp.max((f.y - (b.y + m * a.y)).norm() / f.y.norm().max(1.0));
            }
            for w in phi.wronskian_with(&big)? {
                wr = wr.max((w - c(1.0)).norm());
            }
            ends = ends.max((big.first().yprime - c(1.0)).norm()).max(big.last().y.norm());
        }
    }
    let m = (weyl_function(&fixtures::trivial(), c(0.25))? - c(-4.0)).norm();
    verdict(
        decomp <= 1e-8 && wr <= 1e-8 && ends <= 1e-8 && m <= 1e-8,
        format!("Φ−S−Mφ {decomp:.1e}, W[φ,Φ]−1 {wr:.1e}, endpoints {ends:.1e}, trivial M(0.25)+4 {m:.1e}"),
    )
}

fn recovery() -> Result<Outcome> {
    let grid = default_grid();
    let ctl = FitOptions::default().control;
    let budget = Duration::from_secs(120);

    let truth = fixtures::q_fixture();
    let targets = sample_weyl_grid(&truth, &grid, &[], DEFAULT_EXCLUSION_RADIUS, &ctl)?;
    let fam = ParameterFamily::new(vec!["q_const".into()], vec![(0.0, 3.0)], fixtures::real_jump())?;
    let t0 = Instant::now();
    let r1 = fit(&fam, &targets, &FitOptions::default())?;
    let dt1 = t0.elapsed();
    let e1 = (r1.get("q_const").unwrap() - 1.0).abs();

    let truth = fixtures::jump_fixture();
    let targets = sample_weyl_grid(&truth, &grid, &[], DEFAULT_EXCLUSION_RADIUS, &ctl)?;
    // the base supplies every parameter outside the family; starts are random
    let fam = ParameterFamily::new(
        vec!["alpha1".into(), "gamma1".into()],
        vec![(0.5, 3.0), (-1.0, 1.0)],
        truth.clone(),
    )?;
    let t0 = Instant::now();
    let r2 = fit(&fam, &targets, &FitOptions::default())?;
    let dt2 = t0.elapsed();
    let e2 = (r2.get("alpha1").unwrap() - 1.5).abs().max((r2.get("gamma1").unwrap() - 0.2).abs());

    let mut other = truth.clone();
    other.jumps.gamma1 = 0.3;
    let gap = distinguishability(&truth, &other, &grid, &ctl)?.max_gap;

    verdict(
        e1 <= 1e-4 && e2 <= 1e-3 && dt1 < budget && dt2 < budget && gap > 1e-6,
        format!(
            "q_const err {e1:.1e} in {:.1}s; (α₁,γ₁) err {e2:.1e} in {:.1}s; γ₁ 0.2 vs 0.3 gap {gap:.3e}",
            dt1.as_secs_f64(),
            dt2.as_secs_f64()
        ),
    )
}

fn leading_order_errors(p: &PencilProblem) -> Result<Vec<f64>> {
    let sh = Shooter::with_control(p, StepControl::with_tolerance(1e-12))?;
    let mesh = MeshHint::uniform(p, 400);
    [20.0, 40.0, 80.0]
        .iter()
        .map(|&l| {
            let lam = c(l);
            let tr = sh.solve_phi(lam, &mesh)?;
            // the model takes right limits at the jumps
            Ok(tr
                .nodes
                .iter()
                .filter(|n| n.side != Side::Pre)
                .map(|n| (n.state.y - leading_order_phi(p, n.state.x, lam)).norm())
                .fold(0.0, f64::max))
        })
        .collect()
}

fn leading_order() -> Result<Outcome> {
    for id in ["q-const", "q-gamma"] {
        let e = leading_order_errors(&fixtures::by_id(id).unwrap())?;
        println!(
            "INFO  leading order {id}: errors {:.3e} {:.3e} {:.3e}, ratios {:.2} {:.2} (reflected waves beat)",
            e[0],
            e[1],
            e[2],
            e[0] / e[1],
            e[1] / e[2]
        );
    }
    let e = leading_order_errors(&fixtures::matched())?;
    let (r1, r2) = (e[0] / e[1], e[1] / e[2]);
    verdict(
        r1 >= 1.8 && r2 >= 1.8,
        format!(
            "matched fixture, errors {:.3e} {:.3e} {:.3e}, ratios {r1:.2} {r2:.2}",
            e[0], e[1], e[2]
        ),
    )
}

type Check = fn() -> Result<Outcome>;

fn main() {
    let checks: [(&str, Check, Option<Duration>); 9] = [
        ("1 trivial-profile eigenvalues", trivial_roots, Some(Duration::from_secs(5))),
        ("2 oracle equivalence", oracle_equivalence, Some(Duration::from_secs(30))),
        ("3 Wronskian constancy", wronskian_constancy, None),
        ("4 Δ̇(λₙ) = −2λₙβₙαₙ", derivative_identity, None),
        ("5 orthogonality", orthogonality, None),
        ("6 eigenvalue asymptotics", asymptotics, None),
        ("7 Weyl identities", weyl_identities, None),
        ("8 recovery from Weyl samples", recovery, None),
        ("9 large-λ leading order", leading_order, None),
    ];
    let mut failed = 0;
    for (name, check, budget) in checks {
        let t0 = Instant::now();
        let outcome = check();
        let dt = t0.elapsed();
        let (pass, detail) = match outcome {
            Ok(o) => {
                let in_time = budget.is_none_or(|b| dt < b);
                let extra = if in_time { String::new() } else { format!("; over the {budget:?} budget") };
                (o.pass && in_time, format!("{}{extra}", o.detail))
            }
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {name}: {detail} [{:.2}s]",
            if pass { "PASS" } else { "FAIL" },
            dt.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
