//! Fast consistency suite: the trivial profile against closed forms and the
//! oracle fixtures against transfer matrices.

use std::f64::consts::PI;

use num_complex::Complex64;
use pencil_core::spectral::{self, SpectralOptions};
use pencil_core::weyl;
use pencil_core::{fixtures, oracle, MeshHint, Result, Shooter, StepControl};

struct Row {
    name: String,
    pass: bool,
    detail: String,
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn row(name: impl Into<String>, result: Result<(bool, String)>) -> Row {
    let (pass, detail) = result.unwrap_or_else(|e| (false, format!("error: {e}")));
    Row {
        name: name.into(),
        pass,
        detail,
    }
}

fn trivial_eigenvalues() -> Result<(bool, String)> {
    let s = spectral::find_eigenvalues(&fixtures::trivial(), 10.0, &SpectralOptions::default())?;
    let err = s
        .records
        .iter()
        .enumerate()
        .map(|(n, r)| (r.lambda_n - c(n as f64 + 0.5)).norm())
        .fold(0.0, f64::max);
    let dd = (s.records[0].ddelta - c(PI)).norm();
    Ok((
        s.records.len() == 10 && err <= 1e-8 && dd <= 1e-6,
        format!("max |λₙ−(n+½)| {err:.1e}, |Δ̇(½)−π| {dd:.1e}"),
    ))
}

fn trivial_weyl() -> Result<(bool, String)> {
    let err = (weyl::weyl_function(&fixtures::trivial(), c(0.25))? - c(-4.0)).norm();
    Ok((err <= 1e-8, format!("|M(0.25)+4| {err:.1e}")))
}

fn oracle_match(id: &str) -> Result<(bool, String)> {
    let p = fixtures::by_id(id).expect("known fixture");
    let q = oracle::region_constants(&p).expect("oracle fixture");
    let grid: Vec<Complex64> = (0..60).map(|k| Complex64::new(0.25 + 0.5 * k as f64, 0.1 * (k % 3) as f64)).collect();
    let rows = spectral::det_scan(&p, &grid, &StepControl::with_tolerance(1e-11))?;
    let mut worst = 0.0f64;
    for r in rows {
        let o = oracle::oracle_delta(&p.density, &p.jumps, r.lambda, q);
        worst = worst.max((r.delta - o).norm() / 1e-8_f64.max(1e-8 * o.norm()));
    }
    let m_lam = Complex64::new(1.7, 0.3);
    let m_err = (weyl::weyl_function_with(&p, m_lam, &StepControl::with_tolerance(1e-11))?
        - oracle::oracle_weyl(&p.density, &p.jumps, m_lam, q))
    .norm();
    Ok((
        worst <= 1.0 && m_err <= 1e-8,
        format!("Δ error/tol {worst:.2}, M error {m_err:.1e}"),
    ))
}

fn spectral_identities(id: &str) -> Result<(bool, String)> {
    let p = fixtures::by_id(id).expect("known fixture");
    let opts = SpectralOptions::default();
    let s = spectral::find_eigenvalues(&p, 10.0, &opts)?;
    let l4 = s
        .records
        .iter()
        .map(|r| spectral::check_lemma4(r).relative_error)
        .fold(0.0, f64::max);
    let recs = &s.records[..s.records.len().min(5)];
    let mut orth = 0.0f64;
    for n in 0..recs.len() {
        for k in n + 1..recs.len() {
            orth = orth.max(spectral::check_orthogonality(&p, &recs[n], &recs[k], &opts)?.residual);
        }
    }
    let sh = Shooter::with_control(&p, StepControl::with_tolerance(1e-11))?;
    let mesh = MeshHint::uniform(&p, 4);
    let lam = Complex64::new(3.3, 0.2);
    let wr = sh.solve_psi(lam, &mesh)?.wronskian_variation(&sh.solve_phi(lam, &mesh)?)?;
    Ok((
        l4 <= 1e-5 && orth <= 1e-6 && wr <= 1e-8,
        format!("Δ̇ identity {l4:.1e}, orthogonality {orth:.1e}, Wronskian {wr:.1e}"),
    ))
}

/// Prints the table; true when every row passed.
pub fn run() -> bool {
    let mut rows = vec![
        row("trivial eigenvalues", trivial_eigenvalues()),
        row("trivial Weyl function", trivial_weyl()),
    ];
    for (id, _) in fixtures::oracle_compatible() {
        if id != "trivial" {
            rows.push(row(format!("oracle {id}"), oracle_match(id)));
        }
    }
    for (id, _) in fixtures::all() {
        rows.push(row(format!("identities {id}"), spectral_identities(id)));
    }
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(0);
    for r in &rows {
        println!(
            "{}  {:width$}  {}",
            if r.pass { "PASS" } else { "FAIL" },
            r.name,
            r.detail
        );
    }
    rows.iter().all(|r| r.pass)
}
