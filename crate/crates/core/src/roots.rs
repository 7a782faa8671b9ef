//! Scalar root finders: Brent's method on a real bracket and a secant
//! iteration in the complex plane.

use num_complex::Complex64;

use crate::error::Result;

/// Brent's method on `[a, b]` with `f(a)·f(b) ≤ 0`. Returns `Ok(None)` when
/// the bracket is invalid or the iteration budget runs out.
pub fn brent<F>(mut f: F, a: f64, b: f64, fa: f64, fb: f64, xtol: f64, max_iter: usize) -> Result<Option<f64>>
where
    F: FnMut(f64) -> Result<f64>,
{
    if fa == 0.0 {
        return Ok(Some(a));
    }
    if fb == 0.0 {
        return Ok(Some(b));
    }
    if fa.signum() == fb.signum() {
        return Ok(None);
    }
    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(Some(b));
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = d;
            }
        } else {
            d = m;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b)?;
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexRoot {
    pub root: Complex64,
    pub value: Complex64,
    pub iterations: usize,
}

/// Secant iteration from `x0`, `x1`. Stops when the step falls below
/// `xtol·max(1, |x|)` or `|f| ≤ ftol`; returns `Ok(None)` when the iteration
/// stalls on a flat secant or runs out of budget.
pub fn complex_secant<F>(
    mut f: F,
    x0: Complex64,
    x1: Complex64,
    ftol: f64,
    xtol: f64,
    max_iter: usize,
) -> Result<Option<ComplexRoot>>
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    let (mut xa, mut xb) = (x0, x1);
    let mut fa = f(xa)?;
    let mut fb = f(xb)?;
    if fa.norm() < fb.norm() {
        std::mem::swap(&mut xa, &mut xb);
        std::mem::swap(&mut fa, &mut fb);
    }
    for it in 1..=max_iter {
        if fb.norm() <= ftol {
            return Ok(Some(ComplexRoot {
                root: xb,
                value: fb,
                iterations: it,
            }));
        }
        let denom = fb - fa;
        if denom.norm() == 0.0 || !denom.is_finite() {
            return Ok(None);
        }
        let step = fb * (xb - xa) / denom;
        xa = xb;
        fa = fb;
        xb -= step;
        if !xb.is_finite() {
            return Ok(None);
        }
        fb = f(xb)?;
        if step.norm() <= xtol * xb.norm().max(1.0) {
            return Ok(Some(ComplexRoot {
                root: xb,
                value: fb,
                iterations: it,
            }));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn brent_finds_cosine_zero() {
        let f = |x: f64| Ok(x.cos());
        let r = brent(f, 1.0, 2.0, 1f64.cos(), 2f64.cos(), 1e-15, 100).unwrap().unwrap();
        assert!((r - PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn brent_rejects_non_bracket() {
        let r = brent(|x: f64| Ok(x * x + 1.0), -1.0, 1.0, 2.0, 2.0, 1e-12, 50).unwrap();
        assert!(r.is_none());
    }

    #[test]
    fn brent_handles_flat_then_steep() {
        let f = |x: f64| Ok((x - 0.3).powi(3));
        let r = brent(f, 0.0, 1.0, -0.027, 0.343, 1e-14, 200).unwrap().unwrap();
        assert!((r - 0.3).abs() < 1e-4);
    }

    #[test]
    fn secant_finds_complex_root() {
        let target = Complex64::new(1.2, 0.03);
        let f = |z: Complex64| Ok((z - target) * (z + 2.0));
        let r = complex_secant(f, Complex64::new(1.0, 0.0), Complex64::new(1.1, 0.0), 1e-15, 1e-15, 50)
            .unwrap()
            .unwrap();
        assert!((r.root - target).norm() < 1e-13);
    }

    #[test]
    fn secant_reports_stall() {
        let f = |_: Complex64| Ok(Complex64::new(1.0, 0.0));
        let r = complex_secant(f, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), 1e-12, 1e-12, 10).unwrap();
        assert!(r.is_none());
    }
}
