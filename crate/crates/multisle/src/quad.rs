//! Small adaptive Simpson integrator for smooth one-dimensional integrands.
//! Endpoint singularities must be removed by substitution at the call site.

use crate::error::{Error, Result};

fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    h / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    m: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    if !(flm.is_finite() && frm.is_finite()) {
        return Err(Error::numerical(format!("integrand not finite near [{a}, {b}]")));
    }
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let delta = left + right - whole;
    if depth == 0 {
        return Err(Error::numerical("adaptive quadrature recursion limit"));
    }
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    let l = recurse(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)?;
    let r = recurse(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)?;
    Ok(l + r)
}

/// ∫ₐᵇ f to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    if !(fa.is_finite() && fm.is_finite() && fb.is_finite()) {
        return Err(Error::numerical("integrand not finite at initial nodes"));
    }
    let whole = simpson(fa, fm, fb, b - a);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 60)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_exact() {
        let v = adaptive_simpson(&|x| x * x * x, 0.0, 2.0, 1e-12).unwrap();
        assert_relative_eq!(v, 4.0, max_relative = 1e-12);
    }

    #[test]
    fn oscillatory() {
        let v = adaptive_simpson(&|x: f64| x.sin(), 0.0, PI, 1e-12).unwrap();
        assert_relative_eq!(v, 2.0, max_relative = 1e-10);
    }

    #[test]
    fn steep_gaussian() {
        let v = adaptive_simpson(&|x: f64| (-x * x / 2e-4).exp(), -1.0, 1.0, 1e-13).unwrap();
        assert_relative_eq!(v, (2.0 * PI * 1e-4).sqrt(), max_relative = 1e-8);
    }

    #[test]
    fn rejects_nan() {
        assert!(adaptive_simpson(&|x: f64| x.ln(), 0.0, 1.0, 1e-10).is_err());
    }
}
