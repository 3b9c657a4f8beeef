//! Gamma-family helpers and the Gauss hypergeometric function ₂F₁.
//!
//! ₂F₁ is evaluated by its power series for arguments `x ≤ 1/2`. For
//! `x > 1/2` a linear transformation in `w = 1 − x` restores geometric
//! convergence; the degenerate cases (integer `c − a − b`, terminating
//! series) get their own branches. Evaluations track the largest term
//! against the final sum and fail loudly on catastrophic cancellation
//! instead of returning garbage.

use crate::error::{Error, Result};
use std::f64::consts::PI;

const LANCZOS_G0: f64 = 0.999_999_999_999_809_93;
const LANCZOS: [f64; 8] = [
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of Γ(x) for x > 0 (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x <= 0.0 {
        return f64::NAN;
    }
    if x < 0.5 {
        // reflection keeps the approximation in its accurate range
        return (PI / sin_pi(x)).ln() - ln_gamma(1.0 - x);
    }
    let mut acc = LANCZOS_G0;
    for (i, &c) in LANCZOS.iter().enumerate() {
        acc += c / (x + i as f64);
    }
    let t = x + 6.5;
    0.5 * (2.0 * PI).ln() + (x - 0.5) * t.ln() - t + acc.ln()
}

/// sin(πx) with the argument reduced first, accurate for large |x|.
fn sin_pi(x: f64) -> f64 {
    let fl = x.floor();
    let r = x - fl;
    let s = (PI * r).sin();
    if (fl as i64) % 2 == 0 {
        s
    } else {
        -s
    }
}

/// `(ln|Γ(x)|, sign of Γ(x))`; sign is 0 at poles (nonpositive integers).
pub fn ln_gamma_signed(x: f64) -> (f64, f64) {
    if x > 0.0 {
        return (ln_gamma(x), 1.0);
    }
    if x == x.floor() {
        return (f64::INFINITY, 0.0);
    }
    // Γ(x)Γ(1−x) = π / sin(πx)
    let s = sin_pi(x);
    let ln_abs = PI.ln() - s.abs().ln() - ln_gamma(1.0 - x);
    (ln_abs, s.signum())
}

/// Γ(x) for any non-pole real x.
pub fn gamma(x: f64) -> f64 {
    let (ln_abs, sign) = ln_gamma_signed(x);
    sign * ln_abs.exp()
}

/// Digamma ψ(x) = Γ'(x)/Γ(x).
pub fn digamma(x: f64) -> f64 {
    if x <= 0.0 {
        if x == x.floor() {
            return f64::NAN;
        }
        // ψ(x) = ψ(1−x) − π cot(πx)
        return digamma(1.0 - x) - PI * (PI * x).tan().recip();
    }
    let mut acc = 0.0;
    let mut y = x;
    while y < 10.0 {
        acc -= 1.0 / y;
        y += 1.0;
    }
    let inv = 1.0 / y;
    let inv2 = inv * inv;
    acc + y.ln()
        - 0.5 * inv
        - inv2
            * (1.0 / 12.0
                - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 / 132.0))))
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 1e-12 && (x - x.round()).abs() < 1e-9
}

fn near_integer(x: f64) -> Option<i64> {
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        Some(r as i64)
    } else {
        None
    }
}

const SERIES_EPS: f64 = 1e-16;
const SERIES_MAX_TERMS: usize = 8000;
const COND_LIMIT: f64 = 1e13;

/// Gauss series Σ (a)ₙ(b)ₙ/((c)ₙ n!) xⁿ with conditioning tracked.
fn gauss_series(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut max_abs = 1.0f64;
    let mut small_streak = 0;
    for n in 0..SERIES_MAX_TERMS {
        let nf = n as f64;
        let denom = (c + nf) * (nf + 1.0);
        if denom == 0.0 {
            return Err(Error::domain("hypergeometric series hit a pole of (c)_n"));
        }
        term *= (a + nf) * (b + nf) / denom * x;
        if term == 0.0 {
            break; // terminating series
        }
        sum += term;
        max_abs = max_abs.max(term.abs());
        if term.abs() < SERIES_EPS * sum.abs().max(1e-300) {
            small_streak += 1;
            if small_streak >= 2 {
                break;
            }
        } else {
            small_streak = 0;
        }
        if n + 1 == SERIES_MAX_TERMS {
            return Err(Error::numerical(format!(
                "hypergeometric series did not converge (a={a}, b={b}, c={c}, x={x})"
            )));
        }
    }
    if max_abs > COND_LIMIT * sum.abs().max(1e-300) {
        return Err(Error::numerical(format!(
            "hypergeometric series cancellation (a={a}, b={b}, c={c}, x={x}; max term {max_abs:e} vs sum {sum:e})"
        )));
    }
    Ok(sum)
}

#[derive(Debug, Clone)]
enum Branch {
    /// a or b nonpositive integer: the series terminates for every x.
    Polynomial,
    /// Euler transform terminates: F = (1−x)^d F(c−a, c−b; c; x).
    EulerPolynomial { d: f64 },
    /// Generic two-term linear transformation in w = 1−x.
    Connection { d: f64, coef1: f64, coef2: f64 },
    /// c − a − b = m ≥ 0: logarithmic expansion in w = 1−x.
    Log { m: i32 },
    /// c − a − b = −m < 0: Euler transform first, then the m ≥ 0 expansion
    /// with parameters (c−a, c−b).
    EulerLog { m: i32 },
}

/// Prepared ₂F₁(a, b; c; ·) evaluator for x ∈ [0, 1).
#[derive(Debug, Clone)]
pub struct Hyp2f1 {
    a: f64,
    b: f64,
    c: f64,
    branch: Branch,
}

impl Hyp2f1 {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if is_nonpositive_integer(c) {
            return Err(Error::domain(format!("c = {c} is a nonpositive integer")));
        }
        let branch = if is_nonpositive_integer(a) || is_nonpositive_integer(b) {
            Branch::Polynomial
        } else if is_nonpositive_integer(c - a) || is_nonpositive_integer(c - b) {
            Branch::EulerPolynomial { d: c - a - b }
        } else {
            let d = c - a - b;
            match near_integer(d) {
                Some(m) if m >= 0 => Branch::Log { m: m as i32 },
                Some(m) => Branch::EulerLog { m: (-m) as i32 },
                None => {
                    // F(a,b;c;x) = coef1·F(a,b;a+b−c+1;w) + coef2·w^d·F(c−a,c−b;d+1;w)
                    let (l1, s1) = ln_gamma_signed(d);
                    let (l2, s2) = ln_gamma_signed(c - a);
                    let (l3, s3) = ln_gamma_signed(c - b);
                    let lc = ln_gamma(c);
                    let coef1 = s1 * s2 * s3 * (lc + l1 - l2 - l3).exp();
                    let (m1, t1) = ln_gamma_signed(-d);
                    let (m2, t2) = ln_gamma_signed(a);
                    let (m3, t3) = ln_gamma_signed(b);
                    let coef2 = t1 * t2 * t3 * (lc + m1 - m2 - m3).exp();
                    Branch::Connection { d, coef1, coef2 }
                }
            }
        };
        Ok(Hyp2f1 { a, b, c, branch })
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&x) {
            return Err(Error::domain(format!("hypergeometric argument {x} outside [0,1)")));
        }
        if x == 0.0 {
            return Ok(1.0);
        }
        if matches!(self.branch, Branch::Polynomial) || x <= 0.5 {
            return gauss_series(self.a, self.b, self.c, x);
        }
        let w = 1.0 - x;
        match self.branch {
            Branch::Polynomial => unreachable!(),
            Branch::EulerPolynomial { d } => {
                let f = gauss_series(self.c - self.a, self.c - self.b, self.c, x)?;
                Ok(w.powf(d) * f)
            }
            Branch::Connection { d, coef1, coef2 } => {
                let t1 = coef1 * gauss_series(self.a, self.b, 1.0 - d, w)?;
                let t2 = coef2 * w.powf(d) * gauss_series(self.c - self.a, self.c - self.b, 1.0 + d, w)?;
                let sum = t1 + t2;
                if (t1.abs() + t2.abs()) > COND_LIMIT * sum.abs().max(1e-300) {
                    return Err(Error::numerical(
                        "hypergeometric connection formula cancellation".to_string(),
                    ));
                }
                Ok(sum)
            }
            Branch::Log { m } => log_series(self.a, self.b, m, w),
            Branch::EulerLog { m } => {
                let f = log_series(self.c - self.a, self.c - self.b, m, w)?;
                Ok(w.powf(-(m as f64)) * f)
            }
        }
    }

    /// `(factor, evaluator)` with F'(x) = factor · F(a+1, b+1; c+1; x).
    pub fn derivative(&self) -> Result<(f64, Hyp2f1)> {
        let factor = self.a * self.b / self.c;
        Ok((factor, Hyp2f1::new(self.a + 1.0, self.b + 1.0, self.c + 1.0)?))
    }
}

/// F(a, b; a+b+m; 1−w) for integer m ≥ 0 via the logarithmic expansion
/// around w = 0 (A&S 15.3.10 / 15.3.11).
fn log_series(a: f64, b: f64, m: i32, w: f64) -> Result<f64> {
    let mf = m as f64;
    let c = a + b + mf;
    let ln_w = w.ln();
    let lc = ln_gamma(c);

    // finite part: Γ(m)Γ(c)/(Γ(a+m)Γ(b+m)) Σ_{n<m} (a)_n(b)_n/(n!(1−m)_n) wⁿ
    let mut finite = 0.0;
    if m > 0 {
        let (la, sa) = ln_gamma_signed(a + mf);
        let (lb, sb) = ln_gamma_signed(b + mf);
        let pref = sa * sb * (ln_gamma(mf) + lc - la - lb).exp();
        let mut term = 1.0;
        let mut acc = 0.0;
        for n in 0..m {
            acc += term;
            let nf = n as f64;
            // next term; (1−m)_n gains the factor (1−m+n)
            if n + 1 < m {
                term *= (a + nf) * (b + nf) / ((nf + 1.0) * (1.0 - mf + nf)) * w;
            }
        }
        finite = pref * acc;
    }

    // logarithmic part
    let (la, sa) = ln_gamma_signed(a);
    let (lb, sb) = ln_gamma_signed(b);
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    let pref = -sign * sa * sb * (lc - la - lb).exp() * w.powi(m);

    // ψ-combination at n = 0
    let mut psi = -digamma(1.0) - digamma(mf + 1.0) + digamma(a + mf) + digamma(b + mf);
    let mut term = 1.0 / ln_gamma(mf + 1.0).exp(); // 1/m! at n = 0
    let mut acc = term * (ln_w + psi);
    let mut max_abs = acc.abs();
    for n in 0..SERIES_MAX_TERMS {
        let nf = n as f64;
        term *= (a + mf + nf) * (b + mf + nf) / ((nf + 1.0) * (nf + mf + 1.0)) * w;
        psi += -1.0 / (nf + 1.0) - 1.0 / (nf + mf + 1.0) + 1.0 / (a + mf + nf) + 1.0 / (b + mf + nf);
        let t = term * (ln_w + psi);
        acc += t;
        max_abs = max_abs.max(t.abs());
        if t.abs() < SERIES_EPS * acc.abs().max(1e-300) && n > 2 {
            break;
        }
        if n + 1 == SERIES_MAX_TERMS {
            return Err(Error::numerical("hypergeometric log-series did not converge"));
        }
    }
    if max_abs > COND_LIMIT * acc.abs().max(1e-300) {
        return Err(Error::numerical("hypergeometric log-series cancellation"));
    }
    let total = finite + pref * acc;
    Ok(total)
}

/// One-shot ₂F₁(a, b; c; x).
pub fn hyp2f1(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    Hyp2f1::new(a, b, c)?.eval(x)
}
