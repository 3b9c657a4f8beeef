//! Partition functions driving the multi-curve growth: the two-point power
//! laws, their mixture, the fully factorizable (chordal) product, and the
//! hypergeometric four-point pure blocks, together with conformal weights,
//! log-gradients, and the level-two null-vector residual check.
//!
//! Every admissible `Z` is positive on the ordered simplex `x_1 < … < x_n`,
//! translation invariant, and homogeneous of degree `h_{n−2m}(κ) − n·h_1(κ)`
//! with `2κ·h_m = m(2(m+2) − κ)`.

use crate::error::{Error, Result};
use crate::special::{ln_gamma, Hyp2f1};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

/// Conformal weight `h_m(κ) = m(2(m+2) − κ)/(2κ)`.
pub fn h_weight(m: u32, kappa: f64) -> Result<f64> {
    if kappa <= 0.0 {
        return Err(Error::domain(format!("kappa = {kappa} must be positive")));
    }
    let mf = m as f64;
    Ok(mf * (2.0 * (mf + 2.0) - kappa) / (2.0 * kappa))
}

/// Central charge `c = (6 − κ)(3κ − 8)/(16κ)`.
pub fn central_charge(kappa: f64) -> Result<f64> {
    if kappa <= 0.0 {
        return Err(Error::domain(format!("kappa = {kappa} must be positive")));
    }
    Ok((6.0 - kappa) * (3.0 * kappa - 8.0) / (16.0 * kappa))
}

/// Weight family and central charge at a fixed κ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConformalData {
    pub kappa: f64,
}

impl ConformalData {
    pub fn new(kappa: f64) -> Result<Self> {
        if kappa <= 0.0 {
            return Err(Error::domain("kappa must be positive"));
        }
        Ok(ConformalData { kappa })
    }

    pub fn h(&self, m: u32) -> f64 {
        h_weight(m, self.kappa).expect("kappa validated")
    }

    pub fn central_charge(&self) -> f64 {
        central_charge(self.kappa).expect("kappa validated")
    }
}

/// Harmonic (cross) ratio of four ordered boundary points,
/// `X = ((X1−X2)/(X1−X3)) · ((X4−X3)/(X4−X2)) ∈ (0,1)`.
/// `x4 = None` places the fourth point at infinity (second factor → 1).
pub fn harmonic_ratio(x1: f64, x2: f64, x3: f64, x4: Option<f64>) -> Result<f64> {
    let ordered = x1 < x2 && x2 < x3 && x4.map_or(true, |v| x3 < v);
    if !ordered {
        return Err(Error::domain("harmonic ratio needs strictly increasing points"));
    }
    let r = match x4 {
        None => (x2 - x1) / (x3 - x1),
        Some(v) => ((x2 - x1) * (v - x3)) / ((x3 - x1) * (v - x2)),
    };
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::domain(format!("degenerate harmonic ratio {r}")));
    }
    Ok(r)
}

/// Cached evaluator of the four-point pure partition functions at fixed κ.
///
/// `Z_II(x) = C(κ) x^{2/κ} (1−x)^{2/κ} F(4/κ, (12−κ)/κ; 8/κ; x)` with the
/// constant fixed by the boundary normalization `Z_I(x) x^{(6−κ)/κ} → 1` as
/// `x → 0`; `Z_I(x) = Z_II(1−x)`. The constant is the Γ-function connection
/// coefficient `C = Γ(4/κ)Γ((12−κ)/κ) / (Γ(8/κ)Γ((8−κ)/κ))`.
#[derive(Debug, Clone)]
pub struct FourPointBlocks {
    kappa: f64,
    exponent: f64, // 2/κ
    ln_norm: f64,
    f: Hyp2f1,
    fp_factor: f64,
    fp: Hyp2f1,
}

impl FourPointBlocks {
    pub fn new(kappa: f64) -> Result<Self> {
        if !(0.0 < kappa && kappa < 8.0) {
            return Err(Error::domain(format!("kappa = {kappa} outside (0,8)")));
        }
        let a = 4.0 / kappa;
        let b = (12.0 - kappa) / kappa;
        let c = 8.0 / kappa;
        let ln_norm = ln_gamma(a) + ln_gamma(b) - ln_gamma(c) - ln_gamma((8.0 - kappa) / kappa);
        let f = Hyp2f1::new(a, b, c)?;
        let (fp_factor, fp) = f.derivative()?;
        Ok(FourPointBlocks { kappa, exponent: 2.0 / kappa, ln_norm, f, fp_factor, fp })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    fn check_x(&self, x: f64) -> Result<()> {
        if !(0.0 < x && x < 1.0) {
            return Err(Error::domain(format!("cross ratio {x} outside (0,1)")));
        }
        Ok(())
    }

    pub fn ln_z_ii(&self, x: f64) -> Result<f64> {
        self.check_x(x)?;
        let f = self.f.eval(x)?;
        if f <= 0.0 {
            return Err(Error::numerical(format!("hypergeometric factor {f} not positive")));
        }
        Ok(self.ln_norm + self.exponent * (x.ln() + (1.0 - x).ln()) + f.ln())
    }

    pub fn ln_z_i(&self, x: f64) -> Result<f64> {
        self.check_x(x)?;
        self.ln_z_ii(1.0 - x)
    }

    pub fn z_ii(&self, x: f64) -> Result<f64> {
        Ok(self.ln_z_ii(x)?.exp())
    }

    pub fn z_i(&self, x: f64) -> Result<f64> {
        Ok(self.ln_z_i(x)?.exp())
    }

    /// d/dx ln Z_II(x).
    pub fn dln_z_ii(&self, x: f64) -> Result<f64> {
        self.check_x(x)?;
        let f = self.f.eval(x)?;
        let df = self.fp_factor * self.fp.eval(x)?;
        Ok(self.exponent * (1.0 / x - 1.0 / (1.0 - x)) + df / f)
    }

    /// d/dx ln Z_I(x).
    pub fn dln_z_i(&self, x: f64) -> Result<f64> {
        Ok(-self.dln_z_ii(1.0 - x)?)
    }

    /// `ln(p_I Z_I(x) + p_II Z_II(x))`, stable in log space.
    pub fn ln_mixture(&self, p_i: f64, p_ii: f64, x: f64) -> Result<f64> {
        let (li, lii) = self.mixture_logs(p_i, p_ii, x)?;
        let m = li.max(lii);
        Ok(m + ((li - m).exp() + (lii - m).exp()).ln())
    }

    /// d/dx ln(p_I Z_I + p_II Z_II): softmax-weighted average of the two
    /// log-derivatives.
    pub fn dln_mixture(&self, p_i: f64, p_ii: f64, x: f64) -> Result<f64> {
        let (li, lii) = self.mixture_logs(p_i, p_ii, x)?;
        let m = li.max(lii);
        let wi = (li - m).exp();
        let wii = (lii - m).exp();
        let di = if wi > 0.0 { self.dln_z_i(x)? } else { 0.0 };
        let dii = if wii > 0.0 { self.dln_z_ii(x)? } else { 0.0 };
        Ok((wi * di + wii * dii) / (wi + wii))
    }

    fn mixture_logs(&self, p_i: f64, p_ii: f64, x: f64) -> Result<(f64, f64)> {
        if p_i < 0.0 || p_ii < 0.0 || (p_i == 0.0 && p_ii == 0.0) {
            return Err(Error::domain("block coefficients must be ≥ 0, not both zero"));
        }
        let li = if p_i > 0.0 { p_i.ln() + self.ln_z_i(x)? } else { f64::NEG_INFINITY };
        let lii = if p_ii > 0.0 { p_ii.ln() + self.ln_z_ii(x)? } else { f64::NEG_INFINITY };
        Ok((li, lii))
    }
}

/// Pure four-point block `Z_I` at a single point (convenience wrapper).
pub fn z_pure_i(x: f64, kappa: f64) -> Result<f64> {
    FourPointBlocks::new(kappa)?.z_i(x)
}

/// Pure four-point block `Z_II(x) = Z_I(1−x)`.
pub fn z_pure_ii(x: f64, kappa: f64) -> Result<f64> {
    FourPointBlocks::new(kappa)?.z_ii(x)
}

/// Selection of the auxiliary function `Z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PartitionKind {
    /// `(x2−x1)^{(κ−6)/κ}`: two-point function with the identity at infinity.
    Z0,
    /// `(x2−x1)^{2/κ}`: two-point function with an `h_2` field at infinity.
    Z2,
    /// `λ Z0 + μ Z2`; not homogeneous, kept for hitting-probability studies.
    Mixture { lambda: f64, mu: f64 },
    /// `∏_{i<j} (x_j−x_i)^{2/κ}`: all curves escape to infinity.
    Chordal,
    /// Alias for the fully symmetric three-point function
    /// `[(x2−x1)(x3−x1)(x3−x2)]^{2/κ}`.
    Triple,
    /// `[(X4−X2)(X3−X1)]^{(κ−6)/κ} (p_I Z_I + p_II Z_II)(X)` on four points,
    /// or its limit with the fourth point at infinity on three points.
    FourPoint { p_i: f64, p_ii: f64 },
    /// `Z ≡ 1` (single curve, or post-collision remainder).
    Constant,
}

impl fmt::Display for PartitionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartitionKind::Z0 => write!(f, "Z0"),
            PartitionKind::Z2 => write!(f, "Z2"),
            PartitionKind::Mixture { lambda, mu } => write!(f, "mixture:{lambda},{mu}"),
            PartitionKind::Chordal => write!(f, "chordal"),
            PartitionKind::Triple => write!(f, "triple"),
            PartitionKind::FourPoint { p_i, p_ii } => write!(f, "fourpoint:{p_i},{p_ii}"),
            PartitionKind::Constant => write!(f, "constant"),
        }
    }
}

impl FromStr for PartitionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let parse_two = |body: &str, what: &str| -> Result<(f64, f64)> {
            let parts: Vec<&str> = body.split(',').collect();
            if parts.len() != 2 {
                return Err(Error::domain(format!("{what} needs two comma-separated numbers")));
            }
            let a = parts[0].trim().parse::<f64>().map_err(|e| Error::domain(e.to_string()))?;
            let b = parts[1].trim().parse::<f64>().map_err(|e| Error::domain(e.to_string()))?;
            Ok((a, b))
        };
        match lower.as_str() {
            "z0" => Ok(PartitionKind::Z0),
            "z2" => Ok(PartitionKind::Z2),
            "chordal" => Ok(PartitionKind::Chordal),
            "triple" => Ok(PartitionKind::Triple),
            "constant" => Ok(PartitionKind::Constant),
            _ => {
                if let Some(body) = lower.strip_prefix("mixture:") {
                    let (lambda, mu) = parse_two(body, "mixture")?;
                    Ok(PartitionKind::Mixture { lambda, mu })
                } else if let Some(body) = lower.strip_prefix("fourpoint:") {
                    let (p_i, p_ii) = parse_two(body, "fourpoint")?;
                    Ok(PartitionKind::FourPoint { p_i, p_ii })
                } else {
                    Err(Error::domain(format!("unknown partition function \"{s}\"")))
                }
            }
        }
    }
}

/// A concrete `Z` bound to a κ and an arity, with value, log-value and
/// analytic log-gradient.
#[derive(Debug, Clone)]
pub struct PartitionFunction {
    kind: PartitionKind,
    kappa: f64,
    n: usize,
    blocks: Option<Arc<FourPointBlocks>>,
}

impl PartitionFunction {
    pub fn new(kind: PartitionKind, kappa: f64, n: usize) -> Result<Self> {
        if !(0.0 < kappa && kappa < 8.0) {
            return Err(Error::domain(format!("kappa = {kappa} must lie in (0,8)")));
        }
        let arity_ok = match kind {
            PartitionKind::Z0 | PartitionKind::Z2 => n == 2,
            PartitionKind::Mixture { .. } => n == 2,
            PartitionKind::Chordal => n >= 1,
            PartitionKind::Triple => n == 3,
            PartitionKind::FourPoint { .. } => n == 3 || n == 4,
            PartitionKind::Constant => true,
        };
        if !arity_ok {
            return Err(Error::domain(format!("partition \"{kind}\" does not accept n = {n}")));
        }
        if let PartitionKind::Mixture { lambda, mu } = kind {
            if lambda < 0.0 || mu < 0.0 || lambda + mu <= 0.0 {
                return Err(Error::domain("mixture weights must be ≥ 0 with λ+μ > 0"));
            }
        }
        if let PartitionKind::FourPoint { p_i, p_ii } = kind {
            if p_i < 0.0 || p_ii < 0.0 || p_i + p_ii <= 0.0 {
                return Err(Error::domain("block weights must be ≥ 0, not both zero"));
            }
        }
        let blocks = match kind {
            PartitionKind::FourPoint { .. } => Some(Arc::new(FourPointBlocks::new(kappa)?)),
            _ => None,
        };
        Ok(PartitionFunction { kind, kappa, n, blocks })
    }

    pub fn kind(&self) -> &PartitionKind {
        &self.kind
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn label(&self) -> String {
        self.kind.to_string()
    }

    pub fn blocks(&self) -> Option<&FourPointBlocks> {
        self.blocks.as_deref()
    }

    fn check_points(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::domain(format!(
                "expected {} points for \"{}\", got {}",
                self.n,
                self.kind,
                x.len()
            )));
        }
        for w in x.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::domain(format!(
                    "points must be strictly increasing, got {:?}",
                    x
                )));
            }
        }
        Ok(())
    }

    /// Homogeneity degree `h_{n−2m}(κ) − n h_1(κ)`, `None` for the
    /// non-scale-invariant mixture.
    pub fn scaling_weight(&self) -> Option<f64> {
        let k = self.kappa;
        let delta0 = (k - 6.0) / k;
        match self.kind {
            PartitionKind::Z0 => Some(delta0),
            PartitionKind::Z2 => Some(2.0 / k),
            PartitionKind::Mixture { .. } => None,
            PartitionKind::Chordal | PartitionKind::Triple => {
                Some(self.n as f64 * (self.n as f64 - 1.0) / k)
            }
            PartitionKind::FourPoint { .. } => {
                if self.n == 4 {
                    Some(2.0 * delta0)
                } else {
                    Some(delta0)
                }
            }
            PartitionKind::Constant => Some(0.0),
        }
    }

    pub fn log_value(&self, x: &[f64]) -> Result<f64> {
        self.check_points(x)?;
        let k = self.kappa;
        let delta0 = (k - 6.0) / k;
        match self.kind {
            PartitionKind::Z0 => Ok(delta0 * (x[1] - x[0]).ln()),
            PartitionKind::Z2 => Ok(2.0 / k * (x[1] - x[0]).ln()),
            PartitionKind::Mixture { lambda, mu } => {
                let lg = (x[1] - x[0]).ln();
                let l0 = if lambda > 0.0 { lambda.ln() + delta0 * lg } else { f64::NEG_INFINITY };
                let l2 = if mu > 0.0 { mu.ln() + 2.0 / k * lg } else { f64::NEG_INFINITY };
                let m = l0.max(l2);
                Ok(m + ((l0 - m).exp() + (l2 - m).exp()).ln())
            }
            PartitionKind::Chordal | PartitionKind::Triple => {
                let mut acc = 0.0;
                for i in 0..x.len() {
                    for j in i + 1..x.len() {
                        acc += (x[j] - x[i]).ln();
                    }
                }
                Ok(2.0 / k * acc)
            }
            PartitionKind::FourPoint { p_i, p_ii } => {
                let blocks = self.blocks.as_ref().expect("blocks built at construction");
                if self.n == 4 {
                    let xr = harmonic_ratio(x[0], x[1], x[2], Some(x[3]))?;
                    let pref = delta0 * (((x[3] - x[1]) * (x[2] - x[0])).ln());
                    Ok(pref + blocks.ln_mixture(p_i, p_ii, xr)?)
                } else {
                    let xr = harmonic_ratio(x[0], x[1], x[2], None)?;
                    let pref = delta0 * (x[2] - x[0]).ln();
                    Ok(pref + blocks.ln_mixture(p_i, p_ii, xr)?)
                }
            }
            PartitionKind::Constant => Ok(0.0),
        }
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        Ok(self.log_value(x)?.exp())
    }

    /// Analytic `∂_i log Z`, written into `out` (length n).
    pub fn grad_log_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.check_points(x)?;
        if out.len() != self.n {
            return Err(Error::domain("gradient buffer length mismatch"));
        }
        let k = self.kappa;
        let delta0 = (k - 6.0) / k;
        match self.kind {
            PartitionKind::Z0 => {
                let g = x[1] - x[0];
                out[0] = -delta0 / g;
                out[1] = delta0 / g;
            }
            PartitionKind::Z2 => {
                let g = x[1] - x[0];
                out[0] = -2.0 / (k * g);
                out[1] = 2.0 / (k * g);
            }
            PartitionKind::Mixture { lambda, mu } => {
                let g = x[1] - x[0];
                let lg = g.ln();
                let l0 = if lambda > 0.0 { lambda.ln() + delta0 * lg } else { f64::NEG_INFINITY };
                let l2 = if mu > 0.0 { mu.ln() + 2.0 / k * lg } else { f64::NEG_INFINITY };
                let m = l0.max(l2);
                let w0 = (l0 - m).exp();
                let w2 = (l2 - m).exp();
                let d = (w0 * delta0 + w2 * 2.0 / k) / ((w0 + w2) * g);
                out[0] = -d;
                out[1] = d;
            }
            PartitionKind::Chordal | PartitionKind::Triple => {
                for i in 0..self.n {
                    let mut acc = 0.0;
                    for j in 0..self.n {
                        if j != i {
                            acc += 1.0 / (x[i] - x[j]);
                        }
                    }
                    out[i] = 2.0 / k * acc;
                }
            }
            PartitionKind::FourPoint { p_i, p_ii } => {
                let blocks = self.blocks.as_ref().expect("blocks built at construction");
                if self.n == 4 {
                    let g21 = x[1] - x[0];
                    let g31 = x[2] - x[0];
                    let g42 = x[3] - x[1];
                    let g43 = x[3] - x[2];
                    let xr = harmonic_ratio(x[0], x[1], x[2], Some(x[3]))?;
                    let dmix = blocks.dln_mixture(p_i, p_ii, xr)? * xr;
                    out[0] = -delta0 / g31 + dmix * (-1.0 / g21 + 1.0 / g31);
                    out[1] = -delta0 / g42 + dmix * (1.0 / g21 + 1.0 / g42);
                    out[2] = delta0 / g31 + dmix * (-1.0 / g43 - 1.0 / g31);
                    out[3] = delta0 / g42 + dmix * (1.0 / g43 - 1.0 / g42);
                } else {
                    let g21 = x[1] - x[0];
                    let g31 = x[2] - x[0];
                    let xr = harmonic_ratio(x[0], x[1], x[2], None)?;
                    let dmix = blocks.dln_mixture(p_i, p_ii, xr)? * xr;
                    out[0] = -delta0 / g31 + dmix * (-1.0 / g21 + 1.0 / g31);
                    out[1] = dmix / g21;
                    out[2] = delta0 / g31 - dmix / g31;
                }
            }
            PartitionKind::Constant => out.fill(0.0),
        }
        Ok(())
    }

    pub fn grad_log(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n];
        self.grad_log_into(x, &mut out)?;
        Ok(out)
    }

    /// Null-vector residual `D_i Z / Z` by central finite differences.
    pub fn null_vector_residual(&self, x: &[f64], i: usize) -> Result<f64> {
        let f = |y: &[f64]| self.value(y);
        null_vector_residual(&f, x, i, self.kappa)
    }

    /// Continuation after an adjacent pair has collided and been removed.
    pub fn reduce(&self) -> Result<PartitionFunction> {
        if self.n < 2 {
            return Err(Error::domain("nothing to reduce below two points"));
        }
        let survivors = self.n - 2;
        let kind = match self.kind {
            PartitionKind::Chordal if survivors >= 1 => PartitionKind::Chordal,
            PartitionKind::FourPoint { .. } if self.n == 4 => PartitionKind::Z0,
            _ => PartitionKind::Constant,
        };
        PartitionFunction::new(kind, self.kappa, survivors)
    }
}

fn min_gap(x: &[f64]) -> f64 {
    x.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
}

/// `∂_i log Z` by central differences with step `1e−4 ·` (minimum gap).
pub fn grad_log_fd<F: Fn(&[f64]) -> Result<f64>>(z: &F, x: &[f64]) -> Result<Vec<f64>> {
    let h = 1e-4 * min_gap(x).min(1.0);
    if !(h > 0.0) {
        return Err(Error::numerical("degenerate point spacing for finite differences"));
    }
    let mut out = Vec::with_capacity(x.len());
    let mut xs = x.to_vec();
    for i in 0..x.len() {
        let x0 = xs[i];
        xs[i] = x0 + h;
        let up = z(&xs)?;
        xs[i] = x0 - h;
        let dn = z(&xs)?;
        xs[i] = x0;
        if up <= 0.0 || dn <= 0.0 {
            return Err(Error::numerical("partition function not positive near evaluation point"));
        }
        out.push((up.ln() - dn.ln()) / (2.0 * h));
    }
    Ok(out)
}

/// Finite-difference residual of the null-vector operator, normalized by Z:
/// `D_i Z / Z` with
/// `D_i = (κ/2) ∂²_i + 2 Σ_{j≠i} [ (x_j−x_i)^{−1} ∂_j − h_1(κ)(x_j−x_i)^{−2} ]`.
///
/// Steps: `1e−4 · min gap` for first derivatives, `1e−3 · min gap` for the
/// second derivative.
pub fn null_vector_residual<F: Fn(&[f64]) -> Result<f64>>(
    z: &F,
    x: &[f64],
    i: usize,
    kappa: f64,
) -> Result<f64> {
    if i >= x.len() {
        return Err(Error::domain(format!("index {i} out of range")));
    }
    let gap = min_gap(x).min(1.0);
    let h1 = 1e-4 * gap;
    let h2 = 1e-3 * gap;
    if !(h2 > 0.0) {
        return Err(Error::numerical("step underflow near domain boundary"));
    }
    let z0 = z(x)?;
    if z0 == 0.0 {
        return Err(Error::numerical("Z vanished at evaluation point"));
    }
    let mut xs = x.to_vec();

    // second derivative in x_i
    let xi = xs[i];
    xs[i] = xi + h2;
    let up = z(&xs)?;
    xs[i] = xi - h2;
    let dn = z(&xs)?;
    xs[i] = xi;
    let d2 = (up - 2.0 * z0 + dn) / (h2 * h2);

    let hw = h_weight(1, kappa)?;
    let mut acc = 0.5 * kappa * d2;
    for j in 0..x.len() {
        if j == i {
            continue;
        }
        let xj = xs[j];
        xs[j] = xj + h1;
        let up = z(&xs)?;
        xs[j] = xj - h1;
        let dn = z(&xs)?;
        xs[j] = xj;
        let dj = (up - dn) / (2.0 * h1);
        let sep = x[j] - x[i];
        acc += 2.0 * (dj / sep - hw * z0 / (sep * sep));
    }
    Ok(acc / z0)
}

/// Four-point partition function on explicit points (fourth possibly at
/// infinity), `[(X4−X2)(X3−X1)]^{(κ−6)/κ} (p_I Z_I + p_II Z_II)(X)`.
pub fn z_four_point(
    x1: f64,
    x2: f64,
    x3: f64,
    x4: Option<f64>,
    kappa: f64,
    p_i: f64,
    p_ii: f64,
) -> Result<f64> {
    let kind = PartitionKind::FourPoint { p_i, p_ii };
    match x4 {
        Some(v) => PartitionFunction::new(kind, kappa, 4)?.value(&[x1, x2, x3, v]),
        None => PartitionFunction::new(kind, kappa, 3)?.value(&[x1, x2, x3]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn weight_examples() {
        assert_relative_eq!(h_weight(1, 6.0).unwrap(), 0.0);
        assert_relative_eq!(h_weight(1, 3.0).unwrap(), 0.5);
        assert_relative_eq!(h_weight(1, 16.0 / 3.0).unwrap(), 1.0 / 16.0);
        for kappa in [2.0, 10.0 / 3.0, 6.0] {
            assert_relative_eq!(h_weight(2, kappa).unwrap(), (8.0 - kappa) / kappa);
            // 2κ h_m = m(2(m+2)−κ) identity
            for m in 0..5 {
                let h = h_weight(m, kappa).unwrap();
                assert_relative_eq!(
                    2.0 * kappa * h,
                    m as f64 * (2.0 * (m as f64 + 2.0) - kappa),
                    epsilon = 1e-12
                );
            }
        }
        assert_eq!(h_weight(0, 3.7).unwrap(), 0.0);
        assert!(h_weight(1, 0.0).is_err());
        assert_relative_eq!(central_charge(6.0).unwrap(), 0.0);
    }

    #[test]
    fn pair_functions() {
        let z0 = PartitionFunction::new(PartitionKind::Z0, 2.7, 2).unwrap();
        assert_relative_eq!(z0.value(&[0.0, 1.0]).unwrap(), 1.0);
        let z2 = PartitionFunction::new(PartitionKind::Z2, 2.0, 2).unwrap();
        assert_relative_eq!(z2.value(&[0.0, 4.0]).unwrap(), 4.0);
        // homogeneity: Z0(0,λ) = λ^{(κ−6)/κ}
        for kappa in [2.0, 6.0, 7.5] {
            let z = PartitionFunction::new(PartitionKind::Z0, kappa, 2).unwrap();
            for lam in [0.3, 2.0, 11.0] {
                assert_relative_eq!(
                    z.value(&[0.0, lam]).unwrap(),
                    lam.powf((kappa - 6.0) / kappa),
                    max_relative = 1e-12
                );
            }
        }
        assert!(z0.value(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn mixture_examples() {
        let kappa = 3.9;
        let mk = |l, m| {
            PartitionFunction::new(PartitionKind::Mixture { lambda: l, mu: m }, kappa, 2).unwrap()
        };
        assert_relative_eq!(mk(1.0, 1.0).value(&[0.0, 1.0]).unwrap(), 2.0);
        let y = 2.6;
        let z0 = PartitionFunction::new(PartitionKind::Z0, kappa, 2).unwrap();
        let z2 = PartitionFunction::new(PartitionKind::Z2, kappa, 2).unwrap();
        assert_relative_eq!(
            mk(1.0, 0.0).value(&[0.0, y]).unwrap(),
            z0.value(&[0.0, y]).unwrap(),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            mk(0.0, 1.0).value(&[0.0, y]).unwrap(),
            z2.value(&[0.0, y]).unwrap(),
            max_relative = 1e-12
        );
        assert!(
            PartitionFunction::new(PartitionKind::Mixture { lambda: 0.0, mu: 0.0 }, kappa, 2)
                .is_err()
        );
    }

    #[test]
    fn chordal_examples() {
        let z = PartitionFunction::new(PartitionKind::Chordal, 5.1, 2).unwrap();
        assert_relative_eq!(z.value(&[0.0, 1.0]).unwrap(), 1.0);
        let z3 = PartitionFunction::new(PartitionKind::Chordal, 2.0, 3).unwrap();
        assert_relative_eq!(z3.value(&[0.0, 1.0, 2.0]).unwrap(), 2.0, max_relative = 1e-12);
        // triple-symmetric form agrees with the factorizable product at n=3
        let t = PartitionFunction::new(PartitionKind::Triple, 4.4, 3).unwrap();
        let c = PartitionFunction::new(PartitionKind::Chordal, 4.4, 3).unwrap();
        let pts = [0.2, 1.1, 2.9];
        assert_relative_eq!(t.value(&pts).unwrap(), c.value(&pts).unwrap(), max_relative = 1e-12);
        let direct = ((pts[1] - pts[0]) * (pts[2] - pts[0]) * (pts[2] - pts[1])).powf(2.0 / 4.4);
        assert_relative_eq!(t.value(&pts).unwrap(), direct, max_relative = 1e-12);
    }

    #[test]
    fn pure_block_closed_forms() {
        // κ=4: Z_I = sqrt((1−x)/x)
        let b4 = FourPointBlocks::new(4.0).unwrap();
        for x in [0.1, 0.25, 0.5, 0.8, 0.95] {
            assert_relative_eq!(b4.z_i(x).unwrap(), ((1.0 - x) / x).sqrt(), max_relative = 1e-10);
        }
        assert_relative_eq!(b4.z_i(0.5).unwrap(), 1.0, max_relative = 1e-10);
        // κ=2: Z_I = (1−x²)/x²
        let b2 = FourPointBlocks::new(2.0).unwrap();
        for x in [0.2, 0.5, 0.7] {
            assert_relative_eq!(b2.z_i(x).unwrap(), (1.0 - x * x) / (x * x), max_relative = 1e-10);
        }
        assert_relative_eq!(b2.z_i(0.5).unwrap(), 3.0, max_relative = 1e-10);
        // κ=6: Z_I + Z_II = 1
        let b6 = FourPointBlocks::new(6.0).unwrap();
        for x in [0.05, 0.3, 0.5, 0.77, 0.99] {
            assert_relative_eq!(
                b6.z_i(x).unwrap() + b6.z_ii(x).unwrap(),
                1.0,
                max_relative = 1e-10
            );
        }
        // κ=16/3: FK closed form
        let bfk = FourPointBlocks::new(16.0 / 3.0).unwrap();
        for x in [0.12f64, 0.5, 0.83] {
            let expect = (1.0 - x).powf(3.0 / 8.0) / (x.powf(1.0 / 8.0) * (1.0 + x.sqrt()).sqrt());
            assert_relative_eq!(bfk.z_i(x).unwrap(), expect, max_relative = 1e-10);
        }
    }

    #[test]
    fn pure_block_boundary_asymptotics() {
        // Z_I(x)·x^{(6−κ)/κ} → 1 as x → 0, extrapolating away the known
        // x^{(8−κ)/κ} correction; Z_I(x)·(1−x)^{−2/κ} → positive constant.
        for kappa in [2.0, 3.0, 16.0 / 3.0, 6.0, 7.4] {
            let b = FourPointBlocks::new(kappa).unwrap();
            let lead = (6.0 - kappa) / kappa;
            let f = |x: f64| b.z_i(x).unwrap() * x.powf(lead);
            let e = (8.0 - kappa) / kappa;
            // probe deep enough that the un-extrapolated O(x) term is < 1e−7
            let (x1, x2) = (1e-6, 1e-9);
            let (f1, f2) = (f(x1), f(x2));
            let c = (f1 - f2) / (x1.powf(e) - x2.powf(e));
            let limit = f1 - c * x1.powf(e);
            assert!((limit - 1.0).abs() < 1e-6, "kappa={kappa}: limit {limit}");
            let g = |x: f64| b.z_i(x).unwrap() * (1.0 - x).powf(-2.0 / kappa);
            let (g1, g2) = (g(1.0 - 1e-4), g(1.0 - 1e-6));
            assert!(g2 > 0.0);
            assert!((g1 / g2 - 1.0).abs() < 1e-2, "kappa={kappa}: {g1} vs {g2}");
        }
    }

    #[test]
    fn free_fermion_sum() {
        // κ=3: Z_I + Z_II ∝ (1−x+x²)/(x(1−x))
        let b = FourPointBlocks::new(3.0).unwrap();
        let ratio = |x: f64| {
            (b.z_i(x).unwrap() + b.z_ii(x).unwrap()) * x * (1.0 - x) / (1.0 - x + x * x)
        };
        let base = ratio(0.5);
        for k in 1..10 {
            let x = k as f64 / 10.0;
            assert_relative_eq!(ratio(x), base, max_relative = 1e-8);
        }
    }

    #[test]
    fn harmonic_ratio_examples() {
        assert_relative_eq!(harmonic_ratio(0.0, 0.3, 1.0, None).unwrap(), 0.3);
        assert_relative_eq!(harmonic_ratio(0.0, 0.5, 1.0, None).unwrap(), 0.5);
        // affine invariance
        let (a, b) = (1.7, -0.4);
        let pts = [0.1, 0.9, 2.0, 5.5];
        let r0 = harmonic_ratio(pts[0], pts[1], pts[2], Some(pts[3])).unwrap();
        let r1 =
            harmonic_ratio(a * pts[0] + b, a * pts[1] + b, a * pts[2] + b, Some(a * pts[3] + b))
                .unwrap();
        assert_relative_eq!(r0, r1, max_relative = 1e-12);
        // X4 → ∞ limit approaches the None case
        let rinf = harmonic_ratio(0.0, 0.3, 1.0, Some(1e9)).unwrap();
        assert_relative_eq!(rinf, 0.3, max_relative = 1e-8);
        assert!(harmonic_ratio(0.0, 0.0, 1.0, None).is_err());
    }

    #[test]
    fn four_point_properties() {
        let kappa = 6.0;
        // with p_I = p_II the κ=6 mixture is constant in x (total percolation
        // partition function): values at different cross ratios differ only
        // by the prefactor
        let z = PartitionFunction::new(PartitionKind::FourPoint { p_i: 1.0, p_ii: 1.0 }, kappa, 4)
            .unwrap();
        let pref = |x: &[f64]| ((x[3] - x[1]) * (x[2] - x[0])).powf((kappa - 6.0) / kappa);
        let a = [0.0, 0.2, 1.0, 50.0];
        let b = [0.0, 0.7, 1.0, 50.0];
        assert_relative_eq!(
            z.value(&a).unwrap() / pref(&a),
            z.value(&b).unwrap() / pref(&b),
            max_relative = 1e-9
        );
        // translation invariance
        let z37 =
            PartitionFunction::new(PartitionKind::FourPoint { p_i: 0.4, p_ii: 1.3 }, 3.7, 4)
                .unwrap();
        let pts = [0.0, 0.4, 1.1, 2.5];
        let shifted: Vec<f64> = pts.iter().map(|v| v + 17.3).collect();
        assert_relative_eq!(
            z37.value(&pts).unwrap(),
            z37.value(&shifted).unwrap(),
            max_relative = 1e-10
        );
        // prefactor cancels in block ratios
        let za = PartitionFunction::new(PartitionKind::FourPoint { p_i: 1.0, p_ii: 0.0 }, 3.7, 4)
            .unwrap();
        let zb = PartitionFunction::new(PartitionKind::FourPoint { p_i: 0.0, p_ii: 1.0 }, 3.7, 4)
            .unwrap();
        let xr = harmonic_ratio(pts[0], pts[1], pts[2], Some(pts[3])).unwrap();
        let blocks = FourPointBlocks::new(3.7).unwrap();
        assert_relative_eq!(
            za.value(&pts).unwrap() / zb.value(&pts).unwrap(),
            blocks.z_i(xr).unwrap() / blocks.z_ii(xr).unwrap(),
            max_relative = 1e-10
        );
    }

    #[test]
    fn homogeneity_and_translation() {
        let cases: Vec<(PartitionFunction, Vec<f64>)> = vec![
            (PartitionFunction::new(PartitionKind::Z0, 3.1, 2).unwrap(), vec![0.1, 1.4]),
            (PartitionFunction::new(PartitionKind::Z2, 5.9, 2).unwrap(), vec![-0.3, 2.2]),
            (
                PartitionFunction::new(PartitionKind::Chordal, 2.4, 4).unwrap(),
                vec![0.0, 0.7, 1.9, 3.0],
            ),
            (PartitionFunction::new(PartitionKind::Triple, 6.6, 3).unwrap(), vec![-1.0, 0.5, 2.0]),
            (
                PartitionFunction::new(PartitionKind::FourPoint { p_i: 0.8, p_ii: 0.6 }, 4.8, 4)
                    .unwrap(),
                vec![0.0, 0.9, 2.0, 4.7],
            ),
            (
                PartitionFunction::new(PartitionKind::FourPoint { p_i: 1.0, p_ii: 2.0 }, 5.2, 3)
                    .unwrap(),
                vec![0.0, 0.33, 1.0],
            ),
        ];
        for (z, pts) in cases {
            // translation invariance of the value
            let shifted: Vec<f64> = pts.iter().map(|v| v + 5.21).collect();
            let rel = (z.log_value(&pts).unwrap() - z.log_value(&shifted).unwrap()).abs();
            assert!(rel < 1e-10, "{}: translation deviation {rel}", z.label());
            // Euler identity: Σ x_i ∂_i log Z = weight; Σ ∂_i log Z = 0
            let grad = z.grad_log(&pts).unwrap();
            let total: f64 = grad.iter().sum();
            assert!(total.abs() < 1e-9, "{}: gradient sum {total}", z.label());
            let euler: f64 = pts.iter().zip(&grad).map(|(x, g)| x * g).sum();
            let w = z.scaling_weight().unwrap();
            assert_relative_eq!(euler, w, max_relative = 1e-8, epsilon = 1e-9);
            // scale covariance of the value itself
            let lam = 1.9;
            let scaled: Vec<f64> = pts.iter().map(|v| v * lam).collect();
            assert_relative_eq!(
                z.log_value(&scaled).unwrap(),
                z.log_value(&pts).unwrap() + w * lam.ln(),
                max_relative = 1e-9,
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let cases: Vec<(PartitionFunction, Vec<f64>)> = vec![
            (PartitionFunction::new(PartitionKind::Z0, 6.0, 2).unwrap(), vec![0.0, 1.3]),
            (
                PartitionFunction::new(PartitionKind::Mixture { lambda: 1.0, mu: 2.0 }, 4.0, 2)
                    .unwrap(),
                vec![0.2, 1.9],
            ),
            (
                PartitionFunction::new(PartitionKind::Chordal, 3.3, 5).unwrap(),
                vec![0.0, 0.5, 1.2, 2.0, 3.3],
            ),
            (
                PartitionFunction::new(PartitionKind::FourPoint { p_i: 1.0, p_ii: 1.0 }, 3.0, 4)
                    .unwrap(),
                vec![0.0, 0.45, 1.0, 2.2],
            ),
            (
                PartitionFunction::new(PartitionKind::FourPoint { p_i: 0.3, p_ii: 1.7 }, 6.5, 3)
                    .unwrap(),
                vec![0.0, 0.61, 1.0],
            ),
        ];
        for (z, pts) in cases {
            let analytic = z.grad_log(&pts).unwrap();
            let fd = grad_log_fd(&|y: &[f64]| z.value(y), &pts).unwrap();
            for (a, f) in analytic.iter().zip(&fd) {
                assert_relative_eq!(a, f, max_relative = 1e-6, epsilon = 1e-8);
            }
        }
        // Z2 closed form: ∂₁ log Z = −(2/κ)/(x₂−x₁)
        let z2 = PartitionFunction::new(PartitionKind::Z2, 5.0, 2).unwrap();
        let g = z2.grad_log(&[0.5, 2.5]).unwrap();
        assert_relative_eq!(g[0], -(2.0 / 5.0) / 2.0, max_relative = 1e-12);
        // factorizable: κ ∂_i log Z = Σ_{j≠i} 2/(x_i − x_j)
        let zc = PartitionFunction::new(PartitionKind::Chordal, 2.9, 3).unwrap();
        let pts = [0.0, 1.0, 2.5];
        let g = zc.grad_log(&pts).unwrap();
        for i in 0..3 {
            let expect: f64 =
                (0..3).filter(|&j| j != i).map(|j| 2.0 / (pts[i] - pts[j])).sum();
            assert_relative_eq!(2.9 * g[i], expect, max_relative = 1e-12);
        }
    }

    #[test]
    fn null_vector_residuals() {
        let ok = |z: &PartitionFunction, pts: &[f64]| {
            for i in 0..pts.len() {
                let r = z.null_vector_residual(pts, i).unwrap();
                assert!(r.abs() < 1e-4, "{} at i={i}: residual {r}", z.label());
            }
        };
        for kappa in [2.5, 6.0] {
            ok(&PartitionFunction::new(PartitionKind::Z0, kappa, 2).unwrap(), &[0.0, 1.0]);
            ok(&PartitionFunction::new(PartitionKind::Z2, kappa, 2).unwrap(), &[0.0, 1.0]);
            ok(
                &PartitionFunction::new(
                    PartitionKind::Mixture { lambda: 1.4, mu: 0.6 },
                    kappa,
                    2,
                )
                .unwrap(),
                &[0.0, 1.0],
            );
            ok(&PartitionFunction::new(PartitionKind::Chordal, kappa, 3).unwrap(), &[0.0, 0.8, 2.0]);
            ok(
                &PartitionFunction::new(PartitionKind::Chordal, kappa, 4).unwrap(),
                &[0.0, 0.8, 2.0, 3.1],
            );
            ok(&PartitionFunction::new(PartitionKind::Triple, kappa, 3).unwrap(), &[0.0, 1.0, 2.0]);
            ok(
                &PartitionFunction::new(PartitionKind::FourPoint { p_i: 0.7, p_ii: 1.3 }, kappa, 4)
                    .unwrap(),
                &[0.0, 0.6, 1.5, 2.4],
            );
            ok(
                &PartitionFunction::new(PartitionKind::FourPoint { p_i: 1.0, p_ii: 1.0 }, kappa, 3)
                    .unwrap(),
                &[0.0, 0.45, 1.0],
            );
        }
        // factorizable at n=3, κ=6
        ok(&PartitionFunction::new(PartitionKind::Chordal, 6.0, 3).unwrap(), &[0.0, 1.0, 2.0]);
        // negative control: generic power is not annihilated
        let bad = |y: &[f64]| -> Result<f64> { Ok((y[1] - y[0]).powf(0.123)) };
        let r = null_vector_residual(&bad, &[0.0, 1.0], 0, 6.0).unwrap();
        assert!(r.abs() > 1e-2, "negative control residual too small: {r}");
        let r3 = null_vector_residual(&bad, &[0.0, 1.0], 0, 3.0).unwrap();
        assert!(r3.abs() > 0.5, "negative control at κ=3: {r3}");
    }

    #[test]
    fn kind_string_round_trip() {
        for s in ["Z0", "Z2", "mixture:1,0.5", "chordal", "triple", "fourpoint:1,1", "constant"] {
            let kind: PartitionKind = s.parse().unwrap();
            let out = kind.to_string();
            let back: PartitionKind = out.parse().unwrap();
            assert_eq!(kind, back);
        }
        assert!("z9".parse::<PartitionKind>().is_err());
        assert!("mixture:1".parse::<PartitionKind>().is_err());
    }

    #[test]
    fn reduction_rules() {
        let fp =
            PartitionFunction::new(PartitionKind::FourPoint { p_i: 1.0, p_ii: 1.0 }, 6.0, 4)
                .unwrap();
        let red = fp.reduce().unwrap();
        assert_eq!(red.kind(), &PartitionKind::Z0);
        assert_eq!(red.n(), 2);
        let fp3 =
            PartitionFunction::new(PartitionKind::FourPoint { p_i: 1.0, p_ii: 1.0 }, 6.0, 3)
                .unwrap();
        assert_eq!(fp3.reduce().unwrap().kind(), &PartitionKind::Constant);
        let ch = PartitionFunction::new(PartitionKind::Chordal, 6.0, 5).unwrap();
        let red = ch.reduce().unwrap();
        assert_eq!(red.kind(), &PartitionKind::Chordal);
        assert_eq!(red.n(), 3);
    }
}
