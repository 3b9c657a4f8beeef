//! Closed-form crossing / arch probabilities for named critical models and
//! the generic ratio of pure partition functions.
//!
//! Configuration (I) pairs `[0,x]` with `[1,∞]`; its probability is
//! `p_I Z_I(x) / (p_I Z_I(x) + p_II Z_II(x))`, decreasing from 1 to 0 on
//! `(0,1)`.

use crate::error::{Error, Result};
use crate::partition::FourPointBlocks;
use crate::quad::adaptive_simpson;
use crate::special::ln_gamma;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

const QUAD_TOL: f64 = 1e-10;

fn check_unit_interval(x: f64) -> Result<()> {
    if !(0.0 < x && x < 1.0) {
        return Err(Error::domain(format!("x = {x} outside (0,1)")));
    }
    Ok(())
}

/// `p_I Z_I(x) / (p_I Z_I + p_II Z_II)(x)`.
pub fn generic_crossing(x: f64, kappa: f64, p_i: f64, p_ii: f64) -> Result<f64> {
    let blocks = FourPointBlocks::new(kappa)?;
    generic_crossing_with(&blocks, x, p_i, p_ii)
}

/// Same as [`generic_crossing`] with a reusable block evaluator.
pub fn generic_crossing_with(blocks: &FourPointBlocks, x: f64, p_i: f64, p_ii: f64) -> Result<f64> {
    check_unit_interval(x)?;
    if p_i < 0.0 || p_ii < 0.0 || (p_i == 0.0 && p_ii == 0.0) {
        return Err(Error::domain("weights must be ≥ 0, not both zero"));
    }
    if p_i == 0.0 {
        return Ok(0.0);
    }
    if p_ii == 0.0 {
        return Ok(1.0);
    }
    // 1/(1 + (p_II/p_I)·exp(ln Z_II − ln Z_I)) is stable for extreme x
    let diff = blocks.ln_z_ii(x)? - blocks.ln_z_i(x)?;
    Ok(1.0 / (1.0 + (p_ii / p_i) * diff.exp()))
}

/// Percolation (κ=6): normalized incomplete Beta integral
/// `Γ(2/3)/Γ(1/3)² ∫ₓ¹ s^{−2/3}(1−s)^{−2/3} ds`.
///
/// The endpoint singularities are integrable; substituting `s = v³`
/// (resp. `1−s = u³`) removes them, leaving `3(1−v³)^{−2/3}` style
/// integrands that the adaptive rule handles at full accuracy.
pub fn cardy_crossing(x: f64) -> Result<f64> {
    check_unit_interval(x)?;
    let norm = (ln_gamma(2.0 / 3.0) - 2.0 * ln_gamma(1.0 / 3.0)).exp();
    let left = if x < 0.5 {
        // ∫_x^{1/2} s^{−2/3}(1−s)^{−2/3} ds with s = v³
        adaptive_simpson(
            &|v: f64| 3.0 * (1.0 - v * v * v).powf(-2.0 / 3.0),
            x.powf(1.0 / 3.0),
            0.5f64.powf(1.0 / 3.0),
            QUAD_TOL,
        )?
    } else {
        // negative of ∫_{1/2}^{x}: fold into the right piece below
        0.0
    };
    // ∫_{max(x,1/2)}^{1} s^{−2/3}(1−s)^{−2/3} ds with 1−s = u³
    let upper_start = x.max(0.5);
    let right = adaptive_simpson(
        &|u: f64| 3.0 * (1.0 - u * u * u).powf(-2.0 / 3.0),
        0.0,
        (1.0 - upper_start).powf(1.0 / 3.0),
        QUAD_TOL,
    )?;
    Ok(norm * (left + right))
}

/// Normalized Ising spin-cluster weight `w(y) = (y(1−y))^{2/3}/(1−y+y²)²`.
fn ising_weight_integral(from: f64, to: f64) -> Result<f64> {
    debug_assert!((0.0..=1.0).contains(&from) && from <= to && to <= 1.0);
    let w = |y: f64| (y * (1.0 - y)).powf(2.0 / 3.0) / (1.0 - y + y * y).powi(2);
    // substitute y = v³ below 1/2 and 1−y = u³ above to remove the y^{2/3}
    // cusps at the endpoints
    let mut acc = 0.0;
    if from < 0.5 {
        let hi = to.min(0.5);
        acc += adaptive_simpson(
            &|v: f64| 3.0 * v * v * w(v * v * v),
            from.powf(1.0 / 3.0),
            hi.powf(1.0 / 3.0),
            QUAD_TOL,
        )?;
    }
    if to > 0.5 {
        let lo = from.max(0.5);
        acc += adaptive_simpson(
            &|u: f64| 3.0 * u * u * w(1.0 - u * u * u),
            (1.0 - to).powf(1.0 / 3.0),
            (1.0 - lo).powf(1.0 / 3.0),
            QUAD_TOL,
        )?;
    }
    Ok(acc)
}

/// Ising spin clusters (κ=3): `∫ₓ¹ w / ∫₀¹ w` with
/// `w(y) = (y(1−y))^{2/3}/(1−y+y²)²`.
pub fn ising_spin_crossing(x: f64) -> Result<f64> {
    check_unit_interval(x)?;
    static NORM: OnceLock<f64> = OnceLock::new();
    let norm = *NORM.get_or_init(|| ising_weight_integral(0.0, 1.0).expect("fixed integrand"));
    Ok(ising_weight_integral(x, 1.0)? / norm)
}

/// FK-Ising clusters (κ=16/3):
/// `sqrt((1−x)+(1−x)^{3/2}) / (sqrt(x+x^{3/2}) + sqrt((1−x)+(1−x)^{3/2}))`.
pub fn fk_ising_crossing(x: f64) -> Result<f64> {
    check_unit_interval(x)?;
    let g = |y: f64| (y + y.powf(1.5)).sqrt();
    Ok(g(1.0 - x) / (g(x) + g(1.0 - x)))
}

/// The unique κ ∈ [4,8] with `Q = 4 cos²(4π/κ)` on that branch:
/// `κ = 4π / arccos(−√Q/2)`. Q=1 gives percolation's κ=6, Q=2 the FK-Ising
/// κ=16/3; the endpoints are Q→0 ⇒ κ=8 and Q=4 ⇒ κ=4.
pub fn potts_kappa(q: f64) -> Result<f64> {
    if !(0.0..=4.0).contains(&q) {
        return Err(Error::domain(format!("Q = {q} outside [0,4]")));
    }
    Ok(4.0 * std::f64::consts::PI / (-q.sqrt() / 2.0).acos())
}

/// Crossing probability of the critical Q-state random-cluster model.
pub fn potts_crossing(q: f64, x: f64) -> Result<f64> {
    generic_crossing(x, potts_kappa(q)?, 1.0, 1.0)
}

/// Named crossing-formula selections.
#[derive(Debug, Clone, PartialEq)]
pub enum CrossingModel {
    Percolation,
    IsingSpin,
    FkIsing,
    Potts(f64),
    Generic { kappa: f64, p_i: f64, p_ii: f64 },
}

impl CrossingModel {
    pub fn probability(&self, x: f64) -> Result<f64> {
        match *self {
            CrossingModel::Percolation => cardy_crossing(x),
            CrossingModel::IsingSpin => ising_spin_crossing(x),
            CrossingModel::FkIsing => fk_ising_crossing(x),
            CrossingModel::Potts(q) => potts_crossing(q, x),
            CrossingModel::Generic { kappa, p_i, p_ii } => generic_crossing(x, kappa, p_i, p_ii),
        }
    }

    /// Probabilities on the interior grid `x_k = k/(g+1)`, `k = 1..=g`.
    pub fn table(&self, grid: usize) -> Result<Vec<(f64, f64)>> {
        if grid == 0 {
            return Err(Error::domain("grid must have at least one point"));
        }
        let mut rows = Vec::with_capacity(grid);
        for k in 1..=grid {
            let x = k as f64 / (grid as f64 + 1.0);
            rows.push((x, self.probability(x)?));
        }
        Ok(rows)
    }
}

/// CSV emitter for `(x, probability)` tables.
pub fn crossing_csv(rows: &[(f64, f64)]) -> String {
    let mut out = String::from("x,probability\n");
    for (x, p) in rows {
        out.push_str(&format!("{x:.12},{p:.12}\n"));
    }
    out
}

/// Parse rows produced by [`crossing_csv`].
pub fn parse_crossing_csv(s: &str) -> Result<Vec<(f64, f64)>> {
    let mut rows = Vec::new();
    for (ln, line) in s.lines().enumerate() {
        if ln == 0 {
            if line != "x,probability" {
                return Err(Error::domain("unexpected crossing CSV header"));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let (a, b) = line
            .split_once(',')
            .ok_or_else(|| Error::domain(format!("crossing CSV row {ln} lacks a comma")))?;
        rows.push((
            a.parse().map_err(|e| Error::domain(format!("row {ln}: {e}")))?,
            b.parse().map_err(|e| Error::domain(format!("row {ln}: {e}")))?,
        ));
    }
    Ok(rows)
}

impl fmt::Display for CrossingModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CrossingModel::Percolation => write!(f, "percolation"),
            CrossingModel::IsingSpin => write!(f, "ising"),
            CrossingModel::FkIsing => write!(f, "fk"),
            CrossingModel::Potts(q) => write!(f, "potts:{q}"),
            CrossingModel::Generic { kappa, p_i, p_ii } => {
                write!(f, "generic:{kappa},{p_i},{p_ii}")
            }
        }
    }
}

impl FromStr for CrossingModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "percolation" | "perco" => Ok(CrossingModel::Percolation),
            "ising" | "ising_spin" => Ok(CrossingModel::IsingSpin),
            "fk" | "fk_ising" => Ok(CrossingModel::FkIsing),
            _ => {
                if let Some(body) = lower.strip_prefix("potts:") {
                    let q = body.trim().parse::<f64>().map_err(|e| Error::domain(e.to_string()))?;
                    Ok(CrossingModel::Potts(q))
                } else if let Some(body) = lower.strip_prefix("generic:") {
                    let parts: Vec<&str> = body.split(',').collect();
                    if parts.len() != 3 {
                        return Err(Error::domain("generic:<kappa>,<pI>,<pII> expected"));
                    }
                    let nums: Vec<f64> = parts
                        .iter()
                        .map(|p| p.trim().parse::<f64>().map_err(|e| Error::domain(e.to_string())))
                        .collect::<Result<_>>()?;
                    Ok(CrossingModel::Generic { kappa: nums[0], p_i: nums[1], p_ii: nums[2] })
                } else {
                    Err(Error::domain(format!("unknown crossing model \"{s}\"")))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn generic_symmetry_and_limits() {
        for kappa in [2.0, 3.0, 6.0, 7.2] {
            assert_relative_eq!(
                generic_crossing(0.5, kappa, 1.3, 1.3).unwrap(),
                0.5,
                max_relative = 1e-10
            );
            for x in [0.2, 0.7] {
                assert_eq!(generic_crossing(x, kappa, 1.0, 0.0).unwrap(), 1.0);
                assert_eq!(generic_crossing(x, kappa, 0.0, 1.0).unwrap(), 0.0);
                // P(x) + P(1−x) = 1 for symmetric weights
                let p = generic_crossing(x, kappa, 1.0, 1.0).unwrap();
                let q = generic_crossing(1.0 - x, kappa, 1.0, 1.0).unwrap();
                assert_relative_eq!(p + q, 1.0, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn generic_monotone_decreasing() {
        for kappa in [3.0, 6.0] {
            let mut prev = 1.0;
            for k in 1..40 {
                let x = k as f64 / 40.0;
                let p = generic_crossing(x, kappa, 1.0, 1.0).unwrap();
                assert!(p < prev, "kappa={kappa}: not decreasing at x={x}");
                assert!(p > 0.0 && p < 1.0);
                prev = p;
            }
        }
    }

    #[test]
    fn cardy_against_incomplete_beta() {
        // independent oracle: regularized incomplete Beta I_{1−x}(1/3, 1/3)
        for x in [0.1, 0.25, 0.5, 0.75, 0.9] {
            let oracle = statrs::function::beta::beta_reg(1.0 / 3.0, 1.0 / 3.0, 1.0 - x);
            assert_relative_eq!(cardy_crossing(x).unwrap(), oracle, max_relative = 1e-9);
        }
        assert_relative_eq!(cardy_crossing(0.5).unwrap(), 0.5, max_relative = 1e-10);
        assert!(cardy_crossing(1e-9).unwrap() > 0.995);
        assert!(cardy_crossing(1.0 - 1e-9).unwrap() < 0.005);
    }

    #[test]
    fn cardy_equals_generic_at_kappa6() {
        for k in 1..10 {
            let x = k as f64 / 10.0;
            assert_relative_eq!(
                cardy_crossing(x).unwrap(),
                generic_crossing(x, 6.0, 1.0, 1.0).unwrap(),
                max_relative = 1e-8
            );
        }
    }

    #[test]
    fn ising_matches_generic_at_kappa3() {
        assert_relative_eq!(ising_spin_crossing(0.5).unwrap(), 0.5, max_relative = 1e-9);
        assert!(ising_spin_crossing(1.0 - 1e-6).unwrap() < 1e-3);
        for k in 1..10 {
            let x = k as f64 / 10.0;
            assert_relative_eq!(
                ising_spin_crossing(x).unwrap(),
                generic_crossing(x, 3.0, 1.0, 1.0).unwrap(),
                max_relative = 1e-8,
                epsilon = 1e-8
            );
        }
    }

    #[test]
    fn fk_ising_values() {
        assert_relative_eq!(fk_ising_crossing(0.5).unwrap(), 0.5, max_relative = 1e-12);
        assert!(fk_ising_crossing(1e-9).unwrap() > 0.999);
        // direct arithmetic oracle at x = 3/4
        let x: f64 = 0.75;
        let num = ((1.0 - x) + (1.0 - x) * (1.0 - x).sqrt()).sqrt();
        let den = (x + x * x.sqrt()).sqrt() + num;
        assert_relative_eq!(fk_ising_crossing(x).unwrap(), num / den, max_relative = 1e-12);
        assert!((fk_ising_crossing(0.75).unwrap() - 0.3411).abs() < 5e-4);
        // generic hypergeometric route agrees with the closed form
        for k in 1..10 {
            let x = k as f64 / 10.0;
            assert_relative_eq!(
                fk_ising_crossing(x).unwrap(),
                generic_crossing(x, 16.0 / 3.0, 1.0, 1.0).unwrap(),
                max_relative = 1e-8
            );
        }
    }

    #[test]
    fn potts_map() {
        assert_relative_eq!(potts_kappa(2.0).unwrap(), 16.0 / 3.0, max_relative = 1e-12);
        assert_relative_eq!(potts_kappa(1.0).unwrap(), 6.0, max_relative = 1e-12);
        assert_relative_eq!(potts_kappa(0.0).unwrap(), 8.0, max_relative = 1e-12);
        assert_relative_eq!(potts_kappa(4.0).unwrap(), 4.0, max_relative = 1e-12);
        assert!(potts_kappa(4.5).is_err());
        // Q = 4cos²(4π/κ) round-trip
        for q in [0.5, 1.7, 3.2] {
            let kappa = potts_kappa(q).unwrap();
            let back = 4.0 * (4.0 * std::f64::consts::PI / kappa).cos().powi(2);
            assert_relative_eq!(back, q, max_relative = 1e-10);
        }
        // Q=1 reproduces percolation crossing
        assert_relative_eq!(
            potts_crossing(1.0, 0.3).unwrap(),
            cardy_crossing(0.3).unwrap(),
            max_relative = 1e-8
        );
    }

    #[test]
    fn model_parsing() {
        for s in ["percolation", "ising", "fk", "potts:2", "generic:6,1,1"] {
            let m: CrossingModel = s.parse().unwrap();
            let back: CrossingModel = m.to_string().parse().unwrap();
            assert_eq!(m, back);
        }
        assert!("bond".parse::<CrossingModel>().is_err());
        let rows = CrossingModel::Percolation.table(9).unwrap();
        assert_eq!(rows.len(), 9);
        assert_relative_eq!(rows[4].0, 0.5);
        assert_relative_eq!(rows[4].1, 0.5, max_relative = 1e-9);
    }
}
