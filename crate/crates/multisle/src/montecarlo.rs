//! Monte-Carlo estimation of arch-topology statistics and hitting laws,
//! analytic companions (effective Bessel dimension, mixed two-curve hitting
//! probability), and the partition-ratio martingale diagnostic.
//!
//! Samples are independent work items seeded as stream `i` of the master
//! seed, so estimates are identical whatever the parallelism; aggregation
//! walks the sample vector in index order.

use crate::error::{Error, Result};
use crate::loewner::{GaussianNoise, SimulationOutcome, SleParameters, StopReason};
use crate::partition::PartitionFunction;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Work order for a batch of independent runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationPlan {
    pub params: SleParameters,
    pub n_samples: usize,
    pub master_seed: u64,
    /// Thread-count hint; `None` uses the global pool, `Some(1)` forces a
    /// sequential run. Results never depend on this.
    #[serde(default)]
    pub parallelism: Option<usize>,
    /// Stop each sample at its first collision. For four points in the
    /// fully-paired sector the first collision already determines the
    /// topology; survivors are reported as infinity lines.
    #[serde(default)]
    pub first_collision_only: bool,
}

impl EstimationPlan {
    pub fn new(params: SleParameters, n_samples: usize, master_seed: u64) -> Self {
        EstimationPlan {
            params,
            n_samples,
            master_seed,
            parallelism: None,
            first_collision_only: false,
        }
    }
}

/// Wilson 95% score interval (z = 1.96) for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.96f64;
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = p + z2 / (2.0 * nf);
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    (((center - half) / denom).max(0.0), ((center + half) / denom).min(1.0))
}

/// Arch-topology counts with Wilson intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchEstimate {
    pub schema: String,
    pub plan: EstimationPlan,
    /// Counts per canonical arch key; failures excluded.
    pub arch_counts: BTreeMap<String, u64>,
    pub estimates: BTreeMap<String, f64>,
    pub ci: BTreeMap<String, (f64, f64)>,
    pub failures: u64,
    pub mean_stop_capacity: f64,
    pub runtime_s: f64,
}

impl ArchEstimate {
    pub fn probability(&self, key: &str) -> f64 {
        self.estimates.get(key).copied().unwrap_or(0.0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::domain(format!("bad report JSON: {e}")))
    }
}

fn now_seconds() -> f64 {
    #[cfg(target_arch = "wasm32")]
    {
        0.0
    }
    #[cfg(not(target_arch = "wasm32"))]
    {
        use std::time::{SystemTime, UNIX_EPOCH};
        SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
    }
}

/// Run the closure for indices `0..n`, optionally in parallel; the output
/// vector is index-ordered either way.
fn run_samples<T, F>(n: usize, parallelism: Option<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        match parallelism {
            Some(1) => (0..n as u64).map(f).collect(),
            Some(k) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(k.max(1))
                    .build()
                    .expect("thread pool");
                pool.install(|| (0..n as u64).into_par_iter().map(&f).collect())
            }
            None => (0..n as u64).into_par_iter().map(&f).collect(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = parallelism;
        (0..n as u64).map(f).collect()
    }
}

/// One sample of the plan: independent noise stream `index`.
pub fn sample_outcome(plan: &EstimationPlan, index: u64) -> Result<SimulationOutcome> {
    let mut sim = crate::loewner::Simulation::new(&plan.params)?;
    let mut noise = GaussianNoise::from_master(plan.master_seed, index);
    if plan.first_collision_only {
        while sim.done().is_none() && sim.collisions().is_empty() {
            sim.tick(&mut noise)?;
        }
        Ok(sim.into_outcome())
    } else {
        sim.run(&mut noise)
    }
}

/// Estimate arch probabilities by repeated simulation. Numerical failures
/// are counted and reported, never silently dropped; a failure rate above 5%
/// aborts with a harness error (the discretization is unfit).
pub fn estimate_arch_probabilities(plan: &EstimationPlan) -> Result<ArchEstimate> {
    if plan.n_samples == 0 {
        return Err(Error::Harness("n_samples must be at least 1".into()));
    }
    plan.params.validate().map_err(|e| Error::domain(e.join("; ")))?;
    let started = now_seconds();
    let outcomes = run_samples(plan.n_samples, plan.parallelism, |i| sample_outcome(plan, i));
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    let mut failures = 0u64;
    let mut cap_sum = 0.0;
    let mut ok = 0u64;
    for res in &outcomes {
        match res {
            Ok(o) => {
                if matches!(o.stop, StopReason::NumericalFailure(_)) {
                    failures += 1;
                } else {
                    *counts.entry(o.arch.key()).or_insert(0) += 1;
                    cap_sum += o.capacity;
                    ok += 1;
                }
            }
            Err(_) => failures += 1,
        }
    }
    if failures as f64 > 0.05 * plan.n_samples as f64 {
        return Err(Error::Harness(format!(
            "{failures} of {} samples failed numerically",
            plan.n_samples
        )));
    }
    let mut estimates = BTreeMap::new();
    let mut ci = BTreeMap::new();
    for (key, &k) in &counts {
        estimates.insert(key.clone(), k as f64 / ok.max(1) as f64);
        ci.insert(key.clone(), wilson_interval(k, ok));
    }
    Ok(ArchEstimate {
        schema: "multisle/report/v1".into(),
        plan: plan.clone(),
        arch_counts: counts,
        estimates,
        ci,
        failures,
        mean_stop_capacity: if ok > 0 { cap_sum / ok as f64 } else { f64::NAN },
        runtime_s: now_seconds() - started,
    })
}

/// Effective dimension of the two-curve gap process, `1 + 2Δ + 4/κ`.
/// Below 2 the gap hits zero almost surely.
pub fn bessel_effective_dimension(kappa: f64, delta: f64) -> Result<f64> {
    if kappa <= 0.0 {
        return Err(Error::domain("kappa must be positive"));
    }
    Ok(1.0 + 2.0 * delta + 4.0 / kappa)
}

/// Hitting probability of the mixed two-curve system started at gap `y`:
/// `λ / (λ + μ y^{(8−κ)/κ})`.
pub fn hitting_probability_mixed(kappa: f64, lambda: f64, mu: f64, y: f64) -> Result<f64> {
    if !(0.0 < kappa && kappa < 8.0) {
        return Err(Error::domain("kappa must lie in (0,8)"));
    }
    if !(y > 0.0) {
        return Err(Error::domain("initial gap must be positive"));
    }
    if lambda < 0.0 || mu < 0.0 || lambda + mu <= 0.0 {
        return Err(Error::domain("weights must be ≥ 0, not both zero"));
    }
    Ok(lambda / (lambda + mu * y.powf((8.0 - kappa) / kappa)))
}

/// Empirical hitting frequency at two capacity caps (the second quantifies
/// the finite-horizon bias). Identical seed streams couple the two runs, so
/// the shift is the exact per-path monotone correction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MixedHittingEstimate {
    pub frequency: f64,
    pub ci: (f64, f64),
    pub cap: f64,
    pub frequency_alt_cap: f64,
    pub ci_alt_cap: (f64, f64),
    pub alt_cap: f64,
    pub cap_shift: f64,
    pub failures: u64,
}

pub fn estimate_mixed_hitting(plan: &EstimationPlan, alt_cap: f64) -> Result<MixedHittingEstimate> {
    let hit = |cap: f64| -> Result<(u64, u64, u64)> {
        let mut p = plan.clone();
        p.params.capacity_cap = cap;
        let outcomes = run_samples(p.n_samples, p.parallelism, |i| sample_outcome(&p, i));
        let mut hits = 0u64;
        let mut ok = 0u64;
        let mut failures = 0u64;
        for res in &outcomes {
            match res {
                Ok(o) => match o.stop {
                    StopReason::NumericalFailure(_) => failures += 1,
                    StopReason::CollisionComplete => {
                        hits += 1;
                        ok += 1;
                    }
                    StopReason::CapacityCap => ok += 1,
                },
                Err(_) => failures += 1,
            }
        }
        if failures as f64 > 0.05 * p.n_samples as f64 {
            return Err(Error::Harness(format!("{failures} failed samples")));
        }
        Ok((hits, ok, failures))
    };
    let (h1, n1, f1) = hit(plan.params.capacity_cap)?;
    let (h2, n2, f2) = hit(alt_cap)?;
    let freq1 = h1 as f64 / n1.max(1) as f64;
    let freq2 = h2 as f64 / n2.max(1) as f64;
    Ok(MixedHittingEstimate {
        frequency: freq1,
        ci: wilson_interval(h1, n1),
        cap: plan.params.capacity_cap,
        frequency_alt_cap: freq2,
        ci_alt_cap: wilson_interval(h2, n2),
        alt_cap,
        cap_shift: freq2 - freq1,
        failures: f1 + f2,
    })
}

/// Sample means of `Z̃(X_t)/Z(X_t)` at fixed capacity checkpoints, with
/// stopped samples contributing their frozen value (optional stopping).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MartingaleDiagnostic {
    pub checkpoints: Vec<f64>,
    pub initial: f64,
    pub means: Vec<f64>,
    pub std_errs: Vec<f64>,
    pub n_samples: usize,
    pub failures: u64,
}

impl MartingaleDiagnostic {
    /// Largest |mean − initial| / stderr over the checkpoints.
    pub fn max_sigma_excursion(&self) -> f64 {
        self.means
            .iter()
            .zip(&self.std_errs)
            .map(|(m, s)| ((m - self.initial) / s.max(1e-300)).abs())
            .fold(0.0, f64::max)
    }
}

/// Track the quotient of an alternative numerator `Z̃` against the plan's
/// partition function along the flow. For admissible `Z̃` the quotient is a
/// martingale and the sample means stay flat; for anything else they drift.
pub fn martingale_diagnostic<F>(
    plan: &EstimationPlan,
    numerator: F,
    checkpoints: &[f64],
) -> Result<MartingaleDiagnostic>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    if checkpoints.is_empty() || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("checkpoints must be strictly increasing"));
    }
    let (params, _) = plan.params.validate().map_err(|e| Error::domain(e.join("; ")))?;
    let z0 =
        PartitionFunction::new(params.partition.clone(), params.kappa, params.initial_points.len())?;
    let ratio = |x: &[f64]| -> Result<f64> { Ok(numerator(x)? / z0.value(x)?) };
    let initial = ratio(&params.initial_points)?;

    let per_sample = |i: u64| -> Result<Vec<f64>> {
        let mut sim = crate::loewner::Simulation::new(&params)?;
        let mut noise = GaussianNoise::from_master(plan.master_seed, i);
        let mut vals = Vec::with_capacity(checkpoints.len());
        let mut frozen: Option<f64> = None;
        let mut k = 0;
        while k < checkpoints.len() {
            if frozen.is_none() && (sim.done().is_some() || !sim.collisions().is_empty()) {
                // positions of dead curves stay at their collision values
                frozen = Some(ratio(sim.positions())?);
            }
            if let Some(v) = frozen {
                while k < checkpoints.len() {
                    vals.push(v);
                    k += 1;
                }
                break;
            }
            if sim.capacity() >= checkpoints[k] {
                vals.push(ratio(sim.positions())?);
                k += 1;
                continue;
            }
            sim.tick(&mut noise)?;
        }
        Ok(vals)
    };
    let rows = run_samples(plan.n_samples, plan.parallelism, per_sample);
    let mut failures = 0u64;
    let mut sums = vec![0.0; checkpoints.len()];
    let mut sumsq = vec![0.0; checkpoints.len()];
    let mut ok = 0usize;
    for r in &rows {
        match r {
            Ok(vals) => {
                ok += 1;
                for (j, v) in vals.iter().enumerate() {
                    sums[j] += v;
                    sumsq[j] += v * v;
                }
            }
            Err(_) => failures += 1,
        }
    }
    if failures as f64 > 0.05 * plan.n_samples as f64 {
        return Err(Error::Harness(format!("{failures} failed martingale samples")));
    }
    if ok < 2 {
        return Err(Error::Harness("not enough successful samples".into()));
    }
    let nf = ok as f64;
    let means: Vec<f64> = sums.iter().map(|s| s / nf).collect();
    let std_errs: Vec<f64> = sumsq
        .iter()
        .zip(&means)
        .map(|(sq, m)| ((sq / nf - m * m).max(0.0) / (nf - 1.0)).sqrt())
        .collect();
    Ok(MartingaleDiagnostic {
        checkpoints: checkpoints.to_vec(),
        initial,
        means,
        std_errs,
        n_samples: ok,
        failures,
    })
}
