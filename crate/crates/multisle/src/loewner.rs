//! Loewner-chain engine for `n` simultaneously growing curves.
//!
//! The coupled driving SDEs
//! `dX⁽ⁱ⁾ = dM⁽ⁱ⁾ + κ dq⁽ⁱ⁾ ∂_i log Z + Σ_{j≠i} 2 dq⁽ʲ⁾/(X⁽ⁱ⁾−X⁽ʲ⁾)`
//! are discretized with `dq⁽ⁱ⁾ = a_i dt`. Each global step of size `δt` is
//! realized as `n` sequential vertical-slit elementary maps of capacity
//! `2 a_i δt`; the pairwise repulsion is exactly the transport of the other
//! driving points under those maps, so the chain stays replayable and traces
//! reconstructable. Noise and the `κ ∂ log Z` drift are then added
//! Euler–Maruyama style with the gradient frozen at the step start.
//!
//! The step size adapts as `δt = dt_base · min(1, (min gap / G)²)`: drift and
//! repulsion scale like 1/gap, and resolving the Bessel-like approach to a
//! collision needs resolution proportional to gap².

use crate::arch::{classify_outcome, ArchConfiguration};
use crate::error::{Error, Result};
use crate::partition::{PartitionFunction, PartitionKind};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Forward vertical-slit map with pole `xi` and capacity `cap`, acting on a
/// real boundary point: `xi + sign(x−xi)·sqrt((x−xi)² + 2·cap)`.
#[inline]
pub fn slit_forward_real(x: f64, xi: f64, cap: f64) -> f64 {
    let d = x - xi;
    xi + d.signum() * (d * d + 2.0 * cap).sqrt()
}

/// Square root with nonnegative imaginary part (the branch mapping onto the
/// upper half plane).
#[inline]
fn sqrt_upper(w: Complex64) -> Complex64 {
    let s = w.sqrt();
    if s.im < 0.0 {
        -s
    } else {
        s
    }
}

/// Forward slit map on an interior point.
#[inline]
pub fn slit_forward(z: Complex64, xi: f64, cap: f64) -> Complex64 {
    let d = z - xi;
    xi + sqrt_upper(d * d + 2.0 * cap)
}

/// Inverse slit map (adds the slit back).
#[inline]
pub fn slit_inverse(w: Complex64, xi: f64, cap: f64) -> Complex64 {
    let d = w - xi;
    xi + sqrt_upper(d * d - 2.0 * cap)
}

/// One elementary map of the chain: curve id (1-based), driving position,
/// capacity increment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElementaryStep {
    pub curve: u32,
    pub xi: f64,
    pub cap: f64,
}

/// Result of pushing a point through the chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MapPoint {
    Interior(Complex64),
    /// The orbit entered the slit of the given elementary step.
    Swallowed { step: usize },
}

/// Time-ordered log of elementary maps; replays `f_t` and reconstructs
/// traces.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct LoewnerChain {
    steps: Vec<ElementaryStep>,
}

impl LoewnerChain {
    pub fn new() -> Self {
        LoewnerChain { steps: Vec::new() }
    }

    pub fn from_steps(steps: Vec<ElementaryStep>) -> Result<Self> {
        if steps.iter().any(|s| !(s.cap > 0.0)) {
            return Err(Error::domain("elementary capacities must be positive"));
        }
        Ok(LoewnerChain { steps })
    }

    pub fn steps(&self) -> &[ElementaryStep] {
        &self.steps
    }

    pub fn push(&mut self, step: ElementaryStep) {
        self.steps.push(step);
    }

    /// Total capacity `2t` accumulated by the chain.
    pub fn total_capacity(&self) -> f64 {
        self.steps.iter().map(|s| s.cap).sum()
    }

    /// Forward image of `z` (upper half plane) under the composed map,
    /// reporting swallowing when the orbit hits an elementary slit.
    pub fn map_point(&self, z: Complex64) -> MapPoint {
        let mut w = z;
        for (k, s) in self.steps.iter().enumerate() {
            let d = w - s.xi;
            if d.norm_sqr() <= 2.0 * s.cap * (1.0 + 1e-12) {
                return MapPoint::Swallowed { step: k };
            }
            w = s.xi + sqrt_upper(d * d + 2.0 * s.cap);
        }
        MapPoint::Interior(w)
    }

    /// Tip positions of curve `curve` (1-based), sampled every `stride`
    /// elementary steps of that curve (the final tip is always included).
    /// The tip grown at chain position `k` is `ξ_k + i·sqrt(2·cap_k)` in the
    /// coordinates before step `k`; composing the inverse maps in reverse
    /// order pulls it back to the physical plane.
    pub fn trace_points(&self, curve: u32, stride: usize) -> Result<Vec<Complex64>> {
        let stride = stride.max(1);
        let idx: Vec<usize> = self
            .steps
            .iter()
            .enumerate()
            .filter(|(_, s)| s.curve == curve)
            .map(|(k, _)| k)
            .collect();
        let mut selected: Vec<usize> = idx.iter().copied().step_by(stride).collect();
        if let Some(&last) = idx.last() {
            if selected.last() != Some(&last) {
                selected.push(last);
            }
        }
        let mut out = Vec::with_capacity(selected.len());
        for &k in &selected {
            let s = self.steps[k];
            let mut w = Complex64::new(s.xi, (2.0 * s.cap).sqrt());
            for j in (0..k).rev() {
                let p = self.steps[j];
                w = slit_inverse(w, p.xi, p.cap);
                if !(w.re.is_finite() && w.im.is_finite()) {
                    return Err(Error::numerical(format!(
                        "inverse map produced a non-finite point at step {j}"
                    )));
                }
            }
            // roundoff can leave a tiny negative imaginary part
            if w.im < 0.0 {
                w.im = 0.0;
            }
            out.push(w);
        }
        Ok(out)
    }

    /// Capacity estimate from the expansion at infinity:
    /// `(f(iY) − iY)·iY → 2t` as `Y → ∞`.
    pub fn laurent_capacity(&self) -> Result<f64> {
        let xi_max = self.steps.iter().map(|s| s.xi.abs()).fold(0.0f64, f64::max);
        let scale = (xi_max + (2.0 * self.total_capacity()).sqrt()).max(1.0);
        let y = 1e4 * scale;
        let z = Complex64::new(0.0, y);
        match self.map_point(z) {
            MapPoint::Interior(w) => Ok(((w - z) * z).re),
            MapPoint::Swallowed { .. } => {
                Err(Error::numerical("reference point unexpectedly swallowed"))
            }
        }
    }
}

/// Source of standard normal increments; the zero implementation turns the
/// SDE into its deterministic skeleton.
pub trait NoiseSource {
    fn fill_standard_normal(&mut self, out: &mut [f64]);
}

/// ChaCha-backed Gaussian noise with explicit seeding.
pub struct GaussianNoise {
    rng: ChaCha8Rng,
}

impl GaussianNoise {
    pub fn from_seed(seed: u64) -> Self {
        GaussianNoise { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Independent stream `index` of a master seed; results do not depend on
    /// scheduling when samples are distributed over threads.
    pub fn from_master(master_seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(index);
        GaussianNoise { rng }
    }
}

impl NoiseSource for GaussianNoise {
    fn fill_standard_normal(&mut self, out: &mut [f64]) {
        for v in out {
            *v = StandardNormal.sample(&mut self.rng);
        }
    }
}

/// All-zero increments.
pub struct ZeroNoise;

impl NoiseSource for ZeroNoise {
    fn fill_standard_normal(&mut self, out: &mut [f64]) {
        out.fill(0.0);
    }
}

/// Full specification of one multi-curve run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SleParameters {
    pub kappa: f64,
    pub initial_points: Vec<f64>,
    /// Growth-speed allocation `a_i ≥ 0`; normalized to Σ a_i = 1.
    pub speeds: Vec<f64>,
    pub partition: PartitionKind,
    pub dt_base: f64,
    /// Gap scale `G` of the adaptive step; defaults to the initial minimum
    /// adjacent gap.
    pub gap_scale: Option<f64>,
    /// Collision threshold; defaults to `1e−4 ×` (initial spread).
    pub collision_epsilon: Option<f64>,
    /// Stop once total capacity `2t` reaches this value.
    pub capacity_cap: f64,
    pub rng_seed: u64,
    /// Record the elementary-map log (needed for traces / capacity checks).
    pub record_chain: bool,
}

impl SleParameters {
    /// Convenience constructor with equal speeds and default knobs.
    pub fn new(kappa: f64, initial_points: Vec<f64>, partition: PartitionKind) -> Self {
        let n = initial_points.len();
        SleParameters {
            kappa,
            initial_points,
            speeds: vec![1.0 / n.max(1) as f64; n],
            partition,
            dt_base: 1e-3,
            gap_scale: None,
            collision_epsilon: None,
            capacity_cap: 50.0,
            rng_seed: 1,
            record_chain: false,
        }
    }

    /// Validate every constraint, reporting all violations at once. Returns
    /// the normalized parameters and a list of warnings (e.g. speeds that
    /// were rescaled to sum to one).
    pub fn validate(&self) -> std::result::Result<(SleParameters, Vec<String>), Vec<String>> {
        let mut errors = Vec::new();
        let mut warnings = Vec::new();
        if !(self.kappa > 0.0 && self.kappa < 8.0) {
            errors.push(format!("κ must lie in (0,8), got {}", self.kappa));
        }
        let n = self.initial_points.len();
        if n == 0 {
            errors.push("at least one initial point is required".into());
        }
        if self.initial_points.windows(2).any(|w| !(w[0] < w[1])) {
            errors.push("initial points must be strictly increasing".into());
        }
        let mut speeds = self.speeds.clone();
        if speeds.len() != n {
            errors.push(format!("{} speeds for {} points", speeds.len(), n));
        } else {
            if speeds.iter().any(|&a| !(a >= 0.0)) {
                errors.push("speeds must be nonnegative".into());
            }
            let sum: f64 = speeds.iter().sum();
            if !(sum > 0.0) {
                errors.push("speeds must not all vanish".into());
            } else if (sum - 1.0).abs() > 1e-12 {
                warnings.push(format!("speeds sum to {sum}; normalizing to 1"));
                for a in &mut speeds {
                    *a /= sum;
                }
            }
        }
        if !(self.dt_base > 0.0) {
            errors.push(format!("dt_base must be positive, got {}", self.dt_base));
        }
        if !(self.capacity_cap > 0.0) {
            errors.push(format!("capacity cap must be positive, got {}", self.capacity_cap));
        }
        if let Some(e) = self.collision_epsilon {
            if !(e > 0.0) {
                errors.push(format!("collision epsilon must be positive, got {e}"));
            }
        }
        if let Some(g) = self.gap_scale {
            if !(g > 0.0) {
                errors.push(format!("gap scale must be positive, got {g}"));
            }
        }
        if errors.is_empty() {
            if let Err(e) = PartitionFunction::new(self.partition.clone(), self.kappa, n) {
                errors.push(e.to_string());
            }
        }
        if errors.is_empty() {
            let mut resolved = self.clone();
            resolved.speeds = speeds;
            Ok((resolved, warnings))
        } else {
            Err(errors)
        }
    }

    fn spread(&self) -> f64 {
        match (self.initial_points.first(), self.initial_points.last()) {
            (Some(a), Some(b)) if b > a => b - a,
            _ => 1.0,
        }
    }

    pub fn resolved_epsilon(&self) -> f64 {
        self.collision_epsilon.unwrap_or(1e-4 * self.spread())
    }

    pub fn resolved_gap_scale(&self) -> f64 {
        self.gap_scale.unwrap_or_else(|| {
            self.initial_points
                .windows(2)
                .map(|w| w[1] - w[0])
                .fold(f64::INFINITY, f64::min)
                .min(self.spread())
                .max(1e-12)
        })
    }
}

/// Why a run stopped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "detail")]
pub enum StopReason {
    /// Fewer than two curves left alive: no further collision can occur.
    #[serde(rename = "collision-complete")]
    CollisionComplete,
    #[serde(rename = "capacity-cap")]
    CapacityCap,
    #[serde(rename = "numerical-failure")]
    NumericalFailure(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub steps: u64,
    pub min_gap_seen: f64,
    pub final_alive: usize,
}

/// Everything observable from one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationOutcome {
    pub stop: StopReason,
    /// Stopping time τ (half the final capacity).
    pub tau: f64,
    pub capacity: f64,
    /// Ordered collisions, 1-based curve indices.
    pub collisions: Vec<(usize, usize)>,
    pub arch: ArchConfiguration,
    pub diagnostics: Diagnostics,
    /// Set by the deterministic κ→0 integrator.
    #[serde(default)]
    pub classical: bool,
}

impl SimulationOutcome {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("outcome serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::domain(format!("bad outcome JSON: {e}")))
    }
}

/// Mutable state of one run. One simulation owns its state; concurrent runs
/// must use separate instances.
pub struct Simulation {
    kappa: f64,
    dt_base: f64,
    gap_scale: f64,
    epsilon: f64,
    capacity_cap: f64,
    n: usize,
    positions: Vec<f64>,
    speeds: Vec<f64>,
    alive: Vec<bool>,
    z: PartitionFunction,
    t: f64,
    collisions: Vec<(usize, usize)>,
    chain: Option<LoewnerChain>,
    done: Option<StopReason>,
    diag: Diagnostics,
    // scratch buffers reused across steps
    packed: Vec<f64>,
    grad: Vec<f64>,
    normals: Vec<f64>,
}

impl Simulation {
    pub fn new(params: &SleParameters) -> Result<Self> {
        let (params, _warnings) =
            params.validate().map_err(|errs| Error::domain(errs.join("; ")))?;
        let n = params.initial_points.len();
        let z = PartitionFunction::new(params.partition.clone(), params.kappa, n)?;
        Ok(Simulation {
            kappa: params.kappa,
            dt_base: params.dt_base,
            gap_scale: params.resolved_gap_scale(),
            epsilon: params.resolved_epsilon(),
            capacity_cap: params.capacity_cap,
            n,
            positions: params.initial_points.clone(),
            speeds: params.speeds.clone(),
            alive: vec![true; n],
            z,
            t: 0.0,
            collisions: Vec::new(),
            chain: params.record_chain.then(LoewnerChain::new),
            done: None,
            diag: Diagnostics { steps: 0, min_gap_seen: f64::INFINITY, final_alive: n },
            packed: Vec::with_capacity(n),
            grad: vec![0.0; n],
            normals: vec![0.0; n],
        })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn capacity(&self) -> f64 {
        2.0 * self.t
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn alive(&self) -> &[bool] {
        &self.alive
    }

    pub fn alive_count(&self) -> usize {
        self.alive.iter().filter(|&&a| a).count()
    }

    pub fn alive_positions(&self) -> Vec<f64> {
        self.positions.iter().zip(&self.alive).filter_map(|(&x, &a)| a.then_some(x)).collect()
    }

    pub fn partition(&self) -> &PartitionFunction {
        &self.z
    }

    pub fn collisions(&self) -> &[(usize, usize)] {
        &self.collisions
    }

    pub fn chain(&self) -> Option<&LoewnerChain> {
        self.chain.as_ref()
    }

    pub fn done(&self) -> Option<&StopReason> {
        self.done.as_ref()
    }

    fn min_adjacent_gap(&self) -> f64 {
        let mut prev: Option<f64> = None;
        let mut min = f64::INFINITY;
        for i in 0..self.n {
            if !self.alive[i] {
                continue;
            }
            if let Some(p) = prev {
                min = min.min(self.positions[i] - p);
            }
            prev = Some(self.positions[i]);
        }
        min
    }

    /// Adaptive step size `dt_base · min(1, (gap/G)²)`, clamped so the
    /// capacity cap is hit exactly.
    pub fn step_dt(&self) -> f64 {
        let g = self.min_adjacent_gap();
        let factor = if g.is_finite() { (g / self.gap_scale).powi(2).min(1.0) } else { 1.0 };
        let dt = self.dt_base * factor;
        dt.min(0.5 * (self.capacity_cap - self.capacity()).max(0.0))
    }

    /// Advance one adaptive step: elementary-slit transports, then noise and
    /// drift, then collision processing. No-op once the run has stopped.
    /// Numerical problems stop the run with `StopReason::NumericalFailure`
    /// instead of returning an error.
    pub fn tick(&mut self, noise: &mut dyn NoiseSource) -> Result<()> {
        if self.done.is_some() {
            return Ok(());
        }
        let dt = self.step_dt();
        if dt <= 0.0 {
            self.finish(StopReason::CapacityCap);
            return Ok(());
        }

        // gradient of log Z at the step start
        self.packed.clear();
        self.packed
            .extend(self.positions.iter().zip(&self.alive).filter_map(|(&x, &a)| a.then_some(x)));
        let n_alive = self.packed.len();
        let grad = &mut self.grad[..n_alive];
        if let Err(e) = self.z.grad_log_into(&self.packed, grad) {
            self.finish(StopReason::NumericalFailure(format!("drift evaluation: {e}")));
            return Ok(());
        }

        // sequential elementary maps, exact transport of the other points
        for i in 0..self.n {
            if !self.alive[i] || self.speeds[i] == 0.0 {
                continue;
            }
            let cap = 2.0 * self.speeds[i] * dt;
            let xi = self.positions[i];
            for j in 0..self.n {
                if j != i && self.alive[j] {
                    self.positions[j] = slit_forward_real(self.positions[j], xi, cap);
                }
            }
            if let Some(chain) = &mut self.chain {
                chain.push(ElementaryStep { curve: (i + 1) as u32, xi, cap });
            }
        }

        // noise and partition drift (Euler–Maruyama)
        noise.fill_standard_normal(&mut self.normals);
        let mut k = 0;
        for i in 0..self.n {
            if !self.alive[i] {
                continue;
            }
            let a = self.speeds[i];
            self.positions[i] +=
                self.kappa * a * dt * self.grad[k] + (self.kappa * a * dt).sqrt() * self.normals[i];
            k += 1;
        }
        self.t += dt;
        self.diag.steps += 1;

        // ordering must survive the noise
        let mut prev: Option<f64> = None;
        for i in 0..self.n {
            if !self.alive[i] {
                continue;
            }
            let x = self.positions[i];
            if !x.is_finite() {
                self.finish(StopReason::NumericalFailure("non-finite position".into()));
                return Ok(());
            }
            if let Some(p) = prev {
                if x <= p {
                    self.finish(StopReason::NumericalFailure(format!(
                        "ordering violated at step {} (dt={dt:e})",
                        self.diag.steps
                    )));
                    return Ok(());
                }
            }
            prev = Some(x);
        }
        let g = self.min_adjacent_gap();
        if g.is_finite() {
            self.diag.min_gap_seen = self.diag.min_gap_seen.min(g);
        }

        self.process_collisions();
        if self.done.is_none() {
            if self.alive_count() < 2 && self.alive_count() < self.n {
                self.finish(StopReason::CollisionComplete);
            } else if self.capacity() >= self.capacity_cap {
                self.finish(StopReason::CapacityCap);
            }
        }
        Ok(())
    }

    fn process_collisions(&mut self) {
        loop {
            // closest adjacent alive pair below threshold
            let mut best: Option<(usize, usize, f64)> = None;
            let mut prev: Option<usize> = None;
            for i in 0..self.n {
                if !self.alive[i] {
                    continue;
                }
                if let Some(p) = prev {
                    let gap = self.positions[i] - self.positions[p];
                    if gap < self.epsilon && best.map_or(true, |(_, _, bg)| gap < bg) {
                        best = Some((p, i, gap));
                    }
                }
                prev = Some(i);
            }
            let Some((i, j, _)) = best else { break };
            self.collisions.push((i + 1, j + 1));
            self.alive[i] = false;
            self.alive[j] = false;
            if self.alive_count() == 0 {
                break;
            }
            let alive_sum: f64 =
                self.speeds.iter().zip(&self.alive).filter_map(|(&a, &al)| al.then_some(a)).sum();
            if alive_sum > 0.0 {
                for (a, &al) in self.speeds.iter_mut().zip(&self.alive) {
                    if al {
                        *a /= alive_sum;
                    }
                }
            } else if self.alive_count() >= 2 {
                self.finish(StopReason::NumericalFailure(
                    "no growth speed left among surviving curves".into(),
                ));
                return;
            }
            match self.z.reduce() {
                Ok(z) => self.z = z,
                Err(e) => {
                    if self.alive_count() >= 2 {
                        self.finish(StopReason::NumericalFailure(format!(
                            "partition reduction: {e}"
                        )));
                        return;
                    }
                }
            }
        }
    }

    fn finish(&mut self, reason: StopReason) {
        self.diag.final_alive = self.alive_count();
        self.done = Some(reason);
    }

    /// Run to completion and classify.
    pub fn run(mut self, noise: &mut dyn NoiseSource) -> Result<SimulationOutcome> {
        while self.done.is_none() {
            self.tick(noise)?;
        }
        Ok(self.into_outcome())
    }

    pub fn into_outcome(mut self) -> SimulationOutcome {
        let stop = self.done.clone().unwrap_or(StopReason::CapacityCap);
        self.diag.final_alive = self.alive_count();
        let arch = classify_outcome(self.n, &self.collisions)
            .expect("engine collisions are adjacent by construction");
        SimulationOutcome {
            stop,
            tau: self.t,
            capacity: 2.0 * self.t,
            collisions: self.collisions,
            arch,
            diagnostics: self.diag,
            classical: false,
        }
    }

    /// Detach the recorded chain (if any).
    pub fn take_chain(&mut self) -> Option<LoewnerChain> {
        self.chain.take()
    }
}

/// Run one simulation with Gaussian noise seeded from the parameters.
pub fn evolve_until(params: &SleParameters) -> Result<SimulationOutcome> {
    let sim = Simulation::new(params)?;
    let mut noise = GaussianNoise::from_seed(params.rng_seed);
    sim.run(&mut noise)
}

/// Trace polylines as CSV rows `sample_id,curve_id,point_index,re,im`.
pub fn trace_csv(
    chain: &LoewnerChain,
    n_curves: usize,
    sample_id: u64,
    stride: usize,
) -> Result<String> {
    let mut out = String::from("sample_id,curve_id,point_index,re,im\n");
    for curve in 1..=n_curves as u32 {
        let pts = chain.trace_points(curve, stride)?;
        for (k, p) in pts.iter().enumerate() {
            out.push_str(&format!("{sample_id},{curve},{k},{:.12e},{:.12e}\n", p.re, p.im));
        }
    }
    Ok(out)
}

/// Parse rows produced by [`trace_csv`].
pub fn parse_trace_csv(s: &str) -> Result<Vec<(u64, u32, usize, f64, f64)>> {
    let mut rows = Vec::new();
    for (ln, line) in s.lines().enumerate() {
        if ln == 0 {
            if line != "sample_id,curve_id,point_index,re,im" {
                return Err(Error::domain("unexpected trace CSV header"));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 5 {
            return Err(Error::domain(format!("trace CSV row {ln} has {} fields", parts.len())));
        }
        rows.push((
            parts[0].parse().map_err(|e| Error::domain(format!("row {ln}: {e}")))?,
            parts[1].parse().map_err(|e| Error::domain(format!("row {ln}: {e}")))?,
            parts[2].parse().map_err(|e| Error::domain(format!("row {ln}: {e}")))?,
            parts[3].parse().map_err(|e| Error::domain(format!("row {ln}: {e}")))?,
            parts[4].parse().map_err(|e| Error::domain(format!("row {ln}: {e}")))?,
        ));
    }
    Ok(rows)
}
