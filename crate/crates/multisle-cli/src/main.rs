//! Command-line front end: analytic crossing tables, Monte-Carlo runs,
//! partition-function evaluation, arch enumeration, and the deterministic
//! classical system.

mod config;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use config::{parse_f64, parse_f64_list, parse_u64, parse_usize, FileConfig};
use multisle::arch;
use multisle::classical;
use multisle::crossing::{crossing_csv, CrossingModel};
use multisle::loewner::{trace_csv, GaussianNoise, Simulation, SleParameters};
use multisle::montecarlo::{estimate_arch_probabilities, sample_outcome, EstimationPlan};
use multisle::partition::{PartitionFunction, PartitionKind};
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

const DEFAULT_DT: f64 = 1e-3;
const DEFAULT_CAP: f64 = 50.0;
const DEFAULT_SAMPLES: usize = 1000;
const DEFAULT_SEED: u64 = 12345;
const DEFAULT_GRID: usize = 9;
const DEFAULT_STRIDE: usize = 50;

#[derive(Parser)]
#[command(
    name = "multisle",
    about = "Multiple-SLE laboratory: crossing formulas, arch statistics, Loewner simulation",
    version
)]
struct Cli {
    /// Flat key=value configuration file; flags override file entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print the documented defaults and exit.
    #[arg(long, global = true)]
    show_defaults: bool,
    #[command(subcommand)]
    cmd: Option<Cmd>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Analytic crossing-probability tables.
    Crossing(CrossingArgs),
    /// Monte-Carlo arch estimates (optionally with traces and raw outcomes).
    Simulate(SimulateArgs),
    /// Partition-function values, log-gradients and null-vector residuals.
    Partition(PartitionArgs),
    /// Enumerate or count arch configurations.
    Arch(ArchArgs),
    /// Classical κ→0 branches and deterministic runs.
    Classical(ClassicalArgs),
}

#[derive(clap::Args)]
struct CrossingArgs {
    /// percolation | ising | fk | potts:<Q> | generic:<kappa>,<pI>,<pII>
    #[arg(long)]
    model: Option<String>,
    /// Number of interior grid points x_k = k/(grid+1).
    #[arg(long)]
    grid: Option<usize>,
    /// Single evaluation point instead of a grid.
    #[arg(long)]
    x: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv (default) or json.
    #[arg(long)]
    format: Option<String>,
}

#[derive(clap::Args)]
struct SimulateArgs {
    #[arg(long)]
    kappa: Option<f64>,
    /// Comma-separated boundary seeds x_1 < … < x_n.
    #[arg(long)]
    points: Option<String>,
    /// Shorthand for the crossing geometry: points 0,x,1 with the symmetric
    /// four-point blocks and the fourth point at infinity.
    #[arg(long)]
    x: Option<f64>,
    /// Comma-separated growth speeds (normalized to sum 1).
    #[arg(long)]
    speeds: Option<String>,
    /// Z0 | Z2 | mixture:<λ>,<μ> | chordal | triple | fourpoint:<pI>,<pII> | constant
    #[arg(long)]
    partition: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Base step of the adaptive integrator.
    #[arg(long)]
    dt: Option<f64>,
    /// Collision threshold (default 1e-4 × initial spread).
    #[arg(long)]
    epsilon: Option<f64>,
    /// Capacity cap 2t.
    #[arg(long)]
    cap: Option<f64>,
    /// Gap scale G of the adaptive step (default: initial minimum gap).
    #[arg(long)]
    gap_scale: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// json (default) or csv summary.
    #[arg(long)]
    format: Option<String>,
    /// Write trace polylines of the first sample to this CSV file.
    #[arg(long)]
    traces: Option<PathBuf>,
    /// Write one outcome JSON object per sample to this file.
    #[arg(long)]
    outcomes: Option<PathBuf>,
    /// Keep every k-th trace point.
    #[arg(long)]
    stride: Option<usize>,
}

#[derive(clap::Args)]
struct PartitionArgs {
    #[arg(long)]
    partition: Option<String>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    points: Option<String>,
    /// For the four-point blocks: tabulate Z_I, Z_II on a cross-ratio grid.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv (default) or json.
    #[arg(long)]
    format: Option<String>,
}

#[derive(clap::Args)]
struct ArchArgs {
    #[arg(long)]
    n: Option<usize>,
    /// Pair count; omit to print the dimension of every sector.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// json (default) or csv.
    #[arg(long)]
    format: Option<String>,
}

#[derive(clap::Args)]
struct ClassicalArgs {
    #[arg(long)]
    points: Option<String>,
    /// Integrate the deterministic system on this branch index.
    #[arg(long)]
    integrate: Option<usize>,
    #[arg(long)]
    speeds: Option<String>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    cap: Option<f64>,
    /// Write trace polylines of the integrated run to this CSV file.
    #[arg(long)]
    traces: Option<PathBuf>,
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    if cli.show_defaults {
        println!("{}", defaults_json());
        return;
    }
    let Some(cmd) = cli.cmd else {
        eprintln!("{{\"errors\":[\"a subcommand is required (try --help)\"]}}");
        std::process::exit(2);
    };
    let file = match cli.config.as_deref().map(FileConfig::load).transpose() {
        Ok(f) => f.unwrap_or_default(),
        Err(errors) => exit_validation(errors),
    };
    let result = match cmd {
        Cmd::Crossing(args) => run_crossing(args, &file),
        Cmd::Simulate(args) => run_simulate(args, &file),
        Cmd::Partition(args) => run_partition(args, &file),
        Cmd::Arch(args) => run_arch(args, &file),
        Cmd::Classical(args) => run_classical(args, &file),
    };
    if let Err(e) = result {
        match e.downcast_ref::<Validation>() {
            Some(v) => exit_validation(v.0.clone()),
            None => {
                eprintln!("{}", serde_json::json!({ "error": e.to_string() }));
                std::process::exit(1);
            }
        }
    }
}

fn defaults_json() -> String {
    serde_json::to_string_pretty(&serde_json::json!({
        "dt": DEFAULT_DT,
        "epsilon": "1e-4 * (initial spread)",
        "gap-scale": "initial minimum adjacent gap",
        "cap": DEFAULT_CAP,
        "samples": DEFAULT_SAMPLES,
        "seed": DEFAULT_SEED,
        "grid": DEFAULT_GRID,
        "stride": DEFAULT_STRIDE,
        "speeds": "equal, normalized to sum 1",
        "format": { "crossing": "csv", "simulate": "json", "partition": "csv", "arch": "json", "classical": "json" },
        "threads": "MULTISLE_THREADS caps the worker count (default: all cores)",
    }))
    .expect("static json")
}

/// Aggregated validation failures (reported all at once, exit code 2).
#[derive(Debug)]
struct Validation(Vec<String>);

impl std::fmt::Display for Validation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0.join("; "))
    }
}

impl std::error::Error for Validation {}

fn exit_validation(errors: Vec<String>) -> ! {
    eprintln!("{}", serde_json::json!({ "errors": errors }));
    std::process::exit(2);
}

fn write_output(out: Option<&PathBuf>, body: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, body)
            .with_context(|| format!("cannot write {}", path.display()))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body.as_bytes())?;
            if !body.ends_with('\n') {
                stdout.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

fn threads_from_env(errors: &mut Vec<String>) -> Option<usize> {
    match std::env::var("MULTISLE_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(0) | Err(_) => {
                errors.push(format!("MULTISLE_THREADS must be a positive integer, got \"{v}\""));
                None
            }
            Ok(n) => Some(n),
        },
        Err(_) => None,
    }
}

fn run_crossing(mut args: CrossingArgs, file: &FileConfig) -> anyhow::Result<()> {
    let mut errors = Vec::new();
    file.fill(&mut args.model, "model", |s| Ok(s.to_string()), &mut errors);
    file.fill(&mut args.grid, "grid", parse_usize, &mut errors);
    file.fill(&mut args.x, "x", parse_f64, &mut errors);
    file.fill(&mut args.format, "format", |s| Ok(s.to_string()), &mut errors);
    file.fill(&mut args.out, "out", |s| Ok(PathBuf::from(s)), &mut errors);

    let model = match &args.model {
        None => {
            errors.push("--model is required (percolation|ising|fk|potts:Q|generic:kappa,pI,pII)".into());
            None
        }
        Some(s) => match CrossingModel::from_str(s) {
            Ok(m) => Some(m),
            Err(e) => {
                errors.push(e.to_string());
                None
            }
        },
    };
    let format = resolve_format(&args.format, "csv", &mut errors);
    if !errors.is_empty() {
        bail!(Validation(errors));
    }
    let model = model.expect("validated");
    let rows = match args.x {
        Some(x) => vec![(x, model.probability(x)?)],
        None => model.table(args.grid.unwrap_or(DEFAULT_GRID))?,
    };
    let body = match format.as_str() {
        "csv" => crossing_csv(&rows),
        _ => serde_json::to_string_pretty(&serde_json::json!({
            "model": model.to_string(),
            "rows": rows.iter().map(|(x, p)| serde_json::json!({"x": x, "p": p})).collect::<Vec<_>>(),
        }))?,
    };
    write_output(args.out.as_ref(), &body)
}

fn resolve_format(opt: &Option<String>, default: &str, errors: &mut Vec<String>) -> String {
    match opt.as_deref() {
        None => default.to_string(),
        Some("csv") => "csv".into(),
        Some("json") => "json".into(),
        Some(other) => {
            errors.push(format!("format must be csv or json, got \"{other}\""));
            default.to_string()
        }
    }
}

fn build_params(
    kappa: Option<f64>,
    points: Option<Vec<f64>>,
    x: Option<f64>,
    speeds: Option<Vec<f64>>,
    partition: Option<String>,
    dt: Option<f64>,
    epsilon: Option<f64>,
    cap: Option<f64>,
    gap_scale: Option<f64>,
    seed: Option<u64>,
    errors: &mut Vec<String>,
) -> Option<SleParameters> {
    let kappa = match kappa {
        Some(k) => k,
        None => {
            errors.push("--kappa is required".into());
            return None;
        }
    };
    let (points, partition_kind) = match (points, x) {
        (Some(_), Some(_)) => {
            errors.push("--points and --x are mutually exclusive".into());
            return None;
        }
        (None, Some(x)) => {
            if !(0.0 < x && x < 1.0) {
                errors.push(format!("--x must lie in (0,1), got {x}"));
                return None;
            }
            let kind = partition.as_deref().unwrap_or("fourpoint:1,1").to_string();
            (vec![0.0, x, 1.0], kind)
        }
        (Some(p), None) => match partition {
            Some(kind) => (p, kind),
            None => {
                errors.push("--partition is required with --points".into());
                return None;
            }
        },
        (None, None) => {
            errors.push("either --points or --x is required".into());
            return None;
        }
    };
    let kind = match PartitionKind::from_str(&partition_kind) {
        Ok(k) => k,
        Err(e) => {
            errors.push(e.to_string());
            return None;
        }
    };
    let mut params = SleParameters::new(kappa, points, kind);
    if let Some(s) = speeds {
        params.speeds = s;
    }
    params.dt_base = dt.unwrap_or(DEFAULT_DT);
    params.collision_epsilon = epsilon;
    params.gap_scale = gap_scale;
    params.capacity_cap = cap.unwrap_or(DEFAULT_CAP);
    params.rng_seed = seed.unwrap_or(DEFAULT_SEED);
    match params.validate() {
        Ok((resolved, warnings)) => {
            for w in warnings {
                eprintln!("warning: {w}");
            }
            Some(resolved)
        }
        Err(errs) => {
            errors.extend(errs);
            None
        }
    }
}

fn run_simulate(mut args: SimulateArgs, file: &FileConfig) -> anyhow::Result<()> {
    let mut errors = Vec::new();
    file.fill(&mut args.kappa, "kappa", parse_f64, &mut errors);
    let mut points_str = args.points.clone();
    file.fill(&mut points_str, "points", |s| Ok(s.to_string()), &mut errors);
    file.fill(&mut args.x, "x", parse_f64, &mut errors);
    let mut speeds_str = args.speeds.clone();
    file.fill(&mut speeds_str, "speeds", |s| Ok(s.to_string()), &mut errors);
    file.fill(&mut args.partition, "partition", |s| Ok(s.to_string()), &mut errors);
    file.fill(&mut args.samples, "samples", parse_usize, &mut errors);
    file.fill(&mut args.seed, "seed", parse_u64, &mut errors);
    file.fill(&mut args.dt, "dt", parse_f64, &mut errors);
    file.fill(&mut args.epsilon, "epsilon", parse_f64, &mut errors);
    file.fill(&mut args.cap, "cap", parse_f64, &mut errors);
    file.fill(&mut args.gap_scale, "gap-scale", parse_f64, &mut errors);
    file.fill(&mut args.out, "out", |s| Ok(PathBuf::from(s)), &mut errors);
    file.fill(&mut args.format, "format", |s| Ok(s.to_string()), &mut errors);
    file.fill(&mut args.traces, "traces", |s| Ok(PathBuf::from(s)), &mut errors);
    file.fill(&mut args.outcomes, "outcomes", |s| Ok(PathBuf::from(s)), &mut errors);
    file.fill(&mut args.stride, "stride", parse_usize, &mut errors);

    let points = match points_str.as_deref().map(parse_f64_list).transpose() {
        Ok(p) => p,
        Err(e) => {
            errors.push(format!("points: {e}"));
            None
        }
    };
    let speeds = match speeds_str.as_deref().map(parse_f64_list).transpose() {
        Ok(s) => s,
        Err(e) => {
            errors.push(format!("speeds: {e}"));
            None
        }
    };
    let format = resolve_format(&args.format, "json", &mut errors);
    let parallelism = threads_from_env(&mut errors);
    let params = build_params(
        args.kappa,
        points,
        args.x,
        speeds,
        args.partition.clone(),
        args.dt,
        args.epsilon,
        args.cap,
        args.gap_scale,
        args.seed,
        &mut errors,
    );
    if !errors.is_empty() {
        bail!(Validation(errors));
    }
    let params = params.expect("validated");

    let mut plan = EstimationPlan::new(params, args.samples.unwrap_or(DEFAULT_SAMPLES), args.seed.unwrap_or(DEFAULT_SEED));
    plan.parallelism = parallelism;
    let report = estimate_arch_probabilities(&plan)?;

    if let Some(path) = &args.outcomes {
        let mut body = String::new();
        for i in 0..plan.n_samples as u64 {
            let o = sample_outcome(&plan, i)?;
            body.push_str(&o.to_json());
            body.push('\n');
        }
        std::fs::write(path, body).with_context(|| format!("cannot write {}", path.display()))?;
    }
    if let Some(path) = &args.traces {
        let mut p = plan.params.clone();
        p.record_chain = true;
        let mut sim = Simulation::new(&p)?;
        let mut noise = GaussianNoise::from_master(plan.master_seed, 0);
        while sim.done().is_none() {
            sim.tick(&mut noise)?;
        }
        let chain = sim.take_chain().expect("chain recorded");
        let csv = trace_csv(&chain, p.initial_points.len(), 0, args.stride.unwrap_or(DEFAULT_STRIDE))?;
        std::fs::write(path, csv).with_context(|| format!("cannot write {}", path.display()))?;
    }

    let body = match format.as_str() {
        "json" => report.to_json(),
        _ => {
            let mut csv = String::from("arch,count,estimate,ci_low,ci_high\n");
            for (key, count) in &report.arch_counts {
                let est = report.estimates[key];
                let (lo, hi) = report.ci[key];
                csv.push_str(&format!("{key},{count},{est:.6},{lo:.6},{hi:.6}\n"));
            }
            csv
        }
    };
    write_output(args.out.as_ref(), &body)
}

fn run_partition(mut args: PartitionArgs, file: &FileConfig) -> anyhow::Result<()> {
    let mut errors = Vec::new();
    file.fill(&mut args.partition, "partition", |s| Ok(s.to_string()), &mut errors);
    file.fill(&mut args.kappa, "kappa", parse_f64, &mut errors);
    let mut points_str = args.points.clone();
    file.fill(&mut points_str, "points", |s| Ok(s.to_string()), &mut errors);
    file.fill(&mut args.grid, "grid", parse_usize, &mut errors);
    file.fill(&mut args.out, "out", |s| Ok(PathBuf::from(s)), &mut errors);
    file.fill(&mut args.format, "format", |s| Ok(s.to_string()), &mut errors);

    let kappa = args.kappa.unwrap_or_else(|| {
        errors.push("--kappa is required".into());
        f64::NAN
    });
    let kind = match args.partition.as_deref() {
        None => {
            errors.push("--partition is required".into());
            None
        }
        Some(s) => match PartitionKind::from_str(s) {
            Ok(k) => Some(k),
            Err(e) => {
                errors.push(e.to_string());
                None
            }
        },
    };
    let format = resolve_format(&args.format, "csv", &mut errors);

    // grid mode tabulates the pure blocks on the cross ratio
    if let Some(grid) = args.grid {
        if !errors.is_empty() {
            bail!(Validation(errors));
        }
        if !matches!(kind, Some(PartitionKind::FourPoint { .. })) {
            bail!(Validation(vec![
                "--grid tabulates the four-point blocks; use partition fourpoint:<pI>,<pII>".into()
            ]));
        }
        let blocks = multisle::partition::FourPointBlocks::new(kappa)?;
        let mut rows = Vec::new();
        for k in 1..=grid {
            let x = k as f64 / (grid as f64 + 1.0);
            rows.push((x, blocks.z_i(x)?, blocks.z_ii(x)?));
        }
        let body = match format.as_str() {
            "csv" => {
                let mut s = String::from("x,z_pure_I,z_pure_II\n");
                for (x, zi, zii) in &rows {
                    s.push_str(&format!("{x:.12},{zi:.12e},{zii:.12e}\n"));
                }
                s
            }
            _ => serde_json::to_string_pretty(
                &rows
                    .iter()
                    .map(|(x, zi, zii)| serde_json::json!({"x": x, "z_pure_I": zi, "z_pure_II": zii}))
                    .collect::<Vec<_>>(),
            )?,
        };
        return write_output(args.out.as_ref(), &body);
    }

    let points = match points_str.as_deref() {
        None => {
            errors.push("--points is required (or --grid for the block table)".into());
            None
        }
        Some(s) => match parse_f64_list(s) {
            Ok(p) => Some(p),
            Err(e) => {
                errors.push(format!("points: {e}"));
                None
            }
        },
    };
    if !errors.is_empty() {
        bail!(Validation(errors));
    }
    let points = points.expect("validated");
    let z = PartitionFunction::new(kind.expect("validated"), kappa, points.len())
        .map_err(|e| Validation(vec![e.to_string()]))?;
    let value = z.value(&points)?;
    let grad = z.grad_log(&points)?;
    let residuals: Vec<f64> = (0..points.len())
        .map(|i| z.null_vector_residual(&points, i))
        .collect::<multisle::Result<_>>()?;
    let body = match format.as_str() {
        "csv" => {
            let mut s = String::from("quantity,index,value\n");
            s.push_str(&format!("value,,{value:.12e}\n"));
            for (i, g) in grad.iter().enumerate() {
                s.push_str(&format!("grad_log,{},{:.12e}\n", i + 1, g));
            }
            for (i, r) in residuals.iter().enumerate() {
                s.push_str(&format!("null_residual,{},{:.12e}\n", i + 1, r));
            }
            s
        }
        _ => serde_json::to_string_pretty(&serde_json::json!({
            "partition": z.label(),
            "kappa": kappa,
            "points": points,
            "value": value,
            "grad_log": grad,
            "null_residuals": residuals,
            "scaling_weight": z.scaling_weight(),
        }))?,
    };
    write_output(args.out.as_ref(), &body)
}

fn run_arch(mut args: ArchArgs, file: &FileConfig) -> anyhow::Result<()> {
    let mut errors = Vec::new();
    file.fill(&mut args.n, "n", parse_usize, &mut errors);
    file.fill(&mut args.m, "m", parse_usize, &mut errors);
    file.fill(&mut args.out, "out", |s| Ok(PathBuf::from(s)), &mut errors);
    file.fill(&mut args.format, "format", |s| Ok(s.to_string()), &mut errors);
    let n = args.n.unwrap_or_else(|| {
        errors.push("--n is required".into());
        0
    });
    let format = resolve_format(&args.format, "json", &mut errors);
    if !errors.is_empty() {
        bail!(Validation(errors));
    }

    let body = match args.m {
        None => {
            // dimension table over all sectors
            let mut rows = Vec::new();
            for m in 0..=n / 2 {
                rows.push(serde_json::json!({"n": n, "m": m, "dimension": arch::dimension(n, m)?}));
            }
            match format.as_str() {
                "csv" => {
                    let mut s = String::from("n,m,dimension\n");
                    for r in &rows {
                        s.push_str(&format!("{},{},{}\n", r["n"], r["m"], r["dimension"]));
                    }
                    s
                }
                _ => serde_json::to_string_pretty(&rows)?,
            }
        }
        Some(m) => {
            let cfgs = arch::enumerate_arches(n, m)?;
            match format.as_str() {
                "csv" => {
                    let mut s = String::from("key\n");
                    for c in &cfgs {
                        s.push_str(&c.key());
                        s.push('\n');
                    }
                    s
                }
                _ => {
                    let mut s = String::new();
                    for c in &cfgs {
                        s.push_str(&serde_json::to_string(c)?);
                        s.push('\n');
                    }
                    s
                }
            }
        }
    };
    write_output(args.out.as_ref(), &body)
}

fn run_classical(mut args: ClassicalArgs, file: &FileConfig) -> anyhow::Result<()> {
    let mut errors = Vec::new();
    let mut points_str = args.points.clone();
    file.fill(&mut points_str, "points", |s| Ok(s.to_string()), &mut errors);
    file.fill(&mut args.integrate, "integrate", parse_usize, &mut errors);
    let mut speeds_str = args.speeds.clone();
    file.fill(&mut speeds_str, "speeds", |s| Ok(s.to_string()), &mut errors);
    file.fill(&mut args.dt, "dt", parse_f64, &mut errors);
    file.fill(&mut args.epsilon, "epsilon", parse_f64, &mut errors);
    file.fill(&mut args.cap, "cap", parse_f64, &mut errors);
    file.fill(&mut args.traces, "traces", |s| Ok(PathBuf::from(s)), &mut errors);
    file.fill(&mut args.stride, "stride", parse_usize, &mut errors);
    file.fill(&mut args.out, "out", |s| Ok(PathBuf::from(s)), &mut errors);

    let points = match points_str.as_deref() {
        None => {
            errors.push("--points is required".into());
            None
        }
        Some(s) => match parse_f64_list(s) {
            Ok(p) => Some(p),
            Err(e) => {
                errors.push(format!("points: {e}"));
                None
            }
        },
    };
    let speeds = match speeds_str.as_deref().map(parse_f64_list).transpose() {
        Ok(s) => s,
        Err(e) => {
            errors.push(format!("speeds: {e}"));
            None
        }
    };
    if !errors.is_empty() {
        bail!(Validation(errors));
    }
    let points = points.expect("validated");
    let branches = classical::solve_classical_gradients(&points)?;
    let branches_json: Vec<serde_json::Value> = branches
        .iter()
        .map(|b| {
            serde_json::json!({
                "u": b.u,
                "seed": b.branch,
                "max_residual": b.max_residual(),
            })
        })
        .collect();

    let body = match args.integrate {
        None => serde_json::to_string_pretty(&serde_json::json!({
            "classical": true,
            "points": points,
            "branches": branches_json,
        }))?,
        Some(idx) => {
            let Some(branch) = branches.get(idx) else {
                bail!(Validation(vec![format!(
                    "branch index {idx} out of range (found {} branches)",
                    branches.len()
                )]));
            };
            let n = points.len();
            let speeds = speeds.unwrap_or_else(|| vec![1.0 / n as f64; n]);
            let spread = (points[n - 1] - points[0]).max(1.0);
            let run = classical::integrate_classical(
                branch,
                &speeds,
                args.dt.unwrap_or(DEFAULT_DT),
                args.epsilon.unwrap_or(1e-4 * spread),
                args.cap.unwrap_or(DEFAULT_CAP),
            )?;
            if let Some(path) = &args.traces {
                let csv = trace_csv(&run.chain, n, 0, args.stride.unwrap_or(DEFAULT_STRIDE))?;
                std::fs::write(path, csv)
                    .with_context(|| format!("cannot write {}", path.display()))?;
            }
            serde_json::to_string_pretty(&serde_json::json!({
                "classical": true,
                "points": points,
                "branch": branches_json[idx],
                "outcome": serde_json::from_str::<serde_json::Value>(&run.outcome.to_json())?,
                "path_samples": run.path.len(),
            }))?
        }
    };
    write_output(args.out.as_ref(), &body)
}
