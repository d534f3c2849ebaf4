//! Command-line surface: classification, integration, sweeps, curve
//! tracing, curvature probing, and the verification suite.
//!
//! Exit codes: 0 success, 2 validation/usage error, 3 check failure.

use clap::{Args, Parser, Subcommand};
use resolvent_lab::calculus::{build_level_chart, trace_level_curve};
use resolvent_lab::classify::{classify, ClassifyOptions, ProbeGrid};
use resolvent_lab::dispersion::{builtin, parse_model, DispersionModel, BUILTIN_NAMES};
use resolvent_lab::quadrature::{crossing_integral, McConfig, ResolventQuery};
use resolvent_lab::scaling::{beta_sweep, ScanConfig};
use resolvent_lab::verify::{run_all, Profile};
use resolvent_lab::{parallel, LabError, SCHEMA_VERSION};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "resolvent-lab",
    about = "Numerical laboratory for resolvent and crossing integrals of \
             periodic lattice dispersion relations",
    after_help = MODEL_HELP,
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

const MODEL_HELP: &str = "\
Models are built-in names (zero, nn1, nn2, nn3, nn2d_sqrt, nn2d_squared,
ce_morse_d3) or paths to a text model file:

    dim 3          # header, required first directive
    sqrt           # optional: square root of the polynomial
    const 5
    cos 1 0 0 -3   # cos term: d integer frequencies then the coefficient
    sin 1 1 0 0.25 # sin term, same layout

Worker count comes from --workers or RESOLVENT_LAB_WORKERS (default: all
logical cores). JSON artifacts are byte-reproducible for a fixed --seed;
wall-clock timings go to stdout only.";

#[derive(Subcommand)]
enum Command {
    /// Classify a dispersion relation by the hyperplane/curvature dichotomy
    Classify(ClassifyCmd),
    /// Evaluate the crossing integral at one (α, β, k₀) query
    Integrate(IntegrateCmd),
    /// β-sweep of the scanned crossing-integral supremum with a power-law fit
    Sweep(SweepCmd),
    /// Trace a level curve through a base point and write it as CSV
    Trace(TraceCmd),
    /// Probe the minimal-curvature constants (n₀, ε₀) on a grid
    Probe(ProbeCmd),
    /// Run the named golden checks and write the verification report
    Verify(VerifyCmd),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Builtin model name or path to a model file
    #[arg(long)]
    model: String,
    /// Output path for the JSON artifact
    #[arg(long)]
    output: Option<PathBuf>,
    /// Master seed for all randomized work
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: RESOLVENT_LAB_WORKERS or logical cores)
    #[arg(long)]
    workers: Option<usize>,
    /// JSON file with default sampling parameters (flags win)
    #[arg(long)]
    config: Option<PathBuf>,
}

/// File-overridable defaults; unknown keys are rejected.
#[derive(Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    samples: Option<u64>,
    strata: Option<usize>,
    importance: Option<f64>,
    groups: Option<usize>,
    seed: Option<u64>,
    workers: Option<usize>,
    alpha_grid: Option<usize>,
    k0_grid: Option<usize>,
    top_k: Option<usize>,
}

impl ConfigFile {
    fn load(path: Option<&Path>) -> Result<Self, LabError> {
        match path {
            None => Ok(ConfigFile::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)?;
                serde_json::from_str(&text)
                    .map_err(|e| LabError::InvalidConfig(format!("{}: {e}", p.display())))
            }
        }
    }
}

#[derive(Args)]
struct ClassifyCmd {
    #[command(flatten)]
    common: CommonArgs,
    /// Samples per f_ω(s) point
    #[arg(long, default_value_t = 1_000_000)]
    fomega_samples: u64,
    /// Skip the f_ω fit
    #[arg(long)]
    no_fomega: bool,
    /// Seed grid per axis for the critical-point scan
    #[arg(long, default_value_t = 64)]
    critical_grid: usize,
    /// Highest derivative order probed
    #[arg(long, default_value_t = 4)]
    probe_n_max: usize,
}

#[derive(Args)]
struct IntegrateCmd {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated α = a1,a2,a3
    #[arg(long)]
    alpha: String,
    #[arg(long)]
    beta: f64,
    /// Comma-separated k₀ (defaults to 0)
    #[arg(long)]
    k0: Option<String>,
    #[arg(long)]
    samples: Option<u64>,
    /// Strata per torus axis
    #[arg(long)]
    strata: Option<usize>,
    /// Importance-mixture weight in [0, 1]
    #[arg(long)]
    importance: Option<f64>,
    /// Median-of-means groups (odd)
    #[arg(long)]
    groups: Option<usize>,
}

#[derive(Args)]
struct SweepCmd {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated strictly decreasing β grid (≥ 4 values)
    #[arg(long)]
    betas: String,
    /// α grid points per axis
    #[arg(long)]
    alpha_grid: Option<usize>,
    /// k₀ grid points per axis
    #[arg(long)]
    k0_grid: Option<usize>,
    /// Total samples per β point
    #[arg(long)]
    samples_per_point: Option<u64>,
    /// Cells refined after the cheap pass
    #[arg(long)]
    top_k: Option<usize>,
    /// Also write the flat CSV here
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct TraceCmd {
    #[command(flatten)]
    common: CommonArgs,
    /// Base point coordinates, comma-separated
    #[arg(long)]
    x0: String,
    /// Tangent direction (must be orthogonal to ∇ω(x₀)), comma-separated
    #[arg(long)]
    v: String,
    /// Chart radius (default: the largest admissible λ)
    #[arg(long)]
    lambda: Option<f64>,
    /// Parameter span a,b with a ≤ 0 ≤ b (default: ±0.9·2λ)
    #[arg(long)]
    t_span: Option<String>,
    /// Sample count along the curve
    #[arg(long, default_value_t = 65)]
    samples: usize,
}

#[derive(Args)]
struct ProbeCmd {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, default_value_t = 4)]
    n_max: usize,
    /// Torus grid per axis
    #[arg(long, default_value_t = 16)]
    k_grid: usize,
    /// Sphere design size for the normal direction
    #[arg(long, default_value_t = 192)]
    u_design: usize,
    /// Tangent design size
    #[arg(long, default_value_t = 64)]
    v_design: usize,
}

#[derive(Args)]
struct VerifyCmd {
    /// Budget profile
    #[arg(long, default_value = "smoke")]
    profile: String,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Include wall-clock timings in the JSON report (not byte-reproducible)
    #[arg(long)]
    timings: bool,
}

fn parse_vec(s: &str, what: &str) -> Result<Vec<f64>, LabError> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| LabError::InvalidConfig(format!("bad {what} entry {p:?}")))
        })
        .collect()
}

fn load_model(spec: &str) -> Result<DispersionModel, LabError> {
    if let Some(m) = builtin(spec) {
        return Ok(m);
    }
    let path = Path::new(spec);
    if path.exists() {
        let text = std::fs::read_to_string(path)?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "model".into());
        return parse_model(&name, &text);
    }
    Err(LabError::InvalidConfig(format!(
        "unknown model {spec:?}: expected one of {BUILTIN_NAMES:?} or a file path"
    )))
}

fn write_artifact(path: Option<&Path>, json: &str) -> Result<(), LabError> {
    if let Some(p) = path {
        std::fs::write(p, json)?;
        println!("wrote {}", p.display());
    }
    Ok(())
}

#[derive(Serialize)]
struct IntegrateArtifact {
    schema_version: u32,
    model: String,
    query: ResolventQuery,
    estimate: resolvent_lab::quadrature::QuadratureEstimate,
}

#[derive(Serialize)]
struct TraceArtifact {
    schema_version: u32,
    model: String,
    x0: Vec<f64>,
    v: Vec<f64>,
    lambda: f64,
    level: f64,
    max_drift: f64,
}

#[derive(Serialize)]
struct ProbeArtifact {
    schema_version: u32,
    model: String,
    probe: resolvent_lab::classify::ProbeResult,
}

fn run() -> Result<ExitCode, LabError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Classify(cmd) => {
            let cfg = ConfigFile::load(cmd.common.config.as_deref())?;
            let model = load_model(&cmd.common.model)?;
            let seed = cmd.common.seed.or(cfg.seed).unwrap_or(0);
            let workers = parallel::worker_count(cmd.common.workers.or(cfg.workers));
            let opts = ClassifyOptions {
                critical_grid: cmd.critical_grid,
                probe_n_max: cmd.probe_n_max,
                probe_grid: ProbeGrid::default(),
                fomega_samples: cmd.fomega_samples,
                run_fomega: !cmd.no_fomega,
                seed,
            };
            let report = parallel::with_workers(workers, || classify(&model, &opts))??;
            println!("model: {}", report.model);
            println!("verdict: {:?}", report.verdict);
            println!(
                "certificates: {}  critical points: {}  morse: {}",
                report.certificates.len(),
                report.critical_points.len(),
                report.is_morse
            );
            for c in &report.certificates {
                println!(
                    "  u = {:?}  r0 = {:+.6}  value = {:.6}  (deviation {:.2e})",
                    c.u, c.r0, c.value, c.max_deviation
                );
            }
            if let Some(p) = &report.probe {
                println!(
                    "probe: n0 = {:?}  eps0 ≈ {:.4e}  profile {:?}",
                    p.n0_estimate, p.eps0_estimate, p.eps0_by_n
                );
            }
            if let Some(f) = &report.f_omega_fit {
                println!(
                    "f_omega fit: slope {:.4}  intercept {:.4}  R² {:.4}  p0 ≈ {}",
                    f.slope, f.intercept, f.r_squared, f.p0_estimate
                );
            }
            if let Some(c) = &report.constants {
                println!(
                    "constants: n0 = {}  eps0 = {:.3e}  mu = {:.3e}  gamma = 1/{}  beta0 = {:.3e}",
                    c.n0, c.eps0, c.mu, c.gamma_fraction.1, c.beta0
                );
            }
            write_artifact(
                cmd.common.output.as_deref(),
                &serde_json::to_string_pretty(&report)?,
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Integrate(cmd) => {
            let cfg = ConfigFile::load(cmd.common.config.as_deref())?;
            let model = load_model(&cmd.common.model)?;
            let d = model.dim();
            let alpha = parse_vec(&cmd.alpha, "alpha")?;
            if alpha.len() != 3 {
                return Err(LabError::InvalidConfig("alpha needs 3 entries".into()));
            }
            let k0 = match &cmd.k0 {
                Some(s) => parse_vec(s, "k0")?,
                None => vec![0.0; d],
            };
            if k0.len() != d {
                return Err(LabError::InvalidConfig(format!(
                    "k0 needs {d} entries for this model"
                )));
            }
            let query = ResolventQuery::new(
                [alpha[0], alpha[1], alpha[2]],
                cmd.beta,
                resolvent_lab::dispersion::torus_wrap(&k0),
            )?;
            let mc = McConfig {
                samples: cmd.samples.or(cfg.samples).unwrap_or(1_000_000),
                strata_per_axis: cmd.strata.or(cfg.strata).unwrap_or(2),
                importance_weight: cmd.importance.or(cfg.importance).unwrap_or(0.5),
                groups: cmd.groups.or(cfg.groups).unwrap_or(15),
                seed: cmd.common.seed.or(cfg.seed).unwrap_or(0),
            };
            let workers = parallel::worker_count(cmd.common.workers.or(cfg.workers));
            let est = parallel::with_workers(workers, || crossing_integral(&model, &query, &mc))??;
            println!(
                "I_scr = {:.10e} ± {:.3e}  (samples {}, strata {}, seed {}, {:.2}s)",
                est.value, est.standard_error, est.samples, est.strata, est.seed, est.wall_time
            );
            let artifact = IntegrateArtifact {
                schema_version: SCHEMA_VERSION,
                model: model.name().to_string(),
                query,
                estimate: est.canonical(),
            };
            write_artifact(
                cmd.common.output.as_deref(),
                &serde_json::to_string_pretty(&artifact)?,
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep(cmd) => {
            let cfg = ConfigFile::load(cmd.common.config.as_deref())?;
            let model = load_model(&cmd.common.model)?;
            let betas = parse_vec(&cmd.betas, "betas")?;
            let scan = ScanConfig {
                alpha_per_axis: cmd.alpha_grid.or(cfg.alpha_grid).unwrap_or(5),
                k0_per_axis: cmd.k0_grid.or(cfg.k0_grid).unwrap_or(2),
                cheap_fraction: 0.25,
                top_k: cmd.top_k.or(cfg.top_k).unwrap_or(8),
                mc: McConfig {
                    samples: cmd.samples_per_point.or(cfg.samples).unwrap_or(1_000_000),
                    strata_per_axis: cfg.strata.unwrap_or(2),
                    importance_weight: cfg.importance.unwrap_or(0.5),
                    groups: cfg.groups.unwrap_or(15),
                    seed: cmd.common.seed.or(cfg.seed).unwrap_or(0),
                },
            };
            let workers = parallel::worker_count(cmd.common.workers.or(cfg.workers));
            let mut sweep = parallel::with_workers(workers, || beta_sweep(&model, &betas, &scan))??;
            println!(
                "fit: I ≈ exp({:.3}) · β^{:.4} · ⟨ln β⟩^{:.3}   (R² = {:.4})",
                sweep.log_c, sweep.rho, sweep.q, sweep.r_squared
            );
            for p in &sweep.points {
                println!(
                    "  β = {:<7} I = {:.6e} ± {:.2e}   at α = {:?}",
                    p.beta, p.estimate.value, p.estimate.standard_error, p.query.alpha
                );
            }
            if let Some(csv) = &cmd.csv {
                std::fs::write(csv, sweep.to_csv())?;
                println!("wrote {}", csv.display());
            }
            for p in sweep.points.iter_mut() {
                p.estimate = p.estimate.canonical();
            }
            write_artifact(
                cmd.common.output.as_deref(),
                &serde_json::to_string_pretty(&sweep)?,
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Trace(cmd) => {
            let model = load_model(&cmd.common.model)?;
            let x0 = parse_vec(&cmd.x0, "x0")?;
            let v = parse_vec(&cmd.v, "v")?;
            let lambda = match cmd.lambda {
                Some(l) => l,
                None => {
                    let g = model
                        .gradient(&x0)
                        .map_err(|e| LabError::InvalidConfig(format!("gradient: {e}")))?;
                    let gn = g.iter().map(|c| c * c).sum::<f64>().sqrt();
                    gn / (8.0 * model.smooth_norms(2)?.prime(2))
                }
            };
            let chart = build_level_chart(&model, &x0, lambda)?;
            let span = match &cmd.t_span {
                Some(s) => {
                    let ts = parse_vec(s, "t_span")?;
                    if ts.len() != 2 {
                        return Err(LabError::InvalidConfig("t_span needs 2 entries".into()));
                    }
                    (ts[0], ts[1])
                }
                None => {
                    let r = 0.9 * 2.0 * lambda;
                    (-r, r)
                }
            };
            let curve = trace_level_curve(&chart, &vec![0.0; x0.len()], &v, span, cmd.samples)?;
            let drift = curve.level_drift();
            println!(
                "level = {:.10}  max drift = {:.3e}  λ = {:.4e}  samples = {}",
                curve.omega[0],
                drift,
                lambda,
                curve.t.len()
            );
            let csv = curve.to_csv();
            match cmd.common.output.as_deref() {
                Some(p) => {
                    std::fs::write(p, csv)?;
                    println!("wrote {}", p.display());
                    let summary = TraceArtifact {
                        schema_version: SCHEMA_VERSION,
                        model: model.name().to_string(),
                        x0,
                        v,
                        lambda,
                        level: curve.omega[0],
                        max_drift: drift,
                    };
                    let json_path = p.with_extension("json");
                    std::fs::write(&json_path, serde_json::to_string_pretty(&summary)?)?;
                    println!("wrote {}", json_path.display());
                }
                None => print!("{csv}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Probe(cmd) => {
            let model = load_model(&cmd.common.model)?;
            let workers = parallel::worker_count(cmd.common.workers);
            let grid = ProbeGrid {
                k_per_axis: cmd.k_grid,
                u_design: cmd.u_design,
                v_design: cmd.v_design,
                refine: 4,
            };
            let probe = parallel::with_workers(workers, || {
                resolvent_lab::classify::curvature_probe(&model, cmd.n_max, &grid)
            })??;
            println!(
                "n0 = {:?}  eps0 ≈ {:.6e}  profile by order {:?}",
                probe.n0_estimate, probe.eps0_estimate, probe.eps0_by_n
            );
            println!(
                "witness k = {:?}  u = {:?}",
                probe.witness_k, probe.witness_u
            );
            let artifact = ProbeArtifact {
                schema_version: SCHEMA_VERSION,
                model: model.name().to_string(),
                probe,
            };
            write_artifact(
                cmd.common.output.as_deref(),
                &serde_json::to_string_pretty(&artifact)?,
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify(cmd) => {
            let profile: Profile = cmd.profile.parse()?;
            let seed = cmd.seed.unwrap_or(0);
            let workers = parallel::worker_count(cmd.workers);
            let report = run_all(profile, seed, workers)?;
            for line in report.summary_lines() {
                println!("{line}");
            }
            let json = if cmd.timings {
                report.to_json()?
            } else {
                report.canonical_json()?
            };
            write_artifact(cmd.output.as_deref(), &json)?;
            if report.all_pass() {
                println!("verify: all {} checks passed", report.records.len());
                Ok(ExitCode::SUCCESS)
            } else {
                println!("verify: FAILURES present");
                Ok(ExitCode::from(3))
            }
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
