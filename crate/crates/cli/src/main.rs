//! `brownian`: sample, query and validate refinable Brownian paths, and solve
//! Dirichlet problems by walkers.
//!
//! Every output carries the tool version and the resolved configuration.
//! The thread count is deliberately left out of that echo: results do not
//! depend on it.

use std::fmt::Display;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context};
use brownian_core::dirichlet::{
    solve_at, solve_level, solve_refining, transfer_condition, BoundaryCondition, DomainFamily, DomainFile,
    InteriorRegion, MonteCarloEstimate, RefineConfig, Shape, ShapeProblem, SquaredDomain, TraceEntry, WalkConfig,
};
use brownian_core::extrema::path_max_at;
use brownian_core::family::segment_stream;
use brownian_core::suites::{run_suite, SuiteConfig, SuiteReport};
use brownian_core::{
    eval_extended, first_hit_boundary, first_hit_segment, first_zero, has_zero, Error as CoreError,
    PathCoefficients, PathConfig, PathFamily, PathView, PlanarPath, Segment, SegmentSet,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

const TOOL: &str = "brownian";
const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(name = "brownian", version, about = "Refinable Brownian paths, hitting laws and walker-based Dirichlet solves")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; does not change any result.
    #[arg(long, global = true, env = "BROWNIAN_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Knot values of a path on a mesh of 2^-level (2^level + 1 points).
    Sample(SampleArgs),
    /// Enclosure of B(t), t >= 0.
    Eval(EvalArgs),
    /// Certified maximum over [a, b].
    Max(MaxArgs),
    /// Zero decision and first zero on [a, b].
    Zeros(ZerosArgs),
    /// First exit of a planar walker from a rectangle, or first hit of a segment.
    Hit(HitArgs),
    /// Runs a statistical suite; exits 1 if any test fails.
    Validate(ValidateArgs),
    /// Walker estimate of a Dirichlet solution.
    Dirichlet(DirichletArgs),
}

#[derive(Args, Debug, Clone, Copy, Serialize)]
struct PathArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Path index within the seed.
    #[arg(long, default_value_t = 0)]
    path: u32,
    /// Modulus constant behind every enclosure.
    #[arg(long, default_value_t = 2.0)]
    c_mod: f64,
    /// Hard cap on refinement levels.
    #[arg(long, default_value_t = 40)]
    level_cap: u32,
}

impl PathArgs {
    fn config(&self) -> anyhow::Result<PathConfig> {
        if !(self.c_mod > 0.0) || !self.c_mod.is_finite() {
            bail!(CoreError::InvalidArgument("--c-mod must be positive".into()));
        }
        if self.level_cap > 60 {
            bail!(CoreError::InvalidArgument("--level-cap must be at most 60".into()));
        }
        Ok(PathConfig {
            c_mod: self.c_mod,
            level_cap: self.level_cap,
        })
    }

    fn view(&self) -> anyhow::Result<PathView> {
        Ok(PathView::new(Arc::new(PathFamily::sampled_with(
            self.seed,
            self.path,
            self.config()?,
        ))))
    }
}

#[derive(Args, Debug, Serialize)]
struct SampleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    path: PathArgs,
    /// Mesh level: the dump holds tent levels 0..level-1.
    #[arg(long, default_value_t = 10)]
    level: u32,
}

#[derive(Args, Debug, Serialize)]
struct EvalArgs {
    #[command(flatten)]
    #[serde(flatten)]
    path: PathArgs,
    #[arg(long)]
    t: f64,
    /// Coefficients through this tent level; the cap when absent.
    #[arg(long)]
    level: Option<u32>,
}

#[derive(Args, Debug, Serialize)]
struct MaxArgs {
    #[command(flatten)]
    #[serde(flatten)]
    path: PathArgs,
    #[arg(long, default_value_t = 0.0)]
    a: f64,
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    #[arg(long, default_value_t = 1e-4)]
    eps: f64,
}

#[derive(Args, Debug, Serialize)]
struct ZerosArgs {
    #[command(flatten)]
    #[serde(flatten)]
    path: PathArgs,
    #[arg(long)]
    a: f64,
    #[arg(long)]
    b: f64,
    /// Refinement budget for the zero decision.
    #[arg(long, default_value_t = 40)]
    budget: u32,
    /// Tolerance for locating the first zero.
    #[arg(long, default_value_t = 1e-4)]
    eps: f64,
}

#[derive(Args, Debug, Serialize)]
struct HitArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    walker: u32,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    x0: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    y0: f64,
    /// Rectangle `x0,x1,y0,y1` to exit.
    #[arg(long, value_parser = parse_floats::<4>, conflicts_with = "segment", allow_hyphen_values = true)]
    rect: Option<[f64; 4]>,
    /// Segment `v|h,axis,lo,hi` to hit.
    #[arg(long, value_parser = parse_segment, allow_hyphen_values = true)]
    segment: Option<SegmentSpec>,
    #[arg(long, default_value_t = 1e-4)]
    eps: f64,
    #[arg(long, default_value_t = 100.0)]
    horizon: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
struct SegmentSpec {
    vertical: bool,
    axis: f64,
    lo: f64,
    hi: f64,
}

#[derive(Args, Debug, Serialize)]
struct ValidateArgs {
    /// arctan, max-cdf, modulus, increments-variance, exit-symmetry, spitzer or scale.
    suite: String,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<u32>,
    #[arg(long)]
    level: Option<u32>,
    /// Modulus constant under test.
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
struct DirichletArgs {
    /// Domain file with boundary squares and values.
    #[arg(long, conflicts_with = "shape", required_unless_present = "shape")]
    domain: Option<PathBuf>,
    /// Built-in shape: `rect:x0,x1,y0,y1` or `disk:cx,cy,r`.
    #[arg(long, value_parser = parse_shape)]
    shape: Option<Shape>,
    /// Boundary function `c0,cx,cy,cxy,cq` for
    /// `c0 + cx x + cy y + cxy x y + cq (x^2 - y^2)` on a built-in shape.
    #[arg(long, value_parser = parse_floats::<5>, default_value = "0,1,0,0,0", allow_hyphen_values = true)]
    bc: [f64; 5],
    /// Grid resolution for a built-in shape.
    #[arg(long, default_value_t = 5)]
    resolution: u32,
    /// Refine a built-in shape up to this resolution.
    #[arg(long)]
    refine_to: Option<u32>,
    /// Stop refining once the error budget plus half-width is below this.
    #[arg(long, default_value_t = 1e-2)]
    target_err: f64,
    /// Writes the built-in shape at `--resolution` as a domain file.
    #[arg(long)]
    write_domain: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    x: f64,
    #[arg(long, allow_hyphen_values = true)]
    y: f64,
    #[arg(long, default_value_t = 10_000)]
    walkers: u32,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Hit resolution; 2^-(n+4) when absent.
    #[arg(long)]
    eps_hit: Option<f64>,
    #[arg(long, default_value_t = 0.99)]
    confidence: f64,
    /// Also estimate along `x0,x1,y,k`: k points on a horizontal line.
    #[arg(long, value_parser = parse_floats::<4>, allow_hyphen_values = true)]
    slice: Option<[f64; 4]>,
}

fn parse_floats<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let v = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("'{p}': {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    v.try_into().map_err(|v: Vec<f64>| format!("expected {N} comma-separated numbers, got {}", v.len()))
}

fn parse_segment(s: &str) -> Result<SegmentSpec, String> {
    let (kind, rest) = s.split_once(',').ok_or("expected v|h,axis,lo,hi")?;
    let [axis, lo, hi] = parse_floats::<3>(rest)?;
    let vertical = match kind {
        "v" => true,
        "h" => false,
        _ => return Err(format!("orientation '{kind}' is not v or h")),
    };
    Ok(SegmentSpec { vertical, axis, lo, hi })
}

fn parse_shape(s: &str) -> Result<Shape, String> {
    let (kind, rest) = s.split_once(':').ok_or("expected rect:... or disk:...")?;
    match kind {
        "rect" => {
            let [x0, x1, y0, y1] = parse_floats::<4>(rest)?;
            Ok(Shape::Rect { x0, x1, y0, y1 })
        }
        "disk" => {
            let [cx, cy, r] = parse_floats::<3>(rest)?;
            Ok(Shape::Disk { cx, cy, r })
        }
        _ => Err(format!("unknown shape '{kind}'")),
    }
}

/// What a command produced: a JSON result and the same data as CSV rows.
struct Output {
    result: Value,
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    passed: bool,
}

impl Output {
    fn new(result: Value, header: Vec<&'static str>, rows: Vec<Vec<String>>) -> Self {
        Self {
            result,
            header,
            rows,
            passed: true,
        }
    }
}

fn cell(v: impl Display) -> String {
    v.to_string()
}

fn opt(v: Option<f64>) -> String {
    v.map(cell).unwrap_or_default()
}

fn sample(a: &SampleArgs) -> anyhow::Result<Output> {
    if a.level > 24 {
        bail!(CoreError::InvalidArgument("--level must be at most 24".into()));
    }
    let cfg = a.path.config()?;
    let p = PathCoefficients::sampled(a.path.seed, segment_stream(a.path.path, 0), a.level as i64 - 1, cfg);
    let knots = p.knots(a.level as i64 - 1);
    let m = (knots.len() - 1) as f64;
    let rows: Vec<Vec<String>> = knots
        .iter()
        .enumerate()
        .map(|(i, v)| vec![cell(i as f64 / m), cell(v)])
        .collect();
    let result = json!({ "dump": p.dump(), "knots": knots });
    Ok(Output::new(result, vec!["t", "value"], rows))
}

fn eval(a: &EvalArgs) -> anyhow::Result<Output> {
    let view = a.path.view()?;
    let level = a.level.unwrap_or(a.path.level_cap);
    let e = eval_extended(view.family(), a.t, level)?;
    let row = vec![
        cell(a.t),
        cell(e.lo),
        cell(e.hi),
        cell(e.center()),
        cell(e.level),
        cell(e.confidence),
    ];
    Ok(Output::new(
        json!({ "t": a.t, "enclosure": e }),
        vec!["t", "lo", "hi", "center", "level", "confidence"],
        vec![row],
    ))
}

fn max(a: &MaxArgs) -> anyhow::Result<Output> {
    let view = a.path.view()?;
    let (e, at) = path_max_at(&view, a.a, a.b, a.eps)?;
    let row = vec![
        cell(a.a),
        cell(a.b),
        cell(e.lo),
        cell(e.hi),
        cell(at),
        cell(e.level),
        cell(e.confidence),
    ];
    Ok(Output::new(
        json!({ "enclosure": e, "argmax": at }),
        vec!["a", "b", "lo", "hi", "argmax", "level", "confidence"],
        vec![row],
    ))
}

fn zeros(a: &ZerosArgs) -> anyhow::Result<Output> {
    let view = a.path.view()?;
    let d = has_zero(&view, a.a, a.b, a.budget)?;
    let first = match d.verdict {
        brownian_core::Verdict::HasZero => first_zero(&view, a.a, a.b, a.eps)?,
        _ => None,
    };
    let verdict = serde_json::to_value(d.verdict)?;
    let row = vec![
        verdict.as_str().unwrap_or_default().to_string(),
        cell(d.level),
        opt(first.map(|f| f.time)),
        opt(first.map(|f| f.slack)),
    ];
    Ok(Output::new(
        json!({ "decision": d, "first_zero": first }),
        vec!["verdict", "level", "first_zero", "slack"],
        vec![row],
    ))
}

fn hit(a: &HitArgs) -> anyhow::Result<Output> {
    let path = PlanarPath::sampled(a.seed, a.walker, (a.x0, a.y0));
    let hit = match (a.segment, a.rect) {
        (Some(s), _) => {
            let seg = if s.vertical {
                Segment::vertical(s.axis, s.lo, s.hi)?
            } else {
                Segment::horizontal(s.axis, s.lo, s.hi)?
            };
            first_hit_segment(&path, &seg, a.eps, a.horizon)?
        }
        (None, r) => {
            let [x0, x1, y0, y1] = r.unwrap_or([-1.0, 1.0, -1.0, 1.0]);
            let rect = SegmentSet::rectangle(x0, x1, y0, y1)?;
            if !(x0 < a.x0 && a.x0 < x1 && y0 < a.y0 && a.y0 < y1) {
                bail!(CoreError::InvalidArgument("start must lie inside the rectangle".into()));
            }
            first_hit_boundary(&path, &rect, a.eps, a.horizon)?
        }
    };
    let rows = hit
        .iter()
        .map(|h| {
            vec![
                cell(h.time),
                cell(h.point.0),
                cell(h.point.1),
                cell(h.segment),
                cell(h.slack),
                cell(h.level),
            ]
        })
        .collect();
    Ok(Output::new(
        json!({ "hit": hit }),
        vec!["time", "x", "y", "segment", "slack", "level"],
        rows,
    ))
}

fn suite_config(a: &ValidateArgs) -> anyhow::Result<SuiteConfig> {
    let d = SuiteConfig::for_suite(&a.suite)?;
    Ok(SuiteConfig {
        seed: a.seed.unwrap_or(d.seed),
        samples: a.samples.unwrap_or(d.samples),
        level: a.level.unwrap_or(d.level),
        c: a.c.unwrap_or(d.c),
        eps: a.eps.unwrap_or(d.eps),
    })
}

fn validate(report: SuiteReport) -> anyhow::Result<Output> {
    let rows = report
        .tests
        .iter()
        .map(|t| {
            vec![
                t.name.clone(),
                cell(t.statistic),
                cell(t.threshold),
                t.rule.clone(),
                cell(t.passed),
                cell(t.samples),
                cell(t.seed),
            ]
        })
        .collect();
    let passed = report.passed;
    let mut out = Output::new(
        serde_json::to_value(&report)?,
        vec!["name", "statistic", "threshold", "rule", "passed", "samples", "seed"],
        rows,
    );
    out.passed = passed;
    Ok(out)
}

fn bc_function(c: [f64; 5]) -> impl Fn((f64, f64)) -> f64 + Sync + Copy {
    move |(x, y)| c[0] + c[1] * x + c[2] * y + c[3] * x * y + c[4] * (x * x - y * y)
}

/// Gradient bound of the boundary polynomial over the shape's box.
fn bc_lipschitz(c: [f64; 5], shape: &Shape) -> f64 {
    let ((x0, y0), (x1, y1)) = shape.extent();
    let xm = x0.abs().max(x1.abs());
    let ym = y0.abs().max(y1.abs());
    let gx = c[1].abs() + c[3].abs() * ym + 2.0 * c[4].abs() * xm;
    let gy = c[2].abs() + c[3].abs() * xm + 2.0 * c[4].abs() * ym;
    gx.hypot(gy)
}

fn estimate_json(x: (f64, f64), est: &MonteCarloEstimate, trace: &[TraceEntry]) -> Value {
    json!({
        "x": [x.0, x.1],
        "mean": est.mean,
        "half_width": est.half_width,
        "confidence": est.confidence,
        "n_samples": est.n_samples,
        "lost_walkers": est.lost_walkers,
        "grazing": est.grazing,
        "seed": est.seed,
        "trace": trace,
    })
}

fn dirichlet(a: &DirichletArgs) -> anyhow::Result<Output> {
    let x = (a.x, a.y);
    let walk = WalkConfig {
        n_walkers: a.walkers,
        seed: a.seed,
        eps_hit: a.eps_hit,
        confidence: a.confidence,
        ..WalkConfig::default()
    };
    let (domain, bc, mut result) = match (&a.domain, a.shape) {
        (Some(file), _) => {
            let text = std::fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
            let (domain, bc) = DomainFile::parse(&text)?.build()?;
            let (est, entry) = solve_level(&domain, &bc, x, &walk)?;
            let v = estimate_json(x, &est, &[entry]);
            (domain, bc, v)
        }
        (None, Some(shape)) => {
            let problem = ShapeProblem {
                shape,
                phi: bc_function(a.bc),
                lipschitz: bc_lipschitz(a.bc, &shape),
            };
            if let Some(path) = &a.write_domain {
                let (d, bc) = problem.at(a.resolution)?;
                std::fs::write(path, DomainFile::from_parts(&d, &bc)?.to_json())
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            match a.refine_to {
                Some(n_max) => {
                    let cfg = RefineConfig {
                        n0: a.resolution,
                        n_max,
                        target_err: a.target_err,
                        walk,
                    };
                    let r = solve_refining(&problem, x, &cfg)?;
                    let mut v = estimate_json(x, &r.estimate, &r.trace);
                    v["resolution"] = json!(r.resolution);
                    v["converged"] = json!(r.converged);
                    let (d, bc) = problem.at(r.resolution)?;
                    (d, bc, v)
                }
                None => {
                    let (d, bc) = problem.at(a.resolution)?;
                    let (est, entry) = solve_level(&d, &bc, x, &walk)?;
                    let v = estimate_json(x, &est, &[entry]);
                    (d, bc, v)
                }
            }
        }
        (None, None) => bail!(CoreError::InvalidArgument("give --domain or --shape".into())),
    };
    let trace: Vec<TraceEntry> = serde_json::from_value(result["trace"].clone())?;
    let mut header = vec!["n", "v_n", "half_width", "err_budget"];
    let mut rows: Vec<Vec<String>> = trace
        .iter()
        .map(|t| vec![cell(t.n), cell(t.v_n), cell(t.half_width), cell(t.err_budget)])
        .collect();
    if let Some(s) = a.slice {
        let points = slice(&domain, &bc, x, s, &walk)?;
        header = vec!["x", "y", "mean", "half_width"];
        rows = points
            .iter()
            .map(|(p, e)| vec![cell(p.0), cell(p.1), cell(e.mean), cell(e.half_width)])
            .collect();
        result["slice"] = Value::Array(
            points
                .iter()
                .map(|(p, e)| json!({ "x": p.0, "y": p.1, "mean": e.mean, "half_width": e.half_width }))
                .collect(),
        );
    }
    Ok(Output::new(result, header, rows))
}

/// Estimates at `k` points of a horizontal line, skipping points outside the region around `x`.
fn slice(
    domain: &SquaredDomain,
    bc: &BoundaryCondition,
    x: (f64, f64),
    [x0, x1, y, k]: [f64; 4],
    walk: &WalkConfig,
) -> anyhow::Result<Vec<((f64, f64), MonteCarloEstimate)>> {
    if !(k >= 1.0 && k.fract() == 0.0 && k <= 10_000.0) {
        bail!(CoreError::InvalidArgument("slice point count must be an integer in 1..=10000".into()));
    }
    let k = k as usize;
    let region = InteriorRegion::flood_fill(domain, x)?;
    let psi = transfer_condition(&region, bc)?;
    let mut out = Vec::new();
    for i in 0..k {
        let px = if k == 1 { x0 } else { x0 + (x1 - x0) * i as f64 / (k - 1) as f64 };
        match solve_at(&region, &psi, (px, y), walk) {
            Ok(e) => out.push(((px, y), e)),
            Err(CoreError::Domain(_)) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct Envelope<'a> {
    tool: &'a str,
    version: &'a str,
    command: &'a str,
    format: Format,
    config: Value,
    result: Value,
}

fn render(cli: &Cli, name: &str, config: Value, out: &Output) -> anyhow::Result<Vec<u8>> {
    match cli.format {
        Format::Json => {
            let env = Envelope {
                tool: TOOL,
                version: VERSION,
                command: name,
                format: cli.format,
                config,
                result: out.result.clone(),
            };
            let mut s = serde_json::to_vec_pretty(&env)?;
            s.push(b'\n');
            Ok(s)
        }
        Format::Csv => {
            let mut buf = format!("# {TOOL} {VERSION} {name} {}\n", serde_json::to_string(&config)?).into_bytes();
            {
                let mut w = csv::Writer::from_writer(&mut buf);
                w.write_record(&out.header)?;
                for r in &out.rows {
                    w.write_record(r)?;
                }
                w.flush()?;
            }
            Ok(buf)
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!(CoreError::InvalidArgument("thread count must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| anyhow!("thread pool: {e}"))?;
    }
    let (name, config, out) = match &cli.command {
        Command::Sample(a) => ("sample", serde_json::to_value(a)?, sample(a)?),
        Command::Eval(a) => ("eval", serde_json::to_value(a)?, eval(a)?),
        Command::Max(a) => ("max", serde_json::to_value(a)?, max(a)?),
        Command::Zeros(a) => ("zeros", serde_json::to_value(a)?, zeros(a)?),
        Command::Hit(a) => ("hit", serde_json::to_value(a)?, hit(a)?),
        Command::Validate(a) => {
            let cfg = suite_config(a)?;
            let report = run_suite(&a.suite, &cfg)?;
            let config = json!({ "suite": report.suite, "config": cfg });
            ("validate", config, validate(report)?)
        }
        Command::Dirichlet(a) => ("dirichlet", serde_json::to_value(a)?, dirichlet(a)?),
    };
    let bytes = render(cli, name, config, &out)?;
    match &cli.out {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display()))?,
        None => std::io::stdout().lock().write_all(&bytes)?,
    }
    Ok(out.passed)
}

/// Input problems exit 2; failures of the computation itself exit 1.
fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<CoreError>() {
        Some(
            CoreError::InvalidArgument(_)
            | CoreError::Domain(_)
            | CoreError::MissingBoundaryValue(..)
            | CoreError::CapExceeded { .. },
        ) => 2,
        Some(_) => 1,
        None => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
