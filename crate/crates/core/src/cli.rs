//! Command-line front end.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::chaos::{chaos_game, DEFAULT_BURN_IN};
use crate::dimension::minkowski_report;
use crate::error::FracError;
use crate::eval::eval_at;
use crate::grid::{sample_grid, self_residual};
use crate::histo::{self, HistoSolution, Histogram};
use crate::io::{
    chaos_csv, chaos_svg, from_json, reals, sample_csv, sample_svg, to_json, unreal,
    HistogramDoc, PiecewiseDoc, QSpec, Real, SolutionDoc, SystemDoc,
};
use crate::moments::{moment_oracle, moment_oracle_extrapolated, moments, MOMENT_CAP};
use crate::system::{
    build_affine_fif, build_alpha_fractal, build_interpolatory_discontinuous, perturb_data, DataSet,
    FractalSystem, Partition, ScaleFactors, DEFAULT_TOL,
};
use crate::transform::{transform, transform_residual, TransformKind, TransformMethod};
use crate::validate::validate;

/// Deepest recursion accepted by `--depth` options.
const MAX_DEPTH: u32 = 64;

#[derive(Debug, Parser)]
#[command(
    name = "fraclib",
    version,
    about = "Affine fractal functions: construction, evaluation, moments, transforms and histopolation",
    allow_negative_numbers = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a system descriptor from a data or histogram config
    Build(BuildArgs),
    /// Sample the fixed point on an address grid (CSV), or at given points (JSON)
    Eval(EvalArgs),
    /// Chaos-game point cloud (CSV)
    Chaos(ChaosArgs),
    /// Moments by recursion, optionally checked against panel sums
    Moments(MomentsArgs),
    /// Laplace, Stieltjes or Fourier transform values
    Transform(TransformArgs),
    /// Solve a histopolation problem
    Histo(HistoArgs),
    /// Minkowski dimension of the graph
    Dim(DimArgs),
    /// Classification, self-consistency and area report
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuildKind {
    AffineFif,
    InterpolatoryDiscontinuous,
    AlphaFractal,
    General,
    Histogram,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HistoMode {
    Scales,
    Offsets,
    Continuous,
    Spline,
}

impl HistoMode {
    fn name(&self) -> &'static str {
        match self {
            HistoMode::Scales => "scales",
            HistoMode::Offsets => "offsets",
            HistoMode::Continuous => "continuous",
            HistoMode::Spline => "spline",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Laplace,
    Stieltjes,
    Fourier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Quadrature,
    Series,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// JSON config (see README for the schema)
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, value_enum)]
    pub kind: Option<BuildKind>,
    /// Scale factors; a single value is used for every map
    #[arg(long, value_delimiter = ',')]
    pub alpha: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub slopes: Option<Vec<f64>>,
    /// Perturb interior ordinates by up to epsilon (continuous approximant)
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub system: PathBuf,
    /// Grid depth
    #[arg(long, default_value_t = 8)]
    pub depth: u32,
    /// Evaluate at these abscissae instead of sampling a grid
    #[arg(long, value_delimiter = ',')]
    pub at: Option<Vec<f64>>,
    /// Address depth used with --at
    #[arg(long, default_value_t = 48)]
    pub eval_depth: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write an SVG rendering
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ChaosArgs {
    #[arg(long)]
    pub system: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    pub points: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_BURN_IN)]
    pub burn_in: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    #[arg(long)]
    pub system: PathBuf,
    /// Highest order M
    #[arg(long = "max-order", short = 'm', default_value_t = 6)]
    pub max_order: usize,
    /// Compare against panel sums at this depth
    #[arg(long)]
    pub oracle_depth: Option<u32>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    #[arg(long)]
    pub system: PathBuf,
    #[arg(long, value_enum)]
    pub kind: KindArg,
    /// Arguments s
    #[arg(long, value_delimiter = ',', required = true)]
    pub s: Vec<f64>,
    #[arg(long, value_enum, default_value_t = MethodArg::Quadrature)]
    pub method: MethodArg,
    /// Panel depth for quadrature and residuals
    #[arg(long, default_value_t = 12)]
    pub depth: u32,
    /// Series truncation tolerance
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Skip the functional-equation residual
    #[arg(long)]
    pub no_residual: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HistoArgs {
    /// Histogram JSON {knots, frequencies, ...}
    #[arg(long)]
    pub hist: PathBuf,
    #[arg(long, value_enum)]
    pub mode: Option<HistoMode>,
    #[arg(long, value_delimiter = ',')]
    pub alpha: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub slopes: Option<Vec<f64>>,
    #[arg(long)]
    pub y0: Option<f64>,
    /// Maps for --mode scales: inline JSON list or a path to one
    #[arg(long)]
    pub q: Option<String>,
    /// Spline system for --mode spline
    #[arg(long)]
    pub spline: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DimArgs {
    #[arg(long)]
    pub system: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub system: PathBuf,
    /// Grid depth for the self-consistency residual
    #[arg(long, default_value_t = 10)]
    pub depth: u32,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Histogram whose areas the system should match
    #[arg(long)]
    pub hist: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Failure with its exit status.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            kind: "usage",
            message: message.into(),
        }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        Self {
            code: 2,
            kind: "io",
            message: format!("{}: {e}", path.display()),
        }
    }

    fn infeasible(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            kind: "infeasible",
            message: message.into(),
        }
    }
}

impl From<FracError> for CliError {
    fn from(e: FracError) -> Self {
        let (code, kind) = match &e {
            FracError::SingularSystem { .. } => (3, "singular"),
            FracError::ZeroTotalArea => (3, "infeasible"),
            FracError::BadData(_) => (2, "schema"),
            _ => (2, "invalid"),
        };
        Self {
            code,
            kind,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Output produced by a successful command.
struct Output {
    text: String,
    out: Option<PathBuf>,
    /// Extra files, e.g. SVG renderings.
    extra: Vec<(PathBuf, String)>,
    /// Set when the artifact was written but the solve was infeasible.
    failure: Option<CliError>,
}

impl Output {
    fn new(text: String, out: Option<PathBuf>) -> Self {
        Self {
            text,
            out,
            extra: Vec::new(),
            failure: None,
        }
    }
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn load_system(path: &Path) -> CliResult<FractalSystem> {
    Ok(from_json::<SystemDoc>(&read(path)?)?.to_system()?)
}

fn check_depth(depth: u32) -> CliResult<()> {
    if depth > MAX_DEPTH {
        return Err(CliError::usage(format!("depth {depth} exceeds {MAX_DEPTH}")));
    }
    Ok(())
}

fn check_finite(name: &str, values: &[f64]) -> CliResult<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(CliError::usage(format!("--{name} values must be finite")));
    }
    Ok(())
}

/// A single scale is broadcast to all `n` maps.
fn scales_for(alpha: &[f64], n: usize) -> CliResult<ScaleFactors> {
    let v = if alpha.len() == 1 {
        vec![alpha[0]; n]
    } else {
        alpha.to_vec()
    };
    if v.len() != n {
        return Err(FracError::LengthMismatch {
            what: "scale factors",
            expected: n,
            got: v.len(),
        }
        .into());
    }
    Ok(ScaleFactors::new(v)?)
}

fn reals_json(v: &[f64]) -> Value {
    json!(v)
}

#[derive(Debug, Deserialize)]
struct BuildConfig {
    kind: Option<BuildKind>,
    data: Option<Vec<[Real; 2]>>,
    knots: Option<Vec<Real>>,
    alpha: Option<Vec<Real>>,
    slopes: Option<Vec<Real>>,
    epsilon: Option<f64>,
    seed: Option<u64>,
    h: Option<PiecewiseDoc>,
    base: Option<PiecewiseDoc>,
    continuous: Option<bool>,
    q: Option<Vec<QSpec>>,
    frequencies: Option<Vec<Real>>,
    mode: Option<HistoMode>,
    y0: Option<f64>,
}

fn need<T>(v: Option<T>, what: &str) -> CliResult<T> {
    v.ok_or_else(|| CliError {
        code: 2,
        kind: "schema",
        message: format!("missing field `{what}`"),
    })
}

fn cmd_build(a: &BuildArgs) -> CliResult<Output> {
    if let Some(alpha) = &a.alpha {
        check_finite("alpha", alpha)?;
    }
    if let Some(eps) = a.epsilon {
        if !(eps.is_finite() && eps >= 0.0) {
            return Err(CliError::usage("--epsilon must be a non-negative number"));
        }
    }
    let cfg: BuildConfig = from_json(&read(&a.config)?)?;
    let kind = a.kind.or(cfg.kind).unwrap_or(BuildKind::AffineFif);
    let alpha = a.alpha.clone().or(cfg.alpha.as_deref().map(unreal));
    let slopes = a.slopes.clone().or(cfg.slopes.as_deref().map(unreal));
    let epsilon = a.epsilon.or(cfg.epsilon);
    let seed = a.seed.or(cfg.seed).unwrap_or(0);
    let mut params = BTreeMap::new();
    params.insert("command".into(), json!("build"));
    params.insert("kind".into(), serde_json::to_value(kind).unwrap());
    if let Some(al) = &alpha {
        params.insert("alpha".into(), reals_json(al));
    }
    if let Some(s) = &slopes {
        params.insert("slopes".into(), reals_json(s));
    }
    let data = || -> CliResult<DataSet> {
        let pts = need(cfg.data.as_ref(), "data")?;
        Ok(DataSet::new(pts.iter().map(|p| (p[0].0, p[1].0)).collect())?)
    };
    let sys = match kind {
        BuildKind::AffineFif => {
            let mut d = data()?;
            if let Some(eps) = epsilon {
                d = perturb_data(&d, eps, seed)?;
                params.insert("epsilon".into(), json!(eps));
                params.insert("seed".into(), json!(seed));
            }
            let scales = scales_for(&need(alpha, "alpha")?, d.len() - 1)?;
            build_affine_fif(&d, &scales)?
        }
        BuildKind::InterpolatoryDiscontinuous => {
            let d = data()?;
            let scales = scales_for(&need(alpha, "alpha")?, d.len() - 1)?;
            build_interpolatory_discontinuous(&d, &scales, &need(slopes, "slopes")?)?
        }
        BuildKind::AlphaFractal => {
            let partition = Partition::new(unreal(&need(cfg.knots, "knots")?))?;
            let scales = scales_for(&need(alpha, "alpha")?, partition.len())?;
            let h = need(cfg.h, "h")?.to_poly()?;
            let base = need(cfg.base, "base")?.to_poly()?;
            let continuous = cfg.continuous.unwrap_or(true);
            params.insert("continuous".into(), json!(continuous));
            build_alpha_fractal(&h, &base, &partition, &scales, continuous)?
        }
        BuildKind::General => {
            let partition = Partition::new(unreal(&need(cfg.knots, "knots")?))?;
            let scales = scales_for(&need(alpha, "alpha")?, partition.len())?;
            let q = need(cfg.q, "q")?
                .iter()
                .map(|s| s.to_poly(&partition))
                .collect::<crate::error::Result<Vec<_>>>()?;
            FractalSystem::new(partition, scales, q, None, "general")?
        }
        BuildKind::Histogram => {
            let hist = Histogram::new(
                Partition::new(unreal(&need(cfg.knots.clone(), "knots")?))?,
                unreal(&need(cfg.frequencies.clone(), "frequencies")?),
            )?;
            let mode = need(cfg.mode, "mode")?;
            params.insert("mode".into(), json!(mode.name()));
            let q = cfg
                .q
                .as_ref()
                .map(|qs| {
                    qs.iter()
                        .map(|s| s.to_poly(hist.partition()))
                        .collect::<crate::error::Result<Vec<_>>>()
                })
                .transpose()?;
            let sol = solve_histo(&hist, mode, alpha.as_deref(), slopes.as_deref(), cfg.y0, q.as_deref(), None)?;
            match sol.system {
                Some(s) if sol.feasible => s,
                _ => return Err(CliError::infeasible("histopolation solve is infeasible")),
            }
        }
    };
    let text = to_json(&SystemDoc::from_system(&sys, params))?;
    Ok(Output::new(text, a.out.clone()))
}

fn solve_histo(
    hist: &Histogram,
    mode: HistoMode,
    alpha: Option<&[f64]>,
    slopes: Option<&[f64]>,
    y0: Option<f64>,
    q: Option<&[crate::poly::PiecewisePolynomial]>,
    spline: Option<&FractalSystem>,
) -> CliResult<HistoSolution> {
    let p = hist.partition();
    let n = p.len();
    Ok(match mode {
        HistoMode::Scales => histo::solve_scales(p, hist, need(q, "q")?)?,
        HistoMode::Offsets => {
            let scales = scales_for(need(alpha, "alpha")?, n)?;
            histo::solve_offsets(p, hist, &scales, need(slopes, "slopes")?)?
        }
        HistoMode::Continuous => {
            let scales = scales_for(need(alpha, "alpha")?, n)?;
            histo::solve_continuous(p, hist, &scales, y0.unwrap_or(0.0))?
        }
        HistoMode::Spline => histo::histospline(need(spline, "spline")?, hist)?,
    })
}

fn parse_q(arg: &str, partition: &Partition) -> CliResult<Vec<crate::poly::PiecewisePolynomial>> {
    let text = if arg.trim_start().starts_with('[') {
        arg.to_string()
    } else {
        read(Path::new(arg))?
    };
    let specs: Vec<QSpec> = from_json(&text)?;
    Ok(specs
        .iter()
        .map(|s| s.to_poly(partition))
        .collect::<crate::error::Result<Vec<_>>>()?)
}

fn cmd_histo(a: &HistoArgs) -> CliResult<Output> {
    for (name, v) in [("alpha", &a.alpha), ("slopes", &a.slopes)] {
        if let Some(v) = v {
            check_finite(name, v)?;
        }
    }
    if a.y0.is_some_and(|y| !y.is_finite()) {
        return Err(CliError::usage("--y0 must be finite"));
    }
    let doc: HistogramDoc = from_json(&read(&a.hist)?)?;
    let hist = doc.to_histogram()?;
    let mode = match a.mode {
        Some(m) => m,
        None => match doc.mode.as_deref() {
            Some(s) => HistoMode::from_str(s, true)
                .map_err(|_| CliError::usage(format!("unknown mode `{s}`")))?,
            None => return Err(CliError::usage("--mode is required")),
        },
    };
    let alpha = a.alpha.clone().or(doc.alpha.as_deref().map(unreal));
    let slopes = a.slopes.clone().or(doc.slopes.as_deref().map(unreal));
    let y0 = a.y0.or(doc.y0.map(|r| r.0));
    let q = match (&a.q, &doc.q) {
        (Some(arg), _) => Some(parse_q(arg, hist.partition())?),
        (None, Some(specs)) => Some(
            specs
                .iter()
                .map(|s| s.to_poly(hist.partition()))
                .collect::<crate::error::Result<Vec<_>>>()?,
        ),
        (None, None) => None,
    };
    let spline = a.spline.as_deref().map(load_system).transpose()?;

    let mut params = BTreeMap::new();
    params.insert("command".into(), json!("histo"));
    params.insert("mode".into(), json!(mode.name()));
    params.insert("knots".into(), reals_json(hist.partition().knots()));
    params.insert("frequencies".into(), reals_json(hist.frequencies()));
    if let Some(al) = &alpha {
        params.insert("alpha".into(), reals_json(al));
    }
    if let Some(s) = &slopes {
        params.insert("slopes".into(), reals_json(s));
    }
    if let Some(y) = y0 {
        params.insert("y0".into(), json!(y));
    }

    let sol = solve_histo(&hist, mode, alpha.as_deref(), slopes.as_deref(), y0, q.as_deref(), spline.as_ref())?;
    let text = to_json(&SolutionDoc::from_solution(&sol, params))?;
    let mut out = Output::new(text, a.out.clone());
    if !sol.feasible {
        out.failure = Some(CliError::infeasible(format!(
            "solution is infeasible (alpha = {:?})",
            sol.alpha
        )));
    }
    Ok(out)
}

#[derive(Serialize)]
struct PointEval {
    x: Real,
    value: Real,
    error_bound: Real,
    depth_used: usize,
    address: String,
}

fn cmd_eval(a: &EvalArgs) -> CliResult<Output> {
    check_depth(a.depth)?;
    if let Some(at) = &a.at {
        check_finite("at", at)?;
    }
    let sys = load_system(&a.system)?;
    if let Some(at) = &a.at {
        let rows = at
            .iter()
            .map(|&x| {
                let r = eval_at(&sys, x, a.eval_depth)?;
                Ok(PointEval {
                    x: Real(x),
                    value: Real(r.value),
                    error_bound: Real(r.error_bound),
                    depth_used: r.depth_used,
                    address: r.address.code_string(sys.n()),
                })
            })
            .collect::<crate::error::Result<Vec<_>>>()?;
        let doc = json!({
            "points": serde_json::to_value(&rows).map_err(|e| CliError::usage(e.to_string()))?,
        });
        return Ok(Output::new(to_json(&doc)?, a.out.clone()));
    }
    let set = sample_grid(&sys, a.depth)?;
    let mut out = Output::new(sample_csv(&set, sys.n()), a.out.clone());
    if let Some(svg) = &a.svg {
        out.extra.push((svg.clone(), sample_svg(&set)));
    }
    Ok(out)
}

fn cmd_chaos(a: &ChaosArgs) -> CliResult<Output> {
    if a.points == 0 {
        return Err(CliError::usage("--points must be positive"));
    }
    let sys = load_system(&a.system)?;
    let pts = chaos_game(&sys, a.points, a.burn_in, a.seed);
    let mut out = Output::new(chaos_csv(&pts), a.out.clone());
    if let Some(svg) = &a.svg {
        out.extra.push((svg.clone(), chaos_svg(&pts)));
    }
    Ok(out)
}

#[derive(Serialize)]
struct MomentsDoc {
    moments: Vec<Real>,
    q_moments: Vec<Real>,
    method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_depth: Option<u32>,
    /// Recursion minus the extrapolated panel sums.
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_diff: Option<Vec<Real>>,
    /// Recursion minus the raw panel sums at the oracle depth.
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_raw_diff: Option<Vec<Real>>,
    meta: BTreeMap<String, Value>,
}

fn cmd_moments(a: &MomentsArgs) -> CliResult<Output> {
    if a.max_order > MOMENT_CAP {
        return Err(FracError::MomentOrderTooLarge {
            order: a.max_order,
            cap: MOMENT_CAP,
        }
        .into());
    }
    if let Some(d) = a.oracle_depth {
        check_depth(d)?;
    }
    let sys = load_system(&a.system)?;
    let table = moments(&sys, a.max_order)?;
    let (mut diff, mut raw) = (None, None);
    if let Some(k) = a.oracle_depth {
        let mut d = Vec::new();
        let mut r = Vec::new();
        for (m, &v) in table.values.iter().enumerate() {
            d.push(v - moment_oracle_extrapolated(&sys, m, k)?);
            r.push(v - moment_oracle(&sys, m, k)?);
        }
        diff = Some(reals(&d));
        raw = Some(reals(&r));
    }
    let mut meta = BTreeMap::new();
    meta.insert("command".into(), json!("moments"));
    meta.insert("max_order".into(), json!(a.max_order));
    meta.insert("system".into(), json!(a.system.display().to_string()));
    let doc = MomentsDoc {
        moments: reals(&table.values),
        q_moments: reals(&table.q_moments),
        method: table.method.name().to_string(),
        oracle_depth: a.oracle_depth,
        oracle_diff: diff,
        oracle_raw_diff: raw,
        meta,
    };
    Ok(Output::new(to_json(&doc)?, a.out.clone()))
}

#[derive(Serialize)]
struct TransformEntry {
    s: Real,
    kind: &'static str,
    value: [Real; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    residual: Option<Real>,
    terms: usize,
    tail_bound: Real,
}

fn cmd_transform(a: &TransformArgs) -> CliResult<Output> {
    check_depth(a.depth)?;
    check_finite("s", &a.s)?;
    if !(a.tol > 0.0) {
        return Err(CliError::usage("--tol must be positive"));
    }
    let kind = match a.kind {
        KindArg::Laplace => TransformKind::Laplace,
        KindArg::Stieltjes => TransformKind::Stieltjes,
        KindArg::Fourier => TransformKind::Fourier,
    };
    let method = match a.method {
        MethodArg::Quadrature => TransformMethod::Quadrature { depth: a.depth },
        MethodArg::Series => TransformMethod::Series { tol: a.tol },
    };
    let sys = load_system(&a.system)?;
    let results = a
        .s
        .iter()
        .map(|&s| {
            let v = transform(&sys, kind, s, method)?;
            let residual = if a.no_residual {
                None
            } else {
                Some(Real(transform_residual(&sys, kind, s, a.depth)?))
            };
            Ok(TransformEntry {
                s: Real(s),
                kind: kind.name(),
                value: [Real(v.value.re), Real(v.value.im)],
                residual,
                terms: v.terms,
                tail_bound: Real(v.tail_bound),
            })
        })
        .collect::<crate::error::Result<Vec<_>>>()?;
    let mut meta: BTreeMap<String, Value> = BTreeMap::new();
    meta.insert("command".into(), json!("transform"));
    meta.insert("depth".into(), json!(a.depth));
    meta.insert("tol".into(), json!(a.tol));
    meta.insert("system".into(), json!(a.system.display().to_string()));
    let method_name = match a.method {
        MethodArg::Quadrature => "quadrature",
        MethodArg::Series => "series",
    };
    let doc = json!({
        "kind": kind.name(),
        "method": method_name,
        "results": serde_json::to_value(&results).map_err(|e| CliError::usage(e.to_string()))?,
        "meta": meta,
    });
    Ok(Output::new(to_json(&doc)?, a.out.clone()))
}

#[derive(Serialize)]
struct DimDoc {
    dimension: Real,
    sum_abs_alpha: Real,
    residual: Real,
    formula_domain: &'static str,
    meta: BTreeMap<String, Value>,
}

fn cmd_dim(a: &DimArgs) -> CliResult<Output> {
    let sys = load_system(&a.system)?;
    let r = minkowski_report(&sys);
    let mut meta = BTreeMap::new();
    meta.insert("command".into(), json!("dim"));
    meta.insert("system".into(), json!(a.system.display().to_string()));
    let doc = DimDoc {
        dimension: Real(r.dimension),
        sum_abs_alpha: Real(r.sum_abs_alpha),
        residual: Real(r.residual),
        formula_domain: r.formula_domain,
        meta,
    };
    Ok(Output::new(to_json(&doc)?, a.out.clone()))
}

#[derive(Serialize)]
struct VerifyDoc {
    variant: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<Real>,
    join_residuals: Vec<Real>,
    max_join_residual: Real,
    endpoint_residuals: Vec<Real>,
    ck_order: u32,
    knot_values: Vec<Real>,
    q_jump: Real,
    self_residual: Real,
    self_residual_depth: u32,
    areas: Vec<Real>,
    #[serde(skip_serializing_if = "Option::is_none")]
    area_targets: Option<Vec<Real>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    area_residuals: Option<Vec<Real>>,
    meta: BTreeMap<String, Value>,
}

fn cmd_verify(a: &VerifyArgs) -> CliResult<Output> {
    check_depth(a.depth)?;
    if !(a.tol > 0.0) {
        return Err(CliError::usage("--tol must be positive"));
    }
    let sys = load_system(&a.system)?;
    let hist = match &a.hist {
        Some(p) => Some(from_json::<HistogramDoc>(&read(p)?)?.to_histogram()?),
        None => None,
    };
    let report = validate(&sys, a.tol);
    let areas = histo::areas(&sys)?;
    let (targets, residuals) = match &hist {
        Some(h) => {
            if h.partition().len() != sys.n() {
                return Err(FracError::LengthMismatch {
                    what: "histogram bins",
                    expected: sys.n(),
                    got: h.partition().len(),
                }
                .into());
            }
            let t = h.targets();
            let r: Vec<f64> = areas.iter().zip(&t).map(|(x, y)| x - y).collect();
            (Some(reals(&t)), Some(reals(&r)))
        }
        None => (None, None),
    };
    let mut meta = BTreeMap::new();
    meta.insert("command".into(), json!("verify"));
    meta.insert("tol".into(), json!(a.tol));
    meta.insert("system".into(), json!(a.system.display().to_string()));
    let doc = VerifyDoc {
        variant: report.variant.name(),
        epsilon: match report.variant {
            crate::validate::Variant::ContinuousApproximant { epsilon } => Some(Real(epsilon)),
            _ => None,
        },
        max_join_residual: Real(report.max_join_residual()),
        join_residuals: reals(&report.join_residuals),
        endpoint_residuals: reals(&report.endpoint_residuals),
        ck_order: report.ck_order,
        knot_values: reals(&report.knot_values),
        q_jump: Real(report.q_jump),
        self_residual: Real(self_residual(&sys, a.depth)?),
        self_residual_depth: a.depth,
        areas: reals(&areas),
        area_targets: targets,
        area_residuals: residuals,
        meta,
    };
    Ok(Output::new(to_json(&doc)?, a.out.clone()))
}

fn dispatch(cmd: &Command) -> CliResult<Output> {
    match cmd {
        Command::Build(a) => cmd_build(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Chaos(a) => cmd_chaos(a),
        Command::Moments(a) => cmd_moments(a),
        Command::Transform(a) => cmd_transform(a),
        Command::Histo(a) => cmd_histo(a),
        Command::Dim(a) => cmd_dim(a),
        Command::Verify(a) => cmd_verify(a),
    }
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn report_error(err: &mut dyn Write, e: &CliError) -> i32 {
    let doc = json!({ "error": e.kind, "message": e.message, "exit_code": e.code });
    let _ = writeln!(err, "{doc}");
    e.code
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            return report_error(err, &CliError::usage(e.to_string().trim().to_string()));
        }
    };
    let result = dispatch(&cli.command).and_then(|o| {
        for (path, text) in &o.extra {
            write_file(path, text)?;
        }
        match &o.out {
            Some(path) => write_file(path, &o.text)?,
            None => {
                let _ = out.write_all(o.text.as_bytes());
            }
        }
        match o.failure {
            Some(f) => Err(f),
            None => Ok(()),
        }
    });
    match result {
        Ok(()) => 0,
        Err(e) => report_error(err, &e),
    }
}

pub fn run() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
