//! One function per subcommand. Each returns a report whose `pass` entry
//! decides the exit code.

use std::path::{Path, PathBuf};

use clap::{Args, Subcommand};
use finsler_ricci::flow::{
    default_horizon, time_grid, FlowFamily, DEFAULT_DT, EINSTEIN_SPREAD_TOL,
};
use finsler_ricci::lift::DEFAULT_STEPS_PER_UNIT;
use finsler_ricci::soliton::{
    estimate_field_coefficients, estimate_lambda, estimate_vector_field, lambda_sign, ResidualReport,
    SolitonEvaluator,
};
use finsler_ricci::verify::corpus::{lemma_diffeos, lemma_fields, lemma_metrics, SCALE_FACTORS};
use finsler_ricci::verify::tolerances::{CONFORMAL, FLOW, FLOW_PATHS, SOLITON};
use finsler_ricci::verify::{
    verify_invariants, verify_lemma1, verify_lemma2, verify_lemma3, verify_lie_contraction, verify_oracle,
    VerificationCheck, VerificationReport,
};
use finsler_ricci::{integrate_conformal_flow, FinslerStructure, Sample, SampleGrid, SolitonTriple, VectorField};

use crate::config::{load_case, load_diffeo, load_field, load_metric, parse_grid, Case, FlowSettings};
use crate::error::{CliError, Context};
use crate::report::{Format, Report, Value};

#[derive(Debug, Clone, Args)]
pub struct Output {
    /// Sample grid: `default` or `lo,hi,resolution,directions`.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Report file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct SolitonSource {
    /// Soliton case file (metric, field, lambda, grid, flow settings).
    #[arg(long)]
    pub case: Option<PathBuf>,
    #[arg(long)]
    pub metric: Option<PathBuf>,
    #[arg(long)]
    pub field: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct FlowOptions {
    /// End of the time grid; defaults to 0.9/(2 lambda), or 1 for lambda <= 0.
    #[arg(long)]
    pub tmax: Option<f64>,
    /// Number of equally spaced times in [0, tmax].
    #[arg(long)]
    pub times: Option<usize>,
    /// Central-difference step in t.
    #[arg(long)]
    pub dt: Option<f64>,
    /// RK4 steps per unit time.
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Metric, Christoffel symbols, spray, curvature and Ricci quantities on a grid.
    Curvature {
        #[arg(long)]
        metric: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Homogeneity, Euler identity and strong convexity on a grid.
    CheckFinsler {
        #[arg(long)]
        metric: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Scalar and tensor soliton residuals.
    SolitonCheck {
        #[command(flatten)]
        source: SolitonSource,
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Least-squares soliton constant, optionally with field coefficients.
    Estimate {
        #[arg(long)]
        metric: PathBuf,
        /// Fixed vector field (ignored when a basis is given).
        #[arg(long)]
        field: Option<PathBuf>,
        /// Basis field for V; repeatable.
        #[arg(long)]
        basis: Vec<PathBuf>,
        /// Hold lambda fixed and fit only the basis coefficients.
        #[arg(long, allow_negative_numbers = true)]
        lambda: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Evaluate F²(t) of the flow family generated by a soliton.
    FlowBuild {
        #[command(flatten)]
        source: SolitonSource,
        #[command(flatten)]
        flow: FlowOptions,
        #[command(flatten)]
        output: Output,
    },
    /// Residual of d/dt log F = -Ric along the flow family.
    FlowVerify {
        #[command(flatten)]
        source: SolitonSource,
        #[command(flatten)]
        flow: FlowOptions,
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Conformal flow c(t) F0² of an Einstein metric.
    FlowConformal {
        #[arg(long)]
        metric: PathBuf,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        tmax: Option<f64>,
        /// Allowed spread of Ric across samples.
        #[arg(long)]
        spread_tol: Option<f64>,
        /// Allowed deviation of c(t) from 1 - 2 Ric t.
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Pullback, scaling, invariant and oracle suites.
    VerifyLemmas {
        #[arg(long, value_enum, default_value = "lemmas")]
        suite: Suite,
        /// Restrict to one metric (default: bundled corpus).
        #[arg(long)]
        metric: Option<PathBuf>,
        /// Restrict to one diffeomorphism (default: bundled corpus).
        #[arg(long)]
        diffeo: Option<PathBuf>,
        /// Vector field for Lie-derivative checks (default: bundled corpus).
        #[arg(long)]
        field: Option<PathBuf>,
        /// Scale factor (default: 0.5, 2, 3).
        #[arg(long)]
        mu: Option<f64>,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Lemmas,
    Invariants,
    Oracle,
    All,
}

impl Command {
    pub fn output(&self) -> &Output {
        match self {
            Command::Curvature { output, .. }
            | Command::CheckFinsler { output, .. }
            | Command::SolitonCheck { output, .. }
            | Command::Estimate { output, .. }
            | Command::FlowBuild { output, .. }
            | Command::FlowVerify { output, .. }
            | Command::FlowConformal { output, .. }
            | Command::VerifyLemmas { output, .. } => output,
        }
    }
}

pub fn run(cmd: &Command) -> Result<Report, CliError> {
    match cmd {
        Command::Curvature { metric, output } => curvature(metric, output),
        Command::CheckFinsler { metric, output } => check_finsler(metric, output),
        Command::SolitonCheck { source, tol, output } => soliton_check(source, *tol, output),
        Command::Estimate { metric, field, basis, lambda, tol, output } => {
            estimate(metric, field.as_deref(), basis, *lambda, *tol, output)
        }
        Command::FlowBuild { source, flow, output } => flow_build(source, flow, output),
        Command::FlowVerify { source, flow, tol, output } => flow_verify(source, flow, *tol, output),
        Command::FlowConformal { metric, dt, tmax, spread_tol, tol, output } => {
            flow_conformal(metric, *dt, *tmax, *spread_tol, *tol, output)
        }
        Command::VerifyLemmas { suite, metric, diffeo, field, mu, output } => {
            verify_lemmas(*suite, metric.as_deref(), diffeo.as_deref(), field.as_deref(), *mu, output)
        }
    }
}

fn grid(output: &Output, fallback: Option<&SampleGrid>) -> Result<SampleGrid, CliError> {
    match (&output.grid, fallback) {
        (Some(spec), _) => parse_grid(spec),
        (None, Some(g)) => Ok(g.clone()),
        (None, None) => Ok(SampleGrid::default()),
    }
}

fn put_grid(r: &mut Report, g: &SampleGrid, count: usize) {
    r.set("grid_lo", g.lo);
    r.set("grid_hi", g.hi);
    r.set("grid_resolution", g.resolution);
    r.set("grid_directions", g.directions);
    r.set("samples", count);
}

fn positive(name: &str, v: Option<f64>, default: f64) -> Result<f64, CliError> {
    let v = v.unwrap_or(default);
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("--{name} must be positive, got {v}")))
    }
}

fn metric_name(f: &FinslerStructure) -> String {
    f.name().map_or_else(|| f.f2().to_string(), str::to_string)
}

fn sample_columns(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).chain((1..=n).map(|i| format!("y{i}"))).collect()
}

fn sample_values(s: &Sample) -> Vec<Value> {
    s.x.iter().chain(&s.y).map(|&v| Value::Num(v)).collect()
}

fn at(s: &Sample) -> impl FnOnce() -> String + '_ {
    move || format!("at sample {s}")
}

fn curvature(metric: &Path, output: &Output) -> Result<Report, CliError> {
    let f = load_metric(metric)?;
    let n = f.dim();
    let g = grid(output, None)?;
    let samples = g.samples(n);
    let idx2 = |p: &str| -> Vec<String> { (1..=n).flat_map(|i| (1..=n).map(move |j| format!("{p}{i}{j}"))).collect() };
    let mut cols = sample_columns(n);
    cols.push("F2".into());
    cols.extend(idx2("g"));
    cols.extend((1..=n).flat_map(|i| (1..=n).flat_map(move |j| (1..=n).map(move |k| format!("gamma{i}{j}{k}")))));
    cols.extend((1..=n).map(|i| format!("G{i}")));
    cols.extend(idx2("R"));
    cols.push("Ric".into());
    cols.extend(idx2("Ric"));
    let mut r = Report::new("curvature", cols);
    r.set("metric", metric_name(&f));
    r.set("dim", n);
    put_grid(&mut r, &g, samples.len());
    let (mut ric_min, mut ric_max, mut tensor_max) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for s in &samples {
        let f2 = f.f2_at(s).context(at(s))?;
        let m = f.fundamental_tensor(s).context(at(s))?;
        let c = f.curvature(s).context(at(s))?;
        ric_min = ric_min.min(c.ric);
        ric_max = ric_max.max(c.ric);
        tensor_max = tensor_max.max(c.ric_tensor.amax());
        let mut row = sample_values(s);
        row.push(f2.into());
        // nalgebra is column-major; rows are written row-major
        let mat = |m: &nalgebra::DMatrix<f64>| -> Vec<Value> {
            (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| Value::Num(m[(i, j)])).collect()
        };
        row.extend(mat(&m.g));
        row.extend(c.gamma.as_slice().iter().map(|&v| Value::Num(v)));
        row.extend(c.spray.iter().map(|&v| Value::Num(v)));
        row.extend(mat(&c.reduced));
        row.push(c.ric.into());
        row.extend(mat(&c.ric_tensor));
        r.push(row);
    }
    if samples.is_empty() {
        (ric_min, ric_max) = (0.0, 0.0);
    }
    r.set("ric_min", ric_min);
    r.set("ric_max", ric_max);
    r.set("ric_tensor_max_abs", tensor_max);
    r.set("pass", true);
    Ok(r)
}

fn check_finsler(metric: &Path, output: &Output) -> Result<Report, CliError> {
    let f = load_metric(metric)?;
    let n = f.dim();
    let g = grid(output, None)?;
    let samples = g.samples(n);
    let mut cols = sample_columns(n);
    cols.extend(["F2", "homogeneity", "euler", "min_eigenvalue", "pass", "error"].map(String::from));
    let mut r = Report::new("check-finsler", cols);
    r.set("metric", metric_name(&f));
    r.set("dim", n);
    put_grid(&mut r, &g, samples.len());
    let check = f.check_finsler(&samples);
    for row in &check.rows {
        let mut v = sample_values(&row.sample);
        v.extend([
            row.f2.into(),
            row.homogeneity_residual.into(),
            row.euler_residual.into(),
            row.min_eigenvalue.into(),
            row.pass.into(),
            row.error.clone().into(),
        ]);
        r.push(v);
    }
    let fold = |get: fn(&finsler_ricci::finsler::FinslerCheckRow) -> f64, init: f64, pick: fn(f64, f64) -> f64| {
        check.rows.iter().map(get).filter(|v| !v.is_nan()).fold(init, pick)
    };
    r.set("max_homogeneity", fold(|r| r.homogeneity_residual, 0.0, f64::max));
    r.set("max_euler", fold(|r| r.euler_residual, 0.0, f64::max));
    r.set("min_eigenvalue", fold(|r| r.min_eigenvalue, f64::INFINITY, f64::min));
    r.set("failures", check.rows.iter().filter(|r| !r.pass).count());
    r.set("first_failure", check.first_failure().map(|row| row.sample.to_string()));
    r.set("pass", check.pass);
    Ok(r)
}

fn resolve_source(source: &SolitonSource) -> Result<Case, CliError> {
    let mut case = match &source.case {
        Some(p) => load_case(p)?,
        None => {
            let metric = source.metric.as_ref().ok_or_else(|| CliError::Usage("--metric or --case is required".into()))?;
            let metric = load_metric(metric)?;
            let lambda = source.lambda.ok_or_else(|| CliError::Usage("--lambda is required without --case".into()))?;
            let field = VectorField::zero(metric.dim());
            Case { metric, field, lambda, grid: None, flow: FlowSettings::default() }
        }
    };
    if source.case.is_some() {
        if let Some(m) = &source.metric {
            case.metric = load_metric(m)?;
        }
        if let Some(l) = source.lambda {
            case.lambda = l;
        }
    }
    if let Some(p) = &source.field {
        case.field = load_field(p)?;
    } else if case.field.dim() != case.metric.dim() {
        case.field = VectorField::zero(case.metric.dim());
    }
    if case.field.dim() != case.metric.dim() {
        return Err(CliError::Usage(format!(
            "metric has dim {}, field has dim {}",
            case.metric.dim(),
            case.field.dim()
        )));
    }
    if !case.lambda.is_finite() {
        return Err(CliError::Usage("lambda must be finite".into()));
    }
    Ok(case)
}

fn field_text(v: &VectorField) -> String {
    let parts: Vec<String> = v.components().iter().map(ToString::to_string).collect();
    format!("({})", parts.join(", "))
}

fn residual_table(command: &str, n: usize, report: &ResidualReport) -> Report {
    let mut cols = sample_columns(n);
    cols.extend(["F2", "Ric", "lie_F2", "raw", "relative", "tensor_max"].map(String::from));
    let mut r = Report::new(command, cols);
    for row in &report.rows {
        let mut v = sample_values(&row.sample);
        let s = &row.scalar;
        v.extend([s.f2, s.ric, s.lie_f2, s.raw, s.relative, row.tensor_max].map(Value::Num));
        r.push(v);
    }
    r
}

fn put_residuals(r: &mut Report, report: &ResidualReport) {
    r.set("rms", report.rms);
    r.set("max", report.max);
    r.set("raw_rms", report.raw_rms);
    r.set("raw_max", report.raw_max);
    r.set("tensor_max", report.tensor_max);
}

fn soliton_check(source: &SolitonSource, tol: Option<f64>, output: &Output) -> Result<Report, CliError> {
    let case = resolve_source(source)?;
    let tol = positive("tol", tol, SOLITON.value)?;
    let g = grid(output, case.grid.as_ref())?;
    let samples = g.samples(case.metric.dim());
    let triple = SolitonTriple::new(case.metric.clone(), case.field.clone(), case.lambda).context(|| "soliton".into())?;
    let eval = SolitonEvaluator::new(triple).context(|| "soliton".into())?;
    let report = eval.report(&samples).context(|| "soliton residuals".into())?;
    let mut r = residual_table("soliton-check", case.metric.dim(), &report);
    r.set("metric", metric_name(&case.metric));
    r.set("field", field_text(&case.field));
    r.set("lambda", case.lambda);
    r.set("lambda_sign", lambda_sign(case.lambda));
    put_grid(&mut r, &g, samples.len());
    put_residuals(&mut r, &report);
    r.set("tol", tol);
    r.set("pass", report.max <= tol && report.tensor_max <= tol);
    Ok(r)
}

fn estimate(
    metric: &Path,
    field: Option<&Path>,
    basis: &[PathBuf],
    lambda: Option<f64>,
    tol: Option<f64>,
    output: &Output,
) -> Result<Report, CliError> {
    let f = load_metric(metric)?;
    let n = f.dim();
    let tol = positive("tol", tol, 1e-8)?;
    let g = grid(output, None)?;
    let samples = g.samples(n);
    let ctx = || "estimate".to_string();
    let (lambda_hat, report, extra): (f64, ResidualReport, Option<finsler_ricci::soliton::FieldEstimate>) =
        if basis.is_empty() {
            let v = match field {
                Some(p) => load_field(p)?,
                None => VectorField::zero(n),
            };
            if lambda.is_some() {
                return Err(CliError::Usage("--lambda needs at least one --basis field".into()));
            }
            let (l, rep) = estimate_lambda(&f, &v, &samples).context(ctx)?;
            (l, rep, None)
        } else {
            let fields = basis.iter().map(|p| load_field(p)).collect::<Result<Vec<_>, _>>()?;
            let est = match lambda {
                Some(l) => estimate_field_coefficients(&f, &fields, l, &samples).context(ctx)?,
                None => estimate_vector_field(&f, &fields, &samples).context(ctx)?,
            };
            (est.lambda, est.report.clone(), Some(est))
        };
    let mut r = residual_table("estimate", n, &report);
    r.set("metric", metric_name(&f));
    put_grid(&mut r, &g, samples.len());
    r.set("lambda", lambda_hat);
    r.set("lambda_fixed", lambda.is_some());
    r.set("lambda_sign", lambda_sign(lambda_hat));
    if let Some(est) = &extra {
        for (k, c) in est.coefficients.iter().enumerate() {
            r.set(&format!("c{}", k + 1), *c);
        }
        for (k, s) in est.singular_values.iter().enumerate() {
            r.set(&format!("singular_value{}", k + 1), *s);
        }
        r.set("null_directions", est.null_directions.len());
        r.set("field", field_text(&est.field));
    }
    put_residuals(&mut r, &report);
    r.set("tol", tol);
    r.set("pass", report.max <= tol);
    Ok(r)
}

struct FlowSetup {
    case: Case,
    family: FlowFamily,
    samples: Vec<Sample>,
    grid: SampleGrid,
    times: Vec<f64>,
    dt: f64,
    steps: usize,
}

fn flow_setup(source: &SolitonSource, opts: &FlowOptions, output: &Output) -> Result<FlowSetup, CliError> {
    let case = resolve_source(source)?;
    let s = &case.flow;
    let tmax = opts.tmax.or(s.tmax).unwrap_or_else(|| default_horizon(case.lambda));
    if !(tmax >= 0.0) || !tmax.is_finite() {
        return Err(CliError::Usage(format!("--tmax must be non-negative, got {tmax}")));
    }
    let count = opts.times.or(s.times).unwrap_or(10);
    if count == 0 {
        return Err(CliError::Usage("--times must be at least 1".into()));
    }
    let dt = positive("dt", opts.dt.or(s.dt), DEFAULT_DT)?;
    let steps = opts.steps.or(s.steps_per_unit).unwrap_or(DEFAULT_STEPS_PER_UNIT);
    if steps == 0 {
        return Err(CliError::Usage("--steps must be at least 1".into()));
    }
    let grid = grid(output, case.grid.as_ref())?;
    let samples = grid.samples(case.metric.dim());
    let triple = SolitonTriple::new(case.metric.clone(), case.field.clone(), case.lambda).context(|| "soliton".into())?;
    let family = FlowFamily::new(triple, steps);
    Ok(FlowSetup { family, samples, grid, times: time_grid(tmax, count), dt, steps, case })
}

fn put_flow(r: &mut Report, fs: &FlowSetup) {
    r.set("metric", metric_name(&fs.case.metric));
    r.set("field", field_text(&fs.case.field));
    r.set("lambda", fs.case.lambda);
    r.set("critical_time", fs.family.critical_time());
    r.set("tmax", fs.times.last().copied().unwrap_or(0.0));
    r.set("times", fs.times.len());
    r.set("steps_per_unit", fs.steps);
    r.set("closed_form", fs.family.closed_form().map(|d| d.name().unwrap_or("symbolic").to_string()));
    put_grid(r, &fs.grid, fs.samples.len());
}

fn flow_build(source: &SolitonSource, opts: &FlowOptions, output: &Output) -> Result<Report, CliError> {
    let fs = flow_setup(source, opts, output)?;
    let n = fs.case.metric.dim();
    let mut cols = sample_columns(n);
    cols.extend(["t", "tau", "F2", "F2_initial", "ratio", "F2_closed"].map(String::from));
    let mut r = Report::new("flow-build", cols);
    put_flow(&mut r, &fs);
    let mut max_drift = 0.0f64;
    for s in &fs.samples {
        let f0 = fs.case.metric.f2_at(s).context(at(s))?;
        for &t in &fs.times {
            let ctx = || format!("at sample {s}, t = {t}");
            let f2 = fs.family.evaluate(s, t).context(ctx)?;
            let closed = fs.family.evaluate_closed_form(s, t).context(ctx)?;
            if let Some(c) = closed {
                max_drift = max_drift.max((c - f2).abs() / c.abs());
            }
            let mut v = sample_values(s);
            v.extend([t.into(), fs.family.tau(t).into(), f2.into(), f0.into(), (f2 / f0).into(), closed.into()]);
            r.push(v);
        }
    }
    r.set("max_closed_form_gap", fs.family.closed_form().map(|_| max_drift));
    r.set("pass", true);
    Ok(r)
}

fn flow_verify(source: &SolitonSource, opts: &FlowOptions, tol: Option<f64>, output: &Output) -> Result<Report, CliError> {
    let fs = flow_setup(source, opts, output)?;
    let tol = positive("tol", tol, FLOW.value)?;
    let n = fs.case.metric.dim();
    let report = fs
        .family
        .flow_residual_grid(&fs.samples, &fs.times, fs.dt)
        .context(|| "flow residuals".to_string())?;
    let mut cols = sample_columns(n);
    cols.extend(
        ["t", "F2", "dlogF", "ric_lemma", "residual_lemma", "ric_closed", "residual_closed", "path_gap"].map(String::from),
    );
    let mut r = Report::new("flow-verify", cols);
    put_flow(&mut r, &fs);
    r.set("dt", fs.dt);
    let mut paths_ok = true;
    for row in &report.rows {
        if let Some(gap) = row.path_gap() {
            paths_ok &= gap <= FLOW_PATHS.value * row.ric_lemma.abs().max(1.0);
        }
        let mut v = sample_values(&row.sample);
        v.extend([
            row.t.into(),
            row.f2.into(),
            row.dlog_f.into(),
            row.ric_lemma.into(),
            row.residual_lemma.into(),
            row.ric_closed.into(),
            row.residual_closed.into(),
            row.path_gap().into(),
        ]);
        r.push(v);
    }
    r.set("max", report.max());
    r.set("max_lemma", report.max_lemma);
    r.set("rms_lemma", report.rms_lemma);
    r.set("max_closed", report.max_closed);
    r.set("max_path_gap", report.max_path_gap);
    r.set("tol", tol);
    r.set("path_tol", FLOW_PATHS.value);
    r.set("pass", report.max() <= tol && paths_ok);
    Ok(r)
}

fn flow_conformal(
    metric: &Path,
    dt: Option<f64>,
    tmax: Option<f64>,
    spread_tol: Option<f64>,
    tol: Option<f64>,
    output: &Output,
) -> Result<Report, CliError> {
    let f = load_metric(metric)?;
    let dt = positive("dt", dt, DEFAULT_DT)?;
    let tmax = tmax.unwrap_or(0.4);
    if !(tmax >= 0.0) || !tmax.is_finite() {
        return Err(CliError::Usage(format!("--tmax must be non-negative, got {tmax}")));
    }
    let spread_tol = positive("spread-tol", spread_tol, EINSTEIN_SPREAD_TOL)?;
    let tol = positive("tol", tol, CONFORMAL.value)?;
    let g = grid(output, None)?;
    let samples = g.samples(f.dim());
    let traj = integrate_conformal_flow(&f, &samples, dt, tmax, spread_tol).context(|| "conformal flow".into())?;
    let mut r = Report::new("flow-conformal", ["t", "c", "c_closed", "error", "spread"].map(String::from).to_vec());
    r.set("metric", metric_name(&f));
    put_grid(&mut r, &g, samples.len());
    r.set("dt", dt);
    r.set("tmax", tmax);
    r.set("ric", traj.ric0);
    let mut err = 0.0f64;
    for (k, (&t, &c)) in traj.times.iter().zip(&traj.c).enumerate() {
        let closed = 1.0 - 2.0 * traj.ric0 * t;
        err = err.max((c - closed).abs());
        r.push(vec![t.into(), c.into(), closed.into(), (c - closed).abs().into(), traj.spread[k].into()]);
    }
    r.set("max_error", err);
    r.set("max_spread", traj.spread.iter().copied().fold(0.0, f64::max));
    r.set("tol", tol);
    r.set("pass", err <= tol);
    Ok(r)
}

fn verify_lemmas(
    suite: Suite,
    metric: Option<&Path>,
    diffeo: Option<&Path>,
    field: Option<&Path>,
    mu: Option<f64>,
    output: &Output,
) -> Result<Report, CliError> {
    let metrics = match metric {
        Some(p) => vec![load_metric(p)?],
        None => lemma_metrics(),
    };
    let diffeos = match diffeo {
        Some(p) => vec![load_diffeo(p)?],
        None => lemma_diffeos(),
    };
    let fields = match field {
        Some(p) => vec![load_field(p)?],
        None => lemma_fields(),
    };
    let mus = match mu {
        Some(m) => vec![positive("mu", Some(m), 1.0)?],
        None => SCALE_FACTORS.to_vec(),
    };
    let g = grid(output, None)?;
    let mut reports: Vec<VerificationReport> = Vec::new();
    fn ctx<'a>(what: &'static str, f: &'a FinslerStructure) -> impl FnOnce() -> String + 'a {
        move || format!("{what} for {}", metric_name(f))
    }
    for f in &metrics {
        let samples = g.samples(f.dim());
        let dims_match = |n: usize| -> Result<(), CliError> {
            if n == f.dim() {
                Ok(())
            } else {
                Err(CliError::Usage(format!("metric has dim {}, got an object of dim {n}", f.dim())))
            }
        };
        if matches!(suite, Suite::Lemmas | Suite::All) {
            for d in &diffeos {
                dims_match(d.dim())?;
                reports.push(verify_lemma1(f, d, &samples).context(ctx("lemma suite", f))?);
                reports.push(verify_lemma2(f, d, &samples).context(ctx("lemma suite", f))?);
                for &m in &mus {
                    reports.push(verify_lemma3(f, m, d, &samples).context(ctx("lemma suite", f))?);
                }
            }
        }
        if matches!(suite, Suite::Invariants | Suite::All) {
            reports.push(verify_invariants(f, &samples).context(ctx("invariants", f))?);
            for &m in &mus {
                let scaled = f.scaled(m).context(ctx("scaling", f))?;
                reports.push(verify_invariants(&scaled, &samples).context(ctx("invariants", f))?);
            }
            let mut checks: Vec<VerificationCheck> = Vec::new();
            for (k, v) in fields.iter().enumerate() {
                dims_match(v.dim())?;
                let mut c = verify_lie_contraction(f, v, &samples).context(ctx("lie contraction", f))?;
                c.name = format!("{} [field {}]", c.name, k + 1);
                checks.push(c);
            }
            reports.push(VerificationReport::new("lie", metric_name(f), checks));
        }
        if matches!(suite, Suite::Oracle | Suite::All) {
            for v in &fields {
                dims_match(v.dim())?;
            }
            reports.push(verify_oracle(f, &fields, &samples).context(ctx("oracle", f))?);
        }
    }
    let cols = ["suite", "case", "check", "max", "rms", "tolerance", "pass", "detail"].map(String::from).to_vec();
    let mut r = Report::new("verify-lemmas", cols);
    r.set("suite", format!("{suite:?}").to_lowercase());
    put_grid(&mut r, &g, g.samples(metrics.first().map_or(2, FinslerStructure::dim)).len());
    let mut checks = 0usize;
    let mut failed = 0usize;
    let mut worst = 0.0f64;
    for rep in &reports {
        for c in &rep.checks {
            checks += 1;
            failed += usize::from(!c.pass);
            if c.tolerance > 0.0 {
                worst = worst.max(c.max / c.tolerance);
            }
            r.push(vec![
                rep.suite.clone().into(),
                rep.case.clone().into(),
                c.name.clone().into(),
                c.max.into(),
                c.rms.into(),
                c.tolerance.into(),
                c.pass.into(),
                c.detail.clone().into(),
            ]);
        }
    }
    r.set("reports", reports.len());
    r.set("checks", checks);
    r.set("failed", failed);
    r.set("worst_ratio_to_tolerance", worst);
    r.set("pass", failed == 0);
    Ok(r)
}

/// Whether the report's `pass` entry is true.
pub fn passed(r: &Report) -> bool {
    matches!(r.get("pass"), Some(Value::Bool(true)))
}
