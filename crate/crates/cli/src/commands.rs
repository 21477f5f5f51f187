use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context as _};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use yamabe::analysis::{estimate_ball_green_constant, evans_bound};
use yamabe::expr::Expr;
use yamabe::geometry::{check_admissibility, CertificateReport, Clause, Domain, Regime, OMEGA3};
use yamabe::iteration::{
    constant_curvature_deform, run_iteration, solve_shifted, DeformReport, ProblemSpec, RunOptions,
    Solution, StopReason,
};
use yamabe::poisson::{format_f64, write_csv, ScalarField};
use yamabe::verify::{run_all, CheckResult, VerifyOptions};

use crate::config::{parse_config, ExperimentConfig, Mode, SweepParam};
use crate::json;

pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_CERTIFICATE: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

pub const DEFAULT_OUTPUT_DIR: &str = "yamabe-output";
/// Safety factor on sampled coefficient sups.
pub const BOUND_SAFETY: f64 = 1.05;
/// Probe points per axis in three dimensions; higher dimensions keep the
/// total near 64³.
pub const PROBE_POINTS: usize = 64;

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn new(code: i32, error: impl Into<anyhow::Error>) -> Self {
        Self {
            code,
            error: error.into(),
        }
    }
}

impl From<yamabe::Error> for Failure {
    fn from(e: yamabe::Error) -> Self {
        let code = match e {
            yamabe::Error::CertificateFailed(_) | yamabe::Error::DeformNotAdmissible { .. } => {
                EXIT_CERTIFICATE
            }
            _ => EXIT_CONFIG,
        };
        Failure::new(code, e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::new(EXIT_CONFIG, e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::new(EXIT_CONFIG, e)
    }
}

/// Command-line settings shared by all subcommands.
#[derive(Clone, Debug, Default)]
pub struct Context {
    pub output_dir: Option<PathBuf>,
    pub override_certificate: bool,
    pub seed: Option<u64>,
}

impl Context {
    pub fn output_dir(&self, cfg: Option<&ExperimentConfig>) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| cfg.and_then(|c| c.output_dir.as_ref().map(PathBuf::from)))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
    }
}

/// Reads and validates a config file. `mode` overrides the file's own mode
/// for the required-field check.
pub fn load_config(path: &Path, mode: Option<Mode>) -> Result<ExperimentConfig, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(|e| Failure::new(EXIT_CONFIG, e))?;
    parse_config(&text, mode)
        .map_err(|e| Failure::new(EXIT_CONFIG, anyhow!("{}:\n{e}", path.display())))
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), Failure> {
    fs::write(path, json::to_string(value)?)?;
    Ok(())
}

// ------------------------------------------------------------------ bounds

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolvedBounds {
    pub r_bound: f64,
    pub s_bound: f64,
    pub r_estimated: bool,
    pub s_estimated: bool,
    /// Set when either bound was estimated from samples.
    pub bounds_estimated: bool,
}

/// BOUND_SAFETY × the largest |e| over a probe lattice covering the
/// bounding box, restricted to the closed domain.
pub fn estimate_sup(domain: &Domain, e: &Expr) -> f64 {
    let n = domain.dim();
    let per_axis = if n == 3 {
        PROBE_POINTS
    } else {
        ((PROBE_POINTS.pow(3) as f64).powf(1.0 / n as f64).floor() as usize).max(2)
    };
    let (lo, hi) = domain.bounding_box();
    let total = per_axis.pow(n as u32);
    let sup = (0..total)
        .into_par_iter()
        .map(|mut idx| {
            let mut p = vec![0.0; n];
            for a in (0..n).rev() {
                let i = idx % per_axis;
                idx /= per_axis;
                p[a] = lo[a] + (hi[a] - lo[a]) * i as f64 / (per_axis - 1) as f64;
            }
            if domain.signed_distance(&p) <= 1e-12 {
                e.eval(&p).abs()
            } else {
                0.0
            }
        })
        .reduce(|| 0.0, f64::max);
    BOUND_SAFETY * sup
}

pub fn resolve_bounds(cfg: &ExperimentConfig, domain: &Domain) -> ResolvedBounds {
    let pick = |given: Option<f64>, e: Option<Expr>| match (given, e) {
        (Some(b), _) => (b, false),
        (None, Some(e)) => (estimate_sup(domain, &e), true),
        (None, None) => (0.0, false),
    };
    let (r_bound, r_estimated) = pick(cfg.r_bound, cfg.r_expr());
    let (s_bound, s_estimated) = pick(cfg.s_bound, cfg.s_expr());
    ResolvedBounds {
        r_bound,
        s_bound,
        r_estimated,
        s_estimated,
        bounds_estimated: r_estimated || s_estimated,
    }
}

// ---------------------------------------------------------------- certify

fn build_domain(cfg: &ExperimentConfig) -> Result<Domain, Failure> {
    Ok(cfg.domain.build()?)
}

pub fn certificate_for(
    cfg: &ExperimentConfig,
) -> Result<(CertificateReport, ResolvedBounds), Failure> {
    let domain = build_domain(cfg)?;
    let bounds = resolve_bounds(cfg, &domain);
    let report = match cfg.mode {
        Some(Mode::Shifted) => check_admissibility(&domain, 0.0, bounds.s_bound, Regime::Rescaled)?,
        Some(Mode::Deform) => {
            let d = cfg
                .scale
                .ok_or_else(|| Failure::new(EXIT_CONFIG, anyhow!("missing `scale`")))?;
            let lambda = cfg
                .curvature
                .ok_or_else(|| Failure::new(EXIT_CONFIG, anyhow!("missing `curvature`")))?;
            check_admissibility(&domain.scale(d)?, lambda.abs(), 0.0, Regime::Direct)?
        }
        _ => check_admissibility(&domain, bounds.r_bound, bounds.s_bound, Regime::Direct)?,
    };
    Ok((report, bounds))
}

#[derive(Serialize)]
struct CertifyOutput<'a> {
    bounds: ResolvedBounds,
    certificate: &'a CertificateReport,
}

/// Prints the certificate and writes `certificate.json`.
pub fn certify(cfg: &ExperimentConfig, ctx: &Context) -> Result<CertificateReport, Failure> {
    let (report, bounds) = certificate_for(cfg)?;
    let dir = ctx.output_dir(Some(cfg));
    fs::create_dir_all(&dir)?;
    let out = CertifyOutput {
        bounds,
        certificate: &report,
    };
    let text = json::to_string(&out)?;
    fs::write(dir.join("certificate.json"), &text)?;
    print!("{text}");
    if !report.passed && !ctx.override_certificate {
        return Err(Failure::new(
            EXIT_CERTIFICATE,
            anyhow!("certificate failed: {}", report.describe_failure()),
        ));
    }
    Ok(report)
}

// ------------------------------------------------------------ solve family

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub mode: Mode,
    /// The configuration as run, in the input format.
    pub config: String,
    pub seed: Option<u64>,
    pub bounds: ResolvedBounds,
    pub dim: usize,
    pub nodes: usize,
    pub mesh_size: f64,
    pub certified: bool,
    pub override_certificate: bool,
    pub clause: Clause,
    pub k: Option<f64>,
    pub k_bound: f64,
    pub contraction_q: f64,
    pub iterations: usize,
    pub stop_reason: StopReason,
    pub converged: bool,
    pub residual: f64,
    pub standard_residual: f64,
    pub standard_residual_alternative: f64,
    pub chain_rule_defect: f64,
    pub standard_predicted_bound: f64,
    pub min_u: f64,
    pub max_sup_grad: f64,
    pub gradient_bound: Option<f64>,
    pub gradient_bound_violations: Vec<usize>,
    /// Largest ratio of successive H¹₀ differences from step 2 on.
    pub max_ratio: Option<f64>,
    pub max_poincare_ratio: Option<f64>,
    pub deform: Option<DeformReport>,
}

fn summarize(
    mode: Mode,
    cfg: &ExperimentConfig,
    ctx: &Context,
    bounds: ResolvedBounds,
    sol: &Solution,
    deform: Option<DeformReport>,
) -> RunSummary {
    let grid = sol.f.grid();
    RunSummary {
        mode,
        config: cfg.render(),
        seed: ctx.seed.or(cfg.seed),
        bounds,
        dim: grid.dim(),
        nodes: grid.len(),
        mesh_size: grid.mesh_size(),
        certified: sol.certified,
        override_certificate: ctx.override_certificate,
        clause: sol.certificate.clause,
        k: sol.certificate.k(),
        k_bound: sol.certificate.k_bound,
        contraction_q: sol.contraction_q,
        iterations: sol.trace.steps.len(),
        stop_reason: sol.trace.stop_reason,
        converged: sol.converged,
        residual: sol.residual,
        standard_residual: sol.standard.residual,
        standard_residual_alternative: sol.standard.alternative_residual,
        chain_rule_defect: sol.standard.chain_rule_defect,
        standard_predicted_bound: sol.standard.predicted_bound,
        min_u: sol.min_u,
        max_sup_grad: sol.trace.max_sup_grad(),
        gradient_bound: sol.gradient_bound,
        gradient_bound_violations: sol.gradient_bound_violations.clone(),
        max_ratio: sol.trace.max_ratio_from(2),
        max_poincare_ratio: sol.trace.max_poincare_ratio(),
        deform,
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(format_f64).unwrap_or_default()
}

fn write_trace(sol: &Solution, path: &Path) -> Result<(), Failure> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(
        w,
        "k,sup_grad,diff_h10,ratio,residual,poincare_ratio,solver_iterations"
    )?;
    for s in &sol.trace.steps {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            s.k,
            format_f64(s.sup_grad),
            format_f64(s.diff_h10),
            opt(s.ratio),
            format_f64(s.residual),
            opt(s.poincare_ratio),
            s.solver_iterations
        )?;
    }
    w.flush()?;
    Ok(())
}

fn write_artifacts(
    dir: &Path,
    sol: &Solution,
    summary: &RunSummary,
    pulled: Option<&ScalarField>,
    seconds: f64,
) -> Result<(), Failure> {
    fs::create_dir_all(dir)?;
    write_trace(sol, &dir.join("trace.csv"))?;
    write_csv(&sol.f, &dir.join("solution_f.csv"))?;
    write_csv(&sol.u, &dir.join("solution_u.csv"))?;
    if let Some(p) = pulled {
        write_csv(p, &dir.join("solution_f_pulled_back.csv"))?;
    }
    write_json(&dir.join("certificate.json"), &sol.certificate)?;
    write_json(&dir.join("summary.json"), summary)?;
    // wall time lives apart so the other artifacts are reproducible
    write_json(
        &dir.join("timing.json"),
        &serde_json::json!({ "wall_seconds": seconds }),
    )?;
    Ok(())
}

fn required(v: Option<f64>, key: &str) -> Result<f64, Failure> {
    v.ok_or_else(|| Failure::new(EXIT_CONFIG, anyhow!("missing `{key}`")))
}

/// Runs one solve, shifted or deform pipeline into `dir`. Non-convergence is
/// reported in the summary, not as an error.
pub fn run_pipeline(
    cfg: &ExperimentConfig,
    mode: Mode,
    ctx: &Context,
    dir: &Path,
) -> Result<RunSummary, Failure> {
    let start = Instant::now();
    let domain = build_domain(cfg)?;
    let opts = RunOptions {
        mesh_size: required(cfg.mesh_size, "mesh_size")?,
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        override_certificate: ctx.override_certificate,
    };
    let mut config = cfg.clone();
    config.mode = Some(mode);
    let on_certificate_failure = |e: yamabe::Error| -> Failure {
        if let yamabe::Error::CertificateFailed(report) = &e {
            if fs::create_dir_all(dir).is_ok() {
                let _ = write_json(&dir.join("certificate.json"), report.as_ref());
            }
        }
        e.into()
    };
    let (sol, pulled, deform, bounds) = match mode {
        Mode::Solve => {
            let bounds = resolve_bounds(cfg, &domain);
            let (r, s) = (cfg.r_expr(), cfg.s_expr());
            let spec = ProblemSpec {
                gradient_coefficient: cfg.gradient_coefficient,
                ..ProblemSpec::new(
                    domain,
                    r.ok_or_else(|| Failure::new(EXIT_CONFIG, anyhow!("missing `R`")))?,
                    s.ok_or_else(|| Failure::new(EXIT_CONFIG, anyhow!("missing `S`")))?,
                    bounds.r_bound,
                    bounds.s_bound,
                )
            };
            let sol = run_iteration(&spec, &opts).map_err(on_certificate_failure)?;
            (sol, None, None, bounds)
        }
        Mode::Shifted => {
            let lambda = required(cfg.curvature, "curvature")?;
            let mut shifted_cfg = cfg.clone();
            shifted_cfg.r = None;
            shifted_cfg.r_bound = None;
            let mut bounds = resolve_bounds(&shifted_cfg, &domain);
            bounds.r_bound = lambda.abs();
            let spec = ProblemSpec {
                boundary_value: required(cfg.boundary_value, "boundary_value")?,
                curvature: Some(lambda),
                gradient_coefficient: cfg.gradient_coefficient,
                ..ProblemSpec::new(
                    domain,
                    Expr::constant(lambda),
                    cfg.s_expr().unwrap_or_else(|| Expr::constant(0.0)),
                    lambda.abs(),
                    bounds.s_bound,
                )
            };
            let sol = solve_shifted(&spec, &opts).map_err(on_certificate_failure)?;
            (sol, None, None, bounds)
        }
        Mode::Deform => {
            let lambda = required(cfg.curvature, "curvature")?;
            let d = required(cfg.scale, "scale")?;
            let (sol, pulled, report) =
                constant_curvature_deform(&domain, d, lambda, cfg.gradient_coefficient, &opts)?;
            let bounds = ResolvedBounds {
                r_bound: lambda.abs(),
                s_bound: 0.0,
                r_estimated: false,
                s_estimated: false,
                bounds_estimated: false,
            };
            (sol, Some(pulled), Some(report), bounds)
        }
        other => {
            return Err(Failure::new(
                EXIT_CONFIG,
                anyhow!("mode {} does not run the iteration", other.name()),
            ))
        }
    };
    let summary = summarize(mode, &config, ctx, bounds, &sol, deform);
    write_artifacts(
        dir,
        &sol,
        &summary,
        pulled.as_ref(),
        start.elapsed().as_secs_f64(),
    )?;
    Ok(summary)
}

/// Runs a pipeline subcommand and maps non-convergence to its exit code.
pub fn run_mode(cfg: &ExperimentConfig, mode: Mode, ctx: &Context) -> Result<RunSummary, Failure> {
    let dir = ctx.output_dir(Some(cfg));
    let summary = run_pipeline(cfg, mode, ctx, &dir)?;
    println!(
        "{} on {} nodes: certified={} clause={} iterations={} stop={:?} residual={} min_u={}",
        mode.name(),
        summary.nodes,
        summary.certified,
        summary.clause,
        summary.iterations,
        summary.stop_reason,
        format_f64(summary.residual),
        format_f64(summary.min_u),
    );
    if let Some(d) = &summary.deform {
        println!(
            "pulled back to the base domain: curvature d²λ = {} (residual {}); at λ/d² = {} the residual is {}",
            format_f64(d.pulled_back_curvature),
            format_f64(d.pulled_back_residual),
            format_f64(d.inverse_scaled_curvature),
            format_f64(d.inverse_scaled_residual),
        );
    }
    println!("artifacts in {}", dir.display());
    if !summary.converged {
        return Err(Failure::new(
            EXIT_NOT_CONVERGED,
            anyhow!(
                "iteration stopped without converging: {:?}",
                summary.stop_reason
            ),
        ));
    }
    Ok(summary)
}

// ------------------------------------------------------------------ sweep

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub row: usize,
    pub params: Vec<(SweepParam, f64)>,
    /// `ok`, or the error that stopped the row.
    pub status: String,
    pub certified: Option<bool>,
    pub converged: Option<bool>,
    pub iterations: Option<usize>,
    pub residual: Option<f64>,
    pub k: Option<f64>,
    pub q: Option<f64>,
    pub max_ratio: Option<f64>,
}

pub fn sweep_grid(cfg: &ExperimentConfig) -> Vec<Vec<(SweepParam, f64)>> {
    let mut rows = vec![Vec::new()];
    for axis in &cfg.sweep {
        rows = rows
            .into_iter()
            .flat_map(|row| {
                axis.values.iter().map(move |&v| {
                    let mut r = row.clone();
                    r.push((axis.param, v));
                    r
                })
            })
            .collect();
    }
    rows
}

fn sweep_row(
    cfg: &ExperimentConfig,
    pipeline: Mode,
    ctx: &Context,
    dir: &Path,
    row: usize,
    params: Vec<(SweepParam, f64)>,
) -> SweepRow {
    let mut c = cfg.clone();
    c.mode = Some(pipeline);
    c.sweep.clear();
    for &(p, v) in &params {
        c.set(p, v);
    }
    let mut out = SweepRow {
        row,
        params,
        status: "ok".into(),
        certified: None,
        converged: None,
        iterations: None,
        residual: None,
        k: None,
        q: None,
        max_ratio: None,
    };
    let row_dir = dir.join(format!("row_{row:04}"));
    if pipeline == Mode::Certify {
        match certificate_for(&c) {
            Ok((report, _)) => {
                out.certified = Some(report.passed);
                out.k = report.k();
                out.q = Some(report.contraction_q_at_k.unwrap_or(report.contraction_q));
                if fs::create_dir_all(&row_dir).is_ok() {
                    let _ = write_json(&row_dir.join("certificate.json"), &report);
                }
            }
            Err(f) => out.status = f.error.to_string(),
        }
        return out;
    }
    match run_pipeline(&c, pipeline, ctx, &row_dir) {
        Ok(s) => {
            out.certified = Some(s.certified);
            out.converged = Some(s.converged);
            out.iterations = Some(s.iterations);
            out.residual = Some(s.residual);
            out.k = s.k;
            out.q = Some(s.contraction_q);
            out.max_ratio = s.max_ratio;
        }
        Err(f) => {
            out.status = f.error.to_string();
            if f.code == EXIT_CERTIFICATE {
                out.certified = Some(false);
            }
        }
    }
    out
}

/// Runs every point of the Cartesian product in parallel, each into its
/// own `row_NNNN` directory, and writes `sweep.csv` in row order.
pub fn sweep(cfg: &ExperimentConfig, ctx: &Context) -> Result<Vec<SweepRow>, Failure> {
    let pipeline = cfg
        .pipeline
        .ok_or_else(|| Failure::new(EXIT_CONFIG, anyhow!("missing `pipeline`")))?;
    let dir = ctx.output_dir(Some(cfg));
    fs::create_dir_all(&dir)?;
    let grid = sweep_grid(cfg);
    let rows: Vec<SweepRow> = grid
        .into_par_iter()
        .enumerate()
        .map(|(i, params)| sweep_row(cfg, pipeline, ctx, &dir, i, params))
        .collect();
    let mut w = BufWriter::new(fs::File::create(dir.join("sweep.csv"))?);
    let mut header = vec!["row".to_string()];
    header.extend(cfg.sweep.iter().map(|a| a.param.name().to_string()));
    header.extend(
        [
            "status",
            "certified",
            "converged",
            "iterations",
            "residual",
            "k",
            "q",
            "max_ratio",
        ]
        .map(String::from),
    );
    writeln!(w, "{}", header.join(","))?;
    let flag = |b: Option<bool>| b.map(|b| b.to_string()).unwrap_or_default();
    for r in &rows {
        let mut cells = vec![r.row.to_string()];
        cells.extend(r.params.iter().map(|(_, v)| format_f64(*v)));
        cells.push(format!("\"{}\"", r.status.replace('"', "'")));
        cells.push(flag(r.certified));
        cells.push(flag(r.converged));
        cells.push(r.iterations.map(|i| i.to_string()).unwrap_or_default());
        cells.push(opt(r.residual));
        cells.push(opt(r.k));
        cells.push(opt(r.q));
        cells.push(opt(r.max_ratio));
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()?;
    let ok = rows.iter().filter(|r| r.status == "ok").count();
    println!(
        "{} rows ({ok} ran, {} stopped early); results in {}",
        rows.len(),
        rows.len() - ok,
        dir.join("sweep.csv").display()
    );
    Ok(rows)
}

// --------------------------------------------------------- estimate-green

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreenSummary {
    pub n: usize,
    #[serde(rename = "Cn")]
    pub cn: f64,
    pub argmax: f64,
    pub evans_bound: Option<f64>,
    pub within_evans_bound: Option<bool>,
    pub tolerance: f64,
}

/// Scans the ball gradient integral, writes `green_scan.csv` and
/// `green.json`, and fails when C₃ exceeds the Evans bound.
pub fn estimate_green(dim: usize, tol: f64, ctx: &Context) -> Result<GreenSummary, Failure> {
    let est = estimate_ball_green_constant(dim, tol)?;
    let dir = ctx.output_dir(None);
    fs::create_dir_all(&dir)?;
    let mut w = BufWriter::new(fs::File::create(dir.join("green_scan.csv"))?);
    writeln!(w, "radius,value,error")?;
    for s in &est.samples {
        writeln!(
            w,
            "{},{},{}",
            format_f64(s.radius),
            format_f64(s.value),
            format_f64(s.error)
        )?;
    }
    w.flush()?;
    let evans = (dim == 3).then(|| evans_bound(OMEGA3));
    let summary = GreenSummary {
        n: dim,
        cn: est.constant,
        argmax: est.argmax,
        evans_bound: evans,
        within_evans_bound: evans.map(|b| est.constant <= b),
        tolerance: tol,
    };
    write_json(&dir.join("green.json"), &summary)?;
    print!("{}", json::to_string(&summary)?);
    if summary.within_evans_bound == Some(false) {
        return Err(Failure::new(
            EXIT_VERIFY,
            anyhow!("C_3 exceeds the Evans bound"),
        ));
    }
    Ok(summary)
}

// ----------------------------------------------------------------- verify

/// Runs every check, printing one line each. Fails with EXIT_VERIFY if any
/// check fails.
pub fn verify(opts: &VerifyOptions, ctx: &Context) -> Result<Vec<CheckResult>, Failure> {
    let start = Instant::now();
    let results = run_all(opts);
    for r in &results {
        println!("{}", r.line());
    }
    let failed: Vec<&str> = results
        .iter()
        .filter(|r| !r.passed)
        .map(|r| r.id.as_str())
        .collect();
    println!(
        "{}/{} checks passed in {:.1}s",
        results.len() - failed.len(),
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if let Some(dir) = &ctx.output_dir {
        fs::create_dir_all(dir)?;
        write_json(&dir.join("verify.json"), &results)?;
    }
    if failed.is_empty() {
        Ok(results)
    } else {
        Err(Failure::new(
            EXIT_VERIFY,
            anyhow!("failed checks: {}", failed.join(", ")),
        ))
    }
}
