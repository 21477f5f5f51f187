//! Experiment configuration: `key = value` lines under `[domain]`,
//! `[problem]` and `[run]` headers. `#` starts a comment.
//!
//! ```text
//! [domain]
//! shape = ball 0 0 0 0.05
//!
//! [problem]
//! R = 1 - x*x
//! S = 0
//! r_bound = 1
//!
//! [run]
//! mode = solve
//! mesh_size = 0.004
//! ```
//!
//! A polytope is written `shape = polytope` followed by bare rows
//! `nx ny nz b`, one per half-space n·x <= b.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use yamabe::expr::Expr;
use yamabe::geometry::{Domain, Halfspace};
use yamabe::iteration::GradientCoefficient;

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Solve,
    Shifted,
    Deform,
    Sweep,
    Certify,
    EstimateGreen,
    Verify,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Solve => "solve",
            Mode::Shifted => "shifted",
            Mode::Deform => "deform",
            Mode::Sweep => "sweep",
            Mode::Certify => "certify",
            Mode::EstimateGreen => "estimate-green",
            Mode::Verify => "verify",
        }
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "solve" => Mode::Solve,
            "shifted" => Mode::Shifted,
            "deform" => Mode::Deform,
            "sweep" => Mode::Sweep,
            "certify" => Mode::Certify,
            "estimate-green" => Mode::EstimateGreen,
            "verify" => Mode::Verify,
            other => return Err(format!("unknown mode `{other}`")),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainLiteral {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    /// Rows (n, b) meaning n·x <= b.
    Polytope {
        rows: Vec<(Vec<f64>, f64)>,
    },
}

impl DomainLiteral {
    pub fn dim(&self) -> usize {
        match self {
            DomainLiteral::Ball { center, .. } => center.len(),
            DomainLiteral::Box { lo, .. } => lo.len(),
            DomainLiteral::Polytope { rows } => rows.first().map_or(0, |r| r.0.len()),
        }
    }

    pub fn build(&self) -> yamabe::Result<Domain> {
        match self {
            DomainLiteral::Ball { center, radius } => Domain::ball(center.clone(), *radius),
            DomainLiteral::Box { lo, hi } => Domain::cuboid(lo.clone(), hi.clone()),
            DomainLiteral::Polytope { rows } => Domain::polytope(
                rows.iter()
                    .map(|(n, b)| Halfspace::new(n.clone(), *b))
                    .collect(),
            ),
        }
    }

    fn render(&self, out: &mut String) {
        let join = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(" ");
        match self {
            DomainLiteral::Ball { center, radius } => {
                let _ = writeln!(out, "shape = ball {} {radius}", join(center));
            }
            DomainLiteral::Box { lo, hi } => {
                let _ = writeln!(out, "shape = box {} {}", join(lo), join(hi));
            }
            DomainLiteral::Polytope { rows } => {
                out.push_str("shape = polytope\n");
                for (n, b) in rows {
                    let _ = writeln!(out, "{} {b}", join(n));
                }
            }
        }
    }
}

/// A parameter that a sweep can vary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Curvature,
    Scale,
    BoundaryValue,
    MeshSize,
}

impl SweepParam {
    pub const ALL: [SweepParam; 4] = [
        SweepParam::Curvature,
        SweepParam::Scale,
        SweepParam::BoundaryValue,
        SweepParam::MeshSize,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Curvature => "curvature",
            SweepParam::Scale => "scale",
            SweepParam::BoundaryValue => "boundary_value",
            SweepParam::MeshSize => "mesh_size",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub domain: DomainLiteral,
    pub dim: usize,
    /// Expression source for R.
    pub r: Option<String>,
    /// Expression source for S.
    pub s: Option<String>,
    pub r_bound: Option<f64>,
    pub s_bound: Option<f64>,
    pub boundary_value: Option<f64>,
    pub curvature: Option<f64>,
    pub scale: Option<f64>,
    pub gradient_coefficient: GradientCoefficient,
    pub mode: Option<Mode>,
    /// Pipeline each sweep row runs.
    pub pipeline: Option<Mode>,
    pub mesh_size: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: Option<u64>,
    pub output_dir: Option<String>,
    pub sweep: Vec<SweepAxis>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    /// 1-based line, when the error can be tied to one.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Section {
    Domain,
    Problem,
    Run,
}

impl Section {
    fn name(self) -> &'static str {
        match self {
            Section::Domain => "domain",
            Section::Problem => "problem",
            Section::Run => "run",
        }
    }

    fn keys(self) -> &'static [&'static str] {
        match self {
            Section::Domain => &["shape", "n"],
            Section::Problem => &[
                "R",
                "S",
                "r_bound",
                "s_bound",
                "boundary_value",
                "curvature",
                "scale",
                "gradient_coefficient",
            ],
            Section::Run => &[
                "mode",
                "pipeline",
                "mesh_size",
                "tol",
                "max_iter",
                "seed",
                "output_dir",
                "sweep.curvature",
                "sweep.scale",
                "sweep.boundary_value",
                "sweep.mesh_size",
            ],
        }
    }
}

/// A value with the line it came from.
#[derive(Clone, Debug)]
struct Entry {
    line: usize,
    value: String,
}

#[derive(Default)]
struct Raw {
    entries: Vec<(Section, String, Entry)>,
    polytope_rows: Vec<(usize, String)>,
    headers: Vec<(Section, usize)>,
}

impl Raw {
    fn get(&self, section: Section, key: &str) -> Option<&Entry> {
        self.entries
            .iter()
            .find(|(s, k, _)| *s == section && k == key)
            .map(|(_, _, e)| e)
    }

    fn header_line(&self, section: Section) -> Option<usize> {
        self.headers
            .iter()
            .find(|(s, _)| *s == section)
            .map(|(_, l)| *l)
    }
}

fn tokenize(text: &str, errors: &mut Vec<ConfigError>) -> Raw {
    let mut raw = Raw::default();
    let mut section: Option<Section> = None;
    for (idx, full) in text.lines().enumerate() {
        let line = idx + 1;
        let content = full.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[').and_then(|c| c.strip_suffix(']')) {
            section = match name.trim() {
                "domain" => Some(Section::Domain),
                "problem" => Some(Section::Problem),
                "run" => Some(Section::Run),
                other => {
                    errors.push(err(line, format!("unknown section [{other}]")));
                    None
                }
            };
            if let Some(s) = section {
                if raw.header_line(s).is_some() {
                    errors.push(err(line, format!("section [{}] repeated", s.name())));
                }
                raw.headers.push((s, line));
            }
            continue;
        }
        let Some(sec) = section else {
            errors.push(err(line, "entry outside any section".into()));
            continue;
        };
        match content.split_once('=') {
            Some((key, value)) => {
                let key = key.trim().to_string();
                if !sec.keys().contains(&key.as_str()) {
                    errors.push(err(
                        line,
                        format!("unknown key `{key}` in [{}]", sec.name()),
                    ));
                    continue;
                }
                if raw.get(sec, &key).is_some() {
                    errors.push(err(line, format!("key `{key}` repeated")));
                    continue;
                }
                let value = value.trim().trim_matches('"').to_string();
                raw.entries.push((sec, key, Entry { line, value }));
            }
            None if sec == Section::Domain => raw.polytope_rows.push((line, content.to_string())),
            None => errors.push(err(
                line,
                format!("expected `key = value`, got `{content}`"),
            )),
        }
    }
    raw
}

fn err(line: usize, message: String) -> ConfigError {
    ConfigError {
        line: Some(line),
        message,
    }
}

fn numbers(text: &str) -> Result<Vec<f64>, String> {
    text.split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("`{t}` is not a finite number"))
        })
        .collect()
}

fn parse_domain(raw: &Raw, errors: &mut Vec<ConfigError>) -> Option<DomainLiteral> {
    let Some(entry) = raw.get(Section::Domain, "shape") else {
        errors.push(ConfigError {
            line: raw.header_line(Section::Domain),
            message: "missing key `shape` in [domain]".into(),
        });
        return None;
    };
    let mut words = entry.value.splitn(2, char::is_whitespace);
    let kind = words.next().unwrap_or("");
    let rest = words.next().unwrap_or("");
    let literal = match kind {
        "ball" => match numbers(rest) {
            Ok(v) if v.len() >= 2 => Some(DomainLiteral::Ball {
                center: v[..v.len() - 1].to_vec(),
                radius: v[v.len() - 1],
            }),
            Ok(_) => {
                errors.push(err(entry.line, "ball needs a center and a radius".into()));
                None
            }
            Err(e) => {
                errors.push(err(entry.line, e));
                None
            }
        },
        "box" => match numbers(rest) {
            Ok(v) if v.len() >= 2 && v.len() % 2 == 0 => {
                let n = v.len() / 2;
                Some(DomainLiteral::Box {
                    lo: v[..n].to_vec(),
                    hi: v[n..].to_vec(),
                })
            }
            Ok(_) => {
                errors.push(err(entry.line, "box needs lower and upper corners".into()));
                None
            }
            Err(e) => {
                errors.push(err(entry.line, e));
                None
            }
        },
        "polytope" => {
            let mut rows = Vec::new();
            for (line, text) in &raw.polytope_rows {
                match numbers(text) {
                    Ok(v) if v.len() >= 2 => rows.push((v[..v.len() - 1].to_vec(), v[v.len() - 1])),
                    Ok(_) => errors.push(err(
                        *line,
                        "polytope row needs a normal and an offset".into(),
                    )),
                    Err(e) => errors.push(err(*line, e)),
                }
            }
            if rows.is_empty() {
                errors.push(err(entry.line, "polytope without rows".into()));
                None
            } else if rows.iter().any(|r| r.0.len() != rows[0].0.len()) {
                errors.push(err(entry.line, "polytope rows differ in length".into()));
                None
            } else {
                Some(DomainLiteral::Polytope { rows })
            }
        }
        other => {
            errors.push(err(entry.line, format!("unknown shape `{other}`")));
            None
        }
    };
    if kind != "polytope" {
        for (line, text) in &raw.polytope_rows {
            errors.push(err(*line, format!("expected `key = value`, got `{text}`")));
        }
    }
    if let Some(lit) = &literal {
        if let Err(e) = lit.build() {
            errors.push(err(entry.line, e.to_string()));
            return None;
        }
    }
    literal
}

fn field<T: FromStr>(
    raw: &Raw,
    section: Section,
    key: &str,
    errors: &mut Vec<ConfigError>,
    check: impl Fn(&T) -> Option<String>,
) -> Option<T> {
    let entry = raw.get(section, key)?;
    match entry.value.parse::<T>() {
        Ok(v) => match check(&v) {
            None => Some(v),
            Some(msg) => {
                errors.push(err(entry.line, format!("`{key}` {msg}")));
                None
            }
        },
        Err(_) => {
            errors.push(err(
                entry.line,
                format!("cannot parse `{key}` from `{}`", entry.value),
            ));
            None
        }
    }
}

fn positive(v: &f64) -> Option<String> {
    (!(v.is_finite() && *v > 0.0)).then(|| "must be positive".to_string())
}

fn nonnegative(v: &f64) -> Option<String> {
    (!(v.is_finite() && *v >= 0.0)).then(|| "must be finite and nonnegative".to_string())
}

fn finite(v: &f64) -> Option<String> {
    (!v.is_finite()).then(|| "must be finite".to_string())
}

/// `a:b:k` for k evenly spaced values from a to b, or a comma list.
fn parse_range(text: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(':').map(str::trim).collect();
    let num = |t: &str| {
        t.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("`{t}` is not a finite number"))
    };
    match parts.len() {
        1 => text.split(',').map(|t| num(t.trim())).collect(),
        3 => {
            let (a, b) = (num(parts[0])?, num(parts[1])?);
            let k: usize = parts[2]
                .parse()
                .map_err(|_| format!("`{}` is not a count", parts[2]))?;
            match k {
                0 => Err("a range needs at least one value".into()),
                1 => Ok(vec![a]),
                _ => Ok((0..k)
                    .map(|i| a + (b - a) * i as f64 / (k - 1) as f64)
                    .collect()),
            }
        }
        _ => Err(format!("cannot read range `{text}`")),
    }
}

fn expression(raw: &Raw, key: &str, dim: usize, errors: &mut Vec<ConfigError>) -> Option<String> {
    let entry = raw.get(Section::Problem, key)?;
    match entry.value.parse::<Expr>() {
        Ok(e) if e.coordinates_used() <= dim => Some(entry.value.clone()),
        Ok(e) => {
            errors.push(err(
                entry.line,
                format!(
                    "`{key}` uses coordinate {} in dimension {dim}",
                    e.coordinates_used()
                ),
            ));
            None
        }
        Err(e) => {
            errors.push(err(entry.line, format!("cannot parse `{key}`: {e}")));
            None
        }
    }
}

/// Parses and validates `text`. When `mode` is given it takes precedence
/// over the file's `mode` key for the required-field check.
pub fn parse_config(text: &str, mode: Option<Mode>) -> Result<ExperimentConfig, ConfigErrors> {
    let mut errors = Vec::new();
    let raw = tokenize(text, &mut errors);
    let domain = parse_domain(&raw, &mut errors);
    let literal_dim = domain.as_ref().map_or(3, DomainLiteral::dim);
    let dim = match field::<usize>(&raw, Section::Domain, "n", &mut errors, |_| None) {
        Some(n) if domain.is_some() && n != literal_dim => {
            errors.push(err(
                raw.get(Section::Domain, "n").map_or(0, |e| e.line),
                format!("`n` = {n} but the shape has dimension {literal_dim}"),
            ));
            literal_dim
        }
        _ => literal_dim,
    };
    let r = expression(&raw, "R", dim, &mut errors);
    let s = expression(&raw, "S", dim, &mut errors);
    let p = Section::Problem;
    let r_bound = field(&raw, p, "r_bound", &mut errors, nonnegative);
    let s_bound = field(&raw, p, "s_bound", &mut errors, nonnegative);
    let boundary_value = field(&raw, p, "boundary_value", &mut errors, finite);
    let curvature = field(&raw, p, "curvature", &mut errors, finite);
    let scale = field(&raw, p, "scale", &mut errors, positive);
    let gradient_coefficient =
        raw.get(p, "gradient_coefficient")
            .map_or(GradientCoefficient::default(), |e| match e.value.as_str() {
                "conformal" => GradientCoefficient::Conformal,
                "unit" => GradientCoefficient::Unit,
                other => {
                    errors.push(err(
                        e.line,
                        format!(
                            "`gradient_coefficient` must be `conformal` or `unit`, got `{other}`"
                        ),
                    ));
                    GradientCoefficient::default()
                }
            });
    let run = Section::Run;
    let file_mode = field::<Mode>(&raw, run, "mode", &mut errors, |_| None);
    let pipeline = field::<Mode>(&raw, run, "pipeline", &mut errors, |m| {
        (!matches!(
            m,
            Mode::Solve | Mode::Shifted | Mode::Deform | Mode::Certify
        ))
        .then(|| "must be solve, shifted, deform or certify".to_string())
    });
    let mesh_size = field(&raw, run, "mesh_size", &mut errors, positive);
    let tol = field(&raw, run, "tol", &mut errors, positive).unwrap_or(DEFAULT_TOL);
    let max_iter = field::<usize>(&raw, run, "max_iter", &mut errors, |v| {
        (*v == 0).then(|| "must be at least 1".to_string())
    })
    .unwrap_or(DEFAULT_MAX_ITER);
    let seed = field::<u64>(&raw, run, "seed", &mut errors, |_| None);
    let output_dir = raw.get(run, "output_dir").map(|e| e.value.clone());
    let mut sweep = Vec::new();
    for param in SweepParam::ALL {
        let key = format!("sweep.{}", param.name());
        if let Some(e) = raw.get(run, &key) {
            match parse_range(&e.value) {
                Ok(values) => sweep.push(SweepAxis { param, values }),
                Err(m) => errors.push(err(e.line, format!("`{key}`: {m}"))),
            }
        }
    }

    let mode_used = mode.or(file_mode).unwrap_or(Mode::Solve);
    let mut required: Vec<(Section, &str)> = Vec::new();
    let swept = |p: SweepParam| sweep.iter().any(|a| a.param == p);
    let require_for = |m: Mode, required: &mut Vec<(Section, &'static str)>| match m {
        Mode::Solve => {
            required.extend([(Section::Problem, "R"), (Section::Problem, "S")]);
            if !swept(SweepParam::MeshSize) {
                required.push((Section::Run, "mesh_size"));
            }
        }
        Mode::Certify => required.extend([(Section::Problem, "R"), (Section::Problem, "S")]),
        Mode::Shifted => {
            if !swept(SweepParam::Curvature) {
                required.push((Section::Problem, "curvature"));
            }
            if !swept(SweepParam::BoundaryValue) {
                required.push((Section::Problem, "boundary_value"));
            }
            if !swept(SweepParam::MeshSize) {
                required.push((Section::Run, "mesh_size"));
            }
        }
        Mode::Deform => {
            if !swept(SweepParam::Curvature) {
                required.push((Section::Problem, "curvature"));
            }
            if !swept(SweepParam::Scale) {
                required.push((Section::Problem, "scale"));
            }
            if !swept(SweepParam::MeshSize) {
                required.push((Section::Run, "mesh_size"));
            }
        }
        Mode::Sweep | Mode::EstimateGreen | Mode::Verify => {}
    };
    require_for(mode_used, &mut required);
    if mode_used == Mode::Sweep {
        match pipeline {
            Some(m) => require_for(m, &mut required),
            None if raw.get(run, "pipeline").is_none() => errors.push(ConfigError {
                line: raw.header_line(run),
                message: "missing key `pipeline` in [run] for mode sweep".into(),
            }),
            None => {}
        }
        if sweep.is_empty() && errors.iter().all(|e| !e.message.contains("sweep.")) {
            errors.push(ConfigError {
                line: raw.header_line(run),
                message: "mode sweep needs at least one `sweep.<parameter>` range".into(),
            });
        }
    }
    for (section, key) in required {
        if raw.get(section, key).is_none() {
            errors.push(ConfigError {
                line: raw.header_line(section),
                message: format!(
                    "missing key `{key}` in [{}] for mode {}",
                    section.name(),
                    mode_used.name()
                ),
            });
        }
    }
    if let (Some(lit), true) = (
        &domain,
        matches!(mode_used, Mode::Deform) || pipeline == Some(Mode::Deform),
    ) {
        if lit.dim() != 3 && !matches!(lit, DomainLiteral::Ball { .. }) {
            errors.push(ConfigError {
                line: raw.get(Section::Domain, "shape").map(|e| e.line),
                message: "only balls are supported in dimension other than 3".into(),
            });
        }
    }

    match domain {
        Some(domain) if errors.is_empty() => Ok(ExperimentConfig {
            domain,
            dim,
            r,
            s,
            r_bound,
            s_bound,
            boundary_value,
            curvature,
            scale,
            gradient_coefficient,
            mode: file_mode,
            pipeline,
            mesh_size,
            tol,
            max_iter,
            seed,
            output_dir,
            sweep,
        }),
        _ => {
            errors.sort_by_key(|e| e.line.unwrap_or(0));
            Err(ConfigErrors(errors))
        }
    }
}

impl ExperimentConfig {
    /// Renders the configuration in the input format. Numbers use the
    /// shortest representation that reads back to the same value.
    pub fn render(&self) -> String {
        let mut out = String::from("[domain]\n");
        self.domain.render(&mut out);
        let _ = writeln!(out, "n = {}", self.dim);
        out.push_str("\n[problem]\n");
        let put = |out: &mut String, key: &str, v: Option<String>| {
            if let Some(v) = v {
                let _ = writeln!(out, "{key} = {v}");
            }
        };
        put(&mut out, "R", self.r.clone());
        put(&mut out, "S", self.s.clone());
        put(&mut out, "r_bound", self.r_bound.map(|v| v.to_string()));
        put(&mut out, "s_bound", self.s_bound.map(|v| v.to_string()));
        put(
            &mut out,
            "boundary_value",
            self.boundary_value.map(|v| v.to_string()),
        );
        put(&mut out, "curvature", self.curvature.map(|v| v.to_string()));
        put(&mut out, "scale", self.scale.map(|v| v.to_string()));
        let coefficient = match self.gradient_coefficient {
            GradientCoefficient::Conformal => "conformal",
            GradientCoefficient::Unit => "unit",
        };
        let _ = writeln!(out, "gradient_coefficient = {coefficient}");
        out.push_str("\n[run]\n");
        put(&mut out, "mode", self.mode.map(|m| m.name().to_string()));
        put(
            &mut out,
            "pipeline",
            self.pipeline.map(|m| m.name().to_string()),
        );
        put(&mut out, "mesh_size", self.mesh_size.map(|v| v.to_string()));
        let _ = writeln!(out, "tol = {}", self.tol);
        let _ = writeln!(out, "max_iter = {}", self.max_iter);
        put(&mut out, "seed", self.seed.map(|v| v.to_string()));
        put(&mut out, "output_dir", self.output_dir.clone());
        for axis in &self.sweep {
            let values: Vec<String> = axis.values.iter().map(f64::to_string).collect();
            let _ = writeln!(out, "sweep.{} = {}", axis.param.name(), values.join(", "));
        }
        out
    }

    pub fn r_expr(&self) -> Option<Expr> {
        self.r.as_deref().and_then(|s| s.parse().ok())
    }

    pub fn s_expr(&self) -> Option<Expr> {
        self.s.as_deref().and_then(|s| s.parse().ok())
    }

    pub fn set(&mut self, param: SweepParam, value: f64) {
        match param {
            SweepParam::Curvature => self.curvature = Some(value),
            SweepParam::Scale => self.scale = Some(value),
            SweepParam::BoundaryValue => self.boundary_value = Some(value),
            SweepParam::MeshSize => self.mesh_size = Some(value),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str =
        "[domain]\nshape = ball 0 0 0 0.05\n[problem]\nR = 1\nS = 0\n[run]\nmesh_size = 0.005\n";

    #[test]
    fn minimal_solve_config() {
        let cfg = parse_config(MINIMAL, Some(Mode::Solve)).unwrap();
        assert_eq!(cfg.dim, 3);
        assert_eq!(cfg.tol, DEFAULT_TOL);
        assert_eq!(cfg.max_iter, DEFAULT_MAX_ITER);
        assert_eq!(cfg.r.as_deref(), Some("1"));
    }

    #[test]
    fn missing_mesh_size_is_named() {
        let text = MINIMAL.replace("mesh_size = 0.005\n", "");
        let e = parse_config(&text, Some(Mode::Solve)).unwrap_err();
        assert_eq!(e.0.len(), 1);
        assert!(e.0[0].message.contains("mesh_size"), "{e}");
        assert_eq!(e.0[0].line, Some(6));
    }

    #[test]
    fn all_errors_are_collected_with_lines() {
        let text = "[domain]\nshape = ball 0 0 0 0.05\nfoo = 1\n[problem]\nR = exp(\nS = 0\n[run]\nmesh_size = -1\n";
        let e = parse_config(text, Some(Mode::Solve)).unwrap_err();
        let lines: Vec<Option<usize>> = e.0.iter().map(|e| e.line).collect();
        assert_eq!(lines, vec![Some(3), Some(5), Some(8)], "{e}");
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_range("0.1, 0.2").unwrap(), vec![0.1, 0.2]);
        assert!(parse_range("1:2").is_err());
    }

    #[test]
    fn polytope_rows_and_round_trip() {
        let text = "[domain]\nshape = polytope\n-1 0 0 0\n0 -1 0 0\n0 0 -1 0\n0.5773502691896258 0.5773502691896258 0.5773502691896258 0.05\n[problem]\nR = 1\nS = 0\n[run]\nmode = sweep\npipeline = solve\nsweep.mesh_size = 0.01:0.02:2\n";
        let cfg = parse_config(text, None).unwrap();
        assert!(matches!(&cfg.domain, DomainLiteral::Polytope { rows } if rows.len() == 4));
        let again = parse_config(&cfg.render(), None).unwrap();
        assert_eq!(cfg, again);
    }
}
