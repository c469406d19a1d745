//! Scenario files: TOML with expression strings.
//!
//! ```toml
//! name = "sphere with a constant map"
//! catalog = "sphere"            # or an inline [chart] + [metric]
//! params = { r = 1.0 }
//! kappa = 1.0
//!
//! [target]
//! coordinates = ["y"]
//! metric = ["1"]                # lower triangle of h
//!
//! [map]
//! components = ["0.5"]
//!
//! [vector_fields]
//! rot = ["0", "1"]
//!
//! [sampling]
//! random = 50                   # or grid = N points per axis
//! seed = 7
//!
//! [[checks]]
//! name = "einstein_residual_ricci"
//! tolerance = 1e-8
//! ```
//!
//! Inline charts list coordinates as `{ name, lo, hi }`, `{ name, periodic = P, lo = 0 }` or
//! `{ name, polar = true }`; inline metrics give `lower` (row-major lower triangle) and
//! `signature`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;
use wavemap_core::catalog::{self, CatalogEntry};
use wavemap_core::geometry::{Chart, Coordinate, MetricField, VectorField};
use wavemap_core::maps::{SmoothMap, TargetGeometry};
use wavemap_core::Expression;

use crate::checks::{CheckKind, CheckSpec};

/// Tolerance applied to checks that do not set one.
pub const DEFAULT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error("scenario has {} error(s):{}", .0.len(), bullets(.0))]
    Validation(Vec<String>),
}

fn bullets(errors: &[String]) -> String {
    errors.iter().map(|e| format!("\n  - {e}")).collect()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: Option<String>,
    catalog: Option<String>,
    #[serde(default)]
    params: BTreeMap<String, f64>,
    kappa: Option<f64>,
    chart: Option<RawChart>,
    metric: Option<RawMetric>,
    target: Option<RawTarget>,
    map: Option<RawMap>,
    #[serde(default)]
    vector_fields: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    sampling: RawSampling,
    #[serde(default)]
    checks: Vec<RawCheck>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChart {
    coordinates: Vec<RawCoordinate>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoordinate {
    name: String,
    lo: Option<f64>,
    hi: Option<f64>,
    periodic: Option<f64>,
    #[serde(default)]
    polar: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMetric {
    lower: Vec<String>,
    signature: Vec<i8>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTarget {
    coordinates: Vec<String>,
    metric: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMap {
    components: Vec<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSampling {
    grid: Option<usize>,
    random: Option<usize>,
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct RawCheck {
    pub name: String,
    pub label: Option<String>,
    pub tolerance: Option<f64>,
    pub field: Option<String>,
    pub block: Option<Vec<String>>,
    pub t_max: Option<f64>,
    pub frames: Option<usize>,
    pub trials: Option<usize>,
    pub conditions: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    /// Cell-centered grid with this many points per axis.
    Grid(usize),
    /// Uniform points in the box shrunk by 1% per side.
    Random(usize),
}

impl Sampling {
    pub fn points(&self, chart: &Chart, seed: u64) -> wavemap_core::Result<Vec<Vec<f64>>> {
        match *self {
            Sampling::Grid(n) => chart.grid_points(n),
            Sampling::Random(n) => chart.random_points(n, seed),
        }
    }

    pub fn describe(&self, dim: usize) -> String {
        match *self {
            Sampling::Grid(n) => format!("grid {n}^{dim} ({} points)", n.pow(dim as u32)),
            Sampling::Random(n) => format!("random {n} points"),
        }
    }
}

/// A fully validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub metric: MetricField,
    pub map: Option<SmoothMap>,
    pub kappa: Option<f64>,
    pub vector_fields: Vec<(String, VectorField)>,
    pub entry: Option<CatalogEntry>,
    pub sampling: Sampling,
    pub seed: u64,
    pub checks: Vec<CheckSpec>,
}

impl Scenario {
    pub fn vector_field(&self, name: &str) -> Option<&VectorField> {
        self.vector_fields.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }
}

fn line_of(source: &str, offset: usize) -> usize {
    source[..offset.min(source.len())].matches('\n').count() + 1
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let display = path.display().to_string();
    let source = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
        path: display.clone(),
        message: e.to_string(),
    })?;
    let default_name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".into());
    parse_scenario(&source, &display, &default_name)
}

/// Parses and validates scenario text; `origin` names the source in error messages.
pub fn parse_scenario(source: &str, origin: &str, default_name: &str) -> Result<Scenario, ScenarioError> {
    let raw: RawScenario = toml::from_str(source).map_err(|e| ScenarioError::Parse {
        path: origin.to_string(),
        line: e.span().map(|s| line_of(source, s.start)).unwrap_or(1),
        message: e.message().to_string(),
    })?;
    validate(raw, default_name).map_err(ScenarioError::Validation)
}

fn build_chart(raw: &RawChart, errors: &mut Vec<String>) -> Option<Chart> {
    let mut coords = Vec::new();
    for c in &raw.coordinates {
        let coord = if c.polar {
            if c.lo.is_some() || c.hi.is_some() || c.periodic.is_some() {
                errors.push(format!("coordinate `{}`: polar coordinates take no bounds", c.name));
                continue;
            }
            Coordinate::polar(&c.name)
        } else if let Some(period) = c.periodic {
            if c.hi.is_some() {
                errors.push(format!("coordinate `{}`: periodic coordinates take `lo` and `periodic` only", c.name));
                continue;
            }
            Coordinate::periodic(&c.name, c.lo.unwrap_or(0.0), period)
        } else {
            match (c.lo, c.hi) {
                (Some(lo), Some(hi)) => Coordinate::open(&c.name, lo, hi),
                _ => {
                    errors.push(format!("coordinate `{}` needs `lo` and `hi`", c.name));
                    continue;
                }
            }
        };
        coords.push(coord);
    }
    if coords.len() != raw.coordinates.len() {
        return None;
    }
    Chart::new(coords).map_err(|e| errors.push(format!("chart: {e}"))).ok()
}

fn parse_list(chart: &Chart, sources: &[String], what: &str, errors: &mut Vec<String>) -> Option<Vec<Expression>> {
    let mut out = Vec::with_capacity(sources.len());
    let mut ok = true;
    for (k, s) in sources.iter().enumerate() {
        match Expression::parse_shared(s, chart.names()) {
            Ok(e) => out.push(e),
            Err(e) => {
                errors.push(format!("{what}[{k}] = `{s}`: {e}"));
                ok = false;
            }
        }
    }
    ok.then_some(out)
}

fn validate(raw: RawScenario, default_name: &str) -> Result<Scenario, Vec<String>> {
    let mut errors = Vec::new();

    // Source geometry: catalog entry or inline chart + metric.
    let mut entry = None;
    let metric = match (&raw.catalog, &raw.chart, &raw.metric) {
        (Some(name), None, None) => {
            let mut params: Vec<(String, f64)> = raw.params.iter().map(|(k, v)| (k.clone(), *v)).collect();
            let takes_kappa = catalog::ENTRIES
                .iter()
                .any(|e| e.name == name && e.params.iter().any(|(p, _)| *p == "kappa"));
            if let (true, Some(k), false) = (takes_kappa, raw.kappa, raw.params.contains_key("kappa")) {
                params.push(("kappa".into(), k));
            }
            match catalog::build(name, &params) {
                Ok(e) => {
                    let g = e.metric.clone();
                    entry = Some(e);
                    Some(g)
                }
                Err(e) => {
                    errors.push(format!("catalog: {e}"));
                    None
                }
            }
        }
        (Some(_), _, _) => {
            errors.push("give either `catalog` or an inline [chart] and [metric], not both".into());
            None
        }
        (None, Some(chart), Some(metric)) => {
            if !raw.params.is_empty() {
                errors.push("`params` only applies to catalog entries".into());
            }
            build_chart(chart, &mut errors).and_then(|chart| {
                let lower = parse_list(&chart, &metric.lower, "metric.lower", &mut errors)?;
                MetricField::new(chart, lower, metric.signature.clone())
                    .map_err(|e| errors.push(format!("metric: {e}")))
                    .ok()
            })
        }
        (None, _, _) => {
            errors.push("scenario needs `catalog` or both [chart] and [metric]".into());
            None
        }
    };
    let chart = metric.as_ref().map(|g| g.chart().clone());

    // Target and map.
    let target = match &raw.target {
        Some(t) => {
            let names: Vec<&str> = t.coordinates.iter().map(String::as_str).collect();
            let built = Chart::lines(&names).and_then(|c| {
                let exprs = t
                    .metric
                    .iter()
                    .map(|s| Expression::parse_shared(s, c.names()))
                    .collect::<wavemap_core::Result<Vec<_>>>()?;
                TargetGeometry::new(c, exprs)
            });
            built.map_err(|e| errors.push(format!("target: {e}"))).ok()
        }
        None => entry.as_ref().and_then(|e| e.map.as_ref()).map(|m| m.target().clone()),
    };
    let map = match (&raw.map, &chart) {
        (Some(m), Some(chart)) => match &target {
            Some(target) => parse_list(chart, &m.components, "map.components", &mut errors).and_then(|comps| {
                SmoothMap::new(chart.clone(), target.clone(), comps)
                    .map_err(|e| errors.push(format!("map: {e}")))
                    .ok()
            }),
            None => {
                if raw.target.is_none() {
                    errors.push("[map] needs a [target]".into());
                }
                None
            }
        },
        (Some(_), None) => None,
        (None, _) => {
            if raw.target.is_some() && entry.as_ref().map_or(true, |e| e.map.is_none()) {
                errors.push("[target] given without a [map]".into());
            }
            entry.as_ref().and_then(|e| e.map.clone())
        }
    };
    let kappa = raw.kappa.or(entry.as_ref().and_then(|e| e.kappa));
    if kappa == Some(0.0) {
        errors.push("kappa must be nonzero".into());
    }

    // Vector fields: catalog ones first, then the file's in key order.
    let mut vector_fields: Vec<(String, VectorField)> =
        entry.as_ref().map(|e| e.vector_fields.clone()).unwrap_or_default();
    if let Some(chart) = &chart {
        for (name, comps) in &raw.vector_fields {
            let what = format!("vector_fields.{name}");
            if let Some(exprs) = parse_list(chart, comps, &what, &mut errors) {
                match VectorField::new(chart.clone(), exprs) {
                    Ok(v) => {
                        vector_fields.retain(|(n, _)| n != name);
                        vector_fields.push((name.clone(), v));
                    }
                    Err(e) => errors.push(format!("{what}: {e}")),
                }
            }
        }
    }

    let sampling = match (raw.sampling.grid, raw.sampling.random) {
        (Some(_), Some(_)) => {
            errors.push("sampling: give `grid` or `random`, not both".into());
            Sampling::Random(1)
        }
        (Some(0), None) | (None, Some(0)) => {
            errors.push("sampling: point count must be positive".into());
            Sampling::Random(1)
        }
        (Some(n), None) => Sampling::Grid(n),
        (None, Some(n)) => Sampling::Random(n),
        (None, None) => Sampling::Random(20),
    };
    if let (Some(chart), Sampling::Grid(n)) = (&chart, sampling) {
        if (n as f64).powi(chart.dim() as i32) > 1e6 {
            errors.push(format!("sampling: grid {n}^{} exceeds 10^6 points", chart.dim()));
        }
    }

    let mut checks = Vec::new();
    for (k, rc) in raw.checks.iter().enumerate() {
        match CheckKind::from_raw(rc) {
            Ok(kind) => {
                let tolerance = rc.tolerance.unwrap_or(DEFAULT_TOLERANCE);
                if !(tolerance >= 0.0) {
                    errors.push(format!("checks[{k}] `{}`: tolerance must be non-negative", rc.name));
                }
                let spec = CheckSpec {
                    label: rc.label.clone().unwrap_or_else(|| kind.default_label()),
                    kind,
                    tolerance,
                };
                for problem in spec.kind.requirements(
                    map.is_some() || raw.map.is_some(),
                    kappa.is_some(),
                    |n| vector_fields.iter().any(|(v, _)| v == n),
                    chart.as_ref(),
                    entry.as_ref(),
                ) {
                    errors.push(format!("checks[{k}] `{}`: {problem}", rc.name));
                }
                checks.push(spec);
            }
            Err(e) => errors.push(format!("checks[{k}]: {e}")),
        }
    }

    if !errors.is_empty() {
        return Err(errors);
    }
    Ok(Scenario {
        name: raw.name.unwrap_or_else(|| default_name.to_string()),
        metric: metric.expect("no errors implies a metric"),
        map,
        kappa,
        vector_fields,
        entry,
        sampling,
        seed: raw.sampling.seed.unwrap_or(0),
        checks,
    })
}
