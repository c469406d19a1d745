//! Named checks and the sampling runner.
//!
//! Every pointwise check maps a sample point to a residual or to a skip reason. The suite is
//! reduced in point order, so the worst point is the first one attaining the maximum and the
//! result does not depend on thread scheduling.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use wavemap_core::catalog::{bel_form_identities, warped_decomposition_residual, CatalogEntry};
use wavemap_core::conditions::{
    classical_energy_conditions, energy_split, fuzz_energy_conditions, null_energy_split,
    observer_from_velocity, radiation_conditions, vector_field_certificates, NullFrame, StressPoint,
};
use wavemap_core::einstein::{
    conservation_orthogonality, degeneracy_check, einstein_residual_full, einstein_residual_ricci,
    flow_invariance_check, leafwise_constancy, rank_report, ricci_gradient_identity_residual,
    totally_geodesic_check, trace_relation_residual, CouplingContext,
};
use wavemap_core::geometry::{einstein_divergence, Chart, LocalGeometry};
use wavemap_core::maps::{MapPoint, RANK_TOLERANCE};
use wavemap_core::{Error, Result as CoreResult};

use crate::scenario::{RawCheck, Scenario};

const RADIATION: [&str; 9] = [
    "lich1",
    "lich2",
    "bel1",
    "bel2",
    "bel3",
    "ricci_rad1",
    "ricci_rad2",
    "einstein_rad1",
    "einstein_rad2",
];
const CERTIFICATES: [&str; 4] = ["killing", "hypersurface_orthogonal", "covariantly_constant", "lightlike"];

#[derive(Debug, Clone, PartialEq)]
pub enum CheckKind {
    EinsteinRicci,
    EinsteinFull,
    TraceRelation,
    RicciGradientIdentity,
    ConservationOrthogonality,
    DivergenceT,
    StressDivergenceIdentity,
    Tension,
    Degeneracy { field: String },
    RankEquality,
    TotallyGeodesic,
    Leafwise { block: Vec<String> },
    FlowInvariance { field: String, t_max: f64 },
    Radiation { field: String, conditions: Vec<String> },
    Certificates { field: String, conditions: Vec<String> },
    EnergyConditions { frames: usize },
    NullEnergy { frames: usize },
    EnergyFuzz { trials: usize },
    BelIdentities,
    WarpedDecomposition,
    CatalogFacts,
    Bianchi,
    RiemannSymmetries,
    Flat,
    Signature,
}

/// A check as declared in a scenario, after validation.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckSpec {
    pub label: String,
    pub kind: CheckKind,
    pub tolerance: f64,
}

fn pick(requested: &Option<Vec<String>>, allowed: &[&str], what: &str) -> Result<Vec<String>, String> {
    match requested {
        None => Ok(allowed.iter().map(|s| s.to_string()).collect()),
        Some(list) if list.is_empty() => Err(format!("`conditions` must name at least one {what}")),
        Some(list) => {
            for c in list {
                if !allowed.contains(&c.as_str()) {
                    return Err(format!("unknown {what} `{c}` (expected one of {})", allowed.join(", ")));
                }
            }
            Ok(list.clone())
        }
    }
}

impl CheckKind {
    pub(crate) fn from_raw(rc: &RawCheck) -> Result<CheckKind, String> {
        let field = || {
            rc.field
                .clone()
                .ok_or_else(|| format!("`{}` needs `field`", rc.name))
        };
        let kind = match rc.name.as_str() {
            "einstein_residual" | "einstein_residual_ricci" => CheckKind::EinsteinRicci,
            "einstein_residual_full" => CheckKind::EinsteinFull,
            "trace_relation" => CheckKind::TraceRelation,
            "ricci_gradient_identity" => CheckKind::RicciGradientIdentity,
            "conservation_orthogonality" => CheckKind::ConservationOrthogonality,
            "divergence_T" => CheckKind::DivergenceT,
            "stress_divergence_identity" => CheckKind::StressDivergenceIdentity,
            "tension" => CheckKind::Tension,
            "degeneracy" => CheckKind::Degeneracy { field: field()? },
            "rank_equality" => CheckKind::RankEquality,
            "totally_geodesic" => CheckKind::TotallyGeodesic,
            "leafwise" => CheckKind::Leafwise {
                block: rc.block.clone().ok_or("`leafwise` needs `block`")?,
            },
            "flow_invariance" => CheckKind::FlowInvariance {
                field: field()?,
                t_max: rc.t_max.unwrap_or(1.0),
            },
            "radiation" => CheckKind::Radiation {
                field: field()?,
                conditions: pick(&rc.conditions, &RADIATION, "radiation condition")?,
            },
            "certificates" => CheckKind::Certificates {
                field: field()?,
                conditions: pick(&rc.conditions, &CERTIFICATES, "certificate")?,
            },
            "energy_conditions" => CheckKind::EnergyConditions {
                frames: rc.frames.unwrap_or(8),
            },
            "null_energy" => CheckKind::NullEnergy {
                frames: rc.frames.unwrap_or(8),
            },
            "energy_fuzz" => CheckKind::EnergyFuzz {
                trials: rc.trials.unwrap_or(10_000),
            },
            "bel_identities" => CheckKind::BelIdentities,
            "warped_decomposition" => CheckKind::WarpedDecomposition,
            "catalog_facts" => CheckKind::CatalogFacts,
            "bianchi" => CheckKind::Bianchi,
            "riemann_symmetries" => CheckKind::RiemannSymmetries,
            "flat" => CheckKind::Flat,
            "signature" => CheckKind::Signature,
            other => return Err(format!("unknown check `{other}`")),
        };
        // Parameters that the chosen check ignores are rejected rather than dropped.
        let mut stray = Vec::new();
        let takes = |p: &str| match (&kind, p) {
            (CheckKind::Degeneracy { .. }, "field")
            | (CheckKind::FlowInvariance { .. }, "field" | "t_max")
            | (CheckKind::Radiation { .. }, "field" | "conditions")
            | (CheckKind::Certificates { .. }, "field" | "conditions")
            | (CheckKind::Leafwise { .. }, "block")
            | (CheckKind::EnergyConditions { .. } | CheckKind::NullEnergy { .. }, "frames")
            | (CheckKind::EnergyFuzz { .. }, "trials") => true,
            _ => false,
        };
        for (p, set) in [
            ("field", rc.field.is_some()),
            ("block", rc.block.is_some()),
            ("t_max", rc.t_max.is_some()),
            ("frames", rc.frames.is_some()),
            ("trials", rc.trials.is_some()),
            ("conditions", rc.conditions.is_some()),
        ] {
            if set && !takes(p) {
                stray.push(p);
            }
        }
        if !stray.is_empty() {
            return Err(format!("`{}` does not take {}", rc.name, stray.join(", ")));
        }
        match &kind {
            CheckKind::FlowInvariance { t_max, .. } if !(t_max.is_finite() && *t_max > 0.0) => {
                Err("`t_max` must be positive".into())
            }
            CheckKind::EnergyConditions { frames: 0 } | CheckKind::NullEnergy { frames: 0 } => {
                Err("`frames` must be positive".into())
            }
            CheckKind::EnergyFuzz { trials: 0 } => Err("`trials` must be positive".into()),
            _ => Ok(kind),
        }
    }

    /// Report name: the canonical check name plus its main parameter.
    pub fn default_label(&self) -> String {
        match self {
            CheckKind::EinsteinRicci => "einstein_residual_ricci".into(),
            CheckKind::EinsteinFull => "einstein_residual_full".into(),
            CheckKind::TraceRelation => "trace_relation".into(),
            CheckKind::RicciGradientIdentity => "ricci_gradient_identity".into(),
            CheckKind::ConservationOrthogonality => "conservation_orthogonality".into(),
            CheckKind::DivergenceT => "divergence_T".into(),
            CheckKind::StressDivergenceIdentity => "stress_divergence_identity".into(),
            CheckKind::Tension => "tension".into(),
            CheckKind::Degeneracy { field } => format!("degeneracy({field})"),
            CheckKind::RankEquality => "rank_equality".into(),
            CheckKind::TotallyGeodesic => "totally_geodesic".into(),
            CheckKind::Leafwise { block } => format!("leafwise({})", block.join(",")),
            CheckKind::FlowInvariance { field, .. } => format!("flow_invariance({field})"),
            CheckKind::Radiation { field, .. } => format!("radiation({field})"),
            CheckKind::Certificates { field, .. } => format!("certificates({field})"),
            CheckKind::EnergyConditions { .. } => "energy_conditions".into(),
            CheckKind::NullEnergy { .. } => "null_energy".into(),
            CheckKind::EnergyFuzz { .. } => "energy_fuzz".into(),
            CheckKind::BelIdentities => "bel_identities".into(),
            CheckKind::WarpedDecomposition => "warped_decomposition".into(),
            CheckKind::CatalogFacts => "catalog_facts".into(),
            CheckKind::Bianchi => "bianchi".into(),
            CheckKind::RiemannSymmetries => "riemann_symmetries".into(),
            CheckKind::Flat => "flat".into(),
            CheckKind::Signature => "signature".into(),
        }
    }

    fn needs_coupling(&self) -> bool {
        matches!(
            self,
            CheckKind::EinsteinRicci
                | CheckKind::EinsteinFull
                | CheckKind::TraceRelation
                | CheckKind::RicciGradientIdentity
                | CheckKind::ConservationOrthogonality
                | CheckKind::Degeneracy { .. }
                | CheckKind::RankEquality
                | CheckKind::TotallyGeodesic
                | CheckKind::Leafwise { .. }
                | CheckKind::FlowInvariance { .. }
        )
    }

    fn needs_map(&self) -> bool {
        self.needs_coupling()
            || matches!(
                self,
                CheckKind::DivergenceT
                    | CheckKind::StressDivergenceIdentity
                    | CheckKind::Tension
                    | CheckKind::EnergyConditions { .. }
                    | CheckKind::NullEnergy { .. }
            )
    }

    fn field(&self) -> Option<&str> {
        match self {
            CheckKind::Degeneracy { field }
            | CheckKind::FlowInvariance { field, .. }
            | CheckKind::Radiation { field, .. }
            | CheckKind::Certificates { field, .. } => Some(field),
            _ => None,
        }
    }

    /// Problems that make the check impossible to run on this scenario.
    pub(crate) fn requirements(
        &self,
        has_map: bool,
        has_kappa: bool,
        has_field: impl Fn(&str) -> bool,
        chart: Option<&Chart>,
        entry: Option<&CatalogEntry>,
    ) -> Vec<String> {
        let mut out = Vec::new();
        if self.needs_map() && !has_map {
            out.push("needs a [map]".to_string());
        }
        if self.needs_coupling() && !has_kappa {
            out.push("needs `kappa`".to_string());
        }
        if let Some(f) = self.field() {
            if !has_field(f) {
                out.push(format!("unknown vector field `{f}`"));
            }
        }
        if let (CheckKind::Leafwise { block }, Some(chart)) = (self, chart) {
            if block.is_empty() {
                out.push("`block` is empty".into());
            }
            for name in block {
                if chart.index_of(name).is_none() {
                    out.push(format!("`block` names unknown coordinate `{name}`"));
                }
            }
        }
        let entry_needed = match self {
            CheckKind::BelIdentities => Some(entry.map_or(false, |e| e.form.is_some())),
            CheckKind::WarpedDecomposition => Some(entry.map_or(false, |e| e.warped.is_some())),
            CheckKind::CatalogFacts => Some(entry.is_some()),
            _ => None,
        };
        if entry_needed == Some(false) {
            out.push(match self {
                CheckKind::BelIdentities => "needs a pp-wave catalog entry".into(),
                CheckKind::WarpedDecomposition => "needs a warped-product catalog entry".into(),
                _ => "needs a catalog entry".into(),
            });
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
        }
    }
}

/// Outcome of one check. `status == Pass` exactly when `max_residual <= tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub max_residual: Option<f64>,
    pub tolerance: f64,
    pub worst_point: Option<Vec<f64>>,
    pub samples: usize,
    #[serde(skip)]
    pub wall_time: Duration,
}

/// What one sample point contributed.
enum PointOutcome {
    Residual(f64),
    /// Hypothesis of the check unmet here.
    Skip(String),
}

/// Overrides from the command line.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
}

/// Seed actually used for a run.
pub fn effective_seed(s: &Scenario, opts: &RunOptions) -> u64 {
    opts.seed.unwrap_or(s.seed)
}

/// Runs every check of `s` in declaration order.
pub fn run_checks(s: &Scenario, opts: &RunOptions) -> Vec<CheckReport> {
    let seed = effective_seed(s, opts);
    let points = s.sampling.points(s.metric.chart(), seed);
    s.checks
        .iter()
        .map(|spec| {
            let tol = opts.tolerance.unwrap_or(spec.tolerance);
            let start = Instant::now();
            let mut report = match &points {
                Ok(points) => run_one(s, spec, tol, points, seed),
                Err(e) => failed(spec, tol, 0, e.to_string()),
            };
            report.wall_time = start.elapsed();
            report
        })
        .collect()
}

fn failed(spec: &CheckSpec, tol: f64, samples: usize, reason: String) -> CheckReport {
    CheckReport {
        name: spec.label.clone(),
        status: Status::Fail,
        reason: Some(reason),
        max_residual: None,
        tolerance: tol,
        worst_point: None,
        samples,
        wall_time: Duration::ZERO,
    }
}

fn run_one(s: &Scenario, spec: &CheckSpec, tol: f64, points: &[Vec<f64>], seed: u64) -> CheckReport {
    if let CheckKind::EnergyFuzz { trials } = spec.kind {
        return match fuzz_energy_conditions(seed, trials) {
            Ok(f) => {
                let worst = [
                    f.lower,
                    f.upper,
                    f.dominant,
                    f.strong,
                    f.null_t_ll,
                    f.null_t_ln,
                    f.null_lower,
                    f.null_upper,
                ]
                .into_iter()
                .fold(0.0f64, |acc, margin| acc.max(-margin));
                finish(spec, tol, trials, worst, None, None)
            }
            Err(e) => failed(spec, tol, trials, e.to_string()),
        };
    }

    let ctx = if spec.kind.needs_coupling() {
        match coupling(s) {
            Ok(c) => Some(c),
            Err(e) => return failed(spec, tol, points.len(), e.to_string()),
        }
    } else {
        None
    };

    let outcomes: Vec<CoreResult<PointOutcome>> = points
        .par_iter()
        .enumerate()
        .map(|(k, p)| evaluate(s, &spec.kind, ctx.as_ref(), tol, p, seed, k))
        .collect();

    let mut worst = 0.0f64;
    let mut worst_point = None;
    for (p, outcome) in points.iter().zip(outcomes) {
        match outcome {
            Ok(PointOutcome::Residual(r)) => {
                // NaN compares false: keep it as the worst so it cannot pass.
                if worst_point.is_none() || r > worst || r.is_nan() && !worst.is_nan() {
                    worst = r;
                    worst_point = Some(p.clone());
                }
            }
            Ok(PointOutcome::Skip(reason)) => {
                let mut r = skipped(spec, tol, points.len(), format!("hypothesis unmet at {p:?}: {reason}"));
                r.worst_point = Some(p.clone());
                return r;
            }
            Err(Error::DimensionTooSmall { m, required }) => {
                return skipped(spec, tol, points.len(), format!("dimension too small: m = {m}, need m >= {required}"));
            }
            Err(e) => {
                let mut r = failed(spec, tol, points.len(), format!("at {p:?}: {e}"));
                r.worst_point = Some(p.clone());
                return r;
            }
        }
    }
    let note = match spec.kind {
        CheckKind::EnergyConditions { .. } if s.metric.dim() == 2 => {
            Some("m = 2: strong condition evaluated literally as 0 >= tr T".to_string())
        }
        _ => None,
    };
    finish(spec, tol, points.len(), worst, worst_point, note)
}

fn finish(spec: &CheckSpec, tol: f64, samples: usize, worst: f64, point: Option<Vec<f64>>, note: Option<String>) -> CheckReport {
    // -0.0 would render as "-0.000e0"
    let worst = if worst == 0.0 { 0.0 } else { worst };
    let pass = worst <= tol;
    CheckReport {
        name: spec.label.clone(),
        status: if pass { Status::Pass } else { Status::Fail },
        reason: if pass {
            note
        } else {
            Some(note.map_or_else(|| "residual above tolerance".to_string(), |n| format!("residual above tolerance; {n}")))
        },
        max_residual: Some(worst),
        tolerance: tol,
        worst_point: point,
        samples,
        wall_time: Duration::ZERO,
    }
}

fn skipped(spec: &CheckSpec, tol: f64, samples: usize, reason: String) -> CheckReport {
    CheckReport {
        status: Status::Skipped,
        ..failed(spec, tol, samples, reason)
    }
}

fn coupling(s: &Scenario) -> CoreResult<CouplingContext> {
    match (&s.map, s.kappa) {
        (Some(map), Some(kappa)) => CouplingContext::new(kappa, s.metric.clone(), map.clone()),
        _ => Err(Error::Invalid("scenario has no map and coupling constant".into())),
    }
}

fn map_point(s: &Scenario, p: &[f64], order: usize) -> CoreResult<MapPoint> {
    let map = s.map.as_ref().ok_or_else(|| Error::Invalid("scenario has no map".into()))?;
    MapPoint::at(map, &s.metric, p, order)
}

fn field<'a>(s: &'a Scenario, name: &str) -> CoreResult<&'a wavemap_core::VectorField> {
    s.vector_field(name)
        .ok_or_else(|| Error::Invalid(format!("unknown vector field `{name}`")))
}

fn entry(s: &Scenario) -> CoreResult<&CatalogEntry> {
    s.entry
        .as_ref()
        .ok_or_else(|| Error::Invalid("scenario has no catalog entry".into()))
}

/// Observer velocities for point `k`, a pure function of the run seed and `k`.
fn velocities(seed: u64, k: usize, frames: usize, m: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (k as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    (0..frames)
        .map(|f| {
            if f == 0 {
                // the rest observer is always included
                return vec![0.0; m - 1];
            }
            let mut beta: Vec<f64> = (0..m - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm = beta.iter().map(|b| b * b).sum::<f64>().sqrt();
            let speed = 0.95 * rng.gen_range(0.0..1.0f64);
            if norm > 0.0 {
                beta.iter_mut().for_each(|b| *b *= speed / norm);
            }
            beta
        })
        .collect()
}

fn stress_and_frames(
    s: &Scenario,
    p: &[f64],
    frames: usize,
    seed: u64,
    k: usize,
) -> CoreResult<Result<(StressPoint, Vec<wavemap_core::conditions::ObserverFrame>), String>> {
    let mp = map_point(s, p, 1)?;
    let g = mp.geo.metric();
    let m = s.metric.dim();
    let mut obs = Vec::with_capacity(frames);
    for beta in velocities(seed, k, frames, m) {
        match observer_from_velocity(&g, &beta) {
            Ok(f) => obs.push(f),
            Err(Error::Invalid(reason)) => return Ok(Err(reason)),
            Err(e) => return Err(e),
        }
    }
    Ok(Ok((StressPoint::new(&g, &mp.jet.pullback())?, obs)))
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0f64, f64::max)
}

fn evaluate(
    s: &Scenario,
    kind: &CheckKind,
    ctx: Option<&CouplingContext>,
    tol: f64,
    p: &[f64],
    seed: u64,
    k: usize,
) -> CoreResult<PointOutcome> {
    use PointOutcome::{Residual, Skip};
    let ctx = || ctx.expect("coupling checked before sampling");
    Ok(match kind {
        CheckKind::EinsteinRicci => Residual(einstein_residual_ricci(ctx(), p)?.max_abs()),
        CheckKind::EinsteinFull => Residual(einstein_residual_full(ctx(), p)?.max_abs()),
        CheckKind::TraceRelation => Residual(trace_relation_residual(ctx(), p)?.abs()),
        CheckKind::RicciGradientIdentity => Residual(ricci_gradient_identity_residual(ctx(), p)?.max_abs()),
        CheckKind::ConservationOrthogonality => Residual(conservation_orthogonality(ctx(), p)?.max_abs()),
        CheckKind::DivergenceT => {
            let mp = map_point(s, p, 2)?;
            Residual(mp.jet.stress_divergence(&mp.geo).0.max_abs())
        }
        CheckKind::StressDivergenceIdentity => {
            let mp = map_point(s, p, 2)?;
            let (lhs, rhs) = mp.jet.stress_divergence(&mp.geo);
            Residual(lhs.sub(&rhs)?.max_abs())
        }
        CheckKind::Tension => {
            let mp = map_point(s, p, 2)?;
            Residual(mp.jet.tension(&mp.geo).max_abs())
        }
        CheckKind::Degeneracy { field: v } => Residual(degeneracy_check(ctx(), field(s, v)?, p)?.max_abs()),
        CheckKind::RankEquality => {
            let r = rank_report(ctx(), p, RANK_TOLERANCE)?;
            Residual(r.differential.abs_diff(r.pullback).max(r.ricci.abs_diff(r.differential)) as f64)
        }
        CheckKind::TotallyGeodesic => {
            let t = totally_geodesic_check(ctx(), p, RANK_TOLERANCE)?;
            if t.hypothesis_holds(tol) {
                Residual(t.second_fundamental)
            } else {
                Skip(format!(
                    "needs parallel Ricci and a submersion (|∇Ric| = {:e}, rank {} of {})",
                    t.nabla_ricci, t.map_rank, t.target_dim
                ))
            }
        }
        CheckKind::Leafwise { block } => {
            let chart = s.metric.chart();
            let idx: Vec<usize> = block.iter().filter_map(|n| chart.index_of(n)).collect();
            let l = leafwise_constancy(ctx(), &idx, p)?;
            if l.ricci_block <= tol {
                Residual(l.derivative)
            } else {
                Skip(format!("Ricci does not vanish on the block (|Ric| = {:e})", l.ricci_block))
            }
        }
        CheckKind::FlowInvariance { field: v, t_max } => {
            let vf = field(s, v)?;
            let d = degeneracy_check(ctx(), vf, p)?;
            if d.max_abs() <= tol {
                Residual(flow_invariance_check(ctx(), vf, *t_max, p)?)
            } else {
                Skip(format!("`{v}` is not degenerate (max {:e})", d.max_abs()))
            }
        }
        CheckKind::Radiation { field: v, conditions } => match radiation_conditions(&s.metric, field(s, v)?, p) {
            Ok(r) => Residual(max_of(
                r.entries().into_iter().filter(|(n, _)| conditions.iter().any(|c| c == n)).map(|(_, x)| x),
            )),
            Err(Error::FrameNotNull(reason)) => Skip(format!("`{v}` is not null ({reason})")),
            Err(e) => return Err(e),
        },
        CheckKind::Certificates { field: v, conditions } => {
            let c = vector_field_certificates(&s.metric, field(s, v)?, p)?;
            Residual(max_of(
                c.entries().into_iter().filter(|(n, _)| conditions.iter().any(|x| x == n)).map(|(_, x)| x),
            ))
        }
        CheckKind::EnergyConditions { frames } => match stress_and_frames(s, p, *frames, seed, k)? {
            Ok((stress, obs)) => {
                let ec = classical_energy_conditions(&stress, &obs)?;
                let mut worst = max_of([-ec.dominant_worst, -ec.strong_worst]);
                for f in &obs {
                    let split = energy_split(&stress, f)?;
                    worst = worst.max(-split.lower_margin()).max(-split.upper_margin());
                }
                Residual(worst)
            }
            Err(reason) => Skip(reason),
        },
        CheckKind::NullEnergy { frames } => match stress_and_frames(s, p, *frames, seed, k)? {
            Ok((stress, obs)) => {
                let g = s.metric.at(p)?;
                let mut worst = 0.0f64;
                for f in &obs {
                    let ns = null_energy_split(&stress, &NullFrame::from_observer(&g, f)?)?;
                    worst = worst.max(max_of([-ns.t_ll, -ns.t_ln, -ns.momentum_norm_sq, -ns.upper_margin()]));
                }
                Residual(worst)
            }
            Err(reason) => Skip(reason),
        },
        CheckKind::EnergyFuzz { .. } => unreachable!("handled without sampling"),
        CheckKind::BelIdentities => {
            let b = bel_form_identities(entry(s)?, p)?;
            Residual(max_of([b.identity_a, b.identity_b, b.transverse_ricci]))
        }
        CheckKind::WarpedDecomposition => {
            let e = entry(s)?;
            let wp = e.warped.as_ref().ok_or_else(|| Error::Invalid("entry is not a warped product".into()))?;
            Residual(warped_decomposition_residual(wp, &s.metric, p)?)
        }
        CheckKind::CatalogFacts => Residual(max_of(entry(s)?.fact_errors_at(p)?)),
        CheckKind::Bianchi => Residual(einstein_divergence(&s.metric, p)?.max_abs()),
        CheckKind::RiemannSymmetries => Residual(riemann_symmetry_defect(&LocalGeometry::at(&s.metric, p, 2)?)),
        CheckKind::Flat => Residual(LocalGeometry::at(&s.metric, p, 2)?.riemann().max_abs()),
        CheckKind::Signature => {
            s.metric.check_signature(p)?;
            Residual(0.0)
        }
    })
}

/// Largest violation of the pair symmetries and the first Bianchi identity.
fn riemann_symmetry_defect(geo: &LocalGeometry) -> f64 {
    let r = geo.riemann();
    let m = geo.dim();
    let mut worst = 0.0f64;
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                for d in 0..m {
                    let v = r.get(&[a, b, c, d]);
                    worst = worst
                        .max((v + r.get(&[b, a, c, d])).abs())
                        .max((v + r.get(&[a, b, d, c])).abs())
                        .max((v - r.get(&[c, d, a, b])).abs())
                        .max((v + r.get(&[a, c, d, b]) + r.get(&[a, d, b, c])).abs());
                }
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::parse_scenario;

    fn run(src: &str) -> Vec<CheckReport> {
        let s = parse_scenario(src, "t", "t").unwrap();
        run_checks(&s, &RunOptions::default())
    }

    #[test]
    fn sphere_constant_map_fails_by_kappa() {
        let r = run(
            r#"
            catalog = "sphere"
            kappa = -2.5
            [target]
            coordinates = ["y"]
            metric = ["1"]
            [map]
            components = ["0.5"]
            [[checks]]
            name = "einstein_residual"
            [[checks]]
            name = "ricci_gradient_identity"
            [[checks]]
            name = "trace_relation"
            "#,
        );
        assert_eq!(r[0].status, Status::Fail);
        assert!((r[0].max_residual.unwrap() - 2.5).abs() < 1e-12);
        // identity holds while the equation fails
        assert_eq!(r[1].status, Status::Pass);
        assert!((r[2].max_residual.unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn two_dimensional_full_residual_is_skipped() {
        let r = run(
            r#"
            kappa = 1.0
            [chart]
            coordinates = [{ name = "t", lo = -1, hi = 1 }, { name = "x", lo = -1, hi = 1 }]
            [metric]
            lower = ["1", "0", "-1"]
            signature = [1, -1]
            [target]
            coordinates = ["y"]
            metric = ["1"]
            [map]
            components = ["t + 2*x"]
            [[checks]]
            name = "einstein_residual_full"
            [[checks]]
            name = "energy_conditions"
            "#,
        );
        assert_eq!(r[0].status, Status::Skipped);
        assert!(r[0].reason.as_ref().unwrap().contains("dimension too small"));
        assert_eq!(r[1].status, Status::Pass);
        assert!(r[1].reason.as_ref().unwrap().contains("m = 2"));
    }

    #[test]
    fn non_null_radiation_field_is_skipped() {
        let r = run(
            r#"
            catalog = "minkowski"
            [vector_fields]
            t = ["1", "0", "0", "0"]
            [[checks]]
            name = "radiation"
            field = "t"
            "#,
        );
        assert_eq!(r[0].status, Status::Skipped);
    }

    #[test]
    fn flow_along_a_nondegenerate_field_is_skipped() {
        let r = run(
            r#"
            catalog = "coupled_pp_wave"
            [sampling]
            random = 4
            [[checks]]
            name = "flow_invariance"
            field = "du"
            "#,
        );
        assert_eq!(r[0].status, Status::Skipped);
        assert!(r[0].reason.as_ref().unwrap().contains("not degenerate"));
    }

    #[test]
    fn observer_velocities_are_reproducible() {
        assert_eq!(velocities(5, 3, 4, 4), velocities(5, 3, 4, 4));
        assert_ne!(velocities(5, 3, 4, 4), velocities(5, 4, 4, 4));
        assert!(velocities(1, 0, 3, 3)
            .iter()
            .all(|b| b.iter().map(|x| x * x).sum::<f64>() < 1.0));
    }

    #[test]
    fn stray_parameters_are_rejected() {
        let e = parse_scenario(
            "catalog = \"sphere\"\n[[checks]]\nname = \"flat\"\nfield = \"x\"\n",
            "t",
            "t",
        )
        .unwrap_err();
        assert!(e.to_string().contains("does not take field"), "{e}");
    }
}
