//! Exact geometries with their known analytic facts.
//!
//! Every entry carries a list of [`Fact`]s; [`CatalogEntry::verify`] re-derives each one with
//! the engine at seeded random points, so a loaded entry can test itself.

mod pp;
mod warped;

use std::fmt;

pub use pp::{bel_form_identities, coupled_pp_wave_solution, pp_wave_family, BelIdentities, PpForm};
pub use warped::{
    closed_integral, closed_quadrature, product_metric, warped_base_integrals, warped_decomposition_residual,
    warped_product_metric, warped_ricci_oracle, WarpedIntegrals, WarpedProduct, WarpedRicci,
};

use crate::conditions::{radiation_at, vector_field_certificates};
use crate::einstein::{degeneracy_at, ricci_rank, ricci_residual_at, CouplingContext};
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::geometry::{parse_all, tri, Chart, Coordinate, LocalGeometry, MetricField, VectorField};
use crate::maps::{MapPoint, SmoothMap, TargetGeometry, RANK_TOLERANCE};

/// Tolerance used when an entry verifies its own facts.
pub const FACT_TOLERANCE: f64 = 1e-9;

/// Property of a null vector field promised by a normal form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Guarantee {
    Killing,
    HypersurfaceOrthogonal,
    CovariantlyConstant,
    Bel,
    Lichnerowicz,
}

impl Guarantee {
    pub fn name(self) -> &'static str {
        match self {
            Guarantee::Killing => "killing",
            Guarantee::HypersurfaceOrthogonal => "hypersurface_orthogonal",
            Guarantee::CovariantlyConstant => "covariantly_constant",
            Guarantee::Bel => "bel",
            Guarantee::Lichnerowicz => "lichnerowicz",
        }
    }
}

/// A closed-form statement about an entry. Component indices refer to the entry's chart.
#[derive(Debug, Clone, PartialEq)]
pub enum Fact {
    Ricci { a: usize, b: usize, value: Expression },
    /// Every Ricci component, packed lower triangle.
    RicciTensor(Vec<Expression>),
    Scalar(Expression),
    /// `R_abcd` with all indices down.
    Riemann { index: [usize; 4], value: Expression },
    Flat,
    RicciRank(usize),
    MapRank(usize),
    /// The attached map has zero tension.
    Harmonic,
    /// `κ Ric = φ*h` for the attached map and coupling.
    EinsteinSolution,
    /// The named field satisfies all four degeneracy conditions.
    Degenerate(String),
    /// The named field is null and has the listed properties.
    NullField { field: String, guarantees: Vec<Guarantee> },
    /// Engine Ricci equals the warped-product oracle blockwise.
    WarpedDecomposition,
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fact::Ricci { a, b, value } => write!(f, "Ric_{a}{b} = {value}"),
            Fact::RicciTensor(lower) => {
                let m = (((8 * lower.len() + 1) as f64).sqrt() as usize - 1) / 2;
                let nonzero: Vec<String> = (0..m)
                    .flat_map(|a| (0..=a).map(move |b| (a, b)))
                    .filter(|&(a, b)| !lower[tri(a, b)].is_zero())
                    .map(|(a, b)| format!("Ric_{b}{a} = {}", lower[tri(a, b)]))
                    .collect();
                if nonzero.is_empty() {
                    write!(f, "Ric = 0")
                } else {
                    write!(f, "{}, all other components 0", nonzero.join(", "))
                }
            }
            Fact::Scalar(e) => write!(f, "R = {e}"),
            Fact::Riemann { index: [a, b, c, d], value } => write!(f, "R_{a}{b}{c}{d} = {value}"),
            Fact::Flat => write!(f, "flat"),
            Fact::RicciRank(r) => write!(f, "rank Ric = {r}"),
            Fact::MapRank(r) => write!(f, "rank dphi = {r}"),
            Fact::Harmonic => write!(f, "map has zero tension"),
            Fact::EinsteinSolution => write!(f, "kappa Ric = phi*h"),
            Fact::Degenerate(v) => write!(f, "{v} is a degenerate direction"),
            Fact::NullField { field, guarantees } => {
                let names: Vec<&str> = guarantees.iter().map(|g| g.name()).collect();
                write!(f, "{field} is null; {}", names.join(", "))
            }
            Fact::WarpedDecomposition => write!(f, "Ricci blocks match the warped-product oracle"),
        }
    }
}

/// Worst deviation of one fact over the sampled points.
#[derive(Debug, Clone, PartialEq)]
pub struct FactCheck {
    pub fact: String,
    pub max_error: f64,
}

impl FactCheck {
    pub fn passed(&self, tol: f64) -> bool {
        self.max_error <= tol
    }
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: String,
    pub summary: String,
    pub params: Vec<(String, f64)>,
    pub metric: MetricField,
    pub map: Option<SmoothMap>,
    pub kappa: Option<f64>,
    pub vector_fields: Vec<(String, VectorField)>,
    pub warped: Option<WarpedProduct>,
    pub form: Option<PpForm>,
    pub facts: Vec<Fact>,
}

impl CatalogEntry {
    fn plain(name: &str, summary: &str, metric: MetricField, facts: Vec<Fact>) -> CatalogEntry {
        CatalogEntry {
            name: name.into(),
            summary: summary.into(),
            params: Vec::new(),
            metric,
            map: None,
            kappa: None,
            vector_fields: Vec::new(),
            warped: None,
            form: None,
            facts,
        }
    }

    pub fn vector_field(&self, name: &str) -> Result<&VectorField> {
        self.vector_fields
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v)
            .ok_or_else(|| Error::Invalid(format!("entry `{}` has no vector field `{name}`", self.name)))
    }

    /// Coupling context from the attached map and `κ`.
    pub fn coupling(&self) -> Result<CouplingContext> {
        match (&self.map, self.kappa) {
            (Some(map), Some(kappa)) => CouplingContext::new(kappa, self.metric.clone(), map.clone()),
            _ => Err(Error::Invalid(format!(
                "entry `{}` has no attached map and coupling constant",
                self.name
            ))),
        }
    }

    /// Re-derives every fact at `count` seeded random points of the chart box.
    pub fn verify(&self, count: usize, seed: u64) -> Result<Vec<FactCheck>> {
        let points = self.metric.chart().random_points(count, seed)?;
        let mut worst = vec![0.0f64; self.facts.len()];
        for p in &points {
            for (w, err) in worst.iter_mut().zip(self.fact_errors_at(p)?) {
                *w = w.max(err);
            }
        }
        Ok(self
            .facts
            .iter()
            .zip(worst)
            .map(|(f, max_error)| FactCheck {
                fact: f.to_string(),
                max_error,
            })
            .collect())
    }

    /// Deviation of each fact at `p`, in declaration order.
    pub fn fact_errors_at(&self, p: &[f64]) -> Result<Vec<f64>> {
        let geo = LocalGeometry::at(&self.metric, p, 3)?;
        let mp = match &self.map {
            Some(map) => Some(MapPoint::at(map, &self.metric, p, 3)?),
            None => None,
        };
        self.facts.iter().map(|f| self.fact_error(f, &geo, mp.as_ref(), p)).collect()
    }

    fn fact_error(&self, fact: &Fact, geo: &LocalGeometry, mp: Option<&MapPoint>, p: &[f64]) -> Result<f64> {
        let need_map = || {
            mp.ok_or_else(|| Error::Invalid(format!("entry `{}` has no attached map", self.name)))
        };
        let m = geo.dim();
        Ok(match fact {
            Fact::Ricci { a, b, value } => (geo.ricci().get(&[*a, *b]) - value.eval(p)?).abs(),
            Fact::RicciTensor(lower) => {
                let ric = geo.ricci();
                let mut e: f64 = 0.0;
                for a in 0..m {
                    for b in 0..=a {
                        e = e.max((ric.get(&[a, b]) - lower[tri(a, b)].eval(p)?).abs());
                    }
                }
                e
            }
            Fact::Scalar(value) => (geo.scalar_curvature() - value.eval(p)?).abs(),
            Fact::Riemann { index, value } => (geo.riemann().get(index) - value.eval(p)?).abs(),
            Fact::Flat => geo.riemann().max_abs(),
            Fact::RicciRank(r) => ricci_rank(geo, RANK_TOLERANCE).abs_diff(*r) as f64,
            Fact::MapRank(r) => need_map()?.jet.rank(RANK_TOLERANCE).abs_diff(*r) as f64,
            Fact::Harmonic => {
                let mp = need_map()?;
                mp.jet.tension(&mp.geo).max_abs()
            }
            Fact::EinsteinSolution => {
                let kappa = self.coupling()?.kappa();
                ricci_residual_at(kappa, need_map()?).max_abs()
            }
            Fact::Degenerate(v) => {
                let (vv, dv) = self.vector_field(v)?.jet(p)?;
                degeneracy_at(need_map()?, &vv, &dv).max_abs()
            }
            Fact::NullField { field, guarantees } => {
                let l = self.vector_field(field)?;
                let cert = vector_field_certificates(&self.metric, l, p)?;
                let rad = radiation_at(geo, &l.at(p)?)?;
                let mut e = cert.lightlike;
                for g in guarantees {
                    e = e.max(match g {
                        Guarantee::Killing => cert.killing,
                        Guarantee::HypersurfaceOrthogonal => cert.hypersurface_orthogonal,
                        Guarantee::CovariantlyConstant => cert.covariantly_constant,
                        Guarantee::Bel => rad.bel(),
                        Guarantee::Lichnerowicz => rad.lichnerowicz(),
                    });
                }
                e
            }
            Fact::WarpedDecomposition => {
                let wp = self.warped.as_ref().ok_or_else(|| {
                    Error::Invalid(format!("entry `{}` is not a warped product", self.name))
                })?;
                warped_decomposition_residual(wp, &self.metric, p)?
            }
        })
    }

    /// Runs [`CatalogEntry::verify`] with 50 points and fails on the first violated fact.
    pub fn self_test(&self, seed: u64) -> Result<()> {
        for check in self.verify(50, seed)? {
            if !check.passed(FACT_TOLERANCE) {
                return Err(Error::Invalid(format!(
                    "entry `{}`: fact `{}` off by {:e}",
                    self.name, check.fact, check.max_error
                )));
            }
        }
        Ok(())
    }
}

/// Name, one-line description and default parameters of a built-in entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntryInfo {
    pub name: &'static str,
    pub summary: &'static str,
    pub params: &'static [(&'static str, f64)],
}

pub const ENTRIES: &[EntryInfo] = &[
    EntryInfo { name: "minkowski", summary: "flat Lorentzian space, coordinates t, x, y, z", params: &[("dim", 4.0)] },
    EntryInfo { name: "euclidean", summary: "flat Riemannian space, coordinates x, y, z", params: &[("dim", 3.0)] },
    EntryInfo { name: "circle", summary: "unit circle with periodic coordinate x", params: &[] },
    EntryInfo { name: "sphere", summary: "round 2-sphere of radius r in colatitude and longitude", params: &[("r", 1.0)] },
    EntryInfo { name: "line_sphere", summary: "product of a line and the unit 2-sphere", params: &[] },
    EntryInfo { name: "sphere_product", summary: "product of 2-spheres of radius 1 and 2", params: &[] },
    EntryInfo { name: "hyperbolic_warped", summary: "dr^2 + exp(2r) g_S2; the (r, th) planes have curvature -1", params: &[] },
    EntryInfo { name: "warped_circle_sphere", summary: "circle warped with the unit 2-sphere, w = 2 + sin(x)", params: &[] },
    EntryInfo { name: "static_warped", summary: "static metric w^2 dt^2 - (dx^2 + dy^2 + dz^2) as a warped product", params: &[] },
    EntryInfo { name: "traveling_wave", summary: "wave map sin(t - x) on 2D Minkowski space", params: &[] },
    EntryInfo { name: "linear_map", summary: "linear map t + 2x on 2D Minkowski space", params: &[] },
    EntryInfo { name: "killing_wave_harmonic", summary: "killing form with g01 = exp(x2) cos(x3)", params: &[] },
    EntryInfo { name: "killing_wave_nonharmonic", summary: "killing form with g01 = x2^2", params: &[] },
    EntryInfo { name: "parallel_wave_flat", summary: "parallel form with flat transverse block", params: &[] },
    EntryInfo { name: "bel_wave", summary: "bel form with g11 = x2^2", params: &[] },
    EntryInfo { name: "bel_wave_twisted", summary: "bel form with nonzero g12, g13", params: &[] },
    EntryInfo { name: "lichnerowicz_wave", summary: "lichnerowicz form with a cubic g11", params: &[] },
    EntryInfo { name: "coupled_pp_wave", summary: "plane wave solving kappa Ric = phi*h with phi = u", params: &[("kappa", 1.0)] },
];

fn resolve(info: &EntryInfo, given: &[(String, f64)]) -> Result<Vec<(String, f64)>> {
    let mut out: Vec<(String, f64)> = info.params.iter().map(|(n, v)| (n.to_string(), *v)).collect();
    for (name, value) in given {
        match out.iter_mut().find(|(n, _)| n == name) {
            Some(slot) => slot.1 = *value,
            None => {
                return Err(Error::Invalid(format!(
                    "catalog entry `{}` has no parameter `{name}`",
                    info.name
                )))
            }
        }
    }
    Ok(out)
}

fn integer_param(name: &str, value: f64, range: std::ops::RangeInclusive<usize>) -> Result<usize> {
    let n = value as usize;
    if value.fract() != 0.0 || !range.contains(&n) {
        return Err(Error::Invalid(format!(
            "parameter `{name}` must be an integer in {}..={}, got {value}",
            range.start(),
            range.end()
        )));
    }
    Ok(n)
}

fn sphere_metric(r: f64, th: &str, ph: &str) -> Result<MetricField> {
    let chart = Chart::new(vec![Coordinate::polar(th), Coordinate::angle(ph)])?;
    let r2 = format!("{}", r * r);
    let s = format!("{r2}*sin({th})^2");
    MetricField::diagonal(chart, &[&r2, &s], vec![1, 1])
}

fn ricci_lower(chart: &Chart, lower: &[&str]) -> Result<Fact> {
    Ok(Fact::RicciTensor(parse_all(chart, lower)?))
}

fn scalar(chart: &Chart, s: &str) -> Result<Fact> {
    Ok(Fact::Scalar(Expression::parse_shared(s, chart.names())?))
}

fn minkowski_metric(names: &[&str]) -> Result<MetricField> {
    let chart = Chart::cube(names, -1.0, 1.0)?;
    let mut diag = vec!["-1"; names.len()];
    diag[0] = "1";
    let mut sig = vec![-1; names.len()];
    sig[0] = 1;
    MetricField::diagonal(chart, &diag, sig)
}

fn with_map(mut entry: CatalogEntry, component: &str) -> Result<CatalogEntry> {
    let target = TargetGeometry::euclidean(&["y"])?;
    entry.map = Some(SmoothMap::from_strings(entry.metric.chart().clone(), target, &[component])?);
    Ok(entry)
}

fn warped_entry(name: &str, summary: &str, wp: WarpedProduct, mut facts: Vec<Fact>) -> Result<CatalogEntry> {
    facts.push(Fact::WarpedDecomposition);
    let mut e = CatalogEntry::plain(name, summary, wp.metric()?, facts);
    e.warped = Some(wp);
    Ok(e)
}

fn pp_entry(name: &str, summary: &str, form: PpForm, comps: &[(&str, &str)], extra: &[(usize, usize, &str)]) -> Result<CatalogEntry> {
    let mut e = pp_wave_family(form, 4, comps)?;
    e.name = name.into();
    e.summary = summary.into();
    for (a, b, v) in extra {
        let value = Expression::parse_shared(v, e.metric.chart().names())?;
        e.facts.push(Fact::Ricci { a: *a, b: *b, value });
    }
    Ok(e)
}

/// Builds a named entry; `params` override the defaults listed in [`ENTRIES`].
pub fn build(name: &str, params: &[(String, f64)]) -> Result<CatalogEntry> {
    let info = ENTRIES.iter().find(|e| e.name == name).ok_or_else(|| {
        let names: Vec<&str> = ENTRIES.iter().map(|e| e.name).collect();
        Error::Invalid(format!("unknown catalog entry `{name}`; known: {}", names.join(", ")))
    })?;
    let params = resolve(info, params)?;
    let param = |k: &str| params.iter().find(|(n, _)| n == k).map(|(_, v)| *v).unwrap();
    let mut entry = match name {
        "minkowski" => {
            let m = integer_param("dim", param("dim"), 2..=4)?;
            let g = minkowski_metric(&["t", "x", "y", "z"][..m])?;
            CatalogEntry::plain(name, info.summary, g, vec![Fact::Flat])
        }
        "euclidean" => {
            let m = integer_param("dim", param("dim"), 1..=3)?;
            let names = &["x", "y", "z"][..m];
            let g = MetricField::diagonal(Chart::cube(names, -1.0, 1.0)?, &vec!["1"; m], vec![1; m])?;
            CatalogEntry::plain(name, info.summary, g, vec![Fact::Flat])
        }
        "circle" => {
            let g = MetricField::diagonal(Chart::new(vec![Coordinate::angle("x")])?, &["1"], vec![1])?;
            CatalogEntry::plain(name, info.summary, g, vec![Fact::Flat])
        }
        "sphere" => {
            let r = param("r");
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::Invalid(format!("sphere radius must be positive, got {r}")));
            }
            let g = sphere_metric(r, "th", "ph")?;
            let c = g.chart().clone();
            let facts = vec![
                ricci_lower(&c, &["1", "0", "sin(th)^2"])?,
                scalar(&c, &format!("2/{}", r * r))?,
                Fact::Riemann {
                    index: [0, 1, 0, 1],
                    value: Expression::parse_shared(&format!("{}*sin(th)^2", r * r), c.names())?,
                },
            ];
            CatalogEntry::plain(name, info.summary, g, facts)
        }
        "line_sphere" => {
            let line = MetricField::diagonal(Chart::cube(&["s"], -1.0, 1.0)?, &["1"], vec![1])?;
            let g = product_metric(&line, &sphere_metric(1.0, "th", "ph")?)?;
            let c = g.chart().clone();
            let facts = vec![
                ricci_lower(&c, &["0", "0", "1", "0", "0", "sin(th)^2"])?,
                scalar(&c, "2")?,
            ];
            CatalogEntry::plain(name, info.summary, g, facts)
        }
        "sphere_product" => {
            let g = product_metric(&sphere_metric(1.0, "th1", "ph1")?, &sphere_metric(2.0, "th2", "ph2")?)?;
            let c = g.chart().clone();
            let facts = vec![
                ricci_lower(&c, &["1", "0", "sin(th1)^2", "0", "0", "1", "0", "0", "0", "sin(th2)^2"])?,
                scalar(&c, "2.5")?,
            ];
            CatalogEntry::plain(name, info.summary, g, facts)
        }
        "hyperbolic_warped" => {
            let base = MetricField::diagonal(Chart::cube(&["r"], -1.0, 1.0)?, &["1"], vec![1])?;
            let wp = WarpedProduct::new(base, sphere_metric(1.0, "th", "ph")?, Expression::parse("exp(r)", &["r"])?)?;
            let c = wp.base.chart().product(wp.fiber.chart())?;
            let facts = vec![
                ricci_lower(&c, &["-2", "0", "1 - 2*exp(2*r)", "0", "0", "(1 - 2*exp(2*r))*sin(th)^2"])?,
                scalar(&c, "2*exp(-2*r) - 6")?,
                Fact::Riemann {
                    index: [0, 1, 0, 1],
                    value: Expression::parse_shared("-exp(2*r)", c.names())?,
                },
            ];
            warped_entry(name, info.summary, wp, facts)?
        }
        "warped_circle_sphere" => {
            let base = MetricField::diagonal(Chart::new(vec![Coordinate::angle("x")])?, &["1"], vec![1])?;
            let wp = WarpedProduct::new(base, sphere_metric(1.0, "th", "ph")?, Expression::parse("2 + sin(x)", &["x"])?)?;
            warped_entry(name, info.summary, wp, Vec::new())?
        }
        "static_warped" => {
            let base = MetricField::diagonal(Chart::cube(&["x", "y", "z"], -1.0, 1.0)?, &["-1", "-1", "-1"], vec![-1; 3])?;
            let fiber = MetricField::diagonal(Chart::cube(&["t"], -1.0, 1.0)?, &["1"], vec![1])?;
            let w = Expression::parse("2 + x*y/4 + z^2/8", &["x", "y", "z"])?;
            let mut e = warped_entry(name, info.summary, WarpedProduct::new(base, fiber, w)?, Vec::new())?;
            e.vector_fields.push(("dt".into(), VectorField::coordinate(e.metric.chart().clone(), 3)?));
            e
        }
        "traveling_wave" => {
            let e = CatalogEntry::plain(
                name,
                info.summary,
                minkowski_metric(&["t", "x"])?,
                vec![Fact::Flat, Fact::Harmonic, Fact::MapRank(1)],
            );
            with_map(e, "sin(t - x)")?
        }
        "linear_map" => {
            let e = CatalogEntry::plain(
                name,
                info.summary,
                minkowski_metric(&["t", "x"])?,
                vec![Fact::Flat, Fact::Harmonic, Fact::MapRank(1)],
            );
            with_map(e, "t + 2*x")?
        }
        "killing_wave_harmonic" => pp_entry(
            name,
            info.summary,
            PpForm::Killing,
            &[("g01", "exp(x2)*cos(x3)")],
            &[(0, 0, "0"), (0, 1, "0")],
        )?,
        "killing_wave_nonharmonic" => {
            let comps = [("g01", "x2^2")];
            let mut e = pp_entry(name, info.summary, PpForm::Killing, &comps, &[(0, 0, "0"), (0, 1, "1")])?;
            // g01 = x2^2 degenerates on x2 = 0; keep the chart on one side of it
            let mut coords = e.metric.chart().coordinates().to_vec();
            coords[2] = Coordinate::open("x2", 0.25, 1.0);
            let chart = Chart::new(coords)?;
            e.metric = pp::pp_metric(&chart, PpForm::Killing, &comps)?;
            e.vector_fields = vec![("l".into(), VectorField::coordinate(chart, 0)?)];
            e
        }
        "parallel_wave_flat" => {
            let mut e = pp_entry(name, info.summary, PpForm::Parallel, &[], &[])?;
            e.facts.push(Fact::Flat);
            e
        }
        "bel_wave" => pp_entry(name, info.summary, PpForm::Bel, &[("g11", "x2^2")], &[])?,
        "bel_wave_twisted" => pp_entry(
            name,
            info.summary,
            PpForm::Bel,
            &[("g11", "x2^2 - x3^2/2"), ("g12", "x1*x3^2/2"), ("g13", "sin(x2)*x1/2")],
            &[],
        )?,
        "lichnerowicz_wave" => pp_entry(
            name,
            info.summary,
            PpForm::Lichnerowicz,
            &[("g11", "x2^2 - x3^2 + x1*x2*x3")],
            &[],
        )?,
        "coupled_pp_wave" => coupled_pp_wave_solution(param("kappa"))?,
        _ => unreachable!("entry listed in ENTRIES without a builder"),
    };
    entry.params = params;
    Ok(entry)
}
