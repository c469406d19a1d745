//! Lorentzian normal forms built around a null vector field `l = ∂_0`.
//!
//! All forms share `g_00 = 0` and `g_0i = 0` for `i ≥ 2`, so `l` is null, and every
//! component is independent of `x0`, so `l` is Killing.

use std::fmt;
use std::str::FromStr;

use super::{CatalogEntry, Fact, Guarantee};
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::geometry::{tri, Chart, Coordinate, LocalGeometry, MetricField, VectorField};
use crate::maps::{SmoothMap, TargetGeometry};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PpForm {
    /// `2 g01 dx0 dx1 + g_ij dx^i dx^j`, `i, j ≥ 1`: `l` Killing and hypersurface orthogonal.
    Killing,
    /// As `Killing` with `g01 = 1`: `l` covariantly constant.
    Parallel,
    /// `2 g01 dx0 dx1 + g11 dx1² + 2 g1I dx1 dx^I − Σ (dx^I)²`, `I ≥ 2`.
    Bel,
    /// As `Bel` with `g1I = 0`.
    Lichnerowicz,
}

impl PpForm {
    pub const ALL: [PpForm; 4] = [PpForm::Killing, PpForm::Parallel, PpForm::Bel, PpForm::Lichnerowicz];

    pub fn name(self) -> &'static str {
        match self {
            PpForm::Killing => "killing",
            PpForm::Parallel => "parallel",
            PpForm::Bel => "bel",
            PpForm::Lichnerowicz => "lichnerowicz",
        }
    }

    /// Properties of `∂_0` that every metric of this form has.
    pub fn guarantees(self) -> Vec<Guarantee> {
        let mut out = vec![Guarantee::Killing, Guarantee::HypersurfaceOrthogonal];
        match self {
            PpForm::Killing => {}
            PpForm::Parallel => out.push(Guarantee::CovariantlyConstant),
            PpForm::Bel => out.push(Guarantee::Bel),
            PpForm::Lichnerowicz => out.extend([Guarantee::Bel, Guarantee::Lichnerowicz]),
        }
        out
    }
}

impl fmt::Display for PpForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PpForm {
    type Err = Error;
    fn from_str(s: &str) -> Result<PpForm> {
        PpForm::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown normal form `{s}`")))
    }
}

fn component_key(key: &str, m: usize) -> Result<(usize, usize)> {
    let digits: Vec<usize> = key
        .strip_prefix('g')
        .map(|d| d.chars().filter_map(|c| c.to_digit(10)).map(|d| d as usize).collect())
        .unwrap_or_default();
    match digits[..] {
        [a, b] if key.len() == 3 && a < m && b < m => Ok((a.min(b), a.max(b))),
        _ => Err(Error::Invalid(format!(
            "component key `{key}` must be `gab` with digits below {m}"
        ))),
    }
}

/// Assembles the metric of `form` on `chart`; unlisted components take the form's defaults
/// (`g01 = 1`, transverse block `−δ`, everything else zero).
pub(crate) fn pp_metric(chart: &Chart, form: PpForm, components: &[(&str, &str)]) -> Result<MetricField> {
    let m = chart.dim();
    if !(3..=10).contains(&m) {
        return Err(Error::Invalid(format!(
            "normal forms need 3 to 10 coordinates, got {m}"
        )));
    }
    let vars = chart.names();
    let zero = Expression::constant(0.0, vars);
    let mut lower = vec![zero; m * (m + 1) / 2];
    lower[tri(0, 1)] = Expression::constant(1.0, vars);
    let transverse_start = match form {
        PpForm::Killing | PpForm::Parallel => 1,
        PpForm::Bel | PpForm::Lichnerowicz => 2,
    };
    for i in transverse_start..m {
        lower[tri(i, i)] = Expression::constant(-1.0, vars);
    }
    let mut seen_g01 = false;
    for (key, source) in components {
        let (a, b) = component_key(key, m)?;
        let e = Expression::parse_shared(source, vars)?;
        if !e.diff_index(0).is_zero() {
            return Err(Error::FormViolation(format!("{key} = {source} depends on x0")));
        }
        let allowed = match (a, b) {
            (0, 1) => {
                seen_g01 = true;
                form != PpForm::Parallel || e.as_const() == Some(1.0)
            }
            (0, _) => false,
            (1, 1) => true,
            (1, _) => form != PpForm::Lichnerowicz,
            _ => matches!(form, PpForm::Killing | PpForm::Parallel),
        };
        if !allowed {
            return Err(Error::FormViolation(format!(
                "{key} is fixed in the {form} form and cannot be set to {source}"
            )));
        }
        lower[tri(a, b)] = e;
    }
    if form == PpForm::Killing && !seen_g01 {
        return Err(Error::FormViolation("the killing form needs g01".into()));
    }
    let mut signature = vec![-1i8; m];
    signature[0] = 1;
    MetricField::new(chart.clone(), lower, signature)
}

fn x_chart(m: usize) -> Result<Chart> {
    let names: Vec<String> = (0..m).map(|i| format!("x{i}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    Chart::cube(&refs, -1.0, 1.0)
}

/// Normal-form metric on `(-1, 1)^m` with coordinates `x0, …`, packaged with the
/// guarantees of the form for `l = ∂_0`.
pub fn pp_wave_family(form: PpForm, m: usize, components: &[(&str, &str)]) -> Result<CatalogEntry> {
    let chart = x_chart(m)?;
    let metric = pp_metric(&chart, form, components)?;
    let l = VectorField::coordinate(chart, 0)?;
    Ok(CatalogEntry {
        name: format!("{form}_form"),
        summary: format!("{form} normal form with null field l = d/dx0"),
        params: Vec::new(),
        metric,
        map: None,
        kappa: None,
        vector_fields: vec![("l".into(), l)],
        warped: None,
        form: Some(form),
        facts: vec![Fact::NullField {
            field: "l".into(),
            guarantees: form.guarantees(),
        }],
    })
}

/// Plane wave `2 dv du + H du² − dx2² − dx3²` with `H = (x2² + x3²) / (2κ)` and the map
/// `φ = u` into the real line. `R_uu = ½ ΔH = 1/κ`, so `κ Ric = φ*h` exactly.
pub fn coupled_pp_wave_solution(kappa: f64) -> Result<CatalogEntry> {
    if kappa == 0.0 {
        return Err(Error::ZeroCoupling);
    }
    if !kappa.is_finite() {
        return Err(Error::Invalid(format!("kappa must be finite, got {kappa}")));
    }
    let chart = Chart::new(vec![
        Coordinate::open("v", -10.0, 10.0),
        Coordinate::open("u", -1.0, 1.0),
        Coordinate::open("x2", -1.0, 1.0),
        Coordinate::open("x3", -1.0, 1.0),
    ])?;
    let vars = chart.names();
    let h = &Expression::constant(1.0 / kappa, vars) * &Expression::parse_shared("(x2^2 + x3^2)/2", vars)?;
    let metric = {
        let mut lower = pp_metric(&chart, PpForm::Parallel, &[])?.lower_triangle().to_vec();
        lower[tri(1, 1)] = h;
        MetricField::new(chart.clone(), lower, vec![1, -1, -1, -1])?
    };
    let target = TargetGeometry::euclidean(&["y"])?;
    let map = SmoothMap::from_strings(chart.clone(), target, &["u"])?;
    let zero = Expression::constant(0.0, vars);
    let mut ricci = vec![zero; 10];
    ricci[tri(1, 1)] = Expression::constant(1.0 / kappa, vars);
    Ok(CatalogEntry {
        name: "coupled_pp_wave".into(),
        summary: "plane wave coupled to the wave map phi = u; exact solution of kappa Ric = phi*h".into(),
        params: vec![("kappa".into(), kappa)],
        metric,
        map: Some(map),
        kappa: Some(kappa),
        vector_fields: vec![
            ("dv".into(), VectorField::coordinate(chart.clone(), 0)?),
            ("du".into(), VectorField::coordinate(chart, 1)?),
        ],
        warped: None,
        form: Some(PpForm::Parallel),
        facts: vec![
            Fact::RicciTensor(ricci),
            Fact::RicciRank(1),
            Fact::MapRank(1),
            Fact::Harmonic,
            Fact::EinsteinSolution,
            Fact::Degenerate("dv".into()),
            Fact::NullField {
                field: "dv".into(),
                guarantees: vec![
                    Guarantee::Killing,
                    Guarantee::HypersurfaceOrthogonal,
                    Guarantee::CovariantlyConstant,
                    Guarantee::Bel,
                    Guarantee::Lichnerowicz,
                ],
            },
        ],
    })
}

/// Curvature relations satisfied by four-dimensional Bel-form metrics.
///
/// In the engine's convention `R_1223 = R_13` and `R_1323 = −R_12`. Flipping the overall
/// sign of Riemann while keeping Ricci (contracting on the last slot instead) turns them
/// into `R_1223 = −R_13` and `R_1323 = R_12`; the `opposite_*` fields report that reading.
/// The two agree when `R_12 = R_13 = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BelIdentities {
    /// `|R_1223 − R_13|`
    pub identity_a: f64,
    /// `|R_1323 + R_12|`
    pub identity_b: f64,
    /// `|R_1223 + R_13|`
    pub opposite_a: f64,
    /// `|R_1323 − R_12|`
    pub opposite_b: f64,
    /// `max |R_IJ|`, `I, J ∈ {2, 3}`
    pub transverse_ricci: f64,
    /// `max |R_iJK2|`, `i ∈ {1, 2, 3}`, `J, K ∈ {2, 3}`
    pub transverse_riemann: f64,
    pub r12: f64,
    pub r13: f64,
}

impl BelIdentities {
    pub fn holds(&self, tol: f64) -> bool {
        self.identity_a <= tol && self.identity_b <= tol && self.transverse_ricci <= tol
    }
}

pub fn bel_form_identities(entry: &CatalogEntry, p: &[f64]) -> Result<BelIdentities> {
    match entry.form {
        Some(PpForm::Bel | PpForm::Lichnerowicz) => {}
        _ => {
            return Err(Error::FormViolation(format!(
                "entry `{}` is not in the bel or lichnerowicz form",
                entry.name
            )))
        }
    }
    if entry.metric.dim() != 4 {
        return Err(Error::ShapeMismatch(format!(
            "identities are stated for dimension 4, entry has {}",
            entry.metric.dim()
        )));
    }
    let geo = LocalGeometry::at(&entry.metric, p, 2)?;
    let r = geo.riemann();
    let ric = geo.ricci();
    let (r12, r13) = (ric.get(&[1, 2]), ric.get(&[1, 3]));
    let (a, b) = (r.get(&[1, 2, 2, 3]), r.get(&[1, 3, 2, 3]));
    let mut transverse_ricci: f64 = 0.0;
    let mut transverse_riemann: f64 = 0.0;
    for j in 2..4 {
        for k in 2..4 {
            transverse_ricci = transverse_ricci.max(ric.get(&[j, k]).abs());
            for i in 1..4 {
                transverse_riemann = transverse_riemann.max(r.get(&[i, j, k, 2]).abs());
            }
        }
    }
    Ok(BelIdentities {
        identity_a: (a - r13).abs(),
        identity_b: (b + r12).abs(),
        opposite_a: (a + r13).abs(),
        opposite_b: (b - r12).abs(),
        transverse_ricci,
        transverse_riemann,
        r12,
        r13,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn form_constraints() {
        let err = |form, comps: &[(&str, &str)]| {
            matches!(pp_wave_family(form, 4, comps), Err(Error::FormViolation(_)))
        };
        assert!(err(PpForm::Killing, &[("g01", "x0*x2")]));
        assert!(err(PpForm::Killing, &[]));
        assert!(err(PpForm::Parallel, &[("g01", "2")]));
        assert!(err(PpForm::Parallel, &[("g00", "1")]));
        assert!(err(PpForm::Bel, &[("g22", "-2")]));
        assert!(err(PpForm::Lichnerowicz, &[("g12", "x2")]));
        assert!(pp_wave_family(PpForm::Parallel, 4, &[("g10", "1"), ("g23", "x1/10")]).is_ok());
        assert!(pp_wave_family(PpForm::Bel, 4, &[("g1", "1")]).is_err());
    }

    #[test]
    fn coupled_solution_residual_vanishes() {
        for kappa in [1.0, -0.5, 3.0] {
            let e = coupled_pp_wave_solution(kappa).unwrap();
            let ctx = e.coupling().unwrap();
            let p = [3.0, 0.2, -0.4, 0.7];
            let res = crate::einstein::einstein_residual_ricci(&ctx, &p).unwrap();
            assert!(res.max_abs() < 1e-14, "{res}");
        }
        assert_eq!(coupled_pp_wave_solution(0.0).unwrap_err(), Error::ZeroCoupling);
    }

    #[test]
    fn bel_identities_on_a_twisted_metric() {
        let e = pp_wave_family(
            PpForm::Bel,
            4,
            &[("g11", "x2^2 - x3^2/2"), ("g12", "x1*x3^2/2"), ("g13", "sin(x2)*x1/2")],
        )
        .unwrap();
        let id = bel_form_identities(&e, &[0.1, 0.4, -0.3, 0.6]).unwrap();
        assert!(id.holds(1e-12), "{id:?}");
        assert!(id.r12.abs() > 1e-2 && id.r13.abs() > 1e-2, "{id:?}");
        assert!(id.opposite_a > 1e-2 || id.opposite_b > 1e-2);
    }
}
