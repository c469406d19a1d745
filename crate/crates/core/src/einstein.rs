//! Residuals of the coupled system `κ Ric = φ*h` and its consequences.

use crate::error::{Error, Result};
use crate::geometry::{check_same_chart, lie_from_jets, CoordKind, LocalGeometry, MetricField, VectorField};
use crate::linalg;
use crate::maps::{MapPoint, SmoothMap, RANK_FLOOR};
use crate::tensor::{TensorValue, Variance};

/// Coupling constant, source metric and map.
#[derive(Debug, Clone)]
pub struct CouplingContext {
    kappa: f64,
    metric: MetricField,
    map: SmoothMap,
}

impl CouplingContext {
    pub fn new(kappa: f64, metric: MetricField, map: SmoothMap) -> Result<CouplingContext> {
        if kappa == 0.0 || !kappa.is_finite() {
            return Err(Error::ZeroCoupling);
        }
        check_same_chart(metric.chart(), map.source())?;
        Ok(CouplingContext { kappa, metric, map })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn metric(&self) -> &MetricField {
        &self.metric
    }

    pub fn map(&self) -> &SmoothMap {
        &self.map
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    /// Joint evaluation at `p`; `order` is the metric derivative order.
    pub fn point(&self, p: &[f64], order: usize) -> Result<MapPoint> {
        MapPoint::at(&self.map, &self.metric, p, order)
    }
}

/// `κ R_ab − (φ*h)_ab`.
pub fn ricci_residual_at(kappa: f64, mp: &MapPoint) -> TensorValue {
    let f = mp.jet.pullback();
    let mut r = mp.geo.ricci().scaled(kappa);
    for (x, y) in r.data_mut().iter_mut().zip(f.data()) {
        *x -= y;
    }
    r
}

/// `κ G_ab − T_ab`.
pub fn full_residual_at(kappa: f64, mp: &MapPoint) -> TensorValue {
    let t = mp.jet.energy_momentum(&mp.geo);
    mp.geo
        .einstein()
        .scaled(kappa)
        .sub(&t)
        .expect("both are 2-down on the source")
}

pub fn einstein_residual_ricci(ctx: &CouplingContext, p: &[f64]) -> Result<TensorValue> {
    let mp = ctx.point(p, 2)?;
    Ok(ricci_residual_at(ctx.kappa, &mp))
}

/// Full-form residual; only meaningful as an equivalent of the Ricci form for `m >= 3`.
pub fn einstein_residual_full(ctx: &CouplingContext, p: &[f64]) -> Result<TensorValue> {
    if ctx.dim() < 3 {
        return Err(Error::DimensionTooSmall {
            m: ctx.dim(),
            required: 3,
        });
    }
    let mp = ctx.point(p, 2)?;
    Ok(full_residual_at(ctx.kappa, &mp))
}

/// `κ R − 2e`.
pub fn trace_relation_residual(ctx: &CouplingContext, p: &[f64]) -> Result<f64> {
    let mp = ctx.point(p, 2)?;
    Ok(ctx.kappa * mp.geo.scalar_curvature() - 2.0 * mp.jet.energy_density(&mp.geo))
}

/// The three equivalent degeneracy conditions along `v` and the Lie derivative of Ricci.
#[derive(Debug, Clone, PartialEq)]
pub struct Degeneracy {
    /// `Ric(v, v)`
    pub ric_vv: f64,
    /// `R_ab v^b`
    pub ric_dot_v: TensorValue,
    /// `φ_* v`
    pub pushforward: TensorValue,
    /// `ℒ_v Ric`
    pub lie_ric: TensorValue,
}

impl Degeneracy {
    /// Largest of the four magnitudes.
    pub fn max_abs(&self) -> f64 {
        self.ric_vv
            .abs()
            .max(self.ric_dot_v.max_abs())
            .max(self.pushforward.max_abs())
            .max(self.lie_ric.max_abs())
    }

    /// Whether the three vanishing conditions agree at tolerance `tol`.
    pub fn conditions_agree(&self, tol: f64) -> bool {
        let a = self.ric_vv.abs() <= tol;
        let b = self.ric_dot_v.max_abs() <= tol;
        let c = self.pushforward.max_abs() <= tol;
        a == b && b == c
    }
}

pub fn degeneracy_check(ctx: &CouplingContext, v: &VectorField, p: &[f64]) -> Result<Degeneracy> {
    check_same_chart(ctx.metric.chart(), v.chart())?;
    let mp = ctx.point(p, 3)?;
    let (vv, dv) = v.jet(p)?;
    Ok(degeneracy_at(&mp, &vv, &dv))
}

pub(crate) fn degeneracy_at(mp: &MapPoint, vv: &[f64], dv: &[f64]) -> Degeneracy {
    let m = mp.geo.dim();
    let ric = mp.geo.ricci();
    let rv: Vec<f64> = (0..m)
        .map(|a| (0..m).map(|b| ric.data()[a * m + b] * vv[b]).sum())
        .collect();
    let ric_vv = (0..m).map(|a| rv[a] * vv[a]).sum();
    let lie_ric = lie_from_jets(vv, dv, ric.data(), mp.geo.ricci_partials().data());
    Degeneracy {
        ric_vv,
        ric_dot_v: TensorValue::vector(rv, Variance::Down),
        pushforward: TensorValue::vector(mp.jet.pushforward(vv), Variance::Up),
        lie_ric,
    }
}

/// `κ(∇_a R_bc + ∇_b R_ca − ∇_c R_ab) − 2 h_ij (∇_a ∂_b φ^i) ∂_c φ^j`, slots `[a, b, c]`.
pub fn ricci_gradient_identity_residual(ctx: &CouplingContext, p: &[f64]) -> Result<TensorValue> {
    let mp = ctx.point(p, 3)?;
    Ok(ricci_gradient_at(ctx.kappa, &mp))
}

pub(crate) fn ricci_gradient_at(kappa: f64, mp: &MapPoint) -> TensorValue {
    let m = mp.geo.dim();
    let (_, n) = mp.jet.dims();
    let nr = mp.geo.ricci_covariant();
    let sff = mp.jet.second_fundamental_form(&mp.geo);
    let dphi = mp.jet.dphi();
    let h = mp.jet.h();
    TensorValue::from_fn(&[m, m, m], &[Variance::Down; 3], |i| {
        let (a, b, c) = (i[0], i[1], i[2]);
        let lhs = kappa * (nr.get(&[a, b, c]) + nr.get(&[b, c, a]) - nr.get(&[c, a, b]));
        let mut rhs = 0.0;
        for k in 0..n {
            for j in 0..n {
                rhs += h[k * n + j] * sff.get(&[k, a, b]) * dphi[j * m + c];
            }
        }
        lhs - 2.0 * rhs
    })
}

/// `h_ij τ^i ∂_c φ^j`.
pub fn conservation_orthogonality(ctx: &CouplingContext, p: &[f64]) -> Result<TensorValue> {
    let mp = ctx.point(p, 1)?;
    Ok(mp.jet.stress_divergence(&mp.geo).1)
}

/// Ingredients of the totally-geodesic statement at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct TotallyGeodesic {
    /// `max |∇dφ|`
    pub second_fundamental: f64,
    /// `max |∇Ric|`
    pub nabla_ricci: f64,
    pub map_rank: usize,
    pub target_dim: usize,
}

impl TotallyGeodesic {
    /// Parallel Ricci and a submersion.
    pub fn hypothesis_holds(&self, tol: f64) -> bool {
        self.nabla_ricci <= tol && self.map_rank == self.target_dim
    }
}

pub fn totally_geodesic_check(ctx: &CouplingContext, p: &[f64], rank_tol: f64) -> Result<TotallyGeodesic> {
    let mp = ctx.point(p, 3)?;
    Ok(TotallyGeodesic {
        second_fundamental: mp.jet.second_fundamental_form(&mp.geo).max_abs(),
        nabla_ricci: mp.geo.ricci_covariant().max_abs(),
        map_rank: mp.jet.rank(rank_tol),
        target_dim: ctx.map.target().dim(),
    })
}

/// Ranks of `dφ`, `φ*h` and `Ric`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankReport {
    pub differential: usize,
    pub pullback: usize,
    pub ricci: usize,
}

pub fn symmetric_rank(m: usize, data: &[f64], tol: f64) -> usize {
    linalg::count_above(&linalg::singular_values(m, m, data), tol, RANK_FLOOR)
}

pub fn rank_report(ctx: &CouplingContext, p: &[f64], tol: f64) -> Result<RankReport> {
    let mp = ctx.point(p, 2)?;
    let m = ctx.dim();
    Ok(RankReport {
        differential: mp.jet.rank(tol),
        pullback: symmetric_rank(m, mp.jet.pullback().data(), tol),
        ricci: symmetric_rank(m, mp.geo.ricci().data(), tol),
    })
}

/// Leafwise constancy: Ricci on a coordinate block and the matching partials of `φ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Leafwise {
    /// `max |Ric(∂_i, ∂_j)|` over the block
    pub ricci_block: f64,
    /// `max_i |∂_i φ|_h` over the block
    pub derivative: f64,
}

pub fn leafwise_constancy(ctx: &CouplingContext, block: &[usize], p: &[f64]) -> Result<Leafwise> {
    let m = ctx.dim();
    if let Some(&bad) = block.iter().find(|&&i| i >= m) {
        return Err(Error::ShapeMismatch(format!("block index {bad} out of range for dimension {m}")));
    }
    let mp = ctx.point(p, 2)?;
    let ric = mp.geo.ricci();
    let mut rb: f64 = 0.0;
    let mut der: f64 = 0.0;
    for &i in block {
        for &j in block {
            rb = rb.max(ric.get(&[i, j]).abs());
        }
        let mut e = vec![0.0; m];
        e[i] = 1.0;
        der = der.max(mp.jet.pushforward_product(&e, &e).max(0.0).sqrt());
    }
    Ok(Leafwise {
        ricci_block: rb,
        derivative: der,
    })
}

/// Wraps periodic coordinates into their box; false if an open coordinate left it.
fn normalize_into_chart(ctx: &CouplingContext, x: &mut [f64]) -> bool {
    for (xi, c) in x.iter_mut().zip(ctx.metric.chart().coordinates()) {
        if let CoordKind::Periodic { period } = c.kind {
            *xi = c.lo + (*xi - c.lo).rem_euclid(period);
        }
        if !(*xi > c.lo && *xi < c.hi) {
            return false;
        }
    }
    true
}

/// Number of integration steps per direction.
pub const FLOW_STEPS: usize = 1000;

/// Max-norm of `φ(f_t(p)) − φ(p)` over `|t| <= t_max`, integrating `ẋ = v(x)` with RK4.
///
/// The step is `t_max / FLOW_STEPS`; the deviation is sampled at every step.
pub fn flow_invariance_check(ctx: &CouplingContext, v: &VectorField, t_max: f64, p: &[f64]) -> Result<f64> {
    check_same_chart(ctx.metric.chart(), v.chart())?;
    let m = ctx.dim();
    if p.len() != m {
        return Err(Error::PointDimension {
            expected: m,
            got: p.len(),
        });
    }
    let phi0 = ctx.map.at(p)?;
    let mut worst: f64 = 0.0;
    let h = t_max.abs() / FLOW_STEPS as f64;
    for dir in [1.0, -1.0] {
        let mut x = p.to_vec();
        let dt = dir * h;
        let mut tmp = vec![0.0; m];
        for step in 1..=FLOW_STEPS {
            let k1 = v.at(&x)?;
            for i in 0..m {
                tmp[i] = x[i] + 0.5 * dt * k1[i];
            }
            let k2 = v.at(&tmp)?;
            for i in 0..m {
                tmp[i] = x[i] + 0.5 * dt * k2[i];
            }
            let k3 = v.at(&tmp)?;
            for i in 0..m {
                tmp[i] = x[i] + dt * k3[i];
            }
            let k4 = v.at(&tmp)?;
            for i in 0..m {
                x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            if !normalize_into_chart(ctx, &mut x) {
                return Err(Error::FlowLeftDomain {
                    t: dt * step as f64,
                    point: x,
                });
            }
            let phi = ctx.map.at(&x)?;
            for (a, b) in phi.iter().zip(&phi0) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    Ok(worst)
}

/// Geometry-only helper for callers holding a [`LocalGeometry`] already.
pub fn ricci_rank(geo: &LocalGeometry, tol: f64) -> usize {
    symmetric_rank(geo.dim(), geo.ricci().data(), tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Chart, Coordinate};
    use crate::maps::TargetGeometry;

    fn sphere_constant(kappa: f64) -> CouplingContext {
        let chart = Chart::new(vec![Coordinate::polar("th"), Coordinate::angle("ph")]).unwrap();
        let g = MetricField::diagonal(chart.clone(), &["1", "sin(th)^2"], vec![1, 1]).unwrap();
        let phi = SmoothMap::constant(chart, TargetGeometry::euclidean(&["y"]).unwrap(), &[0.0]).unwrap();
        CouplingContext::new(kappa, g, phi).unwrap()
    }

    #[test]
    fn zero_kappa_rejected() {
        let ctx = sphere_constant(1.0);
        assert_eq!(
            CouplingContext::new(0.0, ctx.metric().clone(), ctx.map().clone()).unwrap_err(),
            Error::ZeroCoupling
        );
    }

    #[test]
    fn sphere_with_constant_map() {
        let ctx = sphere_constant(-2.0);
        let p = [1.0, 0.5];
        assert!((einstein_residual_ricci(&ctx, &p).unwrap().max_abs() - 2.0).abs() < 1e-12);
        assert!((trace_relation_residual(&ctx, &p).unwrap() + 4.0).abs() < 1e-12);
        assert!(ricci_gradient_identity_residual(&ctx, &p).unwrap().max_abs() < 1e-12);
        assert!(matches!(
            einstein_residual_full(&ctx, &p),
            Err(Error::DimensionTooSmall { m: 2, required: 3 })
        ));
    }

    #[test]
    fn flow_leaving_open_chart_is_reported() {
        let chart = Chart::cube(&["x"], -1.0, 1.0).unwrap();
        let g = MetricField::diagonal(chart.clone(), &["1"], vec![1]).unwrap();
        let phi = SmoothMap::constant(chart.clone(), TargetGeometry::euclidean(&["y"]).unwrap(), &[0.0]).unwrap();
        let ctx = CouplingContext::new(1.0, g, phi).unwrap();
        let v = VectorField::coordinate(chart, 0).unwrap();
        assert_eq!(flow_invariance_check(&ctx, &v, 0.5, &[0.0]).unwrap(), 0.0);
        assert!(matches!(
            flow_invariance_check(&ctx, &v, 2.0, &[0.0]),
            Err(Error::FlowLeftDomain { .. })
        ));
    }

    #[test]
    fn flow_wraps_periodic_coordinates() {
        let ctx = sphere_constant(1.0);
        let v = VectorField::coordinate(ctx.metric().chart().clone(), 1).unwrap();
        assert_eq!(flow_invariance_check(&ctx, &v, 10.0, &[1.0, 6.0]).unwrap(), 0.0);
    }
}
