//! Calculus of a map `φ: (X, g) → (Y, h)` in coordinates.
//!
//! Target quantities (`h_ij`, `Γ^k_ij`) are differentiated in target
//! coordinates and then evaluated at `y = φ(x)`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::geometry::{check_same_chart, check_variables, parse_all, tri, Chart, DerivativeTable, LocalGeometry, MetricField};
use crate::linalg;
use crate::tensor::{TensorValue, Variance};

use Variance::{Down, Up};

/// Default relative tolerance for numerical rank.
pub const RANK_TOLERANCE: f64 = 1e-9;
/// Singular values below this are zero regardless of scale.
pub const RANK_FLOOR: f64 = 1e-12;

#[derive(Debug)]
struct TargetInner {
    chart: Chart,
    table: DerivativeTable,
}

/// Riemannian target `(Y, h)`.
#[derive(Debug, Clone)]
pub struct TargetGeometry(Arc<TargetInner>);

impl TargetGeometry {
    /// `lower` lists `h_ij` for `j <= i`, row by row.
    pub fn new(chart: Chart, lower: Vec<Expression>) -> Result<TargetGeometry> {
        let n = chart.dim();
        if lower.len() != n * (n + 1) / 2 {
            return Err(Error::ShapeMismatch(format!(
                "a {n}-dimensional target metric needs {} lower-triangle entries, got {}",
                n * (n + 1) / 2,
                lower.len()
            )));
        }
        for (k, e) in lower.iter().enumerate() {
            check_variables(&chart, e, &format!("target metric entry {k}"))?;
        }
        Ok(TargetGeometry(Arc::new(TargetInner {
            chart,
            table: DerivativeTable::new(lower, n),
        })))
    }

    pub fn from_strings(chart: Chart, lower: &[&str]) -> Result<TargetGeometry> {
        let e = parse_all(&chart, lower)?;
        TargetGeometry::new(chart, e)
    }

    /// Flat `ℝ^n` with the Euclidean metric and unbounded coordinates.
    pub fn euclidean(names: &[&str]) -> Result<TargetGeometry> {
        let chart = Chart::lines(names)?;
        let n = chart.dim();
        let mut lower = Vec::new();
        for i in 0..n {
            for j in 0..=i {
                lower.push(if i == j { "1" } else { "0" });
            }
        }
        TargetGeometry::from_strings(chart, &lower)
    }

    pub fn chart(&self) -> &Chart {
        &self.0.chart
    }

    pub fn dim(&self) -> usize {
        self.0.chart.dim()
    }

    pub fn component(&self, i: usize, j: usize) -> &Expression {
        &self.0.table.base()[tri(i, j)]
    }

    pub fn lower_triangle(&self) -> &[Expression] {
        self.0.table.base()
    }

    /// `h` at `y`, checked positive definite.
    pub fn at(&self, y: &[f64]) -> Result<TensorValue> {
        let n = self.dim();
        let packed = self
            .0
            .table
            .base()
            .iter()
            .map(|e| e.eval(y))
            .collect::<Result<Vec<_>>>()?;
        let h = TensorValue::from_fn(&[n, n], &[Down, Down], |i| packed[tri(i[0], i[1])]);
        if linalg::cholesky(n, h.data()).is_none() {
            return Err(Error::TargetNotRiemannian(y.to_vec()));
        }
        Ok(h)
    }
}

/// `φ: X → Y` given by `n` expressions in source coordinates.
#[derive(Debug, Clone)]
pub struct SmoothMap {
    source: Chart,
    target: TargetGeometry,
    table: Arc<DerivativeTable>,
}

impl SmoothMap {
    pub fn new(source: Chart, target: TargetGeometry, components: Vec<Expression>) -> Result<SmoothMap> {
        if components.len() != target.dim() {
            return Err(Error::ShapeMismatch(format!(
                "{} map components for a {}-dimensional target",
                components.len(),
                target.dim()
            )));
        }
        for (k, e) in components.iter().enumerate() {
            check_variables(&source, e, &format!("map component {k}"))?;
        }
        let m = source.dim();
        Ok(SmoothMap {
            source,
            target,
            table: Arc::new(DerivativeTable::new(components, m)),
        })
    }

    pub fn from_strings(source: Chart, target: TargetGeometry, components: &[&str]) -> Result<SmoothMap> {
        let c = parse_all(&source, components)?;
        SmoothMap::new(source, target, c)
    }

    /// The constant map to `y0`.
    pub fn constant(source: Chart, target: TargetGeometry, y0: &[f64]) -> Result<SmoothMap> {
        let c = y0
            .iter()
            .map(|y| Expression::constant(*y, source.names()))
            .collect();
        SmoothMap::new(source, target, c)
    }

    pub fn source(&self) -> &Chart {
        &self.source
    }

    pub fn target(&self) -> &TargetGeometry {
        &self.target
    }

    pub fn components(&self) -> &[Expression] {
        self.table.base()
    }

    pub fn at(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.components().iter().map(|e| e.eval(p)).collect()
    }

    /// Jet of `φ` at `p` together with target data at `φ(p)`.
    pub fn jet(&self, p: &[f64], order: usize) -> Result<MapJet> {
        let m = self.source.dim();
        if p.len() != m {
            return Err(Error::PointDimension {
                expected: m,
                got: p.len(),
            });
        }
        let n = self.target.dim();
        let j = self.table.jet(p, order.clamp(1, 3))?;
        let y = j.v;
        let tc = self.target.chart();
        if !tc.contains(&y) {
            return Err(Error::Invalid(format!(
                "image {y:?} of {p:?} lies outside the target chart box"
            )));
        }
        let h = self.target.at(&y)?;
        let hinv = linalg::inverse(n, h.data()).map_err(|det| Error::SingularMetric {
            point: y.clone(),
            det,
        })?;
        let hj = self.target.0.table.jet(&y, 1)?;
        // dh[(k*n + i)*n + j] = ∂_k h_ij
        let mut dh = vec![0.0; n * n * n];
        for k in 0..n {
            for i in 0..n {
                for jj in 0..n {
                    dh[(k * n + i) * n + jj] = hj.d1[tri(i, jj) * n + k];
                }
            }
        }
        let mut gamma_h = vec![0.0; n * n * n];
        for k in 0..n {
            for i in 0..n {
                for jj in 0..n {
                    let mut s = 0.0;
                    for l in 0..n {
                        s += hinv[k * n + l]
                            * (dh[(i * n + l) * n + jj] + dh[(jj * n + l) * n + i] - dh[(l * n + i) * n + jj]);
                    }
                    gamma_h[(k * n + i) * n + jj] = 0.5 * s;
                }
            }
        }
        Ok(MapJet {
            m,
            n,
            y,
            dphi: j.d1,
            ddphi: j.d2,
            h: h.into_data(),
            dh,
            gamma_h,
        })
    }
}

/// Pointwise data of a map: `φ(p)`, its partials, and target data at `φ(p)`.
#[derive(Debug, Clone)]
pub struct MapJet {
    m: usize,
    n: usize,
    y: Vec<f64>,
    /// `dphi[i*m + a] = ∂_a φ^i`
    dphi: Vec<f64>,
    /// `ddphi[(i*m + a)*m + b] = ∂_a ∂_b φ^i`
    ddphi: Vec<f64>,
    h: Vec<f64>,
    dh: Vec<f64>,
    /// `gamma_h[(k*n + i)*n + j] = Γ^k_ij` of `h` at `φ(p)`
    gamma_h: Vec<f64>,
}

impl MapJet {
    pub fn image(&self) -> &[f64] {
        &self.y
    }

    /// `∂_a φ^i` with slots `[i, a]`.
    pub fn differential(&self) -> TensorValue {
        TensorValue::matrix(self.n, self.m, [Up, Down], self.dphi.clone())
    }

    pub fn target_metric(&self) -> TensorValue {
        TensorValue::matrix(self.n, self.n, [Down, Down], self.h.clone())
    }

    /// `(φ*h)_ab = ∂_a φ^i ∂_b φ^j h_ij`.
    pub fn pullback(&self) -> TensorValue {
        let (m, n) = (self.m, self.n);
        let mut f = vec![0.0; m * m];
        for a in 0..m {
            for b in 0..m {
                let mut s = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        s += self.dphi[i * m + a] * self.dphi[j * m + b] * self.h[i * n + j];
                    }
                }
                f[a * m + b] = s;
            }
        }
        TensorValue::matrix(m, m, [Down, Down], f)
    }

    /// `∂_c (φ*h)_ab` with slots `[c, a, b]`; needs order 2.
    fn pullback_partials(&self) -> Vec<f64> {
        let (m, n) = (self.m, self.n);
        let mut out = vec![0.0; m * m * m];
        for c in 0..m {
            for a in 0..m {
                for b in 0..m {
                    let mut s = 0.0;
                    for i in 0..n {
                        for j in 0..n {
                            let hij = self.h[i * n + j];
                            s += self.ddphi[(i * m + c) * m + a] * self.dphi[j * m + b] * hij
                                + self.dphi[i * m + a] * self.ddphi[(j * m + c) * m + b] * hij;
                            let mut dhij = 0.0;
                            for k in 0..n {
                                dhij += self.dh[(k * n + i) * n + j] * self.dphi[k * m + c];
                            }
                            s += self.dphi[i * m + a] * self.dphi[j * m + b] * dhij;
                        }
                    }
                    out[(c * m + a) * m + b] = s;
                }
            }
        }
        out
    }

    /// `∇_a ∂_b φ^k` with slots `[k, a, b]`.
    pub fn second_fundamental_form(&self, geo: &LocalGeometry) -> TensorValue {
        let (m, n) = (self.m, self.n);
        let gamma = geo.gamma();
        let mut out = vec![0.0; n * m * m];
        for k in 0..n {
            for a in 0..m {
                for b in 0..m {
                    let mut s = self.ddphi[(k * m + a) * m + b];
                    for c in 0..m {
                        s -= gamma[(c * m + a) * m + b] * self.dphi[k * m + c];
                    }
                    for i in 0..n {
                        for j in 0..n {
                            s += self.gamma_h[(k * n + i) * n + j]
                                * self.dphi[i * m + a]
                                * self.dphi[j * m + b];
                        }
                    }
                    out[(k * m + a) * m + b] = s;
                }
            }
        }
        TensorValue::from_vec(&[n, m, m], &[Up, Down, Down], out).unwrap()
    }

    /// `τ^k = g^ab ∇_a ∂_b φ^k`.
    pub fn tension(&self, geo: &LocalGeometry) -> TensorValue {
        let (m, n) = (self.m, self.n);
        let sff = self.second_fundamental_form(geo);
        let ginv = geo.ginv();
        let t = (0..n)
            .map(|k| {
                (0..m * m)
                    .map(|ab| ginv[ab] * sff.data()[k * m * m + ab])
                    .sum()
            })
            .collect();
        TensorValue::vector(t, Up)
    }

    /// `e = ½ g^ab (φ*h)_ab`.
    pub fn energy_density(&self, geo: &LocalGeometry) -> f64 {
        let f = self.pullback();
        0.5 * geo
            .ginv()
            .iter()
            .zip(f.data())
            .map(|(a, b)| a * b)
            .sum::<f64>()
    }

    /// `T = φ*h − e g`.
    pub fn energy_momentum(&self, geo: &LocalGeometry) -> TensorValue {
        let e = self.energy_density(geo);
        let mut t = self.pullback();
        for (x, g) in t.data_mut().iter_mut().zip(geo.g()) {
            *x -= e * g;
        }
        t
    }

    /// `(∇^b T_ab, h_ij ∂_a φ^i τ^j)`; the two agree for every map.
    pub fn stress_divergence(&self, geo: &LocalGeometry) -> (TensorValue, TensorValue) {
        let (m, n) = (self.m, self.n);
        let f = self.pullback();
        let df = self.pullback_partials();
        let ginv = geo.ginv();
        let dginv = geo.dginv();
        let e = self.energy_density(geo);
        let t = self.energy_momentum(geo);
        let mut dt = vec![0.0; m * m * m];
        for c in 0..m {
            let mut de = 0.0;
            for k in 0..m * m {
                de += dginv[c * m * m + k] * f.data()[k] + ginv[k] * df[c * m * m + k];
            }
            de *= 0.5;
            for k in 0..m * m {
                dt[c * m * m + k] = df[c * m * m + k] - de * geo.g()[k] - e * geo.dg()[c * m * m + k];
            }
        }
        let partials = TensorValue::from_vec(&[m, m, m], &[Down; 3], dt).unwrap();
        let nabla = geo
            .covariant(&t, &partials)
            .expect("stress tensor jets share the source dimension");
        let lhs = crate::geometry::divergence_from_covariant(geo, &nabla);

        let tau = self.tension(geo);
        let rhs = (0..m)
            .map(|a| {
                let mut s = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        s += self.h[i * n + j] * self.dphi[i * m + a] * tau.data()[j];
                    }
                }
                s
            })
            .collect();
        (lhs, TensorValue::vector(rhs, Down))
    }

    /// Numerical rank of `dφ` after orthonormalizing the target with `h`.
    pub fn rank(&self, tol: f64) -> usize {
        let (m, n) = (self.m, self.n);
        let l = linalg::cholesky(n, &self.h).expect("target metric checked positive definite");
        // Lᵀ dφ has singular values of dφ measured in h.
        let mut a = vec![0.0; n * m];
        for r in 0..n {
            for c in 0..m {
                a[r * m + c] = (0..n).map(|k| l[k * n + r] * self.dphi[k * m + c]).sum();
            }
        }
        linalg::count_above(&linalg::singular_values(n, m, &a), tol, RANK_FLOOR)
    }

    /// `h_ij ∂_a φ^i ∂_b φ^j`-style product `h(dφ·u, dφ·w)` for source vectors.
    pub fn pushforward_product(&self, u: &[f64], w: &[f64]) -> f64 {
        let pu = self.pushforward(u);
        let pw = self.pushforward(w);
        let n = self.n;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += self.h[i * n + j] * pu[i] * pw[j];
            }
        }
        s
    }

    /// `φ_* u = ∂_a φ^i u^a`.
    pub fn pushforward(&self, u: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.m).map(|a| self.dphi[i * self.m + a] * u[a]).sum())
            .collect()
    }

    pub(crate) fn dphi(&self) -> &[f64] {
        &self.dphi
    }

    pub(crate) fn h(&self) -> &[f64] {
        &self.h
    }

    pub(crate) fn dims(&self) -> (usize, usize) {
        (self.m, self.n)
    }
}

/// Map and source metric evaluated together at one point.
#[derive(Debug, Clone)]
pub struct MapPoint {
    pub geo: LocalGeometry,
    pub jet: MapJet,
}

impl MapPoint {
    pub fn at(phi: &SmoothMap, g: &MetricField, p: &[f64], order: usize) -> Result<MapPoint> {
        check_same_chart(phi.source(), g.chart())?;
        let geo = LocalGeometry::at(g, p, order)?;
        let jet = phi.jet(p, 2)?;
        Ok(MapPoint { geo, jet })
    }
}

pub fn differential(phi: &SmoothMap, p: &[f64]) -> Result<TensorValue> {
    Ok(phi.jet(p, 1)?.differential())
}

pub fn pullback_metric(phi: &SmoothMap, p: &[f64]) -> Result<TensorValue> {
    Ok(phi.jet(p, 1)?.pullback())
}

pub fn energy_density(phi: &SmoothMap, g: &MetricField, p: &[f64]) -> Result<f64> {
    let mp = MapPoint::at(phi, g, p, 1)?;
    Ok(mp.jet.energy_density(&mp.geo))
}

pub fn second_fundamental_form(phi: &SmoothMap, g: &MetricField, p: &[f64]) -> Result<TensorValue> {
    let mp = MapPoint::at(phi, g, p, 1)?;
    Ok(mp.jet.second_fundamental_form(&mp.geo))
}

pub fn tension_field(phi: &SmoothMap, g: &MetricField, p: &[f64]) -> Result<TensorValue> {
    let mp = MapPoint::at(phi, g, p, 1)?;
    Ok(mp.jet.tension(&mp.geo))
}

pub fn energy_momentum(phi: &SmoothMap, g: &MetricField, p: &[f64]) -> Result<TensorValue> {
    let mp = MapPoint::at(phi, g, p, 1)?;
    Ok(mp.jet.energy_momentum(&mp.geo))
}

pub fn stress_divergence_residual(
    phi: &SmoothMap,
    g: &MetricField,
    p: &[f64],
) -> Result<(TensorValue, TensorValue)> {
    let mp = MapPoint::at(phi, g, p, 1)?;
    Ok(mp.jet.stress_divergence(&mp.geo))
}

pub fn map_rank(phi: &SmoothMap, p: &[f64], tol: f64) -> Result<usize> {
    Ok(phi.jet(p, 1)?.rank(tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Coordinate;

    fn minkowski2() -> MetricField {
        let chart = Chart::cube(&["t", "x"], -2.0, 2.0).unwrap();
        MetricField::diagonal(chart, &["1", "-1"], vec![1, -1]).unwrap()
    }

    fn line() -> TargetGeometry {
        TargetGeometry::euclidean(&["y"]).unwrap()
    }

    #[test]
    fn linear_map_on_minkowski() {
        let g = minkowski2();
        let phi = SmoothMap::from_strings(g.chart().clone(), line(), &["t + 2*x"]).unwrap();
        let p = [0.3, -0.4];
        assert_eq!(pullback_metric(&phi, &p).unwrap().data(), &[1.0, 2.0, 2.0, 4.0]);
        assert!((energy_density(&phi, &g, &p).unwrap() + 1.5).abs() < 1e-15);
        let t = energy_momentum(&phi, &g, &p).unwrap();
        for (a, b) in t.data().iter().zip([2.5, 2.0, 2.0, 2.5]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn traveling_wave_is_a_wave_map() {
        let g = minkowski2();
        let phi = SmoothMap::from_strings(g.chart().clone(), line(), &["sin(t - x)"]).unwrap();
        assert_eq!(differential(&phi, &[0.0, 0.0]).unwrap().data(), &[1.0, -1.0]);
        for p in [[0.1, 0.7], [-1.2, 0.4]] {
            assert!(tension_field(&phi, &g, &p).unwrap().max_abs() < 1e-14);
            let (lhs, _) = stress_divergence_residual(&phi, &g, &p).unwrap();
            assert!(lhs.max_abs() < 1e-14);
        }
    }

    #[test]
    fn equatorial_great_circle_is_geodesic() {
        let src = Chart::new(vec![Coordinate::angle("s")]).unwrap();
        let g = MetricField::diagonal(src.clone(), &["1"], vec![1]).unwrap();
        let s2 = Chart::new(vec![Coordinate::polar("th"), Coordinate::line("ph")]).unwrap();
        let h = TargetGeometry::from_strings(s2, &["1", "0", "sin(th)^2"]).unwrap();
        let phi = SmoothMap::from_strings(src, h, &["pi/2", "s"]).unwrap();
        assert!(second_fundamental_form(&phi, &g, &[0.8]).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn laplacian_of_square() {
        let chart = Chart::cube(&["x", "y"], -1.0, 1.0).unwrap();
        let g = MetricField::diagonal(chart.clone(), &["1", "1"], vec![1, 1]).unwrap();
        let phi = SmoothMap::from_strings(chart, line(), &["x^2"]).unwrap();
        assert_eq!(tension_field(&phi, &g, &[0.3, 0.2]).unwrap().data(), &[2.0]);
    }

    #[test]
    fn rank_examples() {
        let chart = Chart::cube(&["x", "y"], -1.0, 1.0).unwrap();
        let plane = TargetGeometry::euclidean(&["a", "b"]).unwrap();
        let id = SmoothMap::from_strings(chart.clone(), plane.clone(), &["x", "y"]).unwrap();
        let c = SmoothMap::constant(chart, plane, &[1.0, 2.0]).unwrap();
        assert_eq!(map_rank(&id, &[0.1, 0.2], RANK_TOLERANCE).unwrap(), 2);
        assert_eq!(map_rank(&c, &[0.1, 0.2], RANK_TOLERANCE).unwrap(), 0);
    }

    #[test]
    fn target_must_be_riemannian() {
        let chart = Chart::lines(&["y"]).unwrap();
        let h = TargetGeometry::from_strings(chart, &["-1"]).unwrap();
        let src = Chart::cube(&["x"], -1.0, 1.0).unwrap();
        let phi = SmoothMap::from_strings(src, h, &["x"]).unwrap();
        assert!(matches!(phi.jet(&[0.0], 1), Err(Error::TargetNotRiemannian(_))));
    }
}
