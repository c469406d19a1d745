//! Curvature jets at a single point.
//!
//! Every quantity is assembled from exact partials of `g_ab` with explicit
//! index loops. Flat arrays use row-major layouts documented on each field.

use super::metric::{tri, MetricField};
use crate::error::{Error, Result};
use crate::linalg;
use crate::tensor::{increment, TensorValue, Variance};

use Variance::{Down, Up};

/// Relative threshold below which `|det g|` counts as singular.
pub const SINGULAR_THRESHOLD: f64 = 1e-13;

/// Geometry of `(X, g)` at one point up to a chosen derivative order.
///
/// Order 1 gives Christoffel symbols; order 2 adds Riemann and Ricci;
/// order 3 adds first derivatives of Ricci.
#[derive(Debug, Clone)]
pub struct LocalGeometry {
    m: usize,
    order: usize,
    point: Vec<f64>,
    /// `g[a*m+b]`
    g: Vec<f64>,
    /// `ginv[a*m+b]`
    ginv: Vec<f64>,
    /// `dg[(c*m+a)*m+b] = ∂_c g_ab`
    dg: Vec<f64>,
    /// `dginv[(c*m+a)*m+b] = ∂_c g^ab`
    dginv: Vec<f64>,
    /// `gamma[(c*m+a)*m+b] = Γ^c_ab`
    gamma: Vec<f64>,
    /// `dgamma[e][c][a][b] = ∂_e Γ^c_ab`
    dgamma: Vec<f64>,
    /// `riem_up[d][c][a][b] = R^d_cab`
    riem_up: Vec<f64>,
    /// `ric[a*m+b]`
    ric: Vec<f64>,
    scalar: f64,
    /// `dric[(f*m+a)*m+b] = ∂_f R_ab`
    dric: Vec<f64>,
}

fn scale_of(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

impl LocalGeometry {
    pub fn at(g: &MetricField, p: &[f64], order: usize) -> Result<LocalGeometry> {
        let m = g.dim();
        if p.len() != m {
            return Err(Error::PointDimension {
                expected: m,
                got: p.len(),
            });
        }
        let order = order.clamp(1, 3);
        let jet = g.table().jet(p, order)?;
        let mut gm = vec![0.0; m * m];
        for a in 0..m {
            for b in 0..m {
                gm[a * m + b] = jet.v[tri(a, b)];
            }
        }
        let scale = scale_of(&gm);
        let ginv = match linalg::inverse(m, &gm) {
            Ok(inv) if scale > 0.0 => inv,
            Ok(_) | Err(_) => {
                return Err(Error::SingularMetric {
                    point: p.to_vec(),
                    det: linalg::determinant(m, &gm).abs(),
                })
            }
        };
        let det = linalg::determinant(m, &gm).abs();
        if det < SINGULAR_THRESHOLD * scale.powi(m as i32) {
            return Err(Error::SingularMetric {
                point: p.to_vec(),
                det,
            });
        }

        let i2 = |a: usize, b: usize| a * m + b;
        let i3 = |a: usize, b: usize, c: usize| (a * m + b) * m + c;
        let i4 = |a: usize, b: usize, c: usize, d: usize| ((a * m + b) * m + c) * m + d;
        let i5 = |a: usize, b: usize, c: usize, d: usize, e: usize| {
            (((a * m + b) * m + c) * m + d) * m + e
        };

        // Unpack packed-triangle jets into full index layouts.
        let mut dg = vec![0.0; m * m * m];
        for c in 0..m {
            for a in 0..m {
                for b in 0..m {
                    dg[i3(c, a, b)] = jet.d1[tri(a, b) * m + c];
                }
            }
        }
        let mut ddg = Vec::new();
        if order >= 2 {
            ddg = vec![0.0; m.pow(4)];
            for d in 0..m {
                for c in 0..m {
                    for a in 0..m {
                        for b in 0..m {
                            ddg[i4(d, c, a, b)] = jet.d2[(tri(a, b) * m + c) * m + d];
                        }
                    }
                }
            }
        }
        let mut dddg = Vec::new();
        if order >= 3 {
            dddg = vec![0.0; m.pow(5)];
            for e in 0..m {
                for d in 0..m {
                    for c in 0..m {
                        for a in 0..m {
                            for b in 0..m {
                                dddg[i5(e, d, c, a, b)] =
                                    jet.d3[((tri(a, b) * m + c) * m + d) * m + e];
                            }
                        }
                    }
                }
            }
        }

        // ∂g^{-1} = -g^{-1} (∂g) g^{-1}
        let mut dginv = vec![0.0; m * m * m];
        for c in 0..m {
            for a in 0..m {
                for b in 0..m {
                    let mut s = 0.0;
                    for p_ in 0..m {
                        for q in 0..m {
                            s += ginv[i2(a, p_)] * dg[i3(c, p_, q)] * ginv[i2(q, b)];
                        }
                    }
                    dginv[i3(c, a, b)] = -s;
                }
            }
        }
        let mut ddginv = Vec::new();
        if order >= 3 {
            ddginv = vec![0.0; m.pow(4)];
            for f in 0..m {
                for e in 0..m {
                    for a in 0..m {
                        for b in 0..m {
                            let mut s = 0.0;
                            for p_ in 0..m {
                                for q in 0..m {
                                    s += dginv[i3(f, a, p_)] * dg[i3(e, p_, q)] * ginv[i2(q, b)]
                                        + ginv[i2(a, p_)] * ddg[i4(f, e, p_, q)] * ginv[i2(q, b)]
                                        + ginv[i2(a, p_)] * dg[i3(e, p_, q)] * dginv[i3(f, q, b)];
                                }
                            }
                            ddginv[i4(f, e, a, b)] = -s;
                        }
                    }
                }
            }
        }

        // First-kind symbols Γ_dab = ½(∂_a g_db + ∂_b g_da − ∂_d g_ab) and their partials.
        let mut gf = vec![0.0; m * m * m];
        for d in 0..m {
            for a in 0..m {
                for b in 0..m {
                    gf[i3(d, a, b)] = 0.5 * (dg[i3(a, d, b)] + dg[i3(b, d, a)] - dg[i3(d, a, b)]);
                }
            }
        }
        let mut dgf = Vec::new();
        if order >= 2 {
            dgf = vec![0.0; m.pow(4)];
            for e in 0..m {
                for d in 0..m {
                    for a in 0..m {
                        for b in 0..m {
                            dgf[i4(e, d, a, b)] = 0.5
                                * (ddg[i4(e, a, d, b)] + ddg[i4(e, b, d, a)] - ddg[i4(e, d, a, b)]);
                        }
                    }
                }
            }
        }
        let mut ddgf = Vec::new();
        if order >= 3 {
            ddgf = vec![0.0; m.pow(5)];
            for f in 0..m {
                for e in 0..m {
                    for d in 0..m {
                        for a in 0..m {
                            for b in 0..m {
                                ddgf[i5(f, e, d, a, b)] = 0.5
                                    * (dddg[i5(f, e, a, d, b)] + dddg[i5(f, e, b, d, a)]
                                        - dddg[i5(f, e, d, a, b)]);
                            }
                        }
                    }
                }
            }
        }

        let mut gamma = vec![0.0; m * m * m];
        for c in 0..m {
            for a in 0..m {
                for b in 0..m {
                    gamma[i3(c, a, b)] = (0..m).map(|d| ginv[i2(c, d)] * gf[i3(d, a, b)]).sum();
                }
            }
        }

        let mut geo = LocalGeometry {
            m,
            order,
            point: p.to_vec(),
            g: gm,
            ginv,
            dg,
            dginv,
            gamma,
            dgamma: Vec::new(),
            riem_up: Vec::new(),
            ric: Vec::new(),
            scalar: 0.0,
            dric: Vec::new(),
        };
        if order < 2 {
            return Ok(geo);
        }

        let mut dgamma = vec![0.0; m.pow(4)];
        for e in 0..m {
            for c in 0..m {
                for a in 0..m {
                    for b in 0..m {
                        let mut s = 0.0;
                        for d in 0..m {
                            s += geo.dginv[i3(e, c, d)] * gf[i3(d, a, b)]
                                + geo.ginv[i2(c, d)] * dgf[i4(e, d, a, b)];
                        }
                        dgamma[i4(e, c, a, b)] = s;
                    }
                }
            }
        }

        let gamma = &geo.gamma;
        let mut riem_up = vec![0.0; m.pow(4)];
        for d in 0..m {
            for c in 0..m {
                for a in 0..m {
                    for b in 0..m {
                        let mut s = dgamma[i4(a, d, b, c)] - dgamma[i4(b, d, a, c)];
                        for e in 0..m {
                            s += gamma[i3(d, a, e)] * gamma[i3(e, b, c)]
                                - gamma[i3(d, b, e)] * gamma[i3(e, a, c)];
                        }
                        riem_up[i4(d, c, a, b)] = s;
                    }
                }
            }
        }
        let mut ric = vec![0.0; m * m];
        for a in 0..m {
            for b in 0..m {
                ric[i2(a, b)] = (0..m).map(|c| riem_up[i4(c, a, c, b)]).sum();
            }
        }
        let scalar = (0..m * m).map(|k| geo.ginv[k] * ric[k]).sum();

        if order >= 3 {
            let mut ddgamma = vec![0.0; m.pow(5)];
            for f in 0..m {
                for e in 0..m {
                    for c in 0..m {
                        for a in 0..m {
                            for b in 0..m {
                                let mut s = 0.0;
                                for d in 0..m {
                                    s += ddginv[i4(f, e, c, d)] * gf[i3(d, a, b)]
                                        + geo.dginv[i3(e, c, d)] * dgf[i4(f, d, a, b)]
                                        + geo.dginv[i3(f, c, d)] * dgf[i4(e, d, a, b)]
                                        + geo.ginv[i2(c, d)] * ddgf[i5(f, e, d, a, b)];
                                }
                                ddgamma[i5(f, e, c, a, b)] = s;
                            }
                        }
                    }
                }
            }
            // ∂_f R_ab = Σ_c ∂_f R^c_{acb}
            let mut dric = vec![0.0; m * m * m];
            for f in 0..m {
                for a in 0..m {
                    for b in 0..m {
                        let mut s = 0.0;
                        for c in 0..m {
                            // R^c_{a c b} with (d, c, a, b) -> (c, a, c, b)
                            s += ddgamma[i5(f, c, c, b, a)] - ddgamma[i5(f, b, c, c, a)];
                            for e in 0..m {
                                s += dgamma[i4(f, c, c, e)] * gamma[i3(e, b, a)]
                                    + gamma[i3(c, c, e)] * dgamma[i4(f, e, b, a)]
                                    - dgamma[i4(f, c, b, e)] * gamma[i3(e, c, a)]
                                    - gamma[i3(c, b, e)] * dgamma[i4(f, e, c, a)];
                            }
                        }
                        dric[i3(f, a, b)] = s;
                    }
                }
            }
            geo.dric = dric;
        }
        geo.dgamma = dgamma;
        geo.riem_up = riem_up;
        geo.ric = ric;
        geo.scalar = scalar;
        Ok(geo)
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn point(&self) -> &[f64] {
        &self.point
    }

    fn need(&self, order: usize) {
        assert!(
            self.order >= order,
            "local geometry built at order {} but order {order} was requested",
            self.order
        );
    }

    pub fn metric(&self) -> TensorValue {
        TensorValue::matrix(self.m, self.m, [Down, Down], self.g.clone())
    }

    pub fn inverse(&self) -> TensorValue {
        TensorValue::matrix(self.m, self.m, [Up, Up], self.ginv.clone())
    }

    pub(crate) fn g(&self) -> &[f64] {
        &self.g
    }

    pub(crate) fn ginv(&self) -> &[f64] {
        &self.ginv
    }

    pub(crate) fn dg(&self) -> &[f64] {
        &self.dg
    }

    pub(crate) fn dginv(&self) -> &[f64] {
        &self.dginv
    }

    pub(crate) fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    /// `Γ^c_ab` with slots `[c, a, b]`.
    pub fn christoffel(&self) -> TensorValue {
        let m = self.m;
        TensorValue::from_vec(&[m, m, m], &[Up, Down, Down], self.gamma.clone()).unwrap()
    }

    /// `R^d_cab`.
    pub fn riemann_up(&self) -> TensorValue {
        self.need(2);
        let m = self.m;
        TensorValue::from_vec(&[m; 4], &[Up, Down, Down, Down], self.riem_up.clone()).unwrap()
    }

    /// `R_dcab = g_de R^e_cab`.
    pub fn riemann(&self) -> TensorValue {
        self.need(2);
        let m = self.m;
        let mut out = vec![0.0; m.pow(4)];
        let mut k = 0;
        for d in 0..m {
            for rest in 0..m * m * m {
                out[k] = (0..m)
                    .map(|e| self.g[d * m + e] * self.riem_up[e * m * m * m + rest])
                    .sum();
                k += 1;
            }
        }
        TensorValue::from_vec(&[m; 4], &[Down; 4], out).unwrap()
    }

    /// `R_ab = R^c_acb`.
    pub fn ricci(&self) -> TensorValue {
        self.need(2);
        TensorValue::matrix(self.m, self.m, [Down, Down], self.ric.clone())
    }

    pub fn scalar_curvature(&self) -> f64 {
        self.need(2);
        self.scalar
    }

    /// `G_ab = R_ab − ½ R g_ab`.
    pub fn einstein(&self) -> TensorValue {
        self.need(2);
        let data = self
            .ric
            .iter()
            .zip(&self.g)
            .map(|(r, g)| r - 0.5 * self.scalar * g)
            .collect();
        TensorValue::matrix(self.m, self.m, [Down, Down], data)
    }

    /// `∂_f R_ab` with slots `[f, a, b]`.
    pub fn ricci_partials(&self) -> TensorValue {
        self.need(3);
        let m = self.m;
        TensorValue::from_vec(&[m, m, m], &[Down; 3], self.dric.clone()).unwrap()
    }

    /// `∂_f R`.
    pub fn scalar_gradient(&self) -> Vec<f64> {
        self.need(3);
        let m = self.m;
        (0..m)
            .map(|f| {
                let mut s = 0.0;
                for k in 0..m * m {
                    s += self.dginv[f * m * m + k] * self.ric[k] + self.ginv[k] * self.dric[f * m * m + k];
                }
                s
            })
            .collect()
    }

    /// `∇_f R_ab` with slots `[f, a, b]`.
    pub fn ricci_covariant(&self) -> TensorValue {
        self.covariant(&self.ricci(), &self.ricci_partials())
            .expect("ricci jets have matching shapes")
    }

    /// `∇_f G_ab` with slots `[f, a, b]`.
    pub fn einstein_covariant(&self) -> TensorValue {
        let m = self.m;
        let dr = self.scalar_gradient();
        let mut dgt = self.dric.clone();
        for f in 0..m {
            for k in 0..m * m {
                dgt[f * m * m + k] -= 0.5 * (dr[f] * self.g[k] + self.scalar * self.dg[f * m * m + k]);
            }
        }
        let partials = TensorValue::from_vec(&[m, m, m], &[Down; 3], dgt).unwrap();
        self.covariant(&self.einstein(), &partials)
            .expect("einstein jets have matching shapes")
    }

    /// Covariant derivative from a value and its partials (derivative slot first).
    ///
    /// Output slot 0 is the derivative index.
    pub fn covariant(&self, value: &TensorValue, partials: &TensorValue) -> Result<TensorValue> {
        let m = self.m;
        let rank = value.rank();
        if value.shape().iter().any(|&n| n != m) {
            return Err(Error::ShapeMismatch(format!(
                "tensor shape {:?} does not match dimension {m}",
                value.shape()
            )));
        }
        let mut dshape = vec![m];
        dshape.extend(value.shape());
        if partials.shape() != dshape.as_slice() {
            return Err(Error::ShapeMismatch(format!(
                "partials shape {:?}, expected {dshape:?}",
                partials.shape()
            )));
        }
        let mut dvar = vec![Down];
        dvar.extend(value.variance());
        let var = value.variance().to_vec();
        let mut out = partials.clone();
        let mut idx = vec![0usize; rank + 1];
        let mut inner = vec![0usize; rank];
        for k in 0..out.data().len() {
            let c = idx[0];
            let mut s = 0.0;
            for slot in 0..rank {
                inner.copy_from_slice(&idx[1..]);
                let i = idx[slot + 1];
                for e in 0..m {
                    inner[slot] = e;
                    let t = value.get(&inner);
                    s += match var[slot] {
                        Up => self.gamma[(i * m + c) * m + e] * t,
                        Down => -self.gamma[(e * m + c) * m + i] * t,
                    };
                }
            }
            out.data_mut()[k] += s;
            increment(&mut idx, &dshape);
        }
        TensorValue::from_vec(&dshape, &dvar, out.into_data())
    }

    /// Sectional curvature of the coordinate plane `(a, b)`.
    pub fn sectional(&self, a: usize, b: usize) -> f64 {
        let r = self.riemann();
        let m = self.m;
        let denom = self.g[a * m + a] * self.g[b * m + b] - self.g[a * m + b].powi(2);
        r.get(&[a, b, a, b]) / denom
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::chart::{Chart, Coordinate};

    fn sphere(r: f64) -> MetricField {
        let chart = Chart::new(vec![Coordinate::polar("th"), Coordinate::angle("ph")]).unwrap();
        let r2 = format!("{}", r * r);
        let s = format!("{r2}*sin(th)^2");
        MetricField::diagonal(chart, &[&r2, &s], vec![1, 1]).unwrap()
    }

    #[test]
    fn sphere_christoffels_at_quarter_pi() {
        let geo = LocalGeometry::at(&sphere(1.0), &[std::f64::consts::FRAC_PI_4, 0.3], 1).unwrap();
        let gam = geo.christoffel();
        assert!((gam.get(&[0, 1, 1]) + 0.5).abs() < 1e-14);
        assert!((gam.get(&[1, 0, 1]) - 1.0).abs() < 1e-14);
        assert!((gam.get(&[1, 1, 0]) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn sphere_curvature() {
        for r in [0.5, 1.0, 3.0] {
            let th: f64 = 1.1;
            let geo = LocalGeometry::at(&sphere(r), &[th, 2.0], 2).unwrap();
            assert!((geo.scalar_curvature() - 2.0 / (r * r)).abs() < 1e-12);
            let riem = geo.riemann();
            assert!((riem.get(&[0, 1, 0, 1]) - r * r * th.sin().powi(2)).abs() < 1e-12);
            let ric = geo.ricci();
            assert!((ric.get(&[0, 0]) - 1.0).abs() < 1e-12);
            assert!((ric.get(&[1, 1]) - th.sin().powi(2)).abs() < 1e-12);
        }
    }

    #[test]
    fn conformal_plane_christoffels() {
        let chart = Chart::cube(&["x0", "x1"], -1.0, 1.0).unwrap();
        let g = MetricField::diagonal(chart, &["exp(2*x0)", "exp(2*x0)"], vec![1, 1]).unwrap();
        let gam = LocalGeometry::at(&g, &[0.4, -0.2], 1).unwrap().christoffel();
        assert!((gam.get(&[0, 0, 0]) - 1.0).abs() < 1e-14);
        assert!((gam.get(&[0, 1, 1]) + 1.0).abs() < 1e-14);
        assert!((gam.get(&[1, 0, 1]) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn singular_metric_is_reported() {
        let chart = Chart::cube(&["x", "y"], -1.0, 1.0).unwrap();
        let g = MetricField::from_strings(chart, &["1", "1", "1"], vec![1, -1]).unwrap();
        assert!(matches!(
            LocalGeometry::at(&g, &[0.0, 0.0], 1),
            Err(Error::SingularMetric { .. })
        ));
    }

    #[test]
    fn covariant_derivative_of_metric_vanishes() {
        let chart = Chart::cube(&["x", "y", "z"], 0.5, 1.5).unwrap();
        let g = MetricField::from_strings(
            chart,
            &["1 + x^2", "x*y", "2 + sin(y)", "0.1*z", "0", "3 + x*z"],
            vec![1, 1, 1],
        )
        .unwrap();
        let geo = LocalGeometry::at(&g, &[0.7, 1.1, 0.9], 1).unwrap();
        let field = crate::geometry::metric::TensorField::from_metric(&g);
        let (v, d) = field.jet(&[0.7, 1.1, 0.9]).unwrap();
        assert!(geo.covariant(&v, &d).unwrap().max_abs() < 1e-12);
    }
}
