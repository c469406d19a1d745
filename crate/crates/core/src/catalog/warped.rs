//! Products, warped products `'g ⊕ w² ''g`, and quadrature over closed factors.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::geometry::{Chart, CoordKind, LocalGeometry, MetricField};
use crate::tensor::{TensorValue, Variance};

/// Points per axis of the positivity grid for a warping function.
const WARP_GRID: usize = 5;
const WARP_RANDOM: usize = 64;

fn assemble(g1: &MetricField, g2: &MetricField, fiber_scale: Option<&Expression>) -> Result<MetricField> {
    let chart = g1.chart().product(g2.chart())?;
    let (m1, m2) = (g1.dim(), g2.dim());
    let vars = chart.names().clone();
    let first: Vec<usize> = (0..m1).collect();
    let second: Vec<usize> = (m1..m1 + m2).collect();
    let zero = Expression::constant(0.0, &vars);
    let scale = fiber_scale.map(|w| {
        let w = w.rebase(&vars, &first);
        &w * &w
    });
    let m = m1 + m2;
    let mut lower = Vec::with_capacity(m * (m + 1) / 2);
    for a in 0..m {
        for b in 0..=a {
            lower.push(if a < m1 {
                g1.component(a, b).rebase(&vars, &first)
            } else if b < m1 {
                zero.clone()
            } else {
                let e = g2.component(a - m1, b - m1).rebase(&vars, &second);
                match &scale {
                    Some(s) if !e.is_zero() => s * &e,
                    _ => e,
                }
            });
        }
    }
    let mut signature = g1.signature().to_vec();
    signature.extend_from_slice(g2.signature());
    MetricField::new(chart, lower, signature)
}

/// Block-diagonal metric `g1 ⊕ g2` on the product chart.
pub fn product_metric(g1: &MetricField, g2: &MetricField) -> Result<MetricField> {
    assemble(g1, g2, None)
}

/// `g1 ⊕ w² g2` with `w` a function on the first factor.
pub fn warped_product_metric(g1: &MetricField, g2: &MetricField, w: &Expression) -> Result<MetricField> {
    check_warp_variables(g1, w)?;
    check_warp_positive(g1.chart(), w)?;
    assemble(g1, g2, Some(w))
}

fn check_warp_variables(g1: &MetricField, w: &Expression) -> Result<()> {
    if w.variables() != &g1.chart().names()[..] {
        return Err(Error::InvalidVariables(format!(
            "warping function must be written over the first factor's coordinates ({})",
            g1.chart().names().join(", ")
        )));
    }
    Ok(())
}

/// Samples `w` on a cell-centered grid plus seeded random points of the base box.
/// Unbounded coordinates are clipped to `[-10, 10]` for sampling.
fn check_warp_positive(base: &Chart, w: &Expression) -> Result<()> {
    let clipped: Vec<_> = base
        .coordinates()
        .iter()
        .map(|c| {
            let mut c = c.clone();
            c.lo = c.lo.max(-10.0);
            c.hi = c.hi.min(10.0);
            c
        })
        .collect();
    let chart = Chart::new(clipped)?;
    let per_axis = if base.dim() <= 4 { WARP_GRID } else { 2 };
    let mut points = chart.grid_points(per_axis)?;
    points.extend(chart.random_points(WARP_RANDOM, 0x5eed)?);
    for p in points {
        let value = w.eval(&p)?;
        if !(value > 0.0) {
            return Err(Error::NonPositiveWarp { point: p, value });
        }
    }
    Ok(())
}

/// Everything needed to rebuild a warped product and its oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpedProduct {
    pub base: MetricField,
    pub fiber: MetricField,
    /// Warping function over the base coordinates.
    pub warp: Expression,
}

impl WarpedProduct {
    pub fn new(base: MetricField, fiber: MetricField, warp: Expression) -> Result<WarpedProduct> {
        check_warp_variables(&base, &warp)?;
        check_warp_positive(base.chart(), &warp)?;
        Ok(WarpedProduct { base, fiber, warp })
    }

    pub fn metric(&self) -> Result<MetricField> {
        assemble(&self.base, &self.fiber, Some(&self.warp))
    }
}

/// Ricci blocks of a warped product predicted from factor data and `w` alone.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpedRicci {
    /// `'Ric − (''m / w) 'Hess w`
    pub block1: TensorValue,
    /// `''Ric − (w 'Δw + (''m − 1)|'∇w|²) ''g`
    pub block2: TensorValue,
    /// `'R − ''m w⁻¹ 'Δw`
    pub trace1: f64,
    /// `''R − w^(2−''m) 'Δ(w^''m)`
    pub trace2: f64,
}

pub fn warped_ricci_oracle(
    g1: &MetricField,
    g2: &MetricField,
    w: &Expression,
    p: &[f64],
) -> Result<WarpedRicci> {
    check_warp_variables(g1, w)?;
    let (m1, m2) = (g1.dim(), g2.dim());
    if p.len() != m1 + m2 {
        return Err(Error::PointDimension {
            expected: m1 + m2,
            got: p.len(),
        });
    }
    let (x1, x2) = p.split_at(m1);
    let wv = w.eval(x1)?;
    if !(wv > 0.0) {
        return Err(Error::NonPositiveWarp {
            point: x1.to_vec(),
            value: wv,
        });
    }
    let geo1 = LocalGeometry::at(g1, x1, 2)?;
    let geo2 = LocalGeometry::at(g2, x2, 2)?;
    let dw_expr: Vec<Expression> = (0..m1).map(|a| w.diff_index(a)).collect();
    let dw = dw_expr.iter().map(|e| e.eval(x1)).collect::<Result<Vec<_>>>()?;
    let gamma = geo1.christoffel();
    let ginv1 = geo1.inverse();
    let mut hess = vec![0.0; m1 * m1];
    for a in 0..m1 {
        for b in 0..=a {
            let mut h = dw_expr[a].diff_index(b).eval(x1)?;
            for c in 0..m1 {
                h -= gamma.get(&[c, a, b]) * dw[c];
            }
            hess[a * m1 + b] = h;
            hess[b * m1 + a] = h;
        }
    }
    let (mut lap, mut grad_sq) = (0.0, 0.0);
    for a in 0..m1 {
        for b in 0..m1 {
            lap += ginv1.get(&[a, b]) * hess[a * m1 + b];
            grad_sq += ginv1.get(&[a, b]) * dw[a] * dw[b];
        }
    }
    let n2 = m2 as f64;
    let ric1 = geo1.ricci();
    let block1 = TensorValue::matrix(
        m1,
        m1,
        [Variance::Down; 2],
        (0..m1 * m1).map(|k| ric1.data()[k] - n2 / wv * hess[k]).collect(),
    );
    let fiber_coeff = wv * lap + (n2 - 1.0) * grad_sq;
    let ric2 = geo2.ricci();
    let g2v = geo2.metric();
    let block2 = TensorValue::matrix(
        m2,
        m2,
        [Variance::Down; 2],
        (0..m2 * m2)
            .map(|k| ric2.data()[k] - fiber_coeff * g2v.data()[k])
            .collect(),
    );
    Ok(WarpedRicci {
        block1,
        block2,
        trace1: geo1.scalar_curvature() - n2 * lap / wv,
        trace2: geo2.scalar_curvature() - n2 * fiber_coeff,
    })
}

/// Largest deviation between the oracle and the engine's Ricci of the assembled metric,
/// including the off-diagonal blocks, which must vanish.
pub fn warped_decomposition_residual(wp: &WarpedProduct, g: &MetricField, p: &[f64]) -> Result<f64> {
    let oracle = warped_ricci_oracle(&wp.base, &wp.fiber, &wp.warp, p)?;
    let ric = LocalGeometry::at(g, p, 2)?.ricci();
    let m1 = wp.base.dim();
    let m = g.dim();
    let mut worst: f64 = 0.0;
    for a in 0..m {
        for b in 0..m {
            let expected = match (a < m1, b < m1) {
                (true, true) => oracle.block1.get(&[a, b]),
                (false, false) => oracle.block2.get(&[a - m1, b - m1]),
                _ => 0.0,
            };
            worst = worst.max((ric.get(&[a, b]) - expected).abs());
        }
    }
    Ok(worst)
}

/// Nodes and weights for one closed coordinate.
fn rule(kind: CoordKind, name: &str, lo: f64, hi: f64, n: usize) -> Result<Vec<(f64, f64)>> {
    match kind {
        CoordKind::Open => Err(Error::NotClosedFactor(format!(
            "coordinate `{name}` is neither periodic nor a sphere colatitude"
        ))),
        // Offset trapezoid: spectrally accurate for smooth periodic integrands.
        CoordKind::Periodic { period } => Ok((0..n)
            .map(|k| (lo + (k as f64 + 0.5) * period / n as f64, period / n as f64))
            .collect()),
        // Fejér's first rule in cos θ; nodes are the θ midpoints. The weights carry a
        // factor 1/sin θ so the rule integrates G(θ) dθ over the whole of (0, π).
        CoordKind::Polar => {
            let nf = n as f64;
            let nodes: Vec<(f64, f64)> = (1..=n)
                .map(|k| {
                    let th = (2.0 * k as f64 - 1.0) * PI / (2.0 * nf);
                    let s: f64 = (1..=n / 2)
                        .map(|j| {
                            let j = j as f64;
                            (2.0 * j * th).cos() / (4.0 * j * j - 1.0)
                        })
                        .sum();
                    (th, 2.0 / nf * (1.0 - 2.0 * s) / th.sin())
                })
                .collect();
            if nodes[0].0 <= lo || nodes[n - 1].0 >= hi {
                return Err(Error::Invalid(format!(
                    "{n} colatitude nodes reach into the pole bands of `{name}`"
                )));
            }
            Ok(nodes)
        }
    }
}

/// `∫ F √|det g| dx` over a closed chart with `n` nodes per coordinate.
pub fn closed_quadrature<F>(g: &MetricField, n: usize, mut f: F) -> Result<f64>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    if n == 0 {
        return Err(Error::Invalid("quadrature needs at least one node".into()));
    }
    let rules = g
        .chart()
        .coordinates()
        .iter()
        .map(|c| rule(c.kind, &c.name, c.lo, c.hi, n))
        .collect::<Result<Vec<_>>>()?;
    let m = g.dim();
    let mut idx = vec![0usize; m];
    let mut p = vec![0.0; m];
    let mut total = 0.0;
    for _ in 0..n.pow(m as u32) {
        let mut weight = 1.0;
        for (k, r) in rules.iter().enumerate() {
            p[k] = r[idx[k]].0;
            weight *= r[idx[k]].1;
        }
        let gv = g.at(&p)?;
        let det = crate::linalg::determinant(m, gv.data());
        total += weight * f(&p)? * det.abs().sqrt();
        crate::tensor::increment(&mut idx, &vec![n; m]);
    }
    Ok(total)
}

/// `∫ f d vol` over a closed factor.
pub fn closed_integral(f: &Expression, g: &MetricField, n: usize) -> Result<f64> {
    crate::geometry::check_variables(g.chart(), f, "integrand")?;
    closed_quadrature(g, n, |p| f.eval(p))
}

/// Integrals entering the sign statement for closed warped bases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarpedIntegrals {
    /// `∫ w 'R d'vol`
    pub weighted_scalar: f64,
    /// `∫ 'Δw d'vol`; zero on a closed base by the divergence theorem.
    pub laplacian: f64,
}

impl WarpedIntegrals {
    /// `κ ∫ w 'R d'vol ≥ −tol`.
    pub fn sign_holds(&self, kappa: f64, tol: f64) -> bool {
        kappa * self.weighted_scalar >= -tol
    }
}

pub fn warped_base_integrals(wp: &WarpedProduct, n: usize) -> Result<WarpedIntegrals> {
    let weighted_scalar = closed_quadrature(&wp.base, n, |x| {
        let geo = LocalGeometry::at(&wp.base, x, 2)?;
        Ok(wp.warp.eval(x)? * geo.scalar_curvature())
    })?;
    let m1 = wp.base.dim();
    let laplacian = closed_quadrature(&wp.base, n, |x| {
        let geo = LocalGeometry::at(&wp.base, x, 1)?;
        let gamma = geo.christoffel();
        let ginv = geo.inverse();
        let mut lap = 0.0;
        for a in 0..m1 {
            let da = wp.warp.diff_index(a);
            for b in 0..m1 {
                let mut h = da.diff_index(b).eval(x)?;
                for c in 0..m1 {
                    h -= gamma.get(&[c, a, b]) * wp.warp.diff_index(c).eval(x)?;
                }
                lap += ginv.get(&[a, b]) * h;
            }
        }
        Ok(lap)
    })?;
    Ok(WarpedIntegrals {
        weighted_scalar,
        laplacian,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Coordinate;

    fn sphere(r: f64) -> MetricField {
        let chart = Chart::new(vec![Coordinate::polar("th"), Coordinate::angle("ph")]).unwrap();
        let r2 = format!("{}", r * r);
        let s = format!("{}*sin(th)^2", r * r);
        MetricField::diagonal(chart, &[&r2, &s], vec![1, 1]).unwrap()
    }

    fn line(name: &str) -> MetricField {
        MetricField::diagonal(Chart::cube(&[name], -1.0, 1.0).unwrap(), &["1"], vec![1]).unwrap()
    }

    #[test]
    fn hyperbolic_warped_blocks_match() {
        let base = line("r");
        let w = Expression::parse("exp(r)", &["r"]).unwrap();
        let wp = WarpedProduct::new(base, sphere(1.0), w).unwrap();
        let g = wp.metric().unwrap();
        let p = [0.3, 1.1, 2.0];
        assert!(warped_decomposition_residual(&wp, &g, &p).unwrap() < 1e-12);
        let o = warped_ricci_oracle(&wp.base, &wp.fiber, &wp.warp, &p).unwrap();
        assert!((o.block1.get(&[0, 0]) + 2.0).abs() < 1e-12);
    }

    #[test]
    fn unit_warp_is_plain_product() {
        let base = line("r");
        let one = Expression::parse("1", &["r"]).unwrap();
        let a = warped_product_metric(&base, &sphere(2.0), &one).unwrap();
        let b = product_metric(&base, &sphere(2.0)).unwrap();
        let p = [0.1, 0.7, 0.3];
        assert_eq!(a.at(&p).unwrap(), b.at(&p).unwrap());
    }

    #[test]
    fn nonpositive_warp_is_rejected() {
        let w = Expression::parse("r", &["r"]).unwrap();
        assert!(matches!(
            warped_product_metric(&line("r"), &sphere(1.0), &w),
            Err(Error::NonPositiveWarp { .. })
        ));
    }

    #[test]
    fn clashing_names_are_rejected() {
        assert!(matches!(
            product_metric(&sphere(1.0), &sphere(2.0)),
            Err(Error::CoordinateClash(_))
        ));
    }

    #[test]
    fn quadrature_on_closed_factors() {
        let circle = MetricField::diagonal(
            Chart::new(vec![Coordinate::angle("x")]).unwrap(),
            &["1"],
            vec![1],
        )
        .unwrap();
        let one = Expression::parse("1", &["x"]).unwrap();
        assert!((closed_integral(&one, &circle, 16).unwrap() - 2.0 * PI).abs() < 1e-13);
        let s = sphere(1.0);
        let one = Expression::parse("1", &["th", "ph"]).unwrap();
        let area = closed_integral(&one, &s, 64).unwrap();
        assert!((area - 4.0 * PI).abs() < 1e-12, "{area}");
        let z2 = Expression::parse("cos(th)^2", &["th", "ph"]).unwrap();
        assert!((closed_integral(&z2, &s, 64).unwrap() - 4.0 * PI / 3.0).abs() < 1e-12);
        assert!(matches!(
            closed_integral(&Expression::parse("1", &["r"]).unwrap(), &line("r"), 8),
            Err(Error::NotClosedFactor(_))
        ));
    }
}
