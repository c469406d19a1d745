use std::sync::{Arc, OnceLock};

use super::chart::Chart;
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::linalg;
use crate::tensor::{TensorValue, Variance};

/// Packed index of `(a, b)` in a lower triangle.
pub(crate) fn tri(a: usize, b: usize) -> usize {
    let (a, b) = if a >= b { (a, b) } else { (b, a) };
    a * (a + 1) / 2 + b
}

/// Symbolic partial derivatives of a list of expressions up to order 3.
///
/// Layouts: `d1[k*m + i]`, `d2[(k*m + i)*m + j]`, `d3[((k*m + i)*m + j)*m + l]`.
/// Mixed partials are computed once for sorted indices and shared.
#[derive(Debug)]
pub(crate) struct DerivativeTable {
    m: usize,
    base: Vec<Expression>,
    d1: OnceLock<Vec<Expression>>,
    d2: OnceLock<Vec<Expression>>,
    d3: OnceLock<Vec<Expression>>,
}

impl DerivativeTable {
    pub(crate) fn new(base: Vec<Expression>, m: usize) -> DerivativeTable {
        DerivativeTable {
            m,
            base,
            d1: OnceLock::new(),
            d2: OnceLock::new(),
            d3: OnceLock::new(),
        }
    }

    pub(crate) fn base(&self) -> &[Expression] {
        &self.base
    }

    pub(crate) fn d1(&self) -> &[Expression] {
        self.d1.get_or_init(|| {
            let m = self.m;
            let mut out = Vec::with_capacity(self.base.len() * m);
            for e in &self.base {
                for i in 0..m {
                    out.push(e.diff_index(i));
                }
            }
            out
        })
    }

    pub(crate) fn d2(&self) -> &[Expression] {
        self.d2.get_or_init(|| {
            let m = self.m;
            let d1 = self.d1();
            let mut out: Vec<Option<Expression>> = vec![None; self.base.len() * m * m];
            for k in 0..self.base.len() {
                for i in 0..m {
                    for j in i..m {
                        let e = d1[k * m + i].diff_index(j);
                        out[(k * m + j) * m + i] = Some(e.clone());
                        out[(k * m + i) * m + j] = Some(e);
                    }
                }
            }
            out.into_iter().map(Option::unwrap).collect()
        })
    }

    pub(crate) fn d3(&self) -> &[Expression] {
        self.d3.get_or_init(|| {
            let m = self.m;
            let d2 = self.d2();
            let mut out: Vec<Option<Expression>> = vec![None; self.base.len() * m * m * m];
            for k in 0..self.base.len() {
                for i in 0..m {
                    for j in i..m {
                        for l in j..m {
                            let e = d2[(k * m + i) * m + j].diff_index(l);
                            for [a, b, c] in [
                                [i, j, l],
                                [i, l, j],
                                [j, i, l],
                                [j, l, i],
                                [l, i, j],
                                [l, j, i],
                            ] {
                                out[((k * m + a) * m + b) * m + c] = Some(e.clone());
                            }
                        }
                    }
                }
            }
            out.into_iter().map(Option::unwrap).collect()
        })
    }
}

/// Evaluated derivatives of a [`DerivativeTable`] at one point, same layouts.
#[derive(Debug, Clone)]
pub(crate) struct Jet {
    pub v: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    pub d3: Vec<f64>,
}

impl DerivativeTable {
    /// Evaluates values and partials up to `order` at `p`, using symmetry of mixed partials.
    pub(crate) fn jet(&self, p: &[f64], order: usize) -> Result<Jet> {
        let m = self.m;
        let n = self.base.len();
        let v = self
            .base
            .iter()
            .map(|e| e.eval(p))
            .collect::<Result<Vec<_>>>()?;
        let d1 = if order >= 1 {
            self.d1().iter().map(|e| e.eval(p)).collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        let mut d2 = Vec::new();
        if order >= 2 {
            let t = self.d2();
            d2 = vec![0.0; n * m * m];
            for k in 0..n {
                for i in 0..m {
                    for j in i..m {
                        let x = t[(k * m + i) * m + j].eval(p)?;
                        d2[(k * m + i) * m + j] = x;
                        d2[(k * m + j) * m + i] = x;
                    }
                }
            }
        }
        let mut d3 = Vec::new();
        if order >= 3 {
            let t = self.d3();
            d3 = vec![0.0; n * m * m * m];
            for k in 0..n {
                for i in 0..m {
                    for j in i..m {
                        for l in j..m {
                            let x = t[((k * m + i) * m + j) * m + l].eval(p)?;
                            for [a, b, c] in [
                                [i, j, l],
                                [i, l, j],
                                [j, i, l],
                                [j, l, i],
                                [l, i, j],
                                [l, j, i],
                            ] {
                                d3[((k * m + a) * m + b) * m + c] = x;
                            }
                        }
                    }
                }
            }
        }
        Ok(Jet { v, d1, d2, d3 })
    }
}

pub(crate) fn check_variables(chart: &Chart, e: &Expression, what: &str) -> Result<()> {
    if e.variables() != &chart.names()[..] {
        return Err(Error::InvalidVariables(format!(
            "{what} is over ({}) but the chart has ({})",
            e.variables().join(", "),
            chart.names().join(", ")
        )));
    }
    Ok(())
}

pub(crate) fn parse_all(chart: &Chart, sources: &[&str]) -> Result<Vec<Expression>> {
    sources
        .iter()
        .map(|s| Expression::parse_shared(s, chart.names()))
        .collect()
}

#[derive(Debug)]
struct MetricInner {
    chart: Chart,
    signature: Vec<i8>,
    table: DerivativeTable,
}

/// Symmetric metric `g_ab` over a chart. Only the lower triangle is stored.
///
/// Cheap to clone; derivative expressions are built once on first use and shared.
#[derive(Debug, Clone)]
pub struct MetricField(Arc<MetricInner>);

impl PartialEq for MetricField {
    fn eq(&self, other: &Self) -> bool {
        self.0.chart == other.0.chart
            && self.0.signature == other.0.signature
            && self.0.table.base == other.0.table.base
    }
}

impl MetricField {
    /// `lower` lists `g_ab` for `b <= a`, row by row: `g00, g10, g11, g20, ...`.
    pub fn new(chart: Chart, lower: Vec<Expression>, signature: Vec<i8>) -> Result<MetricField> {
        let m = chart.dim();
        if lower.len() != m * (m + 1) / 2 {
            return Err(Error::ShapeMismatch(format!(
                "a {m}-dimensional metric needs {} lower-triangle entries, got {}",
                m * (m + 1) / 2,
                lower.len()
            )));
        }
        if signature.len() != m || signature.iter().any(|s| *s != 1 && *s != -1) {
            return Err(Error::ShapeMismatch(format!(
                "signature {signature:?} must list {m} entries of +1 or -1"
            )));
        }
        for (k, e) in lower.iter().enumerate() {
            check_variables(&chart, e, &format!("metric entry {k}"))?;
        }
        Ok(MetricField(Arc::new(MetricInner {
            chart,
            signature,
            table: DerivativeTable::new(lower, m),
        })))
    }

    pub fn from_strings(chart: Chart, lower: &[&str], signature: Vec<i8>) -> Result<MetricField> {
        let exprs = parse_all(&chart, lower)?;
        MetricField::new(chart, exprs, signature)
    }

    /// Diagonal metric from its diagonal entries.
    pub fn diagonal(chart: Chart, diag: &[&str], signature: Vec<i8>) -> Result<MetricField> {
        let m = chart.dim();
        if diag.len() != m {
            return Err(Error::ShapeMismatch(format!(
                "{} diagonal entries for dimension {m}",
                diag.len()
            )));
        }
        let d = parse_all(&chart, diag)?;
        let zero = Expression::constant(0.0, chart.names());
        let mut lower = Vec::with_capacity(m * (m + 1) / 2);
        for a in 0..m {
            for b in 0..=a {
                lower.push(if a == b { d[a].clone() } else { zero.clone() });
            }
        }
        MetricField::new(chart, lower, signature)
    }

    /// Full symmetric matrix of expressions; checks symmetry.
    pub fn from_matrix(chart: Chart, full: Vec<Vec<Expression>>, signature: Vec<i8>) -> Result<MetricField> {
        let m = chart.dim();
        if full.len() != m || full.iter().any(|r| r.len() != m) {
            return Err(Error::ShapeMismatch(format!("metric matrix must be {m}x{m}")));
        }
        let mut lower = Vec::with_capacity(m * (m + 1) / 2);
        for a in 0..m {
            for b in 0..=a {
                if full[a][b] != full[b][a] {
                    return Err(Error::ShapeMismatch(format!(
                        "metric entries ({a},{b}) and ({b},{a}) differ"
                    )));
                }
                lower.push(full[a][b].clone());
            }
        }
        MetricField::new(chart, lower, signature)
    }

    pub fn chart(&self) -> &Chart {
        &self.0.chart
    }

    pub fn dim(&self) -> usize {
        self.0.chart.dim()
    }

    pub fn signature(&self) -> &[i8] {
        &self.0.signature
    }

    /// Whether the declared signature is all `+1`.
    pub fn is_riemannian(&self) -> bool {
        self.0.signature.iter().all(|s| *s == 1)
    }

    pub fn component(&self, a: usize, b: usize) -> &Expression {
        &self.0.table.base[tri(a, b)]
    }

    pub fn lower_triangle(&self) -> &[Expression] {
        &self.0.table.base
    }

    pub(crate) fn table(&self) -> &DerivativeTable {
        &self.0.table
    }

    fn check_point(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim() {
            return Err(Error::PointDimension {
                expected: self.dim(),
                got: p.len(),
            });
        }
        Ok(())
    }

    /// Metric components at `p` (2-down).
    pub fn at(&self, p: &[f64]) -> Result<TensorValue> {
        self.check_point(p)?;
        let m = self.dim();
        let packed = self
            .0
            .table
            .base
            .iter()
            .map(|e| e.eval(p))
            .collect::<Result<Vec<_>>>()?;
        Ok(TensorValue::from_fn(&[m, m], &[Variance::Down; 2], |i| {
            packed[tri(i[0], i[1])]
        }))
    }

    /// Sylvester check: eigenvalue signs at `p` must match the declared signature
    /// as a multiset.
    pub fn check_signature(&self, p: &[f64]) -> Result<()> {
        let g = self.at(p)?;
        let m = self.dim();
        let ev = linalg::symmetric_eigenvalues(m, g.data());
        let scale = ev.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let mut observed: Vec<i8> = ev
            .iter()
            .map(|x| {
                if x.abs() <= 1e-13 * scale || scale == 0.0 {
                    0
                } else if *x > 0.0 {
                    1
                } else {
                    -1
                }
            })
            .collect();
        let mut declared = self.0.signature.clone();
        observed.sort_unstable_by(|a, b| b.cmp(a));
        declared.sort_unstable_by(|a, b| b.cmp(a));
        if observed != declared {
            return Err(Error::SignatureMismatch {
                point: p.to_vec(),
                declared: self.0.signature.clone(),
                observed,
            });
        }
        Ok(())
    }
}

/// Vector field `v^a` over a chart.
#[derive(Debug, Clone)]
pub struct VectorField {
    chart: Chart,
    table: Arc<DerivativeTable>,
}

impl PartialEq for VectorField {
    fn eq(&self, other: &Self) -> bool {
        self.chart == other.chart && self.table.base == other.table.base
    }
}

impl VectorField {
    pub fn new(chart: Chart, components: Vec<Expression>) -> Result<VectorField> {
        if components.len() != chart.dim() {
            return Err(Error::ShapeMismatch(format!(
                "{} vector components for dimension {}",
                components.len(),
                chart.dim()
            )));
        }
        for (k, e) in components.iter().enumerate() {
            check_variables(&chart, e, &format!("vector component {k}"))?;
        }
        let m = chart.dim();
        Ok(VectorField {
            chart,
            table: Arc::new(DerivativeTable::new(components, m)),
        })
    }

    pub fn from_strings(chart: Chart, components: &[&str]) -> Result<VectorField> {
        let c = parse_all(&chart, components)?;
        VectorField::new(chart, c)
    }

    /// Coordinate field `∂_i`.
    pub fn coordinate(chart: Chart, i: usize) -> Result<VectorField> {
        if i >= chart.dim() {
            return Err(Error::ShapeMismatch(format!(
                "coordinate {i} out of range for dimension {}",
                chart.dim()
            )));
        }
        let comps = (0..chart.dim())
            .map(|k| Expression::constant(if k == i { 1.0 } else { 0.0 }, chart.names()))
            .collect();
        VectorField::new(chart, comps)
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn components(&self) -> &[Expression] {
        self.table.base()
    }

    pub fn at(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.components().iter().map(|e| e.eval(p)).collect()
    }

    /// Values and first partials; `d[a*m + c] = ∂_c v^a`.
    pub(crate) fn jet(&self, p: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let j = self.table.jet(p, 1)?;
        Ok((j.v, j.d1))
    }
}

/// Tensor field given as a dense row-major array of expressions.
#[derive(Debug, Clone)]
pub struct TensorField {
    chart: Chart,
    variance: Vec<Variance>,
    table: Arc<DerivativeTable>,
}

impl TensorField {
    pub fn new(chart: Chart, variance: Vec<Variance>, components: Vec<Expression>) -> Result<TensorField> {
        let m = chart.dim();
        let need = m.pow(variance.len() as u32);
        if components.len() != need {
            return Err(Error::ShapeMismatch(format!(
                "rank-{} field over dimension {m} needs {need} components, got {}",
                variance.len(),
                components.len()
            )));
        }
        for (k, e) in components.iter().enumerate() {
            check_variables(&chart, e, &format!("tensor component {k}"))?;
        }
        Ok(TensorField {
            chart,
            variance,
            table: Arc::new(DerivativeTable::new(components, m)),
        })
    }

    pub fn from_strings(chart: Chart, variance: Vec<Variance>, components: &[&str]) -> Result<TensorField> {
        let c = parse_all(&chart, components)?;
        TensorField::new(chart, variance, c)
    }

    /// The metric itself as a 2-down field.
    pub fn from_metric(g: &MetricField) -> TensorField {
        let m = g.dim();
        let comps = (0..m * m).map(|k| g.component(k / m, k % m).clone()).collect();
        TensorField::new(g.chart().clone(), vec![Variance::Down; 2], comps)
            .expect("metric components share the chart")
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn variance(&self) -> &[Variance] {
        &self.variance
    }

    pub fn components(&self) -> &[Expression] {
        self.table.base()
    }

    pub(crate) fn shape(&self) -> Vec<usize> {
        vec![self.chart.dim(); self.variance.len()]
    }

    pub fn at(&self, p: &[f64]) -> Result<TensorValue> {
        let data = self
            .components()
            .iter()
            .map(|e| e.eval(p))
            .collect::<Result<Vec<_>>>()?;
        TensorValue::from_vec(&self.shape(), &self.variance, data)
    }

    /// Value and partials; partials carry the derivative slot first.
    pub(crate) fn jet(&self, p: &[f64]) -> Result<(TensorValue, TensorValue)> {
        let m = self.chart.dim();
        let j = self.table.jet(p, 1)?;
        let shape = self.shape();
        let value = TensorValue::from_vec(&shape, &self.variance, j.v)?;
        let n = value.data().len();
        let mut dshape = vec![m];
        dshape.extend(&shape);
        let mut dvar = vec![Variance::Down];
        dvar.extend(&self.variance);
        // table layout is [component][c]; reorder to [c][component]
        let mut d = vec![0.0; m * n];
        for k in 0..n {
            for c in 0..m {
                d[c * n + k] = j.d1[k * m + c];
            }
        }
        Ok((value, TensorValue::from_vec(&dshape, &dvar, d)?))
    }
}
