//! Curvature engine on a single chart.
//!
//! Conventions, fixed globally:
//!
//! * signature `(+, −, …, −)` for Lorentzian metrics;
//! * `Γ^c_ab = ½ g^cd (∂_a g_db + ∂_b g_da − ∂_d g_ab)`;
//! * `R^d_cab = ∂_a Γ^d_bc − ∂_b Γ^d_ac + Γ^d_ae Γ^e_bc − Γ^d_be Γ^e_ac`,
//!   lowered on the first slot: `R_dcab = g_de R^e_cab`;
//! * `R_ab = R^c_acb`, `R = g^ab R_ab`.
//!
//! With these choices the round sphere of radius `r` has `Ric = g / r²` and
//! `R_θφθφ = r² sin²θ`, and the pp-wave `2 du dv + H du² − dx² − dy²` has
//! `R_uu = +½ (∂²_x + ∂²_y) H`.

mod chart;
mod local;
mod metric;

pub use chart::{Chart, CoordKind, Coordinate, POLE_BAND};
pub use local::{LocalGeometry, SINGULAR_THRESHOLD};
pub use metric::{MetricField, TensorField, VectorField};

pub(crate) use metric::{check_variables, parse_all, tri, DerivativeTable};

use crate::error::{Error, Result};
use crate::tensor::{TensorValue, Variance};

pub(crate) fn check_same_chart(a: &Chart, b: &Chart) -> Result<()> {
    if a.names() != b.names() {
        return Err(Error::ShapeMismatch(format!(
            "fields live on different charts: ({}) vs ({})",
            a.names().join(", "),
            b.names().join(", ")
        )));
    }
    Ok(())
}

pub fn inverse_metric(g: &MetricField, p: &[f64]) -> Result<TensorValue> {
    Ok(LocalGeometry::at(g, p, 1)?.inverse())
}

pub fn christoffel(g: &MetricField, p: &[f64]) -> Result<TensorValue> {
    Ok(LocalGeometry::at(g, p, 1)?.christoffel())
}

/// `R_abcd`, all indices down.
pub fn riemann(g: &MetricField, p: &[f64]) -> Result<TensorValue> {
    Ok(LocalGeometry::at(g, p, 2)?.riemann())
}

pub fn ricci(g: &MetricField, p: &[f64]) -> Result<TensorValue> {
    Ok(LocalGeometry::at(g, p, 2)?.ricci())
}

pub fn scalar_curvature(g: &MetricField, p: &[f64]) -> Result<f64> {
    Ok(LocalGeometry::at(g, p, 2)?.scalar_curvature())
}

pub fn einstein_tensor(g: &MetricField, p: &[f64]) -> Result<TensorValue> {
    Ok(LocalGeometry::at(g, p, 2)?.einstein())
}

/// `∇T` with the derivative index in slot 0.
pub fn covariant_derivative(g: &MetricField, t: &TensorField, p: &[f64]) -> Result<TensorValue> {
    check_same_chart(g.chart(), t.chart())?;
    let geo = LocalGeometry::at(g, p, 1)?;
    let (v, d) = t.jet(p)?;
    geo.covariant(&v, &d)
}

/// `g^bc ∇_c S_ab` from `∇S` laid out as `[c, a, b]`.
pub(crate) fn divergence_from_covariant(geo: &LocalGeometry, nabla: &TensorValue) -> TensorValue {
    let m = geo.dim();
    let ginv = geo.ginv();
    let data = (0..m)
        .map(|a| {
            let mut s = 0.0;
            for b in 0..m {
                for c in 0..m {
                    s += ginv[b * m + c] * nabla.get(&[c, a, b]);
                }
            }
            s
        })
        .collect();
    TensorValue::vector(data, Variance::Down)
}

fn check_two_down(s: &TensorField) -> Result<()> {
    if s.variance() != [Variance::Down, Variance::Down] {
        return Err(Error::ShapeMismatch(format!(
            "expected a 2-down tensor field, got variance {:?}",
            s.variance()
        )));
    }
    Ok(())
}

/// `∇^b S_ab` for a 2-down field `S`.
pub fn divergence(g: &MetricField, s: &TensorField, p: &[f64]) -> Result<TensorValue> {
    check_two_down(s)?;
    let nabla = covariant_derivative(g, s, p)?;
    let geo = LocalGeometry::at(g, p, 1)?;
    Ok(divergence_from_covariant(&geo, &nabla))
}

/// `∇^b G_ab`; vanishes identically by the contracted Bianchi identity.
pub fn einstein_divergence(g: &MetricField, p: &[f64]) -> Result<TensorValue> {
    let geo = LocalGeometry::at(g, p, 3)?;
    Ok(divergence_from_covariant(&geo, &geo.einstein_covariant()))
}

/// `(ℒ_v S)_ab = v^c ∂_c S_ab + S_cb ∂_a v^c + S_ac ∂_b v^c` from jets.
///
/// `dv[c*m + a] = ∂_a v^c`; `ds` is laid out `[c, a, b]`.
pub(crate) fn lie_from_jets(v: &[f64], dv: &[f64], s: &[f64], ds: &[f64]) -> TensorValue {
    let m = v.len();
    let mut out = vec![0.0; m * m];
    for a in 0..m {
        for b in 0..m {
            let mut x = 0.0;
            for c in 0..m {
                x += v[c] * ds[(c * m + a) * m + b]
                    + s[c * m + b] * dv[c * m + a]
                    + s[a * m + c] * dv[c * m + b];
            }
            out[a * m + b] = x;
        }
    }
    TensorValue::matrix(m, m, [Variance::Down; 2], out)
}

/// Lie derivative of a 2-down field along `v`.
pub fn lie_derivative(v: &VectorField, s: &TensorField, p: &[f64]) -> Result<TensorValue> {
    check_two_down(s)?;
    check_same_chart(v.chart(), s.chart())?;
    let (vv, dv) = v.jet(p)?;
    let (sv, ds) = s.jet(p)?;
    Ok(lie_from_jets(&vv, &dv, sv.data(), ds.data()))
}

/// Lie derivative of the Ricci tensor along `v`.
pub fn lie_derivative_ricci(g: &MetricField, v: &VectorField, p: &[f64]) -> Result<TensorValue> {
    check_same_chart(g.chart(), v.chart())?;
    let geo = LocalGeometry::at(g, p, 3)?;
    let (vv, dv) = v.jet(p)?;
    Ok(lie_from_jets(
        &vv,
        &dv,
        geo.ricci().data(),
        geo.ricci_partials().data(),
    ))
}
