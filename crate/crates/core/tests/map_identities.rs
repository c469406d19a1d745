//! Identities of random polynomial maps on flat and curved sources.

use proptest::prelude::*;
use wavemap_core::catalog;
use wavemap_core::einstein::{full_residual_at, ricci_residual_at, symmetric_rank};
use wavemap_core::geometry::{Chart, MetricField};
use wavemap_core::maps::{MapPoint, SmoothMap, TargetGeometry, RANK_TOLERANCE};

const SOURCES: [&str; 4] = ["minkowski", "euclidean", "sphere", "hyperbolic_warped"];

fn source(k: usize) -> MetricField {
    let params = if SOURCES[k] == "minkowski" { vec![("dim".to_string(), 3.0)] } else { vec![] };
    catalog::build(SOURCES[k], &params).unwrap().metric
}

fn target(curved: bool) -> TargetGeometry {
    let chart = Chart::lines(&["y0", "y1"]).unwrap();
    if curved {
        TargetGeometry::from_strings(chart, &["2 + sin(y1)", "cos(y0)/2", "2 + cos(y0*y1)"]).unwrap()
    } else {
        TargetGeometry::from_strings(chart, &["1", "0", "1"]).unwrap()
    }
}

/// Quadratic polynomial over `names` from `coef` (constant, linear, then `i <= j` products).
fn polynomial(names: &[String], coef: &[f64], only_first: bool) -> String {
    let m = names.len();
    let mut terms = vec![format!("{}", coef[0])];
    let mut k = 1;
    for i in 0..m {
        if !only_first || i == 0 {
            terms.push(format!("{}*{}", coef[k], names[i]));
        }
        k += 1;
    }
    for i in 0..m {
        for j in i..m {
            if !only_first || (i == 0 && j == 0) {
                terms.push(format!("{}*{}*{}", coef[k], names[i], names[j]));
            }
            k += 1;
        }
    }
    terms.join(" + ")
}

#[derive(Debug, Clone)]
struct Case {
    source: usize,
    curved: bool,
    degenerate: bool,
    coef: Vec<f64>,
    seed: u64,
}

fn case() -> impl Strategy<Value = Case> {
    (0..SOURCES.len(), any::<bool>(), prop::bool::weighted(0.2), prop::collection::vec(-1.0f64..1.0, 20), any::<u64>())
        .prop_map(|(source, curved, degenerate, coef, seed)| Case { source, curved, degenerate, coef, seed })
}

fn build(c: &Case) -> (MetricField, SmoothMap, Vec<f64>) {
    let g = source(c.source);
    let names = g.chart().names().to_vec();
    // Two components from disjoint coefficient windows.
    let a = polynomial(&names, &c.coef[..10], c.degenerate);
    let b = polynomial(&names, &c.coef[10..], c.degenerate);
    let phi = SmoothMap::from_strings(g.chart().clone(), target(c.curved), &[&a, &b]).unwrap();
    let p = g.chart().random_points(1, c.seed).unwrap().remove(0);
    (g, phi, p)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn stress_divergence_identity(c in case()) {
        let (g, phi, p) = build(&c);
        let mp = MapPoint::at(&phi, &g, &p, 2).unwrap();
        let (lhs, rhs) = mp.jet.stress_divergence(&mp.geo);
        let scale = 1.0 + rhs.max_abs();
        prop_assert!(lhs.sub(&rhs).unwrap().max_abs() <= 1e-9 * scale, "{lhs} vs {rhs}");
    }

    #[test]
    fn stress_trace_and_hessian_symmetry(c in case()) {
        let (g, phi, p) = build(&c);
        let mp = MapPoint::at(&phi, &g, &p, 2).unwrap();
        let t = mp.jet.energy_momentum(&mp.geo);
        let e = mp.jet.energy_density(&mp.geo);
        let trace = t.raise(0, &mp.geo.inverse()).unwrap();
        let tr: f64 = (0..g.dim()).map(|a| trace.get(&[a, a])).sum();
        prop_assert!((tr - (2.0 - g.dim() as f64) * e).abs() <= 1e-11 * (1.0 + e.abs()));
        let hess = mp.jet.second_fundamental_form(&mp.geo);
        prop_assert!(hess.asymmetry(1, 2) <= 1e-12 * (1.0 + hess.max_abs()));
    }

    #[test]
    fn differential_and_pullback_share_rank(c in case()) {
        let (g, phi, p) = build(&c);
        let jet = phi.jet(&p, 1).unwrap();
        let pull = symmetric_rank(g.dim(), jet.pullback().data(), RANK_TOLERANCE);
        prop_assert_eq!(jet.rank(RANK_TOLERANCE), pull);
        if c.degenerate {
            prop_assert!(pull <= 1);
        }
    }

    #[test]
    fn trace_reversal_links_the_two_residuals(c in case(), kappa in prop_oneof![-3.0f64..-0.1, 0.1f64..3.0]) {
        let (g, phi, p) = build(&c);
        prop_assume!(g.dim() >= 3);
        let mp = MapPoint::at(&phi, &g, &p, 2).unwrap();
        let e = ricci_residual_at(kappa, &mp);
        let full = full_residual_at(kappa, &mp);
        let ginv = mp.geo.inverse();
        let tr: f64 = (0..g.dim()).flat_map(|a| (0..g.dim()).map(move |b| (a, b)))
            .map(|(a, b)| ginv.get(&[a, b]) * e.get(&[a, b]))
            .sum();
        let expected = e.sub(&mp.geo.metric().scaled(0.5 * tr)).unwrap();
        prop_assert!(full.sub(&expected).unwrap().max_abs() <= 1e-10 * (1.0 + e.max_abs()));
    }
}

#[test]
fn traveling_wave_is_divergence_free() {
    let e = catalog::build("traveling_wave", &[]).unwrap();
    let phi = e.map.as_ref().unwrap();
    for p in e.metric.chart().random_points(50, 9).unwrap() {
        let mp = MapPoint::at(phi, &e.metric, &p, 2).unwrap();
        let (lhs, _) = mp.jet.stress_divergence(&mp.geo);
        assert!(lhs.max_abs() <= 1e-10);
    }
}
