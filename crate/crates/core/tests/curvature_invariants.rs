//! Identities every catalog metric must satisfy pointwise.

use wavemap_core::catalog::{self, ENTRIES};
use wavemap_core::geometry::{einstein_divergence, LocalGeometry};

#[test]
fn riemann_symmetries_on_every_entry() {
    for info in ENTRIES {
        let e = catalog::build(info.name, &[]).unwrap();
        for p in e.metric.chart().random_points(100, 21).unwrap() {
            let r = LocalGeometry::at(&e.metric, &p, 2).unwrap().riemann();
            let tol = 1e-10 * (1.0 + r.max_abs());
            let m = e.metric.dim();
            for a in 0..m {
                for b in 0..m {
                    for c in 0..m {
                        for d in 0..m {
                            let v = r.get(&[a, b, c, d]);
                            assert!((v + r.get(&[b, a, c, d])).abs() <= tol, "{}: first pair", info.name);
                            assert!((v + r.get(&[a, b, d, c])).abs() <= tol, "{}: second pair", info.name);
                            assert!((v - r.get(&[c, d, a, b])).abs() <= tol, "{}: pair swap", info.name);
                            let cyclic = v + r.get(&[a, c, d, b]) + r.get(&[a, d, b, c]);
                            assert!(cyclic.abs() <= tol, "{}: first Bianchi", info.name);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn contracted_bianchi_on_every_entry() {
    for info in ENTRIES {
        let e = catalog::build(info.name, &[]).unwrap();
        for p in e.metric.chart().random_points(20, 22).unwrap() {
            let div = einstein_divergence(&e.metric, &p).unwrap();
            assert!(div.max_abs() <= 1e-9, "{} at {p:?}: {div}", info.name);
        }
    }
}

#[test]
fn raise_then_lower_is_identity() {
    for info in ENTRIES {
        let e = catalog::build(info.name, &[]).unwrap();
        for p in e.metric.chart().random_points(10, 23).unwrap() {
            let geo = LocalGeometry::at(&e.metric, &p, 2).unwrap();
            let ric = geo.ricci();
            let back = ric
                .raise(0, &geo.inverse())
                .unwrap()
                .lower(0, &geo.metric())
                .unwrap();
            let tol = 1e-11 * (1.0 + ric.max_abs());
            assert!(back.sub(&ric).unwrap().max_abs() <= tol, "{}", info.name);
            // g^ab g_bc = δ^a_c
            let mixed = geo.metric().raise(0, &geo.inverse()).unwrap();
            for a in 0..e.metric.dim() {
                for c in 0..e.metric.dim() {
                    let delta = if a == c { 1.0 } else { 0.0 };
                    assert!((mixed.get(&[a, c]) - delta).abs() <= 1e-11, "{}", info.name);
                }
            }
        }
    }
}

#[test]
fn product_ricci_is_block_diagonal() {
    let e = catalog::build("sphere_product", &[]).unwrap();
    for p in e.metric.chart().random_points(20, 24).unwrap() {
        let ric = LocalGeometry::at(&e.metric, &p, 2).unwrap().ricci();
        for a in 0..2 {
            for b in 2..4 {
                assert!(ric.get(&[a, b]).abs() < 1e-12);
            }
        }
    }
}
