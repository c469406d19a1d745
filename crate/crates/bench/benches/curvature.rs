use criterion::{black_box, criterion_group, criterion_main, Criterion};
use wavemap_bench::{entry, point};
use wavemap_core::conditions::radiation_conditions;
use wavemap_core::LocalGeometry;

fn local_geometry(c: &mut Criterion) {
    for (name, order) in [("sphere", 2), ("hyperbolic_warped", 2), ("coupled_pp_wave", 3)] {
        let e = entry(name);
        let p = point(&e);
        c.bench_function(&format!("ricci/{name}/order{order}"), |b| {
            b.iter(|| LocalGeometry::at(black_box(&e.metric), black_box(&p), order).unwrap().ricci())
        });
    }
}

fn radiation(c: &mut Criterion) {
    let e = entry("bel_wave_twisted");
    let p = point(&e);
    let l = e.vector_field("l").unwrap().clone();
    c.bench_function("radiation/bel_wave_twisted", |b| {
        b.iter(|| radiation_conditions(black_box(&e.metric), &l, black_box(&p)).unwrap())
    });
}

criterion_group!(benches, local_geometry, radiation);
criterion_main!(benches);
