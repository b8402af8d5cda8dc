use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use loopbundle_core::gauge::{curvature, LocalConnectionForm, PolynomialPotential};
use loopbundle_core::loop_core::{indexed_rng, left_divide, product, right_divide, sample_pair};
use loopbundle_core::reconstruct::reconstruct_product;
use loopbundle_core::tangent::structure_functions;
use loopbundle_core::zoo::catalog;
use loopbundle_core::{Region, SmoothLoop};

fn arithmetic(c: &mut Criterion) {
    let mut g = c.benchmark_group("arithmetic");
    for l in catalog() {
        let (a, b) = sample_pair(&l, &mut indexed_rng(1, 0), Region::Local);
        let ab = product(&l, &a, &b).unwrap();
        g.bench_with_input(BenchmarkId::new("product", l.name()), &l, |bch, l| bch.iter(|| product(l, black_box(&a), black_box(&b))));
        g.bench_with_input(BenchmarkId::new("left_divide", l.name()), &l, |bch, l| bch.iter(|| left_divide(l, black_box(&a), black_box(&ab))));
        g.bench_with_input(BenchmarkId::new("right_divide", l.name()), &l, |bch, l| bch.iter(|| right_divide(l, black_box(&ab), black_box(&b))));
    }
    g.finish();
}

fn tangent(c: &mut Criterion) {
    let mut g = c.benchmark_group("structure_functions");
    for l in catalog() {
        let a = l.sample_point(&mut indexed_rng(2, 0), Region::Local);
        g.bench_with_input(BenchmarkId::from_parameter(l.name()), &l, |bch, l| bch.iter(|| structure_functions(l, black_box(&a))));
    }
    g.finish();
}

fn reconstruction(c: &mut Criterion) {
    let mut g = c.benchmark_group("reconstruct_64_steps");
    g.sample_size(20);
    for l in catalog() {
        let (a, b) = sample_pair(&l, &mut indexed_rng(3, 0), Region::Local);
        g.bench_with_input(BenchmarkId::from_parameter(l.name()), &l, |bch, l| bch.iter(|| reconstruct_product(l, black_box(&a), black_box(&b), 64)));
    }
    g.finish();
}

fn gauge(c: &mut Criterion) {
    let mut g = c.benchmark_group("curvature");
    for l in catalog() {
        let mut rng = indexed_rng(4, 0);
        let p = PolynomialPotential::random(l.dim(), 3, 2, 0.5, &mut rng);
        let y = l.sample_point(&mut rng, Region::Local);
        let form = LocalConnectionForm::new("U", p, l).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(l.name()), &form, |bch, f| bch.iter(|| curvature(f, black_box(&[0.1, -0.2, 0.3]), black_box(&y))));
    }
    g.finish();
}

criterion_group!(benches, arithmetic, tangent, reconstruction, gauge);
criterion_main!(benches);
