use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use coxwo::catalog;
use coxwo::convexity::{classify, Target};
use coxwo::par;
use coxwo::rootstore::{RootSet, RootStore, Subsystem};
use coxwo::windowindex::WindowIndex;

fn window_index(c: &mut Criterion) {
    let mut group = c.benchmark_group("window_index_depth3");
    group.sample_size(10);
    for (name, sys) in [("universal3", catalog::universal3()), ("affine_c2", catalog::affine_c2())] {
        group.bench_with_input(BenchmarkId::new("parallel", name), &sys, |b, sys| {
            b.iter(|| WindowIndex::new(&mut RootStore::new(sys.clone()), 3, &[]).len())
        });
        group.bench_with_input(BenchmarkId::new("sequential", name), &sys, |b, sys| {
            b.iter(|| par::sequential(|| WindowIndex::new(&mut RootStore::new(sys.clone()), 3, &[]).len()))
        });
    }
    group.finish();
}

fn classify_window(c: &mut Criterion) {
    let sys = catalog::universal3();
    let sub = Subsystem::full(&sys);
    let mut store = RootStore::with_depth(sys.clone(), 6);
    let set: RootSet = store.up_to(2).iter().map(|r| r.vec.clone()).collect();
    let mut group = c.benchmark_group("classify_depth6");
    group.sample_size(10);
    let target = Target { set: &set, finite: false, sub: &sub, imaginary: &[] };
    group.bench_function("parallel", |b| b.iter(|| classify(&mut store, target, 6).closed.value));
    group.bench_function("sequential", |b| {
        b.iter(|| par::sequential(|| classify(&mut store, target, 6).closed.value))
    });
    group.finish();
}

criterion_group!(benches, window_index, classify_window);
criterion_main!(benches);
