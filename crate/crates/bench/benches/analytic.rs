use criterion::{black_box, criterion_group, criterion_main, Criterion};

use tempora_core::analytic::efficiency_surface;
use tempora_core::timespace::apparent_time_ratio;

fn analytic_benches(c: &mut Criterion) {
    c.bench_function("apparent_time_ratio", |b| {
        b.iter(|| apparent_time_ratio(black_box(1.7)).unwrap())
    });

    let ns: Vec<u64> = (0..100).map(|k| 1 + 100 * k).collect();
    let omas: Vec<f64> = (1..=100).map(|k| k as f64 * 1e-4).collect();
    c.bench_function("efficiency surface 100x100", |b| {
        b.iter(|| efficiency_surface(black_box(&ns), black_box(&omas)).unwrap())
    });
}

criterion_group!(benches, analytic_benches);
criterion_main!(benches);
