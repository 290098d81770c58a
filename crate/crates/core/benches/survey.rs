//! Compares the data-parallel survey against the single-threaded path.
//!
//! Run `cargo bench -p rotodom-core` for the parallel default and
//! `cargo bench -p rotodom-core --no-default-features` to measure the
//! sequential implementation behind the same `survey` entry point.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rotodom_core::{survey, survey_sequential, SurveyOptions};

fn bench_survey(c: &mut Criterion) {
    let opts = SurveyOptions { mod_max: 6, ..Default::default() };
    let mut group = c.benchmark_group("survey");
    for q in [4usize, 5, 6] {
        group.bench_with_input(BenchmarkId::new("default", q), &q, |b, &q| {
            b.iter(|| survey(q, &opts).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("sequential", q), &q, |b, &q| {
            b.iter(|| survey_sequential(q, &opts).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_survey);
criterion_main!(benches);
