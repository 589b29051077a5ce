use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use kopl_bench::{count_program, synthetic_pipeline};
use kopl_core::kb::synthetic::entity_name;
use kopl_core::linker::softmax;
use kopl_core::execute_program;

fn execution(c: &mut Criterion) {
    let p = count_program();
    let mut g = c.benchmark_group("find_all_filter_concept_count");
    for n in [1_000usize, 10_000, 100_000] {
        let (kb, _) = synthetic_pipeline(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| execute_program(black_box(&kb), black_box(&p)).unwrap())
        });
    }
    g.finish();
}

fn answer(c: &mut Criterion) {
    let mut g = c.benchmark_group("answer_question");
    g.sample_size(20);
    for n in [1_000usize, 100_000] {
        let (_, p) = synthetic_pipeline(n);
        let q = format!("What is the mass of {}?", entity_name(n / 2));
        g.bench_with_input(BenchmarkId::from_parameter(n), &q, |b, q| b.iter(|| p.answer(black_box(q)).unwrap()));
    }
    g.finish();
}

fn scoring(c: &mut Criterion) {
    let scores: Vec<f64> = (0..100_000).map(|i| (i % 997) as f64 * 0.01).collect();
    c.bench_function("softmax_100k", |b| b.iter(|| softmax(black_box(&scores))));
}

criterion_group!(benches, execution, answer, scoring);
criterion_main!(benches);
