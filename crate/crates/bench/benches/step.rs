use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pedflow_bench::warmed_state;
use pedflow_core::{Engine, Model};

fn step_executors(c: &mut Criterion) {
    let mut group = c.benchmark_group("step");
    group.sample_size(20);
    for model in Model::ALL {
        let (state, config) = warmed_state(240, 6400, model, 50);
        let policy = config.policy();
        let engines = [
            ("seq", Engine::sequential().with_checks(false)),
            ("par", Engine::parallel(0).unwrap().with_checks(false)),
        ];
        for (name, engine) in &engines {
            group.bench_with_input(BenchmarkId::new(model.as_str(), name), &state, |b, s| {
                b.iter_batched_ref(
                    || s.clone(),
                    |s| engine.step(s, &policy).unwrap(),
                    criterion::BatchSize::LargeInput,
                )
            });
        }
    }
    group.finish();
}

fn resolve_only(c: &mut Criterion) {
    let (mut state, config) = warmed_state(480, 25_600, Model::Lem, 20);
    let policy = config.policy();
    let engine = Engine::sequential().with_checks(false);
    engine.score_phase(&mut state, &policy).unwrap();
    engine.intention_phase(&mut state, &policy);
    c.bench_function("resolve_contenders/480", |b| {
        b.iter(|| engine.resolve_contenders(&state))
    });
}

criterion_group!(benches, step_executors, resolve_only);
criterion_main!(benches);
