use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use crowdfuse::sim::{
    run_experiment, sample_groups, synthesize_population, GroupingPlan, PopulationModel,
    SyntheticPopulationSpec,
};
use crowdfuse::{Execution, FusionMethod};

const MODES: [Execution; 2] = [Execution::Sequential, Execution::Parallel];

fn bench_synthesis(c: &mut Criterion) {
    let mut group = c.benchmark_group("synthesize_population");
    group.sample_size(20);
    for n in [223usize, 2000] {
        let spec = SyntheticPopulationSpec::new(n, PopulationModel::default(), 1);
        for mode in MODES {
            group.bench_with_input(BenchmarkId::new(mode.to_string(), n), &spec, |b, spec| {
                b.iter(|| synthesize_population(spec, mode).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_experiment(c: &mut Criterion) {
    let spec = SyntheticPopulationSpec::new(223, PopulationModel::default(), 1);
    let dataset = synthesize_population(&spec, Execution::Parallel).unwrap();
    let ids: Vec<&str> = dataset.examiner_ids().collect();

    let mut group = c.benchmark_group("run_experiment");
    group.sample_size(10);
    for k in [3usize, 7] {
        let crowds = sample_groups(&ids, &GroupingPlan::new(k, 1000, 7).unwrap()).unwrap();
        for mode in MODES {
            group.bench_with_input(BenchmarkId::new(mode.to_string(), k), &crowds, |b, crowds| {
                b.iter(|| run_experiment(&dataset, crowds, &FusionMethod::ALL, mode).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_synthesis, bench_experiment);
criterion_main!(benches);
