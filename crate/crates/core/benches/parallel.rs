use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use grc::adversarial::{adversarial_trials, ConcatCode};
use grc::degreeopt::{lp_bruteforce_oracle, mc_random_graph_experiment, LpInstance, ProbabilityRule};
use grc::graphrepair::{Scheme, StorageGraph};
use grc::Execution;

fn modes() -> Vec<(&'static str, Execution)> {
    let mut m = vec![("sequential", Execution::Sequential)];
    if Execution::is_parallel_available() {
        m.push(("parallel", Execution::Parallel));
    }
    m
}

fn monte_carlo(c: &mut Criterion) {
    let mut g = c.benchmark_group("random_graph_trend");
    g.sample_size(10);
    for (name, exec) in modes() {
        g.bench_with_input(BenchmarkId::new(name, "n=100,trials=64"), &exec, |b, &exec| {
            b.iter(|| mc_random_graph_experiment(&[100], ProbabilityRule::LogFactor(3.0), 0.5, 64, 7, exec).unwrap())
        });
    }
    g.finish();
}

fn lp_oracle(c: &mut Criterion) {
    let inst = LpInstance::new(6, 2, 12, vec![5, 4, 3, 2, 1]).unwrap();
    let mut g = c.benchmark_group("lp_grid_oracle");
    g.sample_size(10);
    for (name, exec) in modes() {
        g.bench_with_input(BenchmarkId::new(name, "n=6,Q=12"), &exec, |b, &exec| {
            b.iter(|| lp_bruteforce_oracle(&inst, 12, exec).unwrap())
        });
    }
    g.finish();
}

fn adversarial(c: &mut Criterion) {
    let code = ConcatCode::fig5().unwrap();
    let g5 = StorageGraph::fig5();
    let setup = code.repair_setup(&g5, 0, &(1..10).collect::<Vec<_>>()).unwrap();
    let mut g = c.benchmark_group("adversarial_trials");
    g.sample_size(10);
    for (name, exec) in modes() {
        g.bench_with_input(BenchmarkId::new(name, "fig5,trials=8"), &exec, |b, &exec| {
            b.iter(|| adversarial_trials(&code, &setup, 1, Scheme::IpUniform, 8, 3, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, monte_carlo, lp_oracle, adversarial);
criterion_main!(benches);
