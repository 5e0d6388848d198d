//! Sequential against rayon backends on the two embarrassingly parallel
//! workloads: a trajectory ensemble and a heuristic sweep over a corpus.
//! Without the `parallel` feature both arms run the same plain loop.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use udmis_core::exec::{derive_seed, Backend};
use udmis_core::graph::UnitDiskGraph;
use udmis_core::heuristic::{self, HeuristicConfig};
use udmis_core::rydberg::{basis_for, simulate_basis, AnnealConfig, SimOptions};

const BACKENDS: [(&str, Backend); 2] = [
    ("sequential", Backend::Sequential),
    ("parallel", Backend::Parallel),
];

fn trajectories(c: &mut Criterion) {
    let g = UnitDiskGraph::generate(12, 2.0, 0.3, 7).unwrap();
    let cfg = AnnealConfig::with_tf(1.5).unwrap();
    let basis = basis_for(&g, &cfg, &SimOptions::default()).unwrap();
    let mut group = c.benchmark_group("trajectory_ensemble");
    group.sample_size(10);
    for (name, backend) in BACKENDS {
        let opts = SimOptions {
            n_traj: 32,
            seed: 1,
            backend,
            ..Default::default()
        };
        group.bench_with_input(BenchmarkId::new(name, "n12_gamma3"), &opts, |b, opts| {
            b.iter(|| simulate_basis(&basis, &cfg, 3.0, opts).unwrap())
        });
    }
    group.finish();
}

fn heuristic_corpus(c: &mut Criterion) {
    let corpus: Vec<UnitDiskGraph> = (0..16)
        .map(|k| UnitDiskGraph::generate(200, 2.0, 0.3, 100 + k).unwrap())
        .collect();
    let mut group = c.benchmark_group("heuristic_corpus");
    group.sample_size(10);
    for (name, backend) in BACKENDS {
        group.bench_function(BenchmarkId::new(name, "16x_n200_d2"), |b| {
            b.iter(|| {
                backend.map(corpus.len(), |k| {
                    let cfg = HeuristicConfig {
                        d: 2,
                        seed: derive_seed(9, k as u64),
                    };
                    heuristic::run(&corpus[k], cfg).0.hamming_weight()
                })
            })
        });
    }
    group.finish();
}

criterion_group!(benches, trajectories, heuristic_corpus);
criterion_main!(benches);
