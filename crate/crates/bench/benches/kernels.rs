//! Wall-clock cost of each kernel: sequential vs 8-core fork-join, native
//! vs emulated arithmetic. The op-count speedups live in the reports; these
//! numbers only show what emulation and threading cost on the host.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nml_bench::workload;
use nml_core::model::KernelKind;
use nml_core::parallel::Exec;
use nml_core::perf::Workload;
use nml_core::{Backend, ClusterConfig, Mode};

const QUERIES: usize = 32;

fn kernels(c: &mut Criterion) {
    for kind in KernelKind::ALL {
        let (model, data) = workload(kind, if kind == KernelKind::KMeans { 400 } else { QUERIES }, 42);
        let w = Workload::new(&model, &data);
        let mut group = c.benchmark_group(kind.name());
        group.sample_size(10);
        for mode in [Mode::Native, Mode::Emulated] {
            group.bench_function(BenchmarkId::new("sequential", mode), |b| {
                b.iter(|| black_box(w.run_sequential(&mut Backend::new(mode)).unwrap()))
            });
            for (label, exec) in [("threads8", Exec::Threads), ("virtual8", Exec::Virtual)] {
                let cfg = ClusterConfig::new(8).unwrap().with_exec(exec);
                group.bench_function(BenchmarkId::new(label, mode), |b| {
                    b.iter(|| black_box(w.run_parallel(&cfg, &mut Backend::new(mode)).unwrap()))
                });
            }
        }
        group.finish();
    }
}

criterion_group!(benches, kernels);
criterion_main!(benches);
