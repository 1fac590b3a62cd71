use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use qcdperf_core::membench::{pool_elems_for_bytes, run_qcdstream, BenchConfig};
use qcdperf_core::{AccessPattern, Kernel, MachineProfile, Timing};

/// Large enough to leave L2 on current hosts, small enough for a quick bench run.
const POOL_BYTES: usize = 32 << 20;

fn patterns(c: &mut Criterion) {
    let cfg = BenchConfig { profile: MachineProfile::detect(), timing: Timing { min_seconds: 0.0, trials: 1 } };
    let mut g = c.benchmark_group("qcdstream");
    g.sample_size(10);
    for kernel in [Kernel::MatVec, Kernel::MatMat] {
        let n = pool_elems_for_bytes(kernel, POOL_BYTES);
        g.throughput(Throughput::Elements(n as u64));
        for pattern in AccessPattern::all(1) {
            g.bench_function(BenchmarkId::new(kernel.name(), pattern.name()), |bch| {
                bch.iter(|| run_qcdstream(kernel, pattern, n, 1, &cfg).unwrap().checksum)
            });
        }
    }
    g.finish();
}

criterion_group!(benches, patterns);
criterion_main!(benches);
