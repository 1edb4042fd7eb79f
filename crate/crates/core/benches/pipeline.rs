use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hodge_rsm::dec::Cochain;
use hodge_rsm::par::{set_execution, Execution};
use hodge_rsm::rsm::{raising_steps, RsmConfig};
use hodge_rsm::{generate_test_manifold, ManifoldKind, Workspace, WorkspaceOptions};

fn bench_pipeline(c: &mut Criterion) {
    let mesh = generate_test_manifold(ManifoldKind::FlatTorus, 32, 0.0).unwrap();
    let mut group = c.benchmark_group("pipeline");
    group.sample_size(10);
    for (label, mode) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        set_execution(mode);
        group.bench_with_input(BenchmarkId::new("workspace", label), &mesh, |b, m| {
            b.iter(|| Workspace::new(m.clone(), WorkspaceOptions::default()).unwrap())
        });
        let ws = Workspace::new(mesh.clone(), WorkspaceOptions::default()).unwrap();
        ws.local_solver(1).unwrap();
        let omega = Cochain::random(ws.mesh(), 1, &mut ChaCha8Rng::seed_from_u64(3));
        group.bench_with_input(BenchmarkId::new("raising_steps", label), &omega, |b, w| {
            b.iter(|| raising_steps(&ws, w, &RsmConfig::new(1.5)).unwrap())
        });
    }
    set_execution(Execution::Parallel);
    group.finish();
}

criterion_group!(benches, bench_pipeline);
criterion_main!(benches);
