use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use zaremba::fem::{assemble_with, solve_on_mesh, DEFAULT_TOL};
use zaremba::geometry::{DomainBoundary, Point2};
use zaremba::mesh;
use zaremba::Execution;

fn modes() -> [(&'static str, Execution); 2] {
    [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)]
}

fn square_mesh(h: f64) -> mesh::Mesh {
    let d = DomainBoundary::polygon(&[Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(1.0, 1.0), Point2::new(0.0, 1.0)]).unwrap();
    mesh::generate(&d, h, None).unwrap()
}

fn assembly(c: &mut Criterion) {
    let mut g = c.benchmark_group("assembly");
    for h in [0.05, 0.02] {
        let m = square_mesh(h);
        for (name, exec) in modes() {
            g.bench_with_input(BenchmarkId::new(name, m.triangles.len()), &m, |b, m| {
                b.iter(|| assemble_with(black_box(m), &[0, 1], exec).unwrap())
            });
        }
    }
    g.finish();
}

fn eigensolve(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve");
    g.sample_size(10);
    let m = square_mesh(0.03);
    for (name, exec) in modes() {
        g.bench_with_input(BenchmarkId::new(name, m.triangles.len()), &m, |b, m| {
            b.iter(|| solve_on_mesh(black_box(m), &[0, 1], DEFAULT_TOL, None, exec).unwrap().0.lambda)
        });
    }
    g.finish();
}

criterion_group!(benches, assembly, eigensolve);
criterion_main!(benches);
