//! Sequential vs rayon-parallel execution of the main verification sweeps.
//!
//!     cargo bench -p mildlab --bench sweeps

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mildlab::crosscheck::{faa_cases, faa_sweep};
use mildlab::geometry::fixtures;
use mildlab::grid::clustered_grid;
use mildlab::substitution::{verify_main_crpara, verify_main_mildpara, GraphChart, Substitution};
use mildlab::sweep::{set_execution, Execution};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn certificates(c: &mut Criterion) {
    let fiber = fixtures::cusp().resolve(&[]).unwrap();
    let cell = fiber.cells[0].clone();
    let f = fiber.functions[0].function.clone();
    let grid = clustered_grid(2, 32);
    let cr = GraphChart::new(Substitution::phi_r(cell.clone(), 6).unwrap(), vec![f.clone()]);
    let inf = GraphChart::new(Substitution::phi_inf(cell, 1.0).unwrap(), vec![f]);

    let mut group = c.benchmark_group("cusp_certificates");
    group.sample_size(20);
    for (name, mode) in MODES {
        group.bench_function(BenchmarkId::new("crpara_r6", name), |b| {
            set_execution(mode);
            b.iter(|| verify_main_crpara("cusp", &cr, 6, &grid, 2.59, None).unwrap())
        });
        group.bench_function(BenchmarkId::new("mildpara_order8", name), |b| {
            set_execution(mode);
            b.iter(|| verify_main_mildpara("cusp", &inf, 1.0, &grid, 8, 50.0, None).unwrap())
        });
    }
    group.finish();
    set_execution(Execution::Parallel);
}

fn faa(c: &mut Criterion) {
    let cases = faa_cases(1, 60, 3, 6, 4);
    let mut group = c.benchmark_group("faa_sweep");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_function(name, |b| {
            set_execution(mode);
            b.iter(|| faa_sweep(&cases, 1e-10).unwrap())
        });
    }
    group.finish();
    set_execution(Execution::Parallel);
}

criterion_group!(benches, certificates, faa);
criterion_main!(benches);
