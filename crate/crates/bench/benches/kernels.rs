// Copyright 2026 The stokescell authors
//
// Licensed under the Apache license, version 2.0 (the "license");
// you may not use this file except in compliance with the license.
// You may obtain a copy of the license at
//
//     http://www.apache.org/licenses/license-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the license is distributed on an "as is" basis,
// without warranties or conditions of any kind, either express or implied.
// See the license for the specific language governing permissions and
// limitations under the license.


use criterion::{black_box, criterion_group, criterion_main, Criterion};
use std::sync::Arc;
use stokescell::capacity::solve_kernel_basis;
use stokescell::cell::{solve_cells, CellContext};
use stokescell::nystrom::assemble_np;
use stokescell::periodic::{PeriodicGreen, TorusGreen};
use stokescell::*;

fn green(c: &mut Criterion) {
    for dim in [2, 3] {
        let g = PeriodicGreen::new(dim).unwrap();
        let x = Point::new(0.3, 0.1, if dim == 3 { -0.2 } else { 0.0 });
        c.bench_function(&format!("periodic_green_{dim}d"), |b| b.iter(|| g.eval(black_box(&x)).unwrap()));
        c.bench_function(&format!("periodic_remainder_{dim}d"), |b| b.iter(|| g.remainder(black_box(&x))));
    }
}

fn assembly(c: &mut Criterion) {
    let kite = build_mesh(&ShapeSpec::kite(0.37), MeshSize::Curve(256)).unwrap();
    c.bench_function("np_assembly_kite_256", |b| b.iter(|| assemble_np(black_box(&kite))));
    let sphere = build_mesh(&ShapeSpec::sphere(0.25), MeshSize::Sphere(8, 16)).unwrap();
    let mut g = c.benchmark_group("sphere_8x16");
    g.sample_size(10);
    g.bench_function("np_assembly", |b| b.iter(|| assemble_np(black_box(&sphere))));
    g.bench_function("kernel_basis", |b| b.iter(|| solve_kernel_basis(black_box(&sphere)).unwrap()));
    g.finish();
}

fn cell(c: &mut Criterion) {
    let mesh = build_mesh(&ShapeSpec::ellipse(0.3, 0.2), MeshSize::Curve(128)).unwrap();
    let cap = solve_kernel_basis(&mesh).unwrap();
    let mut g = c.benchmark_group("ellipse_128");
    g.sample_size(10);
    g.bench_function("cell_context", |b| b.iter(|| CellContext::new(&mesh, &cap, 0.1).unwrap()));
    let ctx = Arc::new(CellContext::new(&mesh, &cap, 0.1).unwrap());
    g.bench_function("cell_solve", |b| b.iter(|| solve_cells(ctx.clone()).unwrap()));
    g.bench_function("torus_green_setup", |b| b.iter(|| TorusGreen::new(2, black_box(0.1)).unwrap()));
    g.finish();
}

criterion_group!(benches, green, assembly, cell);
criterion_main!(benches);
