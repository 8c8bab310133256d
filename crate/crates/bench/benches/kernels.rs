//! Timings of the three heavy kernels: the area Cauchy transform, CGO
//! assembly and Neumann-to-Dirichlet assembly.

use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};

use pdcgo::calculus::dbar_inverse;
use pdcgo::cgo::assemble_cgo;
use pdcgo::domain::half_disk_domain;
use pdcgo::fem::assemble_nd_map;
use pdcgo::phase::{build_phase_with, PhaseOptions};
use pdcgo::{Amplitude, BoundaryBasis, GridFunction, PolarGrid, Potential, Profile, C64};

fn gaussian(z: C64) -> C64 {
    C64::new((-(z - C64::new(0.1, 0.3)).norm_sqr() / 0.08).exp(), 0.0)
}

fn cauchy(c: &mut Criterion) {
    for n in [64, 128] {
        let grid = Arc::new(PolarGrid::new(n).unwrap());
        let f = GridFunction::from_fn(&grid, gaussian);
        c.bench_function(&format!("dbar_inverse/n={n}"), |b| b.iter(|| dbar_inverse(black_box(&f))));
    }
}

fn cgo(c: &mut Criterion) {
    let domain = half_disk_domain(0.1, 0.1).unwrap();
    let phase =
        build_phase_with(C64::new(0.0, 0.3), &domain, 1e-3, &PhaseOptions { lambda: 0.25, ..Default::default() }).unwrap();
    let grid = Arc::new(PolarGrid::new(128).unwrap());
    let q = GridFunction::from_fn(&grid, gaussian);
    let amp = Amplitude::constant(1.0);
    c.bench_function("assemble_cgo/n=128,tau=10", |b| {
        b.iter(|| assemble_cgo(black_box(&q), &phase, &amp, 10.0).unwrap())
    });
}

fn nd_map(c: &mut Criterion) {
    let mut group = c.benchmark_group("assemble_nd_map");
    group.sample_size(10);
    for h in [0.1, 0.05] {
        let domain = half_disk_domain(0.1, h).unwrap();
        let q = Potential::from_profile(
            Profile::Gaussian { amplitude: 1.0, width: 0.3, center: [0.0, 0.3] },
            domain.mesh(),
        );
        let basis = BoundaryBasis::fourier(*domain.gamma_tilde(), 8);
        group.bench_function(format!("h={h}"), |b| {
            b.iter(|| assemble_nd_map(black_box(&q), &domain, basis.clone()))
        });
    }
    group.finish();
}

criterion_group!(benches, cauchy, cgo, nd_map);
criterion_main!(benches);
