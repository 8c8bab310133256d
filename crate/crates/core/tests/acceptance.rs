//! Acceptance suite. Each test prints one `criterion N: PASS|FAIL` line and
//! then asserts the same condition.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pdcgo::calculus::{dbar_inverse, dbar_inverse_full, r_tilde_tau, wirtinger};
use pdcgo::carleman::{carleman_sweep, random_family, trend_slope, CarlemanMode, CarlemanSetup};
use pdcgo::cgo::assemble_cgo;
use pdcgo::domain::half_disk_domain;
use pdcgo::fem::{assemble_nd_map, assemble_nd_map_on, relative_difference, spectral_norm};
use pdcgo::phase::{build_amplitude, build_phase, build_phase_with, verify_phase};
use pdcgo::recovery::{
    gauged_pairing, recover_point, trace_load, volume_pairing, CubicModel, RecoveryInput, RecoveryOptions,
};
use pdcgo::*;

fn report(n: usize, pass: bool, detail: String, start: Instant) {
    println!(
        "criterion {n}: {} ({detail}; {:.1}s)",
        if pass { "PASS" } else { "FAIL" },
        start.elapsed().as_secs_f64()
    );
}

fn rel_l2(grid: &PolarGrid, a: &[C64], b: &[C64]) -> f64 {
    let w = grid.weights();
    let num: f64 = a.iter().zip(b).zip(w).map(|((x, y), w)| (x - y).norm_sqr() * w).sum();
    let den: f64 = b.iter().zip(w).map(|(y, w)| y.norm_sqr() * w).sum();
    (num / den).sqrt()
}

fn sci(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>().join(", ")
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).map(|(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn gaussian(center: [f64; 2]) -> Profile {
    Profile::Gaussian { amplitude: 1.0, width: 0.3, center }
}

#[test]
fn criterion_01_cauchy_transform_identity() {
    let start = Instant::now();
    let grid = Arc::new(PolarGrid::new(128).unwrap());
    let tests: [Box<dyn Fn(C64) -> C64>; 5] = [
        Box::new(|z| (-(z - C64::new(0.2, 0.1)).norm_sqr() / 0.08).exp() * C64::new(1.0, 0.5)),
        Box::new(|z| z.conj() * z.conj() + z),
        Box::new(|z| C64::new(z.re.cos() * z.im.exp(), 0.0)),
        Box::new(|z| z * z.norm_sqr() - C64::new(0.0, 2.0)),
        Box::new(|z| C64::new((3.0 * z.re).sin(), (2.0 * z.im).cos())),
    ];
    let errs: Vec<f64> = tests
        .iter()
        .map(|f| {
            let g = GridFunction::from_fn(&grid, f);
            let (_, back) = wirtinger(&dbar_inverse(&g));
            rel_l2(&grid, back.values(), g.values())
        })
        .collect();
    let worst = errs.iter().cloned().fold(0.0, f64::max);
    let fine = Arc::new(PolarGrid::new(256).unwrap());
    let out = dbar_inverse_full(&GridFunction::from_fn(&fine, |_| C64::new(1.0, 0.0)));
    let uniform = fine.points().iter().zip(out.values.values()).map(|(z, v)| (v - z.conj()).norm()).fold(0.0, f64::max);
    let pass = worst <= 1e-3 && uniform <= 1e-6;
    report(1, pass, format!("max relative L2 {worst:.2e}, uniform density {uniform:.2e}"), start);
    assert!(pass);
}

#[test]
fn criterion_02_oscillatory_operator_identity() {
    let start = Instant::now();
    let domain = half_disk_domain(0.1, 0.25).unwrap();
    let phase = build_phase_with(C64::new(0.0, 0.3), &domain, 1e-3, &PhaseOptions { lambda: 0.25, ..Default::default() })
        .unwrap();
    let grid = Arc::new(PolarGrid::new(256).unwrap());
    let (big_phi, _) = phase.on_grid(&grid);
    let psi: Vec<f64> = big_phi.iter().map(|p| p.im).collect();
    let g = GridFunction::from_fn(&grid, |z| C64::new((-(z - C64::new(0.1, 0.2)).norm_sqr() / 0.1).exp(), z.re));
    let mut errs = Vec::new();
    for tau in [10.0, 20.0] {
        let w = OscillatoryWeight::from_psi(tau, &psi).unwrap();
        let rt = r_tilde_tau(&g, &w).unwrap();
        let weighted = GridFunction::new(
            grid.clone(),
            rt.values().iter().zip(&big_phi).map(|(v, p)| v * (tau * p).exp()).collect(),
        )
        .unwrap();
        let (dz, _) = wirtinger(&weighted);
        let lhs: Vec<C64> = dz.values().iter().map(|v| 2.0 * v).collect();
        let rhs: Vec<C64> = g.values().iter().zip(&big_phi).map(|(v, p)| v * (tau * p).exp()).collect();
        errs.push(rel_l2(&grid, &lhs, &rhs));
    }
    let worst = errs.iter().cloned().fold(0.0, f64::max);
    let pass = worst <= 2e-2;
    report(2, pass, format!("relative errors {}", sci(&errs)), start);
    assert!(pass);
}

#[test]
fn criterion_03_phase_construction() {
    let start = Instant::now();
    let domain = half_disk_domain(0.1, 0.25).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut failures = Vec::new();
    let mut worst_place: f64 = 0.0;
    for _ in 0..10 {
        let target = C64::from_polar(0.6 * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..2.0 * PI));
        match build_phase(target, &domain, 1e-3) {
            Ok(phase) => {
                let rep = verify_phase(&phase, &domain);
                let place = (phase.x_tilde() - target).norm();
                worst_place = worst_place.max(place);
                let ok = place <= 1e-3
                    && rep.max_im_on_gamma0_star <= 1e-10
                    && phase.hessian_det() < 0.0
                    && phase.psi_at_target() != 0.0
                    && rep.passed;
                if !ok {
                    failures.push(format!("{target:.3}: {:?}", rep.failures));
                }
            }
            Err(e) => failures.push(format!("{target:.3}: {e}")),
        }
    }
    let pass = failures.is_empty();
    report(3, pass, format!("worst placement {worst_place:.2e}, failures {failures:?}"), start);
    assert!(pass);
}

#[test]
fn criterion_04_cgo_residual_decay() {
    let start = Instant::now();
    let domain = half_disk_domain(0.1, 0.1).unwrap();
    let phase = build_phase_with(C64::new(0.0, 0.4), &domain, 0.05, &PhaseOptions { lambda: 0.25, ..Default::default() })
        .unwrap();
    let grid = Arc::new(PolarGrid::new(512).unwrap());
    let q = GridFunction::from_fn(&grid, |z| C64::new((-(z - C64::new(0.1, 0.3)).norm_sqr() / 0.08).exp(), 0.0));
    let taus = [10.0, 20.0, 40.0, 80.0];
    let (mut g, mut neu) = (Vec::new(), Vec::new());
    for tau in taus {
        let sol = assemble_cgo(&q, &phase, &Amplitude::constant(1.0), tau).unwrap();
        g.push(sol.residuals().g_l2);
        neu.push(sol.residuals().neumann_gamma0);
    }
    let (sg, sn) = (slope(&taus, &g), slope(&taus, &neu));
    let pass = sg <= -0.8 && sn <= -0.8;
    report(4, pass, format!("slopes g {sg:.3}, Neumann on Γ₀ {sn:.3}"), start);
    assert!(pass);
}

#[test]
fn criterion_05_nd_map_oracle() {
    let start = Instant::now();
    let mesh = Mesh::disk(0.02).unwrap();
    let nd = assemble_nd_map_on(
        &Potential::from_profile(Profile::Zero, &mesh),
        &mesh,
        BoundaryBasis::fourier(BoundaryArc::full(), 8),
    );
    let m = nd.matrix();
    let exact = nalgebra::DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| if i == j { PI / (i / 2 + 1) as f64 } else { 0.0 });
    let rel = spectral_norm(&(m - &exact)) / spectral_norm(&exact);
    let defect = nd.symmetry_defect();
    let pass = rel <= 1e-3 && defect <= 1e-3;
    report(5, pass, format!("relative spectral error {rel:.2e}, symmetry defect {defect:.2e}"), start);
    assert!(pass);
}

#[test]
fn criterion_06_green_identity_consistency() {
    let start = Instant::now();
    let probe = C64::new(0.0, 0.3);
    let base = half_disk_domain(0.1, 0.25).unwrap();
    let phase = build_phase_with(probe, &base, 1e-3, &PhaseOptions { lambda: 0.25, ..Default::default() }).unwrap();
    let amp = build_amplitude(&phase).unwrap();
    let bump = Profile::Bump { amplitude: 0.5, radius: 0.4, center: [-0.2, 0.1] };
    let pairs = [
        (gaussian([0.0, 0.3]), Profile::Zero),
        (Profile::Bump { amplitude: 2.0, radius: 0.5, center: [0.1, 0.2] }, Profile::Zero),
        (gaussian([0.0, 0.3]), bump),
    ];
    let grids = [Arc::new(PolarGrid::new(512).unwrap()), Arc::new(PolarGrid::new(768).unwrap())];
    let meshes = [half_disk_domain(0.1, 0.02).unwrap(), half_disk_domain(0.1, 0.01).unwrap()];
    let mut lines = Vec::new();
    let mut pass = true;
    for (p1, p2) in &pairs {
        let maps: Vec<_> = meshes
            .iter()
            .map(|d| {
                let basis = BoundaryBasis::Nodal { arc: *d.gamma_tilde() };
                let n1 = assemble_nd_map(&Potential::from_profile(p1.clone(), d.mesh()), d, basis.clone());
                let n2 = assemble_nd_map(&Potential::from_profile(p2.clone(), d.mesh()), d, basis);
                (n1, n2)
            })
            .collect();
        for tau in [20.0, 40.0] {
            let mut vp = Vec::new();
            let mut sols = None;
            for grid in &grids {
                let q1 = GridFunction::from_fn(grid, |z| C64::new(p1.eval(z), 0.0));
                let q2 = GridFunction::from_fn(grid, |z| C64::new(p2.eval(z), 0.0));
                let diff = q1.zip_with(&q2, |a, b| a - b);
                let u = assemble_cgo(&q1, &phase, &amp, tau).unwrap();
                let v = assemble_cgo(&q2, &phase, &amp, -tau).unwrap();
                vp.push(volume_pairing(&u, &v, &diff).unwrap());
                sols = Some((u, v));
            }
            let (u, v) = sols.unwrap();
            let bp: Vec<C64> = meshes
                .iter()
                .zip(&maps)
                .map(|(d, (n1, n2))| {
                    let f = trace_load(d, n1, &u);
                    let g = trace_load(d, n1, &v);
                    gauged_pairing(n1, n2, p1.is_zero(), p2.is_zero(), &f, &g).unwrap()
                })
                .collect();
            let estimate = (bp[1] - bp[0]).norm() + (vp[1] - vp[0]).norm();
            let gap = (vp[1] - bp[1]).norm();
            let ok = gap <= 2.0 * estimate;
            pass &= ok;
            lines.push(format!(
                "τ {tau}: gap {gap:.3e} vs 2×{estimate:.3e} (mesh {:.1e}, grid {:.1e})",
                (bp[1] - bp[0]).norm(),
                (vp[1] - vp[0]).norm()
            ));
        }
    }
    report(6, pass, lines.join("; "), start);
    assert!(pass);
}

#[test]
fn criterion_07_stationary_phase_model() {
    let start = Instant::now();
    let model = CubicModel { b: 1.0 };
    let grid = PolarGrid::new(512).unwrap();
    let errs: Vec<f64> = [20.0, 40.0, 60.0]
        .iter()
        .map(|&tau| {
            let p = model.bump_prediction(tau);
            (model.bump_integral(0.8, tau, &grid) - p).norm() / p.norm()
        })
        .collect();
    let pass = errs[2] <= 0.1 && errs[0] > errs[1] && errs[1] > errs[2];
    report(7, pass, format!("relative errors {}", sci(&errs)), start);
    assert!(pass);
}

#[test]
fn criterion_08_end_to_end_recovery() {
    let start = Instant::now();
    let domain = half_disk_domain(0.1, 0.02).unwrap();
    let prof = gaussian([0.0, 0.3]);
    let q1 = Potential::from_profile(prof.clone(), domain.mesh());
    let q2 = Potential::from_profile(Profile::Zero, domain.mesh());
    let basis = BoundaryBasis::Nodal { arc: *domain.gamma_tilde() };
    let nd1 = assemble_nd_map(&q1, &domain, basis.clone());
    let nd2 = assemble_nd_map(&q2, &domain, basis);
    let input = RecoveryInput { domain, nd1, nd2, q1, q2 };
    let schedule: Vec<f64> = (0..10).map(|k| 8.0 + 0.5 * k as f64).collect();
    let probe = C64::new(0.0, 0.3);
    let result = recover_point(&input, probe, &schedule, &RecoveryOptions::default()).unwrap();
    let truth = prof.eval(probe);
    let rel = (result.estimate - truth).abs() / truth;
    let pass = rel <= 0.25;
    report(8, pass, format!("estimate {:.4} vs {truth:.4}, relative error {rel:.3}, {}", result.estimate, result.status), start);
    assert!(pass);
}

#[test]
fn criterion_09_distinguishability() {
    let start = Instant::now();
    let domain = half_disk_domain(0.1, 0.05).unwrap();
    let basis = BoundaryBasis::fourier(*domain.gamma_tilde(), 8);
    let nd = |p: Profile| assemble_nd_map(&Potential::from_profile(p, domain.mesh()), &domain, basis.clone());
    let bump = nd(gaussian([0.0, 0.3]));
    let zero = nd(Profile::Zero);
    let again = nd(gaussian([0.0, 0.3]));
    let defect = bump.symmetry_defect().max(zero.symmetry_defect());
    let distinct = relative_difference(&bump, &zero).unwrap();
    let same = relative_difference(&bump, &again).unwrap();
    let pass = distinct > 10.0 * defect && same <= defect;
    report(9, pass, format!("difference {distinct:.3e}, equal pair {same:.1e}, defect {defect:.3e}"), start);
    assert!(pass);
}

#[test]
fn criterion_10_carleman_sweep() {
    let start = Instant::now();
    let domain = half_disk_domain(0.1, 0.25).unwrap();
    let phase = build_phase_with(C64::new(0.0, 0.3), &domain, 1e-3, &PhaseOptions { lambda: 0.25, ..Default::default() })
        .unwrap();
    let prof = gaussian([0.0, 0.3]);
    let setup = CarlemanSetup::new(&phase, |z| prof.eval(z), Arc::new(PolarGrid::new(192).unwrap()), 4096);
    let family = random_family(100, 42, phase.x_tilde());
    let taus: Vec<f64> = (1..=10).map(|k| 10.0 * k as f64).collect();
    let rows = carleman_sweep(&setup, &family, &taus, CarlemanMode::AccessibleArc);
    let violations: usize = rows.iter().map(|r| r.violations).sum();
    let s = trend_slope(&rows);
    let pass = violations == 0 && s <= 0.1 && rows.iter().all(|r| r.samples == 100);
    report(10, pass, format!("violations {violations}, max-ratio slope {s:.3}"), start);
    assert!(pass);
}
