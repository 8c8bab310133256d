//! Empirical sampling of the weighted Carleman inequalities.
//!
//! Two modes:
//!
//! * `Gauged { n }`: weight `e^{τφ + N𝒞}` with the gauge `𝒞 = z²/8 + |z|²/4`,
//!   boundary terms over the whole circle;
//! * `AccessibleArc`: weight `e^{τφ}`, boundary terms over `Γ̃`, test functions with
//!   vanishing normal derivative on the circle.
//!
//! A sample records `LHS/RHS` with the constant on the right set to one, so the
//! largest ratio over a family is an empirical lower bound for the constant.
//! The boundary norm is `‖w‖²_{W^{1,τ}} = ‖w‖² + ‖∂_θw‖² + τ²‖w‖²`.

use std::f64::consts::TAU;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::series::uniform_angles;
use crate::{BoundaryArc, PhaseSpec, PolarGrid, C64};

/// The gauge `𝒞(z) = z²/8 + |z|²/4`: `2∂_z𝒞 = x₁`, so `C₁ = x₁`, `C₂ = 0`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Gauge;

impl Gauge {
    pub fn eval(&self, z: C64) -> C64 {
        z * z / 8.0 + z.norm_sqr() / 4.0
    }

    /// `∂_z𝒞 = z/4 + z̄/4`.
    pub fn dz(&self, z: C64) -> C64 {
        (z + z.conj()) / 4.0
    }

    /// `(∂_{x₁}𝒞, ∂_{x₂}𝒞)`.
    pub fn grad(&self, z: C64) -> [C64; 2] {
        [z / 4.0 + z.re / 2.0, C64::new(0.0, 0.25) * z + z.im / 2.0]
    }

    /// `∂C₁/∂x₁ + ∂C₂/∂x₂` with `C₁ + iC₂ = 2∂_z𝒞`.
    pub fn divergence(&self, z: C64) -> f64 {
        let h = 1e-5;
        let c = |w: C64| 2.0 * self.dz(w);
        (c(z + h).re - c(z - h).re) / (2.0 * h) + (c(z + C64::new(0.0, h)).im - c(z - C64::new(0.0, h)).im) / (2.0 * h)
    }
}

pub fn gauge_function() -> Gauge {
    Gauge
}

/// Real test function `G(s(r)e^{iθ})` with `G(ξ) = A exp(−|ξ − c|²/(2w²)) cos(k·ξ + φ₀)`
/// and `s(r) = r − r⁸/8`, so `∂_rṽ = 0` on the unit circle.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction {
    pub id: usize,
    pub amplitude: f64,
    pub center: C64,
    pub width: f64,
    pub wave: [f64; 2],
    pub offset: f64,
}

const FD: f64 = 1e-4;

impl TestFunction {
    pub fn zero(id: usize) -> Self {
        Self { id, amplitude: 0.0, center: C64::new(0.0, 0.0), width: 1.0, wave: [0.0, 0.0], offset: 0.0 }
    }

    pub fn is_zero(&self) -> bool {
        self.amplitude == 0.0
    }

    pub fn eval(&self, z: C64) -> f64 {
        let r = z.norm();
        let xi = if r == 0.0 { z } else { z * ((r - r.powi(8) / 8.0) / r) };
        let d = (xi - self.center).norm_sqr();
        self.amplitude
            * (-d / (2.0 * self.width * self.width)).exp()
            * (self.wave[0] * xi.re + self.wave[1] * xi.im + self.offset).cos()
    }

    /// Value, gradient and Laplacian by central differences.
    pub fn jet(&self, z: C64) -> (f64, [f64; 2], f64) {
        let f = |dx: f64, dy: f64| self.eval(z + C64::new(dx, dy));
        let c = f(0.0, 0.0);
        let (xp, xm, yp, ym) = (f(FD, 0.0), f(-FD, 0.0), f(0.0, FD), f(0.0, -FD));
        let grad = [(xp - xm) / (2.0 * FD), (yp - ym) / (2.0 * FD)];
        let lap = (xp + xm + yp + ym - 4.0 * c) / (FD * FD);
        (c, grad, lap)
    }

    /// `∂_r` and `∂_θ` on the unit circle.
    pub fn boundary_jet(&self, theta: f64) -> (f64, f64, f64) {
        let at = |r: f64, t: f64| self.eval(C64::from_polar(r, t));
        let v = at(1.0, theta);
        let dr = (at(1.0 + FD, theta) - at(1.0 - FD, theta)) / (2.0 * FD);
        let dt = (at(1.0, theta + FD) - at(1.0, theta - FD)) / (2.0 * FD);
        (v, dr, dt)
    }
}

/// Random admissible family: bumps with low-order plane-wave modulations,
/// a quarter of them centred at `focus`.
pub fn random_family(size: usize, seed: u64, focus: C64) -> Vec<TestFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..size)
        .map(|id| {
            let center = if id % 4 == 3 {
                focus
            } else {
                let (r, t): (f64, f64) = (0.85 * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..TAU));
                C64::from_polar(r, t)
            };
            TestFunction {
                id,
                amplitude: rng.gen_range(0.5..2.0),
                center,
                width: rng.gen_range(0.08..0.5),
                wave: [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)],
                offset: rng.gen_range(0.0..TAU),
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CarlemanMode {
    Gauged { n: f64 },
    AccessibleArc,
}

#[derive(Clone, Debug)]
pub struct CarlemanSample {
    pub tau: f64,
    pub n: Option<f64>,
    pub id: usize,
    pub lhs: f64,
    pub rhs: f64,
    /// `None` for degenerate (`LHS = RHS = 0`) and violation samples.
    pub ratio: Option<f64>,
    pub violation: bool,
}

/// τ-independent samples of one test function.
pub struct PreparedFunction {
    id: usize,
    jets: Vec<(f64, [f64; 2], f64)>,
    boundary: Vec<(f64, f64, f64)>,
}

/// Grid, phase and potential shared by all samples.
pub struct CarlemanSetup {
    grid: Arc<PolarGrid>,
    phase_grid: Vec<(f64, C64)>,
    q: Vec<f64>,
    theta: Vec<f64>,
    phase_boundary: Vec<(f64, C64)>,
    gamma_tilde: BoundaryArc,
}

impl CarlemanSetup {
    pub fn new(phase: &PhaseSpec, q: impl Fn(C64) -> f64, grid: Arc<PolarGrid>, boundary_samples: usize) -> Self {
        let (big_phi, d1) = phase.on_grid(&grid);
        let phase_grid = big_phi.iter().zip(&d1).map(|(p, d)| (p.re, *d)).collect();
        let qv = grid.points().iter().map(|z| q(*z)).collect();
        let theta = uniform_angles(boundary_samples);
        let circ = phase.on_circle(boundary_samples);
        let phase_boundary = circ[0].iter().zip(&circ[1]).map(|(p, d)| (p.re, *d)).collect();
        Self { grid, phase_grid, q: qv, theta, phase_boundary, gamma_tilde: *phase.gamma_tilde() }
    }

    pub fn prepare(&self, v: &TestFunction) -> PreparedFunction {
        PreparedFunction {
            id: v.id,
            jets: self.grid.points().iter().map(|z| v.jet(*z)).collect(),
            boundary: self.theta.iter().map(|t| v.boundary_jet(*t)).collect(),
        }
    }

    /// One sample of the inequality selected by `mode`.
    pub fn ratio(&self, v: &PreparedFunction, tau: f64, mode: CarlemanMode) -> CarlemanSample {
        let gauge = Gauge;
        let n = match mode {
            CarlemanMode::Gauged { n } => n,
            CarlemanMode::AccessibleArc => 0.0,
        };
        let (mut l_dbar, mut l_l2, mut l_grad, mut l_crit, mut r_eq) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (i, z) in self.grid.points().iter().enumerate() {
            let w = self.grid.weights()[i];
            let (phi, d1) = self.phase_grid[i];
            let (val, grad, lap) = v.jets[i];
            // Weight e^{τφ + N𝒞} and its gradient factor τ∇φ + N∇𝒞; ∇φ = (Re Φ', −Im Φ').
            let weight = (tau * phi + n * gauge.eval(*z)).exp();
            let gc = gauge.grad(*z);
            let g = [tau * d1.re + n * gc[0], -tau * d1.im + n * gc[1]];
            let m2 = weight.norm_sqr();
            let dbar = C64::new(grad[0], grad[1]);
            let gx = grad[0] + val * g[0];
            let gy = grad[1] + val * g[1];
            l_dbar += w * m2 * dbar.norm_sqr();
            l_l2 += w * m2 * val * val;
            l_grad += w * m2 * (gx.norm_sqr() + gy.norm_sqr());
            l_crit += w * m2 * d1.norm_sqr() * val * val;
            let lv = lap + self.q[i] * val;
            r_eq += w * m2 * lv * lv;
        }
        let lhs = 0.5 * n * l_dbar + tau * l_l2 + (l_l2 + l_grad) + tau * tau * l_crit;
        let ds = TAU / self.theta.len() as f64;
        let mut bdry = 0.0;
        for (k, t) in self.theta.iter().enumerate() {
            let on_arc = match mode {
                CarlemanMode::Gauged { .. } => true,
                CarlemanMode::AccessibleArc => self.gamma_tilde.contains(*t),
            };
            if !on_arc {
                continue;
            }
            let z = C64::from_polar(1.0, *t);
            let (phi, d1) = self.phase_boundary[k];
            let (val, dr, dt) = v.boundary[k];
            let weight = (tau * phi + n * gauge.eval(z)).exp();
            let gc = gauge.grad(z);
            // Tangential and normal components of τ∇φ + N∇𝒞 on the circle.
            let (c, s) = (t.cos(), t.sin());
            let g = [tau * d1.re + n * gc[0], -tau * d1.im + n * gc[1]];
            let g_t = -s * g[0] + c * g[1];
            let g_n = c * g[0] + s * g[1];
            let w_val = weight * val;
            let w_tan = weight * (dt + val * g_t);
            let w_nrm = match mode {
                // ∂_νṽ · e^{τφ+N𝒞}
                CarlemanMode::Gauged { .. } => weight * dr,
                // ∂_ν(ṽe^{τφ})
                CarlemanMode::AccessibleArc => weight * (dr + val * g_n),
            };
            bdry += ds * ((1.0 + tau * tau) * w_val.norm_sqr() + w_tan.norm_sqr() + w_nrm.norm_sqr());
        }
        let rhs = r_eq + tau * bdry;
        let n_field = match mode {
            CarlemanMode::Gauged { n } => Some(n),
            CarlemanMode::AccessibleArc => None,
        };
        let (ratio, violation) = if rhs > 0.0 {
            (Some(lhs / rhs), false)
        } else {
            (None, lhs > 0.0)
        };
        CarlemanSample { tau, n: n_field, id: v.id, lhs, rhs, ratio, violation }
    }
}

/// Summary of one τ in a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub tau: f64,
    pub n: Option<f64>,
    pub max_ratio: f64,
    pub median_ratio: f64,
    pub violations: usize,
    pub samples: usize,
}

pub fn carleman_sweep(setup: &CarlemanSetup, family: &[TestFunction], taus: &[f64], mode: CarlemanMode) -> Vec<SweepRow> {
    if family.is_empty() {
        return Vec::new();
    }
    let prepared: Vec<PreparedFunction> = family.iter().filter(|v| !v.is_zero()).map(|v| setup.prepare(v)).collect();
    taus.iter()
        .map(|&tau| {
            let samples: Vec<CarlemanSample> = prepared.iter().map(|p| setup.ratio(p, tau, mode)).collect();
            let mut ratios: Vec<f64> = samples.iter().filter_map(|s| s.ratio).collect();
            ratios.sort_by(f64::total_cmp);
            let median = if ratios.is_empty() { f64::NAN } else { ratios[ratios.len() / 2] };
            SweepRow {
                tau,
                n: samples.first().and_then(|s| s.n),
                max_ratio: ratios.last().copied().unwrap_or(f64::NAN),
                median_ratio: median,
                violations: samples.iter().filter(|s| s.violation).count(),
                samples: ratios.len(),
            }
        })
        .collect()
}

/// Least-squares slope of `log(max_ratio)` against `log τ`.
pub fn trend_slope(rows: &[SweepRow]) -> f64 {
    let pts: Vec<(f64, f64)> =
        rows.iter().filter(|r| r.max_ratio > 0.0).map(|r| (r.tau.ln(), r.max_ratio.ln())).collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::half_disk_domain;
    use crate::phase::build_phase_with;
    use crate::PhaseOptions;

    fn setup() -> (CarlemanSetup, PhaseSpec) {
        let domain = half_disk_domain(0.1, 0.25).unwrap();
        let opts = PhaseOptions { lambda: 0.25, ..Default::default() };
        let phase = build_phase_with(C64::new(0.0, 0.4), &domain, 1e-3, &opts).unwrap();
        let grid = Arc::new(PolarGrid::new(96).unwrap());
        (CarlemanSetup::new(&phase, |_| 0.0, grid, 1024), phase)
    }

    #[test]
    fn gauge_identities() {
        let g = gauge_function();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut max_re: f64 = 0.0;
        for _ in 0..100 {
            let z = C64::from_polar(rng.gen::<f64>().sqrt(), rng.gen_range(0.0..TAU));
            assert!((2.0 * g.dz(z) - z.re).norm() < 1e-12);
            assert!((g.divergence(z) - 1.0).abs() < 1e-8);
        }
        for t in uniform_angles(4096) {
            max_re = max_re.max(g.eval(C64::from_polar(1.0, t)).re);
        }
        assert!((max_re - 0.375).abs() < 1e-9);
    }

    #[test]
    fn test_functions_have_zero_normal_derivative() {
        for v in random_family(8, 3, C64::new(0.0, 0.4)) {
            for t in uniform_angles(64) {
                assert!(v.boundary_jet(t).1.abs() < 1e-6);
            }
        }
    }

    #[test]
    fn zero_function_is_degenerate() {
        let (s, _) = setup();
        let p = s.prepare(&TestFunction::zero(0));
        let sample = s.ratio(&p, 20.0, CarlemanMode::AccessibleArc);
        assert_eq!((sample.lhs, sample.rhs, sample.ratio, sample.violation), (0.0, 0.0, None, false));
        assert!(carleman_sweep(&s, &[], &[10.0], CarlemanMode::AccessibleArc).is_empty());
    }

    #[test]
    fn interior_bump_has_finite_ratio() {
        let (s, phase) = setup();
        let v = TestFunction { id: 1, amplitude: 1.0, center: phase.x_tilde(), width: 0.15, wave: [0.0, 0.0], offset: 0.0 };
        let p = s.prepare(&v);
        let r = s.ratio(&p, 20.0, CarlemanMode::AccessibleArc).ratio.unwrap();
        assert!(r.is_finite() && r > 0.0);
    }

    #[test]
    fn ratio_of_bump_at_critical_point_stays_in_band() {
        let domain = half_disk_domain(0.1, 0.25).unwrap();
        let opts = PhaseOptions { lambda: 0.25, ..Default::default() };
        let phase = build_phase_with(C64::new(0.0, 0.3), &domain, 1e-3, &opts).unwrap();
        let s = CarlemanSetup::new(&phase, |_| 0.0, Arc::new(PolarGrid::new(192).unwrap()), 4096);
        let v = TestFunction { id: 0, amplitude: 1.0, center: phase.x_tilde(), width: 0.05, wave: [0.0, 0.0], offset: 0.0 };
        let p = s.prepare(&v);
        let r: Vec<f64> = [10.0, 20.0, 40.0, 80.0].iter().map(|&t| s.ratio(&p, t, CarlemanMode::AccessibleArc).ratio.unwrap()).collect();
        let (lo, hi) = r.iter().fold((f64::MAX, 0.0f64), |(a, b), x| (a.min(*x), b.max(*x)));
        assert!(hi / lo < 3.0, "{r:?}");
    }

    #[test]
    fn gauge_weight_enters_both_sides() {
        let (s, _) = setup();
        let v = &random_family(1, 11, C64::new(0.0, 0.0))[0];
        let p = s.prepare(v);
        let a = s.ratio(&p, 10.0, CarlemanMode::Gauged { n: 0.0 });
        let b = s.ratio(&p, 10.0, CarlemanMode::Gauged { n: 2.0 });
        assert_eq!(b.n, Some(2.0));
        assert!(a.lhs != b.lhs && a.rhs != b.rhs);
        assert!(b.ratio.unwrap().is_finite());
    }
}
